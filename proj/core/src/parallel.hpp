// Copyright 2026 The oamstore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OAMSTORE_SRC_PARALLEL_HPP
#define OAMSTORE_SRC_PARALLEL_HPP

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace oamstore::detail {

/// Runs fn(begin, end, out) over contiguous index chunks on worker threads and
/// concatenates the per-chunk outputs in index order.
template <class T, class F>
std::vector<T> parallel_collect(std::int64_t n, F fn, std::int64_t min_chunk = 1 << 16) {
  std::int64_t workers = std::max<std::int64_t>(1, std::thread::hardware_concurrency());
  workers = std::clamp<std::int64_t>(n / min_chunk, 1, workers);
  std::vector<std::vector<T>> parts(static_cast<std::size_t>(workers));
  std::vector<std::thread> threads;
  for (std::int64_t k = 0; k < workers; ++k) {
    std::int64_t begin = n * k / workers;
    std::int64_t end = n * (k + 1) / workers;
    auto& out = parts[static_cast<std::size_t>(k)];
    if (workers == 1) {
      fn(begin, end, out);
    } else {
      threads.emplace_back([&fn, begin, end, &out] { fn(begin, end, out); });
    }
  }
  for (auto& t : threads) t.join();
  std::vector<T> merged;
  std::size_t total = 0;
  for (auto& p : parts) total += p.size();
  merged.reserve(total);
  for (auto& p : parts) std::move(p.begin(), p.end(), std::back_inserter(merged));
  return merged;
}

}  // namespace oamstore::detail

#endif
