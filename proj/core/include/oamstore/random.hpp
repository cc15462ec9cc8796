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

#ifndef OAMSTORE_RANDOM_HPP
#define OAMSTORE_RANDOM_HPP

// Seed splitting. Every random draw in oamstore comes from one user seed:
// a substream is keyed by (seed, stream tag, index), where the index is the
// window number for event simulation, the setting number for count tables and
// the resample number for Monte Carlo errors. Substreams are independent of
// thread scheduling, so parallel and serial runs produce identical output.
// Exact streams are tied to this implementation and its standard library's
// distributions; only statistical equivalence is promised elsewhere.

#include <cstdint>
#include <limits>

namespace oamstore::random {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class Stream : std::uint64_t {
  emission = 1,
  detection = 2,
  count_table = 3,
  background_table = 4,
  resample = 5,
  test = 99,
};

inline constexpr std::uint64_t substream_seed(std::uint64_t seed, Stream stream, std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream))) + index);
}

/// SplitMix64 as a UniformRandomBitGenerator. Cheap to construct, which is what
/// per-window substreams need.
class Engine {
 public:
  using result_type = std::uint64_t;

  explicit Engine(std::uint64_t state) : state_(state) {}
  Engine(std::uint64_t seed, Stream stream, std::uint64_t index)
      : state_(substream_seed(seed, stream, index)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace oamstore::random

#endif
