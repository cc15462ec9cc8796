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


#include <benchmark/benchmark.h>

#include "oamstore/counts.hpp"
#include "oamstore/source.hpp"

namespace {

using namespace oamstore;

source::SourceConfig thermal(std::int64_t windows) {
  source::SourceConfig c;
  c.pair_rate = 0.1;
  c.transmission_signal1 = c.transmission_signal2 = 1.0;
  c.window_count = windows;
  return c;
}

void BM_SampleEmissions(benchmark::State& state) {
  auto cfg = thermal(state.range(0));
  auto spectrum = source::SchmidtSpectrum::uniform({1, -1});
  for (auto _ : state) benchmark::DoNotOptimize(source::sample_emissions(cfg, spectrum, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleEmissions)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_Detect(benchmark::State& state) {
  auto cfg = thermal(state.range(0));
  auto em = source::sample_emissions(cfg, source::SchmidtSpectrum::uniform({0}), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(counts::detect(em, 1.0, 1.0, counts::ChannelMap::correlation(), {}, 2));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Detect)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_Histogram(benchmark::State& state) {
  auto cfg = thermal(state.range(0));
  auto em = source::sample_emissions(cfg, source::SchmidtSpectrum::uniform({0}), 1);
  auto stream = counts::detect(em, 1.0, 1.0, counts::ChannelMap{}, {}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(counts::histogram(stream, 0, 1, 2500));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stream.records.size()));
}
BENCHMARK(BM_Histogram)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_HbtCounts(benchmark::State& state) {
  auto cfg = thermal(state.range(0));
  auto em = source::sample_emissions(cfg, source::SchmidtSpectrum::uniform({0}), 1);
  auto stream = counts::detect(em, 1.0, 1.0, counts::ChannelMap::hbt(), {}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(counts::hbt_counts(stream));
}
BENCHMARK(BM_HbtCounts)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

}  // namespace
