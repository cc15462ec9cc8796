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

#include <random>

#include "oamstore/analysis.hpp"
#include "oamstore/random.hpp"

namespace {

using namespace oamstore;

analysis::CountTable16 noisy_table(double scale) {
  auto mean = analysis::expected_counts(werner_state(0.85, bell_state(BellKind::phi_plus)), scale);
  random::Engine rng(7);
  for (auto& row : mean.counts)
    for (auto& c : row) c = static_cast<double>(std::poisson_distribution<long>(c)(rng));
  return mean;
}

void BM_TomoLinear(benchmark::State& state) {
  auto t = noisy_table(1000.0);
  for (auto _ : state) benchmark::DoNotOptimize(analysis::tomo_linear(t));
}
BENCHMARK(BM_TomoLinear);

void BM_TomoMle(benchmark::State& state) {
  auto t = noisy_table(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(analysis::tomo_mle(t));
}
BENCHMARK(BM_TomoMle)->Arg(100)->Arg(10000);

void BM_MonteCarloFidelity(benchmark::State& state) {
  auto flat = noisy_table(1000.0).flat();
  const analysis::Estimator fid = [](std::span<const double> d) {
    return analysis::tomo_mle(analysis::CountTable16::from_flat(d)).fidelity_to_ideal;
  };
  for (auto _ : state) benchmark::DoNotOptimize(analysis::montecarlo_std(flat, fid, 100, 1));
}
BENCHMARK(BM_MonteCarloFidelity)->Unit(benchmark::kMillisecond);

void BM_FitExponential(benchmark::State& state) {
  const memory::EfficiencyFit truth;
  std::vector<std::pair<double, double>> s;
  for (int k = 0; k < 12; ++k) s.emplace_back(67.0 + 300.0 * k, truth.raw(67.0 + 300.0 * k));
  for (auto _ : state) benchmark::DoNotOptimize(analysis::fit_exponential(s));
}
BENCHMARK(BM_FitExponential);

}  // namespace
