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

#include "oamstore/hilbert.hpp"
#include "oamstore/memory.hpp"

namespace {

using namespace oamstore;

void BM_Fidelity(benchmark::State& state) {
  auto a = werner_state(0.85, bell_state(BellKind::phi_plus));
  auto b = memory::apply_channel(a, Arm::signal1, 150.0, {}, memory::calibrated_noise()).rho;
  for (auto _ : state) benchmark::DoNotOptimize(fidelity(a, b));
}
BENCHMARK(BM_Fidelity);

void BM_NearestPhysical(benchmark::State& state) {
  CMatrix m = werner_state(0.9, bell_state(BellKind::phi_plus)).matrix();
  m(0, 0) += 0.1;
  m(3, 3) -= 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(nearest_physical(Basis::two_qubit(), m));
}
BENCHMARK(BM_NearestPhysical);

void BM_MemoryChannel(benchmark::State& state) {
  auto rho = DensityMatrix::pure(bell_state(BellKind::phi_plus));
  const auto noise = memory::calibrated_noise();
  for (auto _ : state) benchmark::DoNotOptimize(memory::apply_channel(rho, Arm::signal1, 150.0, {}, noise));
}
BENCHMARK(BM_MemoryChannel);

}  // namespace
