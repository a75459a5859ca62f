// Copyright 2026 The ensctl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <benchmark/benchmark.h>

#include <random>

#include "ensctl/composite.hpp"
#include "ensctl/ensemble_sim.hpp"
#include "ensctl/liealg.hpp"
#include "ensctl/slr.hpp"

namespace {

using namespace ensctl;

sim::ControlSequence random_pulse(int n) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> amp(-5000.0, 5000.0);
  sim::ControlSequence p;
  p.dt = 1e-4;
  for (int k = 0; k < n; ++k) p.samples.push_back({amp(rng), amp(rng)});
  return p;
}

std::vector<slr::HardPulseStep> random_steps(int n) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> phi(0.01, 1.0), theta(-kPi, kPi);
  std::vector<slr::HardPulseStep> s;
  for (int k = 0; k < n; ++k) s.push_back({phi(rng), theta(rng)});
  return s;
}

void BM_PropagateBlochGrid(benchmark::State& state) {
  const auto pulse = random_pulse(static_cast<int>(state.range(0)));
  const sim::DispersionGrid grid({{"omega", sim::linspace(-2000.0, 2000.0, 33)}, {"epsilon", sim::linspace(0.9, 1.1, 11)}});
  const auto init = sim::uniform_bloch(grid, Eigen::Vector3d::UnitZ());
  for (auto _ : state) benchmark::DoNotOptimize(sim::propagate(pulse, grid, init));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(grid.size()) * state.range(0));
}
BENCHMARK(BM_PropagateBlochGrid)->Arg(64)->Arg(256);

void BM_ForwardRecursion(benchmark::State& state) {
  const auto steps = random_steps(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(slr::forward_recursion(steps));
}
BENCHMARK(BM_ForwardRecursion)->Arg(32)->Arg(128);

void BM_InverseRecursion(benchmark::State& state) {
  const auto poly = slr::forward_recursion(random_steps(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(slr::inverse_recursion(poly));
}
BENCHMARK(BM_InverseRecursion)->Arg(32)->Arg(128);

void BM_DesignBroadband(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(slr::design_broadband('x', kPi / 2, 2000.0, static_cast<int>(state.range(0)), 1e-4));
}
BENCHMARK(BM_DesignBroadband)->Arg(16)->Arg(64);

void BM_RfClosure(benchmark::State& state) {
  const auto x = liealg::DispersionPolyElement::monomial({{"eps", 1}}, so3::Wx().cast<cplx>());
  const auto y = liealg::DispersionPolyElement::monomial({{"eps", 1}}, so3::Wy().cast<cplx>());
  for (auto _ : state) benchmark::DoNotOptimize(liealg::lie_closure({x, y}, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_RfClosure)->Arg(4)->Arg(8);

void BM_CompileRobustRotation(benchmark::State& state) {
  composite::RobustRotationSpec spec;
  spec.epsilon = sim::linspace(0.9, 1.1, 21);
  spec.target.assign(21, kPi / 2);
  spec.exponents = {1, 3, 5};
  spec.tol = 1e-2;
  spec.m = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(composite::compile_robust_rotation(spec));
}
BENCHMARK(BM_CompileRobustRotation)->Arg(16)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
