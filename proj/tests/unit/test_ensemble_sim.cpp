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

#include <random>

#include <gtest/gtest.h>

#include "ensctl/ensemble_sim.hpp"
#include "ensctl/errors.hpp"
#include "oracles.hpp"

namespace ensctl::sim {
namespace {

ControlSequence random_pulse(std::mt19937_64& rng, int n, double dt, double amp) {
  ControlSequence p;
  p.dt = dt;
  const auto u = oracle::uniform(rng, static_cast<std::size_t>(n), -amp, amp);
  const auto v = oracle::uniform(rng, static_cast<std::size_t>(n), -amp, amp);
  for (int k = 0; k < n; ++k) p.samples.push_back({u[static_cast<std::size_t>(k)], v[static_cast<std::size_t>(k)]});
  return p;
}

TEST(StepPropagator, MatchesSeriesExponentialInBothFrames) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const auto x = oracle::uniform(rng, 5, -3.0, 3.0);
    const double dt = 0.3 + 0.1 * std::abs(x[4]);
    const auto s = step_propagator(x[0], 1.0 + 0.1 * x[1], x[2], x[3], dt);
    const Eigen::Matrix2cd su2 = oracle::su2_step(x[0], 1.0 + 0.1 * x[1], x[2], x[3], dt);
    const Eigen::Matrix3d so3 = oracle::so3_step(x[0], 1.0 + 0.1 * x[1], x[2], x[3], dt);
    EXPECT_LT((s.su2.matrix() - su2).norm(), 1e-13);
    EXPECT_LT((s.so3 - so3).norm(), 1e-13);
  }
}

TEST(StepPropagator, ZeroDriftIsIdentity) {
  const auto s = step_propagator(0.0, 1.0, 0.0, 0.0, 1.0);
  EXPECT_LT((s.su2.matrix() - Eigen::Matrix2cd::Identity()).norm(), 1e-15);
  EXPECT_LT((s.so3 - Eigen::Matrix3d::Identity()).norm(), 1e-15);
}

TEST(StepPropagator, RejectsBadInput) {
  EXPECT_THROW(step_propagator(0.0, 1.0, 1.0, 0.0, 0.0), InvalidInput);
  EXPECT_THROW(step_propagator(std::nan(""), 1.0, 1.0, 0.0, 1.0), InvalidInput);
}

TEST(So3Image, IsHomomorphism) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 30; ++t) {
    const auto x = oracle::uniform(rng, 8, -2.0, 2.0);
    const auto a = step_propagator(x[0], 1.0, x[1], x[2], 1.0).su2;
    const auto b = step_propagator(x[3], 1.0, x[4], x[5], 1.0).su2;
    EXPECT_LT((so3_image(a * b) - so3_image(a) * so3_image(b)).norm(), 1e-13);
  }
}

TEST(So3Image, AgreesWithBlochStep) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 30; ++t) {
    const auto x = oracle::uniform(rng, 4, -2.0, 2.0);
    const auto s = step_propagator(x[0], 1.0, x[1], x[2], 0.7);
    EXPECT_LT((so3_image(s.su2) - s.so3).norm(), 1e-13);
  }
}

TEST(HardPulse, EqualsPrecessionThenRotation) {
  const GridPoint p{300.0, 0.95, 0.2, 0.0};
  const ControlSample c{1200.0, -400.0};
  const double dt = 1e-3;
  // rf phase offset rotates (u, v) by theta.
  const double u = c.u * std::cos(p.theta) - c.v * std::sin(p.theta);
  const double v = c.u * std::sin(p.theta) + c.v * std::cos(p.theta);
  const Eigen::Matrix2cd rf = oracle::su2_step(0.0, p.epsilon, u, v, dt);
  const Eigen::Matrix2cd free = oracle::su2_step(p.omega, 1.0, 0.0, 0.0, dt);
  const Eigen::Matrix2cd expected = rf * free;
  EXPECT_LT((step_su2(p, c, dt, PlantModel::hard_pulse).matrix() - expected).norm(), 1e-13);
  EXPECT_LT((step_so3(p, c, dt, PlantModel::hard_pulse) - so3_image(SU2Element::from_matrix(expected))).norm(), 1e-13);
}

TEST(Propagate, NormPreservedOverLongPulses) {
  std::mt19937_64 rng(14);
  const auto pulse = random_pulse(rng, 10000, 1e-4, 5000.0);
  const DispersionGrid grid({{"omega", linspace(-3000, 3000, 3)}, {"epsilon", {0.9, 1.1}}});
  const auto bloch = propagate(pulse, grid, uniform_bloch(grid, Eigen::Vector3d::UnitZ()));
  for (const auto& x : bloch.states) EXPECT_NEAR(x.norm(), 1.0, 1e-9);
  const auto spin = propagate(pulse, grid, uniform_spinor(grid));
  for (const auto& s : spin.states) EXPECT_LT(s.unimodularity_error(), 1e-9);
}

TEST(Propagate, CompositionOfConcatenatedPulses) {
  std::mt19937_64 rng(15);
  const auto p1 = random_pulse(rng, 40, 1e-3, 800.0);
  const auto p2 = random_pulse(rng, 25, 1e-3, 800.0);
  const DispersionGrid grid({{"omega", {-100.0, 50.0}}, {"epsilon", {0.8, 1.0, 1.3}}, {"theta", {0.0, 0.4}}});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto p = grid.point(i);
    const Eigen::Matrix3d both = propagate_point_so3(concat(p1, p2), p);
    const Eigen::Matrix3d seq = propagate_point_so3(p2, p) * propagate_point_so3(p1, p);
    EXPECT_LT((both - seq).norm(), 1e-10);
    const auto s = propagate_point(concat(p1, p2), p);
    const auto t = propagate_point(p2, p) * propagate_point(p1, p);
    EXPECT_LT((s.matrix() - t.matrix()).norm(), 1e-10);
  }
}

TEST(Propagate, EpsilonScalingEquivalenceAtResonance) {
  std::mt19937_64 rng(16);
  const auto pulse = random_pulse(rng, 30, 1e-3, 900.0);
  const double eps = 0.87;
  ControlSequence scaled = pulse;
  for (auto& s : scaled.samples) {
    s.u *= eps;
    s.v *= eps;
  }
  const auto a = propagate_point(pulse, {0.0, eps, 0.0, 0.0});
  const auto b = propagate_point(scaled, {0.0, 1.0, 0.0, 0.0});
  EXPECT_LT((a.matrix() - b.matrix()).norm(), 1e-14);
}

TEST(Propagate, DriftReversalBetweenPiPulses) {
  // An x pulse of flip pi, free precession, then flip -pi reverses the drift.
  const double omega = 730.0, dt = 1e-3, a = 1e4;
  const double tp = kPi / a;
  const Eigen::Matrix2cd pi_plus = oracle::su2_step(0.0, 1.0, a, 0.0, tp);
  const Eigen::Matrix2cd pi_minus = oracle::su2_step(0.0, 1.0, -a, 0.0, tp);
  const GridPoint p{omega, 1.0, 0.0, 0.0};
  const Eigen::Matrix2cd drift = step_su2(p, {0.0, 0.0}, dt, PlantModel::exact).matrix();
  const Eigen::Matrix2cd sandwich = pi_plus * drift * pi_minus;
  const Eigen::Matrix2cd reversed = oracle::expm(Eigen::Matrix2cd(cplx(0, 0.5 * omega * dt) * oracle::sz()));
  EXPECT_LT((sandwich - reversed).norm(), 1e-10);
}

TEST(PhaseFrame, LawHoldsForRandomPulses) {
  std::mt19937_64 rng(17);
  const auto pulse = random_pulse(rng, 64, 1e-4, 6000.0);
  const DispersionGrid grid({{"omega", {-500.0, 0.0, 800.0}},
                             {"epsilon", {0.9, 1.0}},
                             {"theta", linspace(0.0, 2.0 * kPi, 33)}});
  EXPECT_LE(phase_frame_check(pulse, grid), 1e-9);
  EXPECT_THROW(phase_frame_check(pulse, DispersionGrid({{"omega", {0.0}}})), InvalidInput);
}

TEST(Grid, CanonicalOrderAndEnumeration) {
  const DispersionGrid grid({{"epsilon", {0.9, 1.1}}, {"omega", {-1.0, 0.0, 1.0}}});
  ASSERT_EQ(grid.size(), 6u);
  EXPECT_EQ(grid.axes()[0].name, "omega");
  // First axis slowest.
  EXPECT_EQ(grid.point(0).omega, -1.0);
  EXPECT_EQ(grid.point(0).epsilon, 0.9);
  EXPECT_EQ(grid.point(1).epsilon, 1.1);
  EXPECT_EQ(grid.point(2).omega, 0.0);
  EXPECT_EQ(grid.point(5).omega, 1.0);
  EXPECT_EQ(grid.point(5).theta, 0.0);
}

TEST(Grid, RejectsMalformedAxes) {
  EXPECT_THROW(DispersionGrid({{"bogus", {1.0}}}), InvalidInput);
  EXPECT_THROW(DispersionGrid(std::vector<Axis>{{"omega", std::vector<double>{}}}), InvalidInput);
  EXPECT_THROW(DispersionGrid({{"omega", {1.0, 1.0}}}), InvalidInput);
  EXPECT_THROW(DispersionGrid({{"omega", {0.0}}, {"omega", {1.0}}}), InvalidInput);
}

TEST(ControlSequence, ValidatesAmplitudeBound) {
  ControlSequence p{1e-3, {{3.0, 4.0}}, 5.0};
  EXPECT_NO_THROW(p.validate());
  EXPECT_DOUBLE_EQ(p.max_amplitude(), 5.0);
  p.a_max = 4.9;
  EXPECT_THROW(p.validate(), InvalidInput);
  EXPECT_THROW(concat(ControlSequence{1e-3, {{0, 0}}, {}}, ControlSequence{2e-3, {{0, 0}}, {}}), InvalidInput);
}

TEST(Distance, SpinorDistanceIgnoresGlobalPhase) {
  const SU2Element a{cplx(0.6, 0.0), cplx(0.0, 0.8)};
  const cplx ph = std::polar(1.0, 1.234);
  const SU2Element b{ph * a.alpha, ph * a.beta};
  EXPECT_LT(spinor_distance(a, b), 1e-15);
  EXPECT_NEAR(spinor_fidelity(a, b), 1.0, 1e-15);
  const SU2Element c{cplx(0.0, 0.0), cplx(1.0, 0.0)};
  const SU2Element d{cplx(1.0, 0.0), cplx(0.0, 0.0)};
  EXPECT_NEAR(spinor_distance(c, d), std::sqrt(2.0), 1e-15);
}

TEST(Fidelity, BlochAndUnitaryOracles) {
  EXPECT_NEAR(bloch_fidelity(Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitX()), 1.0, 1e-15);
  EXPECT_NEAR(bloch_fidelity(Eigen::Vector3d::UnitX(), -Eigen::Vector3d::UnitX()), 0.0, 1e-15);
  EXPECT_NEAR(bloch_fidelity(Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY()), 0.5, 1e-15);
  const Eigen::Matrix2cd u = oracle::su2_step(1.0, 1.0, 2.0, 0.5, 0.3);
  EXPECT_NEAR(unitary_fidelity(u, u * std::polar(1.0, 0.7)), 1.0, 1e-14);
  EXPECT_NEAR(unitary_fidelity(oracle::sx(), Eigen::Matrix2cd::Identity()), 0.0, 1e-15);
}

TEST(Fidelity, MapOverGridAgreesWithPointwisePropagation) {
  std::mt19937_64 rng(18);
  const auto pulse = random_pulse(rng, 20, 1e-3, 1000.0);
  const DispersionGrid grid({{"omega", {-50.0, 0.0, 50.0}}, {"epsilon", {0.9, 1.1}}});
  const Eigen::Vector3d target(1.0, 0.0, 0.0);
  const auto map = fidelity_map(pulse, grid, TargetSpec<Eigen::Vector3d>::uniform(target));
  ASSERT_EQ(map.values.size(), grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
    const auto p = grid.point(i);
    for (const auto& c : pulse.samples) r = oracle::so3_step(p.omega, p.epsilon, c.u, c.v, pulse.dt) * r;
    EXPECT_NEAR(map.values[i], 0.5 * (1.0 + (r * Eigen::Vector3d::UnitZ()).dot(target)), 1e-12);
  }
  EXPECT_LE(map.min(), map.max());
}

TEST(Distance, EnsembleDistanceReportsL2AndSup) {
  const DispersionGrid grid({{"omega", {0.0, 1.0}}});
  BlochEnsemble e{grid, {Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitX()}};
  const auto d = ensemble_distance(e, TargetSpec<Eigen::Vector3d>::uniform(Eigen::Vector3d::UnitZ()));
  EXPECT_NEAR(d.sup, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(d.l2, 1.0, 1e-15);
  EXPECT_THROW(ensemble_distance(e, TargetSpec<Eigen::Vector3d>::per_point({Eigen::Vector3d::UnitZ()})), InvalidInput);
}

}  // namespace
}  // namespace ensctl::sim
