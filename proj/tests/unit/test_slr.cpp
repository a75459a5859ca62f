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

#include "ensctl/errors.hpp"
#include "ensctl/slr.hpp"
#include "oracles.hpp"

namespace ensctl::slr {
namespace {

std::vector<HardPulseStep> random_steps(std::mt19937_64& rng, int n, double max_flip = 3.0) {
  const auto phi = oracle::uniform(rng, static_cast<std::size_t>(n), 0.01, max_flip);
  const auto theta = oracle::uniform(rng, static_cast<std::size_t>(n), -kPi, kPi);
  std::vector<HardPulseStep> steps;
  for (int k = 0; k < n; ++k) steps.push_back({phi[static_cast<std::size_t>(k)], theta[static_cast<std::size_t>(k)]});
  return steps;
}

// Hard-pulse train by explicit matrix products: precession, then rf.
Eigen::Vector2cd train_spinor(const std::vector<HardPulseStep>& steps, double omega, double dt) {
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
  for (const auto& s : steps) {
    const double a = s.phi / dt;
    const Eigen::Matrix2cd rf = oracle::su2_step(0.0, 1.0, a * std::cos(s.theta), a * std::sin(s.theta), dt);
    u = rf * oracle::su2_step(omega, 1.0, 0.0, 0.0, dt) * u;
  }
  return u.col(0);
}

double angle_diff(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * kPi)); }

TEST(HardPulseStep, CayleyKleinParameters) {
  const HardPulseStep s{1.1, 0.3};
  EXPECT_NEAR(s.C() * s.C() + std::norm(s.S()), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(s.S() - cplx(0, -1) * std::polar(1.0, 0.3) * std::sin(0.55)), 0.0, 1e-15);
  const auto c = s.control(1e-3);
  EXPECT_NEAR(std::hypot(c.u, c.v), 1100.0, 1e-9);
  const auto back = HardPulseStep::from_control(c, 1e-3);
  EXPECT_NEAR(back.phi, 1.1, 1e-14);
  EXPECT_NEAR(back.theta, 0.3, 1e-14);
}

TEST(ForwardRecursion, MatchesMatrixProductOracle) {
  std::mt19937_64 rng(31);
  const double dt = 1e-4;
  for (int t = 0; t < 5; ++t) {
    const auto steps = random_steps(rng, 12);
    const auto poly = forward_recursion(steps);
    ASSERT_EQ(poly.n(), 12);
    for (double w : {-9000.0, -1234.5, 0.0, 777.0, 20000.0}) {
      const auto s = poly.spinor(w, dt);
      const Eigen::Vector2cd ref = train_spinor(steps, w, dt);
      EXPECT_LT(std::abs(s.alpha - ref(0)) + std::abs(s.beta - ref(1)), 1e-12);
    }
  }
}

TEST(ForwardRecursion, UnimodularAfterEveryStep) {
  std::mt19937_64 rng(32);
  const auto trace = forward_trace(random_steps(rng, 32));
  ASSERT_EQ(trace.size(), 32u);
  for (const auto& p : trace) EXPECT_LE(p.unimodularity_error(256), 1e-9);
}

// Roundtrips are checked where the polynomial-to-angle map is well conditioned:
// short trains with any flip, and long trains of moderate flips.
TEST(InverseRecursion, RecoversRandomPulses) {
  std::mt19937_64 rng(33);
  for (const auto& [n, max_flip] : {std::pair{8, 3.0}, std::pair{32, 1.0}}) {
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const auto steps = random_steps(rng, n, max_flip);
      const auto inv = inverse_recursion(forward_recursion(steps));
      ASSERT_EQ(inv.steps.size(), steps.size());
      for (std::size_t k = 0; k < steps.size(); ++k) {
        worst = std::max(worst, std::abs(inv.steps[k].phi - steps[k].phi));
        worst = std::max(worst, angle_diff(inv.steps[k].theta, steps[k].theta));
      }
      for (double u : inv.unimodularity) EXPECT_LE(u, 1e-9);
    }
    EXPECT_LE(worst, 1e-9) << "n " << n << ", max flip " << max_flip;
  }
}

TEST(InverseRecursion, RejectsNonUnimodularPolynomials) {
  SpinorPolynomials p{{cplx(0.9), cplx(0.0)}, {cplx(0.0), cplx(0.0)}};
  EXPECT_THROW(inverse_recursion(p), InvalidInput);
}

TEST(CompletePolynomial, UnimodularAndMinimumPhase) {
  std::mt19937_64 rng(34);
  std::normal_distribution<double> d;
  for (int t = 0; t < 5; ++t) {
    std::vector<cplx> q(10);
    for (auto& c : q) c = 0.08 * cplx(d(rng), d(rng));
    const auto c = complete_polynomial(q);
    EXPECT_LE(c.poly.unimodularity_error(1024), 1e-9);
    EXPECT_LE(c.q_scale, 1.0);
    // Roots of p(w) = sum p_k w^k lie outside the unit disk.
    const auto& p = c.poly.p;
    const int deg = static_cast<int>(p.size()) - 1;
    if (deg < 1) continue;
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -p[static_cast<std::size_t>(i)] / p.back();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp);
    for (Eigen::Index i = 0; i < deg; ++i) EXPECT_GT(std::abs(es.eigenvalues()(i)), 1.0 - 1e-9);
    // The completion is invertible into a hard-pulse train.
    EXPECT_NO_THROW(inverse_recursion(c.poly));
  }
}

TEST(CompletePolynomial, RescalesWhenQExceedsUnity) {
  const auto c = complete_polynomial({cplx(0.8), cplx(0.7)});
  EXPECT_LT(c.q_scale, 1.0);
  EXPECT_LE(c.poly.unimodularity_error(1024), 1e-9);
}

TEST(CompletePolynomial, ShuffleSeedDoesNotChangeTheResult) {
  std::vector<cplx> q{cplx(0.1, 0.02), cplx(-0.05, 0.1), cplx(0.03), cplx(0.0, -0.04), cplx(0.02, 0.01)};
  const auto a = complete_polynomial(q, 1e-6, 0);
  const auto b = complete_polynomial(q, 1e-6, 7);
  for (std::size_t k = 0; k < a.poly.p.size(); ++k) EXPECT_LT(std::abs(a.poly.p[k] - b.poly.p[k]), 1e-10);
}

TEST(TargetProfile, BroadbandIsUnimodularAndValidated) {
  const auto t = TargetProfile::broadband('x', kPi / 2, 1000.0, 9);
  EXPECT_NO_THROW(t.validate());
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(std::norm(t.F_alpha[i]) + std::norm(t.F_beta[i]), 1.0, 1e-12);
  auto bad = t;
  bad.F_alpha[0] *= 1.1;
  EXPECT_THROW(bad.validate(), InvalidInput);
}

TEST(DesignBroadband, FrequencyResponseMatchesPolynomials) {
  const double dt = 1e-4;
  const auto design = design_broadband('x', kPi / 2, 0.5 / dt, 16, dt);
  ASSERT_EQ(design.blocks.size(), 1u);
  double worst = 0.0;
  for (double w : sim::linspace(-0.5 / dt, 0.5 / dt, 65)) {
    const auto s = sim::propagate_point(design.pulse, {w, 1.0, 0.0, 0.0}, sim::PlantModel::hard_pulse);
    worst = std::max(worst, sim::spinor_distance(s, design.blocks[0].spinor(w, dt)));
  }
  EXPECT_LE(worst, 1e-8);
  EXPECT_LE(design.fit_error, 0.05);
}

TEST(DesignBroadband, AmplitudeBoundSplitsTheAngle) {
  const double dt = 1e-4;
  const auto free = design_broadband('y', kPi / 2, 2000.0, 16, dt);
  const double bound = 0.5 * free.pulse.max_amplitude();
  const auto bounded = design_broadband('y', kPi / 2, 2000.0, 16, dt, bound);
  EXPECT_GE(bounded.sub_angles, 2);
  EXPECT_LE(bounded.pulse.max_amplitude(), bound * (1 + 1e-12));
  EXPECT_THROW(design_broadband('y', kPi / 2, 2000.0, 16, dt, 1e-3), Infeasible);
}

TEST(DesignBroadband, ZeroAngleGivesZeroControls) {
  const auto d = design_broadband('x', 0.0, 1000.0, 8, 1e-4);
  for (const auto& s : d.pulse.samples) {
    EXPECT_EQ(s.u, 0.0);
    EXPECT_EQ(s.v, 0.0);
  }
}

TEST(DesignPattern, InvertsInBandAndLeavesOutOfBand) {
  const double dt = 1e-4;
  std::vector<double> omega, flips, weight;
  for (int k = -512; k < 512; ++k) {
    const double x = k * 2.0 * kPi / 1024.0;
    omega.push_back(x / dt);
    flips.push_back(std::abs(x) <= 0.25 ? kPi : 0.0);
    weight.push_back(std::abs(x) <= 0.25 || std::abs(x) >= 0.75 ? 1.0 : 0.0);
  }
  const auto d = design_pattern(TargetProfile::from_flips(omega, flips, weight), 64, dt);
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (weight[i] == 0.0) continue;
    const auto r = sim::propagate_point_so3(d.pulse, {omega[i], 1.0, 0.0, 0.0}, sim::PlantModel::hard_pulse);
    EXPECT_NEAR(r(2, 2), std::cos(flips[i]), 1e-3) << "omega " << omega[i];
  }
}

TEST(Splitting, SecondOrderInStepDuration) {
  std::vector<double> h, e;
  for (double dt : {1e-2, 1e-3, 1e-4}) {
    h.push_back(dt);
    e.push_back(splitting_error(40.0, 90.0, -30.0, dt));
  }
  const double slope = oracle::loglog_slope(h, e);
  EXPECT_GE(slope, 1.8);
  EXPECT_LE(slope, 2.2);
}

TEST(FlipAngle, OfKnownRotation) {
  const sim::SU2Element s{cplx(std::cos(0.4)), cplx(0.0, -std::sin(0.4))};
  EXPECT_NEAR(flip_angle(s), 0.8, 1e-14);
}

}  // namespace
}  // namespace ensctl::slr
