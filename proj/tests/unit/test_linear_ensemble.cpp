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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ensctl/errors.hpp"
#include "ensctl/linear_ensemble.hpp"
#include "oracles.hpp"

namespace ensctl::linear {
namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int r, int c) {
  const auto v = oracle::uniform(rng, static_cast<std::size_t>(r * c), -1.0, 1.0);
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), r, c);
}

// Monic characteristic polynomial from eigenvalues, low order first.
Eigen::VectorXd charpoly_oracle(const Eigen::MatrixXd& a) {
  const Eigen::VectorXcd ev = a.eigenvalues();
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(ev.size() + 1);
  c(0) = 1.0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    for (Eigen::Index j = k + 1; j > 0; --j) c(j) = c(j - 1) - ev(k) * c(j);
    c(0) = -ev(k) * c(0);
  }
  return c.head(ev.size()).real();
}

LinearSystemSample scalar(double s, double eps) {
  return {s, Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Constant(1, 1, eps)};
}

TEST(Companion, RandomControllableSystems) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    LinearSystemSample sys{0.0, random_matrix(rng, 4, 4), random_matrix(rng, 4, 1)};
    const auto cf = companion_transform(sys);
    EXPECT_LE(cf.residual, 1e-10);
    const Eigen::MatrixXd tat = cf.T * sys.A * cf.T.inverse();
    EXPECT_LT((tat - companion_matrix(cf.a)).norm(), 1e-8 * sys.A.norm());
    EXPECT_LT((cf.a - charpoly_oracle(sys.A)).norm(), 1e-8);
    // The companion pair maps b to the last basis vector.
    EXPECT_LT(((cf.T * sys.B) - Eigen::Vector4d(0, 0, 0, 1)).norm(), 1e-8);
  }
}

TEST(Companion, RejectsUncontrollableAndMultiInput) {
  LinearSystemSample sys{0.0, Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Zero(3, 1)};
  sys.B(0, 0) = 1.0;
  EXPECT_THROW(companion_transform(sys), InvalidInput);
  LinearSystemSample two{0.0, Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)};
  EXPECT_THROW(companion_transform(two), InvalidInput);
}

TEST(Conditions, SingularAShrinksImage) {
  Eigen::VectorXd a(3);
  a << 0.0, 2.0, -1.0;
  LinearSystemSample sys{0.0, companion_matrix(a), Eigen::Vector3d(0, 0, 1)};
  Eigen::VectorXd a2 = a;
  a2(0) = 1.5;
  LinearSystemSample other{1.0, companion_matrix(a2), Eigen::Vector3d(0, 0, 1)};
  const auto r = ensemble_necessary_conditions({sys, other});
  ASSERT_EQ(r.image_rank.size(), 2u);
  EXPECT_EQ(r.image_rank[1], 3);
  EXPECT_EQ(r.image_rank[0], 2);
  EXPECT_EQ(r.singular, std::vector<int>{0});
  EXPECT_FALSE(r.pass);
}

TEST(Conditions, SharedCharacteristicPolynomialDetected) {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXd a = random_matrix(rng, 3, 3) + 3.0 * Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd p = random_matrix(rng, 3, 3) + 2.0 * Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd similar = p * a * p.inverse();
  const Eigen::Vector3d b(0.3, -0.2, 1.0);
  const auto r = ensemble_necessary_conditions({{0.0, a, b}, {1.0, similar, b}});
  ASSERT_EQ(r.shared_charpoly.size(), 1u);
  EXPECT_EQ(r.shared_charpoly[0], std::make_pair(0, 1));
  EXPECT_FALSE(r.pass);

  const auto ok = ensemble_necessary_conditions({{0.0, a, b}, {1.0, a + 0.5 * Eigen::MatrixXd::Identity(3, 3), b}});
  EXPECT_TRUE(ok.shared_charpoly.empty());
  EXPECT_TRUE(ok.pass);
}

TEST(Reachability, ScalarTwoEpsilonMatchesClosedForm) {
  const double expected = 0.2 / std::sqrt(0.81 + 1.21);
  const std::vector<LinearSystemSample> s{scalar(0.0, 0.9), scalar(1.0, 1.1)};
  const std::vector<Eigen::VectorXd> t{Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)};
  for (int N : {1, 8, 64}) EXPECT_NEAR(reachability_residual(s, t, N, 0.1), expected, 1e-12);
  EXPECT_NEAR(ratio_law_floor({0.9, 1.1}, 1, 1.0), expected, 1e-12);
}

TEST(Reachability, DistinctDynamicsReachBoth) {
  const Eigen::MatrixXd b = Eigen::MatrixXd::Ones(1, 1);
  const std::vector<LinearSystemSample> s{{0.0, Eigen::MatrixXd::Constant(1, 1, -1.0), b},
                                          {1.0, Eigen::MatrixXd::Constant(1, 1, 1.0), b}};
  const std::vector<Eigen::VectorXd> t{Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)};
  EXPECT_LT(reachability_residual(s, t, 16, 0.1), 1e-10);
}

TEST(Heisenberg, RatiosAreEpsilonInvariant) {
  std::mt19937_64 rng(3);
  const std::vector<double> eps{0.5, 0.8, 1.0, 1.3, 2.0};
  for (int draw = 0; draw < 20; ++draw) {
    const auto u1 = oracle::uniform(rng, 32, -1.0, 1.0);
    const auto u2 = oracle::uniform(rng, 32, -1.0, 1.0);
    const auto r = heisenberg_invariant(u1, u2, 0.05, eps);
    EXPECT_TRUE(r.holds);
    EXPECT_LE(r.max_relative_spread, 1e-6);
    for (std::size_t i = 0; i < eps.size(); ++i) {
      EXPECT_NEAR(r.final_state[i].x(), eps[i] * r.final_state[2].x(), 1e-9);
      EXPECT_NEAR(r.final_state[i].z(), eps[i] * eps[i] * r.final_state[2].z(), 1e-9);
    }
  }
}

TEST(Heisenberg, AreaLawForConstantLoop) {
  // Unit square loop: x3 gains twice the enclosed area.
  std::vector<double> u1{1, 0, -1, 0}, u2{0, 1, 0, -1};
  const auto r = heisenberg_invariant(u1, u2, 1.0, {1.0});
  EXPECT_NEAR(r.final_state[0].x(), 0.0, 1e-12);
  EXPECT_NEAR(r.final_state[0].y(), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(r.final_state[0].z()), 2.0, 1e-9);
}

}  // namespace
}  // namespace ensctl::linear
