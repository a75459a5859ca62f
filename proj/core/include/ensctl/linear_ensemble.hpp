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

#pragma once

// Finite-sample checks for ensembles of linear systems x' = A_s x + B_s u and
// the ratio law of the eps-scaled nonholonomic integrator.

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ensctl::linear {

struct LinearSystemSample {
  double s = 0.0;
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;  // n x m; one column for single-input systems

  void validate() const;
  int n() const { return static_cast<int>(A.rows()); }
};

Eigen::MatrixXd controllability_matrix(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);
int numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-10);

// Companion (controllable canonical) form with ones on the superdiagonal and
// last row -a_0 .. -a_{n-1}.
Eigen::MatrixXd companion_matrix(const Eigen::VectorXd& a);

struct CompanionForm {
  Eigen::MatrixXd T;
  Eigen::VectorXd a;  // lambda^n + a_{n-1} lambda^{n-1} + ... + a_0
  double residual = 0.0;  // |T A T^-1 - companion(a)| / |A|
};

// Throws InvalidInput for multi-input or uncontrollable samples (message
// carries the rank).
CompanionForm companion_transform(const LinearSystemSample& sys);

struct ConditionsReport {
  std::vector<Eigen::VectorXd> coefficients;
  std::vector<std::pair<int, int>> shared_charpoly;  // distinct A, same a
  std::vector<int> singular;                         // a_0 = 0
  std::vector<int> image_rank;                       // rank [A b, ..., A^n b]
  bool pass = true;
};

ConditionsReport ensemble_necessary_conditions(const std::vector<LinearSystemSample>& samples, double rel_tol = 1e-8);

// Smallest |M u - x*| over N zero-order-hold control samples, where M stacks
// the maps from controls to every sample's final state (zero start).
double reachability_residual(const std::vector<LinearSystemSample>& samples, const std::vector<Eigen::VectorXd>& targets,
                             int N, double dt);

struct HeisenbergReport {
  std::vector<double> epsilon;
  std::vector<Eigen::Vector3d> final_state;
  std::vector<Eigen::Vector3d> ratios;  // (x1/eps, x2/eps, x3/eps^2)
  double max_relative_spread = 0.0;
  int substeps = 1;  // RK4 steps per control sample
  bool holds = false;
};

// x' = eps (u1 g1 + u2 g2), g1 = (1, 0, -x2), g2 = (0, 1, x1), piecewise
// constant controls of length dt, from x0 (must be zero).
HeisenbergReport heisenberg_invariant(const std::vector<double>& u1, const std::vector<double>& u2, double dt,
                                      const std::vector<double>& epsilon,
                                      const Eigen::Vector3d& x0 = Eigen::Vector3d::Zero(), double rel_tol = 1e-6);

// min over K of |(eps_i^power K - target)_i|: the floor any control leaves when
// the final value must scale as eps^power.
double ratio_law_floor(const std::vector<double>& epsilon, int power, double target);

}  // namespace ensctl::linear
