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

// Compensating sequences from nested Lie brackets.
//
// A sequence is a list of factors exp(amount * G), where G is a named leaf
// generator with explicit parameter dependence (for example eps * Omega_x).
// A bracket word W at strength s is approximated by group commutators,
//   S_[X,W'](s) = exp(-X r) S_W'(-r) exp(X r) S_W'(r),  r = sqrt(s),
// with the operand order swapped for s < 0, so S_W(-s) is the exact inverse of
// S_W(s). Accuracy comes from m-fold subdivision of the total strength.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ensctl/ensemble_sim.hpp"
#include "ensctl/liealg.hpp"

namespace ensctl::composite {

using Point = std::map<std::string, double>;

struct Leaf {
  std::string label;
  liealg::DispersionPolyElement generator;
};

using LeafSet = std::map<std::string, Leaf>;

class BracketWord {
 public:
  static BracketWord leaf(std::string label);
  static BracketWord ad(const BracketWord& x, const BracketWord& y);
  // ad_x^k (y) with x a leaf label.
  static BracketWord ad_power(const std::string& x, const BracketWord& y, int k);

  bool is_leaf() const { return !left_; }
  const std::string& label() const { return label_; }
  const BracketWord& left() const { return *left_; }
  const BracketWord& right() const { return *right_; }
  int depth() const;
  std::string to_string() const;

  liealg::DispersionPolyElement evaluate(const LeafSet& leaves) const;

 private:
  std::string label_;
  std::shared_ptr<const BracketWord> left_, right_;
};

struct Factor {
  std::string label;
  double amount = 0.0;
};

inline constexpr int kDefaultMaxWordDepth = 8;

// Factors approximating exp(s * W), in application order. Throws InvalidInput
// when the word is deeper than max_depth.
std::vector<Factor> word_factors(const BracketWord& w, double s, int max_depth = kDefaultMaxWordDepth);

// The four-factor block exp(-a r) exp(-b r) exp(a r) exp(b r), r = sqrt(t),
// approximating exp(t [a, b]). t = 0 gives no factors.
std::vector<Factor> commutator_block(const std::string& a, const std::string& b, double t);

// Product of the factor exponentials at one parameter point.
Eigen::MatrixXcd simulate_factors(const std::vector<Factor>& factors, const LeafSet& leaves, const Point& at);

// A right-normed word whose bracket is sign * (monomial * direction), with
// sign the real scale relating the two.
struct WordMatch {
  BracketWord word = BracketWord::leaf("");
  double scale = 1.0;
};

// Shortest right-normed word over the leaves reaching the monomial along
// direction. Returns nullopt when none exists up to max_depth.
std::optional<WordMatch> find_word(const LeafSet& leaves, const liealg::Exponents& monomial,
                                   const Eigen::MatrixXcd& direction, int max_depth = kDefaultMaxWordDepth);

// Least-squares fit of target(point) by the monomials; throws InvalidInput
// when the monomial columns are rank deficient on the grid.
liealg::FitResult fit_coefficients(const Eigen::VectorXd& target, const std::vector<liealg::Exponents>& basis,
                                   const std::vector<Point>& grid, double tol);

struct Diagnostics {
  double fit_l2 = 0.0;
  double fit_max = 0.0;
  // max over the grid of |simulated factors - exp(predicted generator)|.
  double compile_error = 0.0;
  int subdivisions = 1;
  std::size_t factor_count = 0;
};

struct CompiledSequence {
  LeafSet leaves;
  std::vector<Factor> factors;
  liealg::DispersionPolyElement predicted;
  std::vector<double> coefficients;
  std::vector<liealg::Exponents> basis;
  Diagnostics diagnostics;
};

// Compiles exp(sum_k c_k m_k(p) * direction) over the grid, with c fitted to
// the target angle. Each monomial is realized by a searched word; the strength
// is split into m interleaved rounds.
CompiledSequence compile_rotation(const LeafSet& leaves, const Eigen::MatrixXcd& direction,
                                  const std::vector<liealg::Exponents>& basis, const std::vector<Point>& grid,
                                  const Eigen::VectorXd& target_angle, double tol, int m);

// Single spin with rf inhomogeneity: leaves "x" = eps Omega_x, "y" = eps Omega_y.
LeafSet rf_leaves();

struct RobustRotationSpec {
  char axis = 'x';
  std::vector<double> epsilon;
  std::vector<double> target;  // rad, one per epsilon
  std::vector<int> exponents{1, 3};
  double tol = 1e-3;
  int m = 1;
};

// Throws InvalidInput for an exponent outside the reachable family of
// {eps Omega_x, eps Omega_y} and Infeasible when the fit misses tol.
CompiledSequence compile_robust_rotation(const RobustRotationSpec& spec);

struct EulerCompiled {
  CompiledSequence alpha, beta, gamma;  // exp(alpha Wx) exp(beta Wy) exp(gamma Wx)
  std::vector<Factor> factors;          // gamma first, then beta, then alpha
};

EulerCompiled compile_euler(const std::vector<double>& epsilon, const std::vector<double>& alpha,
                            const std::vector<double>& beta, const std::vector<double>& gamma,
                            const std::vector<int>& exponents, double tol, int m);

// Factors -> controls: one step per factor, exp(a eps Omega_x) as v = -a/dt
// and exp(a eps Omega_y) as u = a/dt.
sim::ControlSequence realize_rf(const std::vector<Factor>& factors, double dt);

// Two independent scalings, leaves "x1" = eps1 Omega_x and "y2" = eps2 Omega_y.
LeafSet two_param_leaves();

// Rotation about z (monomials eps1^{2k+1} eps2^{2l+1}) or y (eps1^{2k} eps2^{2l+1})
// fitted to theta(eps1, eps2) on the grid.
CompiledSequence compile_two_param(char axis, const std::vector<Point>& grid, const Eigen::VectorXd& theta,
                                   const std::vector<int>& k_values, const std::vector<int>& l_values, double tol,
                                   int m);

// Larmor dispersion with strong rf: leaves "z" = w Omega_z with w = omega * tau
// (drift for amount * tau seconds), "x" = Omega_x, "y" = Omega_y (instantaneous
// pulses). single_quadrature drops "y".
LeafSet larmor_leaves(bool single_quadrature);

struct StrongRfSegment {
  enum class Kind { drift, pulse };
  Kind kind = Kind::drift;
  double duration = 0.0;  // s, drift
  char axis = 'x';        // pulse
  double angle = 0.0;     // rad, pulse: exp(angle Omega_axis)
};

// Negative drift uses exp(pi Omega_x) exp(w Omega_z t) exp(-pi Omega_x) = exp(-w Omega_z t).
std::vector<StrongRfSegment> realize_strong_rf(const std::vector<Factor>& factors, double tau);
Eigen::Matrix3d simulate_strong_rf(const std::vector<StrongRfSegment>& segments, double omega);

// exp(sum_k c_k w^k Omega_axis) fitted to target(omega). powers are the
// exponents of w; single_quadrature restricts the leaves to {z, x}. Throws
// Infeasible when the reachable powers cannot meet tol (e.g. an even target on
// a symmetric range with only odd powers available).
CompiledSequence compile_omega_robust(char axis, const std::vector<double>& omega, double tau,
                                      const Eigen::VectorXd& target, const std::vector<int>& powers,
                                      bool single_quadrature, double tol, int m);

// Two coupled qubits, x = J / J0: leaves "B1" = x(-2i s1y s2z), "B2" = x(-2i s1z s2z).
LeafSet coupling_leaves();

struct TwoQubitSegment {
  enum class Kind { coupling, local, tensor };
  Kind kind = Kind::coupling;
  double duration = 0.0;  // s: coupling exp(-i J t s1z s2z); tensor exp(-i t H)
  int qubit = 1;          // local
  char axis = 'x';        // local
  double angle = 0.0;     // local: exp(-i angle/2 sigma_axis)
  double alpha = 0.0, beta = 0.0, gamma = 0.0;  // tensor: H = a XX + b YY + c ZZ
};

// Coupling durations are never negative: signs and the B1 frame come from
// instantaneous local rotations on qubit 1.
std::vector<TwoQubitSegment> realize_coupling(const std::vector<Factor>& factors, double J0);
Eigen::Matrix4cd simulate_segments(const std::vector<TwoQubitSegment>& segments, double J);

Eigen::Matrix4cd zz_gate(double theta);  // exp(-i theta s1z s2z)

struct ZZCompiled {
  CompiledSequence sequence;
  std::vector<TwoQubitSegment> segments;
};

// exp(-i theta s1z s2z) for J in J0[1 - delta, 1 + delta], fitted on `samples`
// points with odd powers of J / J0.
ZZCompiled compile_j_robust_zz(double theta, double J0, double delta, const std::vector<int>& exponents,
                               int samples, double tol, int m);

// Echo A, U^dagger, A, U with U = exp(-i (pi/2) s1z): equals exp(-i 2 gamma t s1z s2z).
std::vector<TwoQubitSegment> reduce_coupling_tensor(double alpha, double beta, double gamma, double t = 1.0);

struct SmallFlipReport {
  sim::ControlSequence compensated;
  sim::ControlSequence uncompensated;
  double block_flip = 0.0;       // rad at eps = 1, omega = 0
  double linearity_error = 0.0;  // max |beta(omega, eps) - eps beta(omega, 1)| / (flip/2)
  double min_fidelity = 0.0;     // compensated, over the eps grid
  double min_fidelity_uncompensated = 0.0;
  CompiledSequence plan;
};

// Builds a compensated sequence from phase-shifted, amplitude-scaled copies
// of a small-flip block. Throws InvalidInput when the block's eps response is
// not linear to 5% over omega_band x epsilon.
SmallFlipReport compensate_epsilon_small_flip(const sim::ControlSequence& block, const std::vector<double>& epsilon,
                                              double target_angle, const std::vector<int>& exponents, int m,
                                              const std::vector<double>& omega_band = {0.0});

}  // namespace ensctl::composite
