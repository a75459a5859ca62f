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

#include "ensctl/composite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <unsupported/Eigen/MatrixFunctions>

#include "ensctl/errors.hpp"

namespace ensctl::composite {

namespace {

Eigen::MatrixXcd as_complex(const Eigen::Matrix3d& m) { return m.cast<cplx>(); }

liealg::DispersionPolyElement leaf_poly(const liealg::Exponents& e, const Eigen::MatrixXcd& m) {
  return liealg::DispersionPolyElement::monomial(e, m);
}

void append(std::vector<Factor>& out, const std::vector<Factor>& more) {
  for (const auto& f : more) {
    if (f.amount == 0.0) continue;
    if (!out.empty() && out.back().label == f.label) {
      out.back().amount += f.amount;
      if (out.back().amount == 0.0) out.pop_back();
    } else {
      out.push_back(f);
    }
  }
}

void word_factors_into(const BracketWord& w, double s, std::vector<Factor>& out) {
  if (w.is_leaf()) {
    out.push_back({w.label(), s});
    return;
  }
  const double r = std::sqrt(std::abs(s));
  const BracketWord& a = s >= 0.0 ? w.left() : w.right();
  const BracketWord& b = s >= 0.0 ? w.right() : w.left();
  // exp(-a r) exp(-b r) exp(a r) exp(b r), rightmost applied first.
  word_factors_into(b, r, out);
  word_factors_into(a, r, out);
  word_factors_into(b, -r, out);
  word_factors_into(a, -r, out);
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

Eigen::MatrixXcd zz() { return pauli::kron(pauli::Z(), pauli::Z()); }

}  // namespace

BracketWord BracketWord::leaf(std::string label) {
  BracketWord w;
  w.label_ = std::move(label);
  return w;
}

BracketWord BracketWord::ad(const BracketWord& x, const BracketWord& y) {
  BracketWord w;
  w.left_ = std::make_shared<const BracketWord>(x);
  w.right_ = std::make_shared<const BracketWord>(y);
  return w;
}

BracketWord BracketWord::ad_power(const std::string& x, const BracketWord& y, int k) {
  if (k < 0) throw InvalidInput("ad_power: negative power");
  BracketWord w = y;
  for (int i = 0; i < k; ++i) w = ad(leaf(x), w);
  return w;
}

int BracketWord::depth() const { return is_leaf() ? 0 : 1 + std::max(left_->depth(), right_->depth()); }

std::string BracketWord::to_string() const {
  if (is_leaf()) return label_;
  return "[" + left_->to_string() + "," + right_->to_string() + "]";
}

liealg::DispersionPolyElement BracketWord::evaluate(const LeafSet& leaves) const {
  if (is_leaf()) {
    auto it = leaves.find(label_);
    if (it == leaves.end()) throw InvalidInput("bracket word: unknown leaf '" + label_ + "'");
    return it->second.generator;
  }
  return liealg::bracket_poly(left_->evaluate(leaves), right_->evaluate(leaves));
}

std::vector<Factor> word_factors(const BracketWord& w, double s, int max_depth) {
  if (w.depth() > max_depth) throw InvalidInput("word depth " + std::to_string(w.depth()) + " exceeds bound");
  if (!std::isfinite(s)) throw InvalidInput("word strength must be finite");
  std::vector<Factor> out;
  if (s == 0.0) return out;
  word_factors_into(w, s, out);
  return out;
}

std::vector<Factor> commutator_block(const std::string& a, const std::string& b, double t) {
  if (!(t >= 0.0)) throw InvalidInput("commutator_block: t must be nonnegative");
  return word_factors(BracketWord::ad(BracketWord::leaf(a), BracketWord::leaf(b)), t);
}

Eigen::MatrixXcd simulate_factors(const std::vector<Factor>& factors, const LeafSet& leaves, const Point& at) {
  if (leaves.empty()) throw InvalidInput("simulate_factors: no leaves");
  const int dim = leaves.begin()->second.generator.dim();
  std::map<std::string, Eigen::MatrixXcd> gens;
  for (const auto& [label, leaf] : leaves) gens[label] = leaf.generator.evaluate(at);
  std::map<std::pair<std::string, double>, Eigen::MatrixXcd> cache;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  for (const auto& f : factors) {
    auto key = std::make_pair(f.label, f.amount);
    auto it = cache.find(key);
    if (it == cache.end()) {
      auto g = gens.find(f.label);
      if (g == gens.end()) throw InvalidInput("simulate_factors: unknown leaf '" + f.label + "'");
      it = cache.emplace(key, (f.amount * g->second).exp()).first;
    }
    u = it->second * u;
  }
  return u;
}

std::optional<WordMatch> find_word(const LeafSet& leaves, const liealg::Exponents& monomial,
                                   const Eigen::MatrixXcd& direction, int max_depth) {
  const double dnorm2 = liealg::trace_inner(direction, direction);
  if (!(dnorm2 > 0.0)) throw InvalidInput("find_word: zero direction");
  auto match = [&](const liealg::DispersionPolyElement& p) -> std::optional<double> {
    if (p.terms().size() != 1 || p.terms().begin()->first != monomial) return std::nullopt;
    const Eigen::MatrixXcd& c = p.terms().begin()->second;
    const double scale = liealg::trace_inner(direction, c) / dnorm2;
    if (scale == 0.0 || (c - scale * direction).norm() > 1e-10 * c.norm()) return std::nullopt;
    return scale;
  };

  std::vector<std::pair<BracketWord, liealg::DispersionPolyElement>> level;
  for (const auto& [label, leaf] : leaves) {
    if (auto s = match(leaf.generator)) return WordMatch{BracketWord::leaf(label), *s};
    level.emplace_back(BracketWord::leaf(label), leaf.generator);
  }
  for (int d = 1; d <= max_depth; ++d) {
    std::vector<std::pair<BracketWord, liealg::DispersionPolyElement>> next;
    for (const auto& [word, poly] : level)
      for (const auto& [label, leaf] : leaves) {
        liealg::DispersionPolyElement p = liealg::bracket_poly(leaf.generator, poly);
        if (p.is_zero()) continue;
        BracketWord w = BracketWord::ad(BracketWord::leaf(label), word);
        if (auto s = match(p)) return WordMatch{w, *s};
        next.emplace_back(std::move(w), std::move(p));
      }
    level = std::move(next);
  }
  return std::nullopt;
}

liealg::FitResult fit_coefficients(const Eigen::VectorXd& target, const std::vector<liealg::Exponents>& basis,
                                   const std::vector<Point>& grid, double tol) {
  if (basis.empty()) throw InvalidInput("fit_coefficients: empty basis");
  const Eigen::MatrixXd cols = liealg::monomial_columns(basis, grid);
  liealg::FitResult fit = liealg::approximable(target, cols, tol);
  if (fit.rank < static_cast<int>(basis.size()))
    throw InvalidInput("fit_coefficients: basis is rank deficient on the grid");
  return fit;
}

CompiledSequence compile_rotation(const LeafSet& leaves, const Eigen::MatrixXcd& direction,
                                  const std::vector<liealg::Exponents>& basis, const std::vector<Point>& grid,
                                  const Eigen::VectorXd& target_angle, double tol, int m) {
  if (m < 1) throw InvalidInput("compile: subdivision m must be at least 1");
  if (grid.empty() || static_cast<std::size_t>(target_angle.size()) != grid.size())
    throw InvalidInput("compile: target does not match the grid");
  std::vector<WordMatch> words;
  for (const auto& mono : basis) {
    auto w = find_word(leaves, mono, direction);
    if (!w) throw InvalidInput("compile: monomial " + liealg::to_string(mono) + " is not reachable along the direction");
    words.push_back(*w);
  }
  const liealg::FitResult fit = fit_coefficients(target_angle, basis, grid, tol);
  if (!fit.achievable)
    throw Infeasible("compile: best fit misses the tolerance (max residual " + std::to_string(fit.max_residual) + ")");

  CompiledSequence out;
  out.leaves = leaves;
  out.basis = basis;
  out.coefficients.assign(fit.coefficients.data(), fit.coefficients.data() + fit.coefficients.size());
  out.predicted = liealg::DispersionPolyElement(static_cast<int>(direction.rows()));
  for (std::size_t k = 0; k < basis.size(); ++k) out.predicted.add(basis[k], out.coefficients[k] * direction);
  for (int round = 0; round < m; ++round)
    for (std::size_t k = 0; k < basis.size(); ++k)
      append(out.factors, word_factors(words[k].word, out.coefficients[k] / words[k].scale / m));

  out.diagnostics.fit_l2 = fit.l2_residual;
  out.diagnostics.fit_max = fit.max_residual;
  out.diagnostics.subdivisions = m;
  out.diagnostics.factor_count = out.factors.size();
  for (const auto& p : grid) {
    const Eigen::MatrixXcd want = out.predicted.evaluate(p).exp();
    out.diagnostics.compile_error = std::max(out.diagnostics.compile_error, max_abs(simulate_factors(out.factors, leaves, p) - want));
  }
  return out;
}

LeafSet rf_leaves() {
  const liealg::Exponents eps{{"eps", 1}};
  return {{"x", {"x", leaf_poly(eps, as_complex(so3::Wx()))}}, {"y", {"y", leaf_poly(eps, as_complex(so3::Wy()))}}};
}

namespace {

std::vector<Point> eps_grid(const std::vector<double>& eps) {
  std::vector<Point> g;
  for (double e : eps) g.push_back({{"eps", e}});
  return g;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::vector<liealg::Exponents> powers_of(const std::string& name, const std::vector<int>& exps) {
  std::vector<liealg::Exponents> b;
  for (int p : exps) b.push_back(p == 0 ? liealg::Exponents{} : liealg::Exponents{{name, p}});
  return b;
}

}  // namespace

CompiledSequence compile_robust_rotation(const RobustRotationSpec& spec) {
  if (spec.axis != 'x' && spec.axis != 'y') throw InvalidInput("robust rotation: axis must be x or y");
  if (spec.exponents.empty()) throw InvalidInput("robust rotation: empty basis");
  if (spec.epsilon.size() != spec.target.size()) throw InvalidInput("robust rotation: target does not match the grid");
  for (int p : spec.exponents)
    if (p < 1 || p % 2 == 0) throw InvalidInput("robust rotation: eps^" + std::to_string(p) + " is not reachable");
  const Eigen::MatrixXcd dir = as_complex(spec.axis == 'x' ? so3::Wx() : so3::Wy());
  return compile_rotation(rf_leaves(), dir, powers_of("eps", spec.exponents), eps_grid(spec.epsilon),
                          to_vector(spec.target), spec.tol, spec.m);
}

EulerCompiled compile_euler(const std::vector<double>& epsilon, const std::vector<double>& alpha,
                            const std::vector<double>& beta, const std::vector<double>& gamma,
                            const std::vector<int>& exponents, double tol, int m) {
  auto one = [&](char axis, const std::vector<double>& angle) {
    RobustRotationSpec s;
    s.axis = axis;
    s.epsilon = epsilon;
    s.target = angle;
    s.exponents = exponents;
    s.tol = tol;
    s.m = m;
    return compile_robust_rotation(s);
  };
  EulerCompiled out{one('x', alpha), one('y', beta), one('x', gamma), {}};
  append(out.factors, out.gamma.factors);
  append(out.factors, out.beta.factors);
  append(out.factors, out.alpha.factors);
  return out;
}

sim::ControlSequence realize_rf(const std::vector<Factor>& factors, double dt) {
  if (!(dt > 0.0)) throw InvalidInput("realize_rf: dt must be positive");
  sim::ControlSequence seq;
  seq.dt = dt;
  for (const auto& f : factors) {
    if (f.label == "x")
      seq.samples.push_back({0.0, -f.amount / dt});
    else if (f.label == "y")
      seq.samples.push_back({f.amount / dt, 0.0});
    else
      throw InvalidInput("realize_rf: leaf '" + f.label + "' has no rf realization");
  }
  return seq;
}

LeafSet two_param_leaves() {
  return {{"x1", {"x1", leaf_poly({{"eps1", 1}}, as_complex(so3::Wx()))}},
          {"y2", {"y2", leaf_poly({{"eps2", 1}}, as_complex(so3::Wy()))}}};
}

CompiledSequence compile_two_param(char axis, const std::vector<Point>& grid, const Eigen::VectorXd& theta,
                                   const std::vector<int>& k_values, const std::vector<int>& l_values, double tol,
                                   int m) {
  if (axis != 'z' && axis != 'y') throw InvalidInput("two-parameter rotation: axis must be z or y");
  for (const auto& p : grid)
    for (const char* name : {"eps1", "eps2"}) {
      auto it = p.find(name);
      if (it == p.end() || it->second == 0.0) throw InvalidInput("two-parameter rotation: eps1 and eps2 must be nonzero");
    }
  std::vector<liealg::Exponents> basis;
  for (int k : k_values)
    for (int l : l_values) {
      if (k < 0 || l < 0) throw InvalidInput("two-parameter rotation: negative index");
      liealg::Exponents e{{"eps1", axis == 'z' ? 2 * k + 1 : 2 * k}, {"eps2", 2 * l + 1}};
      std::erase_if(e, [](const auto& kv) { return kv.second == 0; });
      basis.push_back(e);
    }
  const Eigen::MatrixXcd dir = as_complex(axis == 'z' ? so3::Wz() : so3::Wy());
  return compile_rotation(two_param_leaves(), dir, basis, grid, theta, tol, m);
}

LeafSet larmor_leaves(bool single_quadrature) {
  LeafSet l{{"z", {"z", leaf_poly({{"w", 1}}, as_complex(so3::Wz()))}},
            {"x", {"x", leaf_poly({}, as_complex(so3::Wx()))}}};
  if (!single_quadrature) l["y"] = {"y", leaf_poly({}, as_complex(so3::Wy()))};
  return l;
}

std::vector<StrongRfSegment> realize_strong_rf(const std::vector<Factor>& factors, double tau) {
  if (!(tau > 0.0)) throw InvalidInput("realize_strong_rf: tau must be positive");
  std::vector<StrongRfSegment> out;
  auto pulse = [&](char axis, double angle) {
    if (!out.empty() && out.back().kind == StrongRfSegment::Kind::pulse && out.back().axis == axis) {
      out.back().angle += angle;
      if (out.back().angle == 0.0) out.pop_back();
      return;
    }
    StrongRfSegment s;
    s.kind = StrongRfSegment::Kind::pulse;
    s.axis = axis;
    s.angle = angle;
    out.push_back(s);
  };
  for (const auto& f : factors) {
    if (f.label == "z") {
      StrongRfSegment d;
      d.duration = std::abs(f.amount) * tau;
      if (f.amount < 0.0) pulse('x', -kPi);
      out.push_back(d);
      if (f.amount < 0.0) pulse('x', kPi);
    } else if (f.label == "x" || f.label == "y") {
      pulse(f.label[0], f.amount);
    } else {
      throw InvalidInput("realize_strong_rf: leaf '" + f.label + "' has no realization");
    }
  }
  return out;
}

Eigen::Matrix3d simulate_strong_rf(const std::vector<StrongRfSegment>& segments, double omega) {
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  for (const auto& s : segments) {
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    if (s.kind == StrongRfSegment::Kind::drift) {
      v.z() = omega * s.duration;
    } else {
      const int i = s.axis == 'x' ? 0 : s.axis == 'y' ? 1 : 2;
      v(i) = s.angle;
    }
    r = so3::exp_of_rotation_vector(v) * r;
  }
  return r;
}

CompiledSequence compile_omega_robust(char axis, const std::vector<double>& omega, double tau,
                                      const Eigen::VectorXd& target, const std::vector<int>& powers,
                                      bool single_quadrature, double tol, int m) {
  if (axis != 'x' && axis != 'y') throw InvalidInput("omega-robust rotation: axis must be x or y");
  if (!(tau > 0.0)) throw InvalidInput("omega-robust rotation: tau must be positive");
  if (powers.empty()) throw InvalidInput("omega-robust rotation: empty power list");
  const LeafSet leaves = larmor_leaves(single_quadrature);
  const Eigen::MatrixXcd dir = as_complex(axis == 'x' ? so3::Wx() : so3::Wy());
  std::vector<Point> grid;
  for (double w : omega) grid.push_back({{"w", w * tau}});
  std::vector<liealg::Exponents> reachable;
  for (const auto& e : powers_of("w", powers))
    if (find_word(leaves, e, dir)) reachable.push_back(e);
  if (reachable.empty()) throw Infeasible("omega-robust rotation: none of the requested powers is reachable");
  if (grid.size() == 1) {
    // A single frequency only pins one coefficient.
    reachable.resize(1);
  }
  const liealg::FitResult fit = fit_coefficients(target, reachable, grid, tol);
  if (!fit.achievable)
    throw Infeasible("omega-robust rotation: reachable powers cannot approximate the target (max residual " +
                     std::to_string(fit.max_residual) + ")");
  return compile_rotation(leaves, dir, reachable, grid, target, tol, m);
}

LeafSet coupling_leaves() {
  const liealg::Exponents x{{"x", 1}};
  const Eigen::MatrixXcd b1 = -2.0 * kI * pauli::kron(pauli::Y(), pauli::Z());
  const Eigen::MatrixXcd b2 = -2.0 * kI * zz();
  return {{"B1", {"B1", leaf_poly(x, b1)}}, {"B2", {"B2", leaf_poly(x, b2)}}};
}

std::vector<TwoQubitSegment> realize_coupling(const std::vector<Factor>& factors, double J0) {
  if (!(J0 > 0.0)) throw InvalidInput("realize_coupling: J0 must be positive");
  std::vector<TwoQubitSegment> out;
  auto local = [&](double angle) {
    if (!out.empty() && out.back().kind == TwoQubitSegment::Kind::local && out.back().qubit == 1 && out.back().axis == 'x') {
      out.back().angle += angle;
      if (out.back().angle == 0.0) out.pop_back();
      return;
    }
    TwoQubitSegment s;
    s.kind = TwoQubitSegment::Kind::local;
    s.qubit = 1;
    s.axis = 'x';
    s.angle = angle;
    out.push_back(s);
  };
  for (const auto& f : factors) {
    // exp(a x B2) = exp(-i J (2a/J0) s1z s2z). Frames on qubit 1 map s1z to
    // -s1z (x rotation by pi) or to +-s1y (x rotation by -+pi/2).
    double frame = 0.0;
    if (f.label == "B2")
      frame = f.amount >= 0.0 ? 0.0 : kPi;
    else if (f.label == "B1")
      frame = f.amount >= 0.0 ? -kPi / 2 : kPi / 2;
    else
      throw InvalidInput("realize_coupling: leaf '" + f.label + "' has no realization");
    if (frame != 0.0) local(-frame);
    TwoQubitSegment c;
    c.duration = 2.0 * std::abs(f.amount) / J0;
    out.push_back(c);
    if (frame != 0.0) local(frame);
  }
  return out;
}

Eigen::Matrix4cd simulate_segments(const std::vector<TwoQubitSegment>& segments, double J) {
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Identity();
  for (const auto& s : segments) {
    Eigen::Matrix4cd step;
    switch (s.kind) {
      case TwoQubitSegment::Kind::coupling:
        if (s.duration < 0.0) throw InvalidInput("coupling segment with negative duration");
        step = zz_gate(J * s.duration);
        break;
      case TwoQubitSegment::Kind::local: {
        if (s.qubit != 1 && s.qubit != 2) throw InvalidInput("local segment: qubit must be 1 or 2");
        const Eigen::Matrix2cd r = pauli::rotation(s.axis, s.angle);
        step = s.qubit == 1 ? pauli::kron(r, pauli::I2()) : pauli::kron(pauli::I2(), r);
        break;
      }
      case TwoQubitSegment::Kind::tensor: {
        const Eigen::Matrix4cd h = s.alpha * pauli::kron(pauli::X(), pauli::X()) +
                                   s.beta * pauli::kron(pauli::Y(), pauli::Y()) + s.gamma * pauli::kron(pauli::Z(), pauli::Z());
        step = (-kI * s.duration * h).exp();
        break;
      }
    }
    u = step * u;
  }
  return u;
}

Eigen::Matrix4cd zz_gate(double theta) {
  Eigen::Matrix4cd g = Eigen::Matrix4cd::Zero();
  g(0, 0) = g(3, 3) = std::polar(1.0, -theta);
  g(1, 1) = g(2, 2) = std::polar(1.0, theta);
  return g;
}

ZZCompiled compile_j_robust_zz(double theta, double J0, double delta, const std::vector<int>& exponents, int samples,
                               double tol, int m) {
  if (!(delta >= 0.0 && delta < 1.0)) throw InvalidInput("J-robust ZZ: delta must lie in [0, 1)");
  if (!(J0 > 0.0)) throw InvalidInput("J-robust ZZ: J0 must be positive");
  if (exponents.empty()) throw InvalidInput("J-robust ZZ: empty basis");
  for (int p : exponents)
    if (p < 1 || p % 2 == 0) throw InvalidInput("J-robust ZZ: only odd powers of J are reachable");
  std::vector<Point> grid;
  std::vector<int> exps = exponents;
  if (delta == 0.0) {
    grid.push_back({{"x", 1.0}});
    exps.resize(1);
  } else {
    if (samples < 1) throw InvalidInput("J-robust ZZ: need at least one sample");
    for (double x : sim::linspace(1.0 - delta, 1.0 + delta, samples)) grid.push_back({{"x", x}});
  }
  // exp(g B2) = exp(-i 2g s1z s2z), so the generator coefficient is theta / 2.
  const Eigen::VectorXd target = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.size()), theta / 2);
  ZZCompiled out;
  out.sequence = compile_rotation(coupling_leaves(), -2.0 * kI * zz(), powers_of("x", exps), grid, target, tol, m);
  out.segments = realize_coupling(out.sequence.factors, J0);
  return out;
}

std::vector<TwoQubitSegment> reduce_coupling_tensor(double alpha, double beta, double gamma, double t) {
  TwoQubitSegment a;
  a.kind = TwoQubitSegment::Kind::tensor;
  a.duration = t;
  a.alpha = alpha;
  a.beta = beta;
  a.gamma = gamma;
  TwoQubitSegment u;
  u.kind = TwoQubitSegment::Kind::local;
  u.qubit = 1;
  u.axis = 'z';
  u.angle = kPi;
  TwoQubitSegment udag = u;
  udag.angle = -kPi;
  return {a, udag, a, u};
}

namespace {

// Rotation vector of a proper rotation (angle in [0, pi]).
Eigen::Vector3d rotation_vector(const Eigen::Matrix3d& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

void append_scaled(sim::ControlSequence& out, const sim::ControlSequence& block, double scale, double phase) {
  const double c = std::cos(phase), s = std::sin(phase);
  for (const auto& x : block.samples) out.samples.push_back({scale * (c * x.u - s * x.v), scale * (s * x.u + c * x.v)});
}

double min_bloch_fidelity(const sim::ControlSequence& pulse, const std::vector<double>& epsilon, double angle) {
  const sim::DispersionGrid grid({{"omega", {0.0}}, {"epsilon", epsilon}});
  const Eigen::Vector3d want = so3::exp_of_rotation_vector(Eigen::Vector3d(angle, 0, 0)) * Eigen::Vector3d::UnitZ();
  return sim::fidelity_map(pulse, grid, sim::TargetSpec<Eigen::Vector3d>::uniform(want)).min();
}

}  // namespace

SmallFlipReport compensate_epsilon_small_flip(const sim::ControlSequence& block, const std::vector<double>& epsilon,
                                              double target_angle, const std::vector<int>& exponents, int m,
                                              const std::vector<double>& omega_band) {
  block.validate();
  if (block.samples.empty()) throw InvalidInput("small-flip compensation: empty block");
  if (epsilon.empty() || omega_band.empty()) throw InvalidInput("small-flip compensation: empty grid");
  std::vector<double> eps = epsilon;
  std::sort(eps.begin(), eps.end());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());

  SmallFlipReport rep;
  sim::GridPoint nominal;
  const Eigen::Vector3d rv = rotation_vector(sim::propagate_point_so3(block, nominal));
  rep.block_flip = rv.norm();
  if (!(rep.block_flip > 0.0)) throw InvalidInput("small-flip compensation: block has zero flip");
  const double block_phase = std::atan2(rv.y(), rv.x());

  for (double w : omega_band) {
    sim::GridPoint p;
    p.omega = w;
    const cplx ref = sim::propagate_point(block, p, sim::PlantModel::hard_pulse).beta;
    for (double e : eps) {
      p.epsilon = e;
      const cplx b = sim::propagate_point(block, p, sim::PlantModel::hard_pulse).beta;
      rep.linearity_error = std::max(rep.linearity_error, std::abs(b - e * ref) / (rep.block_flip / 2));
    }
  }
  if (rep.linearity_error > 0.05)
    throw InvalidInput("small-flip compensation: block response is not linear in eps to 5%");

  RobustRotationSpec spec;
  spec.epsilon = eps;
  spec.target.assign(eps.size(), target_angle);
  spec.exponents = eps.size() == 1 ? std::vector<int>{1} : exponents;
  spec.tol = kPi;
  spec.m = m;
  rep.plan = compile_robust_rotation(spec);

  // exp(a eps Omega_axis) ~ the block scaled by |a|/flip, turned onto the axis.
  rep.compensated.dt = block.dt;
  for (const auto& f : rep.plan.factors) {
    double phase = f.label == "x" ? 0.0 : kPi / 2;
    if (f.amount < 0.0) phase += kPi;
    append_scaled(rep.compensated, block, std::abs(f.amount) / rep.block_flip, phase - block_phase);
  }

  rep.uncompensated.dt = block.dt;
  const int whole = static_cast<int>(std::floor(target_angle / rep.block_flip));
  for (int j = 0; j < whole; ++j) append_scaled(rep.uncompensated, block, 1.0, -block_phase);
  const double rest = target_angle - whole * rep.block_flip;
  if (rest > 0.0) append_scaled(rep.uncompensated, block, rest / rep.block_flip, -block_phase);

  rep.min_fidelity = min_bloch_fidelity(rep.compensated, eps, target_angle);
  rep.min_fidelity_uncompensated = min_bloch_fidelity(rep.uncompensated, eps, target_angle);
  return rep;
}

}  // namespace ensctl::composite
