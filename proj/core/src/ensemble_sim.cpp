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

#include "ensctl/ensemble_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "ensctl/errors.hpp"

namespace ensctl::sim {

namespace {

constexpr std::array<const char*, 4> kAxisOrder{"omega", "epsilon", "theta", "J"};

int axis_rank(const std::string& name) {
  for (std::size_t i = 0; i < kAxisOrder.size(); ++i)
    if (name == kAxisOrder[i]) return static_cast<int>(i);
  return -1;
}

bool finite(double x) { return std::isfinite(x); }

// Controls after the rf phase offset theta.
ControlSample shifted(const ControlSample& c, double theta) {
  if (theta == 0.0) return c;
  const double cs = std::cos(theta), sn = std::sin(theta);
  return {c.u * cs - c.v * sn, c.u * sn + c.v * cs};
}

SU2Element axis_angle_su2(const Eigen::Vector3d& r) {
  const double angle = r.norm();
  if (angle == 0.0) return {};
  const Eigen::Vector3d n = r / angle;
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  return {cplx(c, -n.z() * s), -kI * cplx(n.x(), n.y()) * s};
}

SU2Element z_precession(double angle) { return {std::polar(1.0, -angle / 2), 0.0}; }

template <class State>
void check_grid(const DispersionGrid& grid, const EnsembleState<State>& s) {
  if (!(s.grid == grid) || s.states.size() != grid.size())
    throw InvalidInput("propagate: initial state is not defined on the grid");
}

}  // namespace

void ControlSequence::validate() const {
  if (!(dt > 0.0) || !finite(dt)) throw InvalidInput("control sequence: dt must be positive and finite");
  for (const auto& s : samples)
    if (!finite(s.u) || !finite(s.v)) throw InvalidInput("control sequence: non-finite control sample");
  if (a_max) {
    if (!(*a_max > 0.0)) throw InvalidInput("control sequence: a_max must be positive");
    if (max_amplitude() > *a_max * (1.0 + 1e-12))
      throw InvalidInput("control sequence: amplitude exceeds a_max");
  }
}

double ControlSequence::max_amplitude() const {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, std::hypot(s.u, s.v));
  return m;
}

ControlSequence concat(const ControlSequence& p1, const ControlSequence& p2) {
  if (p1.samples.empty()) return p2;
  if (p2.samples.empty()) return p1;
  if (std::abs(p1.dt - p2.dt) > 1e-15 * std::max(p1.dt, p2.dt))
    throw InvalidInput("concat: step durations differ");
  ControlSequence out = p1;
  out.samples.insert(out.samples.end(), p2.samples.begin(), p2.samples.end());
  if (p1.a_max && p2.a_max)
    out.a_max = std::max(*p1.a_max, *p2.a_max);
  else
    out.a_max = std::nullopt;
  return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw InvalidInput("linspace: n must be positive");
  if (n == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  out.back() = hi;
  return out;
}

DispersionGrid::DispersionGrid(std::vector<Axis> axes) : axes_(std::move(axes)) {
  for (const auto& a : axes_) {
    if (axis_rank(a.name) < 0) throw InvalidInput("grid: unknown axis '" + a.name + "'");
    if (a.values.empty()) throw InvalidInput("grid: axis '" + a.name + "' is empty");
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      if (!finite(a.values[i])) throw InvalidInput("grid: axis '" + a.name + "' has a non-finite value");
      if (i > 0 && !(a.values[i] > a.values[i - 1]))
        throw InvalidInput("grid: axis '" + a.name + "' is not strictly increasing");
    }
  }
  std::sort(axes_.begin(), axes_.end(),
            [](const Axis& a, const Axis& b) { return axis_rank(a.name) < axis_rank(b.name); });
  for (std::size_t i = 1; i < axes_.size(); ++i)
    if (axes_[i].name == axes_[i - 1].name) throw InvalidInput("grid: duplicate axis '" + axes_[i].name + "'");
}

std::size_t DispersionGrid::size() const {
  std::size_t n = 1;
  for (const auto& a : axes_) n *= a.values.size();
  return n;
}

GridPoint DispersionGrid::point(std::size_t index) const {
  GridPoint p;
  for (auto it = axes_.rbegin(); it != axes_.rend(); ++it) {
    const std::size_t n = it->values.size();
    const double v = it->values[index % n];
    index /= n;
    if (it->name == "omega") p.omega = v;
    else if (it->name == "epsilon") p.epsilon = v;
    else if (it->name == "theta") p.theta = v;
    else p.J = v;
  }
  return p;
}

bool DispersionGrid::has_axis(const std::string& name) const {
  return std::any_of(axes_.begin(), axes_.end(), [&](const Axis& a) { return a.name == name; });
}

const Axis& DispersionGrid::axis(const std::string& name) const {
  for (const auto& a : axes_)
    if (a.name == name) return a;
  throw InvalidInput("grid: no axis '" + name + "'");
}

bool DispersionGrid::operator==(const DispersionGrid& o) const {
  if (axes_.size() != o.axes_.size()) return false;
  for (std::size_t i = 0; i < axes_.size(); ++i)
    if (axes_[i].name != o.axes_[i].name || axes_[i].values != o.axes_[i].values) return false;
  return true;
}

Eigen::Matrix2cd SU2Element::matrix() const {
  Eigen::Matrix2cd m;
  m << alpha, -std::conj(beta),
       beta, std::conj(alpha);
  return m;
}

SU2Element SU2Element::from_matrix(const Eigen::Matrix2cd& m) { return {m(0, 0), m(1, 0)}; }

SU2Element SU2Element::operator*(const SU2Element& o) const {
  return {alpha * o.alpha - std::conj(beta) * o.beta, beta * o.alpha + std::conj(alpha) * o.beta};
}

Eigen::Matrix3d so3_image(const SU2Element& u) {
  const Eigen::Matrix2cd U = u.matrix();
  const std::array<Eigen::Matrix2cd, 3> sigma{pauli::X(), pauli::Y(), pauli::Z()};
  Eigen::Matrix3d pauli_frame;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      pauli_frame(i, j) = 0.5 * (sigma[static_cast<std::size_t>(i)] * U * sigma[static_cast<std::size_t>(j)] *
                                 U.adjoint()).trace().real();
  Eigen::Matrix3d q;
  q << 0, -1, 0,
       1, 0, 0,
       0, 0, 1;
  return q * pauli_frame * q.transpose();
}

StepPropagator step_propagator(double omega, double epsilon, double u, double v, double dt) {
  if (!finite(omega) || !finite(epsilon) || !finite(u) || !finite(v) || !finite(dt))
    throw InvalidInput("step_propagator: non-finite input");
  if (!(dt > 0.0)) throw InvalidInput("step_propagator: dt must be positive");
  GridPoint p;
  p.omega = omega;
  p.epsilon = epsilon;
  const ControlSample c{u, v};
  return {step_su2(p, c, dt, PlantModel::exact), step_so3(p, c, dt, PlantModel::exact)};
}

SU2Element step_su2(const GridPoint& p, const ControlSample& c0, double dt, PlantModel model) {
  const ControlSample c = shifted(c0, p.theta);
  if (model == PlantModel::exact) return axis_angle_su2(Eigen::Vector3d(p.epsilon * c.u, p.epsilon * c.v, p.omega) * dt);
  const SU2Element rf = axis_angle_su2(Eigen::Vector3d(p.epsilon * c.u, p.epsilon * c.v, 0.0) * dt);
  return rf * z_precession(p.omega * dt);
}

Eigen::Matrix3d step_so3(const GridPoint& p, const ControlSample& c0, double dt, PlantModel model) {
  const ControlSample c = shifted(c0, p.theta);
  const Eigen::Vector3d rf = pauli_to_bloch(Eigen::Vector3d(p.epsilon * c.u, p.epsilon * c.v, 0.0)) * dt;
  if (model == PlantModel::exact) return so3::exp_of_rotation_vector(rf + Eigen::Vector3d(0, 0, p.omega * dt));
  return so3::exp_of_rotation_vector(rf) * so3::exp_of_rotation_vector(Eigen::Vector3d(0, 0, p.omega * dt));
}

SU2Element propagate_point(const ControlSequence& pulse, const GridPoint& p, PlantModel model) {
  SU2Element u;
  for (const auto& c : pulse.samples) u = step_su2(p, c, pulse.dt, model) * u;
  return u;
}

Eigen::Matrix3d propagate_point_so3(const ControlSequence& pulse, const GridPoint& p, PlantModel model) {
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  for (const auto& c : pulse.samples) r = step_so3(p, c, pulse.dt, model) * r;
  return r;
}

BlochEnsemble uniform_bloch(const DispersionGrid& grid, const Eigen::Vector3d& x) {
  return {grid, std::vector<Eigen::Vector3d>(grid.size(), x)};
}

SpinorEnsemble uniform_spinor(const DispersionGrid& grid, const SU2Element& s) {
  return {grid, std::vector<SU2Element>(grid.size(), s)};
}

BlochEnsemble propagate(const ControlSequence& pulse, const DispersionGrid& grid, const BlochEnsemble& initial,
                        PlantModel model) {
  pulse.validate();
  check_grid(grid, initial);
  BlochEnsemble out = initial;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const GridPoint p = grid.point(i);
    Eigen::Vector3d x = initial.states[i];
    for (const auto& c : pulse.samples) x = step_so3(p, c, pulse.dt, model) * x;
    out.states[i] = x;
  }
  return out;
}

SpinorEnsemble propagate(const ControlSequence& pulse, const DispersionGrid& grid, const SpinorEnsemble& initial,
                         PlantModel model) {
  pulse.validate();
  check_grid(grid, initial);
  SpinorEnsemble out = initial;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const GridPoint p = grid.point(i);
    SU2Element s = initial.states[i];
    for (const auto& c : pulse.samples) s = step_su2(p, c, pulse.dt, model) * s;
    out.states[i] = s;
  }
  return out;
}

template <class State>
void TargetSpec<State>::check_size(std::size_t n) const {
  if (!constant && table.size() != n) throw InvalidInput("target: table does not match the grid");
}

template struct TargetSpec<Eigen::Vector3d>;
template struct TargetSpec<SU2Element>;
template struct TargetSpec<Eigen::Matrix4cd>;

double spinor_distance(const SU2Element& psi, const SU2Element& g) {
  // Align the phase, then take the difference directly: the expanded form
  // |psi|^2 + |g|^2 - 2|<g, psi>| cancels down to a sqrt(eps) floor.
  const cplx overlap = std::conj(g.alpha) * psi.alpha + std::conj(g.beta) * psi.beta;
  const cplx phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cplx(1.0);
  return std::hypot(std::abs(psi.alpha - phase * g.alpha), std::abs(psi.beta - phase * g.beta));
}

namespace {

template <class State, class Fn>
Distance accumulate(const EnsembleState<State>& final, const TargetSpec<State>& target, Fn dist) {
  target.check_size(final.states.size());
  if (final.states.empty()) throw InvalidInput("ensemble_distance: empty ensemble");
  Distance d;
  double sum = 0.0;
  for (std::size_t i = 0; i < final.states.size(); ++i) {
    const double di = dist(final.states[i], target.at(i));
    sum += di * di;
    d.sup = std::max(d.sup, di);
  }
  d.l2 = std::sqrt(sum / static_cast<double>(final.states.size()));
  return d;
}

}  // namespace

Distance ensemble_distance(const BlochEnsemble& final, const TargetSpec<Eigen::Vector3d>& target) {
  return accumulate(final, target, [](const Eigen::Vector3d& x, const Eigen::Vector3d& g) { return (x - g).norm(); });
}

Distance ensemble_distance(const SpinorEnsemble& final, const TargetSpec<SU2Element>& target) {
  return accumulate(final, target, spinor_distance);
}

double bloch_fidelity(const Eigen::Vector3d& x, const Eigen::Vector3d& g) {
  const double nx = x.norm(), ng = g.norm();
  if (nx == 0.0 || ng == 0.0) throw InvalidInput("bloch_fidelity: zero vector");
  return 0.5 * (1.0 + x.dot(g) / (nx * ng));
}

double spinor_fidelity(const SU2Element& psi, const SU2Element& g) {
  return std::norm(std::conj(g.alpha) * psi.alpha + std::conj(g.beta) * psi.beta);
}

double unitary_fidelity(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& g) {
  if (u.rows() != g.rows() || u.cols() != g.cols()) throw InvalidInput("unitary_fidelity: dimension mismatch");
  return std::abs((g.adjoint() * u).trace()) / static_cast<double>(u.rows());
}

double FidelityMap::min() const { return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end()); }
double FidelityMap::max() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }

FidelityMap fidelity_map(const ControlSequence& pulse, const DispersionGrid& grid,
                         const TargetSpec<Eigen::Vector3d>& target, const Eigen::Vector3d& initial, PlantModel model) {
  target.check_size(grid.size());
  const auto final = propagate(pulse, grid, uniform_bloch(grid, initial), model);
  FidelityMap map{grid, std::vector<double>(grid.size())};
  for (std::size_t i = 0; i < grid.size(); ++i) map.values[i] = bloch_fidelity(final.states[i], target.at(i));
  return map;
}

FidelityMap fidelity_map(const ControlSequence& pulse, const DispersionGrid& grid, const TargetSpec<SU2Element>& target,
                         PlantModel model) {
  target.check_size(grid.size());
  const auto final = propagate(pulse, grid, uniform_spinor(grid), model);
  FidelityMap map{grid, std::vector<double>(grid.size())};
  for (std::size_t i = 0; i < grid.size(); ++i) map.values[i] = spinor_fidelity(final.states[i], target.at(i));
  return map;
}

FidelityMap fidelity_map(const UnitaryEnsemble& final, const TargetSpec<Eigen::Matrix4cd>& target) {
  target.check_size(final.states.size());
  FidelityMap map{final.grid, std::vector<double>(final.states.size())};
  for (std::size_t i = 0; i < final.states.size(); ++i) map.values[i] = unitary_fidelity(final.states[i], target.at(i));
  return map;
}

double phase_frame_check(const ControlSequence& pulse, const DispersionGrid& grid, const Eigen::Vector3d& x0) {
  if (!grid.has_axis("theta")) throw InvalidInput("phase_frame_check: grid has no theta axis");
  pulse.validate();
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    GridPoint p = grid.point(i);
    const double theta = p.theta;
    Eigen::Vector3d x = so3::exp_of_rotation_vector(Eigen::Vector3d(0, 0, theta)) * x0;
    for (const auto& c : pulse.samples) x = step_so3(p, c, pulse.dt, PlantModel::exact) * x;
    p.theta = 0.0;
    Eigen::Vector3d ref = x0;
    for (const auto& c : pulse.samples) ref = step_so3(p, c, pulse.dt, PlantModel::exact) * ref;
    const Eigen::Vector3d y = so3::exp_of_rotation_vector(Eigen::Vector3d(0, 0, -theta)) * x;
    worst = std::max(worst, (y - ref).norm());
  }
  return worst;
}

}  // namespace ensctl::sim
