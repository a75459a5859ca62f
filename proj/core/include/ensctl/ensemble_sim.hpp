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

// Exact piecewise-constant propagation of spin ensembles over dispersion
// grids, plus distance and fidelity against (possibly per-point) targets.
// Axis-angle closed forms are used throughout; there is no ODE integrator.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ensctl/conventions.hpp"

namespace ensctl::sim {

struct ControlSample {
  double u = 0.0;  // rad/s
  double v = 0.0;  // rad/s
};

struct ControlSequence {
  double dt = 0.0;  // s
  std::vector<ControlSample> samples;
  std::optional<double> a_max;  // rad/s

  // Throws InvalidInput unless dt > 0, every entry is finite and, when a_max
  // is set, every amplitude is within a_max * (1 + 1e-12).
  void validate() const;
  double duration() const { return dt * static_cast<double>(samples.size()); }
  double max_amplitude() const;
};

// p1 followed by p2. Step durations must agree.
ControlSequence concat(const ControlSequence& p1, const ControlSequence& p2);

std::vector<double> linspace(double lo, double hi, int n);

struct GridPoint {
  double omega = 0.0;    // rad/s
  double epsilon = 1.0;  // dimensionless rf scale
  double theta = 0.0;    // rad, rf phase offset
  double J = 0.0;        // rad/s, coupling
};

struct Axis {
  std::string name;  // omega | epsilon | theta | J
  std::vector<double> values;
};

// Cartesian product of named axes, stored in the canonical order
// omega, epsilon, theta, J. Points enumerate lexicographically with the first
// axis slowest. Missing axes take their GridPoint defaults.
class DispersionGrid {
 public:
  DispersionGrid() = default;
  explicit DispersionGrid(std::vector<Axis> axes);

  std::size_t size() const;
  GridPoint point(std::size_t index) const;
  const std::vector<Axis>& axes() const { return axes_; }
  bool has_axis(const std::string& name) const;
  const Axis& axis(const std::string& name) const;

  bool operator==(const DispersionGrid& o) const;

 private:
  std::vector<Axis> axes_;
};

// First column (alpha, beta) of [[alpha, -conj(beta)], [beta, conj(alpha)]].
struct SU2Element {
  cplx alpha{1.0, 0.0};
  cplx beta{0.0, 0.0};

  Eigen::Matrix2cd matrix() const;
  static SU2Element from_matrix(const Eigen::Matrix2cd& m);
  double unimodularity_error() const { return std::abs(std::norm(alpha) + std::norm(beta) - 1.0); }
  // this * o: apply o first.
  SU2Element operator*(const SU2Element& o) const;
};

// Bloch-frame rotation corresponding to an SU(2) element.
Eigen::Matrix3d so3_image(const SU2Element& u);

struct StepPropagator {
  SU2Element su2;
  Eigen::Matrix3d so3;
};

// Exact exponential of the constant generator over dt. Throws InvalidInput on
// non-finite inputs or dt <= 0.
StepPropagator step_propagator(double omega, double epsilon, double u, double v, double dt);

// How a step is modelled. exact: the full generator over dt. hard_pulse:
// free precession by omega*dt followed by an instantaneous rf rotation of flip
// eps*A*dt, the factorization under which spinor polynomials are exact.
enum class PlantModel { exact, hard_pulse };

SU2Element step_su2(const GridPoint& p, const ControlSample& c, double dt, PlantModel model);
Eigen::Matrix3d step_so3(const GridPoint& p, const ControlSample& c, double dt, PlantModel model);

// Net propagator of the whole sequence at one grid point.
SU2Element propagate_point(const ControlSequence& pulse, const GridPoint& p, PlantModel model = PlantModel::exact);
Eigen::Matrix3d propagate_point_so3(const ControlSequence& pulse, const GridPoint& p,
                                    PlantModel model = PlantModel::exact);

template <class State>
struct EnsembleState {
  DispersionGrid grid;
  std::vector<State> states;
};

using BlochEnsemble = EnsembleState<Eigen::Vector3d>;
using SpinorEnsemble = EnsembleState<SU2Element>;
using UnitaryEnsemble = EnsembleState<Eigen::Matrix4cd>;

BlochEnsemble uniform_bloch(const DispersionGrid& grid, const Eigen::Vector3d& x);
SpinorEnsemble uniform_spinor(const DispersionGrid& grid, const SU2Element& s = {});

// Throws InvalidInput when initial is not defined on grid.
BlochEnsemble propagate(const ControlSequence& pulse, const DispersionGrid& grid, const BlochEnsemble& initial,
                        PlantModel model = PlantModel::exact);
SpinorEnsemble propagate(const ControlSequence& pulse, const DispersionGrid& grid, const SpinorEnsemble& initial,
                         PlantModel model = PlantModel::exact);

// Either a constant target or one target per grid point.
template <class State>
struct TargetSpec {
  std::optional<State> constant;
  std::vector<State> table;

  static TargetSpec uniform(State s) { return {std::move(s), {}}; }
  static TargetSpec per_point(std::vector<State> t) { return {std::nullopt, std::move(t)}; }
  const State& at(std::size_t i) const { return constant ? *constant : table.at(i); }
  void check_size(std::size_t n) const;
};

struct Distance {
  double l2 = 0.0;   // sqrt(mean pointwise distance^2)
  double sup = 0.0;  // max pointwise distance
};

// min over global phase of |psi - e^{i phi} g|.
double spinor_distance(const SU2Element& psi, const SU2Element& g);

Distance ensemble_distance(const BlochEnsemble& final, const TargetSpec<Eigen::Vector3d>& target);
Distance ensemble_distance(const SpinorEnsemble& final, const TargetSpec<SU2Element>& target);

double bloch_fidelity(const Eigen::Vector3d& x, const Eigen::Vector3d& g);
double spinor_fidelity(const SU2Element& psi, const SU2Element& g);
double unitary_fidelity(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& g);

struct FidelityMap {
  DispersionGrid grid;
  std::vector<double> values;

  double min() const;
  double max() const;
};

FidelityMap fidelity_map(const ControlSequence& pulse, const DispersionGrid& grid,
                         const TargetSpec<Eigen::Vector3d>& target,
                         const Eigen::Vector3d& initial = Eigen::Vector3d::UnitZ(),
                         PlantModel model = PlantModel::exact);
// Spinor targets compare against the first column of the net propagator.
FidelityMap fidelity_map(const ControlSequence& pulse, const DispersionGrid& grid,
                         const TargetSpec<SU2Element>& target, PlantModel model = PlantModel::exact);
FidelityMap fidelity_map(const UnitaryEnsemble& final, const TargetSpec<Eigen::Matrix4cd>& target);

// Phase-dispersion frame law: for every (omega, epsilon) point and every theta
// on the grid, returns max |exp(-theta Wz) X_theta(T) - X_0(T)| where
// X_theta(0) = exp(theta Wz) x0. Throws InvalidInput without a theta axis.
double phase_frame_check(const ControlSequence& pulse, const DispersionGrid& grid,
                         const Eigen::Vector3d& x0 = Eigen::Vector3d::UnitZ());

}  // namespace ensctl::sim
