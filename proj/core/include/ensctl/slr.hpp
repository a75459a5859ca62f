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

// Hard-pulse spinor polynomials and the Shinnar-Le Roux recursions.
//
// Each step k applies free precession by omega*dt followed by an rf rotation
// of flip phi_k about (cos theta_k, sin theta_k, 0). With z = exp(-i omega dt)
// the spinor after n steps is z^{n/2} (P_n(z), Q_n(z)), where
//   P_n(z) = sum_k p_k z^{-k},  Q_n(z) = sum_k q_k z^{-k},  k = 0..n-1.

#include <cstdint>
#include <optional>
#include <vector>

#include "ensctl/conventions.hpp"
#include "ensctl/ensemble_sim.hpp"

namespace ensctl::slr {

struct HardPulseStep {
  double phi = 0.0;    // rad, in [0, pi]
  double theta = 0.0;  // rad

  double C() const;
  cplx S() const;  // -i e^{i theta} sin(phi/2)
  sim::ControlSample control(double dt) const;
  static HardPulseStep from_control(const sim::ControlSample& c, double dt);
};

struct SpinorPolynomials {
  std::vector<cplx> p;
  std::vector<cplx> q;

  int n() const { return static_cast<int>(p.size()); }
  cplx P(cplx z) const;
  cplx Q(cplx z) const;
  // max | |P|^2 + |Q|^2 - 1 | over `samples` equispaced unit-circle points.
  double unimodularity_error(int samples = 256) const;
  // Spinor the polynomials predict for a hard-pulse train at frequency omega.
  sim::SU2Element spinor(double omega, double dt) const;
};

SpinorPolynomials forward_recursion(const std::vector<HardPulseStep>& steps);
// Polynomials after each of steps 1..n.
std::vector<SpinorPolynomials> forward_trace(const std::vector<HardPulseStep>& steps);

struct InverseResult {
  std::vector<HardPulseStep> steps;    // in application order
  std::vector<double> top_residual;    // dropped leading coefficient of P_{k-1}, per backward step
  std::vector<double> low_residual;    // dropped constant coefficient of Q_{k-1}, per backward step
  std::vector<double> unimodularity;   // after each backward step
};

// Throws InvalidInput when the input is not unimodular to 1e-6 and
// NumericalFailure on a degenerate extraction (|p_0| < 1e-14, q_0 != 0).
// Peeling is only as accurate as the polynomial-to-angle map is conditioned:
// long trains of large flips make the low coefficients tiny, and double
// rounding of the coefficients then no longer determines the angles.
InverseResult inverse_recursion(const SpinorPolynomials& poly, int check_samples = 256);

struct Completion {
  SpinorPolynomials poly;
  double q_scale = 1.0;  // factor applied to q to respect the margin
  double residual = 0.0;  // unimodularity error at 16n samples
};

// Minimum-phase P with |P|^2 = 1 - |Q|^2 on the unit circle. A nonzero
// root_shuffle_seed multiplies the selected roots together in a shuffled order.
Completion complete_polynomial(const std::vector<cplx>& q, double margin = 1e-6,
                               std::uint64_t root_shuffle_seed = 0);

struct RotationTag {
  char axis = 'x';
  double angle = 0.0;
};

struct TargetProfile {
  std::vector<double> omega;  // rad/s
  std::vector<cplx> F_alpha;
  std::vector<cplx> F_beta;
  std::vector<double> weight;  // empty means all ones; 0 excludes a sample
  std::optional<RotationTag> tag;

  void validate() const;
  std::size_t size() const { return omega.size(); }

  // Constant rotation about x or y over `count` points spanning [-band, band].
  static TargetProfile broadband(char axis, double angle, double band, int count);
  // F = (cos(phi/2), -i sin(phi/2)) per sample.
  static TargetProfile from_flips(const std::vector<double>& omega, const std::vector<double>& flips,
                                  const std::vector<double>& weight = {});
};

struct PolyFit {
  Completion completion;
  double beta_error = 0.0;  // max weighted |Q - F_beta|
  double band_error = 0.0;  // max weighted phase-invariant spinor distance
};

// Least-squares q on the profile (at least 8n samples), then completion.
// Singular values below rcond * sigma_max are discarded.
PolyFit target_to_polys(const TargetProfile& profile, int n, double dt, double margin = 1e-6, double rcond = 1e-12);

struct Design {
  sim::ControlSequence pulse;
  std::vector<SpinorPolynomials> blocks;  // one per designed block
  int sub_angles = 1;
  double fit_error = 0.0;        // worst block band error of the polynomial fit
  double max_step_residual = 0.0;  // worst backward-step degree-reduction residual
};

Design design_broadband(char axis, double angle, double band, int n, double dt,
                        std::optional<double> a_max = std::nullopt);

// Profile-selective design; fit_error is the worst flip-angle error of the
// polynomials on weighted samples. Adjacent included samples whose flips differ by
// more than pi/4 must be at least 4/(n dt) apart.
Design design_pattern(const TargetProfile& profile, int n, double dt);

// Flip angle 2 atan2(|beta|, |alpha|) of a spinor.
double flip_angle(const sim::SU2Element& s);

// Frobenius distance between the exact step rotation and its hard-pulse split.
double splitting_error(double omega, double u, double v, double dt);

}  // namespace ensctl::slr
