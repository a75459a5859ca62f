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

// Acceptance suite: one PASS/FAIL line per criterion. Exits 0 when the set of
// failing criteria equals the --expect-fail list (comma-separated ids).

#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ensctl/composite.hpp"
#include "ensctl/errors.hpp"
#include "ensctl/linear_ensemble.hpp"
#include "ensctl/liealg.hpp"
#include "ensctl/polyfield.hpp"
#include "ensctl/slr.hpp"
#include "oracles.hpp"

namespace {

using namespace ensctl;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::vector<slr::HardPulseStep> random_steps(std::mt19937_64& rng, int n) {
  const auto phi = oracle::uniform(rng, static_cast<std::size_t>(n), 0.01, 3.0);
  const auto theta = oracle::uniform(rng, static_cast<std::size_t>(n), -kPi, kPi);
  std::vector<slr::HardPulseStep> steps;
  for (std::size_t k = 0; k < phi.size(); ++k) steps.push_back({phi[k], theta[k]});
  return steps;
}

Outcome slr_roundtrip() {
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto steps = random_steps(rng, 32);
    const auto inv = slr::inverse_recursion(slr::forward_recursion(steps));
    if (inv.steps.size() != steps.size()) return {false, "step count changed"};
    for (std::size_t k = 0; k < steps.size(); ++k) {
      worst = std::max(worst, std::abs(inv.steps[k].phi - steps[k].phi));
      worst = std::max(worst, std::abs(std::remainder(inv.steps[k].theta - steps[k].theta, 2.0 * kPi)));
    }
  }
  return {worst <= 1e-9, "max parameter error " + fmt(worst)};
}

Outcome unimodularity() {
  std::mt19937_64 rng(1002);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto steps = random_steps(rng, 32);
    for (const auto& p : slr::forward_trace(steps)) worst = std::max(worst, p.unimodularity_error(256));
    for (double u : slr::inverse_recursion(slr::forward_recursion(steps), 256).unimodularity)
      worst = std::max(worst, u);
  }
  return {worst <= 1e-9, "max | |P|^2+|Q|^2-1 | " + fmt(worst)};
}

Outcome frequency_response() {
  const double dt = 1e-4, band = 0.5 / dt;
  const Eigen::Matrix2cd target = pauli::rotation('x', kPi / 2);
  const sim::SU2Element want{target(0, 0), target(1, 0)};
  struct Result {
    double consistency = 0.0, band_error = 0.0;
  };
  const auto run = [&](int n) {
    const auto d = slr::design_broadband('x', kPi / 2, band, n, dt);
    Result r;
    for (double w : sim::linspace(-band, band, 65)) {
      const auto s = sim::propagate_point(d.pulse, {w, 1.0, 0.0, 0.0}, sim::PlantModel::hard_pulse);
      r.consistency = std::max(r.consistency, sim::spinor_distance(s, d.blocks.at(0).spinor(w, dt)));
      r.band_error = std::max(r.band_error, sim::spinor_distance(s, want));
    }
    return r;
  };
  const Result r64 = run(64), r16 = run(16);
  const bool pass = r64.consistency <= 1e-8 && r64.band_error <= 0.05 && r64.band_error < r16.band_error;
  return {pass, "prediction mismatch " + fmt(r64.consistency) + ", band error n=64 " + fmt(r64.band_error) +
                    " vs n=16 " + fmt(r16.band_error)};
}

Outcome splitting_order() {
  std::vector<double> h, e;
  for (double dt : {1e-2, 1e-3, 1e-4}) {
    h.push_back(dt);
    e.push_back(slr::splitting_error(40.0, 90.0, -30.0, dt));
  }
  const double s = oracle::loglog_slope(h, e);
  return {s >= 1.8 && s <= 2.2, "slope " + fmt(s)};
}

Outcome commutator_scaling() {
  const auto leaves = composite::rf_leaves();
  std::vector<double> h, e;
  for (double t : {1e-2, 1e-3, 1e-4}) {
    const Eigen::MatrixXcd b =
        composite::simulate_factors(composite::commutator_block("x", "y", t), leaves, {{"eps", 1.0}});
    h.push_back(t);
    e.push_back((b - oracle::expm(Eigen::Matrix3d(t * oracle::Wz())).cast<cplx>()).norm());
  }
  const double s = oracle::loglog_slope(h, e);
  return {s >= 1.35 && s <= 1.65, "slope " + fmt(s)};
}

Outcome ad_power_identity() {
  const auto x = liealg::DispersionPolyElement::monomial({{"e1", 1}}, oracle::Wx().cast<cplx>());
  const auto y = liealg::DispersionPolyElement::monomial({{"e2", 1}}, oracle::Wy().cast<cplx>());
  double worst = 0.0;
  bool exponents_ok = true;
  for (int k = 0; k <= 4; ++k) {
    const auto r = liealg::ad_power(x, y, 2 * k + 1);
    if (r.terms().size() != 1 || r.terms().begin()->first != liealg::Exponents{{"e1", 2 * k + 1}, {"e2", 1}}) {
      exponents_ok = false;
      continue;
    }
    const double sign = k % 2 == 0 ? 1.0 : -1.0;
    worst = std::max(worst, (r.terms().begin()->second - sign * oracle::Wz().cast<cplx>()).norm());
  }
  return {exponents_ok && worst <= 1e-12,
          std::string(exponents_ok ? "exponents match" : "exponent mismatch") + ", residual " + fmt(worst)};
}

Outcome compensation_monotonicity() {
  const auto eps = sim::linspace(0.9, 1.1, 21);
  const Eigen::Vector3d want = oracle::expm(Eigen::Matrix3d(kPi / 2 * oracle::Wx())) * Eigen::Vector3d::UnitZ();
  const auto worst_fid = [&](const composite::CompiledSequence& seq) {
    double f = 1.0;
    for (double e : eps) {
      const Eigen::Matrix3d g = seq.predicted.evaluate({{"eps", e}}).real();
      f = std::min(f, 0.5 * (1.0 + (oracle::expm(g) * Eigen::Vector3d::UnitZ()).dot(want)));
    }
    return f;
  };
  std::vector<double> infid;
  composite::CompiledSequence last;
  for (const std::vector<int>& basis : {std::vector<int>{1}, std::vector<int>{1, 3}, std::vector<int>{1, 3, 5}}) {
    composite::RobustRotationSpec spec;
    spec.epsilon = eps;
    spec.target.assign(eps.size(), kPi / 2);
    spec.exponents = basis;
    spec.tol = 1.0;
    last = composite::compile_robust_rotation(spec);
    infid.push_back(1.0 - worst_fid(last));
  }
  Eigen::MatrixXd cols(21, 3);
  const Eigen::VectorXd target = Eigen::VectorXd::Constant(21, kPi / 2);
  for (int i = 0; i < 21; ++i)
    for (int k = 0; k < 3; ++k) cols(i, k) = std::pow(eps[static_cast<std::size_t>(i)], 2 * k + 1);
  const double oracle_max = (cols * oracle::lstsq(cols, target) - target).cwiseAbs().maxCoeff();
  const bool fit_ok = last.diagnostics.fit_max <= 2.0 * oracle_max;
  const bool pass = infid[1] < infid[0] && infid[2] < infid[1] && 1.0 - infid[2] >= 0.9999 && fit_ok;
  return {pass, "worst infidelity " + fmt(infid[0]) + " > " + fmt(infid[1]) + " > " + fmt(infid[2]) +
                    ", fit " + fmt(last.diagnostics.fit_max) + " vs oracle " + fmt(oracle_max)};
}

Outcome phase_impossibility() {
  std::mt19937_64 rng(1008);
  const sim::DispersionGrid grid({{"omega", {-300.0, 0.0, 450.0}},
                                  {"epsilon", {0.9, 1.0, 1.1}},
                                  {"theta", sim::linspace(-kPi, kPi, 33)}});
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    sim::ControlSequence p;
    p.dt = 1e-4;
    const auto u = oracle::uniform(rng, 24, -8000.0, 8000.0);
    const auto v = oracle::uniform(rng, 24, -8000.0, 8000.0);
    for (std::size_t k = 0; k < u.size(); ++k) p.samples.push_back({u[k], v[k]});
    worst = std::max(worst, sim::phase_frame_check(p, grid));
  }
  return {worst <= 1e-9, "max frame deviation " + fmt(worst)};
}

Outcome drift_reversal() {
  double worst = 0.0;
  for (double w : {-2.0, 0.37, 5.0}) {
    const Eigen::Matrix3d lhs = oracle::expm(Eigen::Matrix3d(kPi * oracle::Wx())) *
                                oracle::expm(Eigen::Matrix3d(w * oracle::Wz())) *
                                oracle::expm(Eigen::Matrix3d(-kPi * oracle::Wx()));
    worst = std::max(worst, (lhs - oracle::expm(Eigen::Matrix3d(-w * oracle::Wz()))).norm());
  }
  const std::vector<double> omega = sim::linspace(-200.0, 200.0, 11);
  const Eigen::VectorXd even = Eigen::VectorXd::Constant(11, kPi / 2);
  bool infeasible = false;
  try {
    composite::compile_omega_robust('y', omega, 1e-3, even, {1, 3, 5}, true, 1e-3, 1);
  } catch (const Infeasible&) {
    infeasible = true;
  }
  return {worst <= 1e-12 && infeasible,
          "conjugation residual " + fmt(worst) + ", even target " + (infeasible ? "infeasible" : "accepted")};
}

Outcome nilpotency_closure() {
  using namespace liealg;
  Eigen::MatrixXcd e12 = Eigen::MatrixXcd::Zero(3, 3), e23 = Eigen::MatrixXcd::Zero(3, 3);
  e12(0, 1) = 1.0;
  e23(1, 2) = 1.0;
  const auto m = matrix_nilpotency({e12, e23}, 8);
  const auto v = vf_nilpotency({heisenberg_g1(), heisenberg_g2()}, 8);
  const bool heis = m.kind == NilpotencyKind::nilpotent && m.step == 2 && v.kind == NilpotencyKind::nilpotent &&
                    v.step == 2;
  const auto rf = lie_closure({DispersionPolyElement::monomial({}, oracle::Wx().cast<cplx>()),
                               DispersionPolyElement::monomial({}, oracle::Wy().cast<cplx>())});
  const bool so3 = rf.algebra_dim == 3 && rf.nilpotency.kind == NilpotencyKind::not_nilpotent;

  const int count = 33;
  SampledElement gu, gv;
  Eigen::MatrixXd trig(count, 3);
  for (int k = 0; k < count; ++k) {
    const double t = 2.0 * kPi * k / count;
    gu.values.push_back((std::cos(t) * oracle::Wx() + std::sin(t) * oracle::Wy()).cast<cplx>());
    gv.values.push_back((-std::sin(t) * oracle::Wx() + std::cos(t) * oracle::Wy()).cast<cplx>());
    trig.row(k) << 1.0, std::cos(t), std::sin(t);
  }
  const auto ph = lie_closure_sampled({gu, gv});
  double resid = 0.0;
  for (const Eigen::Matrix3d& d : {oracle::Wx(), oracle::Wy(), oracle::Wz()}) {
    const auto fam = reachable_functions(ph, d.cast<cplx>());
    for (Eigen::Index c = 0; c < fam.samples.cols(); ++c) {
      const Eigen::VectorXd f = fam.samples.col(c);
      resid = std::max(resid, (trig * oracle::lstsq(trig, f) - f).lpNorm<Eigen::Infinity>());
    }
  }
  return {heis && so3 && resid <= 1e-9, "heisenberg " + to_string(m) + " / " + to_string(v) + ", rf dim " +
                                            std::to_string(rf.algebra_dim) + " " + to_string(rf.nilpotency) +
                                            ", trig residual " + fmt(resid)};
}

Outcome linear_ensemble() {
  std::mt19937_64 rng(1011);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto a = oracle::uniform(rng, 16, -1.0, 1.0);
    const auto b = oracle::uniform(rng, 4, -1.0, 1.0);
    linear::LinearSystemSample s{0.0, Eigen::Map<const Eigen::Matrix4d>(a.data()),
                                 Eigen::Map<const Eigen::Vector4d>(b.data())};
    worst = std::max(worst, linear::companion_transform(s).residual);
  }
  Eigen::VectorXd c0(4), c1(4);
  c0 << 0.0, 1.0, -2.0, 0.5;
  c1 << 1.0, 1.0, -2.0, 0.5;
  const Eigen::Vector4d e4(0, 0, 0, 1);
  const auto cond = linear::ensemble_necessary_conditions(
      {{0.0, linear::companion_matrix(c0), e4}, {1.0, linear::companion_matrix(c1), e4}});
  const int img = cond.image_rank.at(0);
  const auto scalar = [](double s, double e) {
    return linear::LinearSystemSample{s, Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Constant(1, 1, e)};
  };
  const double got = linear::reachability_residual({scalar(0.0, 0.9), scalar(1.0, 1.1)},
                                                   {Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)}, 16, 0.1);
  const double closed = 0.2 / std::sqrt(0.81 + 1.21);
  const double gap = std::abs(got - closed);
  return {worst <= 1e-10 && img == 3 && gap <= 1e-12, "companion residual " + fmt(worst) + ", singular image rank " +
                                                          std::to_string(img) + ", two-eps gap " + fmt(gap)};
}

Outcome heisenberg_invariant() {
  std::mt19937_64 rng(1012);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto u1 = oracle::uniform(rng, 64, -1.0, 1.0);
    const auto u2 = oracle::uniform(rng, 64, -1.0, 1.0);
    const auto r = linear::heisenberg_invariant(u1, u2, 0.01, {0.5, 1.0, 2.0});
    const double ref = r.final_state[1].z();
    for (std::size_t i = 0; i < 3; ++i) {
      const double e = r.epsilon[i];
      worst = std::max(worst, std::abs(r.final_state[i].z() / (e * e) - ref) / std::max(std::abs(ref), 1e-300));
    }
  }
  return {worst <= 1e-6, "max relative spread of x3/eps^2 " + fmt(worst)};
}

Outcome coupling() {
  const auto leaves = composite::coupling_leaves();
  const Eigen::MatrixXcd b1 = leaves.at("B1").generator.evaluate({{"x", 1.0}});
  const Eigen::MatrixXcd b2 = leaves.at("B2").generator.evaluate({{"x", 1.0}});
  const Eigen::MatrixXcd c = b1 * b2 - b2 * b1;
  const Eigen::MatrixXcd nested = b1 * c - c * b1;
  const double constant = (nested.array() * b2.conjugate().array()).sum().real() / b2.squaredNorm();
  const double bracket_resid = (nested + 16.0 * b2).norm();

  const auto zz = composite::compile_j_robust_zz(0.5, 100.0, 0.1, {1, 3}, 21, 1e-2, 1);
  double fid = 1.0;
  for (double x : sim::linspace(0.9, 1.1, 21))
    fid = std::min(fid, sim::unitary_fidelity(oracle::expm(zz.sequence.predicted.evaluate({{"x", x}})),
                                              composite::zz_gate(0.5)));

  const double g = 0.45;
  const Eigen::Matrix4cd want =
      oracle::expm(Eigen::Matrix4cd(cplx(0, -2.0 * g) * oracle::kron(oracle::sz(), oracle::sz())));
  const double echo = (composite::simulate_segments(composite::reduce_coupling_tensor(0.3, -0.7, g), 0.0) - want).norm();
  return {bracket_resid <= 1e-12 && fid >= 0.999 && echo <= 1e-10,
          "bracket constant " + fmt(constant) + " (residual " + fmt(bracket_resid) + "), ZZ fidelity " + fmt(fid) +
              ", echo residual " + fmt(echo)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--expect-fail") == 0 && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string id; std::getline(ss, id, ',');) expected.insert(std::stoi(id));
    } else {
      std::fprintf(stderr, "usage: %s [--expect-fail ID[,ID...]]\n", argv[0]);
      return 2;
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"spinor recursion roundtrip", slr_roundtrip},
      {"unimodularity after every recursion step", unimodularity},
      {"broadband frequency response", frequency_response},
      {"hard-pulse splitting order", splitting_order},
      {"commutator block scaling", commutator_scaling},
      {"odd ad-power identity", ad_power_identity},
      {"rf compensation monotonicity", compensation_monotonicity},
      {"phase dispersion frame law", phase_impossibility},
      {"drift reversal and single-quadrature verdict", drift_reversal},
      {"nilpotency and closure", nilpotency_closure},
      {"linear ensemble conditions", linear_ensemble},
      {"heisenberg scaling invariant", heisenberg_invariant},
      {"coupling bracket, robust ZZ and echo", coupling},
  };
  std::set<int> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) failed.insert(id);
    std::printf("[%s] %d: %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str());
  }
  std::printf("%zu/%zu criteria pass\n", criteria.size() - failed.size(), criteria.size());
  if (failed != expected) {
    std::printf("failing set differs from the expected failures\n");
    return 1;
  }
  return 0;
}
