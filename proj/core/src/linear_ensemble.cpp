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

#include "ensctl/linear_ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "ensctl/errors.hpp"

namespace ensctl::linear {

void LinearSystemSample::validate() const {
  if (A.rows() == 0 || A.rows() != A.cols()) throw InvalidInput("linear sample: A must be square and nonempty");
  if (B.rows() != A.rows() || B.cols() == 0) throw InvalidInput("linear sample: B must have n rows");
  if (!A.allFinite() || !B.allFinite() || !std::isfinite(s)) throw InvalidInput("linear sample: non-finite entry");
}

Eigen::MatrixXd controllability_matrix(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd C(n, n);
  Eigen::VectorXd v = b;
  for (Eigen::Index k = 0; k < n; ++k) {
    C.col(k) = v;
    v = A * v;
  }
  return C;
}

int numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++r;
  return r;
}

Eigen::MatrixXd companion_matrix(const Eigen::VectorXd& a) {
  const Eigen::Index n = a.size();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) c(i, i + 1) = 1.0;
  c.row(n - 1) = -a.transpose();
  return c;
}

CompanionForm companion_transform(const LinearSystemSample& sys) {
  sys.validate();
  if (sys.B.cols() != 1) throw InvalidInput("companion_transform: single-input systems only");
  const Eigen::Index n = sys.A.rows();
  const Eigen::MatrixXd C = controllability_matrix(sys.A, sys.B.col(0));
  const int rank = numerical_rank(C);
  if (rank < n)
    throw InvalidInput("companion_transform: uncontrollable sample, controllability rank " + std::to_string(rank) +
                       " < " + std::to_string(n));
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(C);
  CompanionForm out;
  Eigen::VectorXd anb = sys.B.col(0);
  for (Eigen::Index k = 0; k < n; ++k) anb = sys.A * anb;
  out.a = -lu.solve(anb);
  const Eigen::MatrixXd Ac = companion_matrix(out.a);
  const Eigen::MatrixXd Cc = controllability_matrix(Ac, Eigen::VectorXd::Unit(n, n - 1));
  // T C = Cc, since T A^k b = Ac^k e_n.
  out.T = Cc * lu.inverse();
  const double scale = std::max(sys.A.norm(), 1e-300);
  out.residual = (out.T * sys.A * out.T.inverse() - Ac).norm() / scale;
  return out;
}

ConditionsReport ensemble_necessary_conditions(const std::vector<LinearSystemSample>& samples, double rel_tol) {
  if (samples.size() < 2) throw InvalidInput("necessary conditions: need at least two samples");
  ConditionsReport rep;
  for (const auto& s : samples) {
    rep.coefficients.push_back(companion_transform(s).a);
    const Eigen::Index n = s.A.rows();
    Eigen::MatrixXd img(n, n);
    Eigen::VectorXd v = s.A * s.B.col(0);
    for (Eigen::Index k = 0; k < n; ++k) {
      img.col(k) = v;
      v = s.A * v;
    }
    rep.image_rank.push_back(numerical_rank(img));
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Eigen::VectorXd& a = rep.coefficients[i];
    if (std::abs(a(0)) <= rel_tol * std::max(1.0, a.norm())) rep.singular.push_back(static_cast<int>(i));
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const Eigen::VectorXd& b = rep.coefficients[j];
      if (a.size() != b.size()) continue;
      const double ascale = std::max({a.norm(), b.norm(), 1.0});
      const double mscale = std::max({samples[i].A.norm(), samples[j].A.norm(), 1e-300});
      if ((a - b).norm() <= rel_tol * ascale && (samples[i].A - samples[j].A).norm() > rel_tol * mscale)
        rep.shared_charpoly.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }
  rep.pass = rep.shared_charpoly.empty() && rep.singular.empty();
  return rep;
}

double reachability_residual(const std::vector<LinearSystemSample>& samples, const std::vector<Eigen::VectorXd>& targets,
                             int N, double dt) {
  if (samples.empty() || samples.size() != targets.size()) throw InvalidInput("reachability: one target per sample");
  if (N < 1) throw InvalidInput("reachability: horizon N must be at least 1");
  if (!(dt > 0.0)) throw InvalidInput("reachability: dt must be positive");
  const Eigen::Index m = samples[0].B.cols();
  Eigen::Index rows = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].validate();
    if (samples[i].B.cols() != m) throw InvalidInput("reachability: samples differ in input count");
    if (targets[i].size() != samples[i].A.rows()) throw InvalidInput("reachability: target size mismatch");
    rows += samples[i].A.rows();
  }
  Eigen::MatrixXd M(rows, N * m);
  Eigen::VectorXd x(rows);
  Eigen::Index r0 = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Eigen::Index n = samples[i].A.rows();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = samples[i].A * dt;
    aug.topRightCorner(n, m) = samples[i].B * dt;
    const Eigen::MatrixXd e = aug.exp();
    const Eigen::MatrixXd Ad = e.topLeftCorner(n, n);
    const Eigen::MatrixXd Bd = e.topRightCorner(n, m);
    // Column block k maps u_k to x(N): Ad^{N-1-k} Bd.
    Eigen::MatrixXd blk = Bd;
    for (int k = N - 1; k >= 0; --k) {
      M.block(r0, k * m, n, m) = blk;
      blk = Ad * blk;
    }
    x.segment(r0, n) = targets[i];
    r0 += n;
  }
  const Eigen::VectorXd u = M.completeOrthogonalDecomposition().solve(x);
  return (M * u - x).norm();
}

namespace {

Eigen::Vector3d field(const Eigen::Vector3d& x, double eps, double u1, double u2) {
  return eps * Eigen::Vector3d(u1, u2, -u1 * x.y() + u2 * x.x());
}

Eigen::Vector3d integrate(const std::vector<double>& u1, const std::vector<double>& u2, double dt, double eps,
                          int substeps) {
  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  const double h = dt / substeps;
  for (std::size_t k = 0; k < u1.size(); ++k)
    for (int j = 0; j < substeps; ++j) {
      const Eigen::Vector3d k1 = field(x, eps, u1[k], u2[k]);
      const Eigen::Vector3d k2 = field(x + 0.5 * h * k1, eps, u1[k], u2[k]);
      const Eigen::Vector3d k3 = field(x + 0.5 * h * k2, eps, u1[k], u2[k]);
      const Eigen::Vector3d k4 = field(x + h * k3, eps, u1[k], u2[k]);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  return x;
}

}  // namespace

HeisenbergReport heisenberg_invariant(const std::vector<double>& u1, const std::vector<double>& u2, double dt,
                                      const std::vector<double>& epsilon, const Eigen::Vector3d& x0, double rel_tol) {
  if (x0.norm() != 0.0) throw InvalidInput("heisenberg: the ratio law is stated for a zero initial state");
  if (u1.size() != u2.size()) throw InvalidInput("heisenberg: control lengths differ");
  if (!(dt > 0.0)) throw InvalidInput("heisenberg: dt must be positive");
  if (epsilon.empty()) throw InvalidInput("heisenberg: no epsilon values");
  for (double e : epsilon)
    if (e == 0.0 || !std::isfinite(e)) throw InvalidInput("heisenberg: epsilon must be finite and nonzero");

  HeisenbergReport rep;
  rep.epsilon = epsilon;
  for (double e : epsilon) {
    int s = 1;
    Eigen::Vector3d prev = integrate(u1, u2, dt, e, s);
    for (;;) {
      const Eigen::Vector3d next = integrate(u1, u2, dt, e, 2 * s);
      s *= 2;
      const double change = (next - prev).cwiseAbs().maxCoeff();
      prev = next;
      if (change < 1e-9 * std::max(1.0, next.cwiseAbs().maxCoeff()) || s >= (1 << 12)) break;
    }
    rep.substeps = std::max(rep.substeps, s);
    rep.final_state.push_back(prev);
    rep.ratios.emplace_back(prev.x() / e, prev.y() / e, prev.z() / (e * e));
  }
  const Eigen::Vector3d& ref = rep.ratios.front();
  for (const auto& r : rep.ratios)
    for (int i = 0; i < 3; ++i)
      rep.max_relative_spread =
          std::max(rep.max_relative_spread, std::abs(r(i) - ref(i)) / std::max(std::abs(ref(i)), 1e-12));
  rep.holds = rep.max_relative_spread <= rel_tol;
  return rep;
}

double ratio_law_floor(const std::vector<double>& epsilon, int power, double target) {
  if (epsilon.empty()) throw InvalidInput("ratio_law_floor: no epsilon values");
  Eigen::VectorXd col(static_cast<Eigen::Index>(epsilon.size()));
  for (std::size_t i = 0; i < epsilon.size(); ++i) col(static_cast<Eigen::Index>(i)) = std::pow(epsilon[i], power);
  const Eigen::VectorXd t = Eigen::VectorXd::Constant(col.size(), target);
  const double k = col.dot(t) / col.squaredNorm();
  return (col * k - t).norm();
}

}  // namespace ensctl::linear
