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

#include "ensctl/slr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/FFT>

#include "ensctl/errors.hpp"

namespace ensctl::slr {

namespace {

// sum_k c_k w^k by Horner.
cplx horner(const std::vector<cplx>& c, cplx w) {
  cplx acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * w + *it;
  return acc;
}

cplx circle_point(int j, int count) { return std::polar(1.0, 2.0 * kPi * j / count); }

double unimodularity(const std::vector<cplx>& p, const std::vector<cplx>& q, int samples) {
  double worst = 0.0;
  for (int j = 0; j < samples; ++j) {
    const cplx w = circle_point(j, samples);
    worst = std::max(worst, std::abs(std::norm(horner(p, w)) + std::norm(horner(q, w)) - 1.0));
  }
  return worst;
}

// Max of |sum c_k w^k| on the circle: dense sampling, then golden-section
// refinement around every sampled local maximum.
double max_modulus(const std::vector<cplx>& c, int samples) {
  auto mod = [&](double t) { return std::abs(horner(c, std::polar(1.0, t))); };
  std::vector<double> v(static_cast<std::size_t>(samples));
  for (int j = 0; j < samples; ++j) v[static_cast<std::size_t>(j)] = std::abs(horner(c, circle_point(j, samples)));
  const double h = 2.0 * kPi / samples;
  double m = *std::max_element(v.begin(), v.end());
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int j = 0; j < samples; ++j) {
    const double here = v[static_cast<std::size_t>(j)];
    if (here < v[static_cast<std::size_t>((j + samples - 1) % samples)] ||
        here < v[static_cast<std::size_t>((j + 1) % samples)] || here < 0.5 * m)
      continue;
    double a = (j - 1) * h, b = (j + 1) * h;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = mod(x1), f2 = mod(x2);
    for (int it = 0; it < 60; ++it) {
      if (f1 > f2) {
        b = x2; x2 = x1; f2 = f1; x1 = b - gr * (b - a); f1 = mod(x1);
      } else {
        a = x1; x1 = x2; f1 = f2; x2 = a + gr * (b - a); f2 = mod(x2);
      }
    }
    m = std::max({m, f1, f2});
  }
  return m;
}

void polish(const std::vector<cplx>& a, cplx& root) {
  for (int it = 0; it < 8; ++it) {
    cplx f = 0.0, df = 0.0;
    for (auto c = a.rbegin(); c != a.rend(); ++c) {
      df = df * root + f;
      f = f * root + *c;
    }
    if (df == 0.0) return;
    const cplx step = f / df;
    root -= step;
    if (std::abs(step) <= 1e-16 * std::abs(root)) return;
  }
}

std::vector<cplx> roots_of(const std::vector<cplx>& a) {
  const int deg = static_cast<int>(a.size()) - 1;
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
  for (int j = 0; j < deg; ++j) comp(0, j) = -a[static_cast<std::size_t>(deg - 1 - j)] / a.back();
  for (int j = 1; j < deg; ++j) comp(j, j - 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  if (es.info() != Eigen::Success) throw NumericalFailure("complete_polynomial: root finding did not converge");
  std::vector<cplx> r(es.eigenvalues().data(), es.eigenvalues().data() + deg);
  for (auto& x : r) polish(a, x);
  return r;
}

// Minimum-phase factor of d = 1 - |Q|^2 through the folded cepstrum of
// log(d)/2 on an N-point circle. Returns the first n coefficients.
std::vector<cplx> cepstral_factor(const std::vector<cplx>& q, int n, int N) {
  Eigen::FFT<double> fft;
  std::vector<cplx> buf(static_cast<std::size_t>(N), 0.0), spec;
  std::copy(q.begin(), q.end(), buf.begin());
  fft.inv(spec, buf);  // spec_j = (1/N) sum_k q_k w_j^k
  std::vector<cplx> logd(static_cast<std::size_t>(N));
  for (std::size_t j = 0; j < logd.size(); ++j) {
    const double dv = 1.0 - std::norm(spec[j] * static_cast<double>(N));
    if (!(dv > 0.0)) throw NumericalFailure("complete_polynomial: 1 - |Q|^2 is not positive on the circle");
    logd[j] = 0.5 * std::log(dv);
  }
  std::vector<cplx> cep;
  fft.fwd(cep, logd);
  for (auto& c : cep) c /= static_cast<double>(N);
  for (int k = 1; k < N / 2; ++k) {
    cep[static_cast<std::size_t>(k)] *= 2.0;
    cep[static_cast<std::size_t>(N - k)] = 0.0;
  }
  std::vector<cplx> logp;
  fft.inv(logp, cep);
  for (auto& v : logp) v = std::exp(v * static_cast<double>(N));
  std::vector<cplx> p;
  fft.fwd(p, logp);
  p.resize(static_cast<std::size_t>(n));
  for (auto& c : p) c /= static_cast<double>(N);
  p[0] = std::abs(p[0]);
  return p;
}

void check_profile_band(const TargetProfile& profile, double dt) {
  for (double w : profile.omega)
    if (std::abs(w) * dt > kPi + 1e-12) throw InvalidInput("target_to_polys: band aliases (|omega| dt > pi)");
}

}  // namespace

double HardPulseStep::C() const { return std::cos(phi / 2); }

cplx HardPulseStep::S() const { return -kI * std::polar(1.0, theta) * std::sin(phi / 2); }

sim::ControlSample HardPulseStep::control(double dt) const {
  const double a = phi / dt;
  return {a * std::cos(theta), a * std::sin(theta)};
}

HardPulseStep HardPulseStep::from_control(const sim::ControlSample& c, double dt) {
  return {std::hypot(c.u, c.v) * dt, std::atan2(c.v, c.u)};
}

cplx SpinorPolynomials::P(cplx z) const { return horner(p, 1.0 / z); }
cplx SpinorPolynomials::Q(cplx z) const { return horner(q, 1.0 / z); }

double SpinorPolynomials::unimodularity_error(int samples) const { return unimodularity(p, q, samples); }

sim::SU2Element SpinorPolynomials::spinor(double omega, double dt) const {
  const cplx z = std::polar(1.0, -omega * dt);
  const cplx half = std::polar(1.0, -omega * dt * n() / 2.0);
  return {half * P(z), half * Q(z)};
}

std::vector<SpinorPolynomials> forward_trace(const std::vector<HardPulseStep>& steps) {
  if (steps.empty()) throw InvalidInput("forward_recursion: no steps");
  std::vector<SpinorPolynomials> trace;
  trace.reserve(steps.size());
  std::vector<cplx> P{1.0}, Q{0.0};
  for (const auto& s : steps) {
    if (!std::isfinite(s.phi) || !std::isfinite(s.theta)) throw InvalidInput("forward_recursion: non-finite step");
    const double c = s.C();
    const cplx sk = s.S();
    const std::size_t m = P.size();
    std::vector<cplx> nP(m + 1, 0.0), nQ(m + 1, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      nP[j] += c * P[j];
      nP[j + 1] -= std::conj(sk) * Q[j];
      nQ[j] += sk * P[j];
      nQ[j + 1] += c * Q[j];
    }
    if (trace.empty()) {
      // P_0 = 1, Q_0 = 0 have degree zero; the shifted terms vanish.
      nP.resize(1);
      nQ.resize(1);
    }
    P = std::move(nP);
    Q = std::move(nQ);
    trace.push_back({P, Q});
  }
  return trace;
}

SpinorPolynomials forward_recursion(const std::vector<HardPulseStep>& steps) { return forward_trace(steps).back(); }

InverseResult inverse_recursion(const SpinorPolynomials& poly, int check_samples) {
  const std::size_t n = poly.p.size();
  if (n == 0 || poly.q.size() != n) throw InvalidInput("inverse_recursion: malformed polynomials");
  if (poly.unimodularity_error(check_samples) > 1e-6)
    throw InvalidInput("inverse_recursion: polynomials are not unimodular on the unit circle");

  InverseResult out;
  std::vector<cplx> P = poly.p, Q = poly.q;
  for (std::size_t k = n; k >= 1; --k) {
    const cplx p0 = P[0], q0 = Q[0];
    if (std::abs(p0) < 1e-14 && std::abs(q0) > 1e-14)
      throw NumericalFailure("inverse_recursion: degenerate extraction at step " + std::to_string(k));
    HardPulseStep step;
    step.phi = 2.0 * std::atan2(std::abs(q0), std::abs(p0));
    step.theta = std::abs(q0) > 0.0 ? std::arg(kI * q0 / p0) : 0.0;
    const double c = step.C();
    const cplx s = step.S();

    std::vector<cplx> nP(k), t(k);
    for (std::size_t j = 0; j < k; ++j) {
      nP[j] = c * P[j] + std::conj(s) * Q[j];
      t[j] = -s * P[j] + c * Q[j];
    }
    out.low_residual.push_back(std::abs(t[0]));
    if (k == 1) {
      out.top_residual.push_back(std::abs(nP[0] - 1.0));
      out.unimodularity.push_back(std::abs(std::norm(nP[0]) - 1.0));
    } else {
      out.top_residual.push_back(std::abs(nP[k - 1]));
      nP.resize(k - 1);
      P = std::move(nP);
      Q.assign(t.begin() + 1, t.end());
      out.unimodularity.push_back(unimodularity(P, Q, check_samples));
    }
    out.steps.push_back(step);
  }
  std::reverse(out.steps.begin(), out.steps.end());
  return out;
}

Completion complete_polynomial(const std::vector<cplx>& q_in, double margin, std::uint64_t root_shuffle_seed) {
  const int n = static_cast<int>(q_in.size());
  if (n == 0) throw InvalidInput("complete_polynomial: empty q");
  if (!(margin >= 0.0 && margin < 1.0)) throw InvalidInput("complete_polynomial: margin must lie in [0, 1)");
  for (const auto& c : q_in)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw InvalidInput("complete_polynomial: non-finite q");

  Completion out;
  std::vector<cplx> q = q_in;
  const double qmax = max_modulus(q, std::max(64 * n, 256));
  if (margin == 0.0) {
    if (qmax > 1.0 + 1e-12) throw InvalidInput("complete_polynomial: |Q| exceeds 1 on the unit circle");
  } else if (qmax > 1.0 - margin) {
    out.q_scale = (1.0 - margin) / qmax;
    for (auto& c : q) c *= out.q_scale;
  }

  // D(w) = 1 - |Q(w)|^2 = sum_m d_m w^m on |w| = 1, with d_{-m} = conj(d_m).
  std::vector<cplx> d(static_cast<std::size_t>(n), 0.0);
  for (int m = 0; m < n; ++m) {
    cplx c = 0.0;
    for (int l = 0; l + m < n; ++l) c += q[static_cast<std::size_t>(l + m)] * std::conj(q[static_cast<std::size_t>(l)]);
    d[static_cast<std::size_t>(m)] = -c;
  }
  d[0] += 1.0;
  double dscale = 0.0;
  for (const auto& x : d) dscale = std::max(dscale, std::abs(x));
  int L = 0;
  for (int m = n - 1; m > 0; --m)
    if (std::abs(d[static_cast<std::size_t>(m)]) > 1e-15 * dscale) {
      L = m;
      break;
    }

  std::vector<cplx> shape{1.0};
  if (L > 0) {
    std::vector<cplx> a(static_cast<std::size_t>(2 * L + 1));
    for (int j = 0; j <= 2 * L; ++j) {
      const int m = j - L;
      a[static_cast<std::size_t>(j)] = m >= 0 ? d[static_cast<std::size_t>(m)] : std::conj(d[static_cast<std::size_t>(-m)]);
    }
    std::vector<cplx> r = roots_of(a);
    // Roots pair as (r, 1/conj(r)). The in-disk member is the better conditioned
    // one; its reflection is a root of P(w) outside |w| = 1, i.e. in the z disk.
    std::sort(r.begin(), r.end(), [](cplx x, cplx y) { return std::abs(x) < std::abs(y); });
    r.resize(static_cast<std::size_t>(L));
    std::sort(r.begin(), r.end(), [](cplx x, cplx y) {
      return std::arg(x) != std::arg(y) ? std::arg(x) < std::arg(y) : std::abs(x) < std::abs(y);
    });
    if (root_shuffle_seed != 0) {
      std::mt19937_64 rng(root_shuffle_seed);
      std::shuffle(r.begin(), r.end(), rng);
    }
    for (const auto& root : r) {
      std::vector<cplx> next(shape.size() + 1, 0.0);
      for (std::size_t j = 0; j < shape.size(); ++j) {
        next[j] += shape[j];
        next[j + 1] -= shape[j] * std::conj(root);
      }
      shape = std::move(next);
    }
  }

  const int samples = 16 * n;
  double num = 0.0, den = 0.0;
  for (int j = 0; j < samples; ++j) {
    const cplx w = circle_point(j, samples);
    const double g = std::norm(horner(shape, w));
    const double dv = 1.0 - std::norm(horner(q, w));
    num += dv * g;
    den += g * g;
  }
  const double p0 = std::sqrt(std::max(num / den, 0.0));
  std::vector<cplx> p(static_cast<std::size_t>(n), 0.0);
  for (std::size_t j = 0; j < shape.size(); ++j) p[j] = p0 * shape[j];

  out.poly = {std::move(p), q};
  out.residual = unimodularity(out.poly.p, out.poly.q, samples);
  // Rooting loses accuracy for long, noisy q; the cepstral route computes the
  // same minimum-phase factor without roots.
  for (int N = 4096; out.residual > 1e-8 && N <= (1 << 20); N *= 4) {
    std::vector<cplx> pc = cepstral_factor(q, n, std::max(N, 64 * n));
    const double res = unimodularity(pc, q, samples);
    if (res < out.residual) {
      out.poly.p = std::move(pc);
      out.residual = res;
    }
  }
  if (out.residual > 1e-8)
    throw NumericalFailure("complete_polynomial: spectral factorization residual " + std::to_string(out.residual));
  return out;
}

void TargetProfile::validate() const {
  const std::size_t m = omega.size();
  if (m == 0) throw InvalidInput("target profile: no samples");
  if (F_alpha.size() != m || F_beta.size() != m || (!weight.empty() && weight.size() != m))
    throw InvalidInput("target profile: column lengths differ");
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(omega[i])) throw InvalidInput("target profile: non-finite omega");
    if (std::abs(std::norm(F_alpha[i]) + std::norm(F_beta[i]) - 1.0) > 1e-10)
      throw InvalidInput("target profile: |F_alpha|^2 + |F_beta|^2 != 1");
    if (!weight.empty() && !(weight[i] >= 0.0)) throw InvalidInput("target profile: negative weight");
  }
}

TargetProfile TargetProfile::broadband(char axis, double angle, double band, int count) {
  if (axis != 'x' && axis != 'y') throw InvalidInput("broadband: axis must be x or y");
  if (!(band >= 0.0) || count < 1) throw InvalidInput("broadband: bad band or sample count");
  TargetProfile t;
  t.omega = sim::linspace(-band, band, count);
  const cplx beta = axis == 'x' ? cplx(0.0, -std::sin(angle / 2)) : cplx(std::sin(angle / 2), 0.0);
  t.F_alpha.assign(t.omega.size(), std::cos(angle / 2));
  t.F_beta.assign(t.omega.size(), beta);
  t.tag = RotationTag{axis, angle};
  return t;
}

TargetProfile TargetProfile::from_flips(const std::vector<double>& omega, const std::vector<double>& flips,
                                        const std::vector<double>& weight) {
  if (flips.size() != omega.size()) throw InvalidInput("target profile: flips and omega differ in length");
  TargetProfile t;
  t.omega = omega;
  t.weight = weight;
  for (double f : flips) {
    if (!(f >= 0.0 && f <= kPi)) throw InvalidInput("target profile: flip angle outside [0, pi]");
    t.F_alpha.emplace_back(std::cos(f / 2), 0.0);
    t.F_beta.emplace_back(0.0, -std::sin(f / 2));
  }
  return t;
}

PolyFit target_to_polys(const TargetProfile& profile, int n, double dt, double margin, double rcond) {
  profile.validate();
  if (n < 1) throw InvalidInput("target_to_polys: n must be positive");
  if (!(dt > 0.0)) throw InvalidInput("target_to_polys: dt must be positive");
  check_profile_band(profile, dt);

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < profile.size(); ++i)
    if (profile.weight.empty() || profile.weight[i] > 0.0) rows.push_back(i);
  if (rows.size() < 8 * static_cast<std::size_t>(n))
    throw InvalidInput("target_to_polys: need at least 8n weighted samples");

  for (std::size_t i : rows)
    if (std::abs(profile.F_beta[i]) > 1.0 + 1e-12) throw Infeasible("target_to_polys: |F_beta| exceeds 1");

  Eigen::MatrixXcd A(static_cast<Eigen::Index>(rows.size()), n);
  Eigen::VectorXcd b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t i = rows[r];
    const double sw = profile.weight.empty() ? 1.0 : std::sqrt(profile.weight[i]);
    const cplx w = std::polar(1.0, profile.omega[i] * dt);
    cplx wk = 1.0;
    for (int k = 0; k < n; ++k) {
      A(static_cast<Eigen::Index>(r), k) = sw * wk;
      wk *= w;
    }
    b(static_cast<Eigen::Index>(r)) = sw * profile.F_beta[i];
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(rcond);
  const Eigen::VectorXcd x = svd.solve(b);

  PolyFit fit;
  fit.completion = complete_polynomial(std::vector<cplx>(x.data(), x.data() + n), margin);
  const auto& poly = fit.completion.poly;
  for (std::size_t i : rows) {
    const cplx z = std::polar(1.0, -profile.omega[i] * dt);
    const sim::SU2Element got{poly.P(z), poly.Q(z)};
    const sim::SU2Element want{profile.F_alpha[i], profile.F_beta[i]};
    fit.beta_error = std::max(fit.beta_error, std::abs(got.beta - want.beta));
    fit.band_error = std::max(fit.band_error, sim::spinor_distance(got, want));
  }
  return fit;
}

namespace {

struct Block {
  std::vector<HardPulseStep> steps;
  SpinorPolynomials poly;
  double fit_error = 0.0;
  double residual = 0.0;
};

Block design_block(const TargetProfile& profile, int n, double dt) {
  const PolyFit fit = target_to_polys(profile, n, dt);
  const InverseResult inv = inverse_recursion(fit.completion.poly);
  Block b{inv.steps, fit.completion.poly, fit.band_error, 0.0};
  for (double r : inv.top_residual) b.residual = std::max(b.residual, r);
  for (double r : inv.low_residual) b.residual = std::max(b.residual, r);
  return b;
}

double max_flip(const Block& b) {
  double m = 0.0;
  for (const auto& s : b.steps) m = std::max(m, s.phi);
  return m;
}

}  // namespace

Design design_broadband(char axis, double angle, double band, int n, double dt, std::optional<double> a_max) {
  if (axis != 'x' && axis != 'y') throw InvalidInput("design_broadband: axis must be x or y");
  if (!(angle >= 0.0 && angle < 2.0 * kPi)) throw InvalidInput("design_broadband: angle must lie in [0, 2 pi)");
  if (n < 1 || !(dt > 0.0) || !(band >= 0.0)) throw InvalidInput("design_broadband: bad n, dt or band");
  if (band * dt > kPi) throw InvalidInput("design_broadband: band aliases (band dt > pi)");
  if (a_max && !(*a_max > 0.0)) throw InvalidInput("design_broadband: a_max must be positive");

  Design out;
  out.pulse.dt = dt;
  out.pulse.a_max = a_max;
  if (angle == 0.0) {
    out.pulse.samples.assign(static_cast<std::size_t>(n), {});
    out.blocks.push_back({std::vector<cplx>(static_cast<std::size_t>(n), 0.0), std::vector<cplx>(static_cast<std::size_t>(n), 0.0)});
    out.blocks.back().p[0] = 1.0;
    return out;
  }

  auto block_for = [&](int m) {
    // Angles past pi are the same spinor as the complementary rotation about -axis.
    TargetProfile t = TargetProfile::broadband(axis, angle / m, band, 8 * n + 1);
    if (angle / m > kPi)
      for (std::size_t i = 0; i < t.size(); ++i) {
        t.F_alpha[i] = -t.F_alpha[i];
        t.F_beta[i] = -t.F_beta[i];
      }
    return design_block(t, n, dt);
  };
  auto fits = [&](const Block& b) { return !a_max || max_flip(b) / dt <= *a_max; };

  int m = 1;
  Block block = block_for(1);
  if (!fits(block)) {
    constexpr int kMaxSplit = 1 << 16;
    int lo = 1, hi = 2;
    Block hi_block = block_for(hi);
    while (!fits(hi_block)) {
      lo = hi;
      if (hi == kMaxSplit) throw Infeasible("design_broadband: amplitude bound needs more than 65536 sub-angles");
      hi = std::min(2 * hi, kMaxSplit);
      hi_block = block_for(hi);
    }
    while (hi - lo > 1) {
      const int mid = lo + (hi - lo) / 2;
      Block b = block_for(mid);
      if (fits(b)) {
        hi = mid;
        hi_block = std::move(b);
      } else {
        lo = mid;
      }
    }
    m = hi;
    block = std::move(hi_block);
  }

  out.sub_angles = m;
  out.fit_error = block.fit_error;
  out.max_step_residual = block.residual;
  for (int j = 0; j < m; ++j) {
    for (const auto& s : block.steps) {
      sim::ControlSample c = s.control(dt);
      if (a_max) {
        // Guard the bound against roundoff in phi / dt.
        const double amp = std::hypot(c.u, c.v);
        if (amp > *a_max) {
          c.u *= *a_max / amp;
          c.v *= *a_max / amp;
        }
      }
      out.pulse.samples.push_back(c);
    }
    out.blocks.push_back(block.poly);
  }
  return out;
}

Design design_pattern(const TargetProfile& profile, int n, double dt) {
  profile.validate();
  if (n < 1 || !(dt > 0.0)) throw InvalidInput("design_pattern: bad n or dt");
  std::vector<std::size_t> order(profile.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return profile.omega[a] < profile.omega[b]; });
  const double min_width = 4.0 / (n * dt);
  std::optional<std::size_t> prev;
  for (std::size_t i : order) {
    if (!profile.weight.empty() && profile.weight[i] == 0.0) continue;
    if (prev) {
      const double f1 = flip_angle({profile.F_alpha[*prev], profile.F_beta[*prev]});
      const double f2 = flip_angle({profile.F_alpha[i], profile.F_beta[i]});
      if (std::abs(f2 - f1) > kPi / 4 && profile.omega[i] - profile.omega[*prev] < min_width)
        throw InvalidInput("design_pattern: transition region narrower than 4/(n dt)");
    }
    prev = i;
  }

  // Only |F_beta| shapes the flip profile. A linear phase centres Q on its
  // middle coefficient so that a causal polynomial can follow a symmetric band.
  TargetProfile centred = profile;
  for (std::size_t i = 0; i < centred.size(); ++i) {
    const cplx shift = std::polar(1.0, centred.omega[i] * dt * (n - 1) / 2.0);
    centred.F_alpha[i] *= shift;
    centred.F_beta[i] *= shift;
  }
  Block b = design_block(centred, n, dt);
  b.fit_error = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (!profile.weight.empty() && profile.weight[i] == 0.0) continue;
    const cplx z = std::polar(1.0, -profile.omega[i] * dt);
    const double want = flip_angle({profile.F_alpha[i], profile.F_beta[i]});
    b.fit_error = std::max(b.fit_error, std::abs(flip_angle({b.poly.P(z), b.poly.Q(z)}) - want));
  }
  Design out;
  out.pulse.dt = dt;
  for (const auto& s : b.steps) out.pulse.samples.push_back(s.control(dt));
  out.blocks.push_back(b.poly);
  out.fit_error = b.fit_error;
  out.max_step_residual = b.residual;
  return out;
}

double flip_angle(const sim::SU2Element& s) { return 2.0 * std::atan2(std::abs(s.beta), std::abs(s.alpha)); }

double splitting_error(double omega, double u, double v, double dt) {
  sim::GridPoint p;
  p.omega = omega;
  const sim::ControlSample c{u, v};
  return (sim::step_so3(p, c, dt, sim::PlantModel::exact) - sim::step_so3(p, c, dt, sim::PlantModel::hard_pulse)).norm();
}

}  // namespace ensctl::slr
