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

#include "ensctl/liealg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ensctl/errors.hpp"

namespace ensctl::liealg {

namespace {

// Incremental Gram-Schmidt over matrices with the real trace inner product.
class MatrixSpan {
 public:
  // Returns true when m contributed a new direction.
  bool add(const Eigen::MatrixXcd& m) {
    const double n = m.norm();
    if (n == 0.0) return false;
    Eigen::MatrixXcd r = residual(m);
    const double rn = r.norm();
    if (rn <= kSpanTol * n) return false;
    basis_.push_back(r / rn);
    return true;
  }

  Eigen::MatrixXcd residual(const Eigen::MatrixXcd& m) const {
    Eigen::MatrixXcd r = m;
    // Two passes keep the basis orthogonal to working precision.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis_) r -= trace_inner(b, r) * b;
    return r;
  }

  bool contains(const Eigen::MatrixXcd& m) const {
    const double n = m.norm();
    return n == 0.0 || residual(m).norm() <= kSpanTol * n;
  }

  const std::vector<Eigen::MatrixXcd>& basis() const { return basis_; }
  std::size_t size() const { return basis_.size(); }

 private:
  std::vector<Eigen::MatrixXcd> basis_;
};

// Same idea over real vectors (sampled coordinate functions).
class VectorSpan {
 public:
  explicit VectorSpan(Eigen::Index n = 0) : cols_(n, 0) {}

  bool add(const Eigen::VectorXd& v) {
    const double n = v.norm();
    if (n == 0.0) return false;
    Eigen::VectorXd r = v;
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < cols_.cols(); ++j) r -= cols_.col(j).dot(r) * cols_.col(j);
    const double rn = r.norm();
    if (rn <= kSpanTol * n) return false;
    cols_.conservativeResize(v.size(), cols_.cols() + 1);
    cols_.col(cols_.cols() - 1) = r / rn;
    return true;
  }

  const Eigen::MatrixXd& columns() const { return cols_; }

 private:
  Eigen::MatrixXd cols_;
};

double element_inner(const DispersionPolyElement& a, const DispersionPolyElement& b) {
  double s = 0.0;
  for (const auto& [e, m] : a.terms()) {
    auto it = b.terms().find(e);
    if (it != b.terms().end()) s += trace_inner(m, it->second);
  }
  return s;
}

// Orthonormal basis of span(elements) in the space of polynomial elements.
std::vector<DispersionPolyElement> reduce(const std::vector<DispersionPolyElement>& elements) {
  std::vector<DispersionPolyElement> out;
  for (const auto& e : elements) {
    const double n = std::sqrt(element_inner(e, e));
    if (n == 0.0) continue;
    DispersionPolyElement r = e;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : out) r = r - b * element_inner(b, r);
    const double rn = std::sqrt(element_inner(r, r));
    if (rn <= kSpanTol * n) continue;
    r = r * (1.0 / rn);
    r.prune(1e-12);
    out.push_back(std::move(r));
  }
  return out;
}

using Sampled = std::vector<Eigen::MatrixXcd>;

double sampled_inner(const Sampled& a, const Sampled& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += trace_inner(a[i], b[i]);
  return s;
}

std::vector<Sampled> reduce(const std::vector<Sampled>& elements) {
  std::vector<Sampled> out;
  for (const auto& e : elements) {
    const double n = std::sqrt(sampled_inner(e, e));
    if (n == 0.0) continue;
    Sampled r = e;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : out) {
        const double c = sampled_inner(b, r);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= c * b[i];
      }
    const double rn = std::sqrt(sampled_inner(r, r));
    if (rn <= kSpanTol * n) continue;
    for (auto& m : r) m /= rn;
    out.push_back(std::move(r));
  }
  return out;
}

bool span_closed(const std::vector<Eigen::MatrixXcd>& basis) {
  MatrixSpan span;
  for (const auto& b : basis) span.add(b);
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = i + 1; j < basis.size(); ++j)
      if (!span.contains(commutator(basis[i], basis[j]))) return false;
  return true;
}

void check_depth(int max_depth) {
  if (max_depth < 1) throw InvalidInput("lie_closure: max_depth must be positive");
}

}  // namespace

Eigen::MatrixXcd commutator(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw InvalidInput("bracket: dimension mismatch");
  return a * b - b * a;
}

GeneratorMatrix bracket(const GeneratorMatrix& a, const GeneratorMatrix& b) {
  return {"[" + a.label + "," + b.label + "]", commutator(a.entries, b.entries)};
}

bool is_skew_hermitian(const Eigen::MatrixXcd& m, double rel_tol) {
  return (m + m.adjoint()).norm() <= rel_tol * std::max(m.norm(), 1e-300);
}

double trace_inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

Exponents multiply(const Exponents& a, const Exponents& b) {
  Exponents out = a;
  for (const auto& [name, p] : b) out[name] += p;
  std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
  return out;
}

std::string to_string(const Exponents& e) {
  if (e.empty()) return "1";
  std::ostringstream os;
  bool first = true;
  for (const auto& [name, p] : e) {
    if (!first) os << "*";
    first = false;
    os << name;
    if (p != 1) os << "^" << p;
  }
  return os.str();
}

double evaluate(const Exponents& e, const std::map<std::string, double>& values) {
  double v = 1.0;
  for (const auto& [name, p] : e) {
    auto it = values.find(name);
    if (it == values.end()) throw InvalidInput("missing value for dispersion parameter '" + name + "'");
    v *= std::pow(it->second, p);
  }
  return v;
}

DispersionPolyElement DispersionPolyElement::monomial(Exponents exponents, Eigen::MatrixXcd coeff) {
  DispersionPolyElement e(static_cast<int>(coeff.rows()));
  e.add(exponents, coeff);
  return e;
}

void DispersionPolyElement::add(const Exponents& exponents, const Eigen::MatrixXcd& coeff) {
  if (coeff.rows() != coeff.cols()) throw InvalidInput("dispersion element: coefficient must be square");
  if (dim_ == 0) dim_ = static_cast<int>(coeff.rows());
  if (coeff.rows() != dim_) throw InvalidInput("dispersion element: dimension mismatch");
  Exponents key = exponents;
  std::erase_if(key, [](const auto& kv) { return kv.second == 0; });
  for (const auto& [name, p] : key)
    if (p < 0) throw InvalidInput("dispersion element: negative exponent for '" + name + "'");
  auto it = terms_.find(key);
  if (it == terms_.end()) {
    if (coeff.norm() != 0.0) terms_.emplace(std::move(key), coeff);
    return;
  }
  it->second += coeff;
  if (it->second.norm() == 0.0) terms_.erase(it);
}

std::vector<DispersionMonomial> DispersionPolyElement::monomials() const {
  std::vector<DispersionMonomial> out;
  out.reserve(terms_.size());
  for (const auto& [e, m] : terms_) out.push_back({e, m});
  return out;
}

Eigen::MatrixXcd DispersionPolyElement::coefficient(const Exponents& exponents) const {
  auto it = terms_.find(exponents);
  if (it == terms_.end()) return Eigen::MatrixXcd::Zero(dim_, dim_);
  return it->second;
}

Eigen::MatrixXcd DispersionPolyElement::evaluate(const std::map<std::string, double>& values) const {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_, dim_);
  for (const auto& [e, m] : terms_) out += liealg::evaluate(e, values) * m;
  return out;
}

DispersionPolyElement DispersionPolyElement::operator+(const DispersionPolyElement& o) const {
  DispersionPolyElement out = *this;
  for (const auto& [e, m] : o.terms_) out.add(e, m);
  return out;
}

DispersionPolyElement DispersionPolyElement::operator-(const DispersionPolyElement& o) const {
  return *this + o * -1.0;
}

DispersionPolyElement DispersionPolyElement::operator*(double s) const {
  DispersionPolyElement out(dim_);
  if (s == 0.0) return out;
  for (const auto& [e, m] : terms_) out.terms_.emplace(e, s * m);
  return out;
}

void DispersionPolyElement::prune(double rel_tol) {
  double largest = 0.0;
  for (const auto& [e, m] : terms_) largest = std::max(largest, m.norm());
  std::erase_if(terms_, [&](const auto& kv) { return kv.second.norm() <= rel_tol * largest; });
}

DispersionPolyElement bracket_poly(const DispersionPolyElement& a, const DispersionPolyElement& b) {
  if (a.dim() != 0 && b.dim() != 0 && a.dim() != b.dim()) throw InvalidInput("bracket_poly: dimension mismatch");
  DispersionPolyElement out(std::max(a.dim(), b.dim()));
  double scale = 0.0;
  for (const auto& [ea, ma] : a.terms())
    for (const auto& [eb, mb] : b.terms()) {
      out.add(multiply(ea, eb), commutator(ma, mb));
      scale = std::max(scale, 2.0 * ma.norm() * mb.norm());
    }
  // Cancellation leaves roundoff-sized terms; anything below 1e-13 of the
  // largest possible product is zero.
  DispersionPolyElement pruned(out.dim());
  for (const auto& [e, m] : out.terms())
    if (m.norm() > 1e-13 * scale) pruned.add(e, m);
  return pruned;
}

DispersionPolyElement ad_power(const DispersionPolyElement& x, const DispersionPolyElement& y, int k) {
  if (k < 0) throw InvalidInput("ad_power: negative power");
  DispersionPolyElement out = y;
  for (int i = 0; i < k; ++i) out = bracket_poly(x, out);
  return out;
}

std::string to_string(const Nilpotency& n) {
  switch (n.kind) {
    case NilpotencyKind::nilpotent:
      return "nilpotent(step " + std::to_string(n.step) + ")";
    case NilpotencyKind::not_nilpotent:
      return "not_nilpotent";
    case NilpotencyKind::undecided_at_bound:
      break;
  }
  return "undecided_at_bound";
}

Nilpotency matrix_nilpotency(const std::vector<Eigen::MatrixXcd>& gens, int max_terms, std::vector<int>* series_dims,
                             int* algebra_dim) {
  // Full matrix algebra: close the span under brackets. Terminates because
  // each pass either adds a direction or stops, and the real dimension is
  // bounded by 2 n^2.
  MatrixSpan algebra;
  for (const auto& g : gens) algebra.add(g);
  for (bool grew = true; grew;) {
    grew = false;
    const auto snapshot = algebra.basis();
    for (std::size_t i = 0; i < snapshot.size(); ++i)
      for (std::size_t j = i + 1; j < snapshot.size(); ++j) grew |= algebra.add(commutator(snapshot[i], snapshot[j]));
  }
  if (algebra_dim) *algebra_dim = static_cast<int>(algebra.size());

  std::vector<int> dims{static_cast<int>(algebra.size())};
  Nilpotency verdict;
  std::vector<Eigen::MatrixXcd> current = algebra.basis();
  if (current.empty()) {
    verdict = {NilpotencyKind::nilpotent, 0};
  } else {
    for (int k = 1; k <= max_terms; ++k) {
      MatrixSpan next;
      for (const auto& x : algebra.basis())
        for (const auto& y : current) next.add(commutator(x, y));
      dims.push_back(static_cast<int>(next.size()));
      if (next.size() == 0) {
        verdict = {NilpotencyKind::nilpotent, k};
        break;
      }
      if (next.size() == current.size()) {
        verdict = {NilpotencyKind::not_nilpotent, 0};
        break;
      }
      current = next.basis();
    }
  }
  if (series_dims) *series_dims = dims;
  return verdict;
}

ClosureReport lie_closure(const std::vector<DispersionPolyElement>& gens, int max_depth) {
  if (gens.empty()) throw InvalidInput("lie_closure: empty generator list");
  check_depth(max_depth);
  const int dim = gens.front().dim();
  for (const auto& g : gens)
    if (g.dim() != dim) throw InvalidInput("lie_closure: generators differ in dimension");

  ClosureReport report;
  report.mode = ClosureMode::symbolic;
  MatrixSpan span;

  // Terms far below the element's largest term are roundoff from cancellation.
  auto record = [&](const DispersionPolyElement& e) {
    double top = 0.0;
    for (const auto& [ex, m] : e.terms()) top = std::max(top, m.norm());
    for (const auto& [ex, m] : e.terms())
      if (m.norm() > kSpanTol * top) span.add(m);
    report.monomials.resize(span.size());
    for (const auto& [ex, m] : e.terms()) {
      const double n = m.norm();
      if (n <= kSpanTol * top) continue;
      for (std::size_t d = 0; d < span.size(); ++d)
        if (std::abs(trace_inner(span.basis()[d], m)) > kSpanTol * n) report.monomials[d].insert(ex);
    }
  };

  std::vector<DispersionPolyElement> level = reduce(gens);
  for (const auto& e : level) record(e);
  report.depth_reached = 1;
  for (int depth = 2; depth <= max_depth && !level.empty(); ++depth) {
    std::vector<DispersionPolyElement> next;
    for (const auto& g : gens)
      for (const auto& w : level) {
        auto b = bracket_poly(g, w);
        // A bracket at roundoff level relative to its operands vanishes.
        const double scale = std::sqrt(element_inner(g, g) * element_inner(w, w));
        if (std::sqrt(element_inner(b, b)) > kSpanTol * scale) next.push_back(std::move(b));
      }
    level = reduce(next);
    if (level.empty()) break;
    for (const auto& e : level) record(e);
    report.depth_reached = depth;
  }

  report.basis = span.basis();
  report.monomials.resize(report.basis.size());
  report.closed = span_closed(report.basis);

  std::vector<Eigen::MatrixXcd> mats;
  for (const auto& g : gens)
    for (const auto& [e, m] : g.terms()) mats.push_back(m);
  report.nilpotency = matrix_nilpotency(mats, max_depth, &report.series_dims, &report.algebra_dim);
  return report;
}

ClosureReport lie_closure_sampled(const std::vector<SampledElement>& gens, int max_depth) {
  if (gens.empty()) throw InvalidInput("lie_closure: empty generator list");
  check_depth(max_depth);
  const std::size_t samples = gens.front().values.size();
  if (samples == 0) throw InvalidInput("lie_closure: generators carry no samples");
  const auto dim = gens.front().values.front().rows();
  for (const auto& g : gens) {
    if (g.values.size() != samples) throw InvalidInput("lie_closure: generators differ in sample count");
    for (const auto& m : g.values)
      if (m.rows() != dim || m.cols() != dim) throw InvalidInput("lie_closure: generators differ in dimension");
  }

  ClosureReport report;
  report.mode = ClosureMode::sampled;
  MatrixSpan span;
  std::vector<VectorSpan> functions;

  auto record_level = [&](const std::vector<Sampled>& level) {
    for (const auto& e : level) {
      double top = 0.0;
      for (const auto& m : e) top = std::max(top, m.norm());
      for (const auto& m : e)
        if (m.norm() > kSpanTol * top) span.add(m);
    }
    functions.resize(span.size(), VectorSpan(static_cast<Eigen::Index>(samples)));
    for (const auto& e : level) {
      const double en = std::sqrt(sampled_inner(e, e));
      for (std::size_t d = 0; d < span.size(); ++d) {
        Eigen::VectorXd f(static_cast<Eigen::Index>(samples));
        for (std::size_t s = 0; s < samples; ++s) f(static_cast<Eigen::Index>(s)) = trace_inner(span.basis()[d], e[s]);
        if (f.norm() > kSpanTol * en) functions[d].add(f);
      }
    }
  };

  std::vector<Sampled> initial;
  for (const auto& g : gens) initial.push_back(g.values);
  std::vector<Sampled> level = reduce(initial);
  record_level(level);
  report.depth_reached = 1;
  for (int depth = 2; depth <= max_depth && !level.empty(); ++depth) {
    std::vector<Sampled> next;
    for (const auto& g : gens)
      for (const auto& w : level) {
        Sampled b(samples);
        double g_top = 0.0;
        for (std::size_t s = 0; s < samples; ++s) {
          b[s] = commutator(g.values[s], w[s]);
          g_top = std::max(g_top, g.values[s].norm());
        }
        // A bracket at roundoff level relative to its operands vanishes.
        if (std::sqrt(sampled_inner(b, b)) > kSpanTol * g_top * std::sqrt(sampled_inner(w, w)))
          next.push_back(std::move(b));
      }
    level = reduce(next);
    if (level.empty()) break;
    record_level(level);
    report.depth_reached = depth;
  }

  report.basis = span.basis();
  for (const auto& f : functions) report.sampled.push_back(f.columns());
  report.monomials.resize(report.basis.size());
  report.closed = span_closed(report.basis);

  std::vector<Eigen::MatrixXcd> mats;
  for (const auto& g : gens) mats.insert(mats.end(), g.values.begin(), g.values.end());
  report.nilpotency = matrix_nilpotency(mats, max_depth, &report.series_dims, &report.algebra_dim);
  return report;
}

FunctionFamily reachable_functions(const ClosureReport& report, const Eigen::MatrixXcd& direction) {
  const double n = direction.norm();
  if (n == 0.0) throw InvalidInput("reachable_functions: zero direction");
  Eigen::MatrixXcd r = direction;
  std::vector<double> coeff(report.basis.size());
  for (std::size_t d = 0; d < report.basis.size(); ++d) {
    if (report.basis[d].rows() != direction.rows()) throw InvalidInput("reachable_functions: dimension mismatch");
    coeff[d] = trace_inner(report.basis[d], direction);
    r -= coeff[d] * report.basis[d];
  }
  if (r.norm() > kSpanTol * n) throw InvalidInput("reachable_functions: direction lies outside the closure span");

  FunctionFamily family;
  family.mode = report.mode;
  if (report.mode == ClosureMode::symbolic) {
    std::set<Exponents> merged;
    for (std::size_t d = 0; d < coeff.size(); ++d)
      if (std::abs(coeff[d]) > kSpanTol * n) merged.insert(report.monomials[d].begin(), report.monomials[d].end());
    // Order by total degree, then lexicographically, so families read 1, e, e^2, ...
    family.monomials.assign(merged.begin(), merged.end());
    std::stable_sort(family.monomials.begin(), family.monomials.end(), [](const Exponents& a, const Exponents& b) {
      int da = 0, db = 0;
      for (const auto& kv : a) da += kv.second;
      for (const auto& kv : b) db += kv.second;
      return da < db;
    });
  } else {
    VectorSpan merged;
    for (std::size_t d = 0; d < coeff.size(); ++d) {
      if (std::abs(coeff[d]) <= kSpanTol * n) continue;
      const auto& cols = report.sampled[d];
      if (merged.columns().rows() == 0) merged = VectorSpan(cols.rows());
      for (Eigen::Index j = 0; j < cols.cols(); ++j) merged.add(cols.col(j));
    }
    family.samples = merged.columns();
  }
  return family;
}

Eigen::MatrixXd monomial_columns(const std::vector<Exponents>& family,
                                 const std::vector<std::map<std::string, double>>& points) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(family.size()));
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = 0; j < family.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = evaluate(family[j], points[i]);
  return out;
}

Eigen::MatrixXd monomial_columns(const std::vector<Exponents>& family, const std::string& parameter,
                                 const std::vector<double>& values) {
  std::vector<std::map<std::string, double>> points;
  points.reserve(values.size());
  for (double v : values) points.push_back({{parameter, v}});
  return monomial_columns(family, points);
}

FitResult approximable(const Eigen::VectorXd& target, const Eigen::MatrixXd& family, double tol) {
  if (target.size() == 0) throw InvalidInput("approximable: empty grid");
  if (family.cols() == 0) throw InvalidInput("approximable: empty family");
  if (family.rows() != target.size()) throw InvalidInput("approximable: family and target sizes differ");
  if (!(tol > 0.0)) throw InvalidInput("approximable: tolerance must be positive");

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(family);
  FitResult fit;
  fit.rank = static_cast<int>(cod.rank());
  if (fit.rank == 0) throw InvalidInput("approximable: degenerate (rank-zero) family");
  fit.coefficients = cod.solve(target);
  const Eigen::VectorXd r = target - family * fit.coefficients;
  fit.l2_residual = std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
  fit.max_residual = r.cwiseAbs().maxCoeff();
  fit.achievable = fit.max_residual <= tol;
  return fit;
}

}  // namespace ensctl::liealg
