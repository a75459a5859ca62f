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

#include "ensctl/polyfield.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ensctl/errors.hpp"

namespace ensctl::liealg {

Polynomial Polynomial::constant(int nvars, double c) {
  Polynomial p(nvars);
  p.add_term(std::vector<int>(static_cast<std::size_t>(nvars), 0), c);
  return p;
}

Polynomial Polynomial::variable(int nvars, int index, double c) {
  std::vector<int> e(static_cast<std::size_t>(nvars), 0);
  e.at(static_cast<std::size_t>(index)) = 1;
  Polynomial p(nvars);
  p.add_term(e, c);
  return p;
}

void Polynomial::add_term(const std::vector<int>& exponents, double c) {
  if (static_cast<int>(exponents.size()) != nvars_) throw InvalidInput("polynomial: exponent arity mismatch");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(exponents, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

Polynomial Polynomial::derivative(int index) const {
  Polynomial out(nvars_);
  for (const auto& [e, c] : terms_) {
    const int p = e[static_cast<std::size_t>(index)];
    if (p == 0) continue;
    auto d = e;
    d[static_cast<std::size_t>(index)] -= 1;
    out.add_term(d, c * p);
  }
  return out;
}

double Polynomial::evaluate(const Eigen::VectorXd& x) const {
  double s = 0.0;
  for (const auto& [e, c] : terms_) {
    double t = c;
    for (int i = 0; i < nvars_; ++i) t *= std::pow(x(i), e[static_cast<std::size_t>(i)]);
    s += t;
  }
  return s;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  if (o.nvars_ != nvars_) throw InvalidInput("polynomial: arity mismatch");
  Polynomial out = *this;
  for (const auto& [e, c] : o.terms_) out.add_term(e, c);
  return out;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (o.nvars_ != nvars_) throw InvalidInput("polynomial: arity mismatch");
  Polynomial out(nvars_);
  for (const auto& [ea, ca] : terms_)
    for (const auto& [eb, cb] : o.terms_) {
      auto e = ea;
      for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
      out.add_term(e, ca * cb);
    }
  return out;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial out(nvars_);
  for (const auto& [e, c] : terms_) out.add_term(e, c * s);
  return out;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << c;
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i] > 0) os << "*x" << (i + 1) << (e[i] > 1 ? "^" + std::to_string(e[i]) : "");
  }
  return os.str();
}

PolyVectorField PolyVectorField::zero(int nvars) {
  return {nvars, std::vector<Polynomial>(static_cast<std::size_t>(nvars), Polynomial(nvars))};
}

Eigen::VectorXd PolyVectorField::evaluate(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(nvars);
  for (int i = 0; i < nvars; ++i) out(i) = components[static_cast<std::size_t>(i)].evaluate(x);
  return out;
}

bool PolyVectorField::is_zero() const {
  for (const auto& c : components)
    if (!c.is_zero()) return false;
  return true;
}

PolyVectorField vf_bracket(const PolyVectorField& f, const PolyVectorField& g) {
  if (f.nvars != g.nvars || static_cast<int>(f.components.size()) != f.nvars ||
      static_cast<int>(g.components.size()) != g.nvars)
    throw InvalidInput("vf_bracket: nvars mismatch");
  const int n = f.nvars;
  auto out = PolyVectorField::zero(n);
  for (int i = 0; i < n; ++i) {
    Polynomial acc(n);
    for (int j = 0; j < n; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      acc = acc + g.components[static_cast<std::size_t>(i)].derivative(j) * f.components[jj];
      acc = acc - f.components[static_cast<std::size_t>(i)].derivative(j) * g.components[jj];
    }
    out.components[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

namespace {

using Coords = std::map<std::pair<int, std::vector<int>>, double>;

Coords coords_of(const PolyVectorField& f) {
  Coords c;
  for (std::size_t i = 0; i < f.components.size(); ++i)
    for (const auto& [e, v] : f.components[i].terms()) c[{static_cast<int>(i), e}] = v;
  return c;
}

// Orthonormal basis of span(fields) in monomial coordinates.
std::vector<Coords> span_basis(const std::vector<PolyVectorField>& fields) {
  std::vector<Coords> basis;
  for (const auto& f : fields) {
    Coords v = coords_of(f);
    double n0 = 0.0;
    for (const auto& [k, x] : v) n0 += x * x;
    n0 = std::sqrt(n0);
    if (n0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        double dot = 0.0;
        for (const auto& [k, x] : b) {
          auto it = v.find(k);
          if (it != v.end()) dot += x * it->second;
        }
        for (const auto& [k, x] : b) v[k] -= dot * x;
      }
    double n = 0.0;
    for (const auto& [k, x] : v) n += x * x;
    n = std::sqrt(n);
    if (n <= kSpanTol * n0) continue;
    for (auto& [k, x] : v) x /= n;
    basis.push_back(std::move(v));
  }
  return basis;
}


// Fields of `fields` that raise the rank of their predecessors.
std::vector<PolyVectorField> independent(const std::vector<PolyVectorField>& fields) {
  std::vector<PolyVectorField> out;
  std::size_t rank = 0;
  for (const auto& f : fields) {
    out.push_back(f);
    const std::size_t r = span_basis(out).size();
    if (r == rank) out.pop_back();
    rank = r;
  }
  return out;
}

// Lower central series of the finite-dimensional algebra spanned by `basis`
// (closed under brackets).
Nilpotency central_series(const std::vector<PolyVectorField>& basis, int max_terms) {
  std::vector<PolyVectorField> current = basis;
  for (int k = 1; k <= max_terms; ++k) {
    std::vector<PolyVectorField> next;
    for (const auto& x : basis)
      for (const auto& y : current) {
        PolyVectorField b = vf_bracket(x, y);
        if (!b.is_zero()) next.push_back(std::move(b));
      }
    next = independent(next);
    if (next.empty()) return {NilpotencyKind::nilpotent, k};
    if (next.size() == current.size()) return {NilpotencyKind::not_nilpotent, 0};
    current = std::move(next);
  }
  return {};
}

}  // namespace

Nilpotency vf_nilpotency(const std::vector<PolyVectorField>& gens, int max_terms, std::vector<int>* series_dims) {
  if (gens.empty()) throw InvalidInput("vf_nilpotency: no generators");
  if (max_terms < 1) throw InvalidInput("vf_nilpotency: max_terms must be positive");
  std::vector<int> dims;
  std::vector<PolyVectorField> level = gens;
  std::vector<PolyVectorField> algebra = independent(gens);
  Nilpotency out;
  for (int k = 1; k <= max_terms + 1; ++k) {
    const int d = static_cast<int>(span_basis(level).size());
    if (d == 0) {
      dims.push_back(0);
      out = {NilpotencyKind::nilpotent, k - 1};
      break;
    }
    dims.push_back(d);
    if (k == max_terms + 1) break;
    std::vector<PolyVectorField> next;
    for (const auto& g : gens)
      for (const auto& w : level) {
        PolyVectorField b = vf_bracket(g, w);
        if (!b.is_zero()) next.push_back(std::move(b));
      }
    // Once the brackets stop adding directions the generated algebra is
    // finite dimensional, and its lower central series decides the question.
    std::vector<PolyVectorField> grown = algebra;
    grown.insert(grown.end(), next.begin(), next.end());
    grown = independent(grown);
    if (!next.empty() && grown.size() == algebra.size()) {
      out = central_series(algebra, max_terms);
      if (out.kind != NilpotencyKind::undecided_at_bound) break;
    }
    algebra = std::move(grown);
    level = std::move(next);
  }
  if (series_dims) *series_dims = dims;
  return out;
}

PolyVectorField heisenberg_g1() {
  auto f = PolyVectorField::zero(3);
  f.components[0] = Polynomial::constant(3, 1.0);
  f.components[2] = Polynomial::variable(3, 1, -1.0);
  return f;
}

PolyVectorField heisenberg_g2() {
  auto f = PolyVectorField::zero(3);
  f.components[1] = Polynomial::constant(3, 1.0);
  f.components[2] = Polynomial::variable(3, 0, 1.0);
  return f;
}

}  // namespace ensctl::liealg
