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

// Matrix Lie brackets with dispersion-monomial bookkeeping, closure of a set
// of generators, nilpotency of the generated algebra, and least-squares
// approximability of a target function by the reachable coefficient family.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ensctl/conventions.hpp"

namespace ensctl::liealg {

struct GeneratorMatrix {
  std::string label;
  Eigen::MatrixXcd entries;

  int dim() const { return static_cast<int>(entries.rows()); }
};

// [a, b] = ab - ba. Throws InvalidInput on dimension mismatch.
GeneratorMatrix bracket(const GeneratorMatrix& a, const GeneratorMatrix& b);
Eigen::MatrixXcd commutator(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

bool is_skew_hermitian(const Eigen::MatrixXcd& m, double rel_tol = 1e-12);

// Real inner product Re tr(a^dagger b); treats i*A as independent of A.
double trace_inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// Parameter name -> exponent. Canonical maps never store a zero exponent.
using Exponents = std::map<std::string, int>;

Exponents multiply(const Exponents& a, const Exponents& b);
std::string to_string(const Exponents& e);
double evaluate(const Exponents& e, const std::map<std::string, double>& values);

struct DispersionMonomial {
  Exponents exponents;
  Eigen::MatrixXcd coeff;
};

// Sum of monomial * matrix terms, kept merged by exponent map.
class DispersionPolyElement {
 public:
  explicit DispersionPolyElement(int dim = 0) : dim_(dim) {}

  static DispersionPolyElement monomial(Exponents exponents, Eigen::MatrixXcd coeff);

  void add(const Exponents& exponents, const Eigen::MatrixXcd& coeff);

  int dim() const { return dim_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<Exponents, Eigen::MatrixXcd>& terms() const { return terms_; }
  std::vector<DispersionMonomial> monomials() const;

  // Coefficient matrix of one monomial, zero if absent.
  Eigen::MatrixXcd coefficient(const Exponents& exponents) const;
  Eigen::MatrixXcd evaluate(const std::map<std::string, double>& values) const;

  DispersionPolyElement operator+(const DispersionPolyElement& o) const;
  DispersionPolyElement operator-(const DispersionPolyElement& o) const;
  DispersionPolyElement operator*(double s) const;

  // Drops terms whose coefficient norm is at most rel_tol times the largest.
  void prune(double rel_tol);

 private:
  int dim_;
  std::map<Exponents, Eigen::MatrixXcd> terms_;
};

DispersionPolyElement bracket_poly(const DispersionPolyElement& a, const DispersionPolyElement& b);

// ad_x^k (y).
DispersionPolyElement ad_power(const DispersionPolyElement& x, const DispersionPolyElement& y, int k);

enum class NilpotencyKind { nilpotent, not_nilpotent, undecided_at_bound };

struct Nilpotency {
  NilpotencyKind kind = NilpotencyKind::undecided_at_bound;
  int step = 0;  // meaningful for nilpotent: number of nonzero series terms
};

std::string to_string(const Nilpotency& n);

enum class ClosureMode { symbolic, sampled };

struct ClosureReport {
  ClosureMode mode = ClosureMode::symbolic;
  // Orthonormal under trace_inner.
  std::vector<Eigen::MatrixXcd> basis;
  // Symbolic mode: monomials reaching each basis direction.
  std::vector<std::set<Exponents>> monomials;
  // Sampled mode: orthonormal columns spanning the coordinate functions of
  // each basis direction over the sample points.
  std::vector<Eigen::MatrixXd> sampled;
  int depth_reached = 0;
  // True when the bracket of any two basis directions stays in their span.
  bool closed = false;
  // Dimension of the full matrix Lie algebra generated (closure without a
  // depth bound; finite because it is bounded by the matrix dimension).
  int algebra_dim = 0;
  // Dimensions of the lower central series L1, L2, ... as far as computed.
  std::vector<int> series_dims;
  Nilpotency nilpotency;
};

// Closure span tolerance: a new direction is accepted when its orthogonal
// residual exceeds this times its norm.
inline constexpr double kSpanTol = 1e-10;
inline constexpr int kDefaultMaxDepth = 8;

ClosureReport lie_closure(const std::vector<DispersionPolyElement>& gens, int max_depth = kDefaultMaxDepth);

// A generator sampled over a parameter grid: values[s] is its matrix at
// sample point s. All generators must share the sample count.
struct SampledElement {
  std::vector<Eigen::MatrixXcd> values;
};

ClosureReport lie_closure_sampled(const std::vector<SampledElement>& gens, int max_depth = kDefaultMaxDepth);

// Nilpotency of the matrix Lie algebra generated by `gens`, decided from the
// lower central series with at most `max_terms` terms.
Nilpotency matrix_nilpotency(const std::vector<Eigen::MatrixXcd>& gens, int max_terms, std::vector<int>* series_dims = nullptr,
                             int* algebra_dim = nullptr);

struct FunctionFamily {
  ClosureMode mode = ClosureMode::symbolic;
  std::vector<Exponents> monomials;
  Eigen::MatrixXd samples;  // sampled mode: one column per member
};

// Coefficient functions attached to `direction` in the closure. Throws
// InvalidInput when the direction is outside the span of report.basis.
FunctionFamily reachable_functions(const ClosureReport& report, const Eigen::MatrixXcd& direction);

// Evaluate monomials at sample points; one column per monomial.
Eigen::MatrixXd monomial_columns(const std::vector<Exponents>& family,
                                 const std::vector<std::map<std::string, double>>& points);
Eigen::MatrixXd monomial_columns(const std::vector<Exponents>& family, const std::string& parameter,
                                 const std::vector<double>& values);

struct FitResult {
  Eigen::VectorXd coefficients;
  double l2_residual = 0.0;   // sqrt(mean residual^2) over the grid
  double max_residual = 0.0;  // sup over the grid
  int rank = 0;
  bool achievable = false;    // max_residual <= tol
};

// Least-squares fit of target by the columns of family. Throws InvalidInput
// for an empty grid/family or a rank-zero family.
FitResult approximable(const Eigen::VectorXd& target, const Eigen::MatrixXd& family, double tol);

}  // namespace ensctl::liealg
