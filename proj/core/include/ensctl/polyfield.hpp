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

// Polynomial vector fields on R^n and their Lie bracket [f, g] = (Dg) f - (Df) g.

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ensctl/liealg.hpp"

namespace ensctl::liealg {

// Real multivariate polynomial in nvars state coordinates. Terms are keyed by
// exponent vectors; zero coefficients are never stored.
class Polynomial {
 public:
  explicit Polynomial(int nvars = 0) : nvars_(nvars) {}

  static Polynomial constant(int nvars, double c);
  static Polynomial variable(int nvars, int index, double c = 1.0);

  int nvars() const { return nvars_; }
  const std::map<std::vector<int>, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const std::vector<int>& exponents, double c);
  Polynomial derivative(int index) const;
  double evaluate(const Eigen::VectorXd& x) const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;
  bool operator==(const Polynomial& o) const = default;

  std::string to_string() const;

 private:
  int nvars_;
  std::map<std::vector<int>, double> terms_;
};

struct PolyVectorField {
  int nvars = 0;
  std::vector<Polynomial> components;

  static PolyVectorField zero(int nvars);
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const;
  bool is_zero() const;
  bool operator==(const PolyVectorField& o) const = default;
};

// Throws InvalidInput when nvars differ.
PolyVectorField vf_bracket(const PolyVectorField& f, const PolyVectorField& g);

// Nilpotency of the Lie algebra generated by polynomial fields, from the
// spans of right-normed brackets of length 1, 2, ..., max_terms. Nilpotent of
// step k when every bracket of length k + 1 vanishes. When the brackets stop
// adding directions the algebra is finite dimensional; not nilpotent when its
// lower central series becomes stationary and nonzero. series_dims holds the
// span dimensions of the bracket lengths examined.
Nilpotency vf_nilpotency(const std::vector<PolyVectorField>& gens, int max_terms,
                         std::vector<int>* series_dims = nullptr);

// Nonholonomic integrator fields g1 = (1, 0, -x2), g2 = (0, 1, x1).
PolyVectorField heisenberg_g1();
PolyVectorField heisenberg_g2();

}  // namespace ensctl::liealg
