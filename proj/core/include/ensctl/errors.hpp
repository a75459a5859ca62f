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

#include <stdexcept>
#include <string>

namespace ensctl {

// Caller violated a precondition (shape mismatch, non-finite value, bad range).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The request is well formed but has no solution: an even target with an odd
// basis, an amplitude bound no subdivision can meet, and so on. This is an
// answer, not a bug, and the CLI maps it to its own exit code.
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical procedure could not reach its stated accuracy.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ensctl
