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

#include "ensctl/conventions.hpp"

#include <cmath>

namespace ensctl {
namespace so3 {

Eigen::Matrix3d Wx() {
  Eigen::Matrix3d m;
  m << 0, 0, 0,
       0, 0, -1,
       0, 1, 0;
  return m;
}

Eigen::Matrix3d Wy() {
  Eigen::Matrix3d m;
  m << 0, 0, 1,
       0, 0, 0,
       -1, 0, 0;
  return m;
}

Eigen::Matrix3d Wz() {
  Eigen::Matrix3d m;
  m << 0, -1, 0,
       1, 0, 0,
       0, 0, 0;
  return m;
}

Eigen::Matrix3d rotation(const Eigen::Vector3d& axis, double angle) {
  Eigen::Matrix3d k;
  k << 0, -axis.z(), axis.y(),
       axis.z(), 0, -axis.x(),
       -axis.y(), axis.x(), 0;
  return Eigen::Matrix3d::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

Eigen::Matrix3d exp_of_rotation_vector(const Eigen::Vector3d& r) {
  const double angle = r.norm();
  if (angle == 0.0) return Eigen::Matrix3d::Identity();
  return rotation(r / angle, angle);
}

}  // namespace so3

namespace pauli {

Eigen::Matrix2cd I2() { return Eigen::Matrix2cd::Identity(); }

Eigen::Matrix2cd X() {
  Eigen::Matrix2cd m;
  m << 0, 1,
       1, 0;
  return m;
}

Eigen::Matrix2cd Y() {
  Eigen::Matrix2cd m;
  m << 0, -kI,
       kI, 0;
  return m;
}

Eigen::Matrix2cd Z() {
  Eigen::Matrix2cd m;
  m << 1, 0,
       0, -1;
  return m;
}

Eigen::Matrix4cd kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::Matrix4cd out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

Eigen::Matrix2cd rotation(char axis, double angle) {
  const Eigen::Matrix2cd s = axis == 'x' ? X() : axis == 'y' ? Y() : Z();
  return std::cos(angle / 2) * I2() - kI * std::sin(angle / 2) * s;
}

}  // namespace pauli
}  // namespace ensctl
