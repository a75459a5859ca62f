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

// Sign and basis conventions shared by every module.
//
// Single spin, SU(2): over a step with constant controls the propagator is
//   exp(-(i/2) dt [[omega, eps(u - i v)], [eps(u + i v), -omega]])
//     = exp(-(i/2) dt (omega sz + eps u sx + eps v sy)),
// a rotation about the Pauli-frame vector (eps u, eps v, omega).
//
// Single spin, SO(3): Bloch vectors live in the frame whose generator is
//   omega Wz + eps u Wy - eps v Wx
// with Wx, Wy, Wz the so(3) rotation generators below. The two frames are
// related by a fixed quarter turn about z (bloch = Rz(pi/2) pauli), which
// makes the SU(2) -> SO(3) map a homomorphism; with v = 0 the Bloch generator
// is identical to the textbook rotating-frame Bloch equations.
//
// Hard-pulse step: phase theta = atan2(v, u), flip phi = eps * A * dt with
// A = hypot(u, v); u = A cos(theta), v = A sin(theta).

#include <complex>

#include <Eigen/Dense>

namespace ensctl {

using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

namespace so3 {
Eigen::Matrix3d Wx();
Eigen::Matrix3d Wy();
Eigen::Matrix3d Wz();
// exp(angle * (n . W)) for a unit axis n (Rodrigues).
Eigen::Matrix3d rotation(const Eigen::Vector3d& axis, double angle);
// exp(G) for G = omega Wz + a Wy - b Wx scaled by dt, i.e. rotation vector.
Eigen::Matrix3d exp_of_rotation_vector(const Eigen::Vector3d& r);
}  // namespace so3

namespace pauli {
Eigen::Matrix2cd I2();
Eigen::Matrix2cd X();
Eigen::Matrix2cd Y();
Eigen::Matrix2cd Z();
// Two-qubit operator a (x) b, qubit 1 is the left factor.
Eigen::Matrix4cd kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b);
// exp(-i angle/2 sigma_axis), axis in {'x','y','z'}.
Eigen::Matrix2cd rotation(char axis, double angle);
}  // namespace pauli

// Maps a Pauli-frame rotation vector to the Bloch frame (quarter turn about z).
inline Eigen::Vector3d pauli_to_bloch(const Eigen::Vector3d& p) { return {-p.y(), p.x(), p.z()}; }
inline Eigen::Vector3d bloch_to_pauli(const Eigen::Vector3d& b) { return {b.y(), -b.x(), b.z()}; }

}  // namespace ensctl
