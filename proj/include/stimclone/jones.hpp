#pragma once

// Jones calculus on the (v, h) polarization pair: 2x2 unitaries for
// waveplates and basis rotations plus a few canonical polarization states.
//
// Convention: left-circular is (1, i)/sqrt(2). With that choice a
// quarter-wave plate at 45 degrees maps left-circular light onto v.

#include <array>
#include <cmath>
#include <complex>

#include "stimclone/fock.hpp"

namespace stimclone {

using Jones = std::array<Complex, 2>;
using JonesMatrix = std::array<std::array<Complex, 2>, 2>;

inline constexpr Complex kI{0.0, 1.0};

inline Jones jones_v() { return {Complex{1, 0}, Complex{0, 0}}; }
inline Jones jones_h() { return {Complex{0, 0}, Complex{1, 0}}; }
inline Jones jones_diag() {
  const double s = 1.0 / std::sqrt(2.0);
  return {Complex{s, 0}, Complex{s, 0}};
}
inline Jones jones_antidiag() {
  const double s = 1.0 / std::sqrt(2.0);
  return {Complex{s, 0}, Complex{-s, 0}};
}
inline Jones jones_circ_left() {
  const double s = 1.0 / std::sqrt(2.0);
  return {Complex{s, 0}, Complex{0, s}};
}
inline Jones jones_circ_right() {
  const double s = 1.0 / std::sqrt(2.0);
  return {Complex{s, 0}, Complex{0, -s}};
}

inline double jones_norm(const Jones& j) {
  return std::sqrt(std::norm(j[0]) + std::norm(j[1]));
}

inline Jones jones_normalized(const Jones& j) {
  const double n = jones_norm(j);
  if (n <= 0.0) throw NumericalError("zero Jones vector");
  return {j[0] / n, j[1] / n};
}

// The unique (up to phase) state orthogonal to j.
inline Jones jones_orthogonal(const Jones& j) {
  return {-std::conj(j[1]), std::conj(j[0])};
}

inline Complex jones_dot(const Jones& bra, const Jones& ket) {
  return std::conj(bra[0]) * ket[0] + std::conj(bra[1]) * ket[1];
}

inline Jones jones_apply(const JonesMatrix& m, const Jones& j) {
  return {m[0][0] * j[0] + m[0][1] * j[1], m[1][0] * j[0] + m[1][1] * j[1]};
}

inline JonesMatrix matmul(const JonesMatrix& a, const JonesMatrix& b) {
  JonesMatrix out{};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    }
  }
  return out;
}

inline JonesMatrix dagger(const JonesMatrix& m) {
  return {{{std::conj(m[0][0]), std::conj(m[1][0])}, {std::conj(m[0][1]), std::conj(m[1][1])}}};
}

inline bool jones_is_unitary(const JonesMatrix& m, double tol) {
  const JonesMatrix p = matmul(dagger(m), m);
  return std::abs(p[0][0] - 1.0) <= tol && std::abs(p[1][1] - 1.0) <= tol &&
         std::abs(p[0][1]) <= tol && std::abs(p[1][0]) <= tol;
}

inline JonesMatrix jones_identity() {
  return {{{Complex{1, 0}, Complex{0, 0}}, {Complex{0, 0}, Complex{1, 0}}}};
}

// Rotation of the polarization plane by theta (real SO(2) on (v, h)).
inline JonesMatrix rotation_matrix(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {{{Complex{c, 0}, Complex{-s, 0}}, {Complex{s, 0}, Complex{c, 0}}}};
}

// Half-wave plate with fast axis at `theta`: at 0 it maps v -> v, h -> -h;
// at 22.5 degrees it rotates the v/h basis onto +-45.
inline JonesMatrix hwp_matrix(double theta) {
  const double c = std::cos(2.0 * theta), s = std::sin(2.0 * theta);
  return {{{Complex{c, 0}, Complex{s, 0}}, {Complex{s, 0}, Complex{-c, 0}}}};
}

// Quarter-wave plate with fast axis at `theta` (global phase dropped).
inline JonesMatrix qwp_matrix(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const Complex one_minus_i{1.0, -1.0};
  return {{{Complex{c * c, s * s}, one_minus_i * (s * c)},
           {one_minus_i * (s * c), Complex{s * s, c * c}}}};
}

// Unitary sending `target` to v and its orthogonal complement to h; used to
// count photons in the basis defined by an arbitrary polarization.
inline JonesMatrix basis_change_to_v(const Jones& target) {
  const Jones t = jones_normalized(target);
  const Jones o = jones_orthogonal(t);
  return {{{std::conj(t[0]), std::conj(t[1])}, {std::conj(o[0]), std::conj(o[1])}}};
}

}  // namespace stimclone
