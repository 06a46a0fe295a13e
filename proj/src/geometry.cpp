//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "gearnetk/geometry.hpp"

#include <algorithm>

namespace gearnetk {

namespace {
double clamped_acos(double c) { return std::acos(std::clamp(c, -1.0, 1.0)); }
}  // namespace

double angle_at(const Vec3& i, const Vec3& j, const Vec3& k) {
  const Vec3 a = i - j;
  const Vec3 b = k - j;
  const double na = norm(a);
  const double nb = norm(b);
  if (na <= kDegenerateEps || nb <= kDegenerateEps)
    throw DegenerateGeometry("angle_at: leg shorter than epsilon");
  return clamped_acos(dot(a, b) / (na * nb));
}

double dihedral(const Vec3& i, const Vec3& j, const Vec3& k, const Vec3& t) {
  const Vec3 b1 = j - i;
  const Vec3 b2 = k - j;
  const Vec3 b3 = t - k;
  const Vec3 n1 = cross(b1, b2);
  const Vec3 n2 = cross(b2, b3);
  const double nn1 = norm(n1);
  const double nn2 = norm(n2);
  if (nn1 <= kDegenerateEps || nn2 <= kDegenerateEps)
    throw DegenerateGeometry("dihedral: collinear triple");
  return clamped_acos(dot(n1, n2) / (nn1 * nn2));
}

int angle_bin(double theta, const AngleBinning& binning) {
  constexpr double kPi = 3.14159265358979323846;
  if (!(theta >= 0.0 && theta <= kPi + 1e-12))
    throw OutOfDomain("angle_bin: theta outside [0, pi]");
  const double width = kPi / binning.num_bins;
  const int bin = static_cast<int>(theta / width);
  return std::min(bin, binning.num_bins - 1);
}

Se3 se3_from_quaternion(double w, double x, double y, double z, const Vec3& t) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  w /= n, x /= n, y /= n, z /= n;
  Se3 out;
  out.r[0][0] = 1 - 2 * (y * y + z * z);
  out.r[0][1] = 2 * (x * y - w * z);
  out.r[0][2] = 2 * (x * z + w * y);
  out.r[1][0] = 2 * (x * y + w * z);
  out.r[1][1] = 1 - 2 * (x * x + z * z);
  out.r[1][2] = 2 * (y * z - w * x);
  out.r[2][0] = 2 * (x * z - w * y);
  out.r[2][1] = 2 * (y * z + w * x);
  out.r[2][2] = 1 - 2 * (x * x + y * y);
  out.t = t;
  return out;
}

Se3 random_se3(Rng& rng) {
  // Rejection-sample a quaternion from the unit ball to keep the direction
  // uniform after normalization.
  double w, x, y, z, s;
  do {
    w = rng.uniform(-1.0, 1.0);
    x = rng.uniform(-1.0, 1.0);
    y = rng.uniform(-1.0, 1.0);
    z = rng.uniform(-1.0, 1.0);
    s = w * w + x * x + y * y + z * z;
  } while (s < 1e-8 || s > 1.0);
  const Vec3 t{rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0)};
  return se3_from_quaternion(w, x, y, z, t);
}

}  // namespace gearnetk
