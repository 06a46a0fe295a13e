//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cmath>

#include "gearnetk/error.hpp"
#include "gearnetk/rng.hpp"

namespace gearnetk {

// Legs shorter than this (in angstrom) make angles/dihedrals undefined.
inline constexpr double kDegenerateEps = 1e-8;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double c) const { return {c * x, c * y, c * z}; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

// Interior angle at vertex j between (i - j) and (k - j), in [0, pi].
// Throws DegenerateGeometry when either leg is shorter than kDegenerateEps.
double angle_at(const Vec3& i, const Vec3& j, const Vec3& k);

// Unsigned dihedral of the chain i-j-k-t: angle between the planes (i,j,k)
// and (j,k,t), in [0, pi]. Throws DegenerateGeometry on collinear triples.
double dihedral(const Vec3& i, const Vec3& j, const Vec3& k, const Vec3& t);

struct AngleBinning {
  int num_bins = 8;  // over the closed interval [0, pi]
};

// min(floor(theta / (pi/num_bins)), num_bins - 1). Throws OutOfDomain unless
// 0 <= theta <= pi + 1e-12.
int angle_bin(double theta, const AngleBinning& binning = {});

// Rigid transform; rotation is proper (det +1).
struct Se3 {
  double r[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  Vec3 t;

  Vec3 apply(const Vec3& p) const {
    return {r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z + t.x,
            r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z + t.y,
            r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z + t.z};
  }
};

// Uniform random rotation (normalized quaternion) plus a translation with
// components uniform in [-20, 20] angstrom.
Se3 random_se3(Rng& rng);

// Rotation from a unit quaternion (w, x, y, z); normalizes the input.
Se3 se3_from_quaternion(double w, double x, double y, double z, const Vec3& t = {});

}  // namespace gearnetk
