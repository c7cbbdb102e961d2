#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

namespace frozencore {

/// Integer lattice vector in units of a0/4.
struct IntVec3 {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int32_t z = 0;

  auto operator<=>(const IntVec3 &) const = default;

  std::int64_t norm2() const {
    return std::int64_t{x} * x + std::int64_t{y} * y + std::int64_t{z} * z;
  }
  std::int64_t dot(const IntVec3 &o) const {
    return std::int64_t{x} * o.x + std::int64_t{y} * o.y + std::int64_t{z} * o.z;
  }
  bool is_zero() const { return x == 0 && y == 0 && z == 0; }
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3 &o) const { return x * o.x + y * o.y + z * o.z; }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
  double max_abs() const {
    return std::fmax(std::fabs(x), std::fmax(std::fabs(y), std::fabs(z)));
  }
  Vec3 normalized() const {
    const double n = norm();
    return {x / n, y / n, z / n};
  }
};

inline Vec3 to_position(const IntVec3 &n, double lattice_constant) {
  const double s = lattice_constant / 4.0;
  return {s * n.x, s * n.y, s * n.z};
}

inline Vec3 to_vec3(const IntVec3 &n) {
  return {static_cast<double>(n.x), static_cast<double>(n.y), static_cast<double>(n.z)};
}

} // namespace frozencore
