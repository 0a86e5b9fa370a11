#pragma once

#include <algorithm>
#include <cmath>

namespace safe_manip {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dist(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

inline Vec3 clamp(const Vec3& v, const Vec3& lo, const Vec3& hi) {
  return {std::clamp(v.x, lo.x, hi.x), std::clamp(v.y, lo.y, hi.y), std::clamp(v.z, lo.z, hi.z)};
}

inline Vec3 clamp(const Vec3& v, double lo, double hi) {
  return {std::clamp(v.x, lo, hi), std::clamp(v.y, lo, hi), std::clamp(v.z, lo, hi)};
}

// Axis-aligned boxes are stored center + half-extents throughout.
// Overlap is strict: boxes sharing only a face do not overlap, which keeps
// the obstacle-constraint level set h = 0.5 (inflated-box surface) collision
// free.
inline bool aabb_overlap(const Vec3& ca, const Vec3& ha, const Vec3& cb, const Vec3& hb) {
  return std::abs(ca.x - cb.x) < ha.x + hb.x && std::abs(ca.y - cb.y) < ha.y + hb.y &&
         std::abs(ca.z - cb.z) < ha.z + hb.z;
}

}  // namespace safe_manip
