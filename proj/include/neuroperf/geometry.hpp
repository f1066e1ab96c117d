#pragma once

#include <array>
#include <cmath>

namespace neuroperf {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }

// Symmetric 2x2 tensor [[xx, xy], [xy, yy]].
struct Tensor2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  static Tensor2 identity(double s = 1.0) { return {s, 0.0, s}; }
  static Tensor2 outer(Point2 a) { return {a.x * a.x, a.x * a.y, a.y * a.y}; }

  Point2 apply(Point2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
  double quadratic(Point2 v) const { return dot(v, apply(v)); }

  std::array<double, 2> eigenvalues() const {
    const double mean = 0.5 * (xx + yy);
    const double rad = std::hypot(0.5 * (xx - yy), xy);
    return {mean - rad, mean + rad};
  }

  friend Tensor2 operator+(Tensor2 a, Tensor2 b) { return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy}; }
  friend Tensor2 operator*(double s, Tensor2 a) { return {s * a.xx, s * a.xy, s * a.yy}; }
};

}  // namespace neuroperf
