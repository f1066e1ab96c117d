#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "neuroperf/mesh.hpp"

namespace neuroperf::testing {

inline std::shared_ptr<const Mesh> rect(std::size_t nx, std::size_t ny, double lx = 1.0, double ly = 1.0) {
  return std::make_shared<const Mesh>(generate_rect_mesh(nx, ny, lx, ly));
}

// Structured mesh with interior vertices jittered by up to `amount` of a cell width.
inline std::shared_ptr<const Mesh> jittered(std::size_t n, double amount, unsigned seed) {
  const Mesh base = generate_rect_mesh(n, n, 1.0, 1.0);
  std::vector<Point2> v = base.vertices();
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(-amount / n, amount / n);
  for (auto& p : v) {
    const bool edge = p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0;
    if (!edge) p = {p.x + d(rng), p.y + d(rng)};
  }
  return std::make_shared<const Mesh>(std::move(v), base.elements(), BoundaryTag::Pial);
}

// Two triangles sharing the diagonal of the unit square.
inline std::shared_ptr<const Mesh> two_triangles() { return rect(1, 1); }

}  // namespace neuroperf::testing
