#pragma once

#include <vector>

#include "neuroperf/geometry.hpp"

namespace neuroperf {

// Rule on [0,1]; weights sum to 1.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
  int order = 0;  // exact for polynomials up to this degree
};

// Rule on the reference triangle (0,0),(1,0),(0,1); weights sum to 1/2.
struct QuadratureRule {
  std::vector<Point2> points;
  std::vector<double> weights;
  int order = 0;

  std::size_t size() const { return points.size(); }
};

LineRule gauss_legendre(int npoints);
LineRule line_rule(int order);

// Collapsed (Duffy) tensor-product Gauss rule; exact up to `order`.
QuadratureRule triangle_rule(int order);

}  // namespace neuroperf
