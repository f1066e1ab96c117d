#include "neuroperf/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace neuroperf {

LineRule gauss_legendre(int npoints) {
  if (npoints < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
  const int n = npoints;
  LineRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  rule.order = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    // Newton on P_n starting from the Chebyshev-like guess; nodes on [-1,1].
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged node for the weight.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map to [0,1], ascending order.
    rule.points[n - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

LineRule line_rule(int order) {
  if (order < 0) throw std::invalid_argument("line_rule: negative order");
  LineRule r = gauss_legendre(order / 2 + 1);
  return r;
}

QuadratureRule triangle_rule(int order) {
  if (order < 0) throw std::invalid_argument("triangle_rule: negative order");
  // x = a, y = b (1 - a), dx dy = (1 - a) da db. Degree in a is at most order + 1.
  const int n = (order + 3) / 2;
  const LineRule g = gauss_legendre(n);
  QuadratureRule rule;
  rule.order = order;
  rule.points.reserve(n * n);
  rule.weights.reserve(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = g.points[i], b = g.points[j];
      rule.points.push_back({a, b * (1.0 - a)});
      rule.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - a));
    }
  }
  return rule;
}

}  // namespace neuroperf
