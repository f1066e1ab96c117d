#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "neuroperf/geometry.hpp"

namespace neuroperf {

// Modal basis of P_degree on the reference triangle, orthonormal in L2(reference triangle).
// Built by Gram-Schmidt on centred monomials, so phi_0 is the constant sqrt(2).
class ModalBasis {
 public:
  explicit ModalBasis(int degree);

  int degree() const { return degree_; }
  std::size_t size() const { return size_; }

  void values(Point2 ref, std::span<double> out) const;
  void gradients(Point2 ref, std::span<Point2> out) const;

  // (exponent of x, exponent of y) for monomial k.
  const std::vector<std::pair<int, int>>& exponents() const { return exponents_; }

 private:
  void monomials(Point2 ref, std::span<double> m) const;
  void monomial_gradients(Point2 ref, std::span<Point2> g) const;

  int degree_;
  std::size_t size_;
  std::vector<std::pair<int, int>> exponents_;
  std::vector<double> coeffs_;  // size_ x size_, row i holds phi_i in the monomial basis
};

inline std::size_t dofs_for_degree(int degree) {
  return static_cast<std::size_t>((degree + 1) * (degree + 2) / 2);
}

}  // namespace neuroperf
