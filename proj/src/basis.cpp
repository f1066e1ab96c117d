#include "neuroperf/basis.hpp"

#include <cmath>
#include <stdexcept>

#include "neuroperf/quadrature.hpp"

namespace neuroperf {

namespace {
constexpr double kCentre = 1.0 / 3.0;

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}
}  // namespace

ModalBasis::ModalBasis(int degree) : degree_(degree), size_(0) {
  if (degree < 0) throw std::invalid_argument("ModalBasis: negative degree");
  for (int total = 0; total <= degree; ++total)
    for (int py = 0; py <= total; ++py) exponents_.emplace_back(total - py, py);
  size_ = exponents_.size();

  const QuadratureRule rule = triangle_rule(2 * degree);
  const std::size_t nq = rule.size();
  // Monomial values at quadrature points, column-major by point.
  std::vector<double> mono(nq * size_);
  for (std::size_t q = 0; q < nq; ++q)
    monomials(rule.points[q], std::span<double>(mono.data() + q * size_, size_));

  auto inner = [&](const std::vector<double>& a, const std::vector<double>& b) {
    // a, b are coefficient vectors in the monomial basis
    double s = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      double va = 0.0, vb = 0.0;
      for (std::size_t k = 0; k < size_; ++k) {
        va += a[k] * mono[q * size_ + k];
        vb += b[k] * mono[q * size_ + k];
      }
      s += rule.weights[q] * va * vb;
    }
    return s;
  };

  std::vector<std::vector<double>> rows;
  rows.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) {
    std::vector<double> v(size_, 0.0);
    v[i] = 1.0;
    // Two passes of modified Gram-Schmidt.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& r : rows) {
        const double c = inner(v, r);
        for (std::size_t k = 0; k < size_; ++k) v[k] -= c * r[k];
      }
    }
    const double nrm = std::sqrt(inner(v, v));
    for (double& c : v) c /= nrm;
    rows.push_back(std::move(v));
  }
  coeffs_.resize(size_ * size_);
  for (std::size_t i = 0; i < size_; ++i)
    for (std::size_t k = 0; k < size_; ++k) coeffs_[i * size_ + k] = rows[i][k];
}

void ModalBasis::monomials(Point2 ref, std::span<double> m) const {
  const double x = ref.x - kCentre, y = ref.y - kCentre;
  for (std::size_t k = 0; k < size_; ++k) m[k] = ipow(x, exponents_[k].first) * ipow(y, exponents_[k].second);
}

void ModalBasis::monomial_gradients(Point2 ref, std::span<Point2> g) const {
  const double x = ref.x - kCentre, y = ref.y - kCentre;
  for (std::size_t k = 0; k < size_; ++k) {
    const auto [px, py] = exponents_[k];
    const double dx = px > 0 ? px * ipow(x, px - 1) * ipow(y, py) : 0.0;
    const double dy = py > 0 ? py * ipow(x, px) * ipow(y, py - 1) : 0.0;
    g[k] = {dx, dy};
  }
}

void ModalBasis::values(Point2 ref, std::span<double> out) const {
  double m[64];
  std::vector<double> heap;
  double* mp = m;
  if (size_ > 64) {
    heap.resize(size_);
    mp = heap.data();
  }
  monomials(ref, std::span<double>(mp, size_));
  for (std::size_t i = 0; i < size_; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k <= i; ++k) s += coeffs_[i * size_ + k] * mp[k];
    out[i] = s;
  }
}

void ModalBasis::gradients(Point2 ref, std::span<Point2> out) const {
  std::vector<Point2> g(size_);
  monomial_gradients(ref, g);
  for (std::size_t i = 0; i < size_; ++i) {
    Point2 s{0.0, 0.0};
    for (std::size_t k = 0; k <= i; ++k) s = s + coeffs_[i * size_ + k] * g[k];
    out[i] = s;
  }
}

}  // namespace neuroperf
