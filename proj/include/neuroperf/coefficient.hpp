#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "neuroperf/dg_space.hpp"
#include "neuroperf/geometry.hpp"

namespace neuroperf {

inline constexpr std::size_t kNoQuadPoint = static_cast<std::size_t>(-1);

// Where a coefficient is being evaluated. `basis_values` are the values of the assembling
// space's basis at `ref`; state fields on a space of the same degree reuse them. `qp` is the
// index into the space's volume rule, or kNoQuadPoint on faces.
struct PointContext {
  std::size_t elem = 0;
  Point2 ref;
  Point2 x;
  std::span<const double> basis_values;
  int degree = 0;
  std::size_t qp = kNoQuadPoint;
};

// Value of `field` at the context point.
double field_value(const FieldVector& field, const PointContext& ctx);

// Scalar coefficient: constant, analytic in x, or a pointwise function of x and one or two
// state fields evaluated at the same point.
class CoefficientField {
 public:
  using Analytic = std::function<double(Point2)>;
  using State1 = std::function<double(Point2, double)>;
  using State2 = std::function<double(Point2, double, double)>;
  using Pointwise = std::function<double(const PointContext&)>;

  static CoefficientField constant(double c);
  static CoefficientField analytic(Analytic f);
  static CoefficientField state(State1 f, std::shared_ptr<const FieldVector> s);
  static CoefficientField state(State2 f, std::shared_ptr<const FieldVector> s1,
                                std::shared_ptr<const FieldVector> s2);
  // Full access to the evaluation point, for coefficients depending on several fields.
  static CoefficientField pointwise(Pointwise f);

  double operator()(const PointContext& ctx) const;
  bool is_constant() const { return kind_ == Kind::Constant; }
  double constant_value() const { return value_; }

 private:
  enum class Kind { Constant, Analytic, State1, State2, Pointwise };
  Kind kind_ = Kind::Constant;
  double value_ = 0.0;
  Analytic analytic_;
  State1 state1_;
  State2 state2_;
  Pointwise pointwise_;
  std::shared_ptr<const FieldVector> s1_, s2_;
};

// Symmetric 2x2 tensor coefficient.
class TensorField {
 public:
  using Analytic = std::function<Tensor2(Point2)>;

  static TensorField constant(const Tensor2& t);
  static TensorField analytic(Analytic f);
  // s(x) * I for a scalar coefficient s.
  static TensorField isotropic(CoefficientField s);

  Tensor2 operator()(const PointContext& ctx) const;

 private:
  enum class Kind { Constant, Analytic, Isotropic };
  Kind kind_ = Kind::Constant;
  Tensor2 value_{};
  Analytic analytic_;
  std::shared_ptr<CoefficientField> scalar_;
};

}  // namespace neuroperf
