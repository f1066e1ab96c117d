#include "neuroperf/coefficient.hpp"

#include <stdexcept>

namespace neuroperf {

double field_value(const FieldVector& field, const PointContext& ctx) {
  if (field.space().degree() == ctx.degree && ctx.basis_values.size() == field.space().dofs_per_element())
    return contract(field.element_coeffs(ctx.elem), ctx.basis_values);
  return field.value_at(ctx.elem, ctx.ref);
}

CoefficientField CoefficientField::constant(double c) {
  CoefficientField f;
  f.kind_ = Kind::Constant;
  f.value_ = c;
  return f;
}

CoefficientField CoefficientField::analytic(Analytic fn) {
  if (!fn) throw std::invalid_argument("CoefficientField: empty function");
  CoefficientField f;
  f.kind_ = Kind::Analytic;
  f.analytic_ = std::move(fn);
  return f;
}

CoefficientField CoefficientField::state(State1 fn, std::shared_ptr<const FieldVector> s) {
  if (!fn || !s) throw std::invalid_argument("CoefficientField: empty function or field");
  CoefficientField f;
  f.kind_ = Kind::State1;
  f.state1_ = std::move(fn);
  f.s1_ = std::move(s);
  return f;
}

CoefficientField CoefficientField::state(State2 fn, std::shared_ptr<const FieldVector> s1,
                                         std::shared_ptr<const FieldVector> s2) {
  if (!fn || !s1 || !s2) throw std::invalid_argument("CoefficientField: empty function or field");
  CoefficientField f;
  f.kind_ = Kind::State2;
  f.state2_ = std::move(fn);
  f.s1_ = std::move(s1);
  f.s2_ = std::move(s2);
  return f;
}

CoefficientField CoefficientField::pointwise(Pointwise fn) {
  if (!fn) throw std::invalid_argument("CoefficientField: empty function");
  CoefficientField f;
  f.kind_ = Kind::Pointwise;
  f.pointwise_ = std::move(fn);
  return f;
}

double CoefficientField::operator()(const PointContext& ctx) const {
  switch (kind_) {
    case Kind::Constant: return value_;
    case Kind::Analytic: return analytic_(ctx.x);
    case Kind::State1: return state1_(ctx.x, field_value(*s1_, ctx));
    case Kind::State2: return state2_(ctx.x, field_value(*s1_, ctx), field_value(*s2_, ctx));
    case Kind::Pointwise: return pointwise_(ctx);
  }
  return value_;
}

TensorField TensorField::constant(const Tensor2& t) {
  TensorField f;
  f.kind_ = Kind::Constant;
  f.value_ = t;
  return f;
}

TensorField TensorField::analytic(Analytic fn) {
  if (!fn) throw std::invalid_argument("TensorField: empty function");
  TensorField f;
  f.kind_ = Kind::Analytic;
  f.analytic_ = std::move(fn);
  return f;
}

TensorField TensorField::isotropic(CoefficientField s) {
  TensorField f;
  if (s.is_constant()) {
    f.kind_ = Kind::Constant;
    f.value_ = Tensor2::identity(s.constant_value());
    return f;
  }
  f.kind_ = Kind::Isotropic;
  f.scalar_ = std::make_shared<CoefficientField>(std::move(s));
  return f;
}

Tensor2 TensorField::operator()(const PointContext& ctx) const {
  switch (kind_) {
    case Kind::Constant: return value_;
    case Kind::Analytic: return analytic_(ctx.x);
    case Kind::Isotropic: return Tensor2::identity((*scalar_)(ctx));
  }
  return value_;
}

}  // namespace neuroperf
