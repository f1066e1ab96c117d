#include "neuroperf/dg_space.hpp"

#include <stdexcept>

namespace neuroperf {

namespace {
constexpr std::array<Point2, 3> kRefVertices{Point2{0.0, 0.0}, Point2{1.0, 0.0}, Point2{0.0, 1.0}};
}

DgSpace::DgSpace(std::shared_ptr<const Mesh> mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree), basis_(degree) {
  if (!mesh_) throw std::invalid_argument("DgSpace: null mesh");
  if (degree < 1) throw std::invalid_argument("DgSpace: polynomial degree must be >= 1");

  maps_.resize(mesh_->num_elements());
  for (std::size_t e = 0; e < mesh_->num_elements(); ++e) {
    const auto c = mesh_->corners(e);
    ElementMap m;
    m.origin = c[0];
    m.j00 = c[1].x - c[0].x;
    m.j01 = c[2].x - c[0].x;
    m.j10 = c[1].y - c[0].y;
    m.j11 = c[2].y - c[0].y;
    m.det = m.j00 * m.j11 - m.j01 * m.j10;
    maps_[e] = m;
  }

  volume_rule_ = triangle_rule(2 * degree + 2);
  volume_table_ = tabulate(volume_rule_.points);
  face_rule_ = line_rule(2 * degree + 2);
  for (std::size_t f = 0; f < 3; ++f) {
    const auto [a, b] = local_face_vertices(f);
    for (int rev = 0; rev < 2; ++rev) {
      auto& pts = face_points_[2 * f + rev];
      pts.clear();
      for (double s : face_rule_.points) {
        const double t = rev ? 1.0 - s : s;
        pts.push_back(kRefVertices[a] + t * (kRefVertices[b] - kRefVertices[a]));
      }
      face_tables_[2 * f + rev] = tabulate(pts);
    }
  }
}

BasisTable DgSpace::tabulate(std::span<const Point2> ref_points) const {
  BasisTable t;
  t.num_points = ref_points.size();
  t.num_basis = basis_.size();
  t.values.resize(t.num_points * t.num_basis);
  t.grads.resize(t.num_points * t.num_basis);
  for (std::size_t q = 0; q < t.num_points; ++q) {
    basis_.values(ref_points[q], std::span<double>(t.values.data() + q * t.num_basis, t.num_basis));
    basis_.gradients(ref_points[q], std::span<Point2>(t.grads.data() + q * t.num_basis, t.num_basis));
  }
  return t;
}

std::shared_ptr<const DgSpace> build_space(std::shared_ptr<const Mesh> mesh, int degree) {
  return std::make_shared<const DgSpace>(std::move(mesh), degree);
}

std::string_view to_string(FieldRole role) {
  switch (role) {
    case FieldRole::U: return "u";
    case FieldRole::UTilde: return "u_tilde";
    case FieldRole::PA: return "p_A";
    case FieldRole::PC: return "p_C";
    case FieldRole::PV: return "p_V";
    case FieldRole::Auxiliary: return "aux";
  }
  return "aux";
}

FieldVector::FieldVector(std::shared_ptr<const DgSpace> space, FieldRole role)
    : space_(std::move(space)), coeffs_(space_->num_dofs(), 0.0), role_(role) {}

FieldVector::FieldVector(std::shared_ptr<const DgSpace> space, std::vector<double> coeffs,
                         FieldRole role)
    : space_(std::move(space)), coeffs_(std::move(coeffs)), role_(role) {
  if (coeffs_.size() != space_->num_dofs())
    throw std::invalid_argument("FieldVector: coefficient count does not match space");
}

double FieldVector::value_at(std::size_t e, Point2 ref) const {
  std::vector<double> phi(space_->dofs_per_element());
  space_->basis().values(ref, phi);
  return contract(element_coeffs(e), phi);
}

double FieldVector::mean(std::size_t e) const {
  const auto& rule = space_->volume_rule();
  const auto& tab = space_->volume_table();
  const auto c = element_coeffs(e);
  double s = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * contract(c, tab.values_at(q));
  return 2.0 * s;  // reference area is 1/2
}

double FieldVector::integral() const {
  double s = 0.0;
  for (std::size_t e = 0; e < space_->mesh().num_elements(); ++e)
    s += mean(e) * space_->mesh().area(e);
  return s;
}

FieldVector l2_project(const std::shared_ptr<const DgSpace>& space,
                       const std::function<double(Point2)>& f, FieldRole role) {
  FieldVector out(space, role);
  const auto& rule = space->volume_rule();
  const auto& tab = space->volume_table();
  const std::size_t nb = space->dofs_per_element();
  const auto ne = static_cast<std::ptrdiff_t>(space->mesh().num_elements());
  auto& c = out.coeffs();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ei = 0; ei < ne; ++ei) {
    const auto e = static_cast<std::size_t>(ei);
    const auto& map = space->element_map(e);
    // Orthonormal on the reference element: c_i = sum_q w_q f(x_q) phi_i(q).
    for (std::size_t i = 0; i < nb; ++i) c[space->first_dof(e) + i] = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double fq = f(map.to_physical(rule.points[q])) * rule.weights[q];
      for (std::size_t i = 0; i < nb; ++i) c[space->first_dof(e) + i] += fq * tab.value(q, i);
    }
  }
  return out;
}

QuadratureValues eval_at_quadrature(const FieldVector& field, std::size_t elem) {
  const auto& space = field.space();
  const auto& rule = space.volume_rule();
  const auto& tab = space.volume_table();
  const auto& map = space.element_map(elem);
  const auto c = field.element_coeffs(elem);
  QuadratureValues out;
  const std::size_t nq = rule.size();
  out.points.resize(nq);
  out.weights.resize(nq);
  out.values.resize(nq);
  out.gradients.resize(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    out.points[q] = map.to_physical(rule.points[q]);
    out.weights[q] = rule.weights[q] * map.det;
    out.values[q] = contract(c, tab.values_at(q));
    Point2 g{0.0, 0.0};
    for (std::size_t i = 0; i < c.size(); ++i) g = g + c[i] * tab.grad(q, i);
    out.gradients[q] = map.gradient_to_physical(g);
  }
  return out;
}

}  // namespace neuroperf
