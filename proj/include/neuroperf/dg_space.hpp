#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "neuroperf/basis.hpp"
#include "neuroperf/mesh.hpp"
#include "neuroperf/quadrature.hpp"

namespace neuroperf {

// Affine map from the reference triangle: x = origin + J * ref.
struct ElementMap {
  Point2 origin;
  double j00 = 0, j01 = 0, j10 = 0, j11 = 0;
  double det = 0;  // 2 |K|

  Point2 to_physical(Point2 ref) const {
    return {origin.x + j00 * ref.x + j01 * ref.y, origin.y + j10 * ref.x + j11 * ref.y};
  }
  // J^{-T} g
  Point2 gradient_to_physical(Point2 g) const {
    return {(j11 * g.x - j10 * g.y) / det, (-j01 * g.x + j00 * g.y) / det};
  }
};

// Basis values and reference gradients at a fixed set of reference points.
struct BasisTable {
  std::size_t num_points = 0;
  std::size_t num_basis = 0;
  std::vector<double> values;  // [point][basis]
  std::vector<Point2> grads;   // [point][basis], reference coordinates

  double value(std::size_t q, std::size_t i) const { return values[q * num_basis + i]; }
  Point2 grad(std::size_t q, std::size_t i) const { return grads[q * num_basis + i]; }
  std::span<const double> values_at(std::size_t q) const {
    return {values.data() + q * num_basis, num_basis};
  }
};

// Broken polynomial space of total degree `degree` on every element. Element e owns the
// contiguous dof block [first_dof(e), first_dof(e) + dofs_per_element()).
class DgSpace {
 public:
  DgSpace(std::shared_ptr<const Mesh> mesh, int degree);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  std::size_t dofs_per_element() const { return basis_.size(); }
  std::size_t num_dofs() const { return mesh_->num_elements() * basis_.size(); }
  std::size_t first_dof(std::size_t e) const { return e * basis_.size(); }

  const ModalBasis& basis() const { return basis_; }
  const ElementMap& element_map(std::size_t e) const { return maps_[e]; }

  // Volume and face rules are of order 2*degree + 2.
  const QuadratureRule& volume_rule() const { return volume_rule_; }
  const BasisTable& volume_table() const { return volume_table_; }
  const LineRule& face_rule() const { return face_rule_; }

  // Reference points of the face rule on local face f. `reversed` walks the face from its
  // second vertex to its first, which is how the minus side of an interior face sees the
  // plus side's points.
  const std::vector<Point2>& face_points(std::size_t f, bool reversed) const {
    return face_points_[2 * f + (reversed ? 1 : 0)];
  }
  const BasisTable& face_table(std::size_t f, bool reversed) const {
    return face_tables_[2 * f + (reversed ? 1 : 0)];
  }

  BasisTable tabulate(std::span<const Point2> ref_points) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  int degree_;
  ModalBasis basis_;
  std::vector<ElementMap> maps_;
  QuadratureRule volume_rule_;
  BasisTable volume_table_;
  LineRule face_rule_;
  std::array<std::vector<Point2>, 6> face_points_;
  std::array<BasisTable, 6> face_tables_;
};

// Throws std::invalid_argument for degree < 1.
std::shared_ptr<const DgSpace> build_space(std::shared_ptr<const Mesh> mesh, int degree);

enum class FieldRole { U, UTilde, PA, PC, PV, Auxiliary };
std::string_view to_string(FieldRole role);

class FieldVector {
 public:
  explicit FieldVector(std::shared_ptr<const DgSpace> space, FieldRole role = FieldRole::Auxiliary);
  FieldVector(std::shared_ptr<const DgSpace> space, std::vector<double> coeffs,
              FieldRole role = FieldRole::Auxiliary);

  const DgSpace& space() const { return *space_; }
  const std::shared_ptr<const DgSpace>& space_ptr() const { return space_; }
  FieldRole role() const { return role_; }
  void set_role(FieldRole role) { role_ = role; }

  std::vector<double>& coeffs() { return coeffs_; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }
  std::span<const double> element_coeffs(std::size_t e) const {
    return {coeffs_.data() + space_->first_dof(e), space_->dofs_per_element()};
  }

  double value_at(std::size_t e, Point2 ref) const;
  double mean(std::size_t e) const;
  double integral() const;

 private:
  std::shared_ptr<const DgSpace> space_;
  std::vector<double> coeffs_;
  FieldRole role_;
};

// Element-wise L2 projection; uses the space's volume rule.
FieldVector l2_project(const std::shared_ptr<const DgSpace>& space,
                       const std::function<double(Point2)>& f,
                       FieldRole role = FieldRole::Auxiliary);

struct QuadratureValues {
  std::vector<Point2> points;     // physical
  std::vector<double> weights;    // physical (reference weight * 2|K|)
  std::vector<double> values;
  std::vector<Point2> gradients;  // physical
};

QuadratureValues eval_at_quadrature(const FieldVector& field, std::size_t elem);

// Evaluates `coeffs` against a row of tabulated basis values.
inline double contract(std::span<const double> coeffs, std::span<const double> basis_values) {
  double s = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) s += coeffs[i] * basis_values[i];
  return s;
}

}  // namespace neuroperf
