#pragma once

#include <functional>
#include <vector>

#include "neuroperf/coefficient.hpp"
#include "neuroperf/dg_space.hpp"
#include "neuroperf/mesh.hpp"
#include "neuroperf/parallel.hpp"
#include "neuroperf/sparse.hpp"

namespace neuroperf {

struct AssembledOperator {
  SparseMatrix matrix;
  std::vector<double> lift;  // right-hand side contribution of the Dirichlet data
};

// Boundary faces whose tag is listed are Dirichlet with value g; all others are Neumann.
struct DirichletData {
  std::vector<BoundaryTag> tags;
  std::function<double(Point2)> value;

  static DirichletData none() { return {}; }
  static DirichletData constant(std::vector<BoundaryTag> tags, double g);
  static DirichletData function(std::vector<BoundaryTag> tags, std::function<double(Point2)> g);

  bool applies_to(BoundaryTag tag) const;
};

inline constexpr double kDefaultPenalty = 10.0;

// Block-diagonal (w phi_j, phi_i).
SparseMatrix assemble_mass(const DgSpace& space,
                           const CoefficientField& weight = CoefficientField::constant(1.0),
                           Execution exec = Execution::Parallel);

// Symmetric interior penalty form of -div(K grad .). Interior faces always contribute;
// boundary faces contribute only when Dirichlet. Penalty per face quadrature point:
// C * degree^2 * avg(n.K n) / min(h_plus, h_minus). Throws std::invalid_argument for C <= 0.
AssembledOperator assemble_sipg(const DgSpace& space, const TensorField& tensor,
                                const DirichletData& dirichlet, double penalty_scale = kDefaultPenalty,
                                Execution exec = Execution::Parallel);

// (f, phi_i).
std::vector<double> assemble_load(const DgSpace& space, const CoefficientField& f,
                                  Execution exec = Execution::Parallel);

// Element-face adjacency: for each element, itself and its interior-face neighbours in
// ascending order. Defines the block column layout of every face-coupled operator.
std::vector<std::vector<std::size_t>> element_stencils(const Mesh& mesh);

}  // namespace neuroperf
