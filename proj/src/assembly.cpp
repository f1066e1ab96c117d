#include "neuroperf/assembly.hpp"

#include <algorithm>
#include <stdexcept>

namespace neuroperf {

DirichletData DirichletData::constant(std::vector<BoundaryTag> tags, double g) {
  return {std::move(tags), [g](Point2) { return g; }};
}

DirichletData DirichletData::function(std::vector<BoundaryTag> tags, std::function<double(Point2)> g) {
  if (!g) throw std::invalid_argument("DirichletData: empty boundary function");
  return {std::move(tags), std::move(g)};
}

bool DirichletData::applies_to(BoundaryTag tag) const {
  return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

std::vector<std::vector<std::size_t>> element_stencils(const Mesh& mesh) {
  std::vector<std::vector<std::size_t>> s(mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) s[e].push_back(e);
  for (const auto& f : mesh.interior_faces()) {
    s[f.elem_plus].push_back(f.elem_minus);
    s[f.elem_minus].push_back(f.elem_plus);
  }
  for (auto& v : s) std::sort(v.begin(), v.end());
  return s;
}

namespace {

// CSR skeleton in which row block e holds one dense nb x nb block per stencil entry.
SparseMatrix block_skeleton(const DgSpace& space, const std::vector<std::vector<std::size_t>>& stencil) {
  const std::size_t nb = space.dofs_per_element();
  const std::size_t ne = space.mesh().num_elements();
  std::vector<std::size_t> rp(ne * nb + 1, 0);
  for (std::size_t e = 0; e < ne; ++e)
    for (std::size_t i = 0; i < nb; ++i) rp[e * nb + i + 1] = stencil[e].size() * nb;
  for (std::size_t r = 0; r < ne * nb; ++r) rp[r + 1] += rp[r];
  std::vector<std::size_t> ci(rp.back());
  for (std::size_t e = 0; e < ne; ++e)
    for (std::size_t i = 0; i < nb; ++i) {
      std::size_t k = rp[e * nb + i];
      for (std::size_t nbr : stencil[e])
        for (std::size_t j = 0; j < nb; ++j) ci[k++] = nbr * nb + j;
    }
  return SparseMatrix(ne * nb, ne * nb, std::move(rp), std::move(ci), std::vector<double>(ci.size(), 0.0));
}

template <class Body>
void for_each_element(std::size_t ne, Execution exec, Body&& body) {
  const auto n = static_cast<std::ptrdiff_t>(ne);
  if (exec == Execution::Serial) {
    for (std::ptrdiff_t e = 0; e < n; ++e) body(static_cast<std::size_t>(e));
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t e = 0; e < n; ++e) body(static_cast<std::size_t>(e));
  }
}

// One side of a face at one quadrature point.
struct SideEval {
  PointContext ctx;
  Tensor2 k;
  std::vector<Point2> grad;  // physical basis gradients
};

void eval_side(const DgSpace& space, const TensorField& tensor, std::size_t elem, Point2 ref,
               std::span<const double> phi, std::span<const Point2> ref_grads, Point2 x, SideEval& out) {
  out.ctx = PointContext{elem, ref, x, phi, space.degree(), kNoQuadPoint};
  out.k = tensor(out.ctx);
  const auto& map = space.element_map(elem);
  out.grad.resize(ref_grads.size());
  for (std::size_t j = 0; j < ref_grads.size(); ++j) out.grad[j] = map.gradient_to_physical(ref_grads[j]);
}

}  // namespace

SparseMatrix assemble_mass(const DgSpace& space, const CoefficientField& weight, Execution exec) {
  const std::size_t nb = space.dofs_per_element();
  const std::size_t ne = space.mesh().num_elements();
  std::vector<std::vector<std::size_t>> diag(ne);
  for (std::size_t e = 0; e < ne; ++e) diag[e] = {e};
  SparseMatrix m = block_skeleton(space, diag);
  auto& vals = m.values();
  const auto& rule = space.volume_rule();
  const auto& tab = space.volume_table();
  for_each_element(ne, exec, [&](std::size_t e) {
    const auto& map = space.element_map(e);
    double* block = vals.data() + e * nb * nb;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const PointContext ctx{e, rule.points[q], map.to_physical(rule.points[q]), tab.values_at(q),
                             space.degree(), q};
      const double w = rule.weights[q] * map.det * weight(ctx);
      for (std::size_t i = 0; i < nb; ++i)
        for (std::size_t j = 0; j < nb; ++j) block[i * nb + j] += w * tab.value(q, i) * tab.value(q, j);
    }
  });
  return m;
}

AssembledOperator assemble_sipg(const DgSpace& space, const TensorField& tensor,
                                const DirichletData& dirichlet, double penalty_scale, Execution exec) {
  if (!(penalty_scale > 0.0)) throw std::invalid_argument("assemble_sipg: penalty scale must be positive");
  const Mesh& mesh = space.mesh();
  const std::size_t nb = space.dofs_per_element();
  const std::size_t ne = mesh.num_elements();
  const auto stencil = element_stencils(mesh);
  AssembledOperator op{block_skeleton(space, stencil), std::vector<double>(space.num_dofs(), 0.0)};
  auto& vals = op.matrix.values();
  const auto& rp = op.matrix.row_ptr();
  const double deg2 = static_cast<double>(space.degree() * space.degree());
  const auto& vrule = space.volume_rule();
  const auto& vtab = space.volume_table();
  const auto& frule = space.face_rule();
  const std::size_t nqf = frule.points.size();

  for_each_element(ne, exec, [&](std::size_t e) {
    const auto& st = stencil[e];
    auto col_of = [&](std::size_t elem) {
      return static_cast<std::size_t>(std::lower_bound(st.begin(), st.end(), elem) - st.begin()) * nb;
    };
    // Row i of element e starts at rp[e*nb+i]; column offsets follow the stencil order.
    auto L = [&](std::size_t i, std::size_t c) -> double& { return vals[rp[e * nb + i] + c]; };
    const std::size_t self = col_of(e);
    const auto& map = space.element_map(e);

    std::vector<Point2> g(nb), kg(nb);
    for (std::size_t q = 0; q < vrule.size(); ++q) {
      const PointContext ctx{e, vrule.points[q], map.to_physical(vrule.points[q]), vtab.values_at(q),
                             space.degree(), q};
      const Tensor2 k = tensor(ctx);
      const double w = vrule.weights[q] * map.det;
      for (std::size_t j = 0; j < nb; ++j) {
        g[j] = map.gradient_to_physical(vtab.grad(q, j));
        kg[j] = k.apply(g[j]);
      }
      for (std::size_t i = 0; i < nb; ++i)
        for (std::size_t j = 0; j < nb; ++j) L(i, self + j) += w * dot(kg[j], g[i]);
    }

    SideEval plus, minus;
    for (const auto& ef : mesh.faces_of(e)) {
      if (ef.kind == ElementFace::Kind::Boundary) {
        const auto& bf = mesh.boundary_faces()[ef.index];
        if (!dirichlet.applies_to(bf.tag)) continue;
        const auto& pts = space.face_points(bf.face, false);
        const auto& tab = space.face_table(bf.face, false);
        for (std::size_t q = 0; q < nqf; ++q) {
          const Point2 x = map.to_physical(pts[q]);
          eval_side(space, tensor, e, pts[q], tab.values_at(q),
                    std::span<const Point2>(tab.grads.data() + q * nb, nb), x, plus);
          const double eta = penalty_scale * deg2 * plus.k.quadratic(bf.normal) / mesh.diameter(e);
          const double w = frule.weights[q] * bf.length;
          const double gval = dirichlet.value(x);
          for (std::size_t i = 0; i < nb; ++i) {
            const double phi_i = tab.value(q, i);
            const double flux_i = dot(plus.k.apply(plus.grad[i]), bf.normal);
            for (std::size_t j = 0; j < nb; ++j) {
              const double phi_j = tab.value(q, j);
              const double flux_j = dot(plus.k.apply(plus.grad[j]), bf.normal);
              L(i, self + j) += w * (eta * phi_j * phi_i - flux_j * phi_i - phi_j * flux_i);
            }
            op.lift[e * nb + i] += w * (eta * gval * phi_i - gval * flux_i);
          }
        }
        continue;
      }
      const auto& f = mesh.interior_faces()[ef.index];
      const bool is_plus = ef.kind == ElementFace::Kind::InteriorPlus;
      const auto& pts_p = space.face_points(f.face_plus, false);
      const auto& pts_m = space.face_points(f.face_minus, true);
      const auto& tab_p = space.face_table(f.face_plus, false);
      const auto& tab_m = space.face_table(f.face_minus, true);
      const double h = std::min(mesh.diameter(f.elem_plus), mesh.diameter(f.elem_minus));
      const std::size_t col_p = col_of(f.elem_plus), col_m = col_of(f.elem_minus);
      for (std::size_t q = 0; q < nqf; ++q) {
        // Both sides evaluated in the same order regardless of which element assembles.
        const Point2 x = space.element_map(f.elem_plus).to_physical(pts_p[q]);
        eval_side(space, tensor, f.elem_plus, pts_p[q], tab_p.values_at(q),
                  std::span<const Point2>(tab_p.grads.data() + q * nb, nb), x, plus);
        eval_side(space, tensor, f.elem_minus, pts_m[q], tab_m.values_at(q),
                  std::span<const Point2>(tab_m.grads.data() + q * nb, nb), x, minus);
        const double kappa = 0.5 * (plus.k.quadratic(f.normal) + minus.k.quadratic(f.normal));
        const double eta = penalty_scale * deg2 * kappa / h;
        const double w = frule.weights[q] * f.length;

        const SideEval& s = is_plus ? plus : minus;
        const BasisTable& ts = is_plus ? tab_p : tab_m;
        const double sig_s = is_plus ? 1.0 : -1.0;
        for (int side = 0; side < 2; ++side) {
          const bool t_plus = side == 0;
          const SideEval& t = t_plus ? plus : minus;
          const BasisTable& tt = t_plus ? tab_p : tab_m;
          const double sig_t = t_plus ? 1.0 : -1.0;
          const std::size_t col = t_plus ? col_p : col_m;
          for (std::size_t i = 0; i < nb; ++i) {
            const double a_i = ts.value(q, i);
            const double b_i = 0.5 * dot(s.k.apply(s.grad[i]), f.normal);
            for (std::size_t j = 0; j < nb; ++j) {
              const double c_j = tt.value(q, j);
              const double d_j = 0.5 * dot(t.k.apply(t.grad[j]), f.normal);
              L(i, col + j) += w * (eta * sig_s * sig_t * c_j * a_i - d_j * sig_s * a_i - sig_t * c_j * b_i);
            }
          }
        }
      }
    }
  });
  return op;
}

std::vector<double> assemble_load(const DgSpace& space, const CoefficientField& f, Execution exec) {
  const std::size_t nb = space.dofs_per_element();
  std::vector<double> b(space.num_dofs(), 0.0);
  const auto& rule = space.volume_rule();
  const auto& tab = space.volume_table();
  for_each_element(space.mesh().num_elements(), exec, [&](std::size_t e) {
    const auto& map = space.element_map(e);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const PointContext ctx{e, rule.points[q], map.to_physical(rule.points[q]), tab.values_at(q),
                             space.degree(), q};
      const double w = rule.weights[q] * map.det * f(ctx);
      for (std::size_t i = 0; i < nb; ++i) b[e * nb + i] += w * tab.value(q, i);
    }
  });
  return b;
}

}  // namespace neuroperf
