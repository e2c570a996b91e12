#include "qstate/symplectic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qstate/kernels.hpp"

namespace qstate {

AreaForm area_form(const MeshPtr& mesh) {
  if (!mesh) throw std::invalid_argument("area_form: null mesh");
  double rho = 1.0;
  switch (mesh->topology()) {
    case Topology::sphere: rho = mesh->total_area() / (4.0 * std::numbers::pi); break;
    case Topology::torus: rho = mesh->total_area(); break;
    case Topology::patch: rho = 1.0; break;
  }
  return AreaForm{mesh, std::vector<double>(mesh->vertex_count(), rho), mesh->total_area()};
}

BracketField poisson_bracket(const AreaForm& form, const ScalarField& f, const ScalarField& g) {
  require_same_mesh(f, g, "poisson_bracket");
  if (!form.mesh || !form.mesh->same_grid(*f.mesh())) {
    throw std::invalid_argument("poisson_bracket: area form lives on a different mesh");
  }
  const SurfaceMesh& mesh = *f.mesh();
  const kernels::Gradient df = kernels::parallel::chart_gradient(mesh, f.values());
  const kernels::Gradient dg = kernels::parallel::chart_gradient(mesh, g.values());
  std::vector<double> b = kernels::parallel::bracket(df, dg, form.density);
  return BracketField{ScalarField(f.mesh(), std::move(b)), f.generator(), g.generator(), mesh.spacing_u(),
                      mesh.spacing_v()};
}

double bracket_sup_norm(const BracketField& b) { return b.values.sup_norm(); }

double bracket_l1(const AreaForm& form, const BracketField& b) {
  if (!form.mesh || !form.mesh->same_grid(*b.values.mesh())) {
    throw std::invalid_argument("bracket_l1: area form lives on a different mesh");
  }
  double s = 0.0;
  for (VertexId v = 0; v < b.values.size(); ++v) s += std::abs(b.values[v]) * form.mesh->area_weight(v);
  return s;
}

}  // namespace qstate
