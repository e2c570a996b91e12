#pragma once

#include <string>
#include <vector>

#include "qstate/mesh.hpp"

namespace qstate {

/// omega = density du^dv in the mesh chart. Sphere: density = area/(4 pi) in
/// (z, phi); torus: density = area on [0,1)^2; patch: density 1.
struct AreaForm {
  MeshPtr mesh;
  std::vector<double> density;
  double total_area = 0.0;
};

AreaForm area_form(const MeshPtr& mesh);

/// {F,G} sampled at the vertices, with where it came from.
struct BracketField {
  ScalarField values;
  std::string f_generator;
  std::string g_generator;
  double h_u = 0.0;
  double h_v = 0.0;
};

/// {F,G} = (F_v G_u - F_u G_v) / density, so that {v, u} = 1 for
/// omega = du^dv. Derivatives are second-order finite differences in the
/// chart (see kernels::serial::chart_gradient).
BracketField poisson_bracket(const AreaForm& form, const ScalarField& f, const ScalarField& g);

/// max |{F,G}| over vertices.
double bracket_sup_norm(const BracketField& b);

/// Sum of |{F,G}| times vertex area weight.
double bracket_l1(const AreaForm& form, const BracketField& b);

}  // namespace qstate
