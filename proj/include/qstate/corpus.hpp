#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qstate/mesh.hpp"

namespace qstate {

/// Random trig polynomial text. On the sphere the terms are
/// a cos(k.(x,y,z)) + b sin(k.(x,y,z)) over integer k with |k|_1 <= k_max;
/// on the torus and patch they use 2 pi (k1 u + k2 v). Coefficients are
/// N(0,1) damped by exp(-|k|^2/4).
std::string random_trig_expression(Topology topology, int k_max, std::mt19937_64& rng);

/// A random trig field divided by its sup norm on the mesh, so the result
/// has sup norm 1. The generator records the normalized expression.
ScalarField random_trig_field(const MeshPtr& mesh, int k_max, std::mt19937_64& rng);

/// `count` fields drawn in order from one generator seeded with `seed`.
std::vector<ScalarField> trig_corpus(const MeshPtr& mesh, std::size_t count, int k_max, std::uint64_t seed);

}  // namespace qstate
