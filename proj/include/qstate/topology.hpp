#pragma once

#include <span>
#include <vector>

#include "qstate/mesh.hpp"

namespace qstate {

/// Per-vertex 0/1 flags.
using VertexMask = std::vector<std::uint8_t>;

/// A nonempty set of vertices (treated as a closed set) with its area.
struct Region {
  MeshPtr mesh;
  std::vector<VertexId> vertices;  // sorted ascending
  double measure = 0.0;
};

/// Region from an arbitrary vertex list; sorts, deduplicates and sums weights.
Region make_region(const MeshPtr& mesh, std::vector<VertexId> vertices);

/// Region of all vertices where keep[i] is true (may be empty of vertices).
Region region_from_mask(const MeshPtr& mesh, std::span<const std::uint8_t> keep);

/// Maximal connected pieces of the kept vertices under mesh adjacency, ordered
/// by their smallest vertex index.
std::vector<Region> connected_components(const MeshPtr& mesh, std::span<const std::uint8_t> keep);

/// Sum of area weights over the region.
double region_measure(const SurfaceMesh& mesh, const Region& region);

/// Whether the region and its complement are both connected. Throws
/// std::invalid_argument for an empty region or an empty complement.
bool is_solid(const SurfaceMesh& mesh, const Region& region);

/// Number of connected components of the kept vertices.
std::size_t count_components(const SurfaceMesh& mesh, std::span<const std::uint8_t> keep);

/// Disjoint-set forest with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n);
  std::uint32_t find(std::uint32_t x);
  /// Returns the surviving root.
  std::uint32_t unite(std::uint32_t a, std::uint32_t b);

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

}  // namespace qstate
