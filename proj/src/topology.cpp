#include "qstate/topology.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace qstate {

UnionFind::UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
  std::iota(parent_.begin(), parent_.end(), 0u);
}

std::uint32_t UnionFind::find(std::uint32_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

std::uint32_t UnionFind::unite(std::uint32_t a, std::uint32_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return a;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
  return a;
}

Region make_region(const MeshPtr& mesh, std::vector<VertexId> vertices) {
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  for (VertexId v : vertices) {
    if (v >= mesh->vertex_count()) throw std::invalid_argument("region vertex out of range");
  }
  Region r{mesh, std::move(vertices), 0.0};
  r.measure = region_measure(*mesh, r);
  return r;
}

Region region_from_mask(const MeshPtr& mesh, std::span<const std::uint8_t> keep) {
  if (keep.size() != mesh->vertex_count()) throw std::invalid_argument("mask length does not match the mesh");
  std::vector<VertexId> vs;
  for (VertexId i = 0; i < keep.size(); ++i) {
    if (keep[i]) vs.push_back(i);
  }
  return make_region(mesh, std::move(vs));
}

double region_measure(const SurfaceMesh& mesh, const Region& region) {
  double m = 0.0;
  for (VertexId v : region.vertices) m += mesh.area_weight(v);
  return m;
}

namespace {

UnionFind label_kept(const SurfaceMesh& mesh, std::span<const std::uint8_t> keep) {
  UnionFind uf(mesh.vertex_count());
  for (VertexId a = 0; a < keep.size(); ++a) {
    if (!keep[a]) continue;
    for (VertexId b : mesh.neighbors(a)) {
      if (b > a && keep[b]) uf.unite(a, b);
    }
  }
  return uf;
}

}  // namespace

std::vector<Region> connected_components(const MeshPtr& mesh, std::span<const std::uint8_t> keep) {
  if (keep.size() != mesh->vertex_count()) throw std::invalid_argument("mask length does not match the mesh");
  UnionFind uf = label_kept(*mesh, keep);
  std::vector<std::int64_t> slot(keep.size(), -1);
  std::vector<Region> out;
  // Scanning in index order makes each region's first vertex its smallest.
  for (VertexId v = 0; v < keep.size(); ++v) {
    if (!keep[v]) continue;
    const std::uint32_t root = uf.find(v);
    if (slot[root] < 0) {
      slot[root] = static_cast<std::int64_t>(out.size());
      out.push_back(Region{mesh, {}, 0.0});
    }
    Region& r = out[static_cast<std::size_t>(slot[root])];
    r.vertices.push_back(v);
    r.measure += mesh->area_weight(v);
  }
  return out;
}

std::size_t count_components(const SurfaceMesh& mesh, std::span<const std::uint8_t> keep) {
  if (keep.size() != mesh.vertex_count()) throw std::invalid_argument("mask length does not match the mesh");
  UnionFind uf = label_kept(mesh, keep);
  std::size_t count = 0;
  for (VertexId v = 0; v < keep.size(); ++v) {
    if (keep[v] && uf.find(v) == v) ++count;
  }
  return count;
}

bool is_solid(const SurfaceMesh& mesh, const Region& region) {
  if (region.vertices.empty()) throw std::invalid_argument("is_solid: empty region");
  if (region.vertices.size() >= mesh.vertex_count()) throw std::invalid_argument("is_solid: empty complement");
  VertexMask inside(mesh.vertex_count(), 0);
  for (VertexId v : region.vertices) inside[v] = 1;
  VertexMask outside(inside.size());
  for (std::size_t i = 0; i < inside.size(); ++i) outside[i] = inside[i] ? 0 : 1;
  return count_components(mesh, inside) == 1 && count_components(mesh, outside) == 1;
}

}  // namespace qstate
