#include "qstate/contour_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qstate/topology.hpp"

namespace qstate {

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::minimum: return "min";
    case NodeKind::maximum: return "max";
    case NodeKind::saddle: return "saddle";
  }
  return "?";
}

namespace {

constexpr std::uint32_t kNone = ContourTree::kNone;

void erase_value(std::vector<std::uint32_t>& list, std::uint32_t x) {
  auto it = std::find(list.begin(), list.end(), x);
  if (it != list.end()) {
    *it = list.back();
    list.pop_back();
  }
}

void replace_value(std::vector<std::uint32_t>& list, std::uint32_t from, std::uint32_t to) {
  auto it = std::find(list.begin(), list.end(), from);
  if (it != list.end()) *it = to;
}

// One sweep of the union-find construction. `ahead` tells whether a neighbor
// was processed before v. Each vertex gets one `next` link towards later
// vertices and a list of `prev` links to the components it absorbs.
void sweep_tree(const SurfaceMesh& mesh, std::span<const VertexId> sequence, std::span<const std::uint32_t> rank,
                bool ascending, std::vector<std::uint32_t>& next, std::vector<std::vector<std::uint32_t>>& prev) {
  const std::size_t n = sequence.size();
  UnionFind uf(n);
  std::vector<VertexId> head(n);
  next.assign(n, kNone);
  prev.assign(n, {});
  for (VertexId v : sequence) {
    head[v] = v;
    for (VertexId nb : mesh.neighbors(v)) {
      const bool done = ascending ? rank[nb] < rank[v] : rank[nb] > rank[v];
      if (!done) continue;
      const std::uint32_t a = uf.find(nb);
      const std::uint32_t b = uf.find(v);
      if (a == b) continue;
      const VertexId h = head[a];
      prev[v].push_back(h);
      next[h] = v;
      head[uf.unite(a, b)] = v;
    }
  }
}

// Vertices whose link has two or more lower (equivalently upper) arcs on a
// closed surface. Only the candidates are examined.
std::vector<std::uint8_t> link_saddles(const SurfaceMesh& mesh, std::span<const std::uint32_t> rank,
                                       std::span<const std::uint8_t> candidate) {
  const std::size_t n = mesh.vertex_count();
  std::vector<std::uint8_t> result(n, 0);
  std::vector<std::size_t> offsets(n + 1, 0);
  for (const Triangle& t : mesh.triangles()) {
    for (VertexId v : t) {
      if (candidate[v]) ++offsets[v + 1];
    }
  }
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  std::vector<std::array<VertexId, 2>> link(offsets[n]);
  std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
  for (const Triangle& t : mesh.triangles()) {
    for (int k = 0; k < 3; ++k) {
      const VertexId v = t[k];
      if (candidate[v]) link[fill[v]++] = {t[(k + 1) % 3], t[(k + 2) % 3]};
    }
  }

  std::vector<std::uint32_t> parent;
  for (VertexId v = 0; v < n; ++v) {
    if (!candidate[v]) continue;
    const auto nbrs = mesh.neighbors(v);
    parent.resize(nbrs.size());
    std::iota(parent.begin(), parent.end(), 0u);
    auto local = [&](VertexId x) {
      return static_cast<std::uint32_t>(std::lower_bound(nbrs.begin(), nbrs.end(), x) - nbrs.begin());
    };
    auto find = [&](std::uint32_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (std::size_t e = offsets[v]; e < offsets[v + 1]; ++e) {
      const VertexId a = link[e][0];
      const VertexId b = link[e][1];
      const bool a_low = rank[a] < rank[v];
      const bool b_low = rank[b] < rank[v];
      if (a_low == b_low) parent[find(local(a))] = find(local(b));
    }
    int lower = 0;
    int upper = 0;
    for (std::uint32_t k = 0; k < nbrs.size(); ++k) {
      if (find(k) != k) continue;
      (rank[nbrs[k]] < rank[v] ? lower : upper)++;
    }
    result[v] = lower >= 2 || upper >= 2;
  }
  return result;
}

}  // namespace

ContourTree build_contour_tree(const ScalarField& field) {
  const MeshPtr& mesh = field.mesh();
  const std::size_t n = mesh->vertex_count();
  for (double x : field.values()) {
    if (!std::isfinite(x)) throw std::invalid_argument("build_contour_tree: non-finite field value");
  }

  ContourTree tree;
  tree.mesh_ = mesh;
  tree.values_.assign(field.values().begin(), field.values().end());
  tree.order_.resize(n);
  std::iota(tree.order_.begin(), tree.order_.end(), 0u);
  // Ties broken by vertex index (simulation of simplicity).
  std::stable_sort(tree.order_.begin(), tree.order_.end(),
                   [&](VertexId a, VertexId b) { return tree.values_[a] < tree.values_[b]; });
  tree.rank_.resize(n);
  for (std::uint32_t r = 0; r < n; ++r) tree.rank_[tree.order_[r]] = r;

  std::vector<std::uint32_t> join_up;
  std::vector<std::vector<std::uint32_t>> join_down;
  std::vector<std::uint32_t> split_down;
  std::vector<std::vector<std::uint32_t>> split_up;
  sweep_tree(*mesh, tree.order_, tree.rank_, true, join_up, join_down);
  std::vector<VertexId> descending(tree.order_.rbegin(), tree.order_.rend());
  sweep_tree(*mesh, descending, tree.rank_, false, split_down, split_up);

  // Merge: peel contour-tree leaves, i.e. vertices that are a leaf in one
  // sweep tree and regular in the other.
  std::vector<std::array<VertexId, 2>> arcs;
  arcs.reserve(n - 1);
  std::vector<std::uint8_t> removed(n, 0);
  std::vector<VertexId> queue;
  auto is_leaf = [&](VertexId v) { return join_down[v].size() + split_up[v].size() == 1; };
  for (VertexId v = 0; v < n; ++v) {
    if (is_leaf(v)) queue.push_back(v);
  }
  std::size_t remaining = n;
  std::size_t head = 0;
  while (remaining > 1 && head < queue.size()) {
    const VertexId v = queue[head++];
    if (removed[v] || !is_leaf(v)) continue;
    VertexId w;
    if (join_down[v].empty()) {
      w = join_up[v];
      erase_value(join_down[w], v);
      const VertexId x = split_up[v][0];
      const std::uint32_t d = split_down[v];
      split_down[x] = d;
      if (d != kNone) replace_value(split_up[d], v, x);
    } else {
      w = split_down[v];
      erase_value(split_up[w], v);
      const VertexId x = join_down[v][0];
      const std::uint32_t u = join_up[v];
      join_up[x] = u;
      if (u != kNone) replace_value(join_down[u], v, x);
    }
    arcs.push_back({v, w});
    removed[v] = 1;
    --remaining;
    if (is_leaf(w)) queue.push_back(w);
  }
  if (remaining != 1) {
    throw std::runtime_error("build_contour_tree: join and split trees do not merge (" + std::to_string(remaining) +
                             " vertices left); the level-set graph is not a tree");
  }

  // Augmented adjacency.
  std::vector<std::size_t> degree(n, 0);
  for (const auto& a : arcs) {
    ++degree[a[0]];
    ++degree[a[1]];
  }
  tree.adj_offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) tree.adj_offsets_[i + 1] = tree.adj_offsets_[i] + degree[i];
  tree.adj_.assign(tree.adj_offsets_[n], 0);
  {
    std::vector<std::size_t> fill(tree.adj_offsets_.begin(), tree.adj_offsets_.end() - 1);
    for (const auto& a : arcs) {
      tree.adj_[fill[a[0]]++] = a[1];
      tree.adj_[fill[a[1]]++] = a[0];
    }
  }

  // Root at the global minimum.
  tree.parent_.assign(n, kNone);
  tree.bfs_.clear();
  tree.bfs_.reserve(n);
  tree.bfs_.push_back(tree.root());
  std::vector<std::uint8_t> seen(n, 0);
  seen[tree.root()] = 1;
  for (std::size_t k = 0; k < tree.bfs_.size(); ++k) {
    const VertexId v = tree.bfs_[k];
    for (VertexId w : tree.neighbors(v)) {
      if (seen[w]) continue;
      seen[w] = 1;
      tree.parent_[w] = v;
      tree.bfs_.push_back(w);
    }
  }

  // Critical nodes.
  const bool closed = mesh->topology() != Topology::patch;
  std::vector<std::uint8_t> candidate(n, 0);
  if (closed) {
    for (VertexId v = 0; v < n; ++v) candidate[v] = degree[v] == 2;
  }
  const std::vector<std::uint8_t> loop_saddle = link_saddles(*mesh, tree.rank_, candidate);

  std::vector<std::int64_t> node_of(n, -1);
  for (VertexId v : tree.order_) {
    const auto nb = tree.neighbors(v);
    bool node = false;
    NodeKind kind = NodeKind::saddle;
    if (nb.size() == 1) {
      node = true;
      kind = tree.rank_[nb[0]] > tree.rank_[v] ? NodeKind::minimum : NodeKind::maximum;
    } else if (nb.size() >= 3 || loop_saddle[v]) {
      node = true;
    } else if (nb.size() == 2) {
      const bool up0 = tree.rank_[nb[0]] > tree.rank_[v];
      const bool up1 = tree.rank_[nb[1]] > tree.rank_[v];
      if (up0 == up1) {
        node = true;
        kind = up0 ? NodeKind::minimum : NodeKind::maximum;
      }
    }
    if (node) {
      node_of[v] = static_cast<std::int64_t>(tree.nodes_.size());
      tree.nodes_.push_back(TreeNode{v, tree.values_[v], kind});
    }
  }

  tree.vertex_map_.assign(n, VertexLocation{});
  for (std::size_t k = 0; k < tree.nodes_.size(); ++k) tree.vertex_map_[tree.nodes_[k].vertex] = {true, k};

  for (std::size_t s = 0; s < tree.nodes_.size(); ++s) {
    const VertexId start = tree.nodes_[s].vertex;
    for (VertexId first : tree.neighbors(start)) {
      std::vector<VertexId> chain;
      VertexId prev = start;
      VertexId cur = first;
      while (node_of[cur] < 0) {
        chain.push_back(cur);
        const auto nb = tree.neighbors(cur);
        const VertexId next = nb[0] == prev ? nb[1] : nb[0];
        prev = cur;
        cur = next;
      }
      const std::size_t t = static_cast<std::size_t>(node_of[cur]);
      if (t < s) continue;  // each edge is recorded from its smaller node index
      TreeEdge e;
      const bool start_low = tree.rank_[start] < tree.rank_[cur];
      e.lower = start_low ? s : t;
      e.upper = start_low ? t : s;
      if (!start_low) std::reverse(chain.begin(), chain.end());
      e.vertices = std::move(chain);
      const std::size_t edge_index = tree.edges_.size();
      for (VertexId v : e.vertices) {
        tree.vertex_map_[v] = {false, edge_index};
        e.measure += mesh->area_weight(v);
      }
      tree.edges_.push_back(std::move(e));
    }
  }
  // Node weights are shared among incident edges.
  for (TreeEdge& e : tree.edges_) {
    for (std::size_t k : {e.lower, e.upper}) {
      const VertexId v = tree.nodes_[k].vertex;
      e.measure += mesh->area_weight(v) / static_cast<double>(degree[v]);
    }
  }
  return tree;
}

std::vector<double> ContourTree::subtree_sums(std::span<const double> weights) const {
  if (weights.size() != values_.size()) throw std::invalid_argument("subtree_sums: weight count mismatch");
  std::vector<double> sub(weights.begin(), weights.end());
  for (std::size_t k = bfs_.size(); k-- > 1;) {
    const VertexId v = bfs_[k];
    sub[parent_[v]] += sub[v];
  }
  return sub;
}

std::vector<double> ContourTree::branches_at(VertexId v, std::span<const double> subtree) const {
  const double total = subtree[root()];
  std::vector<double> out;
  for (VertexId w : neighbors(v)) {
    out.push_back(parent_[w] == v ? subtree[w] : total - subtree[v]);
  }
  return out;
}

TreePoint ContourTree::point_at(VertexId v) const {
  const VertexLocation& loc = vertex_map_[v];
  return TreePoint{loc.is_node ? TreePoint::Kind::node : TreePoint::Kind::edge, loc.index, values_[v]};
}

std::vector<VertexId> ContourTree::edge_path(std::size_t edge) const {
  const TreeEdge& e = edges_.at(edge);
  std::vector<VertexId> path;
  path.reserve(e.vertices.size() + 2);
  path.push_back(nodes_[e.lower].vertex);
  path.insert(path.end(), e.vertices.begin(), e.vertices.end());
  path.push_back(nodes_[e.upper].vertex);
  return path;
}

nlohmann::json ContourTree::to_json() const {
  nlohmann::ordered_json j;
  j["nodes"] = nlohmann::ordered_json::array();
  for (const TreeNode& nd : nodes_) {
    nlohmann::ordered_json o;
    o["value"] = nd.value;
    o["kind"] = to_string(nd.kind);
    o["vertex"] = nd.vertex;
    j["nodes"].push_back(o);
  }
  j["edges"] = nlohmann::ordered_json::array();
  for (const TreeEdge& e : edges_) {
    nlohmann::ordered_json o;
    o["a"] = e.lower;
    o["b"] = e.upper;
    o["measure"] = e.measure;
    j["edges"].push_back(o);
  }
  return j;
}

std::vector<double> complement_branch_measures(const ContourTree& tree, const TreePoint& point) {
  return complement_branch_measures(tree, point, tree.mesh()->area_weights());
}

std::vector<double> complement_branch_measures(const ContourTree& tree, const TreePoint& point,
                                               std::span<const double> weights) {
  const std::vector<double> sub = tree.subtree_sums(weights);
  const double total = sub[tree.root()];
  if (point.kind == TreePoint::Kind::node) {
    if (point.index >= tree.nodes().size()) throw std::invalid_argument("tree point: node index off the tree");
    const VertexId v = tree.nodes()[point.index].vertex;
    std::vector<double> out = tree.branches_at(v, sub);
    for (double& b : out) b += weights[v] / static_cast<double>(out.size());
    return out;
  }
  if (point.index >= tree.edges().size()) throw std::invalid_argument("tree point: edge index off the tree");
  const std::vector<VertexId> path = tree.edge_path(point.index);
  if (!(point.level >= tree.value(path.front()) && point.level <= tree.value(path.back()))) {
    throw std::invalid_argument("tree point: level outside the edge's value range");
  }
  std::size_t below = 0;
  while (below < path.size() && tree.value(path[below]) < point.level) ++below;
  const std::size_t m = std::clamp<std::size_t>(below, 1, path.size() - 1) - 1;
  const VertexId lo = path[m];
  const VertexId hi = path[m + 1];
  const double low_side = tree.parent(lo) == hi ? sub[lo] : total - sub[hi];
  return {low_side, total - low_side};
}

}  // namespace qstate
