#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "json.hpp"
#include "qstate/mesh.hpp"

namespace qstate {

enum class NodeKind { minimum, maximum, saddle };

const char* to_string(NodeKind k);

struct TreeNode {
  VertexId vertex = 0;
  double value = 0.0;
  NodeKind kind = NodeKind::minimum;
};

/// Arc between two critical nodes; `lower` has the smaller (perturbed) value.
/// `vertices` lists the regular vertices strictly inside the arc, ascending.
struct TreeEdge {
  std::size_t lower = 0;
  std::size_t upper = 0;
  double measure = 0.0;
  std::vector<VertexId> vertices;
};

/// Where a mesh vertex sits in the reduced tree.
struct VertexLocation {
  bool is_node = false;
  std::size_t index = 0;
};

/// A point of the tree: a node, or a level strictly inside an edge.
struct TreePoint {
  enum class Kind { node, edge };
  Kind kind = Kind::node;
  std::size_t index = 0;
  double level = 0.0;

  bool operator==(const TreePoint&) const = default;
};

/// Contour tree of a vertex field, built by merging the join tree (sublevel
/// components) with the split tree (superlevel components) after ordering
/// vertices by (value, index).
///
/// Besides the reduced tree of critical nodes it keeps the augmented tree, in
/// which every mesh vertex is a node; it is rooted at the global minimum.
/// On the torus the merge cannot represent the cycle of the level-set graph:
/// vertices whose link changes topology without changing any sub/superlevel
/// component count are kept as degree-two saddle nodes.
class ContourTree {
 public:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  const MeshPtr& mesh() const { return mesh_; }
  std::span<const TreeNode> nodes() const { return nodes_; }
  std::span<const TreeEdge> edges() const { return edges_; }
  const VertexLocation& location(VertexId v) const { return vertex_map_[v]; }

  double value(VertexId v) const { return values_[v]; }
  std::span<const double> values() const { return values_; }
  /// Position of v in the ascending (value, index) order.
  std::uint32_t rank(VertexId v) const { return rank_[v]; }

  // Augmented tree.
  VertexId root() const { return order_.front(); }
  std::uint32_t parent(VertexId v) const { return parent_[v]; }
  std::span<const VertexId> neighbors(VertexId v) const {
    return {adj_.data() + adj_offsets_[v], adj_.data() + adj_offsets_[v + 1]};
  }
  /// Vertices in breadth-first order from the root (parents before children).
  std::span<const VertexId> bfs_order() const { return bfs_; }

  /// Per-vertex sum of `weights` over the augmented subtree hanging at it.
  std::vector<double> subtree_sums(std::span<const double> weights) const;

  /// Measure of every component of the tree with v removed, one per augmented
  /// neighbor, excluding v's own weight. `subtree` comes from subtree_sums.
  std::vector<double> branches_at(VertexId v, std::span<const double> subtree) const;

  /// Reduced-tree location of a vertex as a TreePoint at its own level.
  TreePoint point_at(VertexId v) const;

  /// Sequence of vertices along an edge from its lower node to its upper node.
  std::vector<VertexId> edge_path(std::size_t edge) const;

  nlohmann::json to_json() const;

  friend ContourTree build_contour_tree(const ScalarField& field);

 private:
  MeshPtr mesh_;
  std::vector<double> values_;
  std::vector<VertexId> order_;
  std::vector<std::uint32_t> rank_;
  std::vector<TreeNode> nodes_;
  std::vector<TreeEdge> edges_;
  std::vector<VertexLocation> vertex_map_;
  std::vector<std::uint32_t> parent_;
  std::vector<std::size_t> adj_offsets_;
  std::vector<VertexId> adj_;
  std::vector<VertexId> bfs_;
};

/// Throws std::invalid_argument for non-finite values and std::runtime_error
/// when the join and split trees cannot be merged.
ContourTree build_contour_tree(const ScalarField& field);

/// Measure of each component of the tree minus the point, using mesh area
/// weights (or the given weights). A node's own weight is shared equally among
/// its branches, so the result sums to the total. Throws std::invalid_argument
/// for a point off the tree.
std::vector<double> complement_branch_measures(const ContourTree& tree, const TreePoint& point);
std::vector<double> complement_branch_measures(const ContourTree& tree, const TreePoint& point,
                                               std::span<const double> weights);

}  // namespace qstate
