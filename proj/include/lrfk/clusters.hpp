#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lrfk/fk_model.hpp"

namespace lrfk {

// Union-find with path halving and union by size.
class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n = 0) { reset(n); }

  void reset(std::size_t n);
  VertexId find(VertexId v);
  // Returns true when a and b were in different sets.
  bool unite(VertexId a, VertexId b);
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<VertexId> parent_;
  std::vector<VertexId> size_;
};

// Canonical component labelling: components are numbered 0..k-1 in order of
// their smallest vertex, which is also their representative.
struct ClusterLabels {
  std::vector<std::uint32_t> label;           // per vertex
  std::vector<std::uint32_t> sizes;           // per component
  std::vector<VertexId> representative;       // smallest vertex of each component

  std::size_t count() const { return sizes.size(); }  // k(omega)
  std::uint32_t size_of(VertexId v) const { return sizes[label[v]]; }
};

ClusterLabels cluster_labels(const Configuration& config);
// Labels for an explicit open-edge list over n vertices.
ClusterLabels cluster_labels(std::size_t vertex_count, std::span<const EdgeId> open_edges);
// Number of components only, reusing the caller's scratch set.
std::size_t count_components(const Configuration& config, DisjointSet& scratch);

bool connected(const Configuration& config, VertexId x, VertexId y);
// Vertices of x's cluster in increasing index order.
std::vector<VertexId> cluster_of(const Configuration& config, VertexId x);

// Adjacency lists of the open subgraph.
class OpenGraph {
 public:
  OpenGraph() = default;
  explicit OpenGraph(const Configuration& config);
  OpenGraph(std::size_t vertex_count, std::span<const EdgeId> open_edges);

  std::size_t vertex_count() const { return adj_.size(); }
  const std::vector<VertexId>& neighbors(VertexId v) const { return adj_[v]; }

  void add_edge(VertexId a, VertexId b);
  void remove_edge(VertexId a, VertexId b);
  void clear();
  void resize(std::size_t n) { adj_.assign(n, {}); }

  // Vertices reachable from `from`, optionally pretending the edge
  // {skip_a, skip_b} is closed. Increasing index order.
  std::vector<VertexId> component(VertexId from, VertexId skip_a = kNone,
                                  VertexId skip_b = kNone) const;
  bool reaches(VertexId from, VertexId to, VertexId skip_a = kNone, VertexId skip_b = kNone) const;

  static constexpr VertexId kNone = ~VertexId{0};

 private:
  std::vector<std::vector<VertexId>> adj_;
};

}  // namespace lrfk
