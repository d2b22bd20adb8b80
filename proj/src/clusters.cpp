#include "lrfk/clusters.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace lrfk {

void DisjointSet::reset(std::size_t n) {
  parent_.resize(n);
  std::iota(parent_.begin(), parent_.end(), VertexId{0});
  size_.assign(n, 1);
}

VertexId DisjointSet::find(VertexId v) {
  while (parent_[v] != v) {
    parent_[v] = parent_[parent_[v]];
    v = parent_[v];
  }
  return v;
}

bool DisjointSet::unite(VertexId a, VertexId b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
  return true;
}

namespace {

ClusterLabels canonical(DisjointSet& ds) {
  const std::size_t n = ds.size();
  ClusterLabels out;
  out.label.assign(n, 0);
  constexpr auto unset = ~std::uint32_t{0};
  std::vector<std::uint32_t> root_label(n, unset);
  for (VertexId v = 0; v < n; ++v) {
    const VertexId r = ds.find(v);
    if (root_label[r] == unset) {
      root_label[r] = static_cast<std::uint32_t>(out.sizes.size());
      out.sizes.push_back(0);
      out.representative.push_back(v);
    }
    out.label[v] = root_label[r];
    ++out.sizes[root_label[r]];
  }
  return out;
}

}  // namespace

ClusterLabels cluster_labels(const Configuration& config) {
  DisjointSet ds(config.vertex_count());
  const std::size_t n = config.vertex_count();
  EdgeId e = 0;
  for (VertexId b = 1; b < n; ++b)
    for (VertexId a = 0; a < b; ++a, ++e)
      if (config.test(e)) ds.unite(a, b);
  return canonical(ds);
}

ClusterLabels cluster_labels(std::size_t vertex_count, std::span<const EdgeId> open_edges) {
  DisjointSet ds(vertex_count);
  EdgeIndex idx(vertex_count);
  for (EdgeId e : open_edges) {
    auto [a, b] = idx.pair(e);
    ds.unite(a, b);
  }
  return canonical(ds);
}

std::size_t count_components(const Configuration& config, DisjointSet& ds) {
  const std::size_t n = config.vertex_count();
  ds.reset(n);
  std::size_t k = n;
  EdgeId e = 0;
  for (VertexId b = 1; b < n; ++b)
    for (VertexId a = 0; a < b; ++a, ++e)
      if (config.test(e) && ds.unite(a, b)) --k;
  return k;
}

bool connected(const Configuration& config, VertexId x, VertexId y) {
  if (x >= config.vertex_count() || y >= config.vertex_count())
    throw std::out_of_range("vertex outside the configuration's box");
  if (x == y) return true;
  return OpenGraph(config).reaches(x, y);
}

std::vector<VertexId> cluster_of(const Configuration& config, VertexId x) {
  if (x >= config.vertex_count()) throw std::out_of_range("vertex outside the configuration's box");
  return OpenGraph(config).component(x);
}

OpenGraph::OpenGraph(const Configuration& config) : adj_(config.vertex_count()) {
  const std::size_t n = config.vertex_count();
  EdgeId e = 0;
  for (VertexId b = 1; b < n; ++b)
    for (VertexId a = 0; a < b; ++a, ++e)
      if (config.test(e)) add_edge(a, b);
}

OpenGraph::OpenGraph(std::size_t vertex_count, std::span<const EdgeId> open_edges)
    : adj_(vertex_count) {
  EdgeIndex idx(vertex_count);
  for (EdgeId e : open_edges) {
    auto [a, b] = idx.pair(e);
    add_edge(a, b);
  }
}

void OpenGraph::add_edge(VertexId a, VertexId b) {
  adj_[a].push_back(b);
  adj_[b].push_back(a);
}

void OpenGraph::remove_edge(VertexId a, VertexId b) {
  auto drop = [](std::vector<VertexId>& v, VertexId x) {
    auto it = std::find(v.begin(), v.end(), x);
    if (it == v.end()) throw std::logic_error("removing an edge that is not open");
    *it = v.back();
    v.pop_back();
  };
  drop(adj_[a], b);
  drop(adj_[b], a);
}

void OpenGraph::clear() {
  for (auto& v : adj_) v.clear();
}

std::vector<VertexId> OpenGraph::component(VertexId from, VertexId skip_a, VertexId skip_b) const {
  std::vector<VertexId> seen{from};
  std::vector<VertexId> stack{from};
  // Clusters are usually tiny next to the box, so large boxes use a hash set
  // instead of an O(n) bitmap per call.
  const bool dense = adj_.size() <= 4096;
  std::vector<char> mark;
  std::unordered_set<VertexId> visited;
  if (dense) {
    mark.assign(adj_.size(), 0);
    mark[from] = 1;
  } else {
    visited.insert(from);
  }
  while (!stack.empty()) {
    VertexId v = stack.back();
    stack.pop_back();
    for (VertexId w : adj_[v]) {
      if ((v == skip_a && w == skip_b) || (v == skip_b && w == skip_a)) continue;
      if (dense) {
        if (mark[w]) continue;
        mark[w] = 1;
      } else if (!visited.insert(w).second) {
        continue;
      }
      seen.push_back(w);
      stack.push_back(w);
    }
  }
  std::sort(seen.begin(), seen.end());
  return seen;
}

bool OpenGraph::reaches(VertexId from, VertexId to, VertexId skip_a, VertexId skip_b) const {
  if (from == to) return true;
  auto c = component(from, skip_a, skip_b);
  return std::binary_search(c.begin(), c.end(), to);
}

}  // namespace lrfk
