#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lrfk/couplings.hpp"

namespace lrfk {

using VertexId = std::uint32_t;
using EdgeId = std::uint64_t;

// Bijection between unordered vertex pairs {a, b}, a != b, of an n-vertex set
// and [0, n(n-1)/2). Pairs are numbered in colex order: id = b(b-1)/2 + a for
// a < b.
class EdgeIndex {
 public:
  explicit EdgeIndex(std::size_t vertex_count = 0) : n_(vertex_count) {}

  std::size_t vertex_count() const { return n_; }
  EdgeId count() const { return static_cast<EdgeId>(n_) * (n_ == 0 ? 0 : n_ - 1) / 2; }

  EdgeId id(VertexId a, VertexId b) const;
  // Endpoints (smaller first).
  std::pair<VertexId, VertexId> pair(EdgeId e) const;

  bool operator==(const EdgeIndex& other) const = default;

 private:
  std::size_t n_;
};

// One strict ball {x : |x - center| < radius} contributing to a box.
struct Ball {
  LatticeVector center;
  double radius = 1.0;
};

// Finite subset of Z^d: a ball Lambda_n(y) or a union of such balls. Vertices
// are kept in lexicographic order, which fixes the vertex indexing.
class Box {
 public:
  static Box make(int dimension, const LatticeVector& center, double radius, Norm norm);
  static Box unite(const Box& a, const Box& b);

  int dimension() const { return dimension_; }
  Norm norm() const { return norm_; }
  std::size_t size() const { return vertex_count_; }
  const std::vector<Ball>& balls() const { return balls_; }

  std::span<const std::int64_t> vertex(VertexId i) const;
  LatticeVector vertex_vector(VertexId i) const;
  std::optional<VertexId> find(std::span<const std::int64_t> x) const;
  // Throws std::out_of_range when x is not in the box.
  VertexId index(std::span<const std::int64_t> x) const;
  bool contains(std::span<const std::int64_t> x) const { return find(x).has_value(); }

  // |vertex(i) - vertex(j)| in the box's norm.
  double distance(VertexId i, VertexId j) const;
  // |vertex(i) - x|
  double distance_to(VertexId i, std::span<const std::int64_t> x) const;
  // vertex(j) - vertex(i) written into out.
  void difference(VertexId i, VertexId j, std::span<std::int64_t> out) const;

  const EdgeIndex& edges() const { return edges_; }
  EdgeId edge_count() const { return edges_.count(); }
  EdgeId pair_index(std::span<const std::int64_t> x, std::span<const std::int64_t> y) const;
  std::pair<LatticeVector, LatticeVector> pair_of(EdgeId e) const;

  // "d=1;norm=euclidean;balls=(0)@3|(10)@2"
  std::string descriptor() const;
  static Box from_descriptor(const std::string& text);

  // The largest radius of the balls; reported alongside estimates.
  double radius() const;

 private:
  Box(int dimension, Norm norm, std::vector<Ball> balls);

  int dimension_ = 1;
  Norm norm_ = Norm::euclidean;
  std::vector<Ball> balls_;
  std::vector<std::int64_t> coords_;  // vertex-major, dimension_ per vertex
  std::size_t vertex_count_ = 0;
  EdgeIndex edges_;
};

}  // namespace lrfk
