#pragma once

// Bridge quantities of a configuration around a pair (origin, target):
// L_{0,x}, the maximal edge, the cluster radii R_0 and R_x, and the
// pigeonhole observation. All of them are in-box: sup's range over open
// edges of the box only.

#include <optional>
#include <utility>

#include "lrfk/clusters.hpp"
#include "lrfk/lattice.hpp"

namespace lrfk {

using VertexPair = std::pair<VertexId, VertexId>;

struct BridgeDiagnostics {
  bool connected = false;
  std::size_t origin_cluster_size = 0;

  // Absent when no open edge has the origin on one side and the target on the
  // other after its removal.
  std::optional<double> L;
  std::optional<VertexPair> maximal_edge_origin;  // smaller index first
  std::optional<VertexPair> maximal_edge_target;
  double R0 = 0.0;  // R^0 of C(0) with the origin's maximal edge removed
  double Rx = 0.0;

  // Pigeonhole: when connected with |C(0)| <= f, some open edge of C(0) has
  // length >= |x| / f.
  double longest_edge = 0.0;  // longest open edge inside C(0)
  bool pigeonhole_qualifying = false;
  bool pigeonhole_holds = true;
};

BridgeDiagnostics bridge_diagnostics(const Box& box, const OpenGraph& graph, VertexId origin,
                                     VertexId target, double f_value);
BridgeDiagnostics bridge_diagnostics(const Box& box, const Configuration& config, VertexId origin,
                                     VertexId target, double f_value);

// f(x) = -2 log(J_{0,x}) / c1
double cutoff_f(double j0x, double c1);

}  // namespace lrfk
