#include "lrfk/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lrfk {

namespace {

bool member(const std::vector<VertexId>& sorted, VertexId v) {
  return std::binary_search(sorted.begin(), sorted.end(), v);
}

double radius_from(const Box& box, VertexId y, const std::vector<VertexId>& component) {
  double r = 0.0;
  for (VertexId z : component) r = std::max(r, box.distance(y, z));
  return r;
}

struct Candidate {
  VertexPair edge;
  double length;
};

// Among the candidates of maximal length, the one maximizing R^y of y's
// component with the edge removed, then the smallest pair.
std::pair<VertexPair, double> maximal_for(const Box& box, const OpenGraph& g, VertexId y,
                                          const std::vector<Candidate>& best) {
  VertexPair chosen = best.front().edge;
  double chosen_r = -1.0;
  for (const auto& c : best) {
    const double r = radius_from(box, y, g.component(y, c.edge.first, c.edge.second));
    if (r > chosen_r || (r == chosen_r && c.edge < chosen)) {
      chosen = c.edge;
      chosen_r = r;
    }
  }
  return {chosen, chosen_r};
}

}  // namespace

double cutoff_f(double j0x, double c1) {
  if (!(c1 > 0.0)) throw std::invalid_argument("c1 must be positive");
  return -2.0 * std::log(j0x) / c1;
}

BridgeDiagnostics bridge_diagnostics(const Box& box, const OpenGraph& g, VertexId origin,
                                     VertexId target, double f_value) {
  if (origin == target) throw std::invalid_argument("origin and target must differ");
  if (origin >= g.vertex_count() || target >= g.vertex_count())
    throw std::out_of_range("origin or target outside the box");

  BridgeDiagnostics out;
  const auto c0 = g.component(origin);
  out.origin_cluster_size = c0.size();
  out.connected = member(c0, target);

  std::vector<Candidate> edges;
  for (VertexId v : c0)
    for (VertexId w : g.neighbors(v))
      if (v < w) edges.push_back({{v, w}, box.distance(v, w)});
  for (const auto& e : edges) out.longest_edge = std::max(out.longest_edge, e.length);

  const double abs_x = box.distance(origin, target);
  if (out.connected && static_cast<double>(c0.size()) <= f_value) {
    out.pigeonhole_qualifying = true;
    out.pigeonhole_holds = out.longest_edge >= abs_x / f_value;
  }

  if (out.connected) {
    std::sort(edges.begin(), edges.end(), [](const Candidate& a, const Candidate& b) {
      return a.length != b.length ? a.length > b.length : a.edge < b.edge;
    });
    std::vector<Candidate> best;
    for (const auto& e : edges) {
      if (!best.empty() && e.length < best.front().length) break;
      auto [a, b] = e.edge;
      const auto side0 = g.component(origin, a, b);
      const auto sidex = g.component(target, a, b);
      const bool qualifies = (member(side0, a) && member(sidex, b)) ||
                             (member(side0, b) && member(sidex, a));
      if (qualifies) best.push_back(e);
    }
    if (!best.empty()) {
      out.L = best.front().length;
      auto [e0, r0] = maximal_for(box, g, origin, best);
      auto [ex, rx] = maximal_for(box, g, target, best);
      out.maximal_edge_origin = e0;
      out.maximal_edge_target = ex;
      out.R0 = r0;
      out.Rx = rx;
      return out;
    }
  }
  out.R0 = radius_from(box, origin, c0);
  out.Rx = out.connected ? radius_from(box, target, c0) : radius_from(box, target, g.component(target));
  return out;
}

BridgeDiagnostics bridge_diagnostics(const Box& box, const Configuration& config, VertexId origin,
                                     VertexId target, double f_value) {
  if (config.vertex_count() != box.size())
    throw std::invalid_argument("configuration does not belong to this box");
  return bridge_diagnostics(box, OpenGraph(config), origin, target, f_value);
}

}  // namespace lrfk
