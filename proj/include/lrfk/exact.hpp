#pragma once

// Ground truth by brute force: sums over all 2^m configurations of a tiny box,
// and over all q^|Lambda| Potts spin assignments.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lrfk/fk_model.hpp"

namespace lrfk {

inline constexpr EdgeId kMaxExactEdges = 24;
inline constexpr std::uint64_t kMaxPottsStates = std::uint64_t{1} << 24;

struct EventPredicate {
  std::string name;
  std::function<bool(const Configuration&)> test;
};

struct ExactSummary {
  double log_z = 0.0;
  std::size_t vertex_count = 0;
  VertexId origin = 0;
  std::vector<std::vector<double>> connection;  // mu(x <-> y), symmetric, diagonal 1
  std::vector<double> origin_cluster_size;      // index s: mu(|C(origin)| = s), s = 0..n
  std::vector<std::pair<std::string, double>> events;

  // Sorted "key<TAB>value" lines.
  std::string serialize() const;
  static ExactSummary parse(const std::string& text);
};

struct EnumerateOptions {
  VertexId origin = 0;
  unsigned shard_bits = 16;  // configurations per shard = 2^shard_bits
  unsigned threads = 1;
};

// Throws std::length_error when m exceeds kMaxExactEdges.
ExactSummary enumerate(const FkModel& model, const std::vector<EventPredicate>& predicates = {},
                       const EnumerateOptions& options = {});

// mu(omega) for every configuration, indexed by mask. Needs m <= 22.
std::vector<double> configuration_distribution(const FkModel& model);

struct ConditionalProbability {
  double formula = 0.0;     // w/(1+w) or w/(w+q)
  double enumerated = 0.0;  // ratio of the two configuration masses
  bool endpoints_connected_off_edge = false;
};

// mu(omega_e = 1 | omega restricted to the other edges = rest); the bit of e
// in `rest` is ignored.
ConditionalProbability conditional_edge_probability(const FkModel& model, EdgeId e,
                                                    const Configuration& rest);

// Truth table of an event over the masks of one box.
struct EventTable {
  std::string name;
  std::vector<bool> holds;  // index: configuration mask
};

EventTable tabulate(const FkModel& model, const EventPredicate& predicate);

// Exhaustive single-flip audit: every 0 -> 1 flip preserves membership.
bool is_increasing(const EventTable& event, EdgeId edge_count);

struct MonotonicityResult {
  double p1 = 0.0;
  double p2 = 0.0;
  bool holds = false;  // p1 <= p2 + tolerance
};

// `event` lives on model1's edges. model2's box must contain model1's box;
// the event is read on the restriction of model2's configurations.
// Throws std::invalid_argument when the event fails the increasing audit.
MonotonicityResult monotonicity_check(const FkModel& model1, const FkModel& model2,
                                      const EventTable& event, double tolerance = 1e-12);

// P(sigma_x = sigma_y) for the Potts Gibbs measure with energy
// sum over pairs of J_{x,y} [sigma_x != sigma_y].
std::vector<std::vector<double>> potts_enumerate(const Box& box, const CouplingSpec& coupling,
                                                 double beta, int q);

// max over pairs of |P(sigma_x = sigma_y) - 1/q - (q-1)/q mu(x <-> y)| with mu
// under the given convention.
double es_identity_check(const Box& box, const CouplingSpec& coupling, double beta, int q,
                         WeightConvention convention = WeightConvention::es);

}  // namespace lrfk
