#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lrfk/clusters.hpp"
#include "lrfk/fk_model.hpp"
#include "lrfk/random.hpp"

namespace lrfk {

// Product-Bernoulli bond table: edges sorted by descending p_e (ties by edge
// id) with cumulative sums of log(1 - p_e). Edges with p_e = 0 are left out;
// edges with p_e = 1 are kept apart and always open.
class BondTable {
 public:
  BondTable() = default;
  explicit BondTable(const FkModel& model);

  std::size_t vertex_count() const { return index_.vertex_count(); }
  const EdgeIndex& edges() const { return index_; }
  // Edges in sampling order, p_e in (0,1).
  const std::vector<EdgeId>& order() const { return order_; }
  // cumulative()[k] = sum_{j<k} log(1 - p_{order[j]}); size order().size()+1.
  const std::vector<double>& cumulative() const { return cumulative_; }
  const std::vector<EdgeId>& certain() const { return certain_; }
  double probability(EdgeId e) const { return p_[e]; }
  // Expected number of candidate opens per draw.
  double expected_opens() const { return expected_; }

 private:
  EdgeIndex index_;
  std::vector<EdgeId> order_;
  std::vector<double> cumulative_;
  std::vector<EdgeId> certain_;
  std::vector<double> p_;
  double expected_ = 0.0;
};

// All edges open independently with their p_e, then those joining different
// colours dropped. Empty `colors` skips the filter. Output in increasing id.
std::vector<EdgeId> sample_bonds_fast(const std::vector<int>& colors, const BondTable& table, Rng& rng);
// Reference loop over all m edges.
std::vector<EdgeId> sample_bonds_naive(const std::vector<int>& colors, const BondTable& table, Rng& rng);

enum class Algorithm { heat_bath, es, alternating };
Algorithm parse_algorithm(std::string_view name);
std::string_view to_string(Algorithm a);

// Current configuration with its clusters, the colours of the last colour
// step and the chain's generator.
class ChainState {
 public:
  ChainState(const FkModel& model, std::uint64_t seed);

  const FkModel& model() const { return *model_; }
  const Configuration& configuration() const { return config_; }
  const OpenGraph& graph() const { return graph_; }
  const ClusterLabels& labels() const { return labels_; }
  const std::vector<int>& colors() const { return colors_; }
  std::uint64_t sweeps() const { return sweeps_; }
  Rng& rng() { return rng_; }

  // Recomputes the labels from scratch; true when they match.
  bool validate() const;

  void heat_bath_sweep();
  // Requires a shared bond table built for the same model.
  void es_sweep(const BondTable& table);

  void set_configuration(const Configuration& config);

 private:
  void relabel();

  const FkModel* model_;
  Configuration config_;
  OpenGraph graph_;
  ClusterLabels labels_;
  std::vector<int> colors_;
  std::vector<EdgeId> open_;  // open edges after an ES bond step
  bool open_valid_ = true;
  std::uint64_t sweeps_ = 0;
  Rng rng_;
  std::vector<double> hb_weight_;  // w_e cache for heat-bath
};

struct Schedule {
  std::uint64_t sweeps = 0;
  std::optional<std::uint64_t> burn_in;  // unset: chosen from a pilot run
  std::uint64_t thinning = 1;
};

struct RunManifest {
  std::string model;
  std::uint64_t model_hash = 0;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::heat_bath;
  std::uint64_t sweeps = 0;
  std::uint64_t burn_in = 0;
  std::uint64_t thinning = 1;
  std::uint64_t samples = 0;
  double pilot_tau = 0.0;  // set when burn-in came from a pilot

  // key=value lines
  std::string to_text() const;
};

// Pilot statistic for the automatic burn-in: |C(origin)|.
struct RunOptions {
  VertexId pilot_origin = 0;
  const BondTable* table = nullptr;  // built on demand when null
};

// Runs one chain and calls `observe` on every kept sweep. Deterministic in
// (model, algorithm, schedule, seed).
RunManifest run_chain(const FkModel& model, Algorithm algorithm, const Schedule& schedule,
                      std::uint64_t seed, const std::function<void(const ChainState&)>& observe,
                      const RunOptions& options = {});

// ES needs an integer q >= 1 and the es convention.
void require_es_compatible(const FkModel& model);

}  // namespace lrfk
