#include "lrfk/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lrfk/stats.hpp"
#include "lrfk/text.hpp"

namespace lrfk {

// --- bond table ------------------------------------------------------------

BondTable::BondTable(const FkModel& model) : index_(model.box().size()) {
  const EdgeId m = model.edge_count();
  p_.resize(m);
  std::vector<std::pair<double, EdgeId>> sorted;
  sorted.reserve(m);
  long double expected = 0;
  for (EdgeId e = 0; e < m; ++e) {
    const double p = model.bond_probability(e);
    p_[e] = p;
    expected += p;
    if (p >= 1.0)
      certain_.push_back(e);
    else if (p > 0.0)
      sorted.emplace_back(p, e);
  }
  expected_ = static_cast<double>(expected);
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  order_.resize(sorted.size());
  cumulative_.resize(sorted.size() + 1);
  long double c = 0;
  cumulative_[0] = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    order_[k] = sorted[k].second;
    c += std::log1p(-static_cast<long double>(sorted[k].first));
    cumulative_[k + 1] = static_cast<double>(c);
  }
}

namespace {

bool same_color(const std::vector<int>& colors, const EdgeIndex& idx, EdgeId e) {
  if (colors.empty()) return true;
  auto [a, b] = idx.pair(e);
  return colors[a] == colors[b];
}

}  // namespace

std::vector<EdgeId> sample_bonds_fast(const std::vector<int>& colors, const BondTable& table, Rng& rng) {
  std::vector<EdgeId> out;
  for (EdgeId e : table.certain())
    if (same_color(colors, table.edges(), e)) out.push_back(e);
  const auto& c = table.cumulative();
  const auto& order = table.order();
  std::size_t pos = 0;
  while (pos < order.size()) {
    // The first open edge at or after pos is the smallest k with
    // c[k+1] < c[pos] + log u.
    const double target = c[pos] + std::log(rng.uniform_positive());
    auto it = std::partition_point(c.begin() + static_cast<std::ptrdiff_t>(pos) + 1, c.end(),
                                   [target](double v) { return v >= target; });
    if (it == c.end()) break;
    const auto k = static_cast<std::size_t>(it - c.begin()) - 1;
    if (same_color(colors, table.edges(), order[k])) out.push_back(order[k]);
    pos = k + 1;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<EdgeId> sample_bonds_naive(const std::vector<int>& colors, const BondTable& table, Rng& rng) {
  std::vector<EdgeId> out;
  const EdgeId m = table.edges().count();
  for (EdgeId e = 0; e < m; ++e)
    if (rng.bernoulli(table.probability(e)) && same_color(colors, table.edges(), e)) out.push_back(e);
  return out;
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "heat_bath") return Algorithm::heat_bath;
  if (name == "es") return Algorithm::es;
  if (name == "alternating") return Algorithm::alternating;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::heat_bath: return "heat_bath";
    case Algorithm::es: return "es";
    case Algorithm::alternating: return "alternating";
  }
  return "?";
}

void require_es_compatible(const FkModel& model) {
  if (model.convention() != WeightConvention::es)
    throw std::invalid_argument("the Edwards-Sokal sampler needs convention = es");
  const double q = model.q();
  if (q != std::floor(q) || q < 1.0) throw std::invalid_argument("the Edwards-Sokal sampler needs integer q");
}

// --- chain state -----------------------------------------------------------

ChainState::ChainState(const FkModel& model, std::uint64_t seed)
    : model_(&model), config_(model.box().size()), rng_(seed) {
  graph_.resize(model.box().size());
  relabel();
}

void ChainState::relabel() {
  if (!open_valid_) {
    open_ = config_.open_edges();
    open_valid_ = true;
  }
  labels_ = cluster_labels(config_.vertex_count(), open_);
}

bool ChainState::validate() const {
  const auto fresh = cluster_labels(config_);
  if (fresh.label != labels_.label || fresh.sizes != labels_.sizes) return false;
  for (VertexId v = 0; v < graph_.vertex_count(); ++v)
    for (VertexId w : graph_.neighbors(v))
      if (!config_.is_open(v, w)) return false;
  std::size_t degree_sum = 0;
  for (VertexId v = 0; v < graph_.vertex_count(); ++v) degree_sum += graph_.neighbors(v).size();
  return degree_sum == 2 * config_.open_count();
}

void ChainState::set_configuration(const Configuration& config) {
  if (config.vertex_count() != config_.vertex_count())
    throw std::invalid_argument("configuration does not belong to the chain's box");
  config_ = config;
  graph_ = OpenGraph(config_);
  open_valid_ = false;
  relabel();
}

void ChainState::heat_bath_sweep() {
  const FkModel& model = *model_;
  const std::size_t n = config_.vertex_count();
  const EdgeId m = config_.size();
  if (hb_weight_.empty() && m <= (EdgeId{1} << 22)) {
    hb_weight_.resize(m);
    for (EdgeId e = 0; e < m; ++e) hb_weight_[e] = model.edge_weight(e);
  }
  const double q = model.q();

  // Working cluster ids; fresh ids on a split.
  std::vector<std::uint32_t> id(labels_.label);
  std::uint32_t next = static_cast<std::uint32_t>(labels_.count());
  auto paint = [&](VertexId from, std::uint32_t value) {
    for (VertexId v : graph_.component(from)) id[v] = value;
  };

  EdgeId e = 0;
  for (VertexId b = 1; b < n; ++b) {
    for (VertexId a = 0; a < b; ++a, ++e) {
      const bool was_open = config_.test(e);
      const bool linked = was_open ? graph_.reaches(a, b, a, b) : id[a] == id[b];
      const double w = hb_weight_.empty() ? model.edge_weight(e) : hb_weight_[e];
      const double p = linked ? w / (1.0 + w) : w / (w + q);
      const bool now_open = rng_.uniform() < p;
      if (now_open == was_open) continue;
      config_.set(e, now_open);
      if (now_open) {
        graph_.add_edge(a, b);
        if (!linked) paint(b, id[a]);
      } else {
        graph_.remove_edge(a, b);
        if (!linked) paint(b, next++);
      }
    }
  }
  open_valid_ = false;
  relabel();
  colors_.clear();
  ++sweeps_;
}

void ChainState::es_sweep(const BondTable& table) {
  const std::size_t n = config_.vertex_count();
  if (table.vertex_count() != n) throw std::invalid_argument("bond table built for another box");
  const auto q = static_cast<std::uint64_t>(model_->q());

  std::vector<int> cluster_color(labels_.count());
  for (auto& c : cluster_color) c = static_cast<int>(rng_.below(q));
  colors_.resize(n);
  for (VertexId v = 0; v < n; ++v) colors_[v] = cluster_color[labels_.label[v]];

  if (!open_valid_) open_ = config_.open_edges();
  for (EdgeId e : open_) config_.set(e, false);
  graph_.clear();
  open_ = sample_bonds_fast(colors_, table, rng_);
  open_valid_ = true;
  const auto& idx = config_.edges();
  for (EdgeId e : open_) {
    config_.set(e, true);
    auto [a, b] = idx.pair(e);
    graph_.add_edge(a, b);
  }
  relabel();
  ++sweeps_;
}

// --- runs ------------------------------------------------------------------

std::string RunManifest::to_text() const {
  std::ostringstream os;
  os << "model=" << model << "\nmodel_hash=" << hex64(model_hash) << "\nseed=" << seed
     << "\nalgorithm=" << to_string(algorithm) << "\nsweeps=" << sweeps << "\nburn_in=" << burn_in
     << "\nthinning=" << thinning << "\nsamples=" << samples;
  if (pilot_tau > 0.0) os << "\npilot_tau=" << format_double(pilot_tau);
  os << "\n";
  return os.str();
}

RunManifest run_chain(const FkModel& model, Algorithm algorithm, const Schedule& schedule,
                      std::uint64_t seed, const std::function<void(const ChainState&)>& observe,
                      const RunOptions& options) {
  if (schedule.thinning < 1) throw std::invalid_argument("thinning must be >= 1");
  if (schedule.burn_in && *schedule.burn_in >= schedule.sweeps)
    throw std::invalid_argument("sweeps must exceed burn_in");
  if (schedule.sweeps == 0) throw std::invalid_argument("sweeps must be positive");

  std::unique_ptr<BondTable> own;
  const BondTable* table = options.table;
  if (algorithm != Algorithm::heat_bath) {
    require_es_compatible(model);
    if (!table) {
      own = std::make_unique<BondTable>(model);
      table = own.get();
    }
  }

  ChainState state(model, seed);
  auto step = [&] {
    if (algorithm != Algorithm::heat_bath) state.es_sweep(*table);
    if (algorithm != Algorithm::es) state.heat_bath_sweep();
  };

  RunManifest man;
  man.model = model.describe();
  man.model_hash = model.hash();
  man.seed = seed;
  man.algorithm = algorithm;
  man.sweeps = schedule.sweeps;
  man.thinning = schedule.thinning;

  if (schedule.burn_in) {
    man.burn_in = *schedule.burn_in;
    for (std::uint64_t s = 0; s < man.burn_in; ++s) step();
  } else {
    const std::uint64_t pilot = std::min<std::uint64_t>(1000, schedule.sweeps / 4);
    std::vector<double> sizes;
    sizes.reserve(pilot);
    for (std::uint64_t s = 0; s < pilot; ++s) {
      step();
      sizes.push_back(state.labels().size_of(options.pilot_origin));
    }
    man.pilot_tau = integrated_autocorrelation(sizes);
    man.burn_in = std::max<std::uint64_t>(pilot, static_cast<std::uint64_t>(std::ceil(10.0 * man.pilot_tau)));
    if (man.burn_in >= schedule.sweeps)
      throw std::invalid_argument("automatic burn-in of " + std::to_string(man.burn_in) +
                                  " sweeps leaves nothing to sample");
    for (std::uint64_t s = pilot; s < man.burn_in; ++s) step();
  }

  for (std::uint64_t s = 1; s <= schedule.sweeps - man.burn_in; ++s) {
    step();
    if (s % schedule.thinning == 0) {
      observe(state);
      ++man.samples;
    }
  }
  return man;
}

}  // namespace lrfk
