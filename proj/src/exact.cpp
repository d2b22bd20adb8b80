#include "lrfk/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lrfk/clusters.hpp"
#include "lrfk/text.hpp"

namespace lrfk {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_small(const FkModel& model, EdgeId cap) {
  if (model.edge_count() > cap)
    throw std::length_error("exact enumeration is capped at m <= " + std::to_string(cap) +
                            " edges; this box has m = " + std::to_string(model.edge_count()));
}

// Per-mask evaluation with fixed-size union-find over at most a few vertices.
class MaskEvaluator {
 public:
  explicit MaskEvaluator(const FkModel& model)
      : n_(model.box().size()), q_log_(std::log(model.q())) {
    const EdgeId m = model.edge_count();
    for (EdgeId e = 0; e < m; ++e) {
      auto [a, b] = model.box().edges().pair(e);
      ends_.push_back({a, b});
      log_w_.push_back(model.log_edge_weight(e));
    }
    parent_.resize(n_);
  }

  // Fills root labels; returns the number of components.
  std::size_t label(std::uint64_t mask) {
    for (std::size_t v = 0; v < n_; ++v) parent_[v] = static_cast<VertexId>(v);
    std::size_t k = n_;
    while (mask) {
      const int e = std::countr_zero(mask);
      mask &= mask - 1;
      VertexId a = find(ends_[e].first), b = find(ends_[e].second);
      if (a != b) {
        parent_[std::max(a, b)] = std::min(a, b);
        --k;
      }
    }
    for (std::size_t v = 0; v < n_; ++v) parent_[v] = find(static_cast<VertexId>(v));
    return k;
  }

  double log_weight(std::uint64_t mask) {
    double lw = static_cast<double>(label(mask)) * q_log_;
    while (mask) {
      const int e = std::countr_zero(mask);
      mask &= mask - 1;
      lw += log_w_[e];
    }
    return lw;
  }

  VertexId root(VertexId v) const { return parent_[v]; }
  std::size_t vertex_count() const { return n_; }

 private:
  VertexId find(VertexId v) {
    while (parent_[v] != v) v = parent_[v] = parent_[parent_[v]];
    return v;
  }

  std::size_t n_;
  double q_log_;
  std::vector<std::pair<VertexId, VertexId>> ends_;
  std::vector<double> log_w_;
  std::vector<VertexId> parent_;
};

// Sums relative to exp(shift).
struct Partial {
  double shift = kNegInf;
  long double z = 0;
  std::vector<long double> conn;   // n*n, upper triangle used
  std::vector<long double> sizes;  // n+1
  std::vector<long double> events;

  void rescale(double to) {
    const long double f = shift == kNegInf ? 0.0L : std::exp(static_cast<long double>(shift - to));
    z *= f;
    for (auto& v : conn) v *= f;
    for (auto& v : sizes) v *= f;
    for (auto& v : events) v *= f;
    shift = to;
  }
};

Partial combine(Partial a, Partial b) {
  const double to = std::max(a.shift, b.shift);
  if (to == kNegInf) return a;
  a.rescale(to);
  b.rescale(to);
  a.z += b.z;
  for (std::size_t i = 0; i < a.conn.size(); ++i) a.conn[i] += b.conn[i];
  for (std::size_t i = 0; i < a.sizes.size(); ++i) a.sizes[i] += b.sizes[i];
  for (std::size_t i = 0; i < a.events.size(); ++i) a.events[i] += b.events[i];
  return a;
}

Partial run_shard(const FkModel& model, const std::vector<EventPredicate>& predicates,
                  VertexId origin, std::uint64_t begin, std::uint64_t end) {
  MaskEvaluator ev(model);
  const std::size_t n = ev.vertex_count();
  Partial p;
  p.conn.assign(n * n, 0);
  p.sizes.assign(n + 1, 0);
  p.events.assign(predicates.size(), 0);

  std::vector<double> lw(end - begin);
  for (std::uint64_t s = begin; s < end; ++s) {
    lw[s - begin] = ev.log_weight(s);
    p.shift = std::max(p.shift, lw[s - begin]);
  }
  if (p.shift == kNegInf) return p;

  Configuration config(n);
  std::vector<std::uint32_t> count(n);
  for (std::uint64_t s = begin; s < end; ++s) {
    const long double w = std::exp(static_cast<long double>(lw[s - begin] - p.shift));
    if (w == 0) continue;
    p.z += w;
    ev.label(s);
    std::fill(count.begin(), count.end(), 0);
    for (VertexId v = 0; v < n; ++v) ++count[ev.root(v)];
    p.sizes[count[ev.root(origin)]] += w;
    for (VertexId a = 0; a < n; ++a)
      for (VertexId b = a + 1; b < n; ++b)
        if (ev.root(a) == ev.root(b)) p.conn[a * n + b] += w;
    if (!predicates.empty()) {
      config.assign_mask(s);
      for (std::size_t i = 0; i < predicates.size(); ++i)
        if (predicates[i].test(config)) p.events[i] += w;
    }
  }
  return p;
}

// Deterministic pairwise reduction over shard index.
Partial reduce_tree(std::vector<Partial> parts) {
  while (parts.size() > 1) {
    std::vector<Partial> next;
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2)
      next.push_back(combine(std::move(parts[i]), std::move(parts[i + 1])));
    if (parts.size() % 2) next.push_back(std::move(parts.back()));
    parts = std::move(next);
  }
  return std::move(parts.front());
}

}  // namespace

ExactSummary enumerate(const FkModel& model, const std::vector<EventPredicate>& predicates,
                       const EnumerateOptions& options) {
  require_small(model, kMaxExactEdges);
  const std::size_t n = model.box().size();
  if (options.origin >= n) throw std::out_of_range("origin outside the box");
  const EdgeId m = model.edge_count();
  const std::uint64_t total = std::uint64_t{1} << m;
  const std::uint64_t shard = std::uint64_t{1} << std::min<EdgeId>(options.shard_bits, m);
  const std::uint64_t shards = total / shard;

  std::vector<Partial> parts(shards);
  const unsigned threads = std::max(1u, options.threads);
  for (std::uint64_t first = 0; first < shards; first += threads) {
    std::vector<std::future<Partial>> jobs;
    for (std::uint64_t i = first; i < std::min<std::uint64_t>(shards, first + threads); ++i)
      jobs.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred,
                                run_shard, std::cref(model), std::cref(predicates),
                                options.origin, i * shard, (i + 1) * shard));
    for (std::uint64_t i = first; i < first + jobs.size(); ++i) parts[i] = jobs[i - first].get();
  }
  Partial all = reduce_tree(std::move(parts));

  ExactSummary out;
  out.vertex_count = n;
  out.origin = options.origin;
  out.log_z = static_cast<double>(all.shift + std::log(all.z));
  out.connection.assign(n, std::vector<double>(n, 1.0));
  for (VertexId a = 0; a < n; ++a)
    for (VertexId b = a + 1; b < n; ++b)
      out.connection[a][b] = out.connection[b][a] = static_cast<double>(all.conn[a * n + b] / all.z);
  out.origin_cluster_size.resize(n + 1);
  for (std::size_t s = 0; s <= n; ++s)
    out.origin_cluster_size[s] = static_cast<double>(all.sizes[s] / all.z);
  for (std::size_t i = 0; i < predicates.size(); ++i)
    out.events.emplace_back(predicates[i].name, static_cast<double>(all.events[i] / all.z));
  return out;
}

std::vector<double> configuration_distribution(const FkModel& model) {
  require_small(model, 22);
  MaskEvaluator ev(model);
  const std::uint64_t total = std::uint64_t{1} << model.edge_count();
  std::vector<double> lw(total);
  double top = kNegInf;
  for (std::uint64_t s = 0; s < total; ++s) top = std::max(top, lw[s] = ev.log_weight(s));
  long double z = 0;
  for (std::uint64_t s = 0; s < total; ++s) z += std::exp(static_cast<long double>(lw[s] - top));
  std::vector<double> p(total);
  for (std::uint64_t s = 0; s < total; ++s)
    p[s] = static_cast<double>(std::exp(static_cast<long double>(lw[s] - top)) / z);
  return p;
}

ConditionalProbability conditional_edge_probability(const FkModel& model, EdgeId e,
                                                    const Configuration& rest) {
  if (rest.vertex_count() != model.box().size())
    throw std::invalid_argument("conditioning configuration does not belong to the model's box");
  if (e >= model.edge_count()) throw std::out_of_range("edge id out of range");
  Configuration open = rest, closed = rest;
  open.set(e, true);
  closed.set(e, false);

  ConditionalProbability out;
  auto [a, b] = model.box().edges().pair(e);
  out.endpoints_connected_off_edge = connected(closed, a, b);
  const double w = model.edge_weight(e);
  out.formula = out.endpoints_connected_off_edge ? w / (1.0 + w) : w / (w + model.q());
  const double lo = model.log_weight(open), lc = model.log_weight(closed);
  out.enumerated = lo == kNegInf ? 0.0 : 1.0 / (1.0 + std::exp(lc - lo));
  return out;
}

EventTable tabulate(const FkModel& model, const EventPredicate& predicate) {
  require_small(model, kMaxExactEdges);
  const std::uint64_t total = std::uint64_t{1} << model.edge_count();
  EventTable t{predicate.name, std::vector<bool>(total)};
  Configuration c(model.box().size());
  for (std::uint64_t s = 0; s < total; ++s) {
    c.assign_mask(s);
    t.holds[s] = predicate.test(c);
  }
  return t;
}

bool is_increasing(const EventTable& event, EdgeId edge_count) {
  const std::uint64_t total = std::uint64_t{1} << edge_count;
  if (event.holds.size() != total) throw std::invalid_argument("event table has the wrong size");
  for (std::uint64_t s = 0; s < total; ++s) {
    if (!event.holds[s]) continue;
    for (EdgeId e = 0; e < edge_count; ++e)
      if (!event.holds[s | (std::uint64_t{1} << e)]) return false;
  }
  return true;
}

MonotonicityResult monotonicity_check(const FkModel& model1, const FkModel& model2,
                                      const EventTable& event, double tolerance) {
  require_small(model1, kMaxExactEdges);
  require_small(model2, kMaxExactEdges);
  const EdgeId m1 = model1.edge_count();
  if (!is_increasing(event, m1))
    throw std::invalid_argument("event '" + event.name + "' fails the increasing audit");

  // Position in model2's edge numbering of each model1 edge.
  const Box& b1 = model1.box();
  const Box& b2 = model2.box();
  std::vector<EdgeId> image(m1);
  for (EdgeId e = 0; e < m1; ++e) {
    auto [x, y] = b1.pair_of(e);
    if (!b2.contains(x) || !b2.contains(y))
      throw std::invalid_argument("the second box does not contain the first");
    image[e] = b2.pair_index(x, y);
  }

  auto probability = [&](const FkModel& model, auto restrict) {
    MaskEvaluator ev(model);
    const std::uint64_t total = std::uint64_t{1} << model.edge_count();
    std::vector<double> lw(total);
    double top = kNegInf;
    for (std::uint64_t s = 0; s < total; ++s) top = std::max(top, lw[s] = ev.log_weight(s));
    long double z = 0, a = 0;
    for (std::uint64_t s = 0; s < total; ++s) {
      const long double w = std::exp(static_cast<long double>(lw[s] - top));
      z += w;
      if (event.holds[restrict(s)]) a += w;
    }
    return static_cast<double>(a / z);
  };

  MonotonicityResult r;
  r.p1 = probability(model1, [](std::uint64_t s) { return s; });
  r.p2 = probability(model2, [&](std::uint64_t s) {
    std::uint64_t t = 0;
    for (EdgeId e = 0; e < m1; ++e)
      if ((s >> image[e]) & 1u) t |= std::uint64_t{1} << e;
    return t;
  });
  r.holds = r.p1 <= r.p2 + tolerance;
  return r;
}

std::vector<std::vector<double>> potts_enumerate(const Box& box, const CouplingSpec& coupling,
                                                 double beta, int q) {
  if (q < 2) throw std::invalid_argument("Potts enumeration needs integer q >= 2");
  const std::size_t n = box.size();
  std::uint64_t states = 1;
  for (std::size_t i = 0; i < n; ++i) {
    states *= static_cast<std::uint64_t>(q);
    if (states > kMaxPottsStates)
      throw std::length_error("Potts enumeration is capped at q^|Lambda| <= 2^24 states");
  }
  std::vector<double> bj(n * n, 0.0);
  LatticeVector d(box.dimension());
  for (VertexId a = 0; a < n; ++a)
    for (VertexId b = a + 1; b < n; ++b) {
      box.difference(a, b, d);
      bj[a * n + b] = beta * coupling.evaluate(d);
    }

  // exp(-beta H) <= 1 with equality at constant spins, so the constant
  // configurations fix the log-domain shift at 0.
  std::vector<int> sigma(n, 0);
  long double z = 0;
  std::vector<long double> same(n * n, 0);
  for (std::uint64_t s = 0; s < states; ++s) {
    std::uint64_t t = s;
    for (std::size_t i = 0; i < n; ++i) {
      sigma[i] = static_cast<int>(t % static_cast<std::uint64_t>(q));
      t /= static_cast<std::uint64_t>(q);
    }
    long double energy = 0;
    for (VertexId a = 0; a < n; ++a)
      for (VertexId b = a + 1; b < n; ++b)
        if (sigma[a] != sigma[b]) energy += bj[a * n + b];
    const long double w = std::exp(-energy);
    z += w;
    for (VertexId a = 0; a < n; ++a)
      for (VertexId b = a + 1; b < n; ++b)
        if (sigma[a] == sigma[b]) same[a * n + b] += w;
  }
  std::vector<std::vector<double>> out(n, std::vector<double>(n, 1.0));
  for (VertexId a = 0; a < n; ++a)
    for (VertexId b = a + 1; b < n; ++b)
      out[a][b] = out[b][a] = static_cast<double>(same[a * n + b] / z);
  return out;
}

double es_identity_check(const Box& box, const CouplingSpec& coupling, double beta, int q,
                         WeightConvention convention) {
  const auto potts = potts_enumerate(box, coupling, beta, q);
  const auto fk = enumerate(FkModel(box, coupling, beta, q, convention));
  const double qd = q;
  double worst = 0.0;
  for (std::size_t a = 0; a < box.size(); ++a)
    for (std::size_t b = a + 1; b < box.size(); ++b)
      worst = std::max(worst, std::abs(potts[a][b] - 1.0 / qd -
                                       (qd - 1.0) / qd * fk.connection[a][b]));
  return worst;
}

// --- serialization ---------------------------------------------------------

std::string ExactSummary::serialize() const {
  std::map<std::string, std::string> kv;
  kv["log_z"] = format_double(log_z);
  kv["vertex_count"] = std::to_string(vertex_count);
  kv["origin"] = std::to_string(origin);
  auto idx = [](std::size_t i) {
    std::string s = std::to_string(i);
    return std::string(4 - std::min<std::size_t>(4, s.size()), '0') + s;
  };
  for (std::size_t a = 0; a < connection.size(); ++a)
    for (std::size_t b = a + 1; b < connection.size(); ++b)
      kv["connection." + idx(a) + "." + idx(b)] = format_double(connection[a][b]);
  for (std::size_t s = 0; s < origin_cluster_size.size(); ++s)
    kv["cluster_size." + idx(s)] = format_double(origin_cluster_size[s]);
  for (const auto& [name, p] : events) kv["event." + name] = format_double(p);
  std::string out;
  for (const auto& [k, v] : kv) out += k + "\t" + v + "\n";
  return out;
}

ExactSummary ExactSummary::parse(const std::string& text) {
  // Keys arrive sorted, so vertex_count comes after the entries it sizes.
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw std::invalid_argument("bad summary line: " + line);
    kv[line.substr(0, tab)] = line.substr(tab + 1);
  }
  ExactSummary s;
  auto n = kv.find("vertex_count");
  if (n == kv.end()) throw std::invalid_argument("summary has no vertex_count");
  s.vertex_count = parse_uint(n->second);
  s.connection.assign(s.vertex_count, std::vector<double>(s.vertex_count, 1.0));
  s.origin_cluster_size.assign(s.vertex_count + 1, 0.0);
  for (const auto& [key, value] : kv) {
    if (key == "vertex_count") {
      continue;
    } else if (key == "log_z") {
      s.log_z = parse_double(value);
    } else if (key == "origin") {
      s.origin = static_cast<VertexId>(parse_uint(value));
    } else if (key.rfind("connection.", 0) == 0) {
      auto parts = split(key, '.');
      const auto a = parse_uint(parts.at(1)), b = parse_uint(parts.at(2));
      s.connection.at(a).at(b) = s.connection.at(b).at(a) = parse_double(value);
    } else if (key.rfind("cluster_size.", 0) == 0) {
      s.origin_cluster_size.at(parse_uint(key.substr(13))) = parse_double(value);
    } else if (key.rfind("event.", 0) == 0) {
      s.events.emplace_back(key.substr(6), parse_double(value));
    } else {
      throw std::invalid_argument("unknown summary key: " + key);
    }
  }
  return s;
}

}  // namespace lrfk
