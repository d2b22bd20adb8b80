#include "lrfk/observables.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lrfk/text.hpp"

namespace lrfk {

// --- collector state -------------------------------------------------------

std::string CollectorState::serialize() const {
  std::string out = "[series]\n" + series.serialize() + "[counters]\n";
  for (const auto& [k, v] : counters) out += k + "\t" + std::to_string(v) + "\n";
  out += "[values]\n";
  for (const auto& [k, v] : values) {
    out += k + "\t";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + format_double(v[i]);
    out += "\n";
  }
  return out;
}

CollectorState CollectorState::parse(const std::string& text) {
  CollectorState s;
  std::istringstream in(text);
  std::string line, section, series_text;
  while (std::getline(in, line)) {
    if (line == "[series]" || line == "[counters]" || line == "[values]") {
      section = line;
      continue;
    }
    if (line.empty()) continue;
    if (section == "[series]") {
      series_text += line + "\n";
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw std::invalid_argument("bad collector line: " + line);
    const std::string key = line.substr(0, tab);
    const std::string_view value = std::string_view(line).substr(tab + 1);
    if (section == "[counters]") {
      s.counters[key] = parse_uint(value);
    } else if (section == "[values]") {
      auto& v = s.values[key];
      for (auto tok : split(value, ' '))
        if (!tok.empty()) v.push_back(parse_double(tok));
    } else {
      throw std::invalid_argument("collector text has no section header");
    }
  }
  s.series = BatchedSeries::parse(series_text);
  return s;
}

// --- geometry --------------------------------------------------------------

std::string target_label(const LatticeVector& x) { return format_lattice_vector(x); }

ScanGeometry make_window(const FkModel& model, const LatticeVector& origin, double window_radius) {
  const Box& box = model.box();
  if (static_cast<int>(origin.size()) != box.dimension())
    throw std::invalid_argument("origin has the wrong dimension");
  if (window_radius < 0.0) throw std::invalid_argument("origin window radius must be >= 0");
  ScanGeometry g;
  g.origin = origin;
  g.window_radius = window_radius;
  const VertexId o = box.index(origin);
  for (VertexId v = 0; v < box.size(); ++v)
    if (v == o || (window_radius > 0.0 && box.distance_to(v, origin) <= window_radius)) g.window.push_back(v);
  return g;
}

ScanGeometry make_geometry(const FkModel& model, const LatticeVector& origin, double window_radius,
                           const std::vector<LatticeVector>& targets) {
  const Box& box = model.box();
  if (static_cast<int>(origin.size()) != box.dimension())
    throw std::invalid_argument("origin has the wrong dimension");
  if (targets.empty()) throw std::invalid_argument("empty target list");
  if (window_radius < 0.0) throw std::invalid_argument("origin window radius must be >= 0");
  ScanGeometry g;
  g.origin = origin;
  g.window_radius = window_radius;
  const VertexId o = box.index(origin);
  std::vector<char> in_window(box.size(), 0);
  for (VertexId v = 0; v < box.size(); ++v)
    if (v == o || (window_radius > 0.0 && box.distance_to(v, origin) <= window_radius)) {
      g.window.push_back(v);
      in_window[v] = 1;
    }
  for (const auto& x : targets) {
    if (static_cast<int>(x.size()) != box.dimension())
      throw std::invalid_argument("target " + target_label(x) + " has the wrong dimension");
    TargetPairs t;
    t.offset = x;
    t.abs_x = norm_of(x, box.norm());
    if (t.abs_x == 0.0) throw std::invalid_argument("target offsets must be nonzero");
    t.j0x = model.coupling().evaluate(x);
    LatticeVector z(x.size());
    for (VertexId y : g.window) {
      auto yv = box.vertex(y);
      for (std::size_t k = 0; k < x.size(); ++k) z[k] = yv[k] + x[k];
      auto zi = box.find(z);
      if (!zi) continue;
      if (window_radius > 0.0 && !in_window[*zi]) continue;
      t.pairs.emplace_back(y, *zi);
    }
    if (t.pairs.empty())
      throw std::invalid_argument("target " + target_label(x) + " has no pair inside the box/window");
    g.targets.push_back(std::move(t));
  }
  return g;
}

// --- collectors ------------------------------------------------------------

namespace {

void push_capped(std::vector<double>& v, double x) {
  if (v.size() < kValueCap) v.push_back(x);
}

}  // namespace

ConnectionCollector::ConnectionCollector(const FkModel& model, const ScanGeometry& geometry,
                                         const ConnectionOptions& options, std::uint64_t expected)
    : model_(&model), geometry_(&geometry), options_(options) {
  if (options_.c1_hint && !(*options_.c1_hint > 0.0)) throw std::invalid_argument("c1_hint must be positive");
  std::vector<std::string> cols{"chi"};
  for (const auto& t : geometry.targets) {
    const auto lab = target_label(t.offset);
    cols.push_back("connect:" + lab);
    std::array<double, 3> f{};
    if (options_.c1_hint) {
      for (std::size_t v = 0; v < 3; ++v) {
        f[v] = cutoff_f(t.j0x, kC1Factors[v] * *options_.c1_hint);
        cols.push_back("dcomp:" + lab + ":" + kC1Names[v]);
      }
      for (std::size_t v = 0; v < 3; ++v) cols.push_back("lemma:" + lab + ":" + kC1Names[v]);
    }
    f_.push_back(f);
  }
  state_.series = BatchedSeries(std::move(cols), expected);
  row_.resize(state_.series.columns().size());
}

void ConnectionCollector::observe(const ChainState& state) {
  const auto& labels = state.labels();
  const auto& g = *geometry_;
  double chi = 0.0;
  for (VertexId y : g.window) chi += labels.size_of(y);
  std::size_t col = 0;
  row_[col++] = chi / static_cast<double>(g.window.size());

  for (std::size_t ti = 0; ti < g.targets.size(); ++ti) {
    const auto& t = g.targets[ti];
    const auto& f = f_[ti];
    const auto lab = target_label(t.offset);
    const double threshold = std::pow(t.abs_x, options_.gamma);
    double conn = 0.0;
    std::array<double, 3> dcomp{}, lemma{};
    for (auto [y, z] : t.pairs) {
      const double sy = labels.size_of(y);
      if (options_.c1_hint)
        for (std::size_t v = 0; v < 3; ++v)
          if (sy >= f[v]) dcomp[v] += 1.0;
      if (labels.label[y] != labels.label[z]) continue;
      conn += 1.0;
      if (!options_.c1_hint) continue;
      const auto d = bridge_diagnostics(model_->box(), state.graph(), y, z, f[1]);
      ++state_.counters["connected:" + lab];
      if (d.L) {
        ++state_.counters["bridged:" + lab];
        push_capped(state_.values["L:" + lab], *d.L);
      }
      push_capped(state_.values["R0:" + lab], d.R0);
      push_capped(state_.values["Rx:" + lab], d.Rx);
      for (std::size_t v = 0; v < 3; ++v) {
        if (sy <= f[v]) {
          ++state_.counters["pigeonhole_qualifying:" + lab + ":" + kC1Names[v]];
          if (d.longest_edge >= t.abs_x / f[v]) ++state_.counters["pigeonhole_holds:" + lab + ":" + kC1Names[v]];
        }
        if (sy < f[v] && d.R0 >= threshold) lemma[v] += 1.0;
      }
    }
    const double np = static_cast<double>(t.pairs.size());
    row_[col++] = conn / np;
    if (options_.c1_hint) {
      for (std::size_t v = 0; v < 3; ++v) row_[col++] = dcomp[v] / np;
      for (std::size_t v = 0; v < 3; ++v) row_[col++] = lemma[v] / np;
    }
  }
  state_.series.push(row_);
}

TailCollector::TailCollector(const ScanGeometry& geometry, std::vector<std::uint64_t> thresholds,
                             std::uint64_t expected)
    : geometry_(&geometry), thresholds_(std::move(thresholds)) {
  if (thresholds_.empty()) throw std::invalid_argument("empty threshold list");
  for (std::size_t i = 1; i < thresholds_.size(); ++i)
    if (thresholds_[i] <= thresholds_[i - 1]) throw std::invalid_argument("thresholds must be increasing");
  std::vector<std::string> cols{"size"};
  for (auto n : thresholds_) cols.push_back("tail:" + std::to_string(n));
  state_.series = BatchedSeries(std::move(cols), expected);
  row_.resize(state_.series.columns().size());
}

void TailCollector::observe(const ChainState& state) {
  const auto& labels = state.labels();
  std::fill(row_.begin(), row_.end(), 0.0);
  for (VertexId y : geometry_->window) {
    const auto s = labels.size_of(y);
    row_[0] += s;
    for (std::size_t i = 0; i < thresholds_.size() && s >= thresholds_[i]; ++i) row_[i + 1] += 1.0;
  }
  for (auto& v : row_) v /= static_cast<double>(geometry_->window.size());
  state_.series.push(row_);
}

PottsCollector::PottsCollector(const FkModel& model, std::vector<std::pair<VertexId, VertexId>> pairs,
                               std::uint64_t expected)
    : q_(model.q()), pairs_(std::move(pairs)) {
  require_es_compatible(model);
  std::vector<std::string> cols;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const auto s = std::to_string(i);
    cols.push_back("same:" + s);
    cols.push_back("conn:" + s);
    cols.push_back("resid:" + s);
  }
  state_.series = BatchedSeries(std::move(cols), expected);
  row_.resize(state_.series.columns().size());
}

void PottsCollector::observe(const ChainState& state) {
  const auto& colors = state.colors();
  if (colors.empty()) throw std::logic_error("Potts correlations need a colour step in every sweep");
  const auto& labels = state.labels();
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    auto [a, b] = pairs_[i];
    const double same = colors[a] == colors[b] ? 1.0 : 0.0;
    const double conn = labels.label[a] == labels.label[b] ? 1.0 : 0.0;
    row_[3 * i] = same;
    row_[3 * i + 1] = conn;
    row_[3 * i + 2] = same - 1.0 / q_ - (q_ - 1.0) / q_ * conn;
  }
  state_.series.push(row_);
}

ConfigurationCounter::ConfigurationCounter(EdgeId edge_count) {
  if (edge_count > 24) throw std::length_error("configuration counting needs m <= 24");
  counts_.assign(std::size_t{1} << edge_count, 0);
}

void ConfigurationCounter::observe(const ChainState& state) { ++counts_[state.configuration().mask()]; }

// --- estimates -------------------------------------------------------------

std::vector<const CollectorState*> states_of(std::span<const std::unique_ptr<Collector>> chains) {
  std::vector<const CollectorState*> out;
  for (const auto& c : chains) out.push_back(&c->state());
  return out;
}

namespace {

std::vector<const BatchedSeries*> series_of(std::span<const CollectorState* const> chains) {
  if (chains.empty()) throw std::invalid_argument("no chains");
  std::vector<const BatchedSeries*> out;
  for (auto* c : chains) out.push_back(&c->series);
  return out;
}

}  // namespace

Estimate pooled(std::span<const CollectorState* const> chains, const std::string& column) {
  auto s = series_of(chains);
  return pooled_estimate(s, s.front()->column(column));
}

std::vector<Estimate> two_point(std::span<const CollectorState* const> chains, const ScanGeometry& geometry) {
  std::vector<Estimate> out;
  for (const auto& t : geometry.targets) out.push_back(pooled(chains, "connect:" + target_label(t.offset)));
  return out;
}

Estimate susceptibility(std::span<const CollectorState* const> chains) { return pooled(chains, "chi"); }

namespace {

struct LineFit {
  double slope = 0.0, intercept = 0.0;
};

LineFit weighted_line(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
    sxx += w[i] * x[i] * x[i];
    sxy += w[i] * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  LineFit f;
  f.slope = (sw * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / sw;
  return f;
}

}  // namespace

TailFit cluster_tail(std::span<const CollectorState* const> chains, std::vector<std::uint64_t> thresholds) {
  auto series = series_of(chains);
  TailFit fit;
  fit.thresholds = std::move(thresholds);
  bool any = false;
  for (auto n : fit.thresholds) {
    fit.tail.push_back(pooled_estimate(series, series.front()->column("tail:" + std::to_string(n))));
    if (fit.tail.back().mean > 0.0) any = true;
  }
  if (!any) throw std::runtime_error("cluster-size tail is empty at every threshold");

  // Jackknife groups over the base blocks of all chains, in chain order.
  constexpr std::size_t kGroups = 20;
  const double block = static_cast<double>(series.front()->block_length());
  std::size_t total_blocks = 0;
  for (auto* s : series) total_blocks += s->block_sums(0).size();
  if (total_blocks < kGroups) throw std::runtime_error("too few blocks for the jackknife");
  auto group_of = [&](std::size_t k) { return k * kGroups / total_blocks; };
  // loo[i][g]: tail mean at threshold i without group g.
  std::vector<std::vector<double>> loo(fit.thresholds.size(), std::vector<double>(kGroups));
  for (std::size_t i = 0; i < fit.thresholds.size(); ++i) {
    const auto col = series.front()->column("tail:" + std::to_string(fit.thresholds[i]));
    std::vector<double> gsum(kGroups, 0.0), gcount(kGroups, 0.0);
    std::size_t k = 0;
    for (auto* s : series)
      for (double b : s->block_sums(col)) {
        gsum[group_of(k)] += b;
        gcount[group_of(k)] += block;
        ++k;
      }
    double all = 0.0, cnt = 0.0;
    for (std::size_t g = 0; g < kGroups; ++g) {
      all += gsum[g];
      cnt += gcount[g];
    }
    for (std::size_t g = 0; g < kGroups; ++g) loo[i][g] = (all - gsum[g]) / (cnt - gcount[g]);
  }

  const double floor_p = 10.0 / static_cast<double>(fit.tail.front().samples);
  for (std::size_t i = 0; i < fit.thresholds.size(); ++i) {
    const auto& e = fit.tail[i];
    if (e.mean < floor_p || !(e.std_error > 0.0)) continue;
    if (std::any_of(loo[i].begin(), loo[i].end(), [](double v) { return !(v > 0.0); })) continue;
    fit.fit_points.push_back(i);
  }
  if (fit.fit_points.size() < 3) throw std::runtime_error("fewer than 3 usable tail points for the fit");

  std::vector<double> x, y, w;
  for (auto i : fit.fit_points) {
    x.push_back(static_cast<double>(fit.thresholds[i]));
    y.push_back(std::log(fit.tail[i].mean));
    const double rel = fit.tail[i].std_error / fit.tail[i].mean;
    w.push_back(1.0 / (rel * rel));
  }
  const auto line = weighted_line(x, y, w);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  for (std::size_t k = 0; k < x.size(); ++k) fit.residuals.push_back(y[k] - (line.intercept + line.slope * x[k]));

  std::vector<double> slopes(kGroups);
  for (std::size_t g = 0; g < kGroups; ++g) {
    std::vector<double> yg;
    for (auto i : fit.fit_points) yg.push_back(std::log(loo[i][g]));
    slopes[g] = weighted_line(x, yg, w).slope;
  }
  double mean_slope = 0.0;
  for (double s : slopes) mean_slope += s / kGroups;
  double ss = 0.0;
  for (double s : slopes) ss += (s - mean_slope) * (s - mean_slope);
  fit.slope_se = std::sqrt((kGroups - 1.0) / kGroups * ss);

  const std::size_t n = x.size(), third = n / 3;
  fit.sign_trials = n;
  for (std::size_t k = 0; k < n; ++k) {
    const bool outer = k < third || k >= n - third;
    if (outer ? fit.residuals[k] > 0.0 : fit.residuals[k] < 0.0) ++fit.sign_successes;
  }
  fit.convex_p_value = binomial_half_sf(fit.sign_successes, fit.sign_trials);
  fit.exponential_consistent = fit.slope < 0.0 && fit.convex_p_value >= 1e-2;
  return fit;
}

BridgeSummary bridge_summary(std::span<const CollectorState* const> chains, const LatticeVector& x) {
  const auto lab = target_label(x);
  BridgeSummary b;
  auto count = [&](const CollectorState& s, const std::string& key) -> std::uint64_t {
    auto it = s.counters.find(key);
    return it == s.counters.end() ? 0 : it->second;
  };
  auto append = [&](const CollectorState& s, const std::string& key, std::vector<double>& out) {
    auto it = s.values.find(key);
    if (it != s.values.end()) out.insert(out.end(), it->second.begin(), it->second.end());
  };
  for (auto* s : chains) {
    b.connected += count(*s, "connected:" + lab);
    b.bridged += count(*s, "bridged:" + lab);
    for (std::size_t v = 0; v < 3; ++v) {
      b.qualifying[v] += count(*s, "pigeonhole_qualifying:" + lab + ":" + kC1Names[v]);
      b.holds[v] += count(*s, "pigeonhole_holds:" + lab + ":" + kC1Names[v]);
    }
    append(*s, "L:" + lab, b.L);
    append(*s, "R0:" + lab, b.R0);
    append(*s, "Rx:" + lab, b.Rx);
  }
  return b;
}

RatioScan ratio_scan(std::span<const CollectorState* const> chains, const FkModel& model,
                     const ScanGeometry& geometry, const ConnectionOptions& options) {
  if (options.c1_hint && !(*options.c1_hint > 0.0)) throw std::invalid_argument("c1_hint must be positive");
  auto series = series_of(chains);
  const auto& first = *series.front();
  RatioScan scan;
  scan.beta = model.beta();
  scan.q = model.q();
  scan.c1_hint = options.c1_hint;
  scan.gamma = options.gamma;
  const auto chi_col = first.column("chi");
  const Estimate chi = pooled_estimate(series, chi_col);
  for (std::size_t i = 1; i < geometry.targets.size(); ++i)
    if (geometry.targets[i].abs_x < geometry.targets[i - 1].abs_x)
      throw std::invalid_argument("ratio-scan targets must be ordered by |x|");
  for (const auto& t : geometry.targets) {
    const auto lab = target_label(t.offset);
    RatioRecord r;
    r.x = t.offset;
    r.abs_x = t.abs_x;
    r.j0x = t.j0x;
    r.chi = chi;
    const auto mu_col = first.column("connect:" + lab);
    r.mu = pooled_estimate(series, mu_col);
    const double scale = scan.q / (scan.beta * chi.mean * chi.mean * t.j0x);
    r.r = scale * r.mu.mean;
    if (r.mu.mean > 0.0) {
      const double cov = pooled_covariance(series, mu_col, chi_col);
      const double rel = std::pow(r.mu.std_error / r.mu.mean, 2) + 4.0 * std::pow(chi.std_error / chi.mean, 2) -
                         4.0 * cov / (r.mu.mean * chi.mean);
      r.r_se = r.r * std::sqrt(std::max(0.0, rel));
    } else {
      r.r_se = scale * r.mu.std_error;
    }
    if (options.c1_hint) {
      for (std::size_t v = 0; v < 3; ++v) {
        r.dcomp[v] = pooled(chains, "dcomp:" + lab + ":" + kC1Names[v]);
        r.dcomp_ratio[v] = r.dcomp[v].mean / t.j0x;
        r.lemma[v] = pooled(chains, "lemma:" + lab + ":" + kC1Names[v]);
        r.lemma_ratio[v] = r.lemma[v].mean / t.j0x;
      }
      r.bridge = bridge_summary(chains, t.offset);
    }
    scan.records.push_back(std::move(r));
  }
  return scan;
}

std::vector<PottsPairEstimate> potts_correlation(std::span<const CollectorState* const> chains,
                                                 std::span<const std::pair<VertexId, VertexId>> pairs) {
  std::vector<PottsPairEstimate> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto s = std::to_string(i);
    out.push_back({pairs[i], pooled(chains, "same:" + s), pooled(chains, "conn:" + s), pooled(chains, "resid:" + s)});
  }
  return out;
}

}  // namespace lrfk
