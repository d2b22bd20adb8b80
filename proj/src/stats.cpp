#include "lrfk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include "lrfk/text.hpp"

namespace lrfk {

double integrated_autocorrelation(std::span<const double> x, double window_factor) {
  const std::size_t n = x.size();
  if (n < 4) return 1.0;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  c0 /= static_cast<double>(n);
  if (!(c0 > 0.0)) return 1.0;
  double tau = 1.0;
  for (std::size_t t = 1; t < n / 2; ++t) {
    double ct = 0.0;
    for (std::size_t i = 0; i + t < n; ++i) ct += (x[i] - mean) * (x[i + t] - mean);
    tau += 2.0 * ct / static_cast<double>(n) / c0;
    if (static_cast<double>(t) >= window_factor * tau) break;
  }
  return std::max(tau, 1e-3);
}

BatchedSeries::BatchedSeries(std::vector<std::string> columns, std::uint64_t expected_samples,
                             std::size_t prefix_length)
    : names_(std::move(columns)),
      block_(std::max<std::uint64_t>(1, expected_samples / 1000)),
      prefix_length_(prefix_length),
      blocks_(names_.size()),
      open_(names_.size(), 0.0),
      prefix_(names_.size()) {}

std::size_t BatchedSeries::column(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw std::out_of_range("no series column '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

void BatchedSeries::push(std::span<const double> row) {
  if (row.size() != names_.size()) throw std::invalid_argument("row width does not match columns");
  for (std::size_t c = 0; c < row.size(); ++c) {
    open_[c] += row[c];
    if (prefix_[c].size() < prefix_length_) prefix_[c].push_back(row[c]);
  }
  ++samples_;
  if (samples_ % block_ == 0)
    for (std::size_t c = 0; c < row.size(); ++c) {
      blocks_[c].push_back(open_[c]);
      open_[c] = 0.0;
    }
}

double BatchedSeries::tau(std::size_t col) const { return integrated_autocorrelation(prefix_.at(col)); }

double BatchedSeries::sum(std::size_t col) const {
  return std::accumulate(blocks_.at(col).begin(), blocks_[col].end(), 0.0) + open_[col];
}

void BatchedSeries::batches(std::size_t col, std::uint64_t per, std::vector<double>& sums,
                            std::vector<double>& lengths) const {
  const auto& bl = blocks_.at(col);
  const std::size_t nb = bl.size() / per;
  for (std::size_t b = 0; b < nb; ++b) {
    double s = 0.0;
    for (std::size_t i = b * per; i < (b + 1) * per; ++i) s += bl[i];
    sums.push_back(s);
    lengths.push_back(static_cast<double>(per * block_));
  }
  if (nb == 0) return;
  double tail = open_[col];
  for (std::size_t i = nb * per; i < bl.size(); ++i) tail += bl[i];
  sums.back() += tail;
  lengths.back() += static_cast<double>(samples_ - nb * per * block_);
}

namespace {

std::uint64_t blocks_per_batch(std::span<const BatchedSeries* const> chains, double tau) {
  if (chains.empty()) throw std::invalid_argument("no chains to pool");
  const std::uint64_t block = chains.front()->block_length();
  for (auto* c : chains)
    if (c->block_length() != block) throw std::invalid_argument("chains use different block lengths");
  const double want = 20.0 * std::max(1.0, tau);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(want / static_cast<double>(block))));
}

struct Batched {
  std::vector<double> sums, lengths;
  double total = 0.0, samples = 0.0;
};

Batched collect(std::span<const BatchedSeries* const> chains, std::size_t col, std::uint64_t per) {
  Batched b;
  for (auto* c : chains) c->batches(col, per, b.sums, b.lengths);
  for (std::size_t i = 0; i < b.sums.size(); ++i) {
    b.total += b.sums[i];
    b.samples += b.lengths[i];
  }
  return b;
}

}  // namespace

Estimate pooled_estimate(std::span<const BatchedSeries* const> chains, std::size_t col) {
  double tau = 0.0;
  for (auto* c : chains) tau = std::max(tau, c->tau(col));
  const auto per = blocks_per_batch(chains, tau);
  const auto b = collect(chains, col, per);
  const std::size_t nb = b.sums.size();
  if (nb < kMinBatches)
    throw std::runtime_error("only " + std::to_string(nb) + " batches available for '" +
                             chains.front()->columns()[col] + "' (need " +
                             std::to_string(kMinBatches) + "); run longer");
  Estimate e;
  e.tau = tau;
  e.batches = nb;
  e.samples = static_cast<std::uint64_t>(b.samples);
  e.mean = b.total / b.samples;
  double ss = 0.0;
  for (std::size_t i = 0; i < nb; ++i) {
    const double r = b.sums[i] - b.lengths[i] * e.mean;
    ss += r * r;
  }
  const double bn = static_cast<double>(nb);
  e.std_error = std::sqrt(bn / (bn - 1.0) * ss) / b.samples;
  return e;
}

Estimate pooled_estimate(const BatchedSeries& chain, std::size_t col) {
  const BatchedSeries* one[] = {&chain};
  return pooled_estimate(std::span<const BatchedSeries* const>(one), col);
}

double pooled_covariance(std::span<const BatchedSeries* const> chains, std::size_t a, std::size_t c) {
  double tau = 0.0;
  for (auto* ch : chains) tau = std::max({tau, ch->tau(a), ch->tau(c)});
  const auto per = blocks_per_batch(chains, tau);
  const auto ba = collect(chains, a, per);
  const auto bc = collect(chains, c, per);
  const std::size_t nb = ba.sums.size();
  if (nb < 2) return 0.0;
  const double ma = ba.total / ba.samples, mc = bc.total / bc.samples;
  double s = 0.0;
  for (std::size_t i = 0; i < nb; ++i)
    s += (ba.sums[i] - ba.lengths[i] * ma) * (bc.sums[i] - bc.lengths[i] * mc);
  const double bn = static_cast<double>(nb);
  return bn / (bn - 1.0) * s / (ba.samples * ba.samples);
}

Estimate iid_estimate(std::span<const double> x) {
  Estimate e;
  e.samples = e.batches = x.size();
  if (x.empty()) return e;
  e.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  if (x.size() < 2) return e;
  double ss = 0.0;
  for (double v : x) ss += (v - e.mean) * (v - e.mean);
  e.std_error = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  return e;
}

double chi_square_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), x));
}

ChiSquareResult chi_square_gof(std::span<const std::uint64_t> counts,
                               std::span<const double> probabilities, double min_expected) {
  if (counts.size() != probabilities.size())
    throw std::invalid_argument("counts and probabilities differ in length");
  const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  std::vector<double> obs, expv;
  double pooled_obs = 0.0, pooled_exp = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = n * probabilities[i];
    if (e >= min_expected) {
      obs.push_back(static_cast<double>(counts[i]));
      expv.push_back(e);
    } else {
      pooled_obs += static_cast<double>(counts[i]);
      pooled_exp += e;
    }
  }
  if (pooled_exp >= min_expected) {
    obs.push_back(pooled_obs);
    expv.push_back(pooled_exp);
  } else if (!expv.empty() && (pooled_exp > 0.0 || pooled_obs > 0.0)) {
    auto smallest = std::min_element(expv.begin(), expv.end()) - expv.begin();
    obs[smallest] += pooled_obs;
    expv[smallest] += pooled_exp;
  }
  ChiSquareResult r;
  r.cells = obs.size();
  for (std::size_t i = 0; i < obs.size(); ++i) r.statistic += (obs[i] - expv[i]) * (obs[i] - expv[i]) / expv[i];
  r.dof = static_cast<double>(obs.size()) - 1.0;
  r.p_value = r.dof > 0 ? chi_square_sf(r.statistic, r.dof) : 1.0;
  return r;
}

ChiSquareResult chi_square_homogeneity(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                                       double min_expected) {
  if (a.size() != b.size()) throw std::invalid_argument("count vectors differ in length");
  const double na = static_cast<double>(std::accumulate(a.begin(), a.end(), std::uint64_t{0}));
  const double nb = static_cast<double>(std::accumulate(b.begin(), b.end(), std::uint64_t{0}));
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("empty sample");
  const double fa = na / (na + nb), fb = nb / (na + nb);
  std::vector<std::pair<double, double>> cells;
  std::pair<double, double> pooled{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ca = static_cast<double>(a[i]), cb = static_cast<double>(b[i]);
    if (std::min(fa, fb) * (ca + cb) >= min_expected) {
      cells.emplace_back(ca, cb);
    } else {
      pooled.first += ca;
      pooled.second += cb;
    }
  }
  const double pooled_total = pooled.first + pooled.second;
  if (std::min(fa, fb) * pooled_total >= min_expected) {
    cells.push_back(pooled);
  } else if (!cells.empty() && pooled_total > 0.0) {
    auto smallest = std::min_element(cells.begin(), cells.end(), [](const auto& x, const auto& y) {
      return x.first + x.second < y.first + y.second;
    });
    smallest->first += pooled.first;
    smallest->second += pooled.second;
  }
  ChiSquareResult r;
  r.cells = cells.size();
  for (const auto& [ca, cb] : cells) {
    const double t = ca + cb;
    r.statistic += (ca - fa * t) * (ca - fa * t) / (fa * t) + (cb - fb * t) * (cb - fb * t) / (fb * t);
  }
  r.dof = static_cast<double>(cells.size()) - 1.0;
  r.p_value = r.dof > 0 ? chi_square_sf(r.statistic, r.dof) : 1.0;
  return r;
}

double kolmogorov_sf(double lambda) {
  if (lambda < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d)};
}

double binomial_half_sf(std::uint64_t k, std::uint64_t n) {
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  boost::math::binomial_distribution<double> bin(static_cast<double>(n), 0.5);
  return boost::math::cdf(boost::math::complement(bin, static_cast<double>(k - 1)));
}

// --- text form -------------------------------------------------------------

namespace {

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += format_double(v[i]);
  }
  return s;
}

std::vector<double> parse_doubles(std::string_view s) {
  std::vector<double> out;
  for (auto tok : split(s, ' '))
    if (!trim(tok).empty()) out.push_back(parse_double(tok));
  return out;
}

}  // namespace

std::string BatchedSeries::serialize() const {
  std::string out = "columns";
  for (const auto& n : names_) out += "\t" + n;
  out += "\nblock\t" + std::to_string(block_) + "\nprefix_length\t" + std::to_string(prefix_length_) +
         "\nsamples\t" + std::to_string(samples_) + "\n";
  for (std::size_t c = 0; c < names_.size(); ++c) {
    out += "blocks." + std::to_string(c) + "\t" + join_doubles(blocks_[c]) + "\n";
    out += "open." + std::to_string(c) + "\t" + format_double(open_[c]) + "\n";
    out += "prefix." + std::to_string(c) + "\t" + join_doubles(prefix_[c]) + "\n";
  }
  return out;
}

BatchedSeries BatchedSeries::parse(const std::string& text) {
  BatchedSeries s;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    const std::string key(fields.at(0));
    const std::string_view value = fields.size() > 1 ? fields[1] : std::string_view();
    if (key == "columns") {
      for (std::size_t i = 1; i < fields.size(); ++i) s.names_.emplace_back(fields[i]);
      s.blocks_.assign(s.names_.size(), {});
      s.open_.assign(s.names_.size(), 0.0);
      s.prefix_.assign(s.names_.size(), {});
    } else if (key == "block") {
      s.block_ = parse_uint(value);
    } else if (key == "prefix_length") {
      s.prefix_length_ = parse_uint(value);
    } else if (key == "samples") {
      s.samples_ = parse_uint(value);
    } else {
      const auto dot = key.find('.');
      if (dot == std::string::npos) throw std::invalid_argument("bad series line: " + key);
      const auto c = parse_uint(std::string_view(key).substr(dot + 1));
      const auto kind = key.substr(0, dot);
      if (kind == "blocks") s.blocks_.at(c) = parse_doubles(value);
      else if (kind == "open") s.open_.at(c) = parse_double(value);
      else if (kind == "prefix") s.prefix_.at(c) = parse_doubles(value);
      else throw std::invalid_argument("bad series line: " + key);
    }
  }
  return s;
}

}  // namespace lrfk
