#include "lrfk/fk_model.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lrfk/clusters.hpp"
#include "lrfk/text.hpp"

namespace lrfk {

WeightConvention parse_convention(std::string_view name) {
  if (name == "paper") return WeightConvention::paper;
  if (name == "es") return WeightConvention::es;
  throw std::invalid_argument("unknown weight convention '" + std::string(name) + "'");
}

std::string_view to_string(WeightConvention c) {
  return c == WeightConvention::paper ? "paper" : "es";
}

double weight_from_coupling(double beta_j, WeightConvention c) {
  return c == WeightConvention::paper ? -std::expm1(-beta_j) : std::expm1(beta_j);
}

double log_weight_from_coupling(double beta_j, WeightConvention c) {
  if (beta_j == 0.0) return -std::numeric_limits<double>::infinity();
  if (c == WeightConvention::paper) return std::log(-std::expm1(-beta_j));
  if (beta_j > 30.0) return beta_j + std::log1p(-std::exp(-beta_j));
  return std::log(std::expm1(beta_j));
}

// --- Configuration ---------------------------------------------------------

Configuration::Configuration(std::size_t vertex_count)
    : edges_(vertex_count), words_((edges_.count() + 63) / 64, 0) {}

void Configuration::clear() { std::fill(words_.begin(), words_.end(), 0); }

EdgeId Configuration::open_count() const {
  EdgeId n = 0;
  for (auto w : words_) n += static_cast<EdgeId>(std::popcount(w));
  return n;
}

std::vector<EdgeId> Configuration::open_edges() const {
  std::vector<EdgeId> out;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    std::uint64_t w = words_[i];
    while (w) {
      out.push_back(i * 64 + static_cast<EdgeId>(std::countr_zero(w)));
      w &= w - 1;
    }
  }
  return out;
}

std::uint64_t Configuration::mask() const {
  if (size() > 64) throw std::length_error("configuration has more than 64 edges");
  return words_.empty() ? 0 : words_[0];
}

Configuration Configuration::from_mask(std::size_t vertex_count, std::uint64_t mask) {
  Configuration c(vertex_count);
  c.assign_mask(mask);
  return c;
}

void Configuration::assign_mask(std::uint64_t mask) {
  const EdgeId m = size();
  if (m > 64) throw std::length_error("configuration has more than 64 edges");
  if (m < 64 && (mask >> m) != 0) throw std::invalid_argument("mask has bits beyond the edge count");
  if (!words_.empty()) words_[0] = mask;
}

std::string Configuration::to_hex() const {
  const EdgeId m = size();
  const std::size_t digits = (m + 3) / 4;
  std::string out(digits, '0');
  static constexpr char kHex[] = "0123456789abcdef";
  for (std::size_t k = 0; k < digits; ++k) {
    const EdgeId base = k * 4;
    unsigned nibble = 0;
    for (unsigned b = 0; b < 4 && base + b < m; ++b)
      if (test(base + b)) nibble |= 1u << b;
    out[digits - 1 - k] = kHex[nibble];
  }
  return out;
}

Configuration Configuration::from_hex(std::size_t vertex_count, std::string_view hex) {
  Configuration c(vertex_count);
  const EdgeId m = c.size();
  const std::size_t digits = (m + 3) / 4;
  if (hex.size() != digits)
    throw std::invalid_argument("hex configuration has " + std::to_string(hex.size()) +
                                " digits, expected " + std::to_string(digits));
  for (std::size_t k = 0; k < digits; ++k) {
    const char ch = hex[digits - 1 - k];
    unsigned nibble;
    if (ch >= '0' && ch <= '9')
      nibble = static_cast<unsigned>(ch - '0');
    else if (ch >= 'a' && ch <= 'f')
      nibble = static_cast<unsigned>(ch - 'a' + 10);
    else
      throw std::invalid_argument("bad hex digit in configuration");
    for (unsigned b = 0; b < 4; ++b) {
      if (!((nibble >> b) & 1u)) continue;
      if (k * 4 + b >= m) throw std::invalid_argument("hex configuration sets bits beyond m");
      c.set(k * 4 + b);
    }
  }
  return c;
}

std::string dump_configuration(const Box& box, const Configuration& config) {
  if (config.vertex_count() != box.size())
    throw std::invalid_argument("configuration does not belong to this box");
  return "box=" + box.descriptor() + "\nconfig=" + config.to_hex() + "\n";
}

std::pair<Box, Configuration> load_configuration(const std::string& text) {
  std::optional<Box> box;
  std::string hex;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.rfind("box=", 0) == 0) box = Box::from_descriptor(std::string(t.substr(4)));
    else if (t.rfind("config=", 0) == 0) hex = std::string(t.substr(7));
  }
  if (!box) throw std::invalid_argument("configuration dump has no box line");
  auto config = Configuration::from_hex(box->size(), hex);
  return {std::move(*box), std::move(config)};
}

// --- FkModel ---------------------------------------------------------------

FkModel::FkModel(Box box, CouplingSpec coupling, double beta, double q, WeightConvention convention)
    : box_(std::move(box)), coupling_(std::move(coupling)), beta_(beta), q_(q),
      convention_(convention) {
  if (box_.dimension() != coupling_.dimension() || box_.norm() != coupling_.norm())
    throw std::invalid_argument("box and coupling disagree on dimension or norm");
  if (!(beta_ >= 0.0) || !std::isfinite(beta_)) throw std::invalid_argument("beta must be >= 0");
  if (!(q_ >= 1.0) || !std::isfinite(q_)) throw std::invalid_argument("q must be >= 1");
  if (box_.edge_count() <= (EdgeId{1} << 22)) {
    beta_j_.resize(box_.edge_count());
    const std::size_t n = box_.size();
    EdgeId e = 0;
    for (VertexId b = 1; b < n; ++b)
      for (VertexId a = 0; a < b; ++a, ++e) beta_j_[e] = beta_ * coupling_between(a, b);
  }
}

double FkModel::coupling_between(VertexId a, VertexId b) const {
  if (coupling_.radial()) return coupling_.radial_value(box_.distance(a, b));
  LatticeVector d(box_.dimension());
  box_.difference(a, b, d);
  return coupling_.evaluate(d);
}

double FkModel::coupling_constant(EdgeId e) const {
  if (!beta_j_.empty() && beta_ > 0.0) return beta_j_.at(e) / beta_;
  auto [a, b] = box_.edges().pair(e);
  return coupling_between(a, b);
}

double FkModel::edge_weight(EdgeId e) const {
  const double bj = beta_j_.empty() ? beta_ * coupling_constant(e) : beta_j_.at(e);
  return weight_from_coupling(bj, convention_);
}

double FkModel::log_edge_weight(EdgeId e) const {
  const double bj = beta_j_.empty() ? beta_ * coupling_constant(e) : beta_j_.at(e);
  return log_weight_from_coupling(bj, convention_);
}

double FkModel::bond_probability(EdgeId e) const {
  const double bj = beta_j_.empty() ? beta_ * coupling_constant(e) : beta_j_.at(e);
  if (convention_ == WeightConvention::es) return -std::expm1(-bj);
  const double w = weight_from_coupling(bj, convention_);
  return w / (1.0 + w);
}

double FkModel::log_weight(const Configuration& config) const {
  if (config.vertex_count() != box_.size())
    throw std::invalid_argument("configuration does not belong to this model's box");
  DisjointSet ds;
  double lw = static_cast<double>(count_components(config, ds)) * std::log(q_);
  for (EdgeId e : config.open_edges()) lw += log_edge_weight(e);
  return lw;
}

std::string FkModel::describe() const {
  return "box=" + box_.descriptor() + "|coupling=" + coupling_.describe() +
         "|beta=" + format_double(beta_) + "|q=" + format_double(q_) +
         "|convention=" + std::string(to_string(convention_));
}

std::uint64_t FkModel::hash() const { return fnv1a64(describe()); }

}  // namespace lrfk
