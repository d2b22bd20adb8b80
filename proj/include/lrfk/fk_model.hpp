#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lrfk/couplings.hpp"
#include "lrfk/lattice.hpp"

namespace lrfk {

// paper: w_e = 1 - exp(-beta J_e)
// es:    w_e = exp(beta J_e) - 1, the weight induced by the Edwards-Sokal joint
//        measure of the Potts model.
enum class WeightConvention { paper, es };

WeightConvention parse_convention(std::string_view name);
std::string_view to_string(WeightConvention c);

double weight_from_coupling(double beta_j, WeightConvention c);
double log_weight_from_coupling(double beta_j, WeightConvention c);

// Edge-indexed open/closed vector over P_2(Lambda).
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::size_t vertex_count);

  std::size_t vertex_count() const { return edges_.vertex_count(); }
  EdgeId size() const { return edges_.count(); }
  const EdgeIndex& edges() const { return edges_; }

  bool test(EdgeId e) const { return (words_[e >> 6] >> (e & 63)) & 1u; }
  void set(EdgeId e, bool open = true) {
    const std::uint64_t bit = std::uint64_t{1} << (e & 63);
    if (open)
      words_[e >> 6] |= bit;
    else
      words_[e >> 6] &= ~bit;
  }
  void flip(EdgeId e) { words_[e >> 6] ^= std::uint64_t{1} << (e & 63); }
  void clear();

  bool is_open(VertexId a, VertexId b) const { return test(edges_.id(a, b)); }
  EdgeId open_count() const;
  std::vector<EdgeId> open_edges() const;

  // Small configurations (m <= 64) as an integer bit mask, bit e = edge e.
  std::uint64_t mask() const;
  static Configuration from_mask(std::size_t vertex_count, std::uint64_t mask);
  void assign_mask(std::uint64_t mask);

  // Lowercase hex, most significant nibble first, ceil(m/4) digits.
  std::string to_hex() const;
  static Configuration from_hex(std::size_t vertex_count, std::string_view hex);

  bool operator==(const Configuration& other) const = default;

 private:
  EdgeIndex edges_;
  std::vector<std::uint64_t> words_;
};

// "box=<descriptor>\nconfig=<hex>\n"
std::string dump_configuration(const Box& box, const Configuration& config);
std::pair<Box, Configuration> load_configuration(const std::string& text);

// The finite-volume measure mu(omega) ∝ q^{k(omega)} prod_{open e} w_e with
// free boundary conditions.
class FkModel {
 public:
  FkModel(Box box, CouplingSpec coupling, double beta, double q, WeightConvention convention);

  const Box& box() const { return box_; }
  const CouplingSpec& coupling() const { return coupling_; }
  double beta() const { return beta_; }
  double q() const { return q_; }
  WeightConvention convention() const { return convention_; }
  EdgeId edge_count() const { return box_.edge_count(); }

  double coupling_constant(EdgeId e) const;
  double coupling_between(VertexId a, VertexId b) const;
  double edge_weight(EdgeId e) const;
  double log_edge_weight(EdgeId e) const;
  // p_e = w_e / (1 + w_e), the Bernoulli parameter of the bond step.
  double bond_probability(EdgeId e) const;

  // k(omega) log q + sum over open edges of log w_e.
  double log_weight(const Configuration& config) const;

  std::string describe() const;
  std::uint64_t hash() const;

 private:
  Box box_;
  CouplingSpec coupling_;
  double beta_;
  double q_;
  WeightConvention convention_;
  std::vector<double> beta_j_;  // cached for small boxes
};

}  // namespace lrfk
