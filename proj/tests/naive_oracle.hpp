#pragma once

// Deliberately plain re-derivations used to cross-check the library: no
// shared code with the exact module beyond the model's coupling values.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "lrfk/fk_model.hpp"

namespace naive {

struct Pair {
  std::uint32_t a, b;
  double w;
};

// Edges listed pair by pair with their weights recomputed from J.
inline std::vector<Pair> pairs_of(const lrfk::FkModel& m) {
  std::vector<Pair> out;
  const auto n = static_cast<std::uint32_t>(m.box().size());
  for (std::uint32_t b = 1; b < n; ++b)
    for (std::uint32_t a = 0; a < b; ++a) {
      const double bj = m.beta() * m.coupling_between(a, b);
      const double w = m.convention() == lrfk::WeightConvention::paper ? 1.0 - std::exp(-bj) : std::exp(bj) - 1.0;
      out.push_back({a, b, w});
    }
  return out;
}

inline std::uint32_t root(std::vector<std::uint32_t>& p, std::uint32_t x) {
  while (p[x] != x) x = p[x];
  return x;
}

struct Result {
  long double z = 0.0;
  std::vector<std::vector<double>> conn;  // normalized
  std::vector<double> weight;             // unnormalized per mask
};

inline Result enumerate(const lrfk::FkModel& m) {
  const auto n = m.box().size();
  const auto edges = pairs_of(m);
  Result r;
  std::vector<std::vector<long double>> conn(n, std::vector<long double>(n, 0.0L));
  const std::uint64_t total = std::uint64_t{1} << edges.size();
  r.weight.resize(total);
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    std::vector<std::uint32_t> p(n);
    std::iota(p.begin(), p.end(), 0u);
    double w = 1.0;
    for (std::size_t e = 0; e < edges.size(); ++e)
      if ((mask >> e) & 1u) {
        w *= edges[e].w;
        p[root(p, edges[e].a)] = root(p, edges[e].b);
      }
    std::size_t k = 0;
    for (std::uint32_t v = 0; v < n; ++v) k += root(p, v) == v;
    w *= std::pow(m.q(), static_cast<double>(k));
    r.weight[mask] = w;
    r.z += w;
    for (std::uint32_t a = 0; a < n; ++a)
      for (std::uint32_t b = 0; b < n; ++b)
        if (root(p, a) == root(p, b)) conn[a][b] += w;
  }
  r.conn.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) r.conn[a][b] = static_cast<double>(conn[a][b] / r.z);
  return r;
}

// P(sigma_a = sigma_b) by summing over all q^n spin assignments with Boltzmann
// weight exp(-beta sum J [sigma_a != sigma_b]).
inline std::vector<std::vector<double>> potts(const lrfk::FkModel& m, int q) {
  const auto n = m.box().size();
  std::vector<std::vector<double>> same(n, std::vector<double>(n, 0.0));
  std::uint64_t states = 1;
  for (std::size_t i = 0; i < n; ++i) states *= static_cast<std::uint64_t>(q);
  double z = 0.0;
  std::vector<int> s(n);
  for (std::uint64_t code = 0; code < states; ++code) {
    std::uint64_t c = code;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<int>(c % static_cast<std::uint64_t>(q));
      c /= static_cast<std::uint64_t>(q);
    }
    double energy = 0.0;
    for (std::uint32_t b = 1; b < n; ++b)
      for (std::uint32_t a = 0; a < b; ++a)
        if (s[a] != s[b]) energy += m.coupling_between(a, b);
    const double w = std::exp(-m.beta() * energy);
    z += w;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (s[a] == s[b]) same[a][b] += w;
  }
  for (auto& row : same)
    for (auto& v : row) v /= z;
  return same;
}

}  // namespace naive
