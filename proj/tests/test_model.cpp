#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <numeric>

#include <doctest.h>

#include "lrfk/clusters.hpp"
#include "lrfk/diagnostics.hpp"
#include "lrfk/fk_model.hpp"
#include "lrfk/random.hpp"

using namespace lrfk;

namespace {

Box line(double radius) { return Box::make(1, {0}, radius, Norm::euclidean); }
CouplingSpec inverse_square() { return CouplingSpec(PowerLaw{2.0}, Norm::euclidean, 1); }

}  // namespace

TEST_CASE("edge index is a colex bijection") {
  EdgeIndex idx(50);
  CHECK(idx.count() == 50 * 49 / 2);
  EdgeId expect = 0;
  for (VertexId b = 1; b < 50; ++b)
    for (VertexId a = 0; a < b; ++a, ++expect) {
      CHECK(idx.id(a, b) == expect);
      CHECK(idx.id(b, a) == expect);
      CHECK(idx.pair(expect) == std::make_pair(a, b));
    }
  CHECK_THROWS(idx.id(3, 3));
  CHECK_THROWS(idx.pair(idx.count()));
  // Large ids survive the floating-point square root.
  EdgeIndex big(4095);
  for (EdgeId e : {EdgeId{0}, big.count() / 3, big.count() - 1}) {
    auto [a, b] = big.pair(e);
    CHECK(big.id(a, b) == e);
  }
}

TEST_CASE("boxes are strict balls in lexicographic order") {
  Box b = line(3);
  REQUIRE(b.size() == 5);
  for (VertexId i = 0; i < 5; ++i) CHECK(b.vertex(i)[0] == static_cast<std::int64_t>(i) - 2);
  CHECK(b.index(LatticeVector{2}) == 4);
  CHECK_THROWS_AS(b.index(LatticeVector{3}), std::out_of_range);
  CHECK(b.distance(0, 4) == 4.0);

  Box sq = Box::make(2, {0, 0}, 2, Norm::sup);
  CHECK(sq.size() == 9);
  Box u = Box::unite(line(2), Box::make(1, {10}, 2, Norm::euclidean));
  CHECK(u.size() == 6);
  CHECK(u.contains(LatticeVector{11}));
  CHECK_FALSE(u.contains(LatticeVector{5}));

  Box r = Box::from_descriptor(u.descriptor());
  CHECK(r.descriptor() == u.descriptor());
  CHECK(r.size() == u.size());
  CHECK_THROWS(Box::make(1, {0}, 0.5, Norm::euclidean));
}

TEST_CASE("weights under both conventions") {
  const double bj = 0.7;
  CHECK(weight_from_coupling(bj, WeightConvention::paper) == doctest::Approx(1 - std::exp(-bj)));
  CHECK(weight_from_coupling(bj, WeightConvention::es) == doctest::Approx(std::exp(bj) - 1));
  CHECK(log_weight_from_coupling(bj, WeightConvention::es) ==
        doctest::Approx(std::log(std::exp(bj) - 1)).epsilon(1e-14));
  CHECK(std::isfinite(log_weight_from_coupling(800.0, WeightConvention::es)));

  FkModel es(line(4), inverse_square(), 0.3, 2, WeightConvention::es);
  FkModel paper(line(4), inverse_square(), 0.3, 2, WeightConvention::paper);
  for (EdgeId e = 0; e < es.edge_count(); ++e) {
    const double bj = 0.3 * es.coupling_constant(e);
    // The ES bond step keeps an edge with probability 1 - exp(-beta J).
    CHECK(es.bond_probability(e) == doctest::Approx(1 - std::exp(-bj)).epsilon(1e-14));
    const double w = paper.edge_weight(e);
    CHECK(paper.bond_probability(e) == doctest::Approx(w / (1 + w)).epsilon(1e-14));
  }
  CHECK_THROWS(FkModel(line(4), inverse_square(), -1, 2, WeightConvention::es));
  CHECK_THROWS(FkModel(line(4), inverse_square(), 0.3, 0.5, WeightConvention::es));
  CHECK_THROWS(FkModel(line(4), CouplingSpec(PowerLaw{2.0}, Norm::euclidean, 2), 0.3, 2, WeightConvention::es));
}

TEST_CASE("configuration encodings round trip") {
  Rng rng(5);
  for (std::size_t n : {2u, 5u, 9u, 40u}) {
    Configuration c(n);
    for (EdgeId e = 0; e < c.size(); ++e) c.set(e, rng.bernoulli(0.3));
    CHECK(Configuration::from_hex(n, c.to_hex()) == c);
    CHECK(c.to_hex().size() == (c.size() + 3) / 4);
    if (c.size() <= 64) CHECK(Configuration::from_mask(n, c.mask()) == c);
  }
  Configuration c(3);
  c.set(0);
  c.set(2);
  CHECK(c.to_hex() == "5");
  CHECK_THROWS(Configuration::from_hex(3, "8"));
  CHECK_THROWS(Configuration::from_hex(3, "05"));
  CHECK_THROWS(Configuration::from_mask(3, 8));

  Box b = line(3);
  Configuration d(b.size());
  d.set(b.pair_index(LatticeVector{-2}, LatticeVector{1}));
  auto [b2, d2] = load_configuration(dump_configuration(b, d));
  CHECK(b2.descriptor() == b.descriptor());
  CHECK(d2 == d);
}

TEST_CASE("log weight counts components") {
  FkModel m(line(3), inverse_square(), 0.5, 3, WeightConvention::paper);
  Configuration c(m.box().size());
  CHECK(m.log_weight(c) == doctest::Approx(5 * std::log(3.0)));
  const EdgeId e1 = m.box().edges().id(0, 1), e2 = m.box().edges().id(1, 4);
  c.set(e1);
  c.set(e2);
  CHECK(m.log_weight(c) == doctest::Approx(3 * std::log(3.0) + m.log_edge_weight(e1) + m.log_edge_weight(e2)));
  CHECK(m.hash() == FkModel(line(3), inverse_square(), 0.5, 3, WeightConvention::paper).hash());
  CHECK(m.hash() != FkModel(line(3), inverse_square(), 0.5, 2, WeightConvention::paper).hash());
}

TEST_CASE("cluster labels are canonical") {
  Configuration c(6);
  EdgeIndex idx(6);
  c.set(idx.id(4, 1));
  c.set(idx.id(5, 2));
  c.set(idx.id(2, 0));
  auto l = cluster_labels(c);
  CHECK(l.count() == 3);
  CHECK(l.label == std::vector<std::uint32_t>{0, 1, 0, 2, 1, 0});
  CHECK(l.representative == std::vector<VertexId>{0, 1, 3});
  CHECK(l.size_of(5) == 3);
  DisjointSet ds;
  CHECK(count_components(c, ds) == 3);
  CHECK(connected(c, 0, 5));
  CHECK_FALSE(connected(c, 0, 4));
  CHECK(cluster_of(c, 4) == std::vector<VertexId>{1, 4});
  auto open = c.open_edges();
  CHECK(cluster_labels(6, open).label == l.label);

  OpenGraph g(c);
  CHECK(g.component(0, 0, 2) == std::vector<VertexId>{0});
  CHECK(g.reaches(5, 0));
  CHECK_FALSE(g.reaches(5, 0, 2, 5));
}

TEST_CASE("connectivity is invariant under vertex relabelling") {
  Rng rng(11);
  const std::size_t n = 8;
  EdgeIndex idx(n);
  for (int trial = 0; trial < 200; ++trial) {
    Configuration c(n);
    for (EdgeId e = 0; e < c.size(); ++e) c.set(e, rng.bernoulli(0.15));
    std::vector<VertexId> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    Configuration p(n);
    for (EdgeId e : c.open_edges()) {
      auto [a, b] = idx.pair(e);
      p.set(idx.id(perm[a], perm[b]));
    }
    auto la = cluster_labels(c), lb = cluster_labels(p);
    CHECK(la.count() == lb.count());
    for (VertexId x = 0; x < n; ++x) {
      CHECK(la.size_of(x) == lb.size_of(perm[x]));
      for (VertexId y = 0; y < n; ++y) CHECK(connected(c, x, y) == connected(p, perm[x], perm[y]));
    }
  }
}

TEST_CASE("bridge diagnostics on a hand-built configuration") {
  Box b = line(6);  // -5..5
  auto v = [&](std::int64_t x) { return b.index(LatticeVector{x}); };
  Configuration c(b.size());
  auto open = [&](std::int64_t x, std::int64_t y) { c.set(b.pair_index(LatticeVector{x}, LatticeVector{y})); };
  open(0, 1);
  open(1, 4);
  open(4, 5);
  open(0, -2);
  open(-5, -1);  // long edge outside C(0)

  auto d = bridge_diagnostics(b, c, v(0), v(4), 5.0);
  CHECK(d.connected);
  CHECK(d.origin_cluster_size == 5);
  REQUIRE(d.L.has_value());
  CHECK(*d.L == 3.0);
  CHECK(*d.maximal_edge_origin == VertexPair{v(1), v(4)});
  CHECK(*d.maximal_edge_target == VertexPair{v(1), v(4)});
  CHECK(d.R0 == 2.0);  // {-2, 0, 1}
  CHECK(d.Rx == 1.0);  // {4, 5}
  CHECK(d.longest_edge == 3.0);
  CHECK(d.pigeonhole_qualifying);
  CHECK(d.pigeonhole_holds);
  CHECK_FALSE(bridge_diagnostics(b, c, v(0), v(4), 4.9).pigeonhole_qualifying);

  // A cycle 0-1-4-3-0: both length-3 edges bridge, the radii tie and the
  // smaller pair wins.
  open(0, 3);
  open(3, 4);
  d = bridge_diagnostics(b, c, v(0), v(4), 10.0);
  CHECK(*d.L == 3.0);
  CHECK(*d.maximal_edge_origin == VertexPair{v(0), v(3)});

  // Not connected: no bridge, radii of the two clusters.
  d = bridge_diagnostics(b, c, v(0), v(-1), 10.0);
  CHECK_FALSE(d.connected);
  CHECK_FALSE(d.L.has_value());
  CHECK(d.R0 == 5.0);
  CHECK(d.Rx == 4.0);
  CHECK_THROWS(bridge_diagnostics(b, c, v(0), v(0), 1.0));
}

TEST_CASE("pigeonhole observation holds on random configurations") {
  Box b = line(8);
  Rng rng(3);
  std::size_t qualifying = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    Configuration c(b.size());
    for (EdgeId e = 0; e < c.size(); ++e) c.set(e, rng.bernoulli(0.04));
    const VertexId o = static_cast<VertexId>(rng.below(b.size()));
    VertexId t = static_cast<VertexId>(rng.below(b.size()));
    if (t == o) continue;
    const double f = 1.0 + static_cast<double>(rng.below(8));
    auto d = bridge_diagnostics(b, c, o, t, f);
    qualifying += d.pigeonhole_qualifying;
    CHECK(d.pigeonhole_holds);
    if (d.connected) CHECK(d.L.has_value());
  }
  CHECK(qualifying > 50);
}

TEST_CASE("cutoff f") {
  CHECK(cutoff_f(std::exp(-3.0), 2.0) == doctest::Approx(3.0));
  CHECK_THROWS(cutoff_f(0.5, 0.0));
}
