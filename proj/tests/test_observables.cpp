#include <cmath>
#include <memory>

#include <doctest.h>

#include "lrfk/exact.hpp"
#include "lrfk/observables.hpp"

using namespace lrfk;

namespace {

CouplingSpec inverse_square() { return CouplingSpec(PowerLaw{2.0}, Norm::euclidean, 1); }

// Runs one chain per seed and returns the collectors.
template <class Make>
std::vector<std::unique_ptr<Collector>> run(const FkModel& m, Algorithm alg, std::uint64_t sweeps,
                                            std::vector<std::uint64_t> seeds, Make make) {
  std::vector<std::unique_ptr<Collector>> out;
  for (auto seed : seeds) {
    std::unique_ptr<Collector> c = make(sweeps);
    run_chain(m, alg, {sweeps, 200, 1}, seed, [&](const ChainState& s) { c->observe(s); });
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

TEST_CASE("scan geometry") {
  FkModel m(Box::make(1, {0}, 10, Norm::euclidean), inverse_square(), 0.1, 1, WeightConvention::es);
  auto g = make_geometry(m, {0}, 2, {{3}, {1}});
  CHECK(g.window.size() == 5);
  REQUIRE(g.targets.size() == 2);
  CHECK(g.targets[0].pairs.size() == 2);
  CHECK(g.targets[1].pairs.size() == 4);
  CHECK(g.targets[0].j0x == doctest::Approx(1.0 / 9));
  auto single = make_geometry(m, {0}, 0, {{9}});
  CHECK(single.window.size() == 1);
  CHECK(single.targets[0].pairs.size() == 1);
  CHECK_THROWS(make_geometry(m, {0}, 0, {}));
  CHECK_THROWS(make_geometry(m, {0}, 0, {{10}}));
  CHECK_THROWS(make_geometry(m, {0}, 2, {{5}}));
  CHECK_THROWS(make_geometry(m, {0}, 0, {{0}}));
  CHECK(make_window(m, {0}, 3).window.size() == 7);
  CHECK(target_label({32}) == "(32)");
}

TEST_CASE("collector state round trip") {
  FkModel m(Box::make(1, {0}, 6, Norm::euclidean), inverse_square(), 0.6, 2, WeightConvention::es);
  auto g = make_geometry(m, {0}, 2, {{1}, {2}});
  ConnectionOptions o;
  o.c1_hint = 1.0;
  auto chains = run(m, Algorithm::es, 3000, {1}, [&](std::uint64_t e) {
    return std::make_unique<ConnectionCollector>(m, g, o, e);
  });
  const auto& s = chains[0]->state();
  CHECK(s.counters.count("connected:(1)"));
  CHECK(CollectorState::parse(s.serialize()) == s);
}

TEST_CASE("beta = 0: no clusters, empty reports") {
  FkModel m(Box::make(1, {0}, 8, Norm::euclidean), inverse_square(), 0.0, 2, WeightConvention::es);
  auto g = make_geometry(m, {0}, 3, {{2}});
  auto tails = run(m, Algorithm::es, 2000, {1}, [&](std::uint64_t e) {
    return std::make_unique<TailCollector>(g, std::vector<std::uint64_t>{1, 2, 20}, e);
  });
  auto st = states_of(tails);
  CHECK(pooled(st, "tail:1").mean == 1.0);
  CHECK(pooled(st, "tail:2").mean == 0.0);
  CHECK(pooled(st, "tail:20").mean == 0.0);  // beyond the 15-vertex box
  CHECK_THROWS(cluster_tail(st, {2, 20}));

  ConnectionOptions o;
  o.c1_hint = 1.0;
  auto conn = run(m, Algorithm::es, 2000, {1}, [&](std::uint64_t e) {
    return std::make_unique<ConnectionCollector>(m, g, o, e);
  });
  auto b = bridge_summary(states_of(conn), {2});
  CHECK(b.connected == 0);
  CHECK(b.qualifying[1] == 0);
  CHECK(b.L.empty());

  auto potts = run(m, Algorithm::es, 4000, {1}, [&](std::uint64_t e) {
    return std::make_unique<PottsCollector>(m, std::vector<std::pair<VertexId, VertexId>>{{0, 5}}, e);
  });
  auto pe = potts_correlation(states_of(potts), std::vector<std::pair<VertexId, VertexId>>{{0, 5}});
  CHECK(std::abs(pe[0].same.mean - 0.5) < 4 * pe[0].same.std_error + 1e-12);
}

TEST_CASE("Potts colours and bonds of one chain satisfy the identity") {
  FkModel m(Box::make(1, {0}, 3, Norm::euclidean), inverse_square(), 0.9, 3, WeightConvention::es);
  std::vector<std::pair<VertexId, VertexId>> pairs{{0, 1}, {0, 4}, {1, 3}};
  auto chains = run(m, Algorithm::es, 200000, {1, 2}, [&](std::uint64_t e) {
    return std::make_unique<PottsCollector>(m, pairs, e);
  });
  auto est = potts_correlation(states_of(chains), pairs);
  auto exact = potts_enumerate(m.box(), m.coupling(), 0.9, 3);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(std::abs(est[i].residual.mean) < 3 * est[i].residual.std_error + 1e-12);
    const double p = exact[pairs[i].first][pairs[i].second];
    CHECK(std::abs(est[i].same.mean - p) < 4 * est[i].same.std_error);
  }
  CHECK_THROWS(PottsCollector(FkModel(m.box(), m.coupling(), 0.9, 3, WeightConvention::paper), pairs, 10));
}

TEST_CASE("susceptibility dominates each connection term") {
  FkModel m(Box::make(1, {0}, 20, Norm::euclidean), inverse_square(), 0.5, 2, WeightConvention::es);
  auto g = make_geometry(m, {0}, 5, {{1}, {4}});
  auto chains = run(m, Algorithm::es, 20000, {3}, [&](std::uint64_t e) {
    return std::make_unique<ConnectionCollector>(m, g, ConnectionOptions{}, e);
  });
  auto st = states_of(chains);
  auto chi = susceptibility(st);
  for (const auto& mu : two_point(st, g))
    CHECK(chi.mean >= mu.mean + 1.0 - 3 * (chi.std_error + mu.std_error));
}

TEST_CASE("ratio is exactly invariant under J -> 2J, beta -> beta/2") {
  CouplingTable t1, t2;
  for (std::int64_t x = 1; x <= 12; ++x) {
    t1.entries[{x}] = 1.0 / static_cast<double>(x * x);
    t2.entries[{x}] = 2.0 / static_cast<double>(x * x);
  }
  const Box box = Box::make(1, {0}, 7, Norm::euclidean);
  FkModel a(box, CouplingSpec(t1, Norm::euclidean, 1), 0.4, 2, WeightConvention::es);
  FkModel b(box, CouplingSpec(t2, Norm::euclidean, 1), 0.2, 2, WeightConvention::es);
  auto ga = make_geometry(a, {0}, 3, {{1}, {3}});
  auto gb = make_geometry(b, {0}, 3, {{1}, {3}});
  auto ca = run(a, Algorithm::es, 5000, {7}, [&](std::uint64_t e) {
    return std::make_unique<ConnectionCollector>(a, ga, ConnectionOptions{}, e);
  });
  auto cb = run(b, Algorithm::es, 5000, {7}, [&](std::uint64_t e) {
    return std::make_unique<ConnectionCollector>(b, gb, ConnectionOptions{}, e);
  });
  auto ra = ratio_scan(states_of(ca), a, ga, {});
  auto rb = ratio_scan(states_of(cb), b, gb, {});
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(ra.records[i].r == rb.records[i].r);
    CHECK(ra.records[i].r_se == rb.records[i].r_se);
  }
}

TEST_CASE("percolation at tiny beta has ratio near one") {
  FkModel m(Box::make(1, {0}, 200, Norm::euclidean), inverse_square(), 0.05, 1, WeightConvention::es);
  auto g = make_geometry(m, {0}, 100, {{2}, {8}, {32}});
  auto chains = run(m, Algorithm::es, 20000, {1}, [&](std::uint64_t e) {
    return std::make_unique<ConnectionCollector>(m, g, ConnectionOptions{}, e);
  });
  auto scan = ratio_scan(states_of(chains), m, g, {});
  const auto& last = scan.records.back();
  CHECK(last.r >= 0.5);
  CHECK(last.r <= 1.5);
  CHECK_THROWS(ratio_scan(states_of(chains), m, make_geometry(m, {0}, 100, {{8}, {2}}), {}));
}

TEST_CASE("percolation cluster tail decays exponentially") {
  FkModel m(Box::make(1, {0}, 64, Norm::euclidean), inverse_square(), 0.3, 1, WeightConvention::es);
  auto w = make_window(m, {0}, 32);
  std::vector<std::uint64_t> th{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  auto chains = run(m, Algorithm::es, 40000, {1}, [&](std::uint64_t e) {
    return std::make_unique<TailCollector>(w, th, e);
  });
  auto fit = cluster_tail(states_of(chains), th);
  CHECK(fit.slope < 0.0);
  CHECK(std::abs(fit.slope) > 3 * fit.slope_se);
  CHECK(fit.fit_points.size() >= 3);
}
