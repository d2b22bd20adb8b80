#include <cmath>

#include <doctest.h>

#include "lrfk/exact.hpp"
#include "lrfk/observables.hpp"
#include "lrfk/samplers.hpp"

using namespace lrfk;

namespace {

FkModel small_model(double q, WeightConvention c, double beta = 0.8) {
  return FkModel(Box::make(1, {0}, 3, Norm::euclidean), CouplingSpec(PowerLaw{2.0}, Norm::euclidean, 1), beta, q, c);
}

double chain_p_value(const FkModel& m, Algorithm alg, std::uint64_t sweeps, std::uint64_t seed) {
  ConfigurationCounter counter(m.edge_count());
  run_chain(m, alg, {sweeps, 100, 1}, seed, [&](const ChainState& s) { counter.observe(s); });
  auto p = configuration_distribution(m);
  return chi_square_gof(counter.counts(), p).p_value;
}

}  // namespace

TEST_CASE("bond table ordering and cumulative sums") {
  auto m = small_model(2, WeightConvention::es);
  BondTable t(m);
  CHECK(t.order().size() == m.edge_count());
  for (std::size_t k = 1; k < t.order().size(); ++k)
    CHECK(t.probability(t.order()[k - 1]) >= t.probability(t.order()[k]));
  double acc = 0, expected = 0;
  for (std::size_t k = 0; k < t.order().size(); ++k) {
    CHECK(t.cumulative()[k] == doctest::Approx(acc).epsilon(1e-12));
    acc += std::log1p(-t.probability(t.order()[k]));
    expected += t.probability(t.order()[k]);
  }
  CHECK(t.expected_opens() == doctest::Approx(expected));
  CHECK(t.certain().empty());
}

TEST_CASE("fast bond sampler agrees with the naive loop per edge") {
  auto m = small_model(2, WeightConvention::es, 1.5);
  BondTable t(m);
  Rng ra(1), rb(2);
  std::vector<double> fa(m.edge_count()), fb(m.edge_count());
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) {
    auto a = sample_bonds_fast({}, t, ra);
    auto b = sample_bonds_naive({}, t, rb);
    CHECK(std::is_sorted(a.begin(), a.end()));
    for (auto e : a) fa[e] += 1.0 / draws;
    for (auto e : b) fb[e] += 1.0 / draws;
  }
  for (EdgeId e = 0; e < m.edge_count(); ++e) {
    const double p = t.probability(e), se = std::sqrt(p * (1 - p) / draws);
    CHECK(std::abs(fa[e] - p) < 5 * se);
    CHECK(std::abs(fb[e] - p) < 5 * se);
  }
  // The colour filter drops edges between different colours.
  std::vector<int> colors{0, 1, 0, 1, 0};
  Rng rc(3);
  for (int i = 0; i < 100; ++i)
    for (auto e : sample_bonds_fast(colors, t, rc)) {
      auto [x, y] = t.edges().pair(e);
      CHECK(colors[x] == colors[y]);
    }
}

TEST_CASE("edges with p = 1 are always open") {
  FkModel m(Box::make(1, {0}, 2, Norm::euclidean), CouplingSpec(PowerLaw{2.0}, Norm::euclidean, 1), 1e6, 2,
            WeightConvention::es);
  BondTable t(m);
  CHECK(t.certain().size() == 3);
  Rng rng(1);
  CHECK(sample_bonds_fast({}, t, rng).size() == 3);
}

TEST_CASE("chains keep consistent cluster labels") {
  auto m = small_model(3, WeightConvention::es, 1.2);
  BondTable t(m);
  ChainState s(m, 9);
  for (int i = 0; i < 300; ++i) {
    if (i % 2) s.heat_bath_sweep();
    else s.es_sweep(t);
    REQUIRE(s.validate());
  }
  CHECK(s.sweeps() == 300);
  s.es_sweep(t);
  CHECK(s.colors().size() == m.box().size());
}

TEST_CASE("chains are deterministic in the seed") {
  auto m = small_model(2, WeightConvention::es);
  auto trace = [&](std::uint64_t seed, Algorithm alg) {
    std::vector<std::string> out;
    auto man = run_chain(m, alg, {500, std::nullopt, 3}, seed,
                         [&](const ChainState& s) { out.push_back(s.configuration().to_hex()); });
    CHECK(man.samples == out.size());
    return out;
  };
  for (auto alg : {Algorithm::heat_bath, Algorithm::es, Algorithm::alternating}) {
    CHECK(trace(4, alg) == trace(4, alg));
    CHECK(trace(4, alg) != trace(5, alg));
  }
}

TEST_CASE("schedule and compatibility errors") {
  auto paper = small_model(2, WeightConvention::paper);
  auto noop = [](const ChainState&) {};
  CHECK_THROWS(run_chain(paper, Algorithm::es, {100, 10, 1}, 1, noop));
  CHECK_THROWS(require_es_compatible(small_model(1.5, WeightConvention::es)));
  CHECK_NOTHROW(require_es_compatible(small_model(1, WeightConvention::es)));
  CHECK_THROWS(run_chain(paper, Algorithm::heat_bath, {100, 100, 1}, 1, noop));
  CHECK_THROWS(run_chain(paper, Algorithm::heat_bath, {100, 10, 0}, 1, noop));
  CHECK(parse_algorithm("alternating") == Algorithm::alternating);
  CHECK_THROWS(parse_algorithm("metropolis"));
}

TEST_CASE("short chains match the enumerated law") {
  // The full-length version of this check is an acceptance criterion.
  CHECK(chain_p_value(small_model(2.5, WeightConvention::paper), Algorithm::heat_bath, 100000, 1) > 1e-3);
  CHECK(chain_p_value(small_model(3, WeightConvention::es), Algorithm::es, 100000, 2) > 1e-3);
  CHECK(chain_p_value(small_model(1, WeightConvention::es), Algorithm::es, 100000, 3) > 1e-3);
}
