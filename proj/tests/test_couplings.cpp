#include <cmath>
#include <stdexcept>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "lrfk/couplings.hpp"
#include "lrfk/hypotheses.hpp"

using namespace lrfk;

TEST_CASE("norms") {
  const LatticeVector v{3, -4};
  CHECK(norm_of(v, Norm::euclidean) == 5.0);
  CHECK(norm_of(v, Norm::sup) == 4.0);
  CHECK(norm_of(v, Norm::l1) == 7.0);
  CHECK(parse_norm("sup") == Norm::sup);
  CHECK_THROWS(parse_norm("l7"));
}

TEST_CASE("power law values and symmetry") {
  CouplingSpec j(PowerLaw{2.0}, Norm::euclidean, 1);
  CHECK(j.evaluate(LatticeVector{3}) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  CHECK(j.evaluate(LatticeVector{-3}) == j.evaluate(LatticeVector{3}));
  CHECK(j.between(LatticeVector{5}, LatticeVector{2}) == j.evaluate(LatticeVector{3}));
  CHECK_THROWS_AS(j.evaluate(LatticeVector{0}), std::invalid_argument);
  CHECK_THROWS_AS(j.evaluate(LatticeVector{1, 2}), std::invalid_argument);
  CHECK(j.radial());
  CHECK(j.radial_value(3.0) == j.evaluate(LatticeVector{3}));
  CHECK(std::exp(j.log_radial(std::log(7.0))) == doctest::Approx(1.0 / 49.0).epsilon(1e-13));
}

TEST_CASE("other families") {
  CouplingSpec lp(LogPower{}, Norm::euclidean, 1);
  CHECK(lp.radial_value(std::exp(1.0)) == doctest::Approx(std::exp(-1.0)));
  CHECK(lp.evaluate(LatticeVector{10}) == doctest::Approx(std::pow(10.0, -std::log(10.0))));

  // exp(-c log p(r)) with p(r) = r is the power law r^-c.
  CouplingSpec elp(ExpLogPoly{{0.0, 1.0}, 2.5, 1.0}, Norm::euclidean, 2);
  CHECK(elp.evaluate(LatticeVector{3, 4}) == doctest::Approx(std::pow(5.0, -2.5)).epsilon(1e-13));

  CouplingSpec se(StretchedExp{0.5}, Norm::euclidean, 1);
  CHECK(se.evaluate(LatticeVector{16}) == doctest::Approx(std::exp(-4.0)));

  // Radial slope against a central difference.
  for (const auto* s : {&lp, &se}) {
    const double r = 7.3, h = 1e-5;
    const double fd = -(s->radial_value(r + h) - s->radial_value(r - h)) / (2 * h);
    CHECK(s->radial_slope(r) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("table family: file round trip, symmetrization and range") {
  const auto path = std::filesystem::temp_directory_path() / "lrfk_table_test.txt";
  {
    std::ofstream out(path);
    out << "1,0\t0.5\n0,1\t0.5\n1,1\t0.125\n";
  }
  auto t = CouplingSpec::load_table(path, Norm::euclidean, 2);
  std::filesystem::remove(path);
  CHECK_FALSE(t.radial());
  CHECK(t.evaluate(LatticeVector{-1, 0}) == 0.5);
  CHECK(t.evaluate(LatticeVector{-1, -1}) == 0.125);
  CHECK_THROWS_AS(t.evaluate(LatticeVector{2, 0}), std::out_of_range);
}

TEST_CASE("description distinguishes parameters") {
  CouplingSpec a(PowerLaw{2.0}, Norm::euclidean, 1), b(PowerLaw{2.5}, Norm::euclidean, 1);
  CHECK(a.describe() != b.describe());
  CHECK(a.describe() == CouplingSpec(PowerLaw{2.0}, Norm::euclidean, 1).describe());
}

TEST_CASE("lattice shells count every point once") {
  auto shells = lattice_shells(Norm::euclidean, 2, 3.0);
  std::uint64_t total = 0;
  for (const auto& s : shells) total += s.count;
  // Nonzero points of Z^2 with |y| <= 3.
  std::uint64_t brute = 0;
  for (int x = -3; x <= 3; ++x)
    for (int y = -3; y <= 3; ++y)
      if ((x || y) && x * x + y * y <= 9) ++brute;
  CHECK(total == brute);
  CHECK(shells.front().norm == 1.0);
  CHECK(shells.front().count == 4);
}

TEST_CASE("hypothesis checks on the reference families") {
  CouplingSpec pl(PowerLaw{2.0}, Norm::euclidean, 1);
  auto h1 = check_h1(pl, 1000);
  CHECK(h1.verdict == Verdict::pass);
  CHECK(h1.constant == doctest::Approx(1.0));

  auto h3 = check_h3(pl, 1000);
  CHECK(h3.verdict == Verdict::pass);
  // sum over y != 0 of |y|^-2 in d = 1 is pi^2/3.
  const double exact = M_PI * M_PI / 3.0;
  CHECK(h3.partial_sum < exact);
  CHECK(h3.partial_sum + h3.tail_bound >= exact);

  CHECK(check_h5(pl, 0.5, 0.75, 1000).verdict == Verdict::pass);
  // alpha = 1/2 makes sum J^alpha the harmonic series.
  CHECK(check_h5(pl, 0.5, 0.5, 1000).verdict == Verdict::fail);

  CouplingSpec lp(LogPower{}, Norm::euclidean, 1);
  CHECK(check_h5(lp, 0.5, 0.5, 1000).verdict == Verdict::pass);

  CouplingSpec se(StretchedExp{0.5}, Norm::euclidean, 1);
  auto h5 = check_h5(se, 0.5, 0.5, 1000);
  CHECK(h5.verdict == Verdict::fail);
  CHECK(confirms_violation(se, h5));
  CHECK(h5.log_constant > 100.0);
}

TEST_CASE("H3 fails for a non-summable coupling") {
  CHECK_THROWS(CouplingSpec(PowerLaw{1.0}, Norm::euclidean, 1));
  // exp(-log r) = 1/r
  CouplingSpec j(ExpLogPoly{{0.0, 1.0}, 1.0, 1.0}, Norm::euclidean, 1);
  CHECK(check_h3(j, 100).verdict == Verdict::fail);
}

TEST_CASE("H4 finds delta on a power law") {
  CouplingSpec pl(PowerLaw{2.0}, Norm::euclidean, 1);
  auto r = check_h4(pl, {LatticeVector{100}, LatticeVector{1000}}, {0.1});
  CHECK(r.verdict == Verdict::pass);
  for (const auto& p : r.probes) {
    REQUIRE(p.delta.has_value());
    // |y - x| <= delta |x| keeps J_{0,y} within a factor 1 + eps: for |x|^-2
    // this needs (1 - delta)^-2 <= 1.1.
    CHECK(*p.delta <= 1.0 - std::pow(1.1, -0.5) + 1e-12);
  }
}
