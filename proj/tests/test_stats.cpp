#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "lrfk/random.hpp"
#include "lrfk/stats.hpp"

using namespace lrfk;

TEST_CASE("rng helpers") {
  Rng a(42), b(42), c(43);
  CHECK(a.bits() == b.bits());
  CHECK(a.bits() != c.bits());
  for (int i = 0; i < 10000; ++i) {
    const double u = a.uniform(), v = a.uniform_positive();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK((v > 0.0 && v <= 1.0));
    CHECK(a.below(7) < 7);
  }
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
}

TEST_CASE("batched series keeps exact sums and round trips") {
  BatchedSeries s({"a", "b"}, 10000);
  CHECK(s.block_length() == 10);
  double sa = 0;
  for (int i = 0; i < 10005; ++i) {
    const double row[] = {static_cast<double>(i % 7), 1.0};
    sa += row[0];
    s.push(row);
  }
  CHECK(s.samples() == 10005);
  CHECK(s.sum(0) == sa);
  CHECK(s.block_sums(0).size() == 1000);
  std::vector<double> sums, lengths;
  s.batches(0, 100, sums, lengths);
  CHECK(sums.size() == 10);
  CHECK(lengths.back() == 1005);
  CHECK(BatchedSeries::parse(s.serialize()) == s);
  CHECK_THROWS_AS(s.column("c"), std::out_of_range);
}

TEST_CASE("autocorrelation time of an AR(1) stream") {
  const double phi = 0.8;
  Rng rng(7);
  std::vector<double> x(200000);
  double v = 0;
  for (auto& xi : x) {
    const double g = std::sqrt(-2 * std::log(rng.uniform_positive())) * std::cos(2 * M_PI * rng.uniform());
    v = phi * v + g;
    xi = v;
  }
  const double tau = integrated_autocorrelation(x);
  CHECK(tau == doctest::Approx((1 + phi) / (1 - phi)).epsilon(0.1));
  std::vector<double> constant(100, 3.0);
  CHECK(integrated_autocorrelation(constant) == 1.0);

  // Batch means on the correlated stream: the error covers the true mean 0.
  BatchedSeries s({"x"}, x.size());
  for (double xi : x) s.push(std::span<const double>(&xi, 1));
  auto e = pooled_estimate(s, 0);
  CHECK(e.batches >= kMinBatches);
  // sd of the mean is sqrt(tau / (1 - phi^2) / n)
  const double truth = std::sqrt((1 + phi) / (1 - phi) / (1 - phi * phi) / x.size());
  CHECK(e.std_error == doctest::Approx(truth).epsilon(0.35));
}

TEST_CASE("error bars are calibrated on Bernoulli streams") {
  const double p = 0.3;
  int covered = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    Rng rng(derive_seed(99, rep));
    BatchedSeries s({"x"}, 2000);
    for (int i = 0; i < 2000; ++i) {
      const double v = rng.bernoulli(p) ? 1.0 : 0.0;
      s.push(std::span<const double>(&v, 1));
    }
    auto e = pooled_estimate(s, 0);
    covered += std::abs(e.mean - p) <= 3 * e.std_error;
  }
  CHECK(covered >= 990);
}

TEST_CASE("too few batches is an error") {
  BatchedSeries s({"x"}, 10);
  for (int i = 0; i < 10; ++i) {
    const double v = i;
    s.push(std::span<const double>(&v, 1));
  }
  CHECK_THROWS_AS(pooled_estimate(s, 0), std::runtime_error);
}

TEST_CASE("covariance of identical columns is the variance") {
  BatchedSeries s({"a", "b"}, 5000);
  Rng rng(2);
  for (int i = 0; i < 5000; ++i) {
    const double v = rng.uniform();
    const double row[] = {v, v};
    s.push(row);
  }
  const BatchedSeries* one[] = {&s};
  auto e = pooled_estimate(s, 0);
  CHECK(pooled_covariance(one, 0, 1) == doctest::Approx(e.std_error * e.std_error).epsilon(1e-9));
}

TEST_CASE("reference distributions") {
  CHECK(chi_square_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(binomial_half_sf(0, 10) == 1.0);
  CHECK(binomial_half_sf(10, 10) == doctest::Approx(1.0 / 1024));
  CHECK(binomial_half_sf(8, 10) == doctest::Approx(56.0 / 1024));
  CHECK(kolmogorov_sf(1.3581) == doctest::Approx(0.05).epsilon(1e-3));

  std::vector<std::uint64_t> counts{250, 250, 500};
  std::vector<double> probs{0.25, 0.25, 0.5};
  auto g = chi_square_gof(counts, probs);
  CHECK(g.statistic == 0.0);
  CHECK(g.p_value == 1.0);
  std::vector<std::uint64_t> bad{400, 100, 500};
  CHECK(chi_square_gof(bad, probs).p_value < 1e-10);

  std::vector<std::uint64_t> h1{100, 200, 300, 3}, h2{200, 400, 600, 5};
  auto h = chi_square_homogeneity(h1, h2);
  CHECK(h.statistic < 1e-2);
  CHECK(h.cells == 3);
  std::vector<std::uint64_t> h3{300, 200, 100, 3};
  CHECK(chi_square_homogeneity(h1, h3).p_value < 1e-10);

  std::vector<double> a, b;
  Rng rng(4);
  for (int i = 0; i < 2000; ++i) {
    a.push_back(rng.uniform());
    b.push_back(rng.uniform());
  }
  CHECK(ks_two_sample(a, b).p_value > 1e-3);
  for (auto& v : b) v += 0.2;
  CHECK(ks_two_sample(a, b).p_value < 1e-10);
}
