#pragma once

// Batch-means machinery and the few test statistics used against exact
// distributions.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lrfk {

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t batches = 0;
  std::uint64_t samples = 0;
  double tau = 1.0;  // integrated autocorrelation time used to size batches
};

// tau = 1 + 2 sum_{t>=1} rho(t), summed up to the first window W with
// W >= c tau(W). Returns 1 for constant input.
double integrated_autocorrelation(std::span<const double> x, double window_factor = 6.0);

// Multi-column sample stream reduced on the fly: sums over base blocks of a
// fixed length plus a raw prefix of every column for the autocorrelation
// estimate. Memory is O(columns * (blocks + prefix)).
class BatchedSeries {
 public:
  BatchedSeries() = default;
  BatchedSeries(std::vector<std::string> columns, std::uint64_t expected_samples,
                std::size_t prefix_length = 10000);

  const std::vector<std::string>& columns() const { return names_; }
  std::size_t column(const std::string& name) const;  // throws std::out_of_range
  std::uint64_t samples() const { return samples_; }
  std::uint64_t block_length() const { return block_; }

  void push(std::span<const double> row);

  double tau(std::size_t col) const;
  // Completed base blocks of one column.
  const std::vector<double>& block_sums(std::size_t col) const { return blocks_.at(col); }
  double sum(std::size_t col) const;

  // Text form with round-trippable numbers.
  std::string serialize() const;
  static BatchedSeries parse(const std::string& text);

  // Batch sums for a batch length of `blocks_per_batch` base blocks; the
  // incomplete tail joins the last batch. lengths[b] is the sample count.
  void batches(std::size_t col, std::uint64_t blocks_per_batch, std::vector<double>& sums,
               std::vector<double>& lengths) const;

  bool operator==(const BatchedSeries& other) const = default;

 private:
  std::vector<std::string> names_;
  std::uint64_t block_ = 1;
  std::size_t prefix_length_ = 0;
  std::uint64_t samples_ = 0;
  std::vector<std::vector<double>> blocks_;  // per column, completed blocks
  std::vector<double> open_;                 // per column, current block sum
  std::vector<std::vector<double>> prefix_;  // per column, first samples
};

inline constexpr std::uint64_t kMinBatches = 20;

// Batch-means estimate of one column pooled over chains (in the given order).
// Batch length is the smallest multiple of the base block that is at least
// 20 tau, tau being the largest over chains. Throws std::runtime_error when
// fewer than kMinBatches batches result.
Estimate pooled_estimate(std::span<const BatchedSeries* const> chains, std::size_t col);
Estimate pooled_estimate(const BatchedSeries& chain, std::size_t col);

// Batch-means covariance of the two column means, same batching rule using
// the larger tau of the two.
double pooled_covariance(std::span<const BatchedSeries* const> chains, std::size_t a,
                         std::size_t b);

// Plain i.i.d. mean and standard error.
Estimate iid_estimate(std::span<const double> x);

// Upper tail P(X >= x) of a chi-square with k degrees of freedom.
double chi_square_sf(double x, double dof);

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  std::size_t cells = 0;  // after pooling
};

// Goodness of fit of counts against probabilities; cells with expected count
// below min_expected are pooled into one cell (dropped if still too small).
ChiSquareResult chi_square_gof(std::span<const std::uint64_t> counts,
                               std::span<const double> probabilities, double min_expected = 5.0);

// Two-sample test that two count vectors come from one distribution over the
// same cells; pooling as in chi_square_gof.
ChiSquareResult chi_square_homogeneity(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                                       double min_expected = 5.0);

// Two-sample Kolmogorov-Smirnov with the asymptotic Kolmogorov p-value.
struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
double kolmogorov_sf(double lambda);

// One-sided binomial tail P(X >= k), X ~ Bin(n, 1/2).
double binomial_half_sf(std::uint64_t k, std::uint64_t n);

}  // namespace lrfk
