#pragma once

// Collectors turn kept sweeps into rows of a BatchedSeries; the functions
// below pool collectors from several chains into estimates.

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrfk/diagnostics.hpp"
#include "lrfk/samplers.hpp"
#include "lrfk/stats.hpp"

namespace lrfk {

// Series plus plain counters and capped value lists; one per chain.
struct CollectorState {
  BatchedSeries series;
  std::map<std::string, std::uint64_t> counters;
  std::map<std::string, std::vector<double>> values;

  std::string serialize() const;
  static CollectorState parse(const std::string& text);
  bool operator==(const CollectorState& other) const = default;
};

class Collector {
 public:
  virtual ~Collector() = default;
  virtual void observe(const ChainState& state) = 0;
  const CollectorState& state() const { return state_; }
  CollectorState& state() { return state_; }

 protected:
  CollectorState state_;
};

// Origins and targets of a scan. Every origin y of `window` (|y - origin| <=
// window radius) is used in turn; a target offset x contributes the pairs
// (y, y + x) with both ends in the window. A zero radius is the plain
// single-origin estimator.
struct TargetPairs {
  LatticeVector offset;
  double abs_x = 0.0;
  double j0x = 0.0;
  std::vector<std::pair<VertexId, VertexId>> pairs;
};

struct ScanGeometry {
  LatticeVector origin;
  double window_radius = 0.0;
  std::vector<VertexId> window;
  std::vector<TargetPairs> targets;
};

ScanGeometry make_geometry(const FkModel& model, const LatticeVector& origin, double window_radius,
                           const std::vector<LatticeVector>& targets);

// Origins only, for estimators without targets.
ScanGeometry make_window(const FkModel& model, const LatticeVector& origin, double window_radius);

std::string target_label(const LatticeVector& x);

// c1 variants used for f(x): half, hint, double.
inline constexpr std::array<double, 3> kC1Factors = {0.5, 1.0, 2.0};
inline constexpr std::array<const char*, 3> kC1Names = {"half", "hint", "double"};
inline constexpr std::size_t kValueCap = 100000;

struct ConnectionOptions {
  std::optional<double> c1_hint;  // enables the D-event and bridge columns
  double gamma = 0.5;
};

// Columns: chi (mean |C(y)| over the window), connect:<x> (fraction of pairs
// connected) and, with a c1 hint, dcomp:<x>:<v> (fraction of pair origins
// with |C(y)| >= f(x)) and lemma:<x>:<v> (fraction of pairs with y <-> y+x,
// |C(y)| < f(x) and R_0 >= |x|^gamma). Counters hold the pigeonhole audit;
// values hold L, R0, Rx of connected pairs.
class ConnectionCollector : public Collector {
 public:
  ConnectionCollector(const FkModel& model, const ScanGeometry& geometry,
                      const ConnectionOptions& options, std::uint64_t expected_samples);
  void observe(const ChainState& state) override;

 private:
  const FkModel* model_;
  const ScanGeometry* geometry_;
  ConnectionOptions options_;
  std::vector<std::array<double, 3>> f_;  // per target and variant
  std::vector<double> row_;
};

// Columns: size (mean |C(y)|) and tail:<n> (fraction of window origins with
// |C(y)| >= n).
class TailCollector : public Collector {
 public:
  TailCollector(const ScanGeometry& geometry, std::vector<std::uint64_t> thresholds,
                std::uint64_t expected_samples);
  void observe(const ChainState& state) override;

 private:
  const ScanGeometry* geometry_;
  std::vector<std::uint64_t> thresholds_;
  std::vector<double> row_;
};

// Colour and bond marginals of the same ES step. Columns same:<i>, conn:<i>,
// resid:<i> = [same] - 1/q - (q-1)/q [conn].
class PottsCollector : public Collector {
 public:
  PottsCollector(const FkModel& model, std::vector<std::pair<VertexId, VertexId>> pairs,
                 std::uint64_t expected_samples);
  void observe(const ChainState& state) override;

 private:
  double q_;
  std::vector<std::pair<VertexId, VertexId>> pairs_;
  std::vector<double> row_;
};

// Indicator of every configuration mask, for chi-square checks on tiny boxes.
class ConfigurationCounter : public Collector {
 public:
  explicit ConfigurationCounter(EdgeId edge_count);
  void observe(const ChainState& state) override;
  const std::vector<std::uint64_t>& counts() const { return counts_; }

 private:
  std::vector<std::uint64_t> counts_;
};

std::vector<const CollectorState*> states_of(std::span<const std::unique_ptr<Collector>> chains);

Estimate pooled(std::span<const CollectorState* const> chains, const std::string& column);

std::vector<Estimate> two_point(std::span<const CollectorState* const> chains, const ScanGeometry& geometry);
Estimate susceptibility(std::span<const CollectorState* const> chains);

struct TailFit {
  std::vector<std::uint64_t> thresholds;
  std::vector<Estimate> tail;
  std::vector<std::size_t> fit_points;  // indices into thresholds
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;  // per fit point
  std::uint64_t sign_successes = 0;
  std::uint64_t sign_trials = 0;
  double convex_p_value = 1.0;
  bool exponential_consistent = false;
  double c1() const { return -slope; }
};

// Weighted least squares of log P(|C| >= n) on n over thresholds with
// P >= 10 / samples and a positive error. Slope error by
// jackknife over 20 groups of base blocks. Convexity: residuals of the outer
// thirds above the line and of the middle third below, one-sided sign test
// at 1e-2.
TailFit cluster_tail(std::span<const CollectorState* const> chains, std::vector<std::uint64_t> thresholds);

struct BridgeSummary {
  std::uint64_t connected = 0;
  std::uint64_t bridged = 0;  // L present
  std::array<std::uint64_t, 3> qualifying{};
  std::array<std::uint64_t, 3> holds{};
  std::vector<double> L, R0, Rx;  // pooled, capped per chain
};

struct RatioRecord {
  LatticeVector x;
  double abs_x = 0.0;
  double j0x = 0.0;
  Estimate mu;
  Estimate chi;
  double r = 0.0;
  double r_se = 0.0;
  std::array<Estimate, 3> dcomp;
  std::array<double, 3> dcomp_ratio{};  // mu(D_0^c) / J
  std::array<Estimate, 3> lemma;
  std::array<double, 3> lemma_ratio{};
  BridgeSummary bridge;
};

struct RatioScan {
  double beta = 0.0;
  double q = 0.0;
  std::optional<double> c1_hint;
  double gamma = 0.5;
  std::vector<RatioRecord> records;
};

// r(x) = q mu(0<->x) / (beta chi^2 J_{0,x}) with delta-method error using the
// batch covariance of mu and chi.
RatioScan ratio_scan(std::span<const CollectorState* const> chains, const FkModel& model,
                     const ScanGeometry& geometry, const ConnectionOptions& options);

BridgeSummary bridge_summary(std::span<const CollectorState* const> chains, const LatticeVector& x);

struct PottsPairEstimate {
  std::pair<VertexId, VertexId> pair;
  Estimate same, connected, residual;
};
std::vector<PottsPairEstimate> potts_correlation(std::span<const CollectorState* const> chains,
                                                 std::span<const std::pair<VertexId, VertexId>> pairs);

}  // namespace lrfk
