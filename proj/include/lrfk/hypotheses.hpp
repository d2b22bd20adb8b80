#pragma once

// Finite-range audits of the coupling hypotheses. A pass means no violation
// was found up to the scan radius with a stable constant; nothing here is a
// proof.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lrfk/couplings.hpp"

namespace lrfk {

enum class Hypothesis { H1, H3, H4, H5 };
enum class Verdict { pass, fail, inconclusive };

std::string_view to_string(Hypothesis h);
std::string_view to_string(Verdict v);

struct H4Probe {
  LatticeVector x;
  double epsilon = 0.0;
  std::optional<double> delta;  // largest passing grid value, if any
  bool vacuous = false;         // passing window held no lattice point y != x
  double smallest_delta = 0.0;  // start of the grid for this x
};

// One point of the H5 required-constant profile: log-norms of x and of the
// worst-case u and v, with the constant kept in log form (it overflows for
// some families long before the profile turns over).
struct H5Point {
  double log_abs_x = 0.0;
  double log_abs_u = 0.0;
  double log_abs_v = 0.0;
  double log_constant = 0.0;
};

struct HypothesisReport {
  Hypothesis hypothesis = Hypothesis::H1;
  Verdict verdict = Verdict::inconclusive;
  double scan_radius = 0.0;

  double constant = 0.0;      // c for H1, lattice-scan C1 for H5
  double log_constant = 0.0;  // log of the supremum over the probe (H5)
  double partial_sum = 0.0;   // sum over 0 < |y| <= radius (J for H3, J^alpha for H5)
  double tail_bound = 0.0;    // analytic bound on the rest; +inf when divergent
  double gamma = 0.0;
  double alpha = 0.0;
  std::vector<H4Probe> probes;
  std::vector<H5Point> profile;

  // Concrete violating tuple: (y) for H1, (x, y) for H4, log-norms
  // (log|x|, log|u|, log|v|) for H5 in `violation_norms`.
  std::vector<LatticeVector> violation;
  std::vector<double> violation_norms;
  // Pair attaining the H1 constant (informational).
  std::vector<LatticeVector> binding;
  std::string note;
};

HypothesisReport check_h1(const CouplingSpec& spec, double radius);

HypothesisReport check_h3(const CouplingSpec& spec, double radius);

struct H4Options {
  double delta_floor = 1e-2;  // grid starts at min(delta_floor, 1/|x|)
  double delta_max = 0.75;
  int points_per_decade = 8;
};

HypothesisReport check_h4(const CouplingSpec& spec, const std::vector<LatticeVector>& probe_points,
                          const std::vector<double>& epsilons, const H4Options& options = {});

struct H5Options {
  double probe_log_radius = 2000.0;  // radial profile is followed up to |x| = e^this
  int probe_points = 4000;
  int trend_window = 16;             // trailing profile points that decide divergence
  double log_cap = std::numeric_limits<double>::infinity();
};

HypothesisReport check_h5(const CouplingSpec& spec, double gamma, double alpha, double radius,
                          const H5Options& options = {});

// Analytic bound on sum_{|y| > radius} J_{0,y}^power for built-in families,
// by integration by parts against the lattice-point count bound
// #{|y| <= r} <= V (r + rho)^d. Returns +inf when the integral diverges.
double radial_tail_bound(const CouplingSpec& spec, double radius, double power = 1.0);

// Required H5 constant at |x| (log form), before the H1 factor.
H5Point h5_required(const CouplingSpec& spec, double log_abs_x, double gamma, double alpha);

// Re-evaluates the witness of a fail report; true when it is a genuine
// violation.
bool confirms_violation(const CouplingSpec& spec, const HypothesisReport& report);

struct Shell {
  double norm = 0.0;
  std::uint64_t count = 0;
  LatticeVector representative;
};

// Distinct norm values of nonzero lattice points with |y| <= radius, with
// multiplicities, in increasing order.
std::vector<Shell> lattice_shells(Norm norm, int dimension, double radius);

}  // namespace lrfk
