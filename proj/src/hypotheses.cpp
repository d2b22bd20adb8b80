#include "lrfk/hypotheses.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <map>
#include <stdexcept>

namespace lrfk {

std::string_view to_string(Hypothesis h) {
  switch (h) {
    case Hypothesis::H1: return "H1";
    case Hypothesis::H3: return "H3";
    case Hypothesis::H4: return "H4";
    case Hypothesis::H5: return "H5";
  }
  return "?";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Calls fn(y) for every lattice point y in center + [-half, half]^d.
template <class Fn>
void for_each_in_cube(const LatticeVector& center, std::int64_t half, Fn&& fn) {
  const std::size_t d = center.size();
  LatticeVector y(d);
  for (std::size_t i = 0; i < d; ++i) y[i] = center[i] - half;
  while (true) {
    fn(static_cast<const LatticeVector&>(y));
    std::size_t i = d;
    while (i-- > 0) {
      if (y[i] < center[i] + half) {
        ++y[i];
        break;
      }
      y[i] = center[i] - half;
      if (i == 0) return;
    }
  }
}

void check_cube_size(int d, std::int64_t half) {
  const double points = std::pow(2.0 * static_cast<double>(half) + 1.0, d);
  if (points > static_cast<double>(1u << 27))
    throw std::invalid_argument("scan radius too large for dimension " + std::to_string(d));
}

void check_radius(double radius) {
  if (!(radius >= 2.0)) throw std::invalid_argument("scan radius must be >= 2");
}

bool is_zero(const LatticeVector& y) {
  return std::all_of(y.begin(), y.end(), [](auto c) { return c == 0; });
}

// Nonzero lattice points with |y| <= radius, ordered by norm then lexicographically.
std::vector<std::pair<double, LatticeVector>> ball_points(Norm norm, int d, double radius) {
  const auto half = static_cast<std::int64_t>(std::floor(radius));
  check_cube_size(d, half);
  std::vector<std::pair<double, LatticeVector>> pts;
  for_each_in_cube(LatticeVector(d, 0), half, [&](const LatticeVector& y) {
    if (is_zero(y)) return;
    double r = norm_of(y, norm);
    if (r <= radius) pts.emplace_back(r, y);
  });
  std::sort(pts.begin(), pts.end());
  return pts;
}

// d/dr(-J)/J, i.e. the log-slope of the radial profile, without forming J.
double slope_ratio(const CouplingSpec& spec, double r) {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          return f.c / r;
        } else if constexpr (std::is_same_v<T, LogPower>) {
          return 2.0 * std::log(r) / r;
        } else if constexpr (std::is_same_v<T, ExpLogPoly>) {
          double p = 0.0, dp = 0.0;
          for (std::size_t k = f.coefficients.size(); k-- > 0;) {
            dp = dp * r + p;
            p = p * r + f.coefficients[k];
          }
          const double lp = std::log(p);
          return f.scale * f.exponent * std::pow(lp, f.exponent - 1.0) * dp / p;
        } else if constexpr (std::is_same_v<T, StretchedExp>) {
          return f.eta * std::pow(r, f.eta - 1.0);
        } else {
          throw std::logic_error("table couplings have no radial profile");
        }
      },
      spec.family());
}

// Whether sum_y J_{0,y}^power converges, decided from the family's form.
bool power_sum_converges(const CouplingSpec& spec, double power) {
  const int d = spec.dimension();
  return std::visit(
      [&](const auto& f) -> bool {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          return f.c * power > d;
        } else if constexpr (std::is_same_v<T, ExpLogPoly>) {
          if (f.exponent > 1.0) return true;
          if (f.exponent < 1.0) return false;
          const double degree = static_cast<double>(f.coefficients.size() - 1);
          return power * f.scale * degree > d;
        } else {
          return true;
        }
      },
      spec.family());
}

}  // namespace

std::vector<Shell> lattice_shells(Norm norm, int d, double radius) {
  const auto half = static_cast<std::int64_t>(std::floor(radius));
  check_cube_size(d, half);
  // Integer keys keep equal norms together without floating comparisons.
  std::map<std::int64_t, Shell> shells;
  for_each_in_cube(LatticeVector(d, 0), half, [&](const LatticeVector& y) {
    if (is_zero(y)) return;
    double r = norm_of(y, norm);
    if (r > radius) return;
    std::int64_t key = 0;
    if (norm == Norm::euclidean) {
      for (auto c : y) key += c * c;
    } else {
      key = static_cast<std::int64_t>(r);
    }
    auto& s = shells[key];
    s.norm = r;
    ++s.count;
    s.representative = y;
  });
  std::vector<Shell> out;
  out.reserve(shells.size());
  for (auto& [k, s] : shells) out.push_back(std::move(s));
  return out;
}

double radial_tail_bound(const CouplingSpec& spec, double radius, double power) {
  if (!spec.radial()) throw std::invalid_argument("no analytic tail for table couplings");
  if (!power_sum_converges(spec, power)) return kInf;
  const int d = spec.dimension();
  const double volume = unit_ball_volume(spec.norm(), d);
  const double rho = half_cube_radius(spec.norm(), d);
  if (const auto* pl = std::get_if<PowerLaw>(&spec.family())) {
    const double a = pl->c * power;
    return volume * std::pow(1.0 + rho / radius, d) * a / (a - d) * std::pow(radius, d - a);
  }
  auto integrand = [&](double r) {
    if (!(r > 0.0)) return 0.0;
    const double log_j = spec.log_radial(std::log(r));
    const double v = volume * std::pow(r + rho, d) * power * std::exp(power * log_j) *
                     slope_ratio(spec, r);
    return std::isfinite(v) ? v : 0.0;
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  double err = 0.0;
  const double value = integrator.integrate(
      [&](double t) { return integrand(radius + t); }, 0.0, kInf,
      std::sqrt(std::numeric_limits<double>::epsilon()), &err);
  return value + err;
}

HypothesisReport check_h1(const CouplingSpec& spec, double radius) {
  check_radius(radius);
  HypothesisReport rep;
  rep.hypothesis = Hypothesis::H1;
  rep.scan_radius = radius;

  // Points ordered by norm: the tightest c is max_x J(x) / min_{|y| <= |x|} J(y).
  std::vector<std::pair<double, LatticeVector>> pts;
  if (spec.radial()) {
    for (auto& s : lattice_shells(spec.norm(), spec.dimension(), radius))
      pts.emplace_back(s.norm, std::move(s.representative));
  } else {
    pts = ball_points(spec.norm(), spec.dimension(), radius);
  }
  double c = 0.0;
  double min_j = kInf;
  const LatticeVector* min_y = nullptr;
  std::size_t i = 0;
  while (i < pts.size()) {
    // All points of one norm value are added to the running minimum first,
    // since |x| >= |y| includes ties.
    std::size_t end = i;
    std::vector<double> js;
    while (end < pts.size() && pts[end].first == pts[i].first) {
      double j = spec.evaluate(pts[end].second);
      if (!(j > 0.0)) {
        rep.verdict = Verdict::fail;
        rep.violation = {pts[end].second};
        rep.note = "J_{0,y} = 0: coupling is not strictly positive";
        return rep;
      }
      js.push_back(j);
      if (j < min_j) {
        min_j = j;
        min_y = &pts[end].second;
      }
      ++end;
    }
    for (std::size_t k = i; k < end; ++k) {
      double ratio = js[k - i] / min_j;
      if (ratio > c) {
        c = ratio;
        rep.binding = {pts[k].second, *min_y};
      }
    }
    i = end;
  }
  rep.constant = c;
  rep.verdict = Verdict::pass;
  rep.note = "minimal c over the scan";
  return rep;
}

HypothesisReport check_h3(const CouplingSpec& spec, double radius) {
  check_radius(radius);
  HypothesisReport rep;
  rep.hypothesis = Hypothesis::H3;
  rep.scan_radius = radius;
  long double sum = 0.0L;
  if (spec.radial()) {
    for (const auto& s : lattice_shells(spec.norm(), spec.dimension(), radius))
      sum += static_cast<long double>(s.count) * spec.radial_value(s.norm);
    rep.partial_sum = static_cast<double>(sum);
    rep.tail_bound = radial_tail_bound(spec, radius, 1.0);
    if (std::isfinite(rep.tail_bound)) {
      rep.verdict = Verdict::pass;
    } else {
      rep.verdict = Verdict::fail;
      rep.note = "sum of J_{0,y} diverges for this family";
    }
  } else {
    for (const auto& [r, y] : ball_points(spec.norm(), spec.dimension(), radius))
      sum += spec.evaluate(y);
    rep.partial_sum = static_cast<double>(sum);
    rep.tail_bound = std::numeric_limits<double>::quiet_NaN();
    rep.verdict = Verdict::inconclusive;
    rep.note = "table family: no tail information";
  }
  return rep;
}

HypothesisReport check_h4(const CouplingSpec& spec, const std::vector<LatticeVector>& probe_points,
                          const std::vector<double>& epsilons, const H4Options& options) {
  if (probe_points.empty()) throw std::invalid_argument("check_h4: empty probe list");
  if (epsilons.empty()) throw std::invalid_argument("check_h4: empty epsilon list");
  for (double e : epsilons)
    if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("check_h4: epsilon must be in (0,1)");
  HypothesisReport rep;
  rep.hypothesis = Hypothesis::H4;
  rep.verdict = Verdict::pass;
  const double step = std::pow(10.0, 1.0 / options.points_per_decade);

  for (const auto& x : probe_points) {
    if (is_zero(x)) throw std::invalid_argument("check_h4: probe point must be nonzero");
    const double jx = spec.evaluate(x);
    const double abs_x = norm_of(x, spec.norm());
    rep.scan_radius = std::max(rep.scan_radius, abs_x);
    std::vector<double> grid;
    for (double delta = std::min(options.delta_floor, 1.0 / abs_x); delta <= options.delta_max;
         delta *= step)
      grid.push_back(delta);

    for (double eps : epsilons) {
      H4Probe probe{x, eps, std::nullopt, false, grid.front()};
      std::optional<LatticeVector> witness;
      // Windows grow with delta, so the passing deltas form a prefix.
      for (double delta : grid) {
        const double reach = delta * abs_x * (1.0 + 1e-12);
        bool ok = true;
        bool empty = true;
        for_each_in_cube(x, static_cast<std::int64_t>(std::floor(reach)), [&](const LatticeVector& y) {
          if (!ok || y == x) return;
          LatticeVector diff(y.size());
          for (std::size_t i = 0; i < y.size(); ++i) diff[i] = y[i] - x[i];
          if (norm_of(diff, spec.norm()) > reach) return;
          empty = false;
          if (std::abs(jx - spec.evaluate(y)) > eps * jx) {
            ok = false;
            witness = y;
          }
        });
        if (!ok) break;
        probe.delta = delta;
        probe.vacuous = empty;
      }
      if (!probe.delta) {
        rep.verdict = Verdict::fail;
        if (rep.violation.empty()) rep.violation = {x, *witness};
      }
      rep.probes.push_back(std::move(probe));
    }
  }
  return rep;
}

H5Point h5_required(const CouplingSpec& spec, double s, double gamma, double alpha) {
  H5Point p;
  p.log_abs_x = s;
  const double log_jx = spec.log_radial(s);
  const double l = log_jx * log_jx;
  if (l == 0.0) {
    // |u| >= |x| / 0 admits no u: nothing to bound.
    p.log_abs_u = p.log_abs_v = kInf;
    p.log_constant = -kInf;
    return p;
  }
  const double log_l = std::log(l);
  // Smallest admissible norms maximize the left side; clipped at the shortest
  // nonzero lattice norm, 1.
  p.log_abs_u = std::max(s - log_l, 0.0);
  p.log_abs_v = std::max(gamma * s - log_l, 0.0);
  p.log_constant = log_l + spec.log_radial(p.log_abs_u) +
                   (1.0 - alpha) * spec.log_radial(p.log_abs_v) - log_jx;
  return p;
}

HypothesisReport check_h5(const CouplingSpec& spec, double gamma, double alpha, double radius,
                          const H5Options& options) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("check_h5: gamma must be in (0,1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("check_h5: alpha must be in (0,1)");
  check_radius(radius);
  HypothesisReport rep;
  rep.hypothesis = Hypothesis::H5;
  rep.scan_radius = radius;
  rep.gamma = gamma;
  rep.alpha = alpha;

  const double c = check_h1(spec, radius).constant;
  const double log_c2 = 2.0 * std::log(c);

  if (!spec.radial()) {
    // Table: worst-case u, v are the largest couplings among admissible scan points.
    auto pts = ball_points(spec.norm(), spec.dimension(), radius);
    std::vector<double> js(pts.size()), suffix_max(pts.size() + 1, 0.0);
    long double sum = 0.0L;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      js[i] = spec.evaluate(pts[i].second);
      sum += std::pow(js[i], alpha);
    }
    for (std::size_t i = pts.size(); i-- > 0;) suffix_max[i] = std::max(suffix_max[i + 1], js[i]);
    rep.partial_sum = static_cast<double>(sum);
    rep.tail_bound = std::numeric_limits<double>::quiet_NaN();
    double best = -kInf;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double lj = std::log(js[i]);
      const double l = lj * lj;
      if (l == 0.0) continue;
      const double u_min = pts[i].first / l;
      const double v_min = std::pow(pts[i].first, gamma) / l;
      auto first_at_least = [&](double r) {
        return std::lower_bound(pts.begin(), pts.end(), r,
                                [](const auto& p, double v) { return p.first < v; }) -
               pts.begin();
      };
      const auto iu = static_cast<std::size_t>(first_at_least(u_min));
      const auto iv = static_cast<std::size_t>(first_at_least(v_min));
      if (iu >= pts.size() || iv >= pts.size()) continue;
      H5Point p{std::log(pts[i].first), std::log(pts[iu].first), std::log(pts[iv].first),
                log_c2 + std::log(l) + std::log(suffix_max[iu]) +
                    (1.0 - alpha) * std::log(suffix_max[iv]) - lj};
      rep.profile.push_back(p);
      if (p.log_constant > best) {
        best = p.log_constant;
        rep.violation = {pts[i].second};
      }
    }
    rep.log_constant = best;
    rep.constant = std::exp(best);
    if (best > options.log_cap) {
      rep.verdict = Verdict::fail;
      rep.note = "required constant exceeds the configured cap";
    } else {
      rep.violation.clear();
      rep.verdict = Verdict::inconclusive;
      rep.note = "table family: no asymptotic information";
    }
    return rep;
  }

  long double sum = 0.0L;
  auto shells = lattice_shells(spec.norm(), spec.dimension(), radius);
  for (const auto& s : shells)
    sum += static_cast<long double>(s.count) * std::exp(alpha * spec.log_radial(std::log(s.norm)));
  rep.partial_sum = static_cast<double>(sum);
  rep.tail_bound = radial_tail_bound(spec, radius, alpha);
  if (!std::isfinite(rep.tail_bound)) {
    rep.verdict = Verdict::fail;
    rep.note = "sum of J^alpha diverges";
    rep.violation_norms = {std::log(radius)};
    return rep;
  }

  double scan_max = -kInf;
  for (const auto& s : shells) {
    H5Point p = h5_required(spec, std::log(s.norm), gamma, alpha);
    p.log_constant += log_c2;
    rep.profile.push_back(p);
    scan_max = std::max(scan_max, p.log_constant);
  }
  rep.constant = std::exp(scan_max);

  // Follow the radial profile far beyond the lattice scan to see whether the
  // required constant turns over or keeps growing.
  std::vector<H5Point> probe;
  const double s0 = std::log(radius);
  const double s1 = std::max(options.probe_log_radius, s0 + 1.0);
  for (int k = 0; k <= options.probe_points; ++k) {
    const double s = s0 + (s1 - s0) * k / options.probe_points;
    H5Point p;
    try {
      p = h5_required(spec, s, gamma, alpha);
    } catch (const std::domain_error&) {
      break;
    }
    p.log_constant += log_c2;
    if (!std::isfinite(p.log_constant)) break;
    probe.push_back(p);
  }
  double sup = scan_max;
  for (const auto& p : probe) sup = std::max(sup, p.log_constant);
  rep.log_constant = sup;

  const auto w = static_cast<std::size_t>(std::max(options.trend_window, 2));
  bool diverging = probe.size() >= w;
  for (std::size_t i = probe.size() - std::min(w, probe.size()) + 1; diverging && i < probe.size(); ++i)
    diverging = probe[i].log_constant > probe[i - 1].log_constant;

  if (diverging || sup > options.log_cap) {
    rep.verdict = Verdict::fail;
    const H5Point& last = probe.back();
    rep.violation_norms = {last.log_abs_x, last.log_abs_u, last.log_abs_v};
    rep.note = diverging ? "required constant still increasing at log|x|=" +
                               std::to_string(last.log_abs_x) + ": diverging"
                         : "required constant exceeds the configured cap";
  } else {
    rep.verdict = Verdict::pass;
    rep.note = "required constant turns over inside the radial probe";
  }
  return rep;
}

bool confirms_violation(const CouplingSpec& spec, const HypothesisReport& rep) {
  if (rep.verdict != Verdict::fail) return false;
  switch (rep.hypothesis) {
    case Hypothesis::H1:
      return rep.violation.size() == 1 && !(spec.evaluate(rep.violation[0]) > 0.0);
    case Hypothesis::H3:
      return spec.radial() && !std::isfinite(radial_tail_bound(spec, rep.scan_radius, 1.0));
    case Hypothesis::H4: {
      if (rep.violation.size() != 2) return false;
      const auto& x = rep.violation[0];
      const auto& y = rep.violation[1];
      LatticeVector diff(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) diff[i] = y[i] - x[i];
      const double abs_x = norm_of(x, spec.norm());
      const double jx = spec.evaluate(x), jy = spec.evaluate(y);
      for (const auto& p : rep.probes) {
        if (p.x != x || p.delta) continue;
        if (norm_of(diff, spec.norm()) <= p.smallest_delta * abs_x * (1.0 + 1e-12) &&
            std::abs(jx - jy) > p.epsilon * jx)
          return true;
      }
      return false;
    }
    case Hypothesis::H5: {
      if (!spec.radial()) return rep.log_constant > 0.0 && std::isfinite(rep.log_constant);
      if (rep.violation_norms.size() == 1)
        return !std::isfinite(radial_tail_bound(spec, rep.scan_radius, rep.alpha));
      if (rep.violation_norms.size() != 3) return false;
      const double log_c2 = 2.0 * std::log(check_h1(spec, rep.scan_radius).constant);
      const double at_witness =
          h5_required(spec, rep.violation_norms[0], rep.gamma, rep.alpha).log_constant + log_c2;
      return at_witness > std::log(rep.constant);
    }
  }
  return false;
}

}  // namespace lrfk
