#include "lrfk/couplings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "lrfk/text.hpp"

namespace lrfk {

double norm_of(std::span<const std::int64_t> v, Norm norm) {
  switch (norm) {
    case Norm::euclidean: {
      // Integer sum of squares keeps equal-length vectors bit-identical.
      std::int64_t s = 0;
      for (auto c : v) s += c * c;
      return std::sqrt(static_cast<double>(s));
    }
    case Norm::sup: {
      std::int64_t m = 0;
      for (auto c : v) m = std::max(m, c < 0 ? -c : c);
      return static_cast<double>(m);
    }
    case Norm::l1: {
      std::int64_t s = 0;
      for (auto c : v) s += c < 0 ? -c : c;
      return static_cast<double>(s);
    }
  }
  throw std::logic_error("unknown norm");
}

Norm parse_norm(std::string_view name) {
  if (name == "euclidean") return Norm::euclidean;
  if (name == "sup") return Norm::sup;
  if (name == "l1") return Norm::l1;
  throw std::invalid_argument("unknown norm '" + std::string(name) + "'");
}

std::string_view to_string(Norm norm) {
  switch (norm) {
    case Norm::euclidean: return "euclidean";
    case Norm::sup: return "sup";
    case Norm::l1: return "l1";
  }
  return "?";
}

double unit_ball_volume(Norm norm, int d) {
  switch (norm) {
    case Norm::euclidean:
      return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
    case Norm::sup:
      return std::pow(2.0, d);
    case Norm::l1:
      return std::pow(2.0, d) / std::tgamma(d + 1.0);
  }
  return 0.0;
}

double half_cube_radius(Norm norm, int d) {
  switch (norm) {
    case Norm::euclidean: return std::sqrt(static_cast<double>(d)) / 2.0;
    case Norm::sup: return 0.5;
    case Norm::l1: return d / 2.0;
  }
  return 0.0;
}

namespace {

double poly_value(const std::vector<double>& a, double r) {
  double v = 0.0;
  for (auto it = a.rbegin(); it != a.rend(); ++it) v = v * r + *it;
  return v;
}

double poly_derivative(const std::vector<double>& a, double r) {
  double v = 0.0;
  for (std::size_t k = a.size(); k-- > 1;) v = v * r + static_cast<double>(k) * a[k];
  return v;
}

// log p(e^s), stable for large s through the leading term.
double log_poly_at_log(const std::vector<double>& a, double s) {
  if (s < 30.0) {
    double p = poly_value(a, std::exp(s));
    if (!(p > 0.0)) throw std::domain_error("exp_log_poly: p(|x|) <= 0");
    return std::log(p);
  }
  const std::size_t n = a.size() - 1;
  double rest = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    rest += a[k] / a[n] * std::exp((static_cast<double>(k) - static_cast<double>(n)) * s);
  return std::log(a[n]) + static_cast<double>(n) * s + std::log1p(rest);
}

double signed_power(double base, double exponent) {
  if (base < 0.0 && exponent != std::floor(exponent))
    throw std::domain_error("exp_log_poly: log p(|x|) < 0 with non-integer exponent");
  return std::pow(base, exponent);
}

void validate(const CouplingFamily& family, int d) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  std::visit(
      [d](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          if (!(f.c > d))
            throw std::invalid_argument("power_law requires c > d (got c=" +
                                        format_double(f.c) + ", d=" + std::to_string(d) + ")");
        } else if constexpr (std::is_same_v<T, ExpLogPoly>) {
          if (f.coefficients.size() < 2 || !(f.coefficients.back() > 0.0))
            throw std::invalid_argument(
                "exp_log_poly needs a polynomial of degree >= 1 with positive leading coefficient");
          if (!(f.scale > 0.0) || !(f.exponent > 0.0))
            throw std::invalid_argument("exp_log_poly needs scale > 0 and exponent > 0");
        } else if constexpr (std::is_same_v<T, StretchedExp>) {
          if (!(f.eta > 0.0)) throw std::invalid_argument("stretched_exp needs eta > 0");
        } else if constexpr (std::is_same_v<T, CouplingTable>) {
          if (f.entries.empty()) throw std::invalid_argument("coupling table is empty");
          for (const auto& [x, j] : f.entries) {
            if (static_cast<int>(x.size()) != d)
              throw std::invalid_argument("coupling table entry has wrong dimension");
            if (std::all_of(x.begin(), x.end(), [](auto c) { return c == 0; }))
              throw std::invalid_argument("coupling table contains the zero vector");
            if (!(j > 0.0) || !std::isfinite(j))
              throw std::invalid_argument("coupling table entry must be positive");
          }
        }
      },
      family);
}

CouplingTable symmetrize(CouplingTable table) {
  CouplingTable out = table;
  for (const auto& [x, j] : table.entries) {
    LatticeVector neg(x.size());
    std::transform(x.begin(), x.end(), neg.begin(), [](auto c) { return -c; });
    auto it = table.entries.find(neg);
    if (it != table.entries.end() && it->second != j)
      throw std::invalid_argument("coupling table is not symmetric under x -> -x");
    out.entries.emplace(neg, j);
  }
  return out;
}

}  // namespace

std::string family_name(const CouplingFamily& family) {
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerLaw>) return "power_law";
        else if constexpr (std::is_same_v<T, LogPower>) return "log_power";
        else if constexpr (std::is_same_v<T, ExpLogPoly>) return "exp_log_poly";
        else if constexpr (std::is_same_v<T, StretchedExp>) return "stretched_exp";
        else return "table";
      },
      family);
}

CouplingSpec::CouplingSpec(CouplingFamily family, Norm norm, int dimension)
    : family_(std::move(family)), norm_(norm), dimension_(dimension) {
  validate(family_, dimension_);
  if (auto* t = std::get_if<CouplingTable>(&family_)) *t = symmetrize(std::move(*t));
}

CouplingSpec CouplingSpec::load_table(const std::filesystem::path& path, Norm norm,
                                      int dimension) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open coupling table " + path.string());
  CouplingTable table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto tab = t.find('\t');
    if (tab == std::string_view::npos)
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                  ": expected 'x-vector<TAB>J-value'");
    LatticeVector x = parse_lattice_vector(t.substr(0, tab));
    double j = parse_double(trim(t.substr(tab + 1)));
    if (!table.entries.emplace(std::move(x), j).second)
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                  ": duplicate entry");
  }
  return CouplingSpec(std::move(table), norm, dimension);
}

bool CouplingSpec::radial() const { return !std::holds_alternative<CouplingTable>(family_); }

double CouplingSpec::evaluate(std::span<const std::int64_t> x) const {
  if (static_cast<int>(x.size()) != dimension_)
    throw std::invalid_argument("lattice vector has wrong dimension");
  if (std::all_of(x.begin(), x.end(), [](auto c) { return c == 0; }))
    throw std::invalid_argument("J_{0,0} is undefined (self-edges do not exist)");
  if (const auto* t = std::get_if<CouplingTable>(&family_)) {
    auto it = t->entries.find(LatticeVector(x.begin(), x.end()));
    if (it == t->entries.end())
      throw std::out_of_range("no coupling table entry for " + format_lattice_vector(x));
    return it->second;
  }
  return radial_value(norm_of(x, norm_));
}

double CouplingSpec::between(std::span<const std::int64_t> x,
                             std::span<const std::int64_t> y) const {
  if (x.size() != y.size()) throw std::invalid_argument("dimension mismatch");
  LatticeVector d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = y[i] - x[i];
  return evaluate(d);
}

double CouplingSpec::radial_value(double r) const {
  if (!(r > 0.0)) throw std::invalid_argument("radial value needs r > 0");
  return std::visit(
      [r](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          return std::pow(r, -f.c);
        } else if constexpr (std::is_same_v<T, LogPower>) {
          const double l = std::log(r);
          return std::exp(-l * l);
        } else if constexpr (std::is_same_v<T, ExpLogPoly>) {
          const double p = poly_value(f.coefficients, r);
          if (!(p > 0.0)) throw std::domain_error("exp_log_poly: p(|x|) <= 0");
          return std::exp(-f.scale * signed_power(std::log(p), f.exponent));
        } else if constexpr (std::is_same_v<T, StretchedExp>) {
          return std::exp(-std::pow(r, f.eta));
        } else {
          throw std::logic_error("table couplings have no radial profile");
        }
      },
      family_);
}

double CouplingSpec::log_radial(double s) const {
  return std::visit(
      [s](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          return -f.c * s;
        } else if constexpr (std::is_same_v<T, LogPower>) {
          return -s * s;
        } else if constexpr (std::is_same_v<T, ExpLogPoly>) {
          return -f.scale * signed_power(log_poly_at_log(f.coefficients, s), f.exponent);
        } else if constexpr (std::is_same_v<T, StretchedExp>) {
          return -std::exp(f.eta * s);
        } else {
          throw std::logic_error("table couplings have no radial profile");
        }
      },
      family_);
}

double CouplingSpec::radial_slope(double r) const {
  return std::visit(
      [r, this](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          return f.c * std::pow(r, -f.c - 1.0);
        } else if constexpr (std::is_same_v<T, LogPower>) {
          return radial_value(r) * 2.0 * std::log(r) / r;
        } else if constexpr (std::is_same_v<T, ExpLogPoly>) {
          const double p = poly_value(f.coefficients, r);
          const double lp = std::log(p);
          return radial_value(r) * f.scale * f.exponent * signed_power(lp, f.exponent - 1.0) *
                 poly_derivative(f.coefficients, r) / p;
        } else if constexpr (std::is_same_v<T, StretchedExp>) {
          return radial_value(r) * f.eta * std::pow(r, f.eta - 1.0);
        } else {
          throw std::logic_error("table couplings have no radial profile");
        }
      },
      family_);
}

std::string CouplingSpec::describe() const {
  std::ostringstream os;
  os << family_name(family_) << '(';
  std::visit(
      [&os](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          os << "c=" << format_double(f.c);
        } else if constexpr (std::is_same_v<T, ExpLogPoly>) {
          os << "p=";
          for (std::size_t i = 0; i < f.coefficients.size(); ++i)
            os << (i ? "," : "") << format_double(f.coefficients[i]);
          os << ";C=" << format_double(f.scale) << ";gamma=" << format_double(f.exponent);
        } else if constexpr (std::is_same_v<T, StretchedExp>) {
          os << "eta=" << format_double(f.eta);
        } else if constexpr (std::is_same_v<T, CouplingTable>) {
          bool first = true;
          for (const auto& [x, j] : f.entries) {
            os << (first ? "" : ";") << format_lattice_vector(x) << ':' << format_double(j);
            first = false;
          }
        }
      },
      family_);
  os << ")|norm=" << to_string(norm_) << "|d=" << dimension_;
  return os.str();
}

}  // namespace lrfk
