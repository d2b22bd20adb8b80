#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lrfk {

using LatticeVector = std::vector<std::int64_t>;

enum class Norm { euclidean, sup, l1 };

double norm_of(std::span<const std::int64_t> v, Norm norm);
Norm parse_norm(std::string_view name);
std::string_view to_string(Norm norm);

// Volume of the unit ball of `norm` in R^d.
double unit_ball_volume(Norm norm, int dimension);
// Largest norm of a vector in the cube [-1/2, 1/2]^d.
double half_cube_radius(Norm norm, int dimension);

// J_{0,x} = |x|^{-c}
struct PowerLaw {
  double c = 2.0;
};

// J_{0,x} = |x|^{-log|x|} = exp(-(log|x|)^2)
struct LogPower {};

// J_{0,x} = exp(-scale * (log p(|x|))^exponent); coefficients are p's, lowest
// degree first.
struct ExpLogPoly {
  std::vector<double> coefficients;
  double scale = 1.0;
  double exponent = 1.0;
};

// J_{0,x} = exp(-|x|^eta), eta in (0,1). Violates the H5-type growth condition;
// kept as the reference negative family.
struct StretchedExp {
  double eta = 0.5;
};

// Finite table of J_{0,x}. Entries are symmetrized under x -> -x.
struct CouplingTable {
  std::map<LatticeVector, double> entries;
};

using CouplingFamily =
    std::variant<PowerLaw, LogPower, ExpLogPoly, StretchedExp, CouplingTable>;

std::string family_name(const CouplingFamily& family);

// Translation-invariant ferromagnetic coupling x -> J_{0,x} on Z^d.
// Immutable after construction.
class CouplingSpec {
 public:
  CouplingSpec(CouplingFamily family, Norm norm, int dimension);

  // Two-column text file: "x-vector<TAB>J-value", coordinates comma-separated.
  static CouplingSpec load_table(const std::filesystem::path& path, Norm norm,
                                 int dimension);

  const CouplingFamily& family() const { return family_; }
  Norm norm() const { return norm_; }
  int dimension() const { return dimension_; }

  // True for the built-in families, where J depends only on |x|.
  bool radial() const;

  // J_{0,x}; throws std::invalid_argument for x = 0 or a wrong dimension and
  // std::out_of_range for table lookups outside the table.
  double evaluate(std::span<const std::int64_t> x) const;

  // J_{x,y} = J_{0,y-x}
  double between(std::span<const std::int64_t> x,
                 std::span<const std::int64_t> y) const;

  // Radial profile of a built-in family at norm value r > 0.
  double radial_value(double r) const;
  // log J at norm value r = exp(log_r); stays finite far beyond double range
  // of r itself.
  double log_radial(double log_r) const;
  // -dJ/dr of the radial profile.
  double radial_slope(double r) const;

  // Canonical one-line description, used for hashing and manifests.
  std::string describe() const;

 private:
  CouplingFamily family_;
  Norm norm_;
  int dimension_;
};

}  // namespace lrfk
