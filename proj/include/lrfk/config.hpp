#pragma once

// Experiment configuration: flat "key = value" lines, '#' comments, strict
// schema. Every key is documented in the README.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrfk/fk_model.hpp"
#include "lrfk/samplers.hpp"

namespace lrfk {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TaskType { exact, sample, ratio_scan, tail_scan, check_hypotheses, es_identity, bridge_scan };
TaskType parse_task(std::string_view name);
std::string_view to_string(TaskType t);

struct ExperimentConfig {
  std::map<std::string, std::string> raw;  // as read, for hashing and manifests

  // model
  int dimension = 1;
  Norm norm = Norm::euclidean;
  std::string family;
  CouplingFamily coupling_family;
  std::optional<std::filesystem::path> table_path;
  double beta = 0.0;
  double q = 1.0;
  WeightConvention convention = WeightConvention::paper;
  double box_radius = 0.0;
  LatticeVector box_center;
  std::vector<Ball> box_union;

  // run
  Algorithm algorithm = Algorithm::heat_bath;
  std::uint64_t sweeps = 0;
  std::optional<std::uint64_t> burn_in;
  std::uint64_t thinning = 1;
  std::vector<std::uint64_t> seeds{1};

  // task
  TaskType task = TaskType::exact;
  std::vector<LatticeVector> targets;
  LatticeVector origin;
  double origin_window = 0.0;
  std::vector<std::uint64_t> thresholds;
  double gamma = 0.5;
  double alpha = 0.5;
  std::optional<double> c1_hint;
  double scan_radius = 1000.0;
  std::vector<double> epsilons{0.1};
  std::vector<LatticeVector> probe_points;
  std::vector<std::string> hypotheses{"H1", "H3", "H4", "H5"};
  double log_cap = 0.0;  // 0: no cap
  double tolerance = 1e-10;
  std::optional<double> truncation_radius;

  // output
  std::filesystem::path output_directory = "out";
  std::vector<std::string> formats{"csv", "json", "txt"};

  std::uint64_t hash = 0;  // over all keys except output.*

  CouplingSpec coupling() const;
  Box box() const;
  FkModel model() const;
  bool wants(const std::string& format) const;
};

// Throws ConfigError naming the offending key or line.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

// The documented keys.
const std::vector<std::string>& config_keys();

}  // namespace lrfk
