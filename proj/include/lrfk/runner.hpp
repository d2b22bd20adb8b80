#pragma once

// Binds an ExperimentConfig to the module pipelines and writes the output
// files: <task>.csv, summary.json, report.txt, per-seed seed_<N>.<kind>.series
// (used to resume) and plot data for the scans.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lrfk/config.hpp"

namespace lrfk {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitVerdict = 3;
inline constexpr int kExitRuntime = 4;

inline constexpr const char* kVersion = "1.0.0";

struct RunnerOptions {
  unsigned threads = 1;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::filesystem::path> output_directory;
  bool dry_run = false;
  std::ostream* log = nullptr;  // progress messages; silent when null
};

struct RunResult {
  int exit_code = kExitOk;
  std::filesystem::path output_directory;
  std::vector<std::filesystem::path> files;  // written this run
  std::string summary_json;
  std::string message;  // error text for nonzero codes
};

RunResult run_experiment(const ExperimentConfig& config, const RunnerOptions& options = {});

// Loads the config file and maps exceptions to exit codes.
RunResult run_config_file(const std::filesystem::path& path, const RunnerOptions& options = {});

// The CSV column header shared by every data file.
inline constexpr const char* kCsvHeader =
    "observable,x,abs_x,J0x,mean,stderr,batches,samples,box_radius,beta,q,convention,seed";

}  // namespace lrfk
