#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <doctest.h>
#include <json.hpp>

#include "lrfk/config.hpp"
#include "lrfk/runner.hpp"

using namespace lrfk;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("lrfk_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

const char* kScan = R"(
task.type = ratio-scan
model.dimension = 1
model.coupling.family = power_law
model.coupling.c = 2
model.beta = 0.2
model.q = 2
model.convention = es
model.box.radius = 40
run.sweeps = 4000
run.seeds = 1,2
task.targets = 2;4;8
task.origin_window = 10
task.c1_hint = 1.0
task.truncation_radius = 20
)";

}  // namespace

TEST_CASE("strict schema") {
  CHECK_THROWS_AS(parse_config("task.type = exact\nmodel.betta = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("task.type = exact\ntask.type = exact\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("task.type = exact\nmodel.coupling.family = power_law\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(std::string(kScan) + "model.coupling.eta = 0.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(std::string(kScan) + "task.c1_hint = -1\n"), ConfigError);

  std::string empty_targets = kScan;
  empty_targets.replace(empty_targets.find("task.targets = 2;4;8"), 20, "task.targets =");
  CHECK_THROWS_AS(parse_config(empty_targets), ConfigError);

  // ES needs the es convention.
  std::string paper = kScan;
  paper.replace(paper.find("convention = es"), 15, "convention = paper");
  CHECK_THROWS_AS(parse_config(paper + "run.algorithm = es\n"), ConfigError);
  CHECK(parse_config(paper).algorithm == Algorithm::heat_bath);

  auto c = parse_config(std::string(kScan) + "task.thresholds = 2..5,9\n");
  CHECK(c.thresholds == std::vector<std::uint64_t>{2, 3, 4, 5, 9});
  CHECK(c.algorithm == Algorithm::es);
  CHECK(c.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(c.targets.size() == 3);

  // The hash ignores the output block only.
  CHECK(parse_config(std::string(kScan) + "output.directory = elsewhere\n").hash == parse_config(kScan).hash);
  CHECK(parse_config(std::string(kScan) + "task.gamma = 0.4\n").hash != parse_config(kScan).hash);

  CHECK_THROWS_AS(parse_config("task.type = check-hypotheses\nmodel.coupling.family = log_power\nrun.sweeps = 3\n"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_config("task.type = check-hypotheses\nmodel.coupling.family = log_power\nmodel.beta = 3\n"),
      ConfigError);
  CHECK(config_keys().size() > 30);
}

TEST_CASE("exact task reproduces the golden file") {
  auto out = scratch("exact");
  auto r = run_config_file(fs::path(LRFK_TEST_DATA) / "exact_four_vertex.cfg", {1, std::nullopt, out});
  REQUIRE(r.exit_code == kExitOk);
  CHECK(slurp(out / "exact.csv") == slurp(fs::path(LRFK_TEST_DATA) / "exact_four_vertex.csv"));
  auto j = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(j["verdict"] == "pass");
  CHECK(j["connection"].size() == 4);
}

TEST_CASE("scan outputs, determinism and resume") {
  auto cfg = parse_config(kScan);
  auto a = scratch("scan_a"), b = scratch("scan_b");
  auto ra = run_experiment(cfg, {1, std::nullopt, a});
  REQUIRE(ra.exit_code == kExitOk);
  auto rb = run_experiment(cfg, {2, std::nullopt, b});
  REQUIRE(rb.exit_code == kExitOk);
  const auto csv = slurp(a / "ratio-scan.csv");
  CHECK(csv == slurp(b / "ratio-scan.csv"));
  CHECK(slurp(a / "d_events.dat") == slurp(b / "d_events.dat"));
  CHECK(csv.find("# config_hash=") != std::string::npos);
  CHECK(csv.find("# module.samplers=") != std::string::npos);
  CHECK(csv.find(std::string(kCsvHeader) + "\n") != std::string::npos);
  CHECK(csv.find(",pooled\n") != std::string::npos);
  CHECK(fs::exists(a / "ratio_scan.dat"));
  CHECK(fs::exists(a / "seed_2.connection.series"));
  CHECK(fs::exists(a / "seed_1.truncation.series"));

  auto j = nlohmann::json::parse(slurp(a / "summary.json"));
  CHECK(j["records"].size() == 3);
  CHECK(j["truncation"]["box_radius"] == 20.0);
  CHECK(j["manifests"].size() > 0);

  // A rerun into the same directory resumes every seed and reproduces the CSV.
  std::ostringstream log;
  auto rc = run_experiment(cfg, {1, std::nullopt, a, false, &log});
  REQUIRE(rc.exit_code == kExitOk);
  CHECK(log.str().find("seed 1 resumed") != std::string::npos);
  CHECK(log.str().find("seed 2 resumed") != std::string::npos);
  CHECK(log.str().find("started") == std::string::npos);
  CHECK(slurp(a / "ratio-scan.csv") == csv);

  // A changed physics key invalidates the saved series.
  std::ostringstream log2;
  auto changed = parse_config(std::string(kScan) + "task.gamma = 0.4\n");
  REQUIRE(run_experiment(changed, {1, std::nullopt, a, false, &log2}).exit_code == kExitOk);
  CHECK(log2.str().find("resumed") == std::string::npos);

  // Seed override runs one chain.
  auto d = scratch("scan_d");
  auto rd = run_experiment(cfg, {1, 7, d});
  REQUIRE(rd.exit_code == kExitOk);
  CHECK(fs::exists(d / "seed_7.connection.series"));
  CHECK_FALSE(fs::exists(d / "seed_1.connection.series"));
}

TEST_CASE("verdict and error exit codes") {
  auto out = scratch("codes");
  auto se = parse_config(
      "task.type = check-hypotheses\nmodel.coupling.family = stretched_exp\nmodel.coupling.eta = 0.5\n");
  auto r = run_experiment(se, {1, std::nullopt, out});
  CHECK(r.exit_code == kExitVerdict);
  auto j = nlohmann::json::parse(slurp(out / "summary.json"));
  bool h5_fail = false;
  for (const auto& rep : j["reports"])
    if (rep["hypothesis"] == "H5") h5_fail = rep["verdict"] == "fail";
  CHECK(h5_fail);

  auto bad_target = parse_config(std::string(kScan) + "task.origin = 39\n");
  CHECK(run_experiment(bad_target, {1, std::nullopt, scratch("bad")}).exit_code == kExitConfig);
  CHECK(run_config_file("/nonexistent/config.cfg").exit_code == kExitConfig);

  auto es = parse_config(
      "task.type = es-identity\nmodel.coupling.family = power_law\nmodel.coupling.c = 2\nmodel.beta = 1\n"
      "model.q = 3\nmodel.box.radius = 2.5\nmodel.convention = es\n");
  CHECK(run_experiment(es, {1, std::nullopt, scratch("es")}).exit_code == kExitOk);
  auto es_paper = es;
  es_paper.convention = WeightConvention::paper;
  CHECK(run_experiment(es_paper, {1, std::nullopt, scratch("es_paper")}).exit_code == kExitVerdict);

  auto dry = run_experiment(parse_config(kScan), {1, std::nullopt, scratch("dry"), true});
  CHECK(dry.exit_code == kExitOk);
  CHECK_FALSE(fs::exists(scratch("dry")));
}

TEST_CASE("command-line binary") {
  auto out = scratch("binary");
  const std::string bin = LRFK_BINARY;
  const std::string cfg = (fs::path(LRFK_TEST_DATA) / "exact_four_vertex.cfg").string();
  auto code = [](int status) { return WEXITSTATUS(status); };
  CHECK(code(std::system((bin + " --config " + cfg + " --out " + out.string() + " > /dev/null").c_str())) == 0);
  CHECK(slurp(out / "exact.csv") == slurp(fs::path(LRFK_TEST_DATA) / "exact_four_vertex.csv"));
  CHECK(code(std::system((bin + " --config " + cfg + " --dry-run > /dev/null").c_str())) == 0);
  CHECK(code(std::system((bin + " --bogus 2> /dev/null").c_str())) == 2);
  CHECK(code(std::system((bin + " --config /nonexistent 2> /dev/null").c_str())) == 2);
}
