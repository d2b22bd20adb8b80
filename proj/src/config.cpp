#include "lrfk/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "lrfk/text.hpp"

namespace lrfk {

TaskType parse_task(std::string_view name) {
  if (name == "exact") return TaskType::exact;
  if (name == "sample") return TaskType::sample;
  if (name == "ratio-scan") return TaskType::ratio_scan;
  if (name == "tail-scan") return TaskType::tail_scan;
  if (name == "check-hypotheses") return TaskType::check_hypotheses;
  if (name == "es-identity") return TaskType::es_identity;
  if (name == "bridge-scan") return TaskType::bridge_scan;
  throw std::invalid_argument("unknown task type '" + std::string(name) + "'");
}

std::string_view to_string(TaskType t) {
  switch (t) {
    case TaskType::exact: return "exact";
    case TaskType::sample: return "sample";
    case TaskType::ratio_scan: return "ratio-scan";
    case TaskType::tail_scan: return "tail-scan";
    case TaskType::check_hypotheses: return "check-hypotheses";
    case TaskType::es_identity: return "es-identity";
    case TaskType::bridge_scan: return "bridge-scan";
  }
  return "?";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "model.dimension", "model.norm", "model.coupling.family", "model.coupling.c",
      "model.coupling.coefficients", "model.coupling.scale", "model.coupling.exponent",
      "model.coupling.eta", "model.coupling.table", "model.beta", "model.q", "model.convention",
      "model.box.radius", "model.box.center", "model.box.union",
      "run.algorithm", "run.sweeps", "run.burn_in", "run.thinning", "run.seeds",
      "task.type", "task.targets", "task.origin", "task.origin_window", "task.thresholds",
      "task.gamma", "task.alpha", "task.c1_hint", "task.radius", "task.epsilons",
      "task.probe_points", "task.hypotheses", "task.log_cap", "task.tolerance",
      "task.truncation_radius",
      "output.directory", "output.formats"};
  return keys;
}

namespace {

std::vector<LatticeVector> parse_vector_list(std::string_view s) {
  std::vector<LatticeVector> out;
  for (auto part : split(s, ';'))
    if (!part.empty()) out.push_back(parse_lattice_vector(part));
  return out;
}

std::vector<std::uint64_t> parse_thresholds(std::string_view s) {
  std::vector<std::uint64_t> out;
  for (auto part : split(s, ',')) {
    if (part.empty()) continue;
    auto dots = part.find("..");
    if (dots == std::string_view::npos) {
      out.push_back(parse_uint(part));
    } else {
      const auto lo = parse_uint(part.substr(0, dots)), hi = parse_uint(part.substr(dots + 2));
      if (hi < lo) throw std::invalid_argument("empty threshold range");
      for (auto n = lo; n <= hi; ++n) out.push_back(n);
    }
  }
  return out;
}

std::vector<double> parse_reals(std::string_view s) {
  std::vector<double> out;
  for (auto part : split(s, ','))
    if (!part.empty()) out.push_back(parse_double(part));
  return out;
}

std::vector<std::string> parse_words(std::string_view s) {
  std::vector<std::string> out;
  for (auto part : split(s, ','))
    if (!part.empty()) out.emplace_back(part);
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  const std::set<std::string> known(config_keys().begin(), config_keys().end());
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    auto body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key(trim(body.substr(0, eq)));
    const std::string value(trim(body.substr(eq + 1)));
    if (!known.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (c.raw.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    c.raw[key] = value;
  }

  auto get = [&](const std::string& key) -> std::optional<std::string> {
    auto it = c.raw.find(key);
    if (it == c.raw.end()) return std::nullopt;
    return it->second;
  };
  auto need = [&](const std::string& key) -> std::string {
    auto v = get(key);
    if (!v) throw ConfigError("missing required key '" + key + "'");
    return *v;
  };
  auto field = [&](const std::string& key, auto&& parse) {
    try {
      parse();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("key '" + key + "': " + e.what());
    }
  };

  field("task.type", [&] { c.task = parse_task(need("task.type")); });
  const bool hypotheses_only = c.task == TaskType::check_hypotheses;

  field("model.dimension", [&] {
    if (auto v = get("model.dimension")) c.dimension = static_cast<int>(parse_int(*v));
    if (c.dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  });
  field("model.norm", [&] { if (auto v = get("model.norm")) c.norm = parse_norm(*v); });
  field("model.coupling.family", [&] {
    c.family = need("model.coupling.family");
    auto real = [&](const std::string& k, double dflt) {
      auto v = get(k);
      return v ? parse_double(*v) : dflt;
    };
    std::set<std::string> allowed;
    if (c.family == "power_law") {
      c.coupling_family = PowerLaw{parse_double(need("model.coupling.c"))};
      allowed = {"model.coupling.c"};
    } else if (c.family == "log_power") {
      c.coupling_family = LogPower{};
    } else if (c.family == "exp_log_poly") {
      c.coupling_family = ExpLogPoly{parse_reals(need("model.coupling.coefficients")),
                                     real("model.coupling.scale", 1.0), real("model.coupling.exponent", 1.0)};
      allowed = {"model.coupling.coefficients", "model.coupling.scale", "model.coupling.exponent"};
    } else if (c.family == "stretched_exp") {
      c.coupling_family = StretchedExp{real("model.coupling.eta", 0.5)};
      allowed = {"model.coupling.eta"};
    } else if (c.family == "table") {
      auto p = std::filesystem::path(need("model.coupling.table"));
      c.table_path = p.is_absolute() ? p : base_dir / p;
      allowed = {"model.coupling.table"};
    } else {
      throw std::invalid_argument("unknown coupling family '" + c.family + "'");
    }
    for (const auto& [k, v] : c.raw)
      if (k.rfind("model.coupling.", 0) == 0 && k != "model.coupling.family" && !allowed.count(k))
        throw ConfigError("key '" + k + "' does not apply to family '" + c.family + "'");
  });

  if (!hypotheses_only) {
    field("model.beta", [&] {
      c.beta = parse_double(need("model.beta"));
      if (!(c.beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
    });
    field("model.q", [&] {
      c.q = parse_double(need("model.q"));
      if (!(c.q >= 1.0)) throw std::invalid_argument("q must be >= 1");
    });
    field("model.convention", [&] { if (auto v = get("model.convention")) c.convention = parse_convention(*v); });
    field("model.box.radius", [&] { c.box_radius = parse_double(need("model.box.radius")); });
    field("model.box.center", [&] {
      c.box_center = get("model.box.center") ? parse_lattice_vector(*get("model.box.center"))
                                             : LatticeVector(c.dimension, 0);
      if (static_cast<int>(c.box_center.size()) != c.dimension) throw std::invalid_argument("wrong dimension");
    });
    field("model.box.union", [&] {
      if (auto v = get("model.box.union"))
        for (auto part : split(*v, ';')) {
          if (part.empty()) continue;
          auto at = part.find('@');
          if (at == std::string_view::npos) throw std::invalid_argument("expected center@radius");
          c.box_union.push_back({parse_lattice_vector(part.substr(0, at)), parse_double(part.substr(at + 1))});
        }
    });
  } else {
    for (const auto& [k, v] : c.raw)
      if (k.rfind("model.", 0) == 0 && k.rfind("model.coupling.", 0) != 0 && k != "model.dimension" &&
          k != "model.norm")
        throw ConfigError("key '" + k + "' does not apply to check-hypotheses");
  }

  field("run.algorithm", [&] {
    if (auto v = get("run.algorithm")) c.algorithm = parse_algorithm(*v);
    else c.algorithm = c.convention == WeightConvention::es && c.q == std::floor(c.q) ? Algorithm::es : Algorithm::heat_bath;
  });
  const bool sampling = c.task == TaskType::sample || c.task == TaskType::ratio_scan ||
                        c.task == TaskType::tail_scan || c.task == TaskType::bridge_scan;
  if (sampling) {
    field("run.sweeps", [&] { c.sweeps = parse_uint(need("run.sweeps")); });
    field("run.burn_in", [&] {
      if (auto v = get("run.burn_in")) c.burn_in = parse_uint(*v);
      if (c.burn_in && *c.burn_in >= c.sweeps) throw std::invalid_argument("burn_in must be below sweeps");
    });
    field("run.thinning", [&] {
      if (auto v = get("run.thinning")) c.thinning = parse_uint(*v);
      if (c.thinning < 1) throw std::invalid_argument("thinning must be >= 1");
    });
    field("run.seeds", [&] {
      if (auto v = get("run.seeds")) {
        c.seeds.clear();
        for (auto part : split(*v, ','))
          if (!part.empty()) c.seeds.push_back(parse_uint(part));
      }
      if (c.seeds.empty()) throw std::invalid_argument("empty seed list");
    });
  } else {
    for (const auto& [k, v] : c.raw)
      if (k.rfind("run.", 0) == 0)
        throw ConfigError("key '" + k + "' does not apply to task '" + std::string(to_string(c.task)) + "'");
  }

  field("task.targets", [&] {
    if (auto v = get("task.targets")) c.targets = parse_vector_list(*v);
    const bool needs = c.task == TaskType::sample || c.task == TaskType::ratio_scan || c.task == TaskType::bridge_scan;
    if (needs && c.targets.empty()) throw std::invalid_argument("empty target list");
    for (const auto& t : c.targets)
      if (static_cast<int>(t.size()) != c.dimension) throw std::invalid_argument("target of wrong dimension");
    if (c.task == TaskType::bridge_scan && c.targets.size() != 1)
      throw std::invalid_argument("bridge-scan takes exactly one target");
  });
  field("task.origin", [&] {
    c.origin = get("task.origin") ? parse_lattice_vector(*get("task.origin")) : LatticeVector(c.dimension, 0);
    if (static_cast<int>(c.origin.size()) != c.dimension) throw std::invalid_argument("origin of wrong dimension");
  });
  field("task.origin_window", [&] {
    if (auto v = get("task.origin_window")) c.origin_window = parse_double(*v);
    if (c.origin_window < 0.0) throw std::invalid_argument("must be >= 0");
  });
  field("task.thresholds", [&] {
    if (auto v = get("task.thresholds")) c.thresholds = parse_thresholds(*v);
    if (c.task == TaskType::tail_scan && c.thresholds.empty()) throw std::invalid_argument("empty threshold list");
    for (std::size_t i = 1; i < c.thresholds.size(); ++i)
      if (c.thresholds[i] <= c.thresholds[i - 1]) throw std::invalid_argument("thresholds must be increasing");
  });
  field("task.gamma", [&] { if (auto v = get("task.gamma")) c.gamma = parse_double(*v); });
  field("task.alpha", [&] { if (auto v = get("task.alpha")) c.alpha = parse_double(*v); });
  field("task.c1_hint", [&] {
    if (auto v = get("task.c1_hint")) c.c1_hint = parse_double(*v);
    if (c.c1_hint && !(*c.c1_hint > 0.0)) throw std::invalid_argument("c1_hint must be positive");
    if (c.task == TaskType::bridge_scan && !c.c1_hint) throw std::invalid_argument("bridge-scan needs c1_hint");
  });
  field("task.radius", [&] { if (auto v = get("task.radius")) c.scan_radius = parse_double(*v); });
  field("task.epsilons", [&] { if (auto v = get("task.epsilons")) c.epsilons = parse_reals(*v); });
  field("task.probe_points", [&] { if (auto v = get("task.probe_points")) c.probe_points = parse_vector_list(*v); });
  field("task.hypotheses", [&] {
    if (auto v = get("task.hypotheses")) c.hypotheses = parse_words(*v);
    for (const auto& h : c.hypotheses)
      if (h != "H1" && h != "H3" && h != "H4" && h != "H5") throw std::invalid_argument("unknown hypothesis " + h);
  });
  field("task.log_cap", [&] { if (auto v = get("task.log_cap")) c.log_cap = parse_double(*v); });
  field("task.tolerance", [&] { if (auto v = get("task.tolerance")) c.tolerance = parse_double(*v); });
  field("task.truncation_radius", [&] {
    if (auto v = get("task.truncation_radius")) c.truncation_radius = parse_double(*v);
  });

  field("output.directory", [&] { if (auto v = get("output.directory")) c.output_directory = *v; });
  field("output.formats", [&] {
    if (auto v = get("output.formats")) c.formats = parse_words(*v);
    for (const auto& f : c.formats)
      if (f != "csv" && f != "json" && f != "txt") throw std::invalid_argument("unknown format " + f);
  });

  // Build the physics objects once so that contract violations surface as
  // configuration errors.
  field("model.coupling.family", [&] { (void)c.coupling(); });
  if (!hypotheses_only) {
    field("model.box.radius", [&] { (void)c.box(); });
    if (sampling && c.algorithm != Algorithm::heat_bath)
      field("run.algorithm", [&] { require_es_compatible(c.model()); });
  }

  std::string canon;
  for (const auto& [k, v] : c.raw)
    if (k.rfind("output.", 0) != 0) canon += k + "=" + v + "\n";
  c.hash = fnv1a64(canon);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path().empty() ? "." : path.parent_path());
}

CouplingSpec ExperimentConfig::coupling() const {
  if (table_path) return CouplingSpec::load_table(*table_path, norm, dimension);
  return CouplingSpec(coupling_family, norm, dimension);
}

Box ExperimentConfig::box() const {
  Box b = Box::make(dimension, box_center, box_radius, norm);
  for (const auto& ball : box_union) b = Box::unite(b, Box::make(dimension, ball.center, ball.radius, norm));
  return b;
}

FkModel ExperimentConfig::model() const { return FkModel(box(), coupling(), beta, q, convention); }

bool ExperimentConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

}  // namespace lrfk
