#include "lrfk/runner.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lrfk/exact.hpp"
#include "lrfk/hypotheses.hpp"
#include "lrfk/observables.hpp"
#include "lrfk/text.hpp"

namespace lrfk {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const char* const kModules[] = {"couplings", "lattice", "fk-core", "exact-oracle", "samplers", "observables", "cli"};

class VerdictFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs f, prefixing any runtime failure with the stage name.
template <class F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw std::runtime_error(name + ": " + e.what());
  }
}

// Geometry errors are configuration errors: targets or origins outside the box.
template <class F>
auto as_config(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(e.what());
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json to_json(const Estimate& e) {
  return json{{"mean", e.mean}, {"stderr", e.std_error}, {"batches", e.batches}, {"samples", e.samples}, {"tau", e.tau}};
}

struct Output {
  const ExperimentConfig* config;
  fs::path dir;
  std::vector<std::uint64_t> seeds;
  double box_radius = 0.0;
  std::string rows;
  std::vector<std::string> manifest_lines;
  json summary;
  std::ostringstream report;
  std::vector<fs::path> files;

  void row(const std::string& observable, const std::string& x, std::optional<double> abs_x,
           std::optional<double> j0x, const Estimate& e, const std::string& seed) {
    const auto& c = *config;
    rows += csv_field(observable) + "," + csv_field(x) + "," + (abs_x ? format_double(*abs_x) : "") + "," +
            (j0x ? format_double(*j0x) : "") + "," + format_double(e.mean) + "," + format_double(e.std_error) + "," +
            std::to_string(e.batches) + "," + std::to_string(e.samples) + "," + format_double(box_radius) + "," +
            format_double(c.beta) + "," + format_double(c.q) + "," + std::string(to_string(c.convention)) + "," +
            seed + "\n";
  }

  std::string header() const {
    const auto& c = *config;
    std::string h = "# lrfk_version=" + std::string(kVersion) + "\n# config_hash=" + hex64(c.hash) +
                    "\n# task=" + std::string(to_string(c.task)) + "\n# seeds=";
    for (std::size_t i = 0; i < seeds.size(); ++i) h += (i ? "," : "") + std::to_string(seeds[i]);
    h += "\n";
    for (const char* m : kModules) h += "# module." + std::string(m) + "=" + kVersion + "\n";
    for (const auto& l : manifest_lines) h += "# " + l + "\n";
    return h;
  }

  void write(const std::string& name, const std::string& content) {
    fs::create_directories(dir);
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    files.push_back(path);
  }

  void finish() {
    const auto& c = *config;
    if (c.wants("csv")) write(std::string(to_string(c.task)) + ".csv", header() + kCsvHeader + "\n" + rows);
    if (c.wants("json")) write("summary.json", summary.dump(2) + "\n");
    if (c.wants("txt")) write("report.txt", report.str());
  }
};

// --- chains ----------------------------------------------------------------

using CollectorFactory = std::function<std::unique_ptr<Collector>(std::uint64_t expected_samples)>;

struct ChainSet {
  std::vector<std::unique_ptr<Collector>> collectors;
  std::vector<std::string> manifests;
  std::vector<bool> resumed;
};

std::uint64_t resume_key(const ExperimentConfig& c) {
  std::string canon;
  for (const auto& [k, v] : c.raw)
    if (k.rfind("output.", 0) != 0 && k != "run.seeds") canon += k + "=" + v + "\n";
  return fnv1a64(canon);
}

std::uint64_t expected_samples(const ExperimentConfig& c) {
  const std::uint64_t burn = c.burn_in ? *c.burn_in : std::min<std::uint64_t>(1000, c.sweeps / 4);
  return c.sweeps > burn ? (c.sweeps - burn) / c.thinning : 0;
}

std::optional<CollectorState> load_series(const fs::path& path, std::uint64_t key, const std::string& kind,
                                          std::uint64_t seed, std::string& manifest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string line, body;
  std::map<std::string, std::string> head;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      auto eq = line.find('=');
      if (eq != std::string::npos) head[line.substr(2, eq - 2)] = line.substr(eq + 1);
      if (line.rfind("# manifest.", 0) == 0) manifest += line.substr(11) + "\n";
    } else {
      body += line + "\n";
    }
  }
  if (head["resume_key"] != hex64(key) || head["kind"] != kind || head["seed"] != std::to_string(seed))
    return std::nullopt;
  return CollectorState::parse(body);
}

ChainSet run_chains(const ExperimentConfig& c, const FkModel& model, const std::vector<std::uint64_t>& seeds,
                    const std::string& kind, VertexId pilot_origin, const CollectorFactory& make,
                    const RunnerOptions& options, Output& out) {
  ChainSet set;
  const std::size_t n = seeds.size();
  set.collectors.resize(n);
  set.manifests.resize(n);
  set.resumed.assign(n, false);
  const auto key = resume_key(c);
  const auto expected = expected_samples(c);
  std::mutex log_mutex;
  auto log = [&](const std::string& msg) {
    if (!options.log) return;
    std::lock_guard<std::mutex> lock(log_mutex);
    *options.log << msg << std::endl;
  };

  std::unique_ptr<BondTable> table;
  auto path_of = [&](std::uint64_t seed) { return out.dir / ("seed_" + std::to_string(seed) + "." + kind + ".series"); };

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < n; ++i) {
    std::string manifest;
    if (auto state = load_series(path_of(seeds[i]), key, kind, seeds[i], manifest)) {
      set.collectors[i] = make(expected);
      set.collectors[i]->state() = std::move(*state);
      set.manifests[i] = manifest;
      set.resumed[i] = true;
      log(kind + ": seed " + std::to_string(seeds[i]) + " resumed from " + path_of(seeds[i]).string());
    } else {
      todo.push_back(i);
    }
  }
  if (!todo.empty() && c.algorithm != Algorithm::heat_bath) {
    log(kind + ": building bond table for m = " + std::to_string(model.edge_count()));
    table = std::make_unique<BondTable>(model);
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next++;
      if (k >= todo.size()) return;
      const std::size_t i = todo[k];
      try {
        auto col = make(expected);
        log(kind + ": seed " + std::to_string(seeds[i]) + " started");
        RunOptions ro;
        ro.pilot_origin = pilot_origin;
        ro.table = table.get();
        const auto man = run_chain(model, c.algorithm, {c.sweeps, c.burn_in, c.thinning}, seeds[i],
                                   [&](const ChainState& s) { col->observe(s); }, ro);
        std::string text = "# lrfk series\n# resume_key=" + hex64(key) + "\n# kind=" + kind +
                           "\n# seed=" + std::to_string(seeds[i]) + "\n";
        std::istringstream ml(man.to_text());
        std::string l;
        while (std::getline(ml, l)) text += "# manifest." + l + "\n";
        text += col->state().serialize();
        fs::create_directories(out.dir);
        {
          const auto tmp = path_of(seeds[i]).string() + ".tmp";
          std::ofstream f(tmp, std::ios::binary);
          f << text;
          f.close();
          fs::rename(tmp, path_of(seeds[i]));
        }
        set.manifests[i] = man.to_text();
        set.collectors[i] = std::move(col);
        log(kind + ": seed " + std::to_string(seeds[i]) + " done (" + std::to_string(man.samples) + " samples)");
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(todo.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t i = 0; i < n; ++i) {
    std::istringstream ml(set.manifests[i]);
    std::string l;
    while (std::getline(ml, l))
      if (!l.empty()) out.manifest_lines.push_back(kind + ".seed." + std::to_string(seeds[i]) + "." + l);
    out.files.push_back(path_of(seeds[i]));
  }
  return set;
}

std::vector<const CollectorState*> single(const ChainSet& set, std::size_t i) { return {&set.collectors[i]->state()}; }

// Per-seed rows then pooled rows for one column.
void emit_column(Output& out, const ChainSet& set, const std::string& column, const std::string& observable,
                 const std::string& x, std::optional<double> abs_x, std::optional<double> j0x) {
  for (std::size_t i = 0; i < set.collectors.size(); ++i)
    out.row(observable, x, abs_x, j0x, pooled(single(set, i), column), std::to_string(out.seeds[i]));
  const auto all = states_of(set.collectors);
  out.row(observable, x, abs_x, j0x, pooled(all, column), "pooled");
}

// --- tasks -----------------------------------------------------------------

void task_exact(const ExperimentConfig& c, Output& out) {
  const FkModel model = c.model();
  const Box& box = model.box();
  EnumerateOptions eo;
  eo.origin = as_config([&] { return box.index(c.origin); });
  const auto s = stage("exact", [&] { return enumerate(model, {}, eo); });
  out.write("summary.tsv", s.serialize());
  Estimate z;
  z.mean = s.log_z;
  out.row("log_z", "", std::nullopt, std::nullopt, z, "exact");
  LatticeVector d(box.dimension());
  json matrix = json::array();
  for (VertexId a = 0; a < box.size(); ++a) {
    json row = json::array();
    for (VertexId b = 0; b < box.size(); ++b) row.push_back(s.connection[a][b]);
    matrix.push_back(row);
    for (VertexId b = a + 1; b < box.size(); ++b) {
      box.difference(a, b, d);
      Estimate e;
      e.mean = s.connection[a][b];
      out.row("connection", format_lattice_vector(box.vertex(a)) + "|" + format_lattice_vector(box.vertex(b)),
              box.distance(a, b), model.coupling().evaluate(d), e, "exact");
    }
  }
  for (std::size_t k = 1; k < s.origin_cluster_size.size(); ++k) {
    Estimate e;
    e.mean = s.origin_cluster_size[k];
    out.row("cluster_size", std::to_string(k), std::nullopt, std::nullopt, e, "exact");
  }
  json vertices = json::array();
  for (VertexId v = 0; v < box.size(); ++v) vertices.push_back(format_lattice_vector(box.vertex(v)));
  out.summary["log_z"] = s.log_z;
  out.summary["vertices"] = vertices;
  out.summary["connection"] = matrix;
  out.summary["origin_cluster_size"] = s.origin_cluster_size;
  out.report << "exact enumeration over 2^" << model.edge_count() << " configurations\n"
             << "log Z = " << format_double(s.log_z) << "\n";
}

json ratio_json(const RatioScan& scan) {
  json recs = json::array();
  for (const auto& r : scan.records) {
    json j{{"x", target_label(r.x)}, {"abs_x", r.abs_x}, {"J0x", r.j0x}, {"mu", to_json(r.mu)},
           {"chi", to_json(r.chi)}, {"r", r.r}, {"r_stderr", r.r_se}};
    if (scan.c1_hint) {
      json d = json::object(), l = json::object(), p = json::object();
      for (std::size_t v = 0; v < 3; ++v) {
        d[kC1Names[v]] = json{{"estimate", to_json(r.dcomp[v])}, {"ratio_to_J", r.dcomp_ratio[v]}};
        l[kC1Names[v]] = json{{"estimate", to_json(r.lemma[v])}, {"ratio_to_J", r.lemma_ratio[v]}};
        p[kC1Names[v]] = json{{"qualifying", r.bridge.qualifying[v]}, {"holds", r.bridge.holds[v]}};
      }
      j["d_complement"] = d;
      j["lemma_event"] = l;
      j["pigeonhole"] = p;
      j["connected_pairs"] = r.bridge.connected;
      j["bridged_pairs"] = r.bridge.bridged;
    }
    recs.push_back(j);
  }
  return recs;
}

void task_scan(const ExperimentConfig& c, Output& out, const RunnerOptions& options) {
  const FkModel model = c.model();
  const auto geometry = as_config([&] { return make_geometry(model, c.origin, c.origin_window, c.targets); });
  ConnectionOptions co;
  co.c1_hint = c.c1_hint;
  co.gamma = c.gamma;
  const VertexId origin = model.box().index(c.origin);
  const auto set = stage("sample", [&] {
    return run_chains(c, model, out.seeds, "connection", origin,
                      [&](std::uint64_t e) { return std::make_unique<ConnectionCollector>(model, geometry, co, e); },
                      options, out);
  });
  const auto all = states_of(set.collectors);

  stage("aggregate", [&] {
    emit_column(out, set, "chi", "chi", target_label(c.origin), std::nullopt, std::nullopt);
    for (const auto& t : geometry.targets) {
      const auto lab = target_label(t.offset);
      emit_column(out, set, "connect:" + lab, "connect", lab, t.abs_x, t.j0x);
      if (c.c1_hint)
        for (std::size_t v = 0; v < 3; ++v) {
          emit_column(out, set, "dcomp:" + lab + ":" + kC1Names[v], std::string("d_complement_") + kC1Names[v], lab,
                      t.abs_x, t.j0x);
          emit_column(out, set, "lemma:" + lab + ":" + kC1Names[v], std::string("lemma_event_") + kC1Names[v], lab,
                      t.abs_x, t.j0x);
        }
    }
    return 0;
  });
  out.summary["origin_window"] = c.origin_window;
  out.summary["window_size"] = geometry.window.size();
  out.summary["chi"] = to_json(susceptibility(all));

  if (c.task == TaskType::sample) {
    json tp = json::array();
    const auto est = two_point(all, geometry);
    for (std::size_t i = 0; i < est.size(); ++i)
      tp.push_back(json{{"x", target_label(geometry.targets[i].offset)}, {"estimate", to_json(est[i])}});
    out.summary["two_point"] = tp;
    out.report << "two-point estimates over " << out.seeds.size() << " chain(s)\n";
    for (std::size_t i = 0; i < est.size(); ++i)
      out.report << "  x=" << target_label(geometry.targets[i].offset) << " mu=" << format_double(est[i].mean)
                 << " +- " << format_double(est[i].std_error) << "\n";
    return;
  }

  const auto scan = stage("ratio", [&] { return ratio_scan(all, model, geometry, co); });
  std::string plot = "# x abs_x J0x r r_stderr mu mu_stderr chi chi_stderr\n";
  for (const auto& r : scan.records) {
    Estimate re;
    re.mean = r.r;
    re.std_error = r.r_se;
    re.batches = r.mu.batches;
    re.samples = r.mu.samples;
    out.row("ratio", target_label(r.x), r.abs_x, r.j0x, re, "pooled");
    plot += target_label(r.x) + " " + format_double(r.abs_x) + " " + format_double(r.j0x) + " " + format_double(r.r) +
            " " + format_double(r.r_se) + " " + format_double(r.mu.mean) + " " + format_double(r.mu.std_error) + " " +
            format_double(r.chi.mean) + " " + format_double(r.chi.std_error) + "\n";
  }
  out.write("ratio_scan.dat", plot);
  out.summary["records"] = ratio_json(scan);

  if (c.c1_hint) {
    std::string d = "# abs_x variant c1 f d_complement stderr ratio_to_J lemma_event stderr ratio_to_J "
                    "pigeonhole_qualifying pigeonhole_holds\n";
    for (const auto& r : scan.records)
      for (std::size_t v = 0; v < 3; ++v) {
        const double c1 = kC1Factors[v] * *c.c1_hint;
        d += format_double(r.abs_x) + " " + kC1Names[v] + " " + format_double(c1) + " " +
             format_double(cutoff_f(r.j0x, c1)) + " " + format_double(r.dcomp[v].mean) + " " +
             format_double(r.dcomp[v].std_error) + " " + format_double(r.dcomp_ratio[v]) + " " +
             format_double(r.lemma[v].mean) + " " + format_double(r.lemma[v].std_error) + " " +
             format_double(r.lemma_ratio[v]) + " " + std::to_string(r.bridge.qualifying[v]) + " " +
             std::to_string(r.bridge.holds[v]) + "\n";
      }
    out.write("d_events.dat", d);
  }

  if (c.truncation_radius) {
    ExperimentConfig small = c;
    small.box_radius = *c.truncation_radius;
    small.box_union.clear();
    const FkModel small_model = as_config([&] { return small.model(); });
    const auto window = as_config(
        [&] { return make_window(small_model, c.origin, std::min(c.origin_window, *c.truncation_radius / 2)); });
    const auto tset = stage("truncation", [&] {
      return run_chains(small, small_model, out.seeds, "truncation", small_model.box().index(c.origin),
                        [&](std::uint64_t e) {
                          return std::make_unique<TailCollector>(window, std::vector<std::uint64_t>{1}, e);
                        },
                        options, out);
    });
    const auto chi_small = pooled(states_of(tset.collectors), "size");
    const auto chi_big = susceptibility(all);
    out.summary["truncation"] = json{{"box_radius", *c.truncation_radius},
                                     {"chi", to_json(chi_small)},
                                     {"difference", chi_big.mean - chi_small.mean}};
    out.report << "chi at box radius " << format_double(*c.truncation_radius) << ": "
               << format_double(chi_small.mean) << " +- " << format_double(chi_small.std_error)
               << " (difference " << format_double(chi_big.mean - chi_small.mean) << ")\n";
  }

  out.report << "ratio scan, beta=" << format_double(c.beta) << " q=" << format_double(c.q)
             << " convention=" << to_string(c.convention) << " box radius=" << format_double(out.box_radius)
             << " window=" << format_double(c.origin_window) << "\n";
  for (const auto& r : scan.records)
    out.report << "  |x|=" << format_double(r.abs_x) << " r=" << format_double(r.r) << " +- " << format_double(r.r_se)
               << "\n";

  if (c.task == TaskType::bridge_scan) {
    const auto& r = scan.records.front();
    std::string vals = "# quantity value\n";
    for (double v : r.bridge.L) vals += "L " + format_double(v) + "\n";
    for (double v : r.bridge.R0) vals += "R0 " + format_double(v) + "\n";
    for (double v : r.bridge.Rx) vals += "Rx " + format_double(v) + "\n";
    out.write("bridge_values.dat", vals);
    bool holds = true;
    for (std::size_t v = 0; v < 3; ++v) holds = holds && r.bridge.holds[v] == r.bridge.qualifying[v];
    out.summary["pigeonhole_holds"] = holds;
    if (r.bridge.connected == 0) out.report << "no connection events observed\n";
    if (!holds) throw VerdictFailure("pigeonhole observation violated");
  }
}

void task_tail(const ExperimentConfig& c, Output& out, const RunnerOptions& options) {
  const FkModel model = c.model();
  const auto window = as_config([&] { return make_window(model, c.origin, c.origin_window); });
  const auto set = stage("sample", [&] {
    return run_chains(c, model, out.seeds, "tail", model.box().index(c.origin),
                      [&](std::uint64_t e) { return std::make_unique<TailCollector>(window, c.thresholds, e); },
                      options, out);
  });
  stage("aggregate", [&] {
    emit_column(out, set, "size", "cluster_size_mean", target_label(c.origin), std::nullopt, std::nullopt);
    for (auto n : c.thresholds)
      emit_column(out, set, "tail:" + std::to_string(n), "tail", std::to_string(n), std::nullopt, std::nullopt);
    return 0;
  });
  const auto fit = stage("tail-fit", [&] { return cluster_tail(states_of(set.collectors), c.thresholds); });
  json pts = json::array();
  for (auto i : fit.fit_points) pts.push_back(fit.thresholds[i]);
  out.summary["window_size"] = window.window.size();
  out.summary["fit"] = json{{"slope", fit.slope},
                            {"slope_stderr", fit.slope_se},
                            {"intercept", fit.intercept},
                            {"c1", fit.c1()},
                            {"fit_thresholds", pts},
                            {"residuals", fit.residuals},
                            {"sign_successes", fit.sign_successes},
                            {"sign_trials", fit.sign_trials},
                            {"convex_p_value", fit.convex_p_value},
                            {"exponential_decay_consistent", fit.exponential_consistent}};
  std::string plot = "# n tail stderr\n";
  for (std::size_t i = 0; i < fit.thresholds.size(); ++i)
    plot += std::to_string(fit.thresholds[i]) + " " + format_double(fit.tail[i].mean) + " " +
            format_double(fit.tail[i].std_error) + "\n";
  out.write("tail.dat", plot);
  out.report << "cluster tail fit: slope " << format_double(fit.slope) << " +- " << format_double(fit.slope_se)
             << ", sign test " << fit.sign_successes << "/" << fit.sign_trials << " p=" << format_double(fit.convex_p_value)
             << ", verdict " << (fit.exponential_consistent ? "exponential-decay-consistent" : "not consistent") << "\n";
  if (!fit.exponential_consistent) throw VerdictFailure("cluster tail is not exponential-decay-consistent");
}

json report_json(const HypothesisReport& r) {
  json j{{"hypothesis", std::string(to_string(r.hypothesis))},
         {"verdict", std::string(to_string(r.verdict))},
         {"scan_radius", r.scan_radius}};
  switch (r.hypothesis) {
    case Hypothesis::H1:
      j["c"] = r.constant;
      break;
    case Hypothesis::H3:
      j["partial_sum"] = r.partial_sum;
      j["tail_bound"] = std::isfinite(r.tail_bound) ? json(r.tail_bound) : json("inf");
      break;
    case Hypothesis::H4: {
      json probes = json::array();
      for (const auto& p : r.probes)
        probes.push_back(json{{"x", target_label(p.x)},
                              {"epsilon", p.epsilon},
                              {"delta", p.delta ? json(*p.delta) : json(nullptr)},
                              {"vacuous", p.vacuous}});
      j["probes"] = probes;
      break;
    }
    case Hypothesis::H5:
      j["gamma"] = r.gamma;
      j["alpha"] = r.alpha;
      j["C1"] = r.constant;
      j["log_C1_sup"] = r.log_constant;
      j["alpha_partial_sum"] = r.partial_sum;
      j["alpha_tail_bound"] = std::isfinite(r.tail_bound) ? json(r.tail_bound) : json("inf");
      break;
  }
  if (!r.violation.empty()) {
    json v = json::array();
    for (const auto& x : r.violation) v.push_back(target_label(x));
    j["violation"] = v;
  }
  if (!r.violation_norms.empty()) j["violation_log_norms"] = r.violation_norms;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

void task_hypotheses(const ExperimentConfig& c, Output& out) {
  const auto spec = c.coupling();
  json reports = json::array();
  bool failed = false;
  for (const auto& h : c.hypotheses) {
    HypothesisReport r;
    if (h == "H1") {
      r = check_h1(spec, c.scan_radius);
    } else if (h == "H3") {
      r = check_h3(spec, c.scan_radius);
    } else if (h == "H4") {
      auto probes = c.probe_points;
      if (probes.empty())
        for (double p = 10; p <= c.scan_radius; p *= 10) {
          LatticeVector x(c.dimension, 0);
          x[0] = static_cast<std::int64_t>(p);
          probes.push_back(x);
        }
      r = as_config([&] { return check_h4(spec, probes, c.epsilons); });
    } else {
      H5Options o;
      if (c.log_cap > 0.0) o.log_cap = c.log_cap;
      r = as_config([&] { return check_h5(spec, c.gamma, c.alpha, c.scan_radius, o); });
    }
    failed = failed || r.verdict == Verdict::fail;
    reports.push_back(report_json(r));
    out.report << h << ": " << to_string(r.verdict) << (r.note.empty() ? "" : " (" + r.note + ")") << "\n";
  }
  out.summary["coupling"] = spec.describe();
  out.summary["reports"] = reports;
  if (failed) throw VerdictFailure("hypothesis check failed");
}

void task_es_identity(const ExperimentConfig& c, Output& out) {
  if (c.q != std::floor(c.q) || c.q < 2) throw ConfigError("es-identity needs integer q >= 2");
  const double dev = stage("es-identity", [&] {
    return es_identity_check(c.box(), c.coupling(), c.beta, static_cast<int>(c.q), c.convention);
  });
  Estimate e;
  e.mean = dev;
  out.row("es_identity_max_deviation", "", std::nullopt, std::nullopt, e, "exact");
  out.summary["max_deviation"] = dev;
  out.summary["tolerance"] = c.tolerance;
  out.report << "Edwards-Sokal identity, convention " << to_string(c.convention) << ": max deviation "
             << format_double(dev) << " (tolerance " << format_double(c.tolerance) << ")\n";
  if (!(dev <= c.tolerance)) throw VerdictFailure("identity deviation above tolerance");
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const RunnerOptions& options) {
  RunResult result;
  ExperimentConfig c = config;
  if (options.seed_override) c.seeds = {*options.seed_override};
  if (options.output_directory) c.output_directory = *options.output_directory;
  result.output_directory = c.output_directory;

  Output out;
  out.config = &c;
  out.dir = c.output_directory;
  out.seeds = c.seeds;
  out.summary["lrfk_version"] = kVersion;
  out.summary["config_hash"] = hex64(c.hash);
  out.summary["task"] = std::string(to_string(c.task));
  json cfg = json::object();
  for (const auto& [k, v] : c.raw)
    if (k.rfind("output.", 0) != 0) cfg[k] = v;
  out.summary["config"] = cfg;

  try {
    if (c.task != TaskType::check_hypotheses) {
      const Box box = c.box();
      out.box_radius = box.radius();
      out.summary["box"] = box.descriptor();
      out.summary["box_size"] = box.size();
    }
    if (options.dry_run) {
      if (c.task == TaskType::sample || c.task == TaskType::ratio_scan || c.task == TaskType::bridge_scan) {
        const FkModel model = c.model();
        as_config([&] { return make_geometry(model, c.origin, c.origin_window, c.targets); });
      }
      result.message = "configuration valid";
      return result;
    }
    out.report << "lrfk " << kVersion << " task " << to_string(c.task) << " config " << hex64(c.hash) << "\n";
    try {
      switch (c.task) {
        case TaskType::exact: task_exact(c, out); break;
        case TaskType::sample:
        case TaskType::ratio_scan:
        case TaskType::bridge_scan: task_scan(c, out, options); break;
        case TaskType::tail_scan: task_tail(c, out, options); break;
        case TaskType::check_hypotheses: task_hypotheses(c, out); break;
        case TaskType::es_identity: task_es_identity(c, out); break;
      }
      out.summary["verdict"] = "pass";
    } catch (const VerdictFailure& v) {
      out.summary["verdict"] = "fail";
      out.summary["verdict_reason"] = v.what();
      out.report << "verdict: fail (" << v.what() << ")\n";
      result.exit_code = kExitVerdict;
      result.message = v.what();
    }
    if (c.task == TaskType::sample || c.task == TaskType::ratio_scan || c.task == TaskType::bridge_scan ||
        c.task == TaskType::tail_scan) {
      json man = json::object();
      for (const auto& l : out.manifest_lines) {
        auto eq = l.find('=');
        man[l.substr(0, eq)] = l.substr(eq + 1);
      }
      out.summary["manifests"] = man;
    }
    out.finish();
    result.summary_json = out.summary.dump(2);
  } catch (const ConfigError& e) {
    result.exit_code = kExitConfig;
    result.message = std::string("config error: ") + e.what();
  } catch (const std::exception& e) {
    result.exit_code = kExitRuntime;
    result.message = std::string("runtime error: ") + e.what();
  }
  result.files = out.files;
  return result;
}

RunResult run_config_file(const fs::path& path, const RunnerOptions& options) {
  try {
    return run_experiment(load_config(path), options);
  } catch (const ConfigError& e) {
    RunResult r;
    r.exit_code = kExitConfig;
    r.message = std::string("config error: ") + e.what();
    return r;
  } catch (const std::exception& e) {
    RunResult r;
    r.exit_code = kExitRuntime;
    r.message = std::string("runtime error: ") + e.what();
    return r;
  }
}

}  // namespace lrfk
