#include "dcsim/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>

#include <CLI11.hpp>

#include "dcsim/experiments.hpp"
#include "dcsim/serialize.hpp"
#include "dcsim/stats.hpp"

namespace dcsim {

namespace {

constexpr double kPi = std::numbers::pi;

struct CheckResult {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct Manifest {
  std::string command;
  Json config_echo;
  std::uint64_t seed = 0;
  std::string semantics;
  std::vector<std::pair<std::string, std::string>> outputs;  // (path, kind)
  std::vector<CheckResult> checks;

  void add_check(const std::string& name, double value, double expected, double tolerance) {
    checks.push_back(
        {name, value, expected, tolerance, std::abs(value - expected) <= tolerance});
  }

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& c) { return c.pass; });
  }
};

struct Options {
  std::string experiment;
  std::string check_name;
  std::string dump_what;

  std::uint64_t shots = 10000;
  std::uint64_t seed = 0;
  std::string semantics = "collapse";
  std::uint64_t bins = 32;
  std::uint64_t pairs = 1;
  bool eraser_in = true;
  bool closed = true;
  bool screen = true;
  std::int64_t insert_at = -1;
  std::string out_dir;
  std::string format = "csv";
  std::string config_path;

  // Explicit-use tracking, for flag-over-file precedence and toggle checks.
  CLI::Option* opt_shots = nullptr;
  CLI::Option* opt_seed = nullptr;
  CLI::Option* opt_semantics = nullptr;
  CLI::Option* opt_bins = nullptr;
  CLI::Option* opt_pairs = nullptr;
  CLI::Option* opt_eraser = nullptr;
  CLI::Option* opt_closed = nullptr;
  CLI::Option* opt_screen = nullptr;
  CLI::Option* opt_insert = nullptr;
  CLI::Option* opt_out = nullptr;
  CLI::Option* opt_format = nullptr;
};

void add_common_options(CLI::App* cmd, Options& o) {
  o.opt_shots = cmd->add_option("--shots", o.shots, "Monte Carlo shots");
  o.opt_seed = cmd->add_option("--seed", o.seed, "random seed");
  o.opt_semantics = cmd->add_option("--semantics", o.semantics, "measurement semantics")
                        ->check(CLI::IsMember({"collapse", "convivial"}));
  o.opt_bins = cmd->add_option("--bins", o.bins, "screen bins");
  o.opt_pairs = cmd->add_option("--pairs", o.pairs, "entangled pairs per run");
  o.opt_eraser = cmd->add_flag("--eraser-in,!--eraser-out", o.eraser_in,
                               "eraser beam splitter present/absent");
  o.opt_closed = cmd->add_flag("--closed,!--open", o.closed,
                               "Mach-Zehnder second beam splitter present/absent");
  o.opt_screen = cmd->add_flag("--screen,!--detectors", o.screen,
                               "double-slit screen vs which-path detectors");
  o.opt_insert = cmd->add_option("--insert-at", o.insert_at,
                                 "logical tag of the configuration choice");
  o.opt_out = cmd->add_option("--out", o.out_dir, "output directory");
  o.opt_format = cmd->add_option("--format", o.format, "histogram file format")
                     ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--config", o.config_path, "JSON config file (flags override)");
}

ExperimentKind parse_kind(const std::string& name) {
  if (name == "double-slit") return ExperimentKind::kDoubleSlit;
  if (name == "mzi") return ExperimentKind::kMachZehnder;
  if (name == "epr") return ExperimentKind::kEpr;
  if (name == "eraser") return ExperimentKind::kQuantumEraser;
  fail("bad-config", "unknown experiment '" + name + "'");
}

/// Apply config-file values for everything the command line left untouched.
void merge_config_file(Options& o) {
  if (o.config_path.empty()) return;
  std::ifstream stream(o.config_path);
  if (!stream) fail("bad-config", "cannot read config file '" + o.config_path + "'");
  Json file;
  try {
    stream >> file;
  } catch (const std::exception& e) {
    fail("bad-config", std::string("config file is not valid JSON: ") + e.what());
  }
  if (!file.is_object()) fail("bad-config", "config file must hold a JSON object");

  if (file.contains("experiment")) {
    const std::string from_file = file["experiment"].get<std::string>();
    if (o.experiment.empty()) {
      o.experiment = from_file;
    } else if (o.experiment != from_file) {
      fail("bad-config", "config file experiment '" + from_file +
                             "' conflicts with command line '" + o.experiment + "'");
    }
  }
  const auto take = [&](const char* key, CLI::Option* opt, auto& target) {
    if (file.contains(key) && (opt == nullptr || opt->count() == 0))
      target = file[key].get<std::decay_t<decltype(target)>>();
  };
  take("shots", o.opt_shots, o.shots);
  take("seed", o.opt_seed, o.seed);
  take("semantics", o.opt_semantics, o.semantics);
  take("bins", o.opt_bins, o.bins);
  take("pairs", o.opt_pairs, o.pairs);
  take("eraser_in", o.opt_eraser, o.eraser_in);
  take("closed", o.opt_closed, o.closed);
  take("screen", o.opt_screen, o.screen);
  take("insert_at", o.opt_insert, o.insert_at);
  take("out", o.opt_out, o.out_dir);
  take("format", o.opt_format, o.format);

  static const std::set<std::string> known = {
      "experiment", "shots", "seed",      "semantics", "bins", "pairs",
      "eraser_in",  "closed", "screen",   "insert_at", "out",  "format"};
  for (const auto& [key, value] : file.items()) {
    if (!known.count(key)) fail("bad-config", "unknown config key '" + key + "'");
  }
}

/// Reject toggles that do not belong to the experiment.
void reject_foreign_toggles(const Options& o, ExperimentKind kind) {
  const auto used = [](const CLI::Option* opt) { return opt != nullptr && opt->count() > 0; };
  if (used(o.opt_eraser) && kind != ExperimentKind::kQuantumEraser)
    fail("bad-config", "--eraser-in/--eraser-out applies only to the eraser experiment");
  if (used(o.opt_closed) && kind != ExperimentKind::kMachZehnder)
    fail("bad-config", "--open/--closed applies only to the Mach-Zehnder experiment");
  if (used(o.opt_screen) && kind != ExperimentKind::kDoubleSlit)
    fail("bad-config", "--screen/--detectors applies only to the double-slit experiment");
  if (used(o.opt_bins) &&
      !(kind == ExperimentKind::kDoubleSlit || kind == ExperimentKind::kQuantumEraser))
    fail("bad-config", "--bins applies only to experiments with a screen");
  if (used(o.opt_pairs) &&
      !(kind == ExperimentKind::kEpr || kind == ExperimentKind::kQuantumEraser))
    fail("bad-config", "--pairs applies only to the EPR and eraser experiments");
  if (used(o.opt_insert) && kind == ExperimentKind::kEpr)
    fail("bad-config", "--insert-at does not apply to the EPR experiment");
}

ExperimentConfig make_config(const Options& o, ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.geometry = Geometry::fringe_grid(o.bins);
  cfg.screen = o.screen;
  cfg.closed = o.closed;
  cfg.eraser_in = o.eraser_in;
  cfg.choice_time = o.insert_at;
  cfg.pair_count = o.pairs;
  cfg.semantics =
      o.semantics == "convivial" ? SemanticsMode::kConvivial : SemanticsMode::kCollapse;
  cfg.shots = o.shots;
  cfg.seed = o.seed;
  cfg.validate();
  return cfg;
}

Json config_echo(const ExperimentConfig& cfg) {
  return Json{{"experiment", to_string(cfg.kind)},
              {"shots", cfg.shots},
              {"seed", cfg.seed},
              {"semantics", to_string(cfg.semantics)},
              {"bins", cfg.geometry.bins()},
              {"pairs", cfg.pair_count},
              {"eraser_in", cfg.eraser_in},
              {"closed", cfg.closed},
              {"screen", cfg.screen},
              {"insert_at", cfg.resolved_choice_time()}};
}

std::string resolve_out_dir(const Options& o) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (const char* env = std::getenv("DCSIM_OUT")) {
    if (*env != '\0') return env;
  }
  return ".";
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_json(Manifest& manifest, const std::string& dir, const std::string& name,
                const Json& value, const std::string& kind) {
  const std::string path = join_path(dir, name);
  write_text_file(path, value.dump(2) + "\n");
  manifest.outputs.emplace_back(path, kind);
}

void write_histogram(Manifest& manifest, const Options& o, const std::string& dir,
                     const std::string& stem, const Histogram& hist, const Geometry& g) {
  if (o.format == "json") {
    write_json(manifest, dir, stem + ".json", histogram_to_json(hist, g), "histogram-json");
  } else {
    const std::string path = join_path(dir, stem + ".csv");
    write_text_file(path, histogram_csv(hist, g));
    manifest.outputs.emplace_back(path, "histogram-csv");
  }
}

Histogram empirical_subsystem_histogram(const RecordSet& records,
                                        const ScheduledExperiment& sched,
                                        const std::string& subsystem) {
  const SubsystemSpec axis = sched.space.at(subsystem);
  Histogram hist{axis, std::vector<double>(axis.size(), 0.0)};
  for (const auto& rec : records.records) {
    auto it = rec.outcomes.find(subsystem);
    if (it != rec.outcomes.end()) hist.values[axis.label_index(it->second)] += 1.0;
  }
  return hist;
}

double empirical_fraction(const RecordSet& records, const std::string& subsystem,
                          const std::string& outcome) {
  double count = 0.0;
  for (const auto& rec : records.records) {
    auto it = rec.outcomes.find(subsystem);
    if (it != rec.outcomes.end() && it->second == outcome) count += 1.0;
  }
  return count / static_cast<double>(records.records.size());
}

double mc_band(double p, std::uint64_t n) {
  return 4.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

double tv_bound(std::size_t outcomes, std::uint64_t n) {
  return 5.0 * std::sqrt(static_cast<double>(outcomes) / static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// run handlers

void run_double_slit(const ExperimentConfig& cfg, const Options& o, const std::string& dir,
                     Manifest& manifest) {
  const ScheduledExperiment sched = build(cfg);
  const StateVector state = final_state(sched);
  const RecordSet records = run_trials(cfg);

  if (cfg.screen) {
    const ProbabilityTable exact = born_distribution(state, {"bin"});
    Histogram exact_hist{sched.space.at("bin"),
                         std::vector<double>(cfg.geometry.bins(), 0.0)};
    for (const auto& [key, p] : exact.entries) exact_hist.values[key[0]] = p;
    const Histogram empirical = empirical_subsystem_histogram(records, sched, "bin");

    write_histogram(manifest, o, dir, "screen_exact", exact_hist, cfg.geometry);
    write_histogram(manifest, o, dir, "screen_empirical", empirical, cfg.geometry);

    double tv = 0.0;
    const double n = static_cast<double>(cfg.shots);
    for (std::size_t b = 0; b < exact_hist.values.size(); ++b)
      tv += std::abs(empirical.values[b] / n - exact_hist.values[b]);
    manifest.add_check("empirical-tv", 0.5 * tv, 0.0, tv_bound(cfg.geometry.bins(), cfg.shots));
  } else {
    const ProbabilityTable exact = born_distribution(state, {"det"});
    manifest.add_check("p-d1-exact", exact.at({"D1"}), 0.5, 1e-12);
    manifest.add_check("p-d2-exact", exact.at({"D2"}), 0.5, 1e-12);
    manifest.add_check("p-d1-empirical", empirical_fraction(records, "det", "D1"), 0.5,
                       mc_band(0.5, cfg.shots));
    write_json(manifest, dir, "detector_probs.json",
               Json{{"exact", table_to_json(exact)},
                    {"empirical", histogram_to_json(
                                      empirical_subsystem_histogram(records, sched, "det"),
                                      cfg.geometry)["bins"]}},
               "detector-probs");
  }
}

void run_mzi(const ExperimentConfig& cfg, const Options& o, const std::string& dir,
             Manifest& manifest) {
  (void)o;
  const ScheduledExperiment sched = build(cfg);
  const StateVector state = final_state(sched);
  const RecordSet records = run_trials(cfg);

  const ProbabilityTable exact = born_distribution(state, {"det"});
  const double expected_d1 = cfg.closed ? 1.0 : 0.5;
  const double expected_d2 = cfg.closed ? 0.0 : 0.5;
  manifest.add_check("p-d1-exact", exact.at({"D1"}), expected_d1, 1e-12);
  manifest.add_check("p-d2-exact", exact.at({"D2"}), expected_d2, 1e-12);
  manifest.add_check("p-d1-empirical", empirical_fraction(records, "det", "D1"), expected_d1,
                     mc_band(expected_d1, cfg.shots));

  write_json(manifest, dir, "detector_probs.json", Json{{"exact", table_to_json(exact)}},
             "detector-probs");
}

void run_epr(const ExperimentConfig& cfg, const Options& o, const std::string& dir,
             Manifest& manifest) {
  (void)o;
  const ScheduledExperiment sched = build(cfg);
  const auto& [axis_a, axis_b] = sched.pair_axes.front();
  const JointTable exact = exact_joint(sched, axis_a, axis_b);
  const RecordSet records = run_trials(cfg);
  const JointTable empirical = empirical_joint(records, axis_a, axis_b);

  manifest.add_check("p-plus-minus-exact", exact.at({"+", "-"}), 0.5, 1e-12);
  manifest.add_check("p-minus-plus-exact", exact.at({"-", "+"}), 0.5, 1e-12);
  manifest.add_check("p-aligned-exact", exact.at({"+", "+"}) + exact.at({"-", "-"}), 0.0,
                     1e-12);
  if (cfg.semantics == SemanticsMode::kCollapse) {
    const double n = static_cast<double>(records.records.size());
    manifest.add_check("p-plus-minus-empirical", empirical.at({"+", "-"}) / n, 0.5,
                       mc_band(0.5, records.records.size()));
  } else {
    // Convivial: the cross-observer tuple is not an observable; check each
    // observer's private marginal instead.
    double alice_plus = 0.0;
    for (const auto& rec : records.records)
      if (rec.outcomes.at(axis_a) == "+") alice_plus += 1.0;
    manifest.add_check("alice-plus-empirical",
                       alice_plus / static_cast<double>(records.records.size()), 0.5,
                       mc_band(0.5, records.records.size()));
  }

  write_json(manifest, dir, "joint_exact.json", joint_to_json(exact), "joint-table");
  write_json(manifest, dir, "joint_empirical.json", joint_to_json(empirical), "joint-table");
}

void run_eraser(const ExperimentConfig& cfg, const Options& o, const std::string& dir,
                Manifest& manifest) {
  const ScheduledExperiment sched = build(cfg);
  const auto& [bin_axis, det_axis] = sched.pair_axes.front();
  const JointTable joint = exact_joint(sched, bin_axis, det_axis);
  const RecordSet records = run_trials(cfg);

  const std::vector<std::string> detectors = {"D1", "D2", "D3", "D4"};

  // Exact detector marginals.
  std::map<std::string, double> marginal;
  for (const auto& [key, p] : joint.entries)
    marginal[joint.axes[1].alphabet[key[1]]] += p;
  for (const auto& det : detectors)
    manifest.add_check("marginal-" + det + "-exact", marginal[det], 0.25, 1e-12);

  // Exact conditional fringes.
  Json fringes_exact = Json::object();
  std::map<std::string, FringeFit> fits;
  for (const auto& det : detectors) {
    const Histogram hist = conditional_bin_histogram(joint, det);
    fits[det] = fringe_fit(hist, cfg.geometry);
    fringes_exact[det] = fringe_to_json(fits[det]);
  }
  if (cfg.eraser_in) {
    manifest.add_check("visibility-D1-exact", fits["D1"].visibility, 1.0, 1e-6);
    manifest.add_check("visibility-D2-exact", fits["D2"].visibility, 1.0, 1e-6);
    manifest.add_check("visibility-D3-exact", fits["D3"].visibility, 0.0, 1e-6);
    manifest.add_check("visibility-D4-exact", fits["D4"].visibility, 0.0, 1e-6);
    manifest.add_check("phase-diff-D1-D2",
                       std::abs(fits["D1"].phase - fits["D2"].phase), kPi, 1e-6);
  } else {
    for (const auto& det : detectors)
      manifest.add_check("visibility-" + det + "-exact", fits[det].visibility, 0.0, 1e-6);
  }
  manifest.add_check("no-signaling-flatness", check_marginal_flatness(joint), 0.0, 1e-12);

  // Empirical coincidence analysis.
  Json fringes_empirical = Json::object();
  const std::uint64_t pair_records = records.records.size();
  for (const auto& det : detectors) {
    const Histogram hist = coincidence_histogram(records, det);
    write_histogram(manifest, o, dir, "coincidence_" + det, hist, cfg.geometry);
    manifest.add_check("marginal-" + det + "-empirical",
                       hist.total() / static_cast<double>(pair_records), 0.25,
                       mc_band(0.25, pair_records));
    try {
      fringes_empirical[det] = fringe_to_json(fringe_fit(hist, cfg.geometry));
    } catch (const SimError&) {
      fringes_empirical[det] = nullptr;  // too few counts to fit
    }
  }

  write_json(manifest, dir, "joint_exact.json", joint_to_json(joint), "joint-table");
  Json marginals_json = Json::object();
  for (const auto& det : detectors) marginals_json[det] = marginal[det];
  write_json(manifest, dir, "detector_marginals.json",
             Json{{"exact", marginals_json}, {"shots", pair_records}}, "detector-marginals");
  write_json(manifest, dir, "fringes.json",
             Json{{"exact", fringes_exact}, {"empirical", fringes_empirical}}, "fringe-fits");
}

// ---------------------------------------------------------------------------
// check handlers

void check_order_independence_cmd(const ExperimentConfig& cfg, Manifest& manifest) {
  if (cfg.kind != ExperimentKind::kEpr && cfg.kind != ExperimentKind::kQuantumEraser)
    fail("bad-config", "order independence needs two measurement events");
  const ScheduledExperiment sched = build(cfg);
  const double value = check_order_independence(sched, sched.events[0], sched.events[1]);
  manifest.add_check("order-independence", value, 0.0, 1e-12);
}

void check_delayed_invariance_cmd(const ExperimentConfig& cfg, Manifest& manifest) {
  if (cfg.kind == ExperimentKind::kEpr)
    fail("bad-config", "the EPR experiment has no configuration choice to delay");
  const auto [lo, hi] = cfg.choice_window();
  std::vector<std::int64_t> times;
  for (std::int64_t t = lo; t <= hi; ++t) times.push_back(t);
  const double value = check_delayed_invariance(cfg, times);
  manifest.add_check("delayed-invariance", value, 0.0, 0.0);
}

void check_no_signaling_cmd(const ExperimentConfig& cfg, Manifest& manifest) {
  if (cfg.kind != ExperimentKind::kQuantumEraser)
    fail("bad-config", "no-signaling is a quantum-eraser check");
  const ScheduledExperiment sched = build(cfg);
  const auto& [bin_axis, det_axis] = sched.pair_axes.front();
  const double value = check_marginal_flatness(exact_joint(sched, bin_axis, det_axis));
  manifest.add_check("no-signaling-flatness", value, 0.0, 1e-12);
}

void check_no_conflict_cmd(ExperimentConfig cfg, Manifest& manifest) {
  cfg.kind = ExperimentKind::kEpr;
  cfg.semantics = SemanticsMode::kConvivial;
  const NoConflictResult result = run_no_conflict(cfg);
  manifest.add_check("conflicts", static_cast<double>(result.conflicts), 0.0, 0.0);
  manifest.add_check("divergence-rate",
                     static_cast<double>(result.divergent) /
                         static_cast<double>(std::max<std::uint64_t>(result.runs, 1)),
                     0.5, mc_band(0.5, result.runs));
}

void check_semantics_agreement_cmd(const ExperimentConfig& cfg, Manifest& manifest) {
  const ScheduledExperiment sched = build(cfg);
  std::vector<std::string> observers;
  for (const auto& ev : sched.events) {
    if (std::find(observers.begin(), observers.end(), ev.observer) == observers.end())
      observers.push_back(ev.observer);
  }

  double exact_dev = 0.0;
  std::map<std::string, ProbabilityTable> collapse_exact;
  for (const auto& obs : observers) {
    collapse_exact[obs] =
        observer_exact_distribution(sched, SemanticsMode::kCollapse, obs);
    const ProbabilityTable convivial =
        observer_exact_distribution(sched, SemanticsMode::kConvivial, obs);
    exact_dev = std::max(exact_dev, collapse_exact[obs].max_deviation(convivial));
  }
  manifest.add_check("exact-agreement", exact_dev, 0.0, 1e-12);

  for (SemanticsMode mode : {SemanticsMode::kCollapse, SemanticsMode::kConvivial}) {
    ExperimentConfig mc = cfg;
    mc.semantics = mode;
    const RecordSet records = run_trials(mc);
    for (const auto& obs : observers) {
      const ProbabilityTable empirical =
          observer_empirical_distribution(records, sched, obs);
      const double tv = tv_distance(collapse_exact[obs], empirical);
      std::size_t outcomes = 1;
      for (const auto& axis : collapse_exact[obs].axes) outcomes *= axis.size();
      manifest.add_check("empirical-tv-" + to_string(mode) + "-" + obs, tv, 0.0,
                         tv_bound(outcomes, cfg.shots));
    }
  }
}

// ---------------------------------------------------------------------------
// dump handlers

void dump_state_cmd(const ExperimentConfig& cfg, const std::string& dir, Manifest& manifest) {
  const StateVector state = final_state(build(cfg));
  write_json(manifest, dir, "state.json", state_to_json(state), "state-vector");
}

void dump_branches_cmd(ExperimentConfig cfg, const std::string& dir, Manifest& manifest) {
  cfg.semantics = SemanticsMode::kConvivial;
  const ScheduledExperiment sched = build(cfg);
  EngineState engine(SemanticsMode::kConvivial, final_state(sched),
                     RandomStream::substream(cfg.seed, 0));
  for (const auto& ev : sched.events) engine.measure(ev);
  write_json(manifest, dir, "branches.json", branch_trace_to_json(engine), "branch-trace");
}

int dispatch(const Options& o, const std::string& command) {
  const auto started = std::chrono::steady_clock::now();

  ExperimentKind kind = ExperimentKind::kEpr;
  if (!o.experiment.empty()) kind = parse_kind(o.experiment);
  reject_foreign_toggles(o, kind);
  const ExperimentConfig cfg = make_config(o, kind);

  Manifest manifest;
  manifest.command = command;
  manifest.config_echo = config_echo(cfg);
  manifest.seed = cfg.seed;
  manifest.semantics = to_string(cfg.semantics);
  const std::string dir = resolve_out_dir(o);

  if (command == "run") {
    switch (kind) {
      case ExperimentKind::kDoubleSlit: run_double_slit(cfg, o, dir, manifest); break;
      case ExperimentKind::kMachZehnder: run_mzi(cfg, o, dir, manifest); break;
      case ExperimentKind::kEpr: run_epr(cfg, o, dir, manifest); break;
      case ExperimentKind::kQuantumEraser: run_eraser(cfg, o, dir, manifest); break;
    }
  } else if (command == "check") {
    if (o.check_name == "order-independence") {
      check_order_independence_cmd(cfg, manifest);
    } else if (o.check_name == "delayed-invariance") {
      check_delayed_invariance_cmd(cfg, manifest);
    } else if (o.check_name == "no-signaling") {
      check_no_signaling_cmd(cfg, manifest);
    } else if (o.check_name == "no-conflict") {
      check_no_conflict_cmd(cfg, manifest);
    } else if (o.check_name == "semantics-agreement") {
      check_semantics_agreement_cmd(cfg, manifest);
    } else {
      fail("bad-config", "unknown check '" + o.check_name + "'");
    }
  } else if (command == "dump") {
    if (o.dump_what == "state") {
      dump_state_cmd(cfg, dir, manifest);
    } else if (o.dump_what == "branches") {
      dump_branches_cmd(cfg, dir, manifest);
    } else {
      fail("bad-config", "unknown dump target '" + o.dump_what + "'");
    }
  }

  Json checks = Json::array();
  for (const auto& c : manifest.checks) {
    checks.push_back(Json{{"name", c.name},
                          {"value", c.value},
                          {"expected", c.expected},
                          {"tolerance", c.tolerance},
                          {"pass", c.pass}});
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << c.value
              << " expected=" << c.expected << " tolerance=" << c.tolerance << "\n";
  }
  Json outputs = Json::array();
  for (const auto& [path, file_kind] : manifest.outputs)
    outputs.push_back(Json{{"path", path}, {"kind", file_kind}});

  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
          .count();
  Json doc{{"command", manifest.command},
           {"config", manifest.config_echo},
           {"seed", manifest.seed},
           {"semantics", manifest.semantics},
           {"outputs", outputs},
           {"checks", checks},
           {"wall_time_ms", wall_ms}};
  write_text_file(join_path(dir, "manifest.json"), doc.dump(2) + "\n");

  return manifest.all_pass() ? 0 : 1;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"simulator for delayed-choice interference, EPR and quantum-eraser "
               "experiments with collapse and convivial-solipsism measurement semantics"};
  app.require_subcommand(1);
  Options o;

  CLI::App* run = app.add_subcommand("run", "run an experiment, write data and a manifest");
  run->add_option("experiment", o.experiment, "double-slit | mzi | epr | eraser")
      ->required()
      ->check(CLI::IsMember({"double-slit", "mzi", "epr", "eraser"}));
  add_common_options(run, o);

  CLI::App* check = app.add_subcommand("check", "run a named consistency check");
  check
      ->add_option("name", o.check_name,
                   "order-independence | delayed-invariance | no-signaling | no-conflict | "
                   "semantics-agreement")
      ->required()
      ->check(CLI::IsMember({"order-independence", "delayed-invariance", "no-signaling",
                             "no-conflict", "semantics-agreement"}));
  check->add_option("--experiment", o.experiment, "experiment the check applies to")
      ->check(CLI::IsMember({"double-slit", "mzi", "epr", "eraser"}));
  add_common_options(check, o);

  CLI::App* dump = app.add_subcommand("dump", "dump internal structures as JSON");
  dump->add_option("what", o.dump_what, "state | branches")
      ->required()
      ->check(CLI::IsMember({"state", "branches"}));
  dump->add_option("--experiment", o.experiment, "experiment to compile")
      ->check(CLI::IsMember({"double-slit", "mzi", "epr", "eraser"}));
  add_common_options(dump, o);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    merge_config_file(o);
    // Defaults when --experiment was not given to check/dump.
    if (o.experiment.empty()) {
      if (check->parsed()) {
        if (o.check_name == "no-signaling") o.experiment = "eraser";
        else if (o.check_name == "no-conflict") o.experiment = "epr";
        else if (o.check_name == "delayed-invariance") o.experiment = "mzi";
        else o.experiment = "epr";
      } else if (dump->parsed()) {
        o.experiment = "epr";
      }
    }
    const std::string command = run->parsed() ? "run" : (check->parsed() ? "check" : "dump");
    return dispatch(o, command);
  } catch (const SimError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace dcsim
