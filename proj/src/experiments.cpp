#include "dcsim/experiments.hpp"

#include <algorithm>
#include <cmath>

namespace dcsim {

namespace {

// Tag layout. One-particle experiments use a single block; pair experiments
// repeat a block of kPairStride tags per pair.
constexpr std::int64_t kPairStride = 10;
constexpr std::int64_t kEventTag = 10;

std::string pair_name(const std::string& base, std::uint64_t index, std::uint64_t count) {
  return count == 1 ? base : base + std::to_string(index + 1);
}

StateVector slit_source(const std::string& name) {
  StateVector s{CompositeSpace({SubsystemSpec(name, {"U", "L"})})};
  const double a = 1.0 / std::sqrt(2.0);
  s.set({"U"}, {a, 0.0});
  s.set({"L"}, {a, 0.0});
  return s;
}

StateVector singlet_source(const std::string& a_name, const std::string& b_name) {
  StateVector s{CompositeSpace(
      {SubsystemSpec(a_name, {"+", "-"}), SubsystemSpec(b_name, {"+", "-"})})};
  const double a = 1.0 / std::sqrt(2.0);
  s.set({"+", "-"}, {a, 0.0});
  s.set({"-", "+"}, {-a, 0.0});
  return s;
}

std::vector<std::string> bin_basis(std::size_t bins) {
  std::vector<std::string> basis(bins);
  for (std::size_t b = 0; b < bins; ++b) basis[b] = std::to_string(b);
  return basis;
}

StateVector apply_schedule(const ScheduledExperiment& sched) {
  StateVector state = sched.source;
  for (const auto& [tag, element] : sched.schedule) state = element->apply(state);
  return state;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kDoubleSlit: return "double-slit";
    case ExperimentKind::kMachZehnder: return "mzi";
    case ExperimentKind::kEpr: return "epr";
    case ExperimentKind::kQuantumEraser: return "eraser";
  }
  return "?";
}

std::string to_string(SemanticsMode mode) {
  return mode == SemanticsMode::kCollapse ? "collapse" : "convivial";
}

std::pair<std::int64_t, std::int64_t> ExperimentConfig::choice_window() const {
  switch (kind) {
    case ExperimentKind::kDoubleSlit: return {0, 9};   // screen/detector choice tag
    case ExperimentKind::kMachZehnder: return {1, 8};  // BS2 insertion tag
    case ExperimentKind::kQuantumEraser: return {1, 4};  // eraser tag offset in a pair block
    case ExperimentKind::kEpr: return {0, 0};
  }
  return {0, 0};
}

std::int64_t ExperimentConfig::resolved_choice_time() const {
  if (choice_time >= 0) return choice_time;
  switch (kind) {
    case ExperimentKind::kDoubleSlit: return 8;
    case ExperimentKind::kMachZehnder: return 8;
    case ExperimentKind::kQuantumEraser: return 3;  // after the D0 event tag: delayed
    case ExperimentKind::kEpr: return 0;
  }
  return 0;
}

void ExperimentConfig::validate() const {
  geometry.validate();
  if (shots < 1) fail("bad-config", "shots must be >= 1");
  if (pair_count < 1) fail("bad-config", "pair_count must be >= 1");
  if (pair_count > 1 &&
      (kind == ExperimentKind::kDoubleSlit || kind == ExperimentKind::kMachZehnder))
    fail("bad-config", "pair_count applies only to the EPR and eraser experiments");
  const auto [lo, hi] = choice_window();
  const std::int64_t t = resolved_choice_time();
  if (t < lo || t > hi)
    fail("bad-config", "choice time " + std::to_string(t) + " outside schedule horizon [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

ScheduledExperiment build(const ExperimentConfig& config) {
  config.validate();
  const std::int64_t choice = config.resolved_choice_time();

  ScheduledExperiment sched{.schedule = {},
                            .events = {},
                            .source = StateVector{CompositeSpace{}},
                            .space = CompositeSpace{},
                            .pair_axes = {}};

  switch (config.kind) {
    case ExperimentKind::kDoubleSlit: {
      sched.source = slit_source("path");
      if (config.screen) {
        sched.schedule.emplace_back(
            choice, make_screen_propagator("path", "bin", config.geometry));
        sched.events.push_back({"alice", "bin", bin_basis(config.geometry.bins()), kEventTag});
      } else {
        sched.schedule.emplace_back(
            choice,
            make_which_path_coupler("path", "det", {{"U", "D1"}, {"L", "D2"}}));
        sched.events.push_back({"alice", "det", {"D1", "D2"}, kEventTag});
      }
      break;
    }

    case ExperimentKind::kMachZehnder: {
      StateVector s{CompositeSpace({SubsystemSpec("path", {"U", "L"})})};
      s.set({"U"}, {1.0, 0.0});
      sched.source = s;
      sched.schedule.emplace_back(0, make_beam_splitter("path", "U", "L", config.convention));
      sched.schedule.emplace_back(1, make_mirror("path", "U"));
      sched.schedule.emplace_back(1, make_mirror("path", "L"));
      if (config.closed) {
        sched.schedule.emplace_back(choice,
                                    make_beam_splitter("path", "U", "L", config.convention));
      }
      // Fixed line-to-detector map; the closed bright line carries the D1 name.
      sched.schedule.emplace_back(
          9, make_which_path_coupler("path", "det", {{"U", "D2"}, {"L", "D1"}}));
      sched.events.push_back({"alice", "det", {"D1", "D2"}, kEventTag});
      break;
    }

    case ExperimentKind::kEpr: {
      StateVector source{CompositeSpace{}};
      source.set_indices({}, {1.0, 0.0});
      for (std::uint64_t i = 0; i < config.pair_count; ++i) {
        const std::string a = pair_name("A", i, config.pair_count);
        const std::string b = pair_name("B", i, config.pair_count);
        source = tensor(source, singlet_source(a, b));
        const std::int64_t base = static_cast<std::int64_t>(i) * kPairStride;
        sched.events.push_back({"alice", a, {"+", "-"}, base + 1});  // Alice first
        sched.events.push_back({"bob", b, {"+", "-"}, base + 2});
        sched.pair_axes.emplace_back(a, b);
      }
      sched.source = source;
      break;
    }

    case ExperimentKind::kQuantumEraser: {
      StateVector source{CompositeSpace{}};
      source.set_indices({}, {1.0, 0.0});
      for (std::uint64_t i = 0; i < config.pair_count; ++i) {
        const std::string src = pair_name("src", i, config.pair_count);
        const std::string sig = pair_name("sig", i, config.pair_count);
        const std::string idl = pair_name("idl", i, config.pair_count);
        const std::string bin = pair_name("bin", i, config.pair_count);
        const std::string det = pair_name("det", i, config.pair_count);
        source = tensor(source, slit_source(src));

        const std::int64_t base = static_cast<std::int64_t>(i) * kPairStride;
        sched.schedule.emplace_back(base + 0, make_spdc(src, sig, idl));
        sched.schedule.emplace_back(base + 1,
                                    make_screen_propagator(sig, bin, config.geometry));
        // The idler network tag defaults to after the D0 event tag: the
        // eraser choice is made once the signal photon is already recorded.
        sched.schedule.emplace_back(
            base + choice,
            make_idler_network(idl, det, config.eraser_in, config.convention));

        sched.events.push_back({"alice", bin, bin_basis(config.geometry.bins()), base + 2});
        sched.events.push_back({"alice", det, {"D1", "D2", "D3", "D4"}, base + 4});
        sched.pair_axes.emplace_back(bin, det);
      }
      sched.source = source;
      break;
    }
  }

  std::stable_sort(sched.schedule.begin(), sched.schedule.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::stable_sort(sched.events.begin(), sched.events.end(),
                   [](const auto& a, const auto& b) { return a.time_tag < b.time_tag; });

  sched.space = apply_schedule(sched).space();

  for (std::size_t i = 1; i < sched.schedule.size(); ++i) {
    if (sched.schedule[i].first < sched.schedule[i - 1].first)
      fail("bad-config", "schedule tags must be non-decreasing");
  }
  for (const auto& ev : sched.events) {
    if (!sched.space.has(ev.subsystem))
      fail("bad-config", "event subsystem '" + ev.subsystem + "' not in final space");
  }
  return sched;
}

StateVector final_state(const ScheduledExperiment& sched) {
  StateVector state = apply_schedule(sched);
  if (!state.is_normalized())
    fail("not-normalized", "schedule did not preserve the state norm");
  return state;
}

}  // namespace dcsim
