#include "dcsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dcsim {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<std::string> observer_event_subsystems(const ScheduledExperiment& sched,
                                                   const std::string& observer) {
  std::vector<std::string> subsystems;
  for (const auto& ev : sched.events) {
    if (ev.observer == observer) subsystems.push_back(ev.subsystem);
  }
  if (subsystems.empty())
    fail("unknown-observer", "no events for observer '" + observer + "'");
  return subsystems;
}

}  // namespace

double JointTable::at(const std::vector<std::string>& labels) const {
  if (labels.size() != axes.size()) fail("wrong-space", "expected two labels");
  LabelTuple key(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) key[i] = axes[i].label_index(labels[i]);
  auto it = entries.find(key);
  return it == entries.end() ? 0.0 : it->second;
}

double JointTable::total() const {
  double t = 0.0;
  for (const auto& [key, v] : entries) t += v;
  return t;
}

JointTable JointTable::as_probabilities() const {
  JointTable out = *this;
  const double t = total();
  if (t > 0.0) {
    for (auto& [key, v] : out.entries) v /= t;
  }
  return out;
}

double Histogram::total() const {
  double t = 0.0;
  for (double v : values) t += v;
  return t;
}

bool RecordSet::operator==(const RecordSet& other) const {
  if (kind != other.kind || mode != other.mode || seed != other.seed ||
      shots != other.shots || pair_count != other.pair_count ||
      pair_axes != other.pair_axes || run_logs != other.run_logs)
    return false;
  if (records.size() != other.records.size()) return false;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const PairRecord& a = records[i];
    const PairRecord& b = other.records[i];
    if (a.pair_id != b.pair_id || a.run_index != b.run_index || a.outcomes != b.outcomes)
      return false;
  }
  return true;
}

JointTable exact_joint(const ScheduledExperiment& sched, const std::string& axis_a,
                       const std::string& axis_b) {
  const StateVector state = final_state(sched);
  const ProbabilityTable born = born_distribution(state, {axis_a, axis_b});
  JointTable table;
  table.axes = born.axes;
  table.entries = born.entries;
  table.kind = TableKind::kExact;
  return table;
}

JointTable empirical_joint(const RecordSet& records, const std::string& axis_a,
                           const std::string& axis_b) {
  if (records.axis_specs.size() != 2)
    fail("bad-config", "record set has no pair axes");
  if (records.axis_specs[0].name != axis_a || records.axis_specs[1].name != axis_b)
    fail("unknown-subsystem", "empirical_joint axes must be the pair axes (" +
                                  records.axis_specs[0].name + ", " +
                                  records.axis_specs[1].name + ")");
  JointTable table;
  table.axes = records.axis_specs;
  table.kind = TableKind::kEmpirical;
  table.shots = records.records.size();
  for (const auto& rec : records.records) {
    const std::size_t pair = rec.pair_id % std::max<std::uint64_t>(records.pair_count, 1);
    const auto& [a_name, b_name] = records.pair_axes[pair];
    const std::uint32_t ia = records.axis_specs[0].label_index(rec.outcomes.at(a_name));
    const std::uint32_t ib = records.axis_specs[1].label_index(rec.outcomes.at(b_name));
    table.entries[LabelTuple{ia, ib}] += 1.0;
  }
  return table;
}

RecordSet run_trials(const ExperimentConfig& config) {
  const ScheduledExperiment sched = build(config);
  const StateVector state = final_state(sched);

  RecordSet out;
  out.kind = config.kind;
  out.mode = config.semantics;
  out.seed = config.seed;
  out.shots = config.shots;
  out.pair_count = config.pair_count;
  out.pair_axes = sched.pair_axes;
  if (!sched.pair_axes.empty()) {
    out.axis_specs = {sched.space.at(sched.pair_axes[0].first),
                      sched.space.at(sched.pair_axes[0].second)};
  }

  // Which pair does each measured subsystem belong to?
  std::map<std::string, std::size_t> pair_of;
  for (std::size_t p = 0; p < sched.pair_axes.size(); ++p) {
    pair_of[sched.pair_axes[p].first] = p;
    pair_of[sched.pair_axes[p].second] = p;
  }
  const std::uint64_t pairs_per_run = sched.pair_axes.empty() ? 1 : sched.pair_axes.size();

  out.records.reserve(config.shots * pairs_per_run);
  out.run_logs.reserve(config.shots);
  for (std::uint64_t run = 0; run < config.shots; ++run) {
    EngineState engine(config.semantics, state, RandomStream::substream(config.seed, run));
    std::vector<PairRecord> run_records(pairs_per_run);
    for (std::uint64_t p = 0; p < pairs_per_run; ++p) {
      run_records[p].pair_id = run * pairs_per_run + p;
      run_records[p].run_index = run;
    }
    std::vector<RunLogEntry> log;
    log.reserve(sched.events.size());
    for (const auto& ev : sched.events) {
      const std::string outcome = engine.measure(ev);
      auto it = pair_of.find(ev.subsystem);
      const std::size_t p = it == pair_of.end() ? 0 : it->second;
      run_records[p].outcomes[ev.subsystem] = outcome;
      log.push_back(RunLogEntry{ev.observer, LogEntry{ev.subsystem, outcome, false, ""}});
    }
    for (auto& rec : run_records) out.records.push_back(std::move(rec));
    out.run_logs.push_back(std::move(log));
  }
  return out;
}

Histogram coincidence_histogram(const RecordSet& records, const std::string& detector) {
  if (records.kind != ExperimentKind::kQuantumEraser)
    fail("bad-config", "coincidence_histogram expects a quantum-eraser record set");
  const SubsystemSpec& bin_axis = records.axis_specs[0];
  const SubsystemSpec& det_axis = records.axis_specs[1];
  if (!det_axis.has_label(detector))
    fail("unknown-label", "no detector labeled '" + detector + "'");

  Histogram hist{bin_axis, std::vector<double>(bin_axis.size(), 0.0)};
  for (const auto& rec : records.records) {
    const std::size_t pair = rec.pair_id % records.pair_count;
    const auto& [bin_name, det_name] = records.pair_axes[pair];
    if (rec.outcomes.at(det_name) != detector) continue;
    hist.values[bin_axis.label_index(rec.outcomes.at(bin_name))] += 1.0;
  }
  return hist;
}

Histogram conditional_bin_histogram(const JointTable& joint, const std::string& detector) {
  if (joint.kind != TableKind::kExact)
    fail("bad-config", "conditional_bin_histogram expects an exact table");
  const SubsystemSpec& bin_axis = joint.axes[0];
  const std::uint32_t det = joint.axes[1].label_index(detector);

  Histogram hist{bin_axis, std::vector<double>(bin_axis.size(), 0.0)};
  double mass = 0.0;
  for (const auto& [key, p] : joint.entries) {
    if (key[1] != det) continue;
    hist.values[key[0]] += p;
    mass += p;
  }
  if (mass == 0.0)
    fail("impossible-outcome", "detector '" + detector + "' has zero probability");
  for (double& v : hist.values) v /= mass;
  return hist;
}

FringeFit fringe_fit(const Histogram& hist, const Geometry& g) {
  if (hist.values.size() != g.bins())
    fail("bad-config", "histogram bin count does not match the geometry");
  const double total = hist.total();
  if (total <= 0.0) fail("underdetermined-fit", "empty histogram");

  // Precondition: at least 3 occupied bins spanning at least one full fringe
  // period of the phase variable.
  std::size_t occupied = 0;
  double phase_lo = 0.0, phase_hi = 0.0;
  bool first = true;
  for (std::size_t b = 0; b < hist.values.size(); ++b) {
    if (hist.values[b] <= 0.0) continue;
    ++occupied;
    const double phase = g.phase_at(b);
    if (first) {
      phase_lo = phase_hi = phase;
      first = false;
    } else {
      phase_lo = std::min(phase_lo, phase);
      phase_hi = std::max(phase_hi, phase);
    }
  }
  if (occupied < 3)
    fail("underdetermined-fit", "need at least 3 nonempty bins");
  if (phase_hi - phase_lo < 2.0 * kPi - 1e-9)
    fail("underdetermined-fit", "occupied bins span less than one fringe period");

  // Linear least squares on y = c0 + c1 cos(phi) + c2 sin(phi); exact on
  // noiseless fringes, no nonlinear optimization involved.
  double a[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  double rhs[3] = {0, 0, 0};
  for (std::size_t b = 0; b < hist.values.size(); ++b) {
    const double y = hist.values[b] / total;
    const double phi = g.phase_at(b);
    const double reg[3] = {1.0, std::cos(phi), std::sin(phi)};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) a[i][j] += reg[i] * reg[j];
      rhs[i] += reg[i] * y;
    }
  }

  // Gaussian elimination with partial pivoting on the 3x3 normal equations.
  int perm[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int row = col + 1; row < 3; ++row) {
      if (std::abs(a[perm[row]][col]) > std::abs(a[perm[pivot]][col])) pivot = row;
    }
    std::swap(perm[col], perm[pivot]);
    const double diag = a[perm[col]][col];
    if (std::abs(diag) < 1e-12)
      fail("underdetermined-fit", "singular normal equations");
    for (int row = col + 1; row < 3; ++row) {
      const double factor = a[perm[row]][col] / diag;
      for (int j = col; j < 3; ++j) a[perm[row]][j] -= factor * a[perm[col]][j];
      rhs[perm[row]] -= factor * rhs[perm[col]];
    }
  }
  double c[3];
  for (int col = 2; col >= 0; --col) {
    double v = rhs[perm[col]];
    for (int j = col + 1; j < 3; ++j) v -= a[perm[col]][j] * c[j];
    c[col] = v / a[perm[col]][col];
  }

  FringeFit fit;
  fit.baseline = c[0];
  const double amplitude = std::hypot(c[1], c[2]);
  if (c[0] <= 0.0 || amplitude <= 1e-12 * std::max(1.0, std::abs(c[0]))) {
    // Flat histogram: visibility 0 by definition, phase pinned to 0.
    fit.visibility = 0.0;
    fit.phase = 0.0;
  } else {
    fit.visibility = amplitude / c[0];
    fit.phase = std::atan2(-c[2], c[1]);
    if (fit.phase <= -kPi) fit.phase = kPi;
  }

  double ss = 0.0;
  for (std::size_t b = 0; b < hist.values.size(); ++b) {
    const double y = hist.values[b] / total;
    const double phi = g.phase_at(b);
    const double predicted = c[0] + c[1] * std::cos(phi) + c[2] * std::sin(phi);
    ss += (y - predicted) * (y - predicted);
  }
  fit.residual = std::sqrt(ss / static_cast<double>(hist.values.size()));
  return fit;
}

namespace {

JointTable sequential_joint(const StateVector& state, const std::string& first,
                            const std::string& second, bool swap_axes) {
  // Chain rule through the collapse engine's own steps: Born, project, Born.
  JointTable table;
  const ProbabilityTable outer = born_distribution(state, {first});
  const SubsystemSpec& first_spec = outer.axes[0];
  for (const auto& [key_x, p_x] : outer.entries) {
    const std::string label_x = first_spec.alphabet[key_x[0]];
    const StateVector conditioned = project(state, first, label_x);
    const ProbabilityTable inner = born_distribution(conditioned, {second});
    if (table.axes.empty()) {
      table.axes = swap_axes
                       ? std::vector<SubsystemSpec>{inner.axes[0], first_spec}
                       : std::vector<SubsystemSpec>{first_spec, inner.axes[0]};
    }
    for (const auto& [key_y, p_y] : inner.entries) {
      const LabelTuple key = swap_axes ? LabelTuple{key_y[0], key_x[0]}
                                       : LabelTuple{key_x[0], key_y[0]};
      table.entries[key] += p_x * p_y;
    }
  }
  table.kind = TableKind::kExact;
  return table;
}

double table_max_deviation(const JointTable& a, const JointTable& b) {
  double dev = 0.0;
  for (const auto& [key, p] : a.entries) {
    auto it = b.entries.find(key);
    dev = std::max(dev, std::abs(p - (it == b.entries.end() ? 0.0 : it->second)));
  }
  for (const auto& [key, q] : b.entries) {
    if (!a.entries.count(key)) dev = std::max(dev, q);
  }
  return dev;
}

}  // namespace

double check_order_independence(const ScheduledExperiment& sched,
                                const MeasurementEvent& ev_a, const MeasurementEvent& ev_b) {
  if (ev_a.subsystem == ev_b.subsystem)
    fail("non-commuting", "order independence is only defined for disjoint subsystems");
  const StateVector state = final_state(sched);
  const JointTable ab = sequential_joint(state, ev_a.subsystem, ev_b.subsystem, false);
  const JointTable ba = sequential_joint(state, ev_b.subsystem, ev_a.subsystem, true);
  return table_max_deviation(ab, ba);
}

double check_marginal_flatness(const JointTable& joint) {
  if (joint.kind != TableKind::kExact)
    fail("bad-config", "marginal flatness is defined on exact tables");
  const std::size_t bins = joint.axes[0].size();
  std::vector<double> marginal(bins, 0.0);
  for (const auto& [key, p] : joint.entries) marginal[key[0]] += p;

  const double uniform = 1.0 / static_cast<double>(bins);
  double dev = 0.0;
  for (double p : marginal) dev = std::max(dev, std::abs(p - uniform));
  return dev;
}

double check_delayed_invariance(const ExperimentConfig& config,
                                const std::vector<std::int64_t>& times) {
  std::vector<ProbabilityTable> tables;
  tables.reserve(times.size());
  for (std::int64_t t : times) {
    ExperimentConfig variant = config;
    variant.choice_time = t;
    const ScheduledExperiment sched = build(variant);
    std::vector<std::string> selection;
    for (const auto& ev : sched.events) {
      if (std::find(selection.begin(), selection.end(), ev.subsystem) == selection.end())
        selection.push_back(ev.subsystem);
    }
    tables.push_back(born_distribution(final_state(sched), selection));
  }
  double dev = 0.0;
  for (std::size_t i = 1; i < tables.size(); ++i)
    dev = std::max(dev, tables[0].max_deviation(tables[i]));
  return dev;
}

namespace {

void enumerate_chain(const StateVector& global, const std::vector<std::string>& subsystems,
                     std::size_t index, std::map<std::string, std::string>& assignment,
                     LabelTuple& path, double prob,
                     std::map<LabelTuple, double>& out) {
  if (index == subsystems.size()) {
    out[path] += prob;
    return;
  }
  const std::string& subsystem = subsystems[index];
  const ProbabilityTable table = conditional_born(global, assignment, subsystem);
  const SubsystemSpec& spec = table.axes[0];
  for (const auto& [key, p] : table.entries) {
    assignment[subsystem] = spec.alphabet[key[0]];
    path.push_back(key[0]);
    enumerate_chain(global, subsystems, index + 1, assignment, path, prob * p, out);
    path.pop_back();
    assignment.erase(subsystem);
  }
}

void enumerate_collapse(const StateVector& state, const std::vector<std::string>& subsystems,
                        std::size_t index, LabelTuple& path, double prob,
                        std::map<LabelTuple, double>& out) {
  if (index == subsystems.size()) {
    out[path] += prob;
    return;
  }
  const std::string& subsystem = subsystems[index];
  const ProbabilityTable table = born_distribution(state, {subsystem});
  const SubsystemSpec& spec = table.axes[0];
  for (const auto& [key, p] : table.entries) {
    const StateVector projected = project(state, subsystem, spec.alphabet[key[0]]);
    path.push_back(key[0]);
    enumerate_collapse(projected, subsystems, index + 1, path, prob * p, out);
    path.pop_back();
  }
}

}  // namespace

ProbabilityTable observer_exact_distribution(const ScheduledExperiment& sched,
                                             SemanticsMode mode,
                                             const std::string& observer) {
  const StateVector state = final_state(sched);
  const std::vector<std::string> own = observer_event_subsystems(sched, observer);

  ProbabilityTable table;
  for (const auto& name : own) table.axes.push_back(sched.space.at(name));

  if (mode == SemanticsMode::kConvivial) {
    // Private descent: the observer's chain conditions only on its own
    // previous outcomes; other observers never enter.
    std::map<std::string, std::string> assignment;
    LabelTuple path;
    enumerate_chain(state, own, 0, assignment, path, 1.0, table.entries);
  } else {
    // Shared collapsing state: walk every event in time order through
    // Born + projection, then marginalize onto this observer's outcomes.
    std::vector<std::string> all;
    std::vector<std::size_t> own_positions;
    for (const auto& ev : sched.events) {
      if (ev.observer == observer) own_positions.push_back(all.size());
      all.push_back(ev.subsystem);
    }
    std::map<LabelTuple, double> full;
    LabelTuple path;
    enumerate_collapse(state, all, 0, path, 1.0, full);
    for (const auto& [key, p] : full) {
      LabelTuple marginal_key(own_positions.size());
      for (std::size_t i = 0; i < own_positions.size(); ++i)
        marginal_key[i] = key[own_positions[i]];
      table.entries[marginal_key] += p;
    }
  }
  return table;
}

ProbabilityTable observer_empirical_distribution(const RecordSet& records,
                                                 const ScheduledExperiment& sched,
                                                 const std::string& observer) {
  const std::vector<std::string> own = observer_event_subsystems(sched, observer);
  ProbabilityTable table;
  for (const auto& name : own) table.axes.push_back(sched.space.at(name));

  const double weight = records.run_logs.empty()
                            ? 0.0
                            : 1.0 / static_cast<double>(records.run_logs.size());
  for (const auto& log : records.run_logs) {
    LabelTuple key;
    key.reserve(own.size());
    std::size_t axis = 0;
    for (const auto& entry : log) {
      if (entry.observer != observer || entry.entry.heard) continue;
      key.push_back(table.axes[axis].label_index(entry.entry.outcome));
      ++axis;
    }
    if (key.size() != own.size())
      fail("bad-config", "run log does not cover the observer's events");
    table.entries[key] += weight;
  }
  return table;
}

double tv_distance(const ProbabilityTable& p, const ProbabilityTable& q) {
  double acc = 0.0;
  for (const auto& [key, v] : p.entries) {
    auto it = q.entries.find(key);
    acc += std::abs(v - (it == q.entries.end() ? 0.0 : it->second));
  }
  for (const auto& [key, v] : q.entries) {
    if (!p.entries.count(key)) acc += v;
  }
  return 0.5 * acc;
}

bool within_binomial_4sigma(double observed_count, std::uint64_t n, double p) {
  const double nd = static_cast<double>(n);
  const double band = 4.0 * std::sqrt(nd * p * (1.0 - p));
  return std::abs(observed_count - nd * p) <= band;
}

double assignment_probability(const StateVector& s,
                              const std::map<std::string, std::string>& assignment) {
  std::vector<std::pair<std::size_t, std::uint32_t>> fixed;
  fixed.reserve(assignment.size());
  for (const auto& [name, label] : assignment) {
    const std::size_t pos = s.space().index_of(name);
    fixed.emplace_back(pos, s.space().subsystems()[pos].label_index(label));
  }
  double mass = 0.0;
  for (const auto& [key, amp] : s.terms()) {
    bool consistent = true;
    for (const auto& [pos, want] : fixed) {
      if (key[pos] != want) {
        consistent = false;
        break;
      }
    }
    if (consistent) mass += std::norm(amp);
  }
  return mass;
}

NoConflictResult run_no_conflict(const ExperimentConfig& config) {
  if (config.kind != ExperimentKind::kEpr)
    fail("bad-config", "the no-conflict experiment is defined on EPR runs");
  if (config.semantics != SemanticsMode::kConvivial)
    fail("bad-config", "the no-conflict experiment runs under Convivial semantics");

  const ScheduledExperiment sched = build(config);
  const StateVector state = final_state(sched);

  NoConflictResult result;
  result.runs = config.shots;
  for (std::uint64_t run = 0; run < config.shots; ++run) {
    EngineState engine(SemanticsMode::kConvivial, state,
                       RandomStream::substream(config.seed, run));
    for (const auto& ev : sched.events) engine.measure(ev);

    // Ask both ways about every pair. An answer conflicts when it leaves the
    // asker hung up to a branch the global state assigns zero probability.
    for (const auto& ev : sched.events) {
      const std::string asker = ev.observer == "alice" ? "bob" : "alice";
      engine.communicate(asker, ev.observer, ev);
      const auto& branch =
          engine.tree()[static_cast<std::size_t>(engine.observer(asker).hangup)];
      if (assignment_probability(state, branch.outcome_assignment) == 0.0)
        ++result.conflicts;
    }

    const Divergence div = engine.branch_divergence("alice", "bob");
    if (div != Divergence::kIncomparable) ++result.comparable;
    if (div == Divergence::kDifferent) ++result.divergent;
  }
  return result;
}

}  // namespace dcsim
