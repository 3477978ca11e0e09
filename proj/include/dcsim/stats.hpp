#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dcsim/experiments.hpp"
#include "dcsim/semantics.hpp"
#include "dcsim/statevec.hpp"

namespace dcsim {

enum class TableKind { kExact, kEmpirical };

/// Joint distribution over two subsystems. Exact tables hold probabilities
/// summing to 1; empirical tables hold counts summing to the number of
/// contributing records.
struct JointTable {
  std::vector<SubsystemSpec> axes;  // two axes, (a, b)
  std::map<LabelTuple, double> entries;
  TableKind kind = TableKind::kExact;
  std::uint64_t shots = 0;  // empirical only

  double at(const std::vector<std::string>& labels) const;
  double total() const;
  /// Entries divided by total (counts to relative frequencies; identity for
  /// exact tables up to normalization).
  JointTable as_probabilities() const;
};

/// Per-bin histogram over one subsystem axis (counts or probabilities, one
/// slot per alphabet label).
struct Histogram {
  SubsystemSpec axis;
  std::vector<double> values;

  double total() const;
};

/// Outcomes of one pair (or one run, for the single-particle experiments).
struct PairRecord {
  std::uint64_t pair_id = 0;
  std::uint64_t run_index = 0;
  std::map<std::string, std::string> outcomes;  // subsystem -> outcome label
};

struct RunLogEntry {
  std::string observer;
  LogEntry entry;

  bool operator==(const RunLogEntry&) const = default;
};

/// Results of a Monte Carlo batch. Pairing is by pair id, the simulation
/// analogue of constant-delay coincidence matching.
struct RecordSet {
  ExperimentKind kind = ExperimentKind::kEpr;
  SemanticsMode mode = SemanticsMode::kCollapse;
  std::uint64_t seed = 0;
  std::uint64_t shots = 0;
  std::uint64_t pair_count = 1;
  std::vector<std::pair<std::string, std::string>> pair_axes;
  std::vector<SubsystemSpec> axis_specs;  // specs of (axis_a, axis_b) of pair 0
  std::vector<PairRecord> records;        // shots * pair_count entries
  std::vector<std::vector<RunLogEntry>> run_logs;  // per run, in measurement order

  bool operator==(const RecordSet&) const;
};

/// Fitted fringe model baseline * (1 + visibility * cos(k d sin(theta) + phase)).
struct FringeFit {
  double visibility = 0.0;  // in [0, 1]
  double phase = 0.0;       // in (-pi, pi]
  double baseline = 0.0;    // probability per bin
  double residual = 0.0;    // rms misfit after normalization
};

/// Exact joint Born distribution of the compiled experiment over two
/// subsystems; independent of event ordering.
JointTable exact_joint(const ScheduledExperiment& sched, const std::string& axis_a,
                       const std::string& axis_b);

/// Empirical joint over two subsystems, accumulated from the per-pair records.
JointTable empirical_joint(const RecordSet& records, const std::string& axis_a,
                           const std::string& axis_b);

/// Run `config.shots` independent runs through the configured semantics
/// engine. Runs use RandomStream substreams of (seed, run index), so results
/// are deterministic and independent of any execution interleaving.
RecordSet run_trials(const ExperimentConfig& config);

/// D0-bin histogram restricted to pairs whose idler landed on `detector`
/// ("unknown-label" for a detector outside the axis alphabet). An empty
/// selection yields an all-zero histogram.
Histogram coincidence_histogram(const RecordSet& records, const std::string& detector);

/// Exact conditional bin histogram P(bin | detector) from an exact
/// (bin x detector) joint table.
Histogram conditional_bin_histogram(const JointTable& joint, const std::string& detector);

/// Least-squares fringe fit on regressors (1, cos, sin) of the bin phase
/// k d sin(theta). Requires >= 3 nonempty bins spanning at least one fringe
/// period ("underdetermined-fit"). Exactly flat input fits visibility 0.
FringeFit fringe_fit(const Histogram& hist, const Geometry& g);

/// Max entry-wise difference between the exact joint computed by measuring
/// (a then b) and (b then a) through sequential Born/projection steps. Events
/// must address disjoint subsystems ("non-commuting").
double check_order_independence(const ScheduledExperiment& sched,
                                const MeasurementEvent& ev_a, const MeasurementEvent& ev_b);

/// Max deviation of the per-bin detector-summed marginal from uniform 1/B on
/// an exact (bin x detector) table.
double check_marginal_flatness(const JointTable& joint);

/// Max pairwise deviation between exact final event distributions as the
/// configuration choice tag sweeps `times` ("bad-config" for an illegal tag).
double check_delayed_invariance(const ExperimentConfig& config,
                                const std::vector<std::int64_t>& times);

/// Exact distribution of one observer's measurement log under the given
/// semantics, computed by enumerating the engine's own conditional chain:
/// Collapse enumerates all events in time order and marginalizes; Convivial
/// enumerates the observer's private descent.
ProbabilityTable observer_exact_distribution(const ScheduledExperiment& sched,
                                             SemanticsMode mode,
                                             const std::string& observer);

/// Empirical distribution of one observer's measured outcomes from a batch.
ProbabilityTable observer_empirical_distribution(const RecordSet& records,
                                                 const ScheduledExperiment& sched,
                                                 const std::string& observer);

/// Total variation distance between two tables over the same axes.
double tv_distance(const ProbabilityTable& p, const ProbabilityTable& q);

/// 4-sigma binomial band: |observed/n - p| <= 4 sqrt(p (1-p) / n).
bool within_binomial_4sigma(double observed_count, std::uint64_t n, double p);

/// EPR no-conflict experiment: per run, both observers measure their own
/// particle, then each asks the other. Conflicts count answers that leave the
/// asker's branch with zero global Born probability (they never happen; see
/// the acceptance suite). Also tallies branch divergence between the two
/// observers' private hang-ups.
struct NoConflictResult {
  std::uint64_t runs = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t divergent = 0;     // branch_divergence == different
  std::uint64_t comparable = 0;    // runs with any common resolved subsystem
};

NoConflictResult run_no_conflict(const ExperimentConfig& config);

/// Probability that the global state assigns to a partial outcome assignment.
double assignment_probability(const StateVector& s,
                              const std::map<std::string, std::string>& assignment);

}  // namespace dcsim
