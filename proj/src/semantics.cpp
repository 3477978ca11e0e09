#include "dcsim/semantics.hpp"

#include <algorithm>

namespace dcsim {

namespace {

/// Weights over the full declared alphabet of `subsystem` (zero for outcomes
/// the table omits), so sampling follows declared alphabet order.
std::vector<double> alphabet_weights(const ProbabilityTable& table) {
  const SubsystemSpec& spec = table.axes.front();
  std::vector<double> weights(spec.size(), 0.0);
  for (const auto& [key, p] : table.entries) weights[key.front()] = p;
  return weights;
}

}  // namespace

std::string to_string(Divergence d) {
  switch (d) {
    case Divergence::kSame: return "same";
    case Divergence::kDifferent: return "different";
    case Divergence::kIncomparable: return "incomparable";
  }
  return "?";
}

EngineState::EngineState(SemanticsMode mode, StateVector global, RandomStream rng)
    : mode_(mode), global_(std::move(global)), rng_(rng) {
  if (!global_.is_normalized())
    fail("not-normalized", "engine requires a normalized global state");
  if (mode_ == SemanticsMode::kConvivial) {
    nodes_.push_back(BranchNode{.id = 0,
                                .parent = std::nullopt,
                                .outcome_assignment = {},
                                .conditional_weight = 1.0,
                                .children = {}});
  }
}

ObserverState& EngineState::observer_mut(const std::string& id) {
  auto it = observers_.find(id);
  if (it == observers_.end()) {
    it = observers_.emplace(id, ObserverState{.id = id, .hangup = 0, .perceived_log = {}})
             .first;
  }
  return it->second;
}

const ObserverState& EngineState::observer(const std::string& id) const {
  auto it = observers_.find(id);
  if (it == observers_.end()) fail("unknown-observer", "no observer '" + id + "'");
  return it->second;
}

std::vector<std::string> EngineState::observer_ids() const {
  std::vector<std::string> ids;
  ids.reserve(observers_.size());
  for (const auto& [id, o] : observers_) ids.push_back(id);
  return ids;
}

const std::map<std::string, std::string>& EngineState::assignment_of(
    const ObserverState& o) const {
  return nodes_[static_cast<std::size_t>(o.hangup)].outcome_assignment;
}

std::string EngineState::descend(ObserverState& o, const std::string& subsystem) {
  const std::size_t node_index = static_cast<std::size_t>(o.hangup);
  {
    const auto& assignment = nodes_[node_index].outcome_assignment;
    auto it = assignment.find(subsystem);
    if (it != assignment.end()) return it->second;  // fixed by this branch already
  }

  if (!nodes_[node_index].children.count(subsystem)) {
    // Materialize the daughters of this branch for `subsystem`: Born weights
    // conditioned on everything resolved along the path.
    const ProbabilityTable table =
        conditional_born(global_, nodes_[node_index].outcome_assignment, subsystem);
    const SubsystemSpec& spec = table.axes.front();
    std::vector<std::int64_t> child_ids;
    for (std::uint32_t i = 0; i < spec.size(); ++i) {
      auto it = table.entries.find(LabelTuple{i});
      if (it == table.entries.end()) continue;  // zero-probability daughters are never hung up to
      BranchNode child;
      child.id = static_cast<std::int64_t>(nodes_.size());
      child.parent = nodes_[node_index].id;
      child.outcome_assignment = nodes_[node_index].outcome_assignment;
      child.outcome_assignment[subsystem] = spec.alphabet[i];
      child.conditional_weight = it->second;
      child_ids.push_back(child.id);
      nodes_.push_back(std::move(child));
    }
    nodes_[node_index].children[subsystem] = std::move(child_ids);
  }

  const std::vector<std::int64_t>& children = nodes_[node_index].children.at(subsystem);
  const SubsystemSpec& spec = global_.space().at(subsystem);
  std::vector<double> weights(spec.size(), 0.0);
  for (std::int64_t id : children) {
    const BranchNode& child = nodes_[static_cast<std::size_t>(id)];
    weights[spec.label_index(child.outcome_assignment.at(subsystem))] =
        child.conditional_weight;
  }
  const std::size_t pick = rng_.sample_index(weights);
  for (std::int64_t id : children) {
    const BranchNode& child = nodes_[static_cast<std::size_t>(id)];
    if (child.outcome_assignment.at(subsystem) == spec.alphabet[pick]) {
      o.hangup = id;
      return child.outcome_assignment.at(subsystem);
    }
  }
  fail("impossible-outcome", "sampled a branch that was never materialized");
}

std::string EngineState::measure(const MeasurementEvent& ev) {
  if (!ev.basis.empty() && global_.space().at(ev.subsystem).alphabet != ev.basis)
    fail("bad-config", "event basis does not match the declared alphabet of '" +
                           ev.subsystem + "'");
  ObserverState& o = observer_mut(ev.observer);
  for (const auto& entry : o.perceived_log) {
    if (!entry.heard && entry.subsystem == ev.subsystem)
      fail("already-resolved", "observer '" + ev.observer + "' already measured '" +
                                   ev.subsystem + "'");
  }

  std::string outcome;
  if (mode_ == SemanticsMode::kCollapse) {
    const ProbabilityTable table = born_distribution(global_, {ev.subsystem});
    const std::vector<double> weights = alphabet_weights(table);
    const std::size_t pick = rng_.sample_index(weights);
    outcome = global_.space().at(ev.subsystem).alphabet[pick];
    global_ = project(global_, ev.subsystem, outcome);
  } else {
    outcome = descend(o, ev.subsystem);
  }
  o.perceived_log.push_back(LogEntry{ev.subsystem, outcome, false, ""});
  return outcome;
}

std::string EngineState::communicate(const std::string& asker, const std::string& askee,
                                     const MeasurementEvent& about) {
  auto askee_it = observers_.find(askee);
  if (askee_it == observers_.end())
    fail("no-record", "observer '" + askee + "' has observed nothing");
  const auto& askee_log = askee_it->second.perceived_log;
  auto record = std::find_if(askee_log.begin(), askee_log.end(), [&](const LogEntry& e) {
    return e.subsystem == about.subsystem;
  });
  if (record == askee_log.end())
    fail("no-record",
         "observer '" + askee + "' has no record of '" + about.subsystem + "'");

  ObserverState& o = observer_mut(asker);
  std::string heard;
  if (mode_ == SemanticsMode::kCollapse) {
    // One shared history: the record subsystem is in a definite state and the
    // asker's measurement of it reads that value out.
    heard = record->outcome;
  } else {
    // Asking is a measurement by the asker on the askee's record, which is
    // perfectly correlated with the measured subsystem; the asker's branch
    // fixes (or now resolves) its value. The askee's hang-up never moves.
    heard = descend(o, about.subsystem);
  }

  const bool already_logged =
      std::any_of(o.perceived_log.begin(), o.perceived_log.end(), [&](const LogEntry& e) {
        return e.heard && e.subsystem == about.subsystem && e.heard_from == askee;
      });
  if (!already_logged)
    o.perceived_log.push_back(LogEntry{about.subsystem, heard, true, askee});
  return heard;
}

Divergence EngineState::branch_divergence(const std::string& a, const std::string& b) const {
  if (mode_ != SemanticsMode::kConvivial)
    fail("not-applicable", "branch_divergence is defined for Convivial mode only");
  if (a == b) return Divergence::kSame;
  const auto& assign_a = assignment_of(observer(a));
  const auto& assign_b = assignment_of(observer(b));

  bool any_common = false;
  for (const auto& [subsystem, outcome] : assign_a) {
    auto it = assign_b.find(subsystem);
    if (it == assign_b.end()) continue;
    any_common = true;
    if (it->second != outcome) return Divergence::kDifferent;
  }
  return any_common ? Divergence::kSame : Divergence::kIncomparable;
}

const std::vector<LogEntry>& EngineState::observer_record(const std::string& observer_id) const {
  return observer(observer_id).perceived_log;
}

}  // namespace dcsim
