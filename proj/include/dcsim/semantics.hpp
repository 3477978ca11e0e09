#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dcsim/experiments.hpp"
#include "dcsim/rng.hpp"
#include "dcsim/statevec.hpp"

namespace dcsim {

/// One node of the branch tree: the outcomes resolved along the path from the
/// root, and the Born weight of this node given its parent. Children are
/// materialized lazily, per measured subsystem.
struct BranchNode {
  std::int64_t id = 0;
  std::optional<std::int64_t> parent;
  std::map<std::string, std::string> outcome_assignment;
  double conditional_weight = 1.0;
  std::map<std::string, std::vector<std::int64_t>> children;
};

/// An entry of an observer's perceived record: either a measurement the
/// observer made, or an answer heard from another observer.
struct LogEntry {
  std::string subsystem;
  std::string outcome;
  bool heard = false;
  std::string heard_from;  // askee id when heard

  bool operator==(const LogEntry&) const = default;
};

/// An observer: where its consciousness is hung up in the branch tree
/// (Convivial mode) and the ordered log of everything it perceived.
struct ObserverState {
  std::string id;
  std::int64_t hangup = 0;  // root
  std::vector<LogEntry> perceived_log;
};

enum class Divergence { kSame, kDifferent, kIncomparable };

std::string to_string(Divergence d);

/// Measurement engine with two interchangeable semantics.
///
/// Collapse: a measurement samples the Born distribution of the global state
/// and projects it. Every observer shares the one collapsing state.
///
/// Convivial: the global state is never modified. Each observer owns a
/// hang-up pointer into a shared branch tree; a measurement expands the
/// children of the observer's node for the measured subsystem, samples one
/// child with Born weights conditioned on everything the observer has already
/// resolved, and moves the pointer down. Observers descend independently:
/// they share the tree structure, never their random choices.
///
/// One engine instance evolves in one logical thread; independent runs use
/// independent engines (and RandomStream substreams).
class EngineState {
public:
  EngineState(SemanticsMode mode, StateVector global, RandomStream rng);

  SemanticsMode mode() const { return mode_; }
  /// In Convivial mode this is the unitary-evolution result for the whole
  /// run, byte-identical no matter how many measurements happened.
  const StateVector& global_state() const { return global_; }
  const std::vector<BranchNode>& tree() const { return nodes_; }

  /// Resolve one measurement event for its observer; returns the outcome
  /// label. Re-measuring a subsystem the same observer already resolved is
  /// an error ("already-resolved").
  std::string measure(const MeasurementEvent& ev);

  /// `asker` asks `askee` what it saw for `about`. Communication is itself a
  /// measurement made by the asker on the askee's record, so the answer is
  /// whatever the asker's own branch assigns to that record — never a value
  /// in conflict with the asker's prior outcomes. The askee's hang-up is not
  /// touched. Asking again returns the same value ("no-record" when the
  /// askee never observed `about`).
  std::string communicate(const std::string& asker, const std::string& askee,
                          const MeasurementEvent& about);

  /// Simulator-level diagnostic, invisible to in-model observers: compare two
  /// observers' branch assignments on their common resolved subsystems.
  /// Convivial mode only ("not-applicable" under Collapse).
  Divergence branch_divergence(const std::string& a, const std::string& b) const;

  /// The observer's perceived log, in perception order ("unknown-observer").
  const std::vector<LogEntry>& observer_record(const std::string& observer) const;

  /// Observers materialize on first use; this lists the ones seen so far.
  std::vector<std::string> observer_ids() const;
  const ObserverState& observer(const std::string& id) const;

private:
  ObserverState& observer_mut(const std::string& id);
  const std::map<std::string, std::string>& assignment_of(const ObserverState& o) const;
  /// Convivial descent of `o` on `subsystem`; returns the outcome label.
  std::string descend(ObserverState& o, const std::string& subsystem);

  SemanticsMode mode_;
  StateVector global_;
  RandomStream rng_;
  std::vector<BranchNode> nodes_;  // arena; nodes_[0] is the root (Convivial)
  std::map<std::string, ObserverState> observers_;
  // Collapse mode: outcomes recorded against the single collapsing state.
  std::map<std::string, std::string> collapse_outcomes_;
};

}  // namespace dcsim
