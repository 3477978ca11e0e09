#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcsim/optics.hpp"
#include "dcsim/statevec.hpp"

namespace dcsim {

enum class ExperimentKind { kDoubleSlit, kMachZehnder, kEpr, kQuantumEraser };
enum class SemanticsMode { kCollapse, kConvivial };

std::string to_string(ExperimentKind kind);
std::string to_string(SemanticsMode mode);

/// Declarative experiment description. Kind-specific toggles:
///   DoubleSlit    screen (screen vs which-path detectors), choice_time
///   MachZehnder   closed, choice_time (BS2 insertion tag)
///   QuantumEraser eraser_in, choice_time (eraser tag offset within a pair),
///                 pair_count
///   EPR           pair_count
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kEpr;
  Geometry geometry = Geometry::fringe_grid();
  BeamSplitterConvention convention = BeamSplitterConvention::symmetric();

  bool screen = true;
  bool closed = true;
  bool eraser_in = true;
  std::int64_t choice_time = -1;  // -1 resolves to the latest legal slot
  std::uint64_t pair_count = 1;

  SemanticsMode semantics = SemanticsMode::kCollapse;
  std::uint64_t shots = 1;
  std::uint64_t seed = 0;

  /// Legal choice_time range for this kind (inclusive); {0, 0} when the kind
  /// has no configuration choice.
  std::pair<std::int64_t, std::int64_t> choice_window() const;
  std::int64_t resolved_choice_time() const;
  void validate() const;  // "bad-config"
};

/// One measurement: an observer reads out one subsystem in its declared
/// alphabet (the preferred basis) at a logical time.
struct MeasurementEvent {
  std::string observer;
  std::string subsystem;
  std::vector<std::string> basis;
  std::int64_t time_tag = 0;
};

/// A compiled experiment: time-tagged optical elements, ordered measurement
/// events, the source state they act on, and the final composite space the
/// events address. Time is logical; "delayed choice" is nothing more than a
/// configuration tag placed after a measurement tag.
struct ScheduledExperiment {
  std::vector<std::pair<std::int64_t, ElementPtr>> schedule;  // tag-sorted
  std::vector<MeasurementEvent> events;                       // tag-sorted
  StateVector source;
  CompositeSpace space;  // space after all elements
  /// Per-pair analysis axes: (bin, det) for the eraser, (A, B) for EPR,
  /// one entry per pair; empty for the one-particle experiments.
  std::vector<std::pair<std::string, std::string>> pair_axes;
};

/// Compile a config into a schedule. Element tags and event tags share one
/// timeline; the eraser toggle default sits after the D0 event tag, which is
/// the delayed-choice arrangement.
ScheduledExperiment build(const ExperimentConfig& config);

/// Apply schedule elements to the source in time order. The result is
/// normalized and depends only on the set of elements present, never on
/// where their tags fall relative to event tags.
StateVector final_state(const ScheduledExperiment& sched);

}  // namespace dcsim
