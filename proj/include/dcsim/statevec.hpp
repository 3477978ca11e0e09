#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dcsim/error.hpp"

namespace dcsim {

using Amplitude = std::complex<double>;

/// Magnitudes at or below this threshold are dropped when a state is rebuilt
/// (optical element application, tensor, projection). Destructive
/// interference then yields an exact zero term count, not a 1e-32 residue.
inline constexpr double kAmplitudePrune = 1e-15;

/// Tolerance on |norm - 1| accepted by operations that require a normalized
/// input. States outside it are rejected, never silently renormalized.
inline constexpr double kNormTolerance = 1e-12;

/// One named degree of freedom with an ordered, finite outcome alphabet,
/// e.g. path in {U, L}, detector in {D1..D4}, spin in {+, -}, bin in {0..B-1}.
struct SubsystemSpec {
  std::string name;
  std::vector<std::string> alphabet;

  SubsystemSpec(std::string name_, std::vector<std::string> alphabet_);

  std::size_t size() const { return alphabet.size(); }
  bool has_label(const std::string& label) const;
  /// Index of `label` in the declared alphabet order; "unknown-label" if absent.
  std::uint32_t label_index(const std::string& label) const;
};

/// Ordered list of subsystems; the basis is the Cartesian product of their
/// alphabets, in declaration order. A space with no subsystems is the scalar
/// space (single empty basis tuple).
class CompositeSpace {
public:
  CompositeSpace() = default;
  explicit CompositeSpace(std::vector<SubsystemSpec> subsystems);

  const std::vector<SubsystemSpec>& subsystems() const { return subsystems_; }
  std::size_t arity() const { return subsystems_.size(); }
  bool has(const std::string& name) const;
  /// Position of subsystem `name`; "unknown-subsystem" if absent.
  std::size_t index_of(const std::string& name) const;
  const SubsystemSpec& at(const std::string& name) const;

  bool operator==(const CompositeSpace& other) const;

private:
  std::vector<SubsystemSpec> subsystems_;
};

/// Basis label tuple: one alphabet index per subsystem, in space order.
using LabelTuple = std::vector<std::uint32_t>;

/// Sparse state: map from basis label tuple to complex amplitude. Only
/// nonzero terms are stored. Operations are pure functions returning new
/// values; instances are safe to share across threads once built.
class StateVector {
public:
  explicit StateVector(CompositeSpace space);

  const CompositeSpace& space() const { return space_; }
  const std::map<LabelTuple, Amplitude>& terms() const { return terms_; }

  /// Set the amplitude of the basis state addressed by label strings
  /// (one per subsystem, in space order). An exactly zero amplitude erases.
  void set(const std::vector<std::string>& labels, Amplitude amp);
  void set_indices(LabelTuple key, Amplitude amp);

  /// Amplitude at a basis label, 0 when the term is absent.
  Amplitude at(const std::vector<std::string>& labels) const;
  Amplitude at_indices(const LabelTuple& key) const;

  double norm_squared() const;
  double norm() const;
  bool is_normalized(double tol = kNormTolerance) const;

  /// Drop all terms with |amp| <= threshold.
  void prune(double threshold = kAmplitudePrune);

  /// Label strings for a stored tuple, in space order.
  std::vector<std::string> labels_of(const LabelTuple& key) const;
  LabelTuple key_of(const std::vector<std::string>& labels) const;

private:
  CompositeSpace space_;
  std::map<LabelTuple, Amplitude> terms_;
};

/// Born probabilities over a selected subset of subsystems. Entries are keyed
/// by partial label tuples in selection order (indices into each axis
/// alphabet, so iteration follows declared alphabet order, which the
/// samplers rely on). Zero-probability outcomes are not stored and read back
/// as 0.
struct ProbabilityTable {
  std::vector<SubsystemSpec> axes;
  std::map<LabelTuple, double> entries;

  std::vector<std::string> selection() const;
  double at(const std::vector<std::string>& labels) const;
  std::vector<std::string> labels_of(const LabelTuple& key) const;
  /// Max |p_this - p_other| over the union of outcomes. Requires equal
  /// selections ("wrong-space" otherwise).
  double max_deviation(const ProbabilityTable& other) const;
  double sum() const;
};

/// Scale to unit norm. Term ratios are preserved; the zero state is rejected
/// ("empty-state").
StateVector normalize(const StateVector& s);

/// Tensor product: spaces concatenate, amplitudes multiply. Subsystem names
/// must be disjoint ("subsystem-collision").
StateVector tensor(const StateVector& a, const StateVector& b);

/// Inner product <a|b> of two states over the same space ("wrong-space").
Amplitude overlap(const StateVector& a, const StateVector& b);

/// Born distribution of a normalized state marginalized to `selection`
/// (non-empty, subset of the space; "unknown-subsystem" otherwise;
/// "not-normalized" when the input norm is off by more than kNormTolerance).
ProbabilityTable born_distribution(const StateVector& s,
                                   const std::vector<std::string>& selection);

/// Born weights of `subsystem` conditioned on a partial assignment of other
/// subsystems, without building intermediate projected states. This is the
/// conditional the measurement engines sample from; an empty assignment gives
/// the plain marginal.
ProbabilityTable conditional_born(const StateVector& s,
                                  const std::map<std::string, std::string>& given,
                                  const std::string& subsystem);

/// Post-measurement state: terms inconsistent with (subsystem = outcome)
/// removed, result renormalized. Zero-probability outcomes are rejected
/// ("impossible-outcome").
StateVector project(const StateVector& s, const std::string& subsystem,
                    const std::string& outcome);

}  // namespace dcsim
