#include "dcsim/statevec.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace dcsim {

SubsystemSpec::SubsystemSpec(std::string name_, std::vector<std::string> alphabet_)
    : name(std::move(name_)), alphabet(std::move(alphabet_)) {
  if (name.empty()) fail("bad-config", "subsystem name must be non-empty");
  if (alphabet.empty()) fail("bad-config", "alphabet of '" + name + "' is empty");
  std::set<std::string> seen;
  for (const auto& label : alphabet) {
    if (!seen.insert(label).second)
      fail("bad-config", "duplicate label '" + label + "' in subsystem '" + name + "'");
  }
}

bool SubsystemSpec::has_label(const std::string& label) const {
  return std::find(alphabet.begin(), alphabet.end(), label) != alphabet.end();
}

std::uint32_t SubsystemSpec::label_index(const std::string& label) const {
  auto it = std::find(alphabet.begin(), alphabet.end(), label);
  if (it == alphabet.end())
    fail("unknown-label", "label '" + label + "' not in subsystem '" + name + "'");
  return static_cast<std::uint32_t>(it - alphabet.begin());
}

CompositeSpace::CompositeSpace(std::vector<SubsystemSpec> subsystems)
    : subsystems_(std::move(subsystems)) {
  std::set<std::string> seen;
  for (const auto& sub : subsystems_) {
    if (!seen.insert(sub.name).second)
      fail("subsystem-collision", "duplicate subsystem name '" + sub.name + "'");
  }
}

bool CompositeSpace::has(const std::string& name) const {
  for (const auto& sub : subsystems_)
    if (sub.name == name) return true;
  return false;
}

std::size_t CompositeSpace::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < subsystems_.size(); ++i)
    if (subsystems_[i].name == name) return i;
  fail("unknown-subsystem", "no subsystem named '" + name + "'");
}

const SubsystemSpec& CompositeSpace::at(const std::string& name) const {
  return subsystems_[index_of(name)];
}

bool CompositeSpace::operator==(const CompositeSpace& other) const {
  if (subsystems_.size() != other.subsystems_.size()) return false;
  for (std::size_t i = 0; i < subsystems_.size(); ++i) {
    if (subsystems_[i].name != other.subsystems_[i].name) return false;
    if (subsystems_[i].alphabet != other.subsystems_[i].alphabet) return false;
  }
  return true;
}

StateVector::StateVector(CompositeSpace space) : space_(std::move(space)) {}

LabelTuple StateVector::key_of(const std::vector<std::string>& labels) const {
  if (labels.size() != space_.arity())
    fail("wrong-space", "label tuple arity " + std::to_string(labels.size()) +
                            " does not match space arity " + std::to_string(space_.arity()));
  LabelTuple key(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    key[i] = space_.subsystems()[i].label_index(labels[i]);
  return key;
}

void StateVector::set(const std::vector<std::string>& labels, Amplitude amp) {
  set_indices(key_of(labels), amp);
}

void StateVector::set_indices(LabelTuple key, Amplitude amp) {
  if (key.size() != space_.arity()) fail("wrong-space", "label tuple arity mismatch");
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (key[i] >= space_.subsystems()[i].size())
      fail("unknown-label", "label index out of range in subsystem '" +
                                space_.subsystems()[i].name + "'");
  }
  if (amp == Amplitude{0.0, 0.0}) {
    terms_.erase(key);
  } else {
    terms_[std::move(key)] = amp;
  }
}

Amplitude StateVector::at(const std::vector<std::string>& labels) const {
  return at_indices(key_of(labels));
}

Amplitude StateVector::at_indices(const LabelTuple& key) const {
  auto it = terms_.find(key);
  return it == terms_.end() ? Amplitude{0.0, 0.0} : it->second;
}

double StateVector::norm_squared() const {
  double total = 0.0;
  for (const auto& [key, amp] : terms_) total += std::norm(amp);
  return total;
}

double StateVector::norm() const { return std::sqrt(norm_squared()); }

bool StateVector::is_normalized(double tol) const {
  return std::abs(norm() - 1.0) <= tol;
}

void StateVector::prune(double threshold) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) <= threshold)
      it = terms_.erase(it);
    else
      ++it;
  }
}

std::vector<std::string> StateVector::labels_of(const LabelTuple& key) const {
  std::vector<std::string> labels(key.size());
  for (std::size_t i = 0; i < key.size(); ++i)
    labels[i] = space_.subsystems()[i].alphabet[key[i]];
  return labels;
}

std::vector<std::string> ProbabilityTable::selection() const {
  std::vector<std::string> names;
  names.reserve(axes.size());
  for (const auto& axis : axes) names.push_back(axis.name);
  return names;
}

double ProbabilityTable::at(const std::vector<std::string>& labels) const {
  if (labels.size() != axes.size())
    fail("wrong-space", "expected " + std::to_string(axes.size()) + " labels");
  LabelTuple key(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    key[i] = axes[i].label_index(labels[i]);
  auto it = entries.find(key);
  return it == entries.end() ? 0.0 : it->second;
}

std::vector<std::string> ProbabilityTable::labels_of(const LabelTuple& key) const {
  std::vector<std::string> labels(key.size());
  for (std::size_t i = 0; i < key.size(); ++i) labels[i] = axes[i].alphabet[key[i]];
  return labels;
}

double ProbabilityTable::sum() const {
  double total = 0.0;
  for (const auto& [key, p] : entries) total += p;
  return total;
}

double ProbabilityTable::max_deviation(const ProbabilityTable& other) const {
  if (axes.size() != other.axes.size())
    fail("wrong-space", "probability tables have different selections");
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (axes[i].name != other.axes[i].name || axes[i].alphabet != other.axes[i].alphabet)
      fail("wrong-space", "probability tables have different selections");
  }
  double dev = 0.0;
  for (const auto& [key, p] : entries) {
    auto it = other.entries.find(key);
    const double q = it == other.entries.end() ? 0.0 : it->second;
    dev = std::max(dev, std::abs(p - q));
  }
  for (const auto& [key, q] : other.entries) {
    if (!entries.count(key)) dev = std::max(dev, q);
  }
  return dev;
}

StateVector normalize(const StateVector& s) {
  const double n = s.norm();
  if (n == 0.0) fail("empty-state", "cannot normalize a zero state");
  StateVector out(s.space());
  for (const auto& [key, amp] : s.terms()) out.set_indices(key, amp / n);
  return out;
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  std::vector<SubsystemSpec> subs = a.space().subsystems();
  for (const auto& sub : b.space().subsystems()) {
    if (a.space().has(sub.name))
      fail("subsystem-collision",
           "subsystem '" + sub.name + "' present on both sides of tensor");
    subs.push_back(sub);
  }
  StateVector out{CompositeSpace(std::move(subs))};
  for (const auto& [ka, va] : a.terms()) {
    for (const auto& [kb, vb] : b.terms()) {
      LabelTuple key = ka;
      key.insert(key.end(), kb.begin(), kb.end());
      out.set_indices(std::move(key), va * vb);
    }
  }
  out.prune();
  return out;
}

Amplitude overlap(const StateVector& a, const StateVector& b) {
  if (!(a.space() == b.space()))
    fail("wrong-space", "overlap requires identical spaces");
  Amplitude acc{0.0, 0.0};
  for (const auto& [key, va] : a.terms()) {
    auto it = b.terms().find(key);
    if (it != b.terms().end()) acc += std::conj(va) * it->second;
  }
  return acc;
}

namespace {

std::vector<std::size_t> selection_positions(const CompositeSpace& space,
                                             const std::vector<std::string>& selection) {
  if (selection.empty()) fail("bad-config", "selection must be non-empty");
  std::vector<std::size_t> positions;
  positions.reserve(selection.size());
  std::set<std::string> seen;
  for (const auto& name : selection) {
    if (!seen.insert(name).second)
      fail("bad-config", "subsystem '" + name + "' selected twice");
    positions.push_back(space.index_of(name));
  }
  return positions;
}

}  // namespace

ProbabilityTable born_distribution(const StateVector& s,
                                   const std::vector<std::string>& selection) {
  const auto positions = selection_positions(s.space(), selection);
  if (!s.is_normalized())
    fail("not-normalized",
         "born_distribution requires a normalized state (|norm-1| <= 1e-12)");

  std::map<LabelTuple, double> raw;
  double total = 0.0;
  for (const auto& [key, amp] : s.terms()) {
    LabelTuple partial(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) partial[i] = key[positions[i]];
    const double w = std::norm(amp);
    raw[partial] += w;
    total += w;
  }

  ProbabilityTable table;
  for (std::size_t pos : positions) table.axes.push_back(s.space().subsystems()[pos]);
  // Entries are normalized by the total weight so equal-weight outcomes come
  // out bit-exact (e.g. 0.5 rather than 0.5 +/- 1 ulp).
  for (const auto& [key, w] : raw) {
    if (w > 0.0) table.entries[key] = w / total;
  }
  return table;
}

ProbabilityTable conditional_born(const StateVector& s,
                                  const std::map<std::string, std::string>& given,
                                  const std::string& subsystem) {
  if (!s.is_normalized())
    fail("not-normalized", "conditional_born requires a normalized state");
  const std::size_t target = s.space().index_of(subsystem);
  std::vector<std::pair<std::size_t, std::uint32_t>> fixed;
  fixed.reserve(given.size());
  for (const auto& [name, label] : given) {
    const std::size_t pos = s.space().index_of(name);
    if (pos == target)
      fail("bad-config", "conditioning on the measured subsystem '" + name + "'");
    fixed.emplace_back(pos, s.space().subsystems()[pos].label_index(label));
  }

  std::map<LabelTuple, double> raw;
  double total = 0.0;
  for (const auto& [key, amp] : s.terms()) {
    bool consistent = true;
    for (const auto& [pos, want] : fixed) {
      if (key[pos] != want) {
        consistent = false;
        break;
      }
    }
    if (!consistent) continue;
    const double w = std::norm(amp);
    raw[LabelTuple{key[target]}] += w;
    total += w;
  }
  if (total == 0.0)
    fail("impossible-outcome", "conditioning assignment has zero probability");

  ProbabilityTable table;
  table.axes.push_back(s.space().subsystems()[target]);
  for (const auto& [key, w] : raw) {
    if (w > 0.0) table.entries[key] = w / total;
  }
  return table;
}

StateVector project(const StateVector& s, const std::string& subsystem,
                    const std::string& outcome) {
  const std::size_t pos = s.space().index_of(subsystem);
  const std::uint32_t want = s.space().subsystems()[pos].label_index(outcome);
  if (!s.is_normalized())
    fail("not-normalized", "project requires a normalized state");

  StateVector kept(s.space());
  double mass = 0.0;
  for (const auto& [key, amp] : s.terms()) {
    if (key[pos] != want) continue;
    kept.set_indices(key, amp);
    mass += std::norm(amp);
  }
  if (mass == 0.0)
    fail("impossible-outcome", "outcome '" + outcome + "' of subsystem '" +
                                   subsystem + "' has zero probability");
  const double scale = 1.0 / std::sqrt(mass);
  StateVector out(s.space());
  for (const auto& [key, amp] : kept.terms()) out.set_indices(key, amp * scale);
  return out;
}

}  // namespace dcsim
