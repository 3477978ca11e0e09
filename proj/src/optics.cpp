#include "dcsim/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace dcsim {

namespace {

constexpr double kPi = std::numbers::pi;

const std::vector<std::string> kPathLabels = {"U", "L"};

std::vector<std::string> bin_labels(std::size_t bins) {
  std::vector<std::string> labels(bins);
  for (std::size_t b = 0; b < bins; ++b) labels[b] = std::to_string(b);
  return labels;
}

/// Image of one input label under a replacement map: the label tuple that is
/// inserted in place of the old label, with its amplitude factor.
using ColumnTerm = std::pair<LabelTuple, Amplitude>;

/// Applies a linear map that replaces the subsystem at `pos` by `new_specs`.
/// `columns[i]` lists the images of old label index i. Cancelled terms are
/// pruned so destructive interference leaves no residue.
StateVector apply_replacement(const StateVector& s, std::size_t pos,
                              std::vector<SubsystemSpec> new_specs,
                              const std::vector<std::vector<ColumnTerm>>& columns) {
  std::vector<SubsystemSpec> specs;
  const auto& old_specs = s.space().subsystems();
  specs.reserve(old_specs.size() - 1 + new_specs.size());
  for (std::size_t i = 0; i < pos; ++i) specs.push_back(old_specs[i]);
  for (auto& spec : new_specs) specs.push_back(std::move(spec));
  for (std::size_t i = pos + 1; i < old_specs.size(); ++i) specs.push_back(old_specs[i]);
  const std::size_t inserted = specs.size() - (old_specs.size() - 1);

  std::map<LabelTuple, Amplitude> acc;
  for (const auto& [key, amp] : s.terms()) {
    for (const auto& [image, factor] : columns[key[pos]]) {
      LabelTuple out;
      out.reserve(key.size() - 1 + inserted);
      out.insert(out.end(), key.begin(), key.begin() + static_cast<long>(pos));
      out.insert(out.end(), image.begin(), image.end());
      out.insert(out.end(), key.begin() + static_cast<long>(pos) + 1, key.end());
      acc[out] += amp * factor;
    }
  }

  StateVector result{CompositeSpace(std::move(specs))};
  for (auto& [key, amp] : acc) {
    if (std::abs(amp) > kAmplitudePrune) result.set_indices(key, amp);
  }
  return result;
}

void require_subsystem(const StateVector& s, const std::string& name,
                       const std::vector<std::string>& alphabet) {
  if (!s.space().has(name))
    fail("wrong-space", "state has no subsystem '" + name + "'");
  if (s.space().at(name).alphabet != alphabet)
    fail("wrong-space", "subsystem '" + name + "' has an unexpected alphabet");
}

class BeamSplitterElement : public OpticalElement {
public:
  BeamSplitterElement(std::string subsystem, std::string a, std::string b,
                      BeamSplitterConvention conv)
      : subsystem_(std::move(subsystem)), a_(std::move(a)), b_(std::move(b)), conv_(conv) {}

  StateVector apply(const StateVector& s) const override {
    const std::size_t pos = s.space().index_of(subsystem_);
    const SubsystemSpec& spec = s.space().subsystems()[pos];
    const std::uint32_t ia = spec.label_index(a_);
    const std::uint32_t ib = spec.label_index(b_);
    std::vector<std::vector<ColumnTerm>> columns(spec.size());
    for (std::uint32_t i = 0; i < spec.size(); ++i) {
      if (i == ia) {
        columns[i] = {{{ia}, conv_.t}, {{ib}, conv_.r}};
      } else if (i == ib) {
        columns[i] = {{{ia}, conv_.r}, {{ib}, conv_.t}};
      } else {
        columns[i] = {{{i}, Amplitude{1.0, 0.0}}};
      }
    }
    return apply_replacement(s, pos, {spec}, columns);
  }

  std::string describe() const override {
    return "beam-splitter(" + subsystem_ + ":" + a_ + "," + b_ + ")";
  }

private:
  std::string subsystem_, a_, b_;
  BeamSplitterConvention conv_;
};

class PhaseElement : public OpticalElement {
public:
  PhaseElement(std::string kind, std::string subsystem, std::string label, double phi)
      : kind_(std::move(kind)), subsystem_(std::move(subsystem)), label_(std::move(label)),
        phi_(phi) {}

  StateVector apply(const StateVector& s) const override {
    const std::size_t pos = s.space().index_of(subsystem_);
    const SubsystemSpec& spec = s.space().subsystems()[pos];
    const std::uint32_t target = spec.label_index(label_);
    const Amplitude factor = std::polar(1.0, phi_);
    std::vector<std::vector<ColumnTerm>> columns(spec.size());
    for (std::uint32_t i = 0; i < spec.size(); ++i)
      columns[i] = {{{i}, i == target ? factor : Amplitude{1.0, 0.0}}};
    return apply_replacement(s, pos, {spec}, columns);
  }

  std::string describe() const override {
    return kind_ + "(" + subsystem_ + ":" + label_ + ", phi=" + std::to_string(phi_) + ")";
  }

private:
  std::string kind_, subsystem_, label_;
  double phi_;
};

class ScreenPropagatorElement : public OpticalElement {
public:
  ScreenPropagatorElement(std::string path, std::string bin, Geometry g)
      : path_(std::move(path)), bin_(std::move(bin)), geometry_(std::move(g)) {
    geometry_.validate();
  }

  StateVector apply(const StateVector& s) const override {
    require_subsystem(s, path_, kPathLabels);
    const std::size_t pos = s.space().index_of(path_);
    const std::size_t bins = geometry_.bins();
    const double w = 1.0 / std::sqrt(static_cast<double>(bins));
    std::vector<std::vector<ColumnTerm>> columns(2);
    columns[0].reserve(bins);
    columns[1].reserve(bins);
    for (std::uint32_t b = 0; b < bins; ++b) {
      const double half = 0.5 * geometry_.phase_at(b);
      columns[0].push_back({{b}, w * std::polar(1.0, -half)});  // U: nearer slit
      columns[1].push_back({{b}, w * std::polar(1.0, +half)});  // L
    }
    return apply_replacement(s, pos, {SubsystemSpec(bin_, bin_labels(bins))}, columns);
  }

  std::string describe() const override {
    return "screen-propagator(" + path_ + "->" + bin_ + ")";
  }

private:
  std::string path_, bin_;
  Geometry geometry_;
};

class SpdcElement : public OpticalElement {
public:
  SpdcElement(std::string source, std::string signal, std::string idler)
      : source_(std::move(source)), signal_(std::move(signal)), idler_(std::move(idler)) {}

  StateVector apply(const StateVector& s) const override {
    require_subsystem(s, source_, kPathLabels);
    const std::size_t pos = s.space().index_of(source_);
    std::vector<std::vector<ColumnTerm>> columns(2);
    columns[0] = {{{0, 0}, Amplitude{1.0, 0.0}}};
    columns[1] = {{{1, 1}, Amplitude{1.0, 0.0}}};
    return apply_replacement(
        s, pos, {SubsystemSpec(signal_, kPathLabels), SubsystemSpec(idler_, kPathLabels)},
        columns);
  }

  std::string describe() const override {
    return "spdc(" + source_ + "->" + signal_ + "," + idler_ + ")";
  }

private:
  std::string source_, signal_, idler_;
};

class WhichPathCouplerElement : public OpticalElement {
public:
  WhichPathCouplerElement(std::string path, std::string det,
                          std::map<std::string, std::string> label_map)
      : path_(std::move(path)), det_(std::move(det)), map_(std::move(label_map)) {}

  StateVector apply(const StateVector& s) const override {
    if (!s.space().has(path_))
      fail("wrong-space", "state has no subsystem '" + path_ + "'");
    const std::size_t pos = s.space().index_of(path_);
    const SubsystemSpec& spec = s.space().subsystems()[pos];

    // Detector alphabet in sorted order so the same detector set always
    // declares the same alphabet regardless of the path-to-detector map.
    std::vector<std::string> det_alphabet;
    for (const auto& label : spec.alphabet) {
      auto it = map_.find(label);
      if (it == map_.end())
        fail("bad-config", "which-path coupler has no detector for label '" + label + "'");
      det_alphabet.push_back(it->second);
    }
    std::sort(det_alphabet.begin(), det_alphabet.end());
    SubsystemSpec det_spec(det_, det_alphabet);  // rejects duplicate detectors

    std::vector<std::vector<ColumnTerm>> columns(spec.size());
    for (std::uint32_t i = 0; i < spec.size(); ++i) {
      const std::uint32_t det = det_spec.label_index(map_.at(spec.alphabet[i]));
      columns[i] = {{{i, det}, Amplitude{1.0, 0.0}}};
    }
    return apply_replacement(s, pos, {spec, det_spec}, columns);
  }

  std::string describe() const override {
    return "which-path-coupler(" + path_ + "->" + det_ + ")";
  }

private:
  std::string path_, det_;
  std::map<std::string, std::string> map_;
};

class IdlerNetworkElement : public OpticalElement {
public:
  IdlerNetworkElement(std::string idler, std::string det, bool eraser_in,
                      BeamSplitterConvention conv)
      : idler_(std::move(idler)), det_(std::move(det)), eraser_in_(eraser_in), conv_(conv) {}

  StateVector apply(const StateVector& s) const override {
    require_subsystem(s, idler_, kPathLabels);
    const std::size_t pos = s.space().index_of(idler_);
    const Amplitude t = conv_.t;
    const Amplitude r = conv_.r;

    // First splitters: transmission heads to the path-tagging detectors
    // (U -> D4, L -> D3); reflection heads to the crossing where the eraser
    // sits. With the eraser present the two reflected beams mix on D1/D2;
    // without it they pass straight through (U -> D1, L -> D2).
    std::vector<std::vector<ColumnTerm>> columns(2);
    if (eraser_in_) {
      columns[0] = {{{0}, r * t}, {{1}, r * r}, {{3}, t}};
      columns[1] = {{{0}, r * r}, {{1}, r * t}, {{2}, t}};
    } else {
      columns[0] = {{{0}, r}, {{3}, t}};
      columns[1] = {{{1}, r}, {{2}, t}};
    }
    return apply_replacement(
        s, pos, {SubsystemSpec(det_, {"D1", "D2", "D3", "D4"})}, columns);
  }

  std::string describe() const override {
    return std::string("idler-network(") + (eraser_in_ ? "eraser-in" : "eraser-out") + ")";
  }

private:
  std::string idler_, det_;
  bool eraser_in_;
  BeamSplitterConvention conv_;
};

}  // namespace

double Geometry::phase_at(std::size_t b) const {
  return k * d * std::sin(bin_angles[b]);
}

Geometry Geometry::fringe_grid(std::size_t bins, std::size_t periods, double k, double d) {
  Geometry g;
  g.k = k;
  g.d = d;
  g.r1 = {+d / 2.0, 0.0};
  g.r2 = {-d / 2.0, 0.0};
  g.screen_distance = 100.0;
  g.rT = {0.0, g.screen_distance};
  const double span = 2.0 * kPi * static_cast<double>(periods);  // total phase span
  if (span > 2.0 * k * d)
    fail("bad-config", "fringe_grid: periods too large for k*d (sin(theta) out of range)");
  g.bin_angles.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double phase =
        -span / 2.0 + (static_cast<double>(b) + 0.5) * span / static_cast<double>(bins);
    g.bin_angles[b] = std::asin(phase / (k * d));
  }
  g.validate();
  return g;
}

Geometry Geometry::phase_span_grid(double phase_min, double phase_max, std::size_t bins,
                                   double k, double d) {
  Geometry g;
  g.k = k;
  g.d = d;
  g.r1 = {+d / 2.0, 0.0};
  g.r2 = {-d / 2.0, 0.0};
  g.screen_distance = 100.0;
  g.rT = {0.0, g.screen_distance};
  if (bins < 2) fail("bad-config", "phase_span_grid needs at least 2 bins");
  if (std::abs(phase_min) > k * d || std::abs(phase_max) > k * d)
    fail("bad-config", "phase span exceeds k*d (sin(theta) out of range)");
  g.bin_angles.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double phase = phase_min + (phase_max - phase_min) * static_cast<double>(b) /
                                         static_cast<double>(bins - 1);
    g.bin_angles[b] = std::asin(phase / (k * d));
  }
  g.validate();
  return g;
}

void Geometry::validate() const {
  if (k <= 0.0) fail("bad-config", "wavenumber k must be positive");
  if (d <= 0.0) fail("bad-config", "slit separation d must be positive");
  if (bin_angles.size() < 2) fail("bad-config", "need at least 2 screen bins");
  for (std::size_t b = 1; b < bin_angles.size(); ++b) {
    if (!(bin_angles[b] > bin_angles[b - 1]))
      fail("bad-config", "bin_angles must be strictly increasing");
  }
  const std::size_t n = bin_angles.size();
  for (std::size_t b = 0; b < n / 2; ++b) {
    if (std::abs(bin_angles[b] + bin_angles[n - 1 - b]) > 1e-12)
      fail("bad-config", "bin_angles must be symmetric about 0");
  }
}

BeamSplitterConvention::BeamSplitterConvention(Amplitude t_, Amplitude r_) : t(t_), r(r_) {
  const double mod = std::norm(t) + std::norm(r);
  const Amplitude cross = t * std::conj(r) + r * std::conj(t);
  if (std::abs(mod - 1.0) > 1e-12 || std::abs(cross) > 1e-12)
    fail("bad-config", "beam splitter matrix [[t,r],[r,t]] is not unitary");
}

BeamSplitterConvention BeamSplitterConvention::symmetric() {
  const double s = 1.0 / std::sqrt(2.0);
  return BeamSplitterConvention{{s, 0.0}, {0.0, s}};
}

ElementPtr make_beam_splitter(std::string subsystem, std::string label_a,
                              std::string label_b, BeamSplitterConvention conv) {
  return std::make_shared<BeamSplitterElement>(std::move(subsystem), std::move(label_a),
                                               std::move(label_b), conv);
}

ElementPtr make_mirror(std::string subsystem, std::string label, double phase) {
  return std::make_shared<PhaseElement>("mirror", std::move(subsystem), std::move(label),
                                        phase);
}

ElementPtr make_phase_shifter(std::string subsystem, std::string label, double phi) {
  return std::make_shared<PhaseElement>("phase-shifter", std::move(subsystem),
                                        std::move(label), phi);
}

ElementPtr make_screen_propagator(std::string path_subsystem, std::string bin_subsystem,
                                  Geometry g) {
  return std::make_shared<ScreenPropagatorElement>(std::move(path_subsystem),
                                                   std::move(bin_subsystem), std::move(g));
}

ElementPtr make_spdc(std::string source, std::string signal, std::string idler) {
  return std::make_shared<SpdcElement>(std::move(source), std::move(signal),
                                       std::move(idler));
}

ElementPtr make_which_path_coupler(std::string path_subsystem,
                                   std::string detector_subsystem,
                                   std::map<std::string, std::string> label_map) {
  return std::make_shared<WhichPathCouplerElement>(
      std::move(path_subsystem), std::move(detector_subsystem), std::move(label_map));
}

ElementPtr make_idler_network(std::string idler_subsystem, std::string detector_subsystem,
                              bool eraser_in, BeamSplitterConvention conv) {
  return std::make_shared<IdlerNetworkElement>(std::move(idler_subsystem),
                                               std::move(detector_subsystem), eraser_in,
                                               conv);
}

Amplitude propagate_spherical(Point2 source, Point2 target, double k) {
  const double dx = target.x - source.x;
  const double dy = target.y - source.y;
  const double rho = std::hypot(dx, dy);
  if (rho == 0.0) fail("singular-propagation", "source and target coincide");
  return std::polar(1.0 / rho, k * rho);
}

double screen_intensity(double theta, double k, double d) {
  const Amplitude sum = Amplitude{1.0, 0.0} + std::polar(1.0, k * d * std::sin(theta));
  return std::norm(sum);
}

StateVector double_slit_state(const Geometry& g) {
  g.validate();
  const std::size_t bins = g.bins();
  StateVector out{CompositeSpace({SubsystemSpec("bin", bin_labels(bins))})};
  const double s = 1.0 / std::sqrt(2.0);
  if (g.exact_spherical) {
    for (std::uint32_t b = 0; b < bins; ++b) {
      const Point2 target{g.screen_distance * std::tan(g.bin_angles[b]), g.screen_distance};
      const Amplitude amp =
          s * (propagate_spherical(g.r1, target, g.k) + propagate_spherical(g.r2, target, g.k));
      if (std::abs(amp) > kAmplitudePrune) out.set_indices({b}, amp);
    }
  } else {
    const double w = 1.0 / std::sqrt(static_cast<double>(bins));
    for (std::uint32_t b = 0; b < bins; ++b) {
      const double half = 0.5 * g.phase_at(b);
      const Amplitude amp = s * w * (std::polar(1.0, -half) + std::polar(1.0, +half));
      if (std::abs(amp) > kAmplitudePrune) out.set_indices({b}, amp);
    }
  }
  return normalize(out);
}

StateVector couple_which_path_detectors(const StateVector& s, const Geometry& g) {
  g.validate();
  if (!s.space().has("path")) fail("wrong-space", "state has no 'path' subsystem");
  return make_which_path_coupler("path", "det", {{"U", "D1"}, {"L", "D2"}})->apply(s);
}

StateVector mach_zehnder_state(bool closed, BeamSplitterConvention conv,
                               double extra_phase_u) {
  StateVector s{CompositeSpace({SubsystemSpec("path", kPathLabels)})};
  s.set({"U"}, Amplitude{1.0, 0.0});  // photon enters on the U input port

  s = make_beam_splitter("path", "U", "L", conv)->apply(s);
  s = make_mirror("path", "U", 0.0)->apply(s);
  s = make_mirror("path", "L", 0.0)->apply(s);
  if (extra_phase_u != 0.0) s = make_phase_shifter("path", "U", extra_phase_u)->apply(s);
  if (closed) s = make_beam_splitter("path", "U", "L", conv)->apply(s);

  // Fixed line-to-detector map. For any 50/50 convention the closed
  // configuration puts all amplitude on the crossed output line (L), so the
  // bright port carries the name D1.
  return make_which_path_coupler("path", "det", {{"U", "D2"}, {"L", "D1"}})->apply(s);
}

StateVector spdc_split(const StateVector& s) {
  if (s.space().arity() != 1 || s.space().subsystems()[0].alphabet != kPathLabels)
    fail("wrong-space", "spdc_split expects a single {U, L} path subsystem");
  return make_spdc(s.space().subsystems()[0].name, "sig", "idl")->apply(s);
}

StateVector idler_network(const StateVector& s, bool eraser_in,
                          BeamSplitterConvention conv) {
  return make_idler_network("idl", "det", eraser_in, conv)->apply(s);
}

StateVector signal_screen_state(const StateVector& s, const Geometry& g) {
  return make_screen_propagator("sig", "bin", g)->apply(s);
}

}  // namespace dcsim
