#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dcsim/statevec.hpp"

namespace dcsim {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Slit/screen geometry. Angles are the per-bin representative angles theta;
/// the binned fringe kernel is exact at bin centers (no sub-bin integration).
///
/// The far-field kernel maps slit amplitudes to bin amplitudes with uniform
/// magnitude 1/sqrt(B) and phases +/- k*d*sin(theta)/2. When the bin grid
/// covers a whole number of fringe periods with no bin at phase 0 (the
/// fringe_grid() default), the two kernel columns are orthonormal and the
/// propagator is an exact isometry.
struct Geometry {
  double k = 0.0;               // wavenumber, rad / unit length
  double d = 0.0;               // slit separation
  Point2 r1{};                  // upper slit (U)
  Point2 r2{};                  // lower slit (L)
  double screen_distance = 0.0;
  Point2 rT{};                  // which-path detector assembly
  std::vector<double> bin_angles;  // theta per bin, strictly increasing, symmetric about 0
  bool exact_spherical = false;    // use Eq.-(1)-style 1/rho prefactors in double_slit_state

  std::size_t bins() const { return bin_angles.size(); }
  /// Fringe phase k*d*sin(theta) at bin b.
  double phase_at(std::size_t b) const;

  /// Default experiment grid: `bins` centers uniform in sin(theta), covering
  /// `periods` full fringe periods, offset half a step so no center sits at
  /// phase 0. Exact isometry grid (see above). Requires periods*pi <= k*d.
  static Geometry fringe_grid(std::size_t bins = 32, std::size_t periods = 4,
                              double k = 2.0 * 3.14159265358979323846, double d = 4.0);

  /// Diagnostic grid with centers uniform in sin(theta) between the inclusive
  /// phase endpoints; use it to place bins exactly at landmark phases such as
  /// 0, pi/2, pi, 2*pi. Not an exact isometry grid.
  static Geometry phase_span_grid(double phase_min, double phase_max, std::size_t bins,
                                  double k = 2.0 * 3.14159265358979323846, double d = 4.0);

  void validate() const;  // "bad-config" on invariant violation
};

/// 50/50-capable beam splitter convention [[t, r], [r, t]]; construction
/// rejects non-unitary pairs ("bad-config"). The default is the symmetric
/// convention t = 1/sqrt(2), r = i/sqrt(2).
struct BeamSplitterConvention {
  Amplitude t;
  Amplitude r;

  BeamSplitterConvention(Amplitude t_, Amplitude r_);
  static BeamSplitterConvention symmetric();
};

/// Optical elements: linear isometries on a StateVector, applied by name to
/// one subsystem (possibly replacing it). Each apply() preserves the state
/// norm within 1e-12 and prunes cancelled terms so destructive interference
/// leaves no residue.
class OpticalElement {
public:
  virtual ~OpticalElement() = default;
  virtual StateVector apply(const StateVector& s) const = 0;
  virtual std::string describe() const = 0;
};

using ElementPtr = std::shared_ptr<const OpticalElement>;

/// 2x2 beam splitter on a two-label subsystem: mixes the amplitudes of
/// labels (a, b) by [[t, r], [r, t]].
ElementPtr make_beam_splitter(std::string subsystem, std::string label_a,
                              std::string label_b, BeamSplitterConvention conv);

/// Mirror: constant phase on one label of a subsystem (default 0; a common
/// phase on all paths is unobservable).
ElementPtr make_mirror(std::string subsystem, std::string label, double phase = 0.0);

/// Phase shifter: multiplies the amplitude of one label by e^{i phi}.
ElementPtr make_phase_shifter(std::string subsystem, std::string label, double phi);

/// Far-field screen propagator: replaces the two-label path subsystem by a
/// position-bin subsystem using the two-source fringe kernel of `g`.
ElementPtr make_screen_propagator(std::string path_subsystem, std::string bin_subsystem,
                                  Geometry g);

/// Pair splitter: replaces `source` (alphabet {U, L}) by two perfectly
/// correlated copies named `signal` and `idler`.
ElementPtr make_spdc(std::string source, std::string signal, std::string idler);

/// Which-path coupler: entangles a path subsystem with a new detector
/// subsystem, |x> -> |x>|map(x)>.
ElementPtr make_which_path_coupler(std::string path_subsystem, std::string detector_subsystem,
                                   std::map<std::string, std::string> label_map);

/// Idler detection network: replaces the idler path subsystem {U, L} by a
/// detector subsystem {D1..D4}. With the eraser present, U and L recombine
/// on D1/D2; without it, D1 tags U and D2 tags L. D3/D4 stay path-tagging in
/// both configurations.
ElementPtr make_idler_network(std::string idler_subsystem, std::string detector_subsystem,
                              bool eraser_in, BeamSplitterConvention conv);

/// Spherical wave amplitude (1/rho) e^{i k rho} from source to target;
/// coincident points are rejected ("singular-propagation").
Amplitude propagate_spherical(Point2 source, Point2 target, double k);

/// Two-slit relative screen intensity |1 + e^{i k d sin(theta)}|^2, in [0, 4].
double screen_intensity(double theta, double k, double d);

/// Normalized double-slit screen state over a position-bin subsystem "bin".
/// Far-field kernel by default; exact spherical prefactors from r1/r2 when
/// g.exact_spherical is set.
StateVector double_slit_state(const Geometry& g);

/// Entangle the two-path state (subsystem "path") with which-path detectors
/// "det" in {D1, D2}: U tags D1, L tags D2. "wrong-space" if `s` has no
/// "path" subsystem.
StateVector couple_which_path_detectors(const StateVector& s, const Geometry& g);

/// Final Mach-Zehnder state over subsystems (path, det). Closed puts the
/// bright output on D1 for any 50/50 convention; open associates arms with
/// detectors one-to-one. `extra_phase_u` adds a phase shifter on the U arm
/// between the splitters.
StateVector mach_zehnder_state(bool closed, BeamSplitterConvention conv,
                               double extra_phase_u = 0.0);

/// Split the slit superposition (single subsystem, alphabet {U, L}) into the
/// correlated signal/idler pair state over ("sig", "idl").
StateVector spdc_split(const StateVector& s);

/// Apply the idler detection network to subsystem "idl", producing "det".
StateVector idler_network(const StateVector& s, bool eraser_in,
                          BeamSplitterConvention conv);

/// Replace the signal path subsystem "sig" by the position-bin subsystem
/// "bin" through the far-field fringe kernel.
StateVector signal_screen_state(const StateVector& s, const Geometry& g);

}  // namespace dcsim
