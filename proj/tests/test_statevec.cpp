#include <doctest.h>

#include <cmath>
#include <complex>
#include <map>

#include "dcsim/rng.hpp"
#include "dcsim/statevec.hpp"

using namespace dcsim;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

StateVector two_path_state(Amplitude u, Amplitude l) {
  StateVector s{CompositeSpace({SubsystemSpec("path", {"U", "L"})})};
  s.set({"U"}, u);
  s.set({"L"}, l);
  return s;
}

StateVector singlet() {
  StateVector s{CompositeSpace(
      {SubsystemSpec("A", {"+", "-"}), SubsystemSpec("B", {"+", "-"})})};
  s.set({"+", "-"}, {kInvSqrt2, 0.0});
  s.set({"-", "+"}, {-kInvSqrt2, 0.0});
  return s;
}

// The six-term eraser state written with its plain textbook amplitudes
// (all positive): det x sig, weights 1/(2 sqrt 2) on D1/D2 and 1/2 on D3/D4.
StateVector eraser_state_textbook() {
  StateVector s{CompositeSpace({SubsystemSpec("det", {"D1", "D2", "D3", "D4"}),
                                SubsystemSpec("sig", {"U", "L"})})};
  const double small = 1.0 / (2.0 * std::sqrt(2.0));
  s.set({"D1", "U"}, {small, 0.0});
  s.set({"D1", "L"}, {small, 0.0});
  s.set({"D2", "U"}, {small, 0.0});
  s.set({"D2", "L"}, {small, 0.0});
  s.set({"D3", "L"}, {0.5, 0.0});
  s.set({"D4", "U"}, {0.5, 0.0});
  return s;
}

// Small random normalized states for property checks.
StateVector random_state(RandomStream& rng, const CompositeSpace& space) {
  StateVector s(space);
  std::vector<std::uint32_t> key(space.arity(), 0);
  // walk the full product basis
  bool done = false;
  while (!done) {
    if (rng.uniform() < 0.7) {
      s.set_indices(key, Amplitude{rng.uniform() * 2.0 - 1.0, rng.uniform() * 2.0 - 1.0});
    }
    std::size_t level = space.arity();
    done = true;
    while (level > 0) {
      --level;
      if (++key[level] < space.subsystems()[level].size()) {
        done = false;
        break;
      }
      key[level] = 0;
    }
    if (space.arity() == 0) break;
  }
  if (s.terms().empty()) s.set_indices(std::vector<std::uint32_t>(space.arity(), 0), {1.0, 0.0});
  return normalize(s);
}

CompositeSpace small_space() {
  return CompositeSpace({SubsystemSpec("x", {"a", "b"}),
                         SubsystemSpec("y", {"0", "1", "2"}),
                         SubsystemSpec("z", {"p", "q"})});
}

}  // namespace

TEST_CASE("normalize: equal-weight two-term state") {
  const StateVector s = normalize(two_path_state({1.0, 0.0}, {1.0, 0.0}));
  CHECK(std::abs(s.at({"U"}) - Amplitude{kInvSqrt2, 0.0}) < 1e-15);
  CHECK(std::abs(s.at({"L"}) - Amplitude{kInvSqrt2, 0.0}) < 1e-15);
  CHECK(s.is_normalized());
}

TEST_CASE("normalize: singlet keeps the sign pattern") {
  StateVector raw{CompositeSpace(
      {SubsystemSpec("A", {"+", "-"}), SubsystemSpec("B", {"+", "-"})})};
  raw.set({"+", "-"}, {1.0, 0.0});
  raw.set({"-", "+"}, {-1.0, 0.0});
  const StateVector s = normalize(raw);
  CHECK(s.at({"+", "-"}).real() == doctest::Approx(kInvSqrt2).epsilon(1e-14));
  CHECK(s.at({"-", "+"}).real() == doctest::Approx(-kInvSqrt2).epsilon(1e-14));
}

TEST_CASE("normalize: 3-4-5 magnitudes by hand") {
  const StateVector s = normalize(two_path_state({3.0, 0.0}, {4.0, 0.0}));
  CHECK(std::abs(s.at({"U"})) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(std::abs(s.at({"L"})) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("normalize: zero state is rejected") {
  StateVector zero{CompositeSpace({SubsystemSpec("path", {"U", "L"})})};
  CHECK_THROWS_WITH_AS(normalize(zero), doctest::Contains("empty-state"), SimError);
}

TEST_CASE("normalize: term ratios preserved") {
  const StateVector s = normalize(two_path_state({0.3, 0.4}, {-1.2, 0.7}));
  const Amplitude ratio_before = Amplitude{0.3, 0.4} / Amplitude{-1.2, 0.7};
  const Amplitude ratio_after = s.at({"U"}) / s.at({"L"});
  CHECK(std::abs(ratio_before - ratio_after) < 1e-12);
}

TEST_CASE("tensor: unit scalar state is the identity") {
  StateVector unit{CompositeSpace{}};
  unit.set_indices({}, {1.0, 0.0});
  const StateVector s = normalize(two_path_state({0.6, 0.0}, {0.0, 0.8}));
  const StateVector left = tensor(unit, s);
  REQUIRE(left.space() == s.space());
  CHECK(std::abs(left.at({"U"}) - s.at({"U"})) < 1e-15);
  CHECK(std::abs(left.at({"L"}) - s.at({"L"})) < 1e-15);
}

TEST_CASE("tensor: two pair states give 36 terms and unit norm") {
  StateVector a = eraser_state_textbook();
  StateVector b{CompositeSpace({SubsystemSpec("det2", {"D1", "D2", "D3", "D4"}),
                                SubsystemSpec("sig2", {"U", "L"})})};
  for (const auto& [key, amp] : a.terms()) b.set_indices(key, amp);
  const StateVector product = tensor(a, b);
  CHECK(product.terms().size() == 36);
  CHECK(product.is_normalized());
}

TEST_CASE("tensor: direct expansion of path x spin") {
  const StateVector path = normalize(two_path_state({1.0, 0.0}, {1.0, 0.0}));
  StateVector spin{CompositeSpace({SubsystemSpec("s", {"+", "-"})})};
  spin.set({"+"}, {1.0, 0.0});
  const StateVector product = tensor(path, spin);
  CHECK(std::abs(product.at({"U", "+"}) - Amplitude{kInvSqrt2, 0.0}) < 1e-15);
  CHECK(std::abs(product.at({"L", "+"}) - Amplitude{kInvSqrt2, 0.0}) < 1e-15);
  CHECK(product.at({"U", "-"}) == Amplitude{0.0, 0.0});
}

TEST_CASE("tensor: subsystem name collision is rejected") {
  const StateVector s = normalize(two_path_state({1.0, 0.0}, {1.0, 0.0}));
  CHECK_THROWS_WITH_AS(tensor(s, s), doctest::Contains("subsystem-collision"), SimError);
}

TEST_CASE("tensor: norm is multiplicative") {
  RandomStream rng(11);
  const CompositeSpace sa({SubsystemSpec("x", {"a", "b"})});
  const CompositeSpace sb({SubsystemSpec("y", {"0", "1", "2"})});
  for (int trial = 0; trial < 20; ++trial) {
    StateVector a = random_state(rng, sa);
    StateVector b = random_state(rng, sb);
    // random_state normalizes; scale to random norms
    StateVector sa2(a.space());
    for (const auto& [key, amp] : a.terms()) sa2.set_indices(key, amp * 1.7);
    StateVector sb2(b.space());
    for (const auto& [key, amp] : b.terms()) sb2.set_indices(key, amp * 0.3);
    CHECK(tensor(sa2, sb2).norm() ==
          doctest::Approx(sa2.norm() * sb2.norm()).epsilon(1e-12));
  }
}

TEST_CASE("born: singlet joint distribution") {
  const ProbabilityTable table = born_distribution(singlet(), {"A", "B"});
  CHECK(table.at({"+", "-"}) == 0.5);
  CHECK(table.at({"-", "+"}) == 0.5);
  CHECK(table.at({"+", "+"}) == 0.0);
  CHECK(table.at({"-", "-"}) == 0.0);
  CHECK(table.entries.size() == 2);  // zero outcomes are not stored
}

TEST_CASE("born: eraser detector marginals are 0.25 (brute-force oracle)") {
  // Independent oracle: sum squared magnitudes of the textbook six-term state
  // per detector over a plain map, no StateVector involved.
  const double small = 1.0 / (2.0 * std::sqrt(2.0));
  std::map<std::string, double> oracle;
  const std::vector<std::pair<std::pair<std::string, std::string>, double>> terms = {
      {{"D1", "U"}, small}, {{"D1", "L"}, small}, {{"D2", "U"}, small},
      {{"D2", "L"}, small}, {{"D3", "L"}, 0.5},   {{"D4", "U"}, 0.5}};
  for (const auto& [label, amp] : terms) oracle[label.first] += amp * amp;
  for (const auto& [det, p] : oracle) CHECK(p == doctest::Approx(0.25).epsilon(1e-14));

  const ProbabilityTable table = born_distribution(eraser_state_textbook(), {"det"});
  CHECK(table.at({"D1"}) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(table.at({"D2"}) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(table.at({"D3"}) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(table.at({"D4"}) == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("born: product basis state is a point mass") {
  StateVector s{CompositeSpace({SubsystemSpec("x", {"a", "b"})})};
  s.set({"b"}, {1.0, 0.0});
  const ProbabilityTable table = born_distribution(s, {"x"});
  CHECK(table.at({"b"}) == 1.0);
  CHECK(table.entries.size() == 1);
}

TEST_CASE("born: unknown subsystem and unnormalized input are rejected") {
  CHECK_THROWS_WITH_AS(born_distribution(singlet(), {"C"}),
                       doctest::Contains("unknown-subsystem"), SimError);
  const StateVector unnormalized = two_path_state({1.0, 0.0}, {1.0, 0.0});
  CHECK_THROWS_WITH_AS(born_distribution(unnormalized, {"path"}),
                       doctest::Contains("not-normalized"), SimError);
}

TEST_CASE("project: eraser state conditioned on D1 and D4") {
  const StateVector s = eraser_state_textbook();
  const StateVector given_d1 = project(s, "det", "D1");
  CHECK(std::abs(given_d1.at({"D1", "U"}) - Amplitude{kInvSqrt2, 0.0}) < 1e-12);
  CHECK(std::abs(given_d1.at({"D1", "L"}) - Amplitude{kInvSqrt2, 0.0}) < 1e-12);
  CHECK(given_d1.terms().size() == 2);

  const StateVector given_d4 = project(s, "det", "D4");
  CHECK(given_d4.terms().size() == 1);
  CHECK(std::abs(given_d4.at({"D4", "U"}) - Amplitude{1.0, 0.0}) < 1e-12);
}

TEST_CASE("project: singlet anticorrelation is certain") {
  const StateVector after = project(singlet(), "A", "+");
  const ProbabilityTable table = born_distribution(after, {"B"});
  CHECK(table.at({"-"}) == 1.0);
  CHECK(table.at({"+"}) == 0.0);
}

TEST_CASE("project: impossible outcome is rejected") {
  const StateVector after = project(singlet(), "A", "+");
  CHECK_THROWS_WITH_AS(project(after, "B", "+"), doctest::Contains("impossible-outcome"),
                       SimError);
}

TEST_CASE("property: global phase changes no probability table") {
  RandomStream rng(23);
  const CompositeSpace space = small_space();
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector s = random_state(rng, space);
    const Amplitude phase = std::polar(1.0, rng.uniform() * 6.28);
    StateVector rotated(space);
    for (const auto& [key, amp] : s.terms()) rotated.set_indices(key, amp * phase);
    for (const auto& name : {"x", "y", "z"}) {
      const ProbabilityTable a = born_distribution(s, {name});
      const ProbabilityTable b = born_distribution(rotated, {name});
      CHECK(a.max_deviation(b) < 1e-12);
    }
  }
}

TEST_CASE("property: chain rule P(x,y) = P(x) P(y | project on x)") {
  RandomStream rng(37);
  const CompositeSpace space = small_space();
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector s = random_state(rng, space);
    const ProbabilityTable joint = born_distribution(s, {"x", "y"});
    const ProbabilityTable px = born_distribution(s, {"x"});
    for (const auto& [key, p] : px.entries) {
      const std::string label = px.axes[0].alphabet[key[0]];
      const StateVector conditioned = project(s, "x", label);
      const ProbabilityTable py = born_distribution(conditioned, {"y"});
      for (std::uint32_t yi = 0; yi < 3; ++yi) {
        const double joint_p = [&] {
          auto it = joint.entries.find(LabelTuple{key[0], yi});
          return it == joint.entries.end() ? 0.0 : it->second;
        }();
        const double chain_p = p * [&] {
          auto it = py.entries.find(LabelTuple{yi});
          return it == py.entries.end() ? 0.0 : it->second;
        }();
        CHECK(std::abs(joint_p - chain_p) < 1e-12);
      }
    }
  }
}

TEST_CASE("property: project then born is a point mass") {
  RandomStream rng(41);
  const CompositeSpace space = small_space();
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector s = random_state(rng, space);
    const ProbabilityTable py = born_distribution(s, {"y"});
    for (const auto& [key, p] : py.entries) {
      const std::string label = py.axes[0].alphabet[key[0]];
      const StateVector conditioned = project(s, "y", label);
      const ProbabilityTable after = born_distribution(conditioned, {"y"});
      CHECK(after.at({label}) == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(after.entries.size() == 1);
    }
  }
}

TEST_CASE("property: born entries sum to one") {
  RandomStream rng(53);
  const CompositeSpace space = small_space();
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector s = random_state(rng, space);
    CHECK(born_distribution(s, {"x", "z"}).sum() == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("conditional_born matches project-then-born") {
  RandomStream rng(61);
  const CompositeSpace space = small_space();
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector s = random_state(rng, space);
    const ProbabilityTable px = born_distribution(s, {"x"});
    for (const auto& [key, p] : px.entries) {
      const std::string label = px.axes[0].alphabet[key[0]];
      const ProbabilityTable via_project =
          born_distribution(project(s, "x", label), {"y"});
      const ProbabilityTable direct = conditional_born(s, {{"x", label}}, "y");
      CHECK(via_project.max_deviation(direct) < 1e-12);
    }
  }
}

TEST_CASE("overlap: orthonormal basis terms") {
  const StateVector s = normalize(two_path_state({1.0, 0.0}, {1.0, 0.0}));
  const StateVector t = normalize(two_path_state({1.0, 0.0}, {-1.0, 0.0}));
  CHECK(std::abs(overlap(s, s) - Amplitude{1.0, 0.0}) < 1e-12);
  CHECK(std::abs(overlap(s, t)) < 1e-12);
}
