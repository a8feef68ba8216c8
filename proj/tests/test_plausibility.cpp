#include "bcs/plausibility.hpp"

#include <random>

#include "doctest.h"
#include "generators.hpp"

using namespace bcs;

namespace {

// The worked four-world ranking used throughout: worlds indexed 00,01,10,11
// (ascending), ranks 11:0, 10:1, 01:1, 00:2.
RankedMeasure demo_ranks() { return RankedMeasure{{2, 1, 1, 0}}; }

IndexSet universe4() { return {0, 1, 2, 3}; }

// Plausibility by cardinality: satisfies A1 and A3 but breaks A2.
struct CardinalityMeasure {
  bool is_bottom(const IndexSet& s) const { return s.empty(); }
};

ComparisonResult compare(const CardinalityMeasure&, const IndexSet& a,
                         const IndexSet& b) {
  ComparisonResult r;
  r.left_bottom = a.empty();
  r.right_bottom = b.empty();
  if (a.size() == b.size())
    r.rel = Ordering::EQ;
  else
    r.rel = a.size() > b.size() ? Ordering::GT : Ordering::LT;
  return r;
}

}  // namespace

TEST_CASE("ranked comparison by minimum rank") {
  auto m = demo_ranks();
  CHECK(compare(m, {3}, {2}).rel == Ordering::GT);  // 11 beats 10
  CHECK(compare(m, {1, 2}, {1, 2}).rel == Ordering::EQ);
  CHECK(compare(m, {}, {0}).rel == Ordering::LT);
  CHECK(compare(m, {}, {}).rel == Ordering::EQ);
  CHECK(compare(m, {}, {0}).left_bottom);
}

TEST_CASE("ranked comparisons are never incomparable") {
  std::mt19937 rng(5);
  auto space = testgen::free_space(3);
  for (int t = 0; t < 50; ++t) {
    auto rk = testgen::random_ranking(rng, space);
    RankedMeasure m = rk.measure();
    for (int i = 0; i < 40; ++i) {
      IndexSet a, b;
      for (int e = 0; e < m.size(); ++e) {
        if (rng() & 1) a.push_back(e);
        if (rng() & 1) b.push_back(e);
      }
      CHECK(compare(m, a, b).rel != Ordering::Incomparable);
    }
  }
}

TEST_CASE("preference dominance on a fork") {
  // a < b and a < c; b and c incomparable.
  auto m = PreferenceMeasure::from_edges(3, {{0, 1}, {0, 2}});
  CHECK(compare(m, {1}, {2}).rel == Ordering::Incomparable);
  CHECK(compare(m, {0}, {1}).rel == Ordering::GT);
  CHECK(compare(m, {1, 2}, {1, 2}).rel == Ordering::EQ);
  CHECK(belief_worlds(m, {0, 1, 2}) == IndexSet{0});
}

TEST_CASE("conditionals on the demo ranking") {
  auto m = demo_ranks();
  // p -> q: models(p) = {10,11} = indices {2,3}; q-side {3} vs {2}.
  CHECK(conditional_holds(m, {2, 3}, {1, 3}));
  // Vacuous conditional from the empty antecedent.
  CHECK(conditional_holds(m, {}, {0}));
  CHECK(conditional_holds(m, {}, {}));
  // true -> (p & q): unique minimum is 11.
  CHECK(conditional_holds(m, universe4(), {3}));
  CHECK(belief_worlds(m, universe4()) == IndexSet{3});
}

TEST_CASE("uniform ranks believe everything possible") {
  RankedMeasure m{{0, 0, 0, 0}};
  CHECK(belief_worlds(m, universe4()) == universe4());
}

TEST_CASE("preferential satisfaction clause") {
  // a < b.
  auto chain = PreferenceMeasure::from_edges(2, {{0, 1}});
  CHECK(preferential_satisfies(chain, {0, 1}, {0}, {0, 1}));
  CHECK(!preferential_satisfies(chain, {0, 1}, {1}, {0, 1}));
  // Empty antecedent holds vacuously.
  CHECK(preferential_satisfies(chain, {}, {}, {0, 1}));
  // Diamond a<b, a<c, b<d, c<d with phi={b,c,d}: minimal phi-worlds are b,c.
  auto diamond =
      PreferenceMeasure::from_edges(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  CHECK(!preferential_satisfies(diamond, {1, 2, 3}, {1}, {0, 1, 2, 3}));
  CHECK(preferential_satisfies(diamond, {1, 2, 3}, {1, 2}, {0, 1, 2, 3}));
}

TEST_CASE("order semantics and dominance semantics agree") {
  std::mt19937 rng(17);
  for (int t = 0; t < 30; ++t) {
    int n = 3 + static_cast<int>(rng() % 4);  // up to 6 elements
    auto m = testgen::random_partial_order(rng, n);
    IndexSet universe;
    for (int i = 0; i < n; ++i) universe.push_back(i);
    const std::uint32_t full = (1u << n) - 1;
    for (std::uint32_t pm = 0; pm <= full; ++pm)
      for (std::uint32_t qm = 0; qm <= full; ++qm) {
        IndexSet phi, psi;
        for (int i = 0; i < n; ++i) {
          if (pm >> i & 1) phi.push_back(i);
          if (qm >> i & 1) psi.push_back(i);
        }
        REQUIRE(preferential_satisfies(m, phi, psi, universe) ==
                conditional_holds(m, phi, psi));
      }
  }
}

TEST_CASE("belief worlds are the minimal elements") {
  std::mt19937 rng(23);
  for (int t = 0; t < 30; ++t) {
    int n = 2 + static_cast<int>(rng() % 5);
    auto m = testgen::random_partial_order(rng, n);
    IndexSet universe;
    for (int i = 0; i < n; ++i) universe.push_back(i);
    CHECK(belief_worlds(m, universe) == m.minimal_elements(universe));
  }
  auto r = demo_ranks();
  CHECK(belief_worlds(r, universe4()) == IndexSet{3});
}

TEST_CASE("qualitative checks pass for both measure families") {
  std::mt19937 rng(31);
  auto space = testgen::free_space(3);
  for (int t = 0; t < 20; ++t) {
    auto rk = testgen::random_ranking(rng, space);
    IndexSet universe;
    for (int i = 0; i < 8; ++i) universe.push_back(i);
    CHECK(check_qualitative(rk.measure(), universe).pass);
  }
  for (int t = 0; t < 20; ++t) {
    int n = 3 + static_cast<int>(rng() % 6);
    auto m = testgen::random_partial_order(rng, n);
    IndexSet universe;
    for (int i = 0; i < n; ++i) universe.push_back(i);
    CHECK(check_qualitative(m, universe).pass);
  }
}

TEST_CASE("a cardinality comparison fails A2 with a witness") {
  CardinalityMeasure m;
  auto rep = check_qualitative(m, {0, 1, 2});
  REQUIRE(!rep.pass);
  CHECK(rep.findings.front().property == "A2");
}

TEST_CASE("KLM properties hold for the demo ranking") {
  auto m = demo_ranks();
  auto rep = check_klm(m, universe4());
  CHECK(rep.pass);
  CHECK(check_rational_monotonicity(m, universe4()).pass);
}

TEST_CASE("KLM properties hold for random measures") {
  std::mt19937 rng(41);
  auto space2 = testgen::free_space(2);
  for (int t = 0; t < 10; ++t) {
    auto rk = testgen::random_ranking(rng, space2);
    IndexSet u{0, 1, 2, 3};
    CHECK(check_klm(rk.measure(), u).pass);
  }
  for (int t = 0; t < 10; ++t) {
    int n = 3 + static_cast<int>(rng() % 3);
    auto m = testgen::random_partial_order(rng, n);
    IndexSet u;
    for (int i = 0; i < n; ++i) u.push_back(i);
    CHECK(check_klm(m, u).pass);
  }
}

TEST_CASE("rational monotonicity fails on a stemmed diamond") {
  // a < b, a < c, b < d; c and d incomparable.
  auto m = PreferenceMeasure::from_edges(4, {{0, 1}, {0, 2}, {1, 3}});
  auto rep = check_rational_monotonicity(m, {0, 1, 2, 3});
  REQUIRE(!rep.pass);
  CHECK(rep.findings.front().property == "RM");
  // KLM core still passes; the failure surfaces as a note.
  auto klm = check_klm(m, {0, 1, 2, 3});
  CHECK(klm.pass);
  CHECK(!klm.notes.empty());
}

TEST_CASE("carrier bounds are enforced") {
  RankedMeasure big{std::vector<std::int64_t>(9, 0)};
  IndexSet u;
  for (int i = 0; i < 9; ++i) u.push_back(i);
  CHECK_THROWS_AS(check_qualitative(big, u), CarrierTooLarge);
  IndexSet u6{0, 1, 2, 3, 4, 5};
  RankedMeasure six{std::vector<std::int64_t>(6, 0)};
  CHECK_THROWS_AS(check_klm(six, u6), CarrierTooLarge);
}

TEST_CASE("measure serialization") {
  auto m = demo_ranks();
  std::vector<std::string> labels{"00", "01", "10", "11"};
  CHECK(measure_to_table(m, labels) == "00 2\n01 1\n10 1\n11 0\n");
  auto p = PreferenceMeasure::from_edges(2, {{0, 1}});
  CHECK(measure_to_table(p, {"a", "b"}) == "a < b\n");
}
