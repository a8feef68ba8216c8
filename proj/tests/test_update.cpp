#include "bcs/update.hpp"

#include <random>

#include "doctest.h"
#include "generators.hpp"

using namespace bcs;

namespace {

SpacePtr car_space() {
  return WorldSpace::make(Vocabulary::from_names({"parked", "full"}), Theory{});
}

UpdateStructure hamming(const SpacePtr& sp) {
  return UpdateStructure{sp, HammingDistance{}};
}

Formula F(const std::string& s, const SpacePtr& sp) {
  return parse_formula(s, sp->vocab);
}

std::vector<World> W(std::initializer_list<const char*> bits) {
  std::vector<World> out;
  for (const char* b : bits) out.push_back(world_from_string(b));
  return out;
}

UpdateOracle km_oracle(const UpdateStructure& u) {
  return [&u](const std::vector<World>& mu, std::uint64_t phi_mask) {
    return min_u(u, mu, u.space->unmask(phi_mask));
  };
}

}  // namespace

TEST_CASE("distance comparisons") {
  auto sp = car_space();
  auto u = hamming(sp);
  DistValue one, two;
  one.value = Rational(1, 1);
  two.value = Rational(2, 1);
  CHECK(compare_distance(u, one, two).rel == Ordering::LT);
  CHECK(compare_distance(u, one, one).rel == Ordering::EQ);

  PosetMatrixDistance pm;
  pm.labels = {"0", "a", "b"};
  pm.less = {{false, true, true}, {false, false, false}, {false, false, false}};
  pm.entries = {{0, 1, 1, 1}, {1, 0, 2, 1}, {1, 2, 0, 1}, {2, 1, 1, 0}};
  UpdateStructure up{sp, pm};
  DistValue a, b, zero;
  a.numeric = b.numeric = zero.numeric = false;
  a.label = 1;
  b.label = 2;
  zero.label = 0;
  CHECK(compare_distance(up, a, b).rel == Ordering::Incomparable);
  CHECK(compare_distance(up, zero, a).rel == Ordering::LT);
  CHECK(compare_distance(up, zero, b).rel == Ordering::LT);
}

TEST_CASE("pointwise minimization") {
  auto sp = car_space();
  auto u = hamming(sp);
  CHECK(min_u(u, W({"00"}), W({"10", "11"})) == W({"10"}));
  // A = B returns A: each world is at distance zero from itself.
  CHECK(min_u(u, W({"01", "10"}), W({"01", "10"})) == W({"01", "10"}));
  // Each source is at distance 1 from both candidates.
  CHECK(min_u(u, W({"00", "11"}), W({"01", "10"})) == W({"01", "10"}));
  CHECK(min_u(u, {}, W({"01"})).empty());
}

TEST_CASE("the borrowed-car updates") {
  auto sp = car_space();
  auto u = hamming(sp);
  BeliefSet mu1 = BeliefSet::from_formula(sp, F("parked & full", sp));
  BeliefSet mu2 = km_update(u, mu1, F("true", sp));
  CHECK(mu2 == mu1);  // already believed
  BeliefSet mu3 = km_update(u, mu2, F("parked", sp));
  CHECK(mu3 == mu1);
  BeliefSet mu4 = km_update(u, mu3, F("!full", sp));
  CHECK(mu4.worlds() == W({"10"}));  // the fuel "disappeared"
  CHECK(mu4.char_formula().print() == "parked & !full");

  CHECK(km_update(u, BeliefSet::inconsistent(sp), F("parked", sp)).empty());

  // Sequence form.
  std::vector<Formula> obs{F("true", sp), F("parked", sp), F("!full", sp)};
  CHECK(km_update_seq(u, mu1, obs).worlds() == W({"10"}));
  CHECK(km_update_seq(u, mu1, {}) == mu1);
  // Stepwise-consistent observations that are jointly inconsistent.
  std::vector<Formula> flip{F("parked", sp), F("!parked", sp)};
  CHECK(!km_update_seq(u, mu1, flip).empty());
}

TEST_CASE("zero is the unique minimum for every kind") {
  auto sp = car_space();
  auto u = hamming(sp);
  for (World a : sp->worlds)
    for (World b : sp->worlds)
      if (a != b) CHECK(distance_lt(u, u.d(a, a), u.d(a, b)));
}

TEST_CASE("sufficient information") {
  auto sp = car_space();
  auto u = hamming(sp);
  World w11 = world_from_string("11");
  World w10 = world_from_string("10");
  World w00 = world_from_string("00");
  World w01 = world_from_string("01");
  // A singleton observation always suffices.
  CHECK(sufficient_information(u, w11, w01, F("!parked & full", sp)));
  // 10 is a strictly closer !full world than 00.
  CHECK(!sufficient_information(u, w11, w00, F("!full", sp)));
  CHECK(sufficient_information(u, w11, w10, F("!full", sp)));
  // A characteristic formula pins the target world down.
  CHECK(sufficient_information(u, w11, w00, F("!parked & !full", sp)));
  // Staying put under true is always minimal.
  CHECK(sufficient_information(u, w11, w11, F("true", sp)));
  CHECK_THROWS_AS(sufficient_information(u, w11, w11, F("!full", sp)),
                  PreconditionViolated);
}

TEST_CASE("monotone sufficiency") {
  std::mt19937 rng(3);
  auto sp = testgen::free_space(3);
  for (int t = 0; t < 10; ++t) {
    auto u = t % 2 ? testgen::random_numeric_structure(rng, sp)
                   : testgen::random_poset_structure(rng, sp);
    const std::uint64_t full = (1ull << sp->size()) - 1;
    for (int i = 0; i < 200; ++i) {
      std::uint64_t phi = rng() & full;
      std::uint64_t psi = phi & rng();  // models(psi) subseteq models(phi)
      World w = sp->worlds[rng() % sp->worlds.size()];
      auto psi_models = sp->unmask(psi);
      if (psi_models.empty()) continue;
      World wp = psi_models[rng() % psi_models.size()];
      Formula fphi = char_formula_of(sp, sp->unmask(phi));
      Formula fpsi = char_formula_of(sp, psi_models);
      if (sufficient_information(u, w, wp, fphi))
        CHECK(sufficient_information(u, w, wp, fpsi));
    }
  }
}

TEST_CASE("the update operator satisfies U1-U8") {
  auto sp = car_space();
  auto u = hamming(sp);
  CHECK(check_km(km_oracle(u), sp).pass);

  std::mt19937 rng(7);
  auto sp3 = testgen::free_space(3);
  for (int t = 0; t < 6; ++t) {
    auto ru = t % 2 ? testgen::random_numeric_structure(rng, sp3)
                    : testgen::random_poset_structure(rng, sp3);
    auto rep = check_km(km_oracle(ru), sp3, 1 + t);
    CHECK(rep.pass);
  }
}

TEST_CASE("invariants U1, U2 and pointwise decomposition") {
  std::mt19937 rng(11);
  auto sp = testgen::free_space(3);
  for (int t = 0; t < 8; ++t) {
    auto u = t % 2 ? testgen::random_numeric_structure(rng, sp)
                   : testgen::random_poset_structure(rng, sp);
    const std::uint64_t full = (1ull << sp->size()) - 1;
    for (int i = 0; i < 100; ++i) {
      std::uint64_t mum = rng() & full, phim = rng() & full;
      BeliefSet mu(sp, sp->unmask(mum));
      Formula phi = char_formula_of(sp, sp->unmask(phim));
      auto result = km_update(u, mu, phi);
      CHECK(subset_worlds(result.worlds(), sp->unmask(phim)));
      if ((mum & ~phim) == 0) CHECK(result.worlds() == mu.worlds());
      // Union decomposition over singleton splits.
      std::vector<World> pointwise;
      for (World w : mu.worlds())
        pointwise = union_worlds(
            pointwise, km_update(u, BeliefSet(sp, {w}), phi).worlds());
      CHECK(result.worlds() == pointwise);
    }
  }
}

TEST_CASE("a revision-style oracle fails U8") {
  auto sp = car_space();
  // Conditioning: keep the intersection when possible, else jump to the
  // most plausible models of the new formula.
  RevisionRanking rk(sp, {3, 1, 2, 0});
  UpdateOracle oracle = [&](const std::vector<World>& mu,
                            std::uint64_t phi_mask) {
    auto models = sp->unmask(phi_mask);
    auto both = intersect_worlds(mu, models);
    if (!both.empty() || models.empty()) return both;
    std::int64_t best = kInfRank;
    for (World w : models)
      best = std::min(best, rk.rank[static_cast<size_t>(sp->index_of(w))]);
    std::vector<World> out;
    for (World w : models)
      if (rk.rank[static_cast<size_t>(sp->index_of(w))] == best)
        out.push_back(w);
    return out;
  };
  auto rep = check_km(oracle, sp);
  REQUIRE(!rep.pass);
  bool has_u8 = false;
  for (auto& f : rep.findings) has_u8 |= f.property == "U8";
  CHECK(has_u8);
}

TEST_CASE("an oracle that ignores its belief set fails U2") {
  auto sp = car_space();
  UpdateOracle oracle = [&](const std::vector<World>&, std::uint64_t phi_mask) {
    return sp->unmask(phi_mask);
  };
  auto rep = check_km(oracle, sp);
  REQUIRE(!rep.pass);
  CHECK(rep.findings.front().property == "U2");
}

TEST_CASE("structure validation") {
  auto sp = car_space();
  CHECK(validate_update_structure(hamming(sp)).pass);

  NumericMatrixDistance bad;
  bad.entries.assign(4, std::vector<Rational>(4, Rational(1, 1)));
  auto rep = validate_update_structure(UpdateStructure{sp, bad});
  REQUIRE(!rep.pass);
  CHECK(rep.findings.front().property == "zero-self-distance");

  // A universe that misses a theory model.
  auto clipped = std::make_shared<WorldSpace>(*sp);
  clipped->worlds.pop_back();
  NumericMatrixDistance nm;
  nm.entries.assign(3, std::vector<Rational>(3, Rational(1, 1)));
  for (int i = 0; i < 3; ++i) nm.entries[i][i] = Rational(0, 1);
  auto rep2 = validate_update_structure(UpdateStructure{clipped, nm});
  REQUIRE(!rep2.pass);
  CHECK(rep2.findings.front().property == "coverage");
}

TEST_CASE("distance table round trip") {
  auto sp = car_space();
  std::mt19937 rng(13);
  auto u = testgen::random_numeric_structure(rng, sp);
  auto text = distance_table_to_text(u);
  auto parsed = parse_distance_table(text);
  for (World a : sp->worlds)
    for (World b : sp->worlds)
      CHECK(u.d(a, b).value == parsed.d(a, b).value);

  auto up = testgen::random_poset_structure(rng, sp);
  auto ptext = distance_table_to_text(up);
  auto pparsed = parse_distance_table(ptext);
  for (World a : sp->worlds)
    for (World b : sp->worlds) {
      auto c1 = compare_distance(up, up.d(a, a), up.d(a, b)).rel;
      auto c2 = compare_distance(pparsed, pparsed.d(a, a), pparsed.d(a, b)).rel;
      CHECK(c1 == c2);
    }
  CHECK(validate_update_structure(pparsed).pass);
}

TEST_CASE("weighted hamming uses exact rationals") {
  auto sp = car_space();
  WeightedHammingDistance wh;
  wh.weights = {Rational(1, 3), Rational(1, 2)};
  UpdateStructure u{sp, wh};
  CHECK(validate_update_structure(u).pass);
  // d(00,11) = 1/3 + 1/2 = 5/6; d(00,10) = 1/3.
  CHECK(u.d(world_from_string("00"), world_from_string("11")).value ==
        Rational(5, 6));
  CHECK(distance_lt(u, u.d(world_from_string("00"), world_from_string("10")),
                    u.d(world_from_string("00"), world_from_string("11"))));
}
