#include "bcs/revision.hpp"

#include <random>

#include "doctest.h"
#include "generators.hpp"

using namespace bcs;

namespace {

SpacePtr space2() { return testgen::free_space(2); }

// Worlds ascending 00,01,10,11 with ranks 2,1,1,0.
RevisionRanking demo_ranking(const SpacePtr& sp) {
  return RevisionRanking(sp, {2, 1, 1, 0});
}

Formula F(const std::string& s, const SpacePtr& sp) {
  return parse_formula(s, sp->vocab);
}

std::vector<World> W(std::initializer_list<const char*> bits) {
  std::vector<World> out;
  for (const char* b : bits) out.push_back(world_from_string(b));
  return out;
}

}  // namespace

TEST_CASE("grove revision picks minimum-rank models") {
  auto sp = space2();
  auto rk = demo_ranking(sp);
  CHECK(grove_revise(rk, F("!p", sp)).worlds() == W({"01"}));
  CHECK(grove_revise(rk, F("true", sp)).worlds() == W({"11"}));
  CHECK(grove_revise(rk, F("true", sp)) == rk.initial_belief());
  CHECK(grove_revise(rk, F("p & !p", sp)).empty());
}

TEST_CASE("the suffix rule") {
  auto sp = space2();
  auto f = [&](std::initializer_list<const char*> seq) {
    EpistemicState e;
    for (const char* s : seq) e.push_back(F(s, sp));
    return f_suffix(e, sp);
  };
  auto prints = [](const EpistemicState& e) {
    std::vector<std::string> out;
    for (const auto& x : e) out.push_back(x.print());
    return out;
  };
  CHECK(prints(f({"p", "!p"})) == std::vector<std::string>{"!p"});
  CHECK(prints(f({"p", "q"})) == std::vector<std::string>{"p", "q"});
  CHECK(prints(f({"p", "false"})) == std::vector<std::string>{"false"});
  CHECK(f({}).empty());
  CHECK(prints(f({"p", "!p", "q"})) == std::vector<std::string>{"!p", "q"});
}

TEST_CASE("belief at epistemic states") {
  auto sp = space2();
  auto rk = demo_ranking(sp);
  CHECK(epistemic_bs(rk, {F("p", sp)}).worlds() == W({"11"}));
  // Recovery through the suffix after an inconsistent pair.
  CHECK(epistemic_bs(rk, {F("p", sp), F("!p", sp)}).worlds() == W({"01"}));
  // Consistent sequences behave like conjunction.
  CHECK(epistemic_bs(rk, {F("q", sp), F("p", sp)}).worlds() == W({"11"}));
  CHECK(epistemic_bs(rk, {}).worlds() == W({"11"}));
  CHECK(epistemic_bs(rk, {F("false", sp)}).empty());
}

TEST_CASE("ranking extraction recovers the preorder") {
  auto sp = space2();
  auto rk = demo_ranking(sp);
  auto oracle = make_grove_oracle(rk);
  auto extracted = extract_ranking(oracle, rk.initial_belief(), sp);
  // Layers: 11 above 10 ~ 01 above 00.
  CHECK(extracted.rank == std::vector<std::int64_t>{2, 1, 1, 0});
  for (std::uint64_t m = 0; m < 16; ++m) {
    Formula phi = char_formula_of(sp, sp->unmask(m));
    CHECK(grove_revise(extracted, phi) == grove_revise(rk, phi));
  }
}

TEST_CASE("round trip and soundness over random rankings") {
  std::mt19937 rng(19);
  auto sp = space2();
  for (int t = 0; t < 25; ++t) {
    auto rk = testgen::random_ranking(rng, sp, 4);
    auto oracle = make_grove_oracle(rk);
    CHECK(check_agm(oracle, sp, rk.initial_belief()).pass);
    auto extracted = extract_ranking(oracle, rk.initial_belief(), sp);
    for (std::uint64_t m = 0; m < 16; ++m) {
      Formula phi = char_formula_of(sp, sp->unmask(m));
      REQUIRE(grove_revise(extracted, phi) == grove_revise(rk, phi));
    }
  }
}

TEST_CASE("full meet extraction gives a two-layer ranking") {
  auto sp = space2();
  auto oracle = make_full_meet_oracle();
  BeliefSet k(sp, W({"01", "10"}));
  auto extracted = extract_ranking(oracle, k, sp);
  CHECK(extracted.rank == std::vector<std::int64_t>{1, 0, 0, 1});
  for (std::uint64_t m = 0; m < 16; ++m) {
    Formula phi = char_formula_of(sp, sp->unmask(m));
    CHECK(grove_revise(extracted, phi) == oracle(k, phi));
  }
}

TEST_CASE("intransitive answers are rejected with a witness") {
  auto sp = space2();
  // A three-cycle 00 over 01 over 10 over 00; 11 loses to everything.
  std::string table =
      "K=!p & !q ; phi=!p ; result=!p & !q\n"
      "K=!p & !q ; phi=(!p & q) | (p & !q) ; result=!p & q\n"
      "K=!p & !q ; phi=(!p & !q) | (p & !q) ; result=p & !q\n"
      "K=!p & !q ; phi=(!p & !q) | (p & q) ; result=!p & !q\n"
      "K=!p & !q ; phi=(!p & q) | (p & q) ; result=!p & q\n"
      "K=!p & !q ; phi=p ; result=p & !q\n";
  auto oracle = make_table_oracle(table, sp);
  BeliefSet k(sp, W({"00"}));
  CHECK_THROWS_AS(extract_ranking(oracle, k, sp), NotTotalPreorder);
}

TEST_CASE("drastic revision violates persistence") {
  auto sp = space2();
  auto rep = check_agm(make_drastic_oracle(), sp, BeliefSet(sp, W({"11"})));
  REQUIRE(!rep.pass);
  bool has_r4 = false;
  for (auto& f : rep.findings) has_r4 |= f.property == "R4";
  CHECK(has_r4);
}

TEST_CASE("an oracle that returns the empty set violates R5") {
  auto sp = space2();
  RevisionOracle oracle = [&](const BeliefSet&, const Formula&) {
    return BeliefSet::inconsistent(sp);
  };
  auto rep = check_agm(oracle, sp, BeliefSet(sp, W({"11"})));
  REQUIRE(!rep.pass);
  bool has_r5 = false;
  for (auto& f : rep.findings) has_r5 |= f.property == "R5";
  CHECK(has_r5);
}

TEST_CASE("epistemic revision satisfies the primed postulates") {
  std::mt19937 rng(29);
  auto sp = space2();
  for (int t = 0; t < 5; ++t) {
    auto rk = testgen::random_ranking(rng, sp, 4);
    CHECK(check_agm_primed(make_epistemic_oracle(rk), sp, 3).pass);
  }
}

TEST_CASE("raw conditioning breaks R5'") {
  auto sp = space2();
  auto rk = demo_ranking(sp);
  auto rep = check_agm_primed(make_raw_conditioning_oracle(rk), sp, 3);
  REQUIRE(!rep.pass);
  CHECK(rep.findings.front().property == "R5'");
}

TEST_CASE("raw conditioning never escapes inconsistency") {
  auto sp = space2();
  auto rk = demo_ranking(sp);
  auto raw = make_raw_conditioning_oracle(rk);
  EpistemicState stuck{F("p", sp), F("!p", sp)};
  CHECK(raw(stuck).empty());
  for (std::uint64_t m = 0; m < 16; ++m) {
    auto extended = stuck;
    extended.push_back(char_formula_of(sp, sp->unmask(m)));
    CHECK(raw(extended).empty());
  }
  // The suffix rule recovers instead.
  CHECK(!epistemic_bs(rk, stuck).empty());
}

TEST_CASE("entrenching early observations breaks R9'") {
  auto sp = space2();
  RevisionRanking rk = demo_ranking(sp);
  auto stubborn = make_stubborn_oracle(rk);
  // Committed to p<=>q and then p|q, the agent believes p&q. The surprise
  // !p retracts the newest commitment first and lands on 00; revising by
  // the conjunction (p|q)&!p in one step lands on 01 instead.
  EpistemicState two_steps{F("p <=> q", sp), F("p | q", sp), F("!p", sp)};
  EpistemicState conj{F("p <=> q", sp), F("(p | q) & !p", sp)};
  CHECK(stubborn(two_steps).worlds() == W({"00"}));
  CHECK(stubborn(conj).worlds() == W({"01"}));
  auto rep = check_agm_primed(stubborn, sp, 3);
  REQUIRE(!rep.pass);
  CHECK(rep.findings.front().property == "R9'");
}

TEST_CASE("belief after consistent extensions matches conditioning") {
  // The one-step representation away from the initial state: revising a
  // consistent prefix by a compatible formula is ranked conditioning.
  std::mt19937 rng(37);
  auto sp = space2();
  for (int t = 0; t < 20; ++t) {
    auto rk = testgen::random_ranking(rng, sp, 4);
    for (int i = 0; i < 50; ++i) {
      std::uint64_t o1 = rng() & 15, o2 = rng() & 15, pm = rng() & 15;
      if (!(o1 & o2 & pm)) continue;  // need a consistent conjunction
      EpistemicState e{char_formula_of(sp, sp->unmask(o1)),
                       char_formula_of(sp, sp->unmask(o2)),
                       char_formula_of(sp, sp->unmask(pm))};
      // Brute-force conditioning on the conjunction.
      std::int64_t best = kInfRank;
      std::vector<World> expect;
      for (int wi = 0; wi < sp->size(); ++wi)
        if ((o1 >> wi & 1) && (o2 >> wi & 1) && (pm >> wi & 1))
          best = std::min(best, rk.rank[static_cast<size_t>(wi)]);
      for (int wi = 0; wi < sp->size(); ++wi)
        if ((o1 >> wi & 1) && (o2 >> wi & 1) && (pm >> wi & 1) &&
            rk.rank[static_cast<size_t>(wi)] == best)
          expect.push_back(sp->worlds[static_cast<size_t>(wi)]);
      REQUIRE(epistemic_bs(rk, e).worlds() == expect);
    }
  }
}

TEST_CASE("R9' as a property of the suffix semantics") {
  std::mt19937 rng(41);
  auto sp = space2();
  for (int t = 0; t < 20; ++t) {
    auto rk = testgen::random_ranking(rng, sp, 4);
    for (int i = 0; i < 50; ++i) {
      std::uint64_t e1 = rng() & 15, pm = rng() & 15, qm = rng() & 15;
      if ((pm & qm) == 0) continue;
      EpistemicState lhs{char_formula_of(sp, sp->unmask(e1)),
                         char_formula_of(sp, sp->unmask(pm)),
                         char_formula_of(sp, sp->unmask(qm))};
      EpistemicState rhs{char_formula_of(sp, sp->unmask(e1)),
                         char_formula_of(sp, sp->unmask(pm & qm))};
      REQUIRE(epistemic_bs(rk, lhs) == epistemic_bs(rk, rhs));
    }
  }
}

TEST_CASE("table oracles answer from their entries") {
  auto sp = space2();
  auto rk = demo_ranking(sp);
  BeliefSet k = rk.initial_belief();
  std::string table;
  for (std::uint64_t m = 0; m < 16; ++m) {
    Formula phi = char_formula_of(sp, sp->unmask(m));
    table +=
        table_oracle_entry(sp, k, phi, grove_revise(rk, phi)) + "\n";
  }
  auto oracle = make_table_oracle(table, sp);
  CHECK(check_agm(oracle, sp, k).pass);
  // Missing entries are loud checker errors.
  CHECK_THROWS(oracle(BeliefSet(sp, W({"00"})), F("p", sp)));
  CHECK_THROWS(make_table_oracle("K=p ; phi=q\n", sp));
}

TEST_CASE("extraction requires a consistent belief set") {
  auto sp = space2();
  CHECK_THROWS(extract_ranking(make_full_meet_oracle(),
                               BeliefSet::inconsistent(sp), sp));
}
