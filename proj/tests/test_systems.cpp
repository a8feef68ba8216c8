#include "bcs/systems.hpp"

#include <random>

#include "doctest.h"
#include "generators.hpp"

using namespace bcs;

namespace {

SpacePtr space2() { return testgen::free_space(2); }

SpacePtr car_space() {
  return WorldSpace::make(Vocabulary::from_names({"parked", "full"}), Theory{});
}

Formula F(const std::string& s, const SpacePtr& sp) {
  return parse_formula(s, sp->vocab);
}

std::vector<World> W(std::initializer_list<const char*> bits) {
  std::vector<World> out;
  for (const char* b : bits) out.push_back(world_from_string(b));
  return out;
}

RevisionRanking demo_ranking(const SpacePtr& sp) {
  return RevisionRanking(sp, {2, 1, 1, 0});
}

std::vector<Formula> tpq_alphabet(const SpacePtr& sp) {
  return {F("true", sp), F("p", sp), F("q", sp)};
}

SystemModel borrowed_car_system(int T = 3) {
  auto sp = car_space();
  UpdateStructure u{sp, HammingDistance{}};
  std::vector<Formula> alphabet{F("true", sp), F("parked", sp),
                                F("!full", sp)};
  return build_update_system(u, alphabet, T);
}

// All consistent world-set formulas in canonical form; using them as the
// alphabet makes every observation available.
std::vector<Formula> full_alphabet(const SpacePtr& sp) {
  std::vector<Formula> out;
  auto all = testgen::worldset_formulas(sp);
  for (size_t m = 1; m < all.size(); ++m) out.push_back(all[m]);
  return out;
}

}  // namespace

TEST_CASE("revision system run counts") {
  auto sp = space2();
  auto sys = build_revision_system(demo_ranking(sp), tpq_alphabet(sp), 2);
  // Per world: |{o in alphabet : w |= o}|^T = 9 + 4 + 4 + 1.
  CHECK(sys.runs.size() == 18);
  // World 00 admits only `true`.
  int count00 = 0;
  for (const Run& r : sys.runs)
    if (r.env[0] == world_from_string("00")) ++count00;
  CHECK(count00 == 1);
  CHECK(validate_bcs(sys).pass);

  CHECK_THROWS_AS(build_revision_system(demo_ranking(sp), {}, 2),
                  EmptyAlphabet);
  CHECK_THROWS_AS(
      build_revision_system(demo_ranking(sp), tpq_alphabet(sp), 8, 100),
      StateSpaceTooLarge);
}

TEST_CASE("knowledge cells group equal observation prefixes") {
  auto sp = space2();
  auto sys = build_revision_system(demo_ranking(sp), tpq_alphabet(sp), 2);
  // At time 0 every run shares the empty local state.
  CHECK(knowledge_cell(sys, {0, 0}).size() == sys.runs.size());
  // Find two runs starting with the observation p at different worlds.
  int p_idx = sys.alphabet_index(F("p", sp));
  std::vector<int> with_p;
  for (size_t i = 0; i < sys.runs.size(); ++i)
    if (sys.runs[i].obs[0] == p_idx) with_p.push_back(static_cast<int>(i));
  auto cell = knowledge_cell(sys, {with_p.front(), 1});
  // Worlds 10 and 11 both admit p, times alphabet choices at step 2.
  bool has_10 = false, has_11 = false;
  for (const Point& pt : cell) {
    if (sys.env_at(pt) == world_from_string("10")) has_10 = true;
    if (sys.env_at(pt) == world_from_string("11")) has_11 = true;
  }
  CHECK(has_10);
  CHECK(has_11);
}

TEST_CASE("model checking the knowledge and belief operators") {
  auto sp = space2();
  auto sys = build_revision_system(demo_ranking(sp), tpq_alphabet(sp), 2);
  int p_idx = sys.alphabet_index(F("p", sp));
  // After observing p the agent knows p (observations are truthful).
  for (size_t i = 0; i < sys.runs.size(); ++i) {
    if (sys.runs[i].obs[0] != p_idx) continue;
    Point pt{static_cast<int>(i), 1};
    CHECK(model_check(sys, pt, parse_kpt("K(p)", sp->vocab)));
    CHECK(model_check(sys, pt, parse_kpt("learn(p)", sp->vocab)));
    CHECK(!model_check(sys, pt, parse_kpt("learn(q)", sp->vocab)));
  }
  // B(true) holds everywhere; initial beliefs are the minimum-rank worlds.
  for (size_t i = 0; i < sys.runs.size(); ++i) {
    CHECK(model_check(sys, {static_cast<int>(i), 0},
                      parse_kpt("B(true)", sp->vocab)));
    CHECK(model_check(sys, {static_cast<int>(i), 0},
                      parse_kpt("B(p & q)", sp->vocab)));
  }
  // The conditional reading of belief.
  CHECK(model_check(sys, {0, 0}, parse_kpt("!p -> q", sp->vocab)));
  // X moves along the run; past the horizon it throws.
  CHECK_THROWS_AS(model_check(sys, {0, 2}, parse_kpt("X(true)", sp->vocab)),
                  HorizonExceeded);
  Point origin{0, 0};
  CHECK(model_check(sys, origin, parse_kpt("X(X(true))", sp->vocab)));
}

TEST_CASE("knowledge is S5 and belief is its subordinate") {
  auto sp = space2();
  auto sys = build_revision_system(demo_ranking(sp), tpq_alphabet(sp), 1);
  auto formulas = testgen::worldset_formulas(sp);
  for (const Formula& f : formulas) {
    KptFormula kf = KptFormula::prop(f);
    for (size_t i = 0; i < sys.runs.size(); ++i)
      for (int m = 0; m <= sys.horizon; ++m) {
        Point pt{static_cast<int>(i), m};
        bool Kf = model_check(sys, pt, KptFormula::know(kf));
        if (Kf) {
          CHECK(model_check(sys, pt, kf));
          CHECK(model_check(sys, pt, KptFormula::know(KptFormula::know(kf))));
        } else {
          CHECK(model_check(
              sys, pt, KptFormula::know(KptFormula::negate(KptFormula::know(kf)))));
        }
        if (Kf) CHECK(model_check(sys, pt, KptFormula::belief(kf)));
        if (model_check(sys, pt, KptFormula::belief(kf)))
          CHECK(model_check(sys, pt,
                            KptFormula::know(KptFormula::belief(kf))));
      }
  }
}

TEST_CASE("beliefs at local states condition the prior") {
  auto sp = space2();
  auto sys = build_revision_system(demo_ranking(sp), tpq_alphabet(sp), 2);
  CHECK(bel(sys, {}).worlds() == W({"11"}));
  CHECK(bel(sys, {F("p", sp)}).worlds() == W({"11"}));
  CHECK(bel(sys, {F("q", sp)}).worlds() == W({"11"}));
  // !p is outside this alphabet: the state is unattainable.
  CHECK(bel(sys, {F("!p", sp)}).empty());

  auto rich = build_revision_system(demo_ranking(sp), full_alphabet(sp), 1);
  CHECK(bel(rich, {F("!p & q | !p & !q", sp).same_as(F("!p", sp))
                       ? F("!p", sp)
                       : rich.alphabet[0]})
            .worlds()
            .size() <= 2);
  // Conditioning on !p via its canonical form.
  Formula notp = char_formula_of(sp, sp->models(F("!p", sp)));
  CHECK(bel(rich, {notp}).worlds() == W({"01"}));
}

TEST_CASE("revision-system beliefs are ranked conditioning") {
  std::mt19937 rng(61);
  auto sp = space2();
  for (int t = 0; t < 5; ++t) {
    auto rk = testgen::random_ranking(rng, sp, 4);
    auto sys = build_revision_system(rk, tpq_alphabet(sp), 2);
    // Every attainable local state: beliefs are the minimum-rank models of
    // the conjunction of the observations.
    for (int a1 = 0; a1 < 3; ++a1)
      for (int a2 = 0; a2 < 3; ++a2) {
        std::vector<Formula> s_a{sys.alphabet[static_cast<size_t>(a1)],
                                 sys.alphabet[static_cast<size_t>(a2)]};
        auto conj = sp->models(Formula::conj_all(s_a));
        std::int64_t best = kInfRank;
        for (World w : conj)
          best = std::min(best, rk.rank[static_cast<size_t>(sp->index_of(w))]);
        std::vector<World> expect;
        for (World w : conj)
          if (rk.rank[static_cast<size_t>(sp->index_of(w))] == best)
            expect.push_back(w);
        REQUIRE(bel(sys, s_a).worlds() == expect);
      }
  }
}

TEST_CASE("system beliefs bridge to epistemic states") {
  // At attainable local states the run system and the suffix semantics
  // agree; elsewhere the system reports the inconsistent belief set while
  // the suffix rule recovers.
  std::mt19937 rng(67);
  auto sp = space2();
  for (int t = 0; t < 5; ++t) {
    auto rk = testgen::random_ranking(rng, sp, 4);
    auto alphabet = full_alphabet(sp);
    auto sys = build_revision_system(rk, alphabet, 2);
    for (int i = 0; i < 60; ++i) {
      std::vector<Formula> e{alphabet[rng() % alphabet.size()],
                             alphabet[rng() % alphabet.size()]};
      bool attainable = !sp->models(Formula::conj_all(e)).empty();
      BeliefSet via_system = bel(sys, e);
      if (attainable)
        REQUIRE(via_system == epistemic_bs(rk, e));
      else
        REQUIRE(via_system.empty());
      // The suffix state is always attainable (or <false>), and carries
      // the epistemic belief set.
      REQUIRE(bel(sys, f_suffix(e, sp)) == epistemic_bs(rk, e));
    }
  }
}

TEST_CASE("bel agrees with the doubly-negated belief modality") {
  auto sp = space2();
  std::mt19937 rng(7);
  auto sys = build_revision_system(testgen::random_ranking(rng, sp),
                                   tpq_alphabet(sp), 2);
  auto check_against_modality = [&](const SystemModel& s) {
    for (int m = 0; m <= s.horizon; ++m)
      for (const auto& cell : s.cells[static_cast<size_t>(m)]) {
        Point pt{cell.front(), m};
        std::vector<Formula> state;
        for (int t = 0; t < m; ++t)
          state.push_back(
              s.alphabet[static_cast<size_t>(s.runs[static_cast<size_t>(
                  cell.front())].obs[static_cast<size_t>(t)])]);
        auto direct = bel(s, state).worlds();
        std::vector<World> via_modality;
        for (World w : s.space->worlds) {
          Formula notw = Formula::negate(char_formula_of_world(s.space, w));
          if (!model_check(s, pt, KptFormula::belief(KptFormula::prop(notw))))
            via_modality.push_back(w);
        }
        REQUIRE(direct == via_modality);
      }
  };
  check_against_modality(sys);
  check_against_modality(borrowed_car_system(2));
}

TEST_CASE("the borrowed-car system") {
  auto sys = borrowed_car_system();
  auto sp = sys.space;
  CHECK(validate_bcs(sys).pass);
  std::vector<Formula> s_a{F("true", sp), F("parked", sp), F("!full", sp)};
  CHECK(states_possible(sys, s_a) == W({"10"}));
  CHECK(bel(sys, s_a).char_formula().print() == "parked & !full");
  // T=0 system: runs are the universe, prior flat.
  auto trivial = build_update_system(UpdateStructure{sp, HammingDistance{}},
                                     {F("true", sp)}, 0);
  CHECK(trivial.runs.size() == 4);
  CHECK(bel(trivial, {}).worlds() == sp->worlds);
}

TEST_CASE("update system conditions validate") {
  auto sys = borrowed_car_system(2);
  auto rep = validate_upd(sys);
  CHECK(rep.pass);
  CHECK(validate_bcs(sys).pass);
}

TEST_CASE("revision systems validate REV1-REV3 and the primed REV4") {
  auto sp = space2();
  auto sys = build_revision_system(demo_ranking(sp), tpq_alphabet(sp), 2);
  auto rep = validate_rev(sys);
  bool rev4_failed = false, rev4p_failed = false;
  for (auto& f : rep.findings) {
    CHECK(f.property != "REV1");
    CHECK(f.property != "REV2");
    CHECK(f.property != "REV3");
    rev4_failed |= f.property == "REV4";
    rev4p_failed |= f.property == "REV4'";
  }
  // The alphabet omits consistent formulas, so REV4 fails but REV4' holds.
  CHECK(rev4_failed);
  CHECK(!rev4p_failed);

  // With every consistent formula observable, REV4 passes too.
  auto rich = build_revision_system(demo_ranking(sp), full_alphabet(sp), 1);
  CHECK(validate_rev(rich).pass);
}

TEST_CASE("the conditioning projection rule") {
  auto sp = space2();
  auto rev = build_revision_system(demo_ranking(sp), tpq_alphabet(sp), 2);
  CHECK(check_prev_rule(rev).pass);
  CHECK(check_prev_rule(borrowed_car_system(2)).pass);

  // A hand-built point plausibility that reverses the prior at time 1.
  auto adversarial = build_revision_system(demo_ranking(sp),
                                           {F("true", sp)}, 1);
  std::vector<std::vector<std::int64_t>> override(2);
  override[0] = adversarial.rank;
  override[1].assign(adversarial.runs.size(), 0);
  for (size_t i = 0; i < adversarial.runs.size(); ++i)
    override[1][i] = 3 - adversarial.rank[i];
  adversarial.point_rank_override = override;
  CHECK(!check_prev_rule(adversarial).pass);
}

TEST_CASE("states bridge to pointwise minimization") {
  auto sys = borrowed_car_system(3);
  CHECK(cross_check_update(sys, *sys.lex_structure).pass);

  std::mt19937 rng(13);
  auto sp = space2();
  for (int t = 0; t < 3; ++t) {
    auto u = t % 2 ? testgen::random_numeric_structure(rng, sp)
                   : testgen::random_poset_structure(rng, sp);
    auto s = build_update_system(u, tpq_alphabet(sp), 2);
    CHECK(cross_check_update(s, u).pass);
  }
}

TEST_CASE("correct beliefs propagate under sufficient information") {
  auto sys = borrowed_car_system(2);
  auto rep = check_correctness_propagation(sys, *sys.lex_structure);
  CHECK(rep.pass);
  REQUIRE(!rep.notes.empty());
  // The secret-use story lives inside this system: after observing
  // parked&full the agent is right; !full alone is insufficient about the
  // change to 00, and her beliefs go wrong without violating propagation.
  auto sp = sys.space;
  auto alphabet = std::vector<Formula>{F("true", sp), F("parked & full", sp),
                                       F("!full", sp)};
  auto secret = build_update_system(UpdateStructure{sp, HammingDistance{}},
                                    alphabet, 2);
  CHECK(check_correctness_propagation(secret, *secret.lex_structure).pass);
  CHECK(states_possible(secret, {F("parked & full", sp)}) == W({"11"}));
  CHECK(states_possible(secret,
                        {F("parked & full", sp), F("!full", sp)}) ==
        W({"10"}));
  // The actual world 00 satisfies the observation but is not believed.
  CHECK(!sufficient_information(*secret.lex_structure,
                                world_from_string("11"),
                                world_from_string("00"), F("!full", sp)));
}

TEST_CASE("a corrupted observation is a BCS4 finding") {
  auto sp = space2();
  auto sys = build_revision_system(demo_ranking(sp), tpq_alphabet(sp), 1);
  int p_idx = sys.alphabet_index(F("p", sp));
  for (size_t i = 0; i < sys.runs.size(); ++i)
    if (sys.runs[i].env[0] == world_from_string("00"))
      sys.runs[i].obs[0] = p_idx;  // p is false at 00
  sys.finalize();
  auto rep = validate_bcs(sys);
  REQUIRE(!rep.pass);
  CHECK(rep.findings.front().property == "BCS4");
}

TEST_CASE("trivial singleton-alphabet bridge") {
  auto sp = space2();
  UpdateStructure u{sp, HammingDistance{}};
  auto sys = build_update_system(u, {F("true", sp)}, 1);
  CHECK(cross_check_update(sys, u).pass);
  CHECK(states_possible(sys, {F("true", sp)}) == sp->worlds);
}

TEST_CASE("timestamping formulas") {
  auto sp = car_space();
  Formula f = timestamp(F("parked & !full", sp), 2);
  CHECK(f.print() == "parked@2 & !full@2");
  CHECK_THROWS(timestamp(f, 1));  // already timestamped
}

TEST_CASE("statify transfers beliefs and satisfies REV1") {
  auto sys = borrowed_car_system(2);
  auto star = statify(sys);
  CHECK(star.space->vocab.size() == 6);
  CHECK(validate_bcs(star).pass);
  auto rep = validate_rev(star);
  for (auto& f : rep.findings) CHECK(f.property != "REV1");
  CHECK(check_statify_belief_transfer(sys, star).pass);
  CHECK(check_prop_7_1(sys).pass);

  // Statifying a ranked system keeps the ranked prior.
  auto sp = space2();
  auto rev = build_revision_system(demo_ranking(sp), tpq_alphabet(sp), 1);
  auto rev_star = statify(rev);
  CHECK(rev_star.prior == PriorKind::Ranked);
  CHECK(validate_bcs(rev_star).pass);
  CHECK(check_statify_belief_transfer(rev, rev_star).pass);

  CHECK_THROWS_AS(statified_vocabulary(sys.space->vocab, 8),
                  VocabularyTooLarge);
}

TEST_CASE("statified REV findings") {
  auto sys = borrowed_car_system(2);
  auto star = statify(sys);
  auto rep = validate_rev(star);
  bool rev2 = false, rev4 = false, rev4p = false, rev3 = false;
  for (auto& f : rep.findings) {
    rev2 |= f.property == "REV2";
    rev3 |= f.property == "REV3";
    rev4 |= f.property == "REV4";
    rev4p |= f.property == "REV4'";
  }
  CHECK(rev2);    // lexicographic priors are not ranked
  CHECK(!rev3);   // UPD3 transfers to REV3
  CHECK(rev4);    // only current-time observations exist
  CHECK(!rev4p);  // the guarded version survives
}

TEST_CASE("kpt parsing") {
  auto sp = car_space();
  auto f = parse_kpt("K(parked) => B(X(!full) -> parked)", sp->vocab);
  CHECK(f.kind() == KptKind::Implies);
  CHECK(f.lhs().kind() == KptKind::Know);
  CHECK(f.rhs().kind() == KptKind::Belief);
  CHECK(f.rhs().lhs().kind() == KptKind::Cond);
  CHECK(parse_kpt("learn(parked & full)", sp->vocab).kind() == KptKind::Learn);
  CHECK_THROWS_AS(parse_kpt("K(", sp->vocab), SyntaxError);
}

TEST_CASE("system dumps are deterministic") {
  auto sp = space2();
  auto sys = build_revision_system(demo_ranking(sp), {F("true", sp)}, 1);
  std::string expected =
      "env=00,00 obs=true rank=2\n"
      "env=01,01 obs=true rank=1\n"
      "env=10,10 obs=true rank=1\n"
      "env=11,11 obs=true rank=0\n";
  CHECK(dump_system(sys) == expected);
  CHECK(dump_system(sys) == dump_system(sys));
  auto upd = build_update_system(UpdateStructure{sp, HammingDistance{}},
                                 {F("true", sp)}, 1);
  auto dump = dump_system(upd);
  CHECK(dump.find("order:") != std::string::npos);
}
