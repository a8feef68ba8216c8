#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bcs/kernel.hpp"
#include "bcs/plausibility.hpp"

namespace bcs {

struct NotTotalPreorder : std::runtime_error {
  World a, b;
  NotTotalPreorder(const std::string& what, World a_, World b_)
      : std::runtime_error(what), a(a_), b(b_) {}
};

// Ranked prior over the theory universe with every world at finite rank.
// The minimum-rank worlds are the initial belief set.
struct RevisionRanking {
  SpacePtr space;
  std::vector<std::int64_t> rank;  // by universe index, all finite

  RevisionRanking(SpacePtr s, std::vector<std::int64_t> r);
  BeliefSet initial_belief() const;
  RankedMeasure measure() const { return RankedMeasure{rank}; }
};

// Minimum-rank models of phi; Cl(false) when phi has no models.
BeliefSet grove_revise(const RevisionRanking& rk, const Formula& phi);

// A sequence of observations, oldest first. Inconsistent sequences are fine.
using EpistemicState = std::vector<Formula>;

// Longest suffix whose conjunction is consistent; <false> when the last
// element alone is inconsistent; <> for the empty sequence.
EpistemicState f_suffix(const EpistemicState& e, const SpacePtr& space);

// Belief set at an epistemic state: Grove revision by the suffix conjunction.
BeliefSet epistemic_bs(const RevisionRanking& rk, const EpistemicState& e);

using RevisionOracle =
    std::function<BeliefSet(const BeliefSet& k, const Formula& phi)>;
using EpistemicOracle = std::function<BeliefSet(const EpistemicState& e)>;

// Recovers the total preorder behind an AGM oracle by pairwise disjunction
// queries, then layers ranks by peeling most-plausible worlds. Throws
// NotTotalPreorder (with the witness pair) when the answers are inconsistent.
RevisionRanking extract_ranking(const RevisionOracle& oracle,
                                const BeliefSet& k, const SpacePtr& space);

// R1-R8 over all world-set formulas from the fixed belief set k. R7/R8 pairs
// are exhaustive for universes of at most 4 worlds and sampled above.
CheckReport check_agm(const RevisionOracle& oracle, const SpacePtr& space,
                      const BeliefSet& k, std::uint64_t seed = 1);

// R1'-R9' over observation sequences of length <= depth drawn from world-set
// formulas.
CheckReport check_agm_primed(const EpistemicOracle& oracle,
                             const SpacePtr& space, int depth);

// Stock oracles.
RevisionOracle make_grove_oracle(const RevisionRanking& rk);
RevisionOracle make_drastic_oracle();             // K o phi := models(phi)
RevisionOracle make_full_meet_oracle();           // intersection else models
EpistemicOracle make_epistemic_oracle(const RevisionRanking& rk);
// Raw conditioning without the suffix rule; stuck once inconsistent.
EpistemicOracle make_raw_conditioning_oracle(const RevisionRanking& rk);
// Retracts the newest commitments first when observations conflict, so early
// observations reorder how later ones land. Satisfies R1'-R8', breaks R9'.
EpistemicOracle make_stubborn_oracle(const RevisionRanking& rk);

// Table-driven oracle file: lines "K=<DNF> ; phi=<formula> ; result=<DNF>".
// Lookups not covered by the table throw.
RevisionOracle make_table_oracle(const std::string& text, const SpacePtr& space);
std::string table_oracle_entry(const SpacePtr& space, const BeliefSet& k,
                               const Formula& phi, const BeliefSet& result);

}  // namespace bcs
