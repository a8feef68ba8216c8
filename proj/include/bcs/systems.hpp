#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bcs/kernel.hpp"
#include "bcs/plausibility.hpp"
#include "bcs/revision.hpp"
#include "bcs/update.hpp"

namespace bcs {

struct HorizonExceeded : std::runtime_error {
  explicit HorizonExceeded(int t)
      : std::runtime_error("temporal operator past the horizon at time " +
                           std::to_string(t)) {}
};

struct EmptyAlphabet : std::runtime_error {
  EmptyAlphabet() : std::runtime_error("observation alphabet is empty") {}
};

struct StateSpaceTooLarge : std::runtime_error {
  explicit StateSpaceTooLarge(const std::string& what)
      : std::runtime_error(what) {}
};

// A finite-horizon run: environment states s_0..s_T and observations
// o_1..o_T (stored as alphabet indices; obs[k] is observed at time k+1).
struct Run {
  std::vector<World> env;
  std::vector<int> obs;
};

struct Point {
  int run = 0;
  int time = 0;
  bool operator==(const Point&) const = default;
};

enum class PriorKind { Ranked, Lex, Pref };

// Finite-horizon interpreted plausibility system. The agent's local state at
// time m is the observation prefix o_1..o_m; knowledge cells group runs with
// equal prefixes. Beliefs come from one prior over runs by conditioning.
struct SystemModel {
  SpacePtr space;
  int horizon = 0;
  std::vector<Formula> alphabet;
  std::vector<Run> runs;

  PriorKind prior = PriorKind::Ranked;
  std::vector<std::int64_t> rank;                  // Ranked: per run
  std::optional<UpdateStructure> lex_structure;    // Lex: supplies d
  std::vector<std::vector<std::uint64_t>> pref_rows;  // Pref: bitset rows

  // Hand-built point-level plausibility, per time and run; when present it
  // replaces prior conditioning at those times (adversarial test device).
  std::optional<std::vector<std::vector<std::int64_t>>> point_rank_override;

  // Caches, built by finalize().
  std::vector<std::vector<int>> cell_of;             // [time][run] -> cell id
  std::vector<std::vector<std::vector<int>>> cells;  // [time][cell] -> runs

  void finalize();
  int alphabet_index(const Formula& f) const;  // -1 when absent
  World env_at(const Point& p) const {
    return runs[static_cast<size_t>(p.run)].env[static_cast<size_t>(p.time)];
  }
  const Formula& obs_at(int run, int time) const;  // time >= 1
  int point_count() const {
    return static_cast<int>(runs.size()) * (horizon + 1);
  }
};

// r precedes r' (strictly more plausible) under the system prior.
bool run_precedes(const SystemModel& sys, int a, int b);
// Dominance comparison of run sets (exact min-rank comparison when ranked).
bool run_set_ge(const SystemModel& sys, const std::vector<int>& a,
                const std::vector<int>& b);
bool run_set_bottom(const SystemModel& sys, const std::vector<int>& a);

// ---------------------------------------------------------------------------
// The logic with knowledge, plausibility and time.

enum class KptKind { Prop, Learn, Not, And, Or, Implies, Iff, Know, Belief,
                     Next, Cond };

class KptFormula {
 public:
  static KptFormula prop(Formula f);
  static KptFormula learn(Formula f);
  static KptFormula negate(KptFormula f);
  static KptFormula conj(KptFormula a, KptFormula b);
  static KptFormula disj(KptFormula a, KptFormula b);
  static KptFormula implies(KptFormula a, KptFormula b);
  static KptFormula iff(KptFormula a, KptFormula b);
  static KptFormula know(KptFormula f);
  static KptFormula belief(KptFormula f);
  static KptFormula next(KptFormula f);
  static KptFormula cond(KptFormula a, KptFormula b);

  KptKind kind() const;
  const Formula& prop_formula() const;
  const KptFormula& lhs() const;
  const KptFormula& rhs() const;
  std::string print() const;

 private:
  KptFormula() = default;
  struct Node;
  static KptFormula make(KptKind k, Formula prop, const KptFormula* a,
                         const KptFormula* b);
  std::shared_ptr<const Node> node_;
};

// Grammar: the propositional grammar plus K(f), B(f), X(f), learn(<prop>),
// and the conditional f -> g (loosest precedence, right-associative).
KptFormula parse_kpt(const std::string& text, const Vocabulary& vocab);

bool model_check(const SystemModel& sys, const Point& p, const KptFormula& f);

std::vector<Point> knowledge_cell(const SystemModel& sys, const Point& p);

// Belief set at a local state; the full (empty-world-set) belief set when the
// local state is unattainable.
BeliefSet bel(const SystemModel& sys, const std::vector<Formula>& local_state);
std::vector<World> states_possible(const SystemModel& sys,
                                   const std::vector<Formula>& local_state);

// ---------------------------------------------------------------------------
// Constructors

// Constant-environment runs, one per (world, observation sequence) with all
// observations true at the world; ranked prior copied from the ranking.
SystemModel build_revision_system(const RevisionRanking& rk,
                                  const std::vector<Formula>& alphabet, int T,
                                  std::int64_t cap = 1000000);

// All state sequences paired with true-at-state observations; lexicographic
// first-divergence prior derived from the structure's distance.
SystemModel build_update_system(const UpdateStructure& u,
                                const std::vector<Formula>& alphabet, int T,
                                std::int64_t cap = 1000000);

// ---------------------------------------------------------------------------
// Validators and the appendix cross-checks

struct ValidationBounds {
  int max_obs_len = 2;        // observation-sequence length per check
  int pair_budget = 4000;     // sampled (phi, psi) pairs for quantified checks
  std::uint64_t seed = 1;
};

CheckReport validate_bcs(const SystemModel& sys);
CheckReport validate_rev(const SystemModel& sys,
                         const ValidationBounds& bounds = {});
CheckReport validate_upd(const SystemModel& sys,
                         const ValidationBounds& bounds = {});

// Conditioning projects one step: comparisons at time m+1 match comparisons
// of the prev-sets at time m. Exhaustive over subset pairs for cells of at
// most 12 points, sampled above.
CheckReport check_prev_rule(const SystemModel& sys, std::uint64_t seed = 1);

// States(s_a . psi) = min_U(States(s_a), models(psi)) on every attainable
// local state.
CheckReport cross_check_update(const SystemModel& sys,
                               const UpdateStructure& u);

// Correct beliefs plus sufficient information propagate one step. Counts the
// precondition-failure points (reported in notes, not violations).
CheckReport check_correctness_propagation(const SystemModel& sys,
                                          const UpdateStructure& u);

// ---------------------------------------------------------------------------
// Timestamping

Formula timestamp(const Formula& f, int m);
Vocabulary statified_vocabulary(const Vocabulary& vocab, int horizon);

// One statified run per source run over the timestamped vocabulary; the
// environment becomes the whole source state sequence, constant over time;
// the prior transfers isomorphically.
SystemModel statify(const SystemModel& sys);

// Validates the statified image: a belief change system satisfying REV1,
// with REV3 asserted when the source passed UPD3 and REV4' when it passed
// UPD4'.
CheckReport check_prop_7_1(const SystemModel& sys,
                           const ValidationBounds& bounds = {});

// B phi at (r, m) iff B timestamp(phi, m) at the statified image point;
// exhaustive over world-set formulas of the source space.
CheckReport check_statify_belief_transfer(const SystemModel& sys,
                                          const SystemModel& statified);

// One run per line "env=... obs=... rank=..."; preference priors list
// "order: i < j" run-id pairs (elided above 200 runs).
std::string dump_system(const SystemModel& sys);

}  // namespace bcs
