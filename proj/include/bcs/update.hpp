#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "bcs/kernel.hpp"
#include "bcs/plausibility.hpp"

namespace bcs {

struct UnknownDistanceValue : std::runtime_error {
  explicit UnknownDistanceValue(const std::string& v)
      : std::runtime_error("unknown distance value: " + v) {}
};

struct PreconditionViolated : std::runtime_error {
  explicit PreconditionViolated(const std::string& what)
      : std::runtime_error(what) {}
};

// Exact nonnegative rational, normalized.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d);
  static Rational parse(const std::string& text);  // "3" or "2/7"

  bool operator==(const Rational& o) const {
    return num == o.num && den == o.den;
  }
  bool operator<(const Rational& o) const;
  Rational operator+(const Rational& o) const;
  std::string str() const;
};

// A distance value is either a rational or a label into a declared poset.
struct DistValue {
  bool numeric = true;
  Rational value;
  int label = -1;
};

struct HammingDistance {};

struct WeightedHammingDistance {
  std::vector<Rational> weights;  // per atom, positive
};

struct NumericMatrixDistance {
  // entry [i][j] = d(world_i, world_j) over the universe index space
  std::vector<std::vector<Rational>> entries;
};

struct PosetMatrixDistance {
  std::vector<std::string> labels;          // label 0 is the designated zero
  std::vector<std::vector<bool>> less;      // strict order, transitive closure
  std::vector<std::vector<int>> entries;    // label indices per world pair
};

using DistanceFunction =
    std::variant<HammingDistance, WeightedHammingDistance,
                 NumericMatrixDistance, PosetMatrixDistance>;

// Worlds, an injective interpretation (the bit patterns themselves), and a
// distance with unique minimal value 0 on the diagonal.
struct UpdateStructure {
  SpacePtr space;
  DistanceFunction dist;

  DistValue d(World a, World b) const;
  std::string dist_kind() const;
};

ComparisonResult compare_distance(const UpdateStructure& u, const DistValue& a,
                                  const DistValue& b);
bool distance_lt(const UpdateStructure& u, const DistValue& a,
                 const DistValue& b);

// min_U(A, B) = worlds of B such that some origin in A sees no B-world
// strictly closer.
std::vector<World> min_u(const UpdateStructure& u, const std::vector<World>& a,
                         const std::vector<World>& b);

BeliefSet km_update(const UpdateStructure& u, const BeliefSet& mu,
                    const Formula& phi);
BeliefSet km_update_seq(const UpdateStructure& u, const BeliefSet& mu,
                        const std::vector<Formula>& obs);

// True when no phi-world is strictly closer to `from` than `to` is.
// Requires to |= phi.
bool sufficient_information(const UpdateStructure& u, World from, World to,
                            const Formula& phi);

using UpdateOracle =
    std::function<std::vector<World>(const std::vector<World>& mu_worlds,
                                     std::uint64_t phi_mask)>;

// U1-U8 over world-set formulas. Exhaustive for universes of at most 8
// worlds (U5/U6 exhaustive at 4, sampled above). Stops at the first witness
// per postulate.
CheckReport check_km(const UpdateOracle& oracle, const SpacePtr& space,
                     std::uint64_t seed = 1);

CheckReport validate_update_structure(const UpdateStructure& u);

// Text format: optional "vocab: p q" line, header row of world bitstrings,
// one row per source world, entries rationals or poset labels, then optional
// "order: a < b" lines declaring the strict order on labels.
UpdateStructure parse_distance_table(const std::string& text);
std::string distance_table_to_text(const UpdateStructure& u);

}  // namespace bcs
