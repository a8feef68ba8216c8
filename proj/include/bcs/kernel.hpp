#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bcs {

// A world is a truth assignment over at most 16 atoms. Atom i occupies bit
// (n-1-i), so the printed bitstring (atom 0 leftmost) reads as the binary
// value of the world and ascending world order equals ascending bitstring
// order.
using World = std::uint16_t;
inline constexpr int kMaxAtoms = 16;

struct SyntaxError : std::runtime_error {
  int token_index;
  SyntaxError(std::string msg, int token)
      : std::runtime_error(std::move(msg)), token_index(token) {}
};

struct UnknownAtom : std::runtime_error {
  std::string atom;
  explicit UnknownAtom(std::string name)
      : std::runtime_error("unknown atom: " + name), atom(std::move(name)) {}
};

struct EmptyTheoryModels : std::runtime_error {
  EmptyTheoryModels() : std::runtime_error("theory has no models") {}
};

struct VocabularyTooLarge : std::runtime_error {
  explicit VocabularyTooLarge(int n)
      : std::runtime_error("vocabulary of " + std::to_string(n) +
                           " atoms exceeds the 16-atom limit") {}
};

struct Atom {
  std::string name;
  std::optional<int> timestamp;  // rendered name@m when present

  std::string display() const;
  bool operator==(const Atom&) const = default;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<Atom> atoms);
  static Vocabulary from_names(const std::vector<std::string>& names);

  int size() const { return static_cast<int>(atoms_.size()); }
  const Atom& at(int i) const { return atoms_[static_cast<size_t>(i)]; }
  std::optional<int> index_of(const Atom& a) const;

  bool operator==(const Vocabulary&) const = default;

 private:
  std::vector<Atom> atoms_;
};

inline bool world_bit(World w, int n, int atom_index) {
  return (w >> (n - 1 - atom_index)) & 1;
}
std::string world_to_string(World w, int n);
World world_from_string(const std::string& bits);

enum class FormulaKind { True, False, Var, Not, And, Or, Implies, Iff };

// Immutable formula tree. Copies share nodes.
class Formula {
 public:
  Formula();  // defaults to `true`

  static Formula truth();
  static Formula falsity();
  static Formula atom(Atom a);
  static Formula negate(Formula f);
  static Formula conj(Formula a, Formula b);
  static Formula disj(Formula a, Formula b);
  static Formula implies(Formula a, Formula b);
  static Formula iff(Formula a, Formula b);
  static Formula conj_all(const std::vector<Formula>& fs);  // true when empty

  FormulaKind kind() const;
  const Atom& var() const;  // kind() == Var
  Formula lhs() const;      // binary nodes
  Formula rhs() const;
  Formula child() const;    // Not

  std::string print() const;  // minimal-parentheses round-trippable text
  bool same_as(const Formula& other) const;  // structural equality

  struct Node;  // implementation detail, public for the factories

 private:
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

Formula parse_formula(const std::string& text, const Vocabulary& vocab);

bool eval(World w, const Formula& f, const Vocabulary& vocab);

struct Theory {
  std::vector<Formula> formulas;
};

// The theory-constrained world universe everything downstream works in.
struct WorldSpace {
  Vocabulary vocab;
  Theory theory;
  std::vector<World> worlds;  // ascending; exactly the models of the theory

  static std::shared_ptr<const WorldSpace> make(Vocabulary vocab,
                                                Theory theory);

  int size() const { return static_cast<int>(worlds.size()); }
  bool contains(World w) const;
  int index_of(World w) const;  // -1 when absent
  std::vector<World> models(const Formula& f) const;
  // Bitmask over universe positions; requires size() <= 64.
  std::uint64_t models_mask(const Formula& f) const;
  std::vector<World> unmask(std::uint64_t mask) const;
  std::uint64_t mask_of(const std::vector<World>& ws) const;
};

using SpacePtr = std::shared_ptr<const WorldSpace>;

// Canonical full-DNF formula whose models are exactly `worlds`
// (minterms ascending, atoms in vocabulary order); `false` when empty.
Formula char_formula_of(const SpacePtr& space, const std::vector<World>& worlds);
Formula char_formula_of_world(const SpacePtr& space, World w);

// Extensional belief set: the models of the believed formulas.
class BeliefSet {
 public:
  BeliefSet(SpacePtr space, std::vector<World> worlds);
  static BeliefSet from_formula(const SpacePtr& space, const Formula& f);
  static BeliefSet inconsistent(const SpacePtr& space);
  static BeliefSet full(const SpacePtr& space);

  const SpacePtr& space() const { return space_; }
  const std::vector<World>& worlds() const { return worlds_; }
  bool empty() const { return worlds_.empty(); }

  bool contains(const Formula& f) const;  // f holds in every world
  bool is_complete() const { return worlds_.size() == 1; }
  BeliefSet cl_add(const Formula& f) const;  // Cl(K + f) = worlds /\ models(f)
  Formula char_formula() const;

  bool operator==(const BeliefSet& other) const;

 private:
  SpacePtr space_;
  std::vector<World> worlds_;  // sorted ascending
};

std::vector<World> intersect_worlds(const std::vector<World>& a,
                                    const std::vector<World>& b);
std::vector<World> union_worlds(const std::vector<World>& a,
                                const std::vector<World>& b);
std::vector<World> subtract_worlds(const std::vector<World>& a,
                                   const std::vector<World>& b);
bool subset_worlds(const std::vector<World>& a, const std::vector<World>& b);

}  // namespace bcs
