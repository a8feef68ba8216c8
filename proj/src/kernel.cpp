#include "bcs/kernel.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace bcs {

std::string Atom::display() const {
  if (timestamp) return name + "@" + std::to_string(*timestamp);
  return name;
}

Vocabulary::Vocabulary(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (static_cast<int>(atoms_.size()) > kMaxAtoms)
    throw VocabularyTooLarge(static_cast<int>(atoms_.size()));
  for (size_t i = 0; i < atoms_.size(); ++i) {
    if (atoms_[i].name.empty())
      throw std::invalid_argument("empty atom name");
    for (size_t j = i + 1; j < atoms_.size(); ++j)
      if (atoms_[i] == atoms_[j])
        throw std::invalid_argument("duplicate atom: " + atoms_[i].display());
  }
}

Vocabulary Vocabulary::from_names(const std::vector<std::string>& names) {
  std::vector<Atom> atoms;
  atoms.reserve(names.size());
  for (const auto& n : names) {
    auto at = n.find('@');
    if (at == std::string::npos) {
      atoms.push_back(Atom{n, std::nullopt});
    } else {
      atoms.push_back(Atom{n.substr(0, at), std::stoi(n.substr(at + 1))});
    }
  }
  return Vocabulary(std::move(atoms));
}

std::optional<int> Vocabulary::index_of(const Atom& a) const {
  for (size_t i = 0; i < atoms_.size(); ++i)
    if (atoms_[i] == a) return static_cast<int>(i);
  return std::nullopt;
}

std::string world_to_string(World w, int n) {
  std::string s(static_cast<size_t>(n), '0');
  for (int i = 0; i < n; ++i)
    if (world_bit(w, n, i)) s[static_cast<size_t>(i)] = '1';
  return s;
}

World world_from_string(const std::string& bits) {
  World w = 0;
  for (char c : bits) {
    if (c != '0' && c != '1')
      throw std::invalid_argument("bad world bitstring: " + bits);
    w = static_cast<World>((w << 1) | (c == '1' ? 1 : 0));
  }
  return w;
}

// ---------------------------------------------------------------------------
// Formula

struct Formula::Node {
  FormulaKind kind = FormulaKind::True;
  Atom atom;                         // Var
  std::shared_ptr<const Node> a, b;  // children (b unused for Not)
};

namespace {
std::shared_ptr<const Formula::Node> leaf_node(FormulaKind k) {
  auto n = std::make_shared<Formula::Node>();
  n->kind = k;
  return n;
}
const std::shared_ptr<const Formula::Node>& true_node() {
  static const auto n = leaf_node(FormulaKind::True);
  return n;
}
}  // namespace

Formula::Formula() : node_(true_node()) {}

Formula Formula::truth() { return Formula(true_node()); }
Formula Formula::falsity() {
  static const auto n = leaf_node(FormulaKind::False);
  return Formula(n);
}
Formula Formula::atom(Atom a) {
  auto n = std::make_shared<Node>();
  n->kind = FormulaKind::Var;
  n->atom = std::move(a);
  return Formula(std::move(n));
}

Formula Formula::negate(Formula f) {
  auto n = std::make_shared<Node>();
  n->kind = FormulaKind::Not;
  n->a = f.node_;
  return Formula(std::move(n));
}
Formula Formula::conj(Formula a, Formula b) {
  auto n = std::make_shared<Node>();
  n->kind = FormulaKind::And;
  n->a = a.node_;
  n->b = b.node_;
  return Formula(std::move(n));
}
Formula Formula::disj(Formula a, Formula b) {
  auto n = std::make_shared<Node>();
  n->kind = FormulaKind::Or;
  n->a = a.node_;
  n->b = b.node_;
  return Formula(std::move(n));
}
Formula Formula::implies(Formula a, Formula b) {
  auto n = std::make_shared<Node>();
  n->kind = FormulaKind::Implies;
  n->a = a.node_;
  n->b = b.node_;
  return Formula(std::move(n));
}
Formula Formula::iff(Formula a, Formula b) {
  auto n = std::make_shared<Node>();
  n->kind = FormulaKind::Iff;
  n->a = a.node_;
  n->b = b.node_;
  return Formula(std::move(n));
}
Formula Formula::conj_all(const std::vector<Formula>& fs) {
  if (fs.empty()) return truth();
  Formula acc = fs.front();
  for (size_t i = 1; i < fs.size(); ++i) acc = conj(acc, fs[i]);
  return acc;
}

FormulaKind Formula::kind() const { return node_->kind; }
const Atom& Formula::var() const { return node_->atom; }
Formula Formula::lhs() const { return Formula(node_->a); }
Formula Formula::rhs() const { return Formula(node_->b); }
Formula Formula::child() const { return Formula(node_->a); }

namespace {

// Higher binds tighter.
int precedence(FormulaKind k) {
  switch (k) {
    case FormulaKind::Not: return 5;
    case FormulaKind::And: return 4;
    case FormulaKind::Or: return 3;
    case FormulaKind::Implies: return 2;
    case FormulaKind::Iff: return 1;
    default: return 6;
  }
}

void print_rec(const Formula& f, int parent_prec, std::string& out) {
  int prec = precedence(f.kind());
  bool paren = prec < parent_prec;
  if (paren) out += '(';
  switch (f.kind()) {
    case FormulaKind::True: out += "true"; break;
    case FormulaKind::False: out += "false"; break;
    case FormulaKind::Var: out += f.var().display(); break;
    case FormulaKind::Not:
      out += '!';
      print_rec(f.child(), prec + 1, out);
      break;
    case FormulaKind::And:
      print_rec(f.lhs(), prec, out);
      out += " & ";
      print_rec(f.rhs(), prec + 1, out);
      break;
    case FormulaKind::Or:
      print_rec(f.lhs(), prec, out);
      out += " | ";
      print_rec(f.rhs(), prec + 1, out);
      break;
    case FormulaKind::Implies:
      print_rec(f.lhs(), prec + 1, out);
      out += " => ";
      print_rec(f.rhs(), prec, out);  // right-associative
      break;
    case FormulaKind::Iff:
      print_rec(f.lhs(), prec, out);
      out += " <=> ";
      print_rec(f.rhs(), prec + 1, out);
      break;
  }
  if (paren) out += ')';
}

}  // namespace

std::string Formula::print() const {
  std::string out;
  print_rec(*this, 0, out);
  return out;
}

bool Formula::same_as(const Formula& other) const {
  if (node_ == other.node_) return true;
  if (kind() != other.kind()) return false;
  switch (kind()) {
    case FormulaKind::True:
    case FormulaKind::False: return true;
    case FormulaKind::Var: return var() == other.var();
    case FormulaKind::Not: return child().same_as(other.child());
    default:
      return lhs().same_as(other.lhs()) && rhs().same_as(other.rhs());
  }
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok { End, LParen, RParen, Not, And, Or, Implies, Iff, True, False,
                 Ident };

struct Token {
  Tok kind;
  std::string text;
  std::optional<int> timestamp;
  int index;  // 1-based token position
};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  int count = 0;

  explicit Lexer(const std::string& s) : src(s) {}

  Token next() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
      ++pos;
    ++count;
    if (pos >= src.size()) return {Tok::End, "", std::nullopt, count};
    char c = src[pos];
    auto one = [&](Tok k, const char* t) {
      ++pos;
      return Token{k, t, std::nullopt, count};
    };
    switch (c) {
      case '(': return one(Tok::LParen, "(");
      case ')': return one(Tok::RParen, ")");
      case '!': return one(Tok::Not, "!");
      case '&': return one(Tok::And, "&");
      case '|': return one(Tok::Or, "|");
      case '=':
        if (src.compare(pos, 2, "=>") == 0) {
          pos += 2;
          return Token{Tok::Implies, "=>", std::nullopt, count};
        }
        throw SyntaxError("expected '=>' at token " + std::to_string(count),
                          count);
      case '<':
        if (src.compare(pos, 3, "<=>") == 0) {
          pos += 3;
          return Token{Tok::Iff, "<=>", std::nullopt, count};
        }
        throw SyntaxError("expected '<=>' at token " + std::to_string(count),
                          count);
      default: break;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos;
      while (pos < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[pos])) ||
              src[pos] == '_'))
        ++pos;
      std::string name = src.substr(start, pos - start);
      if (name == "true") return {Tok::True, name, std::nullopt, count};
      if (name == "false") return {Tok::False, name, std::nullopt, count};
      std::optional<int> ts;
      if (pos < src.size() && src[pos] == '@') {
        ++pos;
        size_t dstart = pos;
        while (pos < src.size() &&
               std::isdigit(static_cast<unsigned char>(src[pos])))
          ++pos;
        if (pos == dstart)
          throw SyntaxError("expected timestamp digits at token " +
                                std::to_string(count),
                            count);
        ts = std::stoi(src.substr(dstart, pos - dstart));
      }
      return {Tok::Ident, name, ts, count};
    }
    throw SyntaxError(std::string("unexpected character '") + c +
                          "' at token " + std::to_string(count),
                      count);
  }
};

struct Parser {
  Lexer lex;
  Token cur;
  const Vocabulary& vocab;

  Parser(const std::string& s, const Vocabulary& v) : lex(s), vocab(v) {
    cur = lex.next();
  }

  void advance() { cur = lex.next(); }

  [[noreturn]] void fail(const std::string& expected) {
    throw SyntaxError("expected " + expected + " at token " +
                          std::to_string(cur.index),
                      cur.index);
  }

  Formula parse_iff() {
    Formula f = parse_implies();
    while (cur.kind == Tok::Iff) {
      advance();
      f = Formula::iff(f, parse_implies());
    }
    return f;
  }

  Formula parse_implies() {
    Formula f = parse_or();
    if (cur.kind == Tok::Implies) {
      advance();
      return Formula::implies(f, parse_implies());
    }
    return f;
  }

  Formula parse_or() {
    Formula f = parse_and();
    while (cur.kind == Tok::Or) {
      advance();
      f = Formula::disj(f, parse_and());
    }
    return f;
  }

  Formula parse_and() {
    Formula f = parse_unary();
    while (cur.kind == Tok::And) {
      advance();
      f = Formula::conj(f, parse_unary());
    }
    return f;
  }

  Formula parse_unary() {
    switch (cur.kind) {
      case Tok::Not: {
        advance();
        return Formula::negate(parse_unary());
      }
      case Tok::True: advance(); return Formula::truth();
      case Tok::False: advance(); return Formula::falsity();
      case Tok::LParen: {
        advance();
        Formula f = parse_iff();
        if (cur.kind != Tok::RParen) fail("')'");
        advance();
        return f;
      }
      case Tok::Ident: {
        Atom a{cur.text, cur.timestamp};
        if (!vocab.index_of(a)) throw UnknownAtom(a.display());
        advance();
        return Formula::atom(std::move(a));
      }
      default: fail("a formula");
    }
  }
};

}  // namespace

Formula parse_formula(const std::string& text, const Vocabulary& vocab) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw SyntaxError("empty formula", 1);
  Parser p(text, vocab);
  Formula f = p.parse_iff();
  if (p.cur.kind != Tok::End) p.fail("end of input");
  return f;
}

bool eval(World w, const Formula& f, const Vocabulary& vocab) {
  switch (f.kind()) {
    case FormulaKind::True: return true;
    case FormulaKind::False: return false;
    case FormulaKind::Var: {
      auto idx = vocab.index_of(f.var());
      if (!idx) throw UnknownAtom(f.var().display());
      return world_bit(w, vocab.size(), *idx);
    }
    case FormulaKind::Not: return !eval(w, f.child(), vocab);
    case FormulaKind::And:
      return eval(w, f.lhs(), vocab) && eval(w, f.rhs(), vocab);
    case FormulaKind::Or:
      return eval(w, f.lhs(), vocab) || eval(w, f.rhs(), vocab);
    case FormulaKind::Implies:
      return !eval(w, f.lhs(), vocab) || eval(w, f.rhs(), vocab);
    case FormulaKind::Iff:
      return eval(w, f.lhs(), vocab) == eval(w, f.rhs(), vocab);
  }
  return false;
}

// ---------------------------------------------------------------------------
// WorldSpace

std::shared_ptr<const WorldSpace> WorldSpace::make(Vocabulary vocab,
                                                   Theory theory) {
  auto space = std::make_shared<WorldSpace>();
  space->vocab = vocab;
  space->theory = theory;
  const int n = vocab.size();
  const std::uint32_t count = 1u << n;
  for (std::uint32_t w = 0; w < count; ++w) {
    bool ok = true;
    for (const auto& f : theory.formulas)
      if (!eval(static_cast<World>(w), f, vocab)) {
        ok = false;
        break;
      }
    if (ok) space->worlds.push_back(static_cast<World>(w));
  }
  if (space->worlds.empty()) throw EmptyTheoryModels();
  return space;
}

bool WorldSpace::contains(World w) const { return index_of(w) >= 0; }

int WorldSpace::index_of(World w) const {
  auto it = std::lower_bound(worlds.begin(), worlds.end(), w);
  if (it == worlds.end() || *it != w) return -1;
  return static_cast<int>(it - worlds.begin());
}

std::vector<World> WorldSpace::models(const Formula& f) const {
  std::vector<World> out;
  for (World w : worlds)
    if (eval(w, f, vocab)) out.push_back(w);
  return out;
}

std::uint64_t WorldSpace::models_mask(const Formula& f) const {
  if (size() > 64)
    throw std::logic_error("universe too large for mask operations");
  std::uint64_t m = 0;
  for (int i = 0; i < size(); ++i)
    if (eval(worlds[static_cast<size_t>(i)], f, vocab)) m |= 1ull << i;
  return m;
}

std::vector<World> WorldSpace::unmask(std::uint64_t mask) const {
  std::vector<World> out;
  for (int i = 0; i < size(); ++i)
    if (mask >> i & 1) out.push_back(worlds[static_cast<size_t>(i)]);
  return out;
}

std::uint64_t WorldSpace::mask_of(const std::vector<World>& ws) const {
  if (size() > 64)
    throw std::logic_error("universe too large for mask operations");
  std::uint64_t m = 0;
  for (World w : ws) {
    int i = index_of(w);
    if (i >= 0) m |= 1ull << i;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Characteristic formulas and belief sets

Formula char_formula_of_world(const SpacePtr& space, World w) {
  const int n = space->vocab.size();
  Formula term;
  bool first = true;
  for (int i = 0; i < n; ++i) {
    Formula lit = Formula::atom(space->vocab.at(i));
    if (!world_bit(w, n, i)) lit = Formula::negate(lit);
    term = first ? lit : Formula::conj(term, lit);
    first = false;
  }
  if (first) return Formula::truth();  // empty vocabulary
  return term;
}

Formula char_formula_of(const SpacePtr& space,
                        const std::vector<World>& worlds) {
  if (worlds.empty()) return Formula::falsity();
  std::vector<World> sorted = worlds;
  std::sort(sorted.begin(), sorted.end());
  Formula dnf;
  bool first = true;
  for (World w : sorted) {
    Formula term = char_formula_of_world(space, w);
    dnf = first ? term : Formula::disj(dnf, term);
    first = false;
  }
  return dnf;
}

BeliefSet::BeliefSet(SpacePtr space, std::vector<World> worlds)
    : space_(std::move(space)), worlds_(std::move(worlds)) {
  std::sort(worlds_.begin(), worlds_.end());
  worlds_.erase(std::unique(worlds_.begin(), worlds_.end()), worlds_.end());
  for (World w : worlds_)
    if (!space_->contains(w))
      throw std::invalid_argument("belief world outside the universe: " +
                                  world_to_string(w, space_->vocab.size()));
}

BeliefSet BeliefSet::from_formula(const SpacePtr& space, const Formula& f) {
  return BeliefSet(space, space->models(f));
}
BeliefSet BeliefSet::inconsistent(const SpacePtr& space) {
  return BeliefSet(space, {});
}
BeliefSet BeliefSet::full(const SpacePtr& space) {
  return BeliefSet(space, space->worlds);
}

bool BeliefSet::contains(const Formula& f) const {
  for (World w : worlds_)
    if (!eval(w, f, space_->vocab)) return false;
  return true;
}

BeliefSet BeliefSet::cl_add(const Formula& f) const {
  std::vector<World> out;
  for (World w : worlds_)
    if (eval(w, f, space_->vocab)) out.push_back(w);
  return BeliefSet(space_, std::move(out));
}

Formula BeliefSet::char_formula() const {
  return char_formula_of(space_, worlds_);
}

bool BeliefSet::operator==(const BeliefSet& other) const {
  return worlds_ == other.worlds_;
}

std::vector<World> intersect_worlds(const std::vector<World>& a,
                                    const std::vector<World>& b) {
  std::vector<World> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

std::vector<World> union_worlds(const std::vector<World>& a,
                                const std::vector<World>& b) {
  std::vector<World> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

std::vector<World> subtract_worlds(const std::vector<World>& a,
                                   const std::vector<World>& b) {
  std::vector<World> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

bool subset_worlds(const std::vector<World>& a, const std::vector<World>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace bcs
