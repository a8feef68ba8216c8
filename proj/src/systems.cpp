#include "bcs/systems.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace bcs {

// ---------------------------------------------------------------------------
// SystemModel basics

void SystemModel::finalize() {
  const size_t r = runs.size();
  for (size_t i = 0; i < r; ++i) {
    if (static_cast<int>(runs[i].env.size()) != horizon + 1 ||
        static_cast<int>(runs[i].obs.size()) != horizon)
      throw std::invalid_argument("run " + std::to_string(i) +
                                  " has the wrong shape");
    for (int o : runs[i].obs)
      if (o < 0 || o >= static_cast<int>(alphabet.size()))
        throw std::invalid_argument("run " + std::to_string(i) +
                                    " references a missing observation");
  }
  cell_of.assign(static_cast<size_t>(horizon) + 1, std::vector<int>(r, -1));
  cells.assign(static_cast<size_t>(horizon) + 1, {});
  for (int m = 0; m <= horizon; ++m) {
    auto& level = cells[static_cast<size_t>(m)];
    std::map<std::vector<int>, int> keyed;
    for (size_t i = 0; i < r; ++i) {
      std::vector<int> key(runs[i].obs.begin(), runs[i].obs.begin() + m);
      auto [it, fresh] =
          keyed.try_emplace(std::move(key), static_cast<int>(level.size()));
      if (fresh) level.push_back({});
      cell_of[static_cast<size_t>(m)][i] = it->second;
      level[static_cast<size_t>(it->second)].push_back(static_cast<int>(i));
    }
  }
}

int SystemModel::alphabet_index(const Formula& f) const {
  for (size_t i = 0; i < alphabet.size(); ++i)
    if (alphabet[i].same_as(f)) return static_cast<int>(i);
  return -1;
}

const Formula& SystemModel::obs_at(int run, int time) const {
  return alphabet[static_cast<size_t>(
      runs[static_cast<size_t>(run)].obs[static_cast<size_t>(time - 1)])];
}

namespace {

// First env divergence with a strictly smaller change wins; sequences that
// differ at time 0 or never differ are unrelated.
bool lex_env_precedes(const UpdateStructure& u, const std::vector<World>& a,
                      const std::vector<World>& b) {
  if (a[0] != b[0]) return false;
  size_t m = 0;
  while (m + 1 < a.size() && a[m + 1] == b[m + 1]) ++m;
  if (m + 1 >= a.size()) return false;
  return distance_lt(u, u.d(a[m], a[m + 1]), u.d(b[m], b[m + 1]));
}

std::int64_t min_rank_of(const SystemModel& sys, const std::vector<int>& a) {
  std::int64_t best = kInfRank;
  for (int r : a) best = std::min(best, sys.rank[static_cast<size_t>(r)]);
  return best;
}

}  // namespace

bool run_precedes(const SystemModel& sys, int a, int b) {
  switch (sys.prior) {
    case PriorKind::Ranked:
      return sys.rank[static_cast<size_t>(a)] <
             sys.rank[static_cast<size_t>(b)];
    case PriorKind::Lex:
      return lex_env_precedes(*sys.lex_structure,
                              sys.runs[static_cast<size_t>(a)].env,
                              sys.runs[static_cast<size_t>(b)].env);
    case PriorKind::Pref:
      return (sys.pref_rows[static_cast<size_t>(b)]
                           [static_cast<size_t>(a) / 64] >>
              (static_cast<size_t>(a) % 64)) &
             1;
  }
  return false;
}

bool run_set_ge(const SystemModel& sys, const std::vector<int>& a,
                const std::vector<int>& b) {
  if (sys.prior == PriorKind::Ranked)
    return min_rank_of(sys, a) <= min_rank_of(sys, b);
  // Dominance: every b in B-A needs a witness a' in A below it with nothing
  // of B-A below a'.
  std::vector<bool> in_a(sys.runs.size(), false);
  for (int r : a) in_a[static_cast<size_t>(r)] = true;
  std::vector<int> diff;
  for (int r : b)
    if (!in_a[static_cast<size_t>(r)]) diff.push_back(r);
  if (diff.empty()) return true;
  std::vector<signed char> undominated(sys.runs.size(), -1);
  auto is_undominated = [&](int r) {
    auto& slot = undominated[static_cast<size_t>(r)];
    if (slot < 0) {
      slot = 1;
      for (int d : diff)
        if (run_precedes(sys, d, r)) {
          slot = 0;
          break;
        }
    }
    return slot == 1;
  };
  for (int e : diff) {
    bool witnessed = false;
    for (int w : a)
      if (run_precedes(sys, w, e) && is_undominated(w)) {
        witnessed = true;
        break;
      }
    if (!witnessed) return false;
  }
  return true;
}

bool run_set_bottom(const SystemModel& sys, const std::vector<int>& a) {
  if (sys.prior == PriorKind::Ranked) return min_rank_of(sys, a) == kInfRank;
  return a.empty();
}

// ---------------------------------------------------------------------------
// Kpt formulas

struct KptFormula::Node {
  KptKind kind = KptKind::Prop;
  Formula prop;
  std::optional<KptFormula> a, b;
};

KptFormula KptFormula::make(KptKind k, Formula prop, const KptFormula* a,
                            const KptFormula* b) {
  KptFormula r;
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->prop = std::move(prop);
  if (a) n->a = *a;
  if (b) n->b = *b;
  r.node_ = std::move(n);
  return r;
}

KptFormula KptFormula::prop(Formula f) {
  return make(KptKind::Prop, std::move(f), nullptr, nullptr);
}
KptFormula KptFormula::learn(Formula f) {
  return make(KptKind::Learn, std::move(f), nullptr, nullptr);
}
KptFormula KptFormula::negate(KptFormula f) {
  return make(KptKind::Not, {}, &f, nullptr);
}
KptFormula KptFormula::conj(KptFormula a, KptFormula b) {
  return make(KptKind::And, {}, &a, &b);
}
KptFormula KptFormula::disj(KptFormula a, KptFormula b) {
  return make(KptKind::Or, {}, &a, &b);
}
KptFormula KptFormula::implies(KptFormula a, KptFormula b) {
  return make(KptKind::Implies, {}, &a, &b);
}
KptFormula KptFormula::iff(KptFormula a, KptFormula b) {
  return make(KptKind::Iff, {}, &a, &b);
}
KptFormula KptFormula::know(KptFormula f) {
  return make(KptKind::Know, {}, &f, nullptr);
}
KptFormula KptFormula::belief(KptFormula f) {
  return make(KptKind::Belief, {}, &f, nullptr);
}
KptFormula KptFormula::next(KptFormula f) {
  return make(KptKind::Next, {}, &f, nullptr);
}
KptFormula KptFormula::cond(KptFormula a, KptFormula b) {
  return make(KptKind::Cond, {}, &a, &b);
}

KptKind KptFormula::kind() const { return node_->kind; }
const Formula& KptFormula::prop_formula() const { return node_->prop; }
const KptFormula& KptFormula::lhs() const { return *node_->a; }
const KptFormula& KptFormula::rhs() const { return *node_->b; }

std::string KptFormula::print() const {
  switch (kind()) {
    case KptKind::Prop: return prop_formula().print();
    case KptKind::Learn: return "learn(" + prop_formula().print() + ")";
    case KptKind::Not: return "!(" + lhs().print() + ")";
    case KptKind::And:
      return "(" + lhs().print() + " & " + rhs().print() + ")";
    case KptKind::Or: return "(" + lhs().print() + " | " + rhs().print() + ")";
    case KptKind::Implies:
      return "(" + lhs().print() + " => " + rhs().print() + ")";
    case KptKind::Iff:
      return "(" + lhs().print() + " <=> " + rhs().print() + ")";
    case KptKind::Know: return "K(" + lhs().print() + ")";
    case KptKind::Belief: return "B(" + lhs().print() + ")";
    case KptKind::Next: return "X(" + lhs().print() + ")";
    case KptKind::Cond:
      return "(" + lhs().print() + " -> " + rhs().print() + ")";
  }
  return "";
}

// ---------------------------------------------------------------------------
// Kpt parser: the propositional grammar plus K/B/X/learn and "->".

namespace {

struct KptParser {
  const std::string& src;
  const Vocabulary& vocab;
  size_t pos = 0;
  int count = 0;

  struct Tk {
    enum Kind { End, LParen, RParen, Not, And, Or, Implies, Iff, Cond, Word };
    Kind kind;
    std::string text;
    int index;
  };
  Tk cur;

  KptParser(const std::string& s, const Vocabulary& v) : src(s), vocab(v) {
    advance();
  }

  void advance() {
    while (pos < src.size() &&
           std::isspace(static_cast<unsigned char>(src[pos])))
      ++pos;
    ++count;
    if (pos >= src.size()) {
      cur = {Tk::End, "", count};
      return;
    }
    char c = src[pos];
    switch (c) {
      case '(': ++pos; cur = {Tk::LParen, "(", count}; return;
      case ')': ++pos; cur = {Tk::RParen, ")", count}; return;
      case '!': ++pos; cur = {Tk::Not, "!", count}; return;
      case '&': ++pos; cur = {Tk::And, "&", count}; return;
      case '|': ++pos; cur = {Tk::Or, "|", count}; return;
      case '=':
        if (src.compare(pos, 2, "=>") == 0) {
          pos += 2;
          cur = {Tk::Implies, "=>", count};
          return;
        }
        throw SyntaxError("expected '=>' at token " + std::to_string(count),
                          count);
      case '<':
        if (src.compare(pos, 3, "<=>") == 0) {
          pos += 3;
          cur = {Tk::Iff, "<=>", count};
          return;
        }
        throw SyntaxError("expected '<=>' at token " + std::to_string(count),
                          count);
      case '-':
        if (src.compare(pos, 2, "->") == 0) {
          pos += 2;
          cur = {Tk::Cond, "->", count};
          return;
        }
        throw SyntaxError("expected '->' at token " + std::to_string(count),
                          count);
      default: break;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos;
      while (pos < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[pos])) ||
              src[pos] == '_' || src[pos] == '@'))
        ++pos;
      cur = {Tk::Word, src.substr(start, pos - start), count};
      return;
    }
    throw SyntaxError(std::string("unexpected character '") + c +
                          "' at token " + std::to_string(count),
                      count);
  }

  [[noreturn]] void fail(const std::string& expected) {
    throw SyntaxError("expected " + expected + " at token " +
                          std::to_string(cur.index),
                      cur.index);
  }

  // Collects the balanced-parenthesis argument of K(...)/B(...)/learn(...).
  std::string paren_argument() {
    if (cur.kind != Tk::LParen) fail("'('");
    size_t start = pos;
    int depth = 1;
    while (pos < src.size() && depth > 0) {
      if (src[pos] == '(') ++depth;
      if (src[pos] == ')') --depth;
      ++pos;
    }
    if (depth != 0) fail("')'");
    std::string inner = src.substr(start, pos - start - 1);
    advance();
    return inner;
  }

  KptFormula parse_cond() {
    KptFormula f = parse_iff();
    if (cur.kind == Tk::Cond) {
      advance();
      return KptFormula::cond(std::move(f), parse_cond());
    }
    return f;
  }

  KptFormula parse_iff() {
    KptFormula f = parse_implies();
    while (cur.kind == Tk::Iff) {
      advance();
      f = KptFormula::iff(std::move(f), parse_implies());
    }
    return f;
  }

  KptFormula parse_implies() {
    KptFormula f = parse_or();
    if (cur.kind == Tk::Implies) {
      advance();
      return KptFormula::implies(std::move(f), parse_implies());
    }
    return f;
  }

  KptFormula parse_or() {
    KptFormula f = parse_and();
    while (cur.kind == Tk::Or) {
      advance();
      f = KptFormula::disj(std::move(f), parse_and());
    }
    return f;
  }

  KptFormula parse_and() {
    KptFormula f = parse_unary();
    while (cur.kind == Tk::And) {
      advance();
      f = KptFormula::conj(std::move(f), parse_unary());
    }
    return f;
  }

  KptFormula parse_unary() {
    switch (cur.kind) {
      case Tk::Not: {
        advance();
        return KptFormula::negate(parse_unary());
      }
      case Tk::LParen: {
        advance();
        KptFormula f = parse_cond();
        if (cur.kind != Tk::RParen) fail("')'");
        advance();
        return f;
      }
      case Tk::Word: {
        std::string word = cur.text;
        advance();
        if (cur.kind == Tk::LParen &&
            (word == "K" || word == "B" || word == "X" || word == "learn")) {
          if (word == "learn") {
            std::string inner = paren_argument();
            return KptFormula::learn(parse_formula(inner, vocab));
          }
          advance();
          KptFormula f = parse_cond();
          if (cur.kind != Tk::RParen) fail("')'");
          advance();
          if (word == "K") return KptFormula::know(std::move(f));
          if (word == "B") return KptFormula::belief(std::move(f));
          return KptFormula::next(std::move(f));
        }
        if (word == "true") return KptFormula::prop(Formula::truth());
        if (word == "false") return KptFormula::prop(Formula::falsity());
        return KptFormula::prop(parse_formula(word, vocab));
      }
      default: fail("a formula");
    }
  }
};

}  // namespace

KptFormula parse_kpt(const std::string& text, const Vocabulary& vocab) {
  KptParser p(text, vocab);
  KptFormula f = p.parse_cond();
  if (p.cur.kind != KptParser::Tk::End) p.fail("end of input");
  return f;
}

// ---------------------------------------------------------------------------
// Model checking

std::vector<Point> knowledge_cell(const SystemModel& sys, const Point& p) {
  std::vector<Point> out;
  int c = sys.cell_of[static_cast<size_t>(p.time)][static_cast<size_t>(p.run)];
  for (int r : sys.cells[static_cast<size_t>(p.time)][static_cast<size_t>(c)])
    out.push_back({r, p.time});
  return out;
}

namespace {

// Comparison of point sets at a fixed time: the override measure if present,
// otherwise the prior on the underlying run sets.
bool point_set_ge(const SystemModel& sys, int time, const std::vector<int>& a,
                  const std::vector<int>& b) {
  if (sys.point_rank_override) {
    const auto& v = (*sys.point_rank_override)[static_cast<size_t>(time)];
    auto mn = [&](const std::vector<int>& s) {
      std::int64_t best = kInfRank;
      for (int r : s) best = std::min(best, v[static_cast<size_t>(r)]);
      return best;
    };
    return mn(a) <= mn(b);
  }
  return run_set_ge(sys, a, b);
}

bool point_set_bottom(const SystemModel& sys, int time,
                      const std::vector<int>& a) {
  if (sys.point_rank_override) {
    const auto& v = (*sys.point_rank_override)[static_cast<size_t>(time)];
    for (int r : a)
      if (v[static_cast<size_t>(r)] != kInfRank) return false;
    return true;
  }
  return run_set_bottom(sys, a);
}

}  // namespace

bool model_check(const SystemModel& sys, const Point& p, const KptFormula& f) {
  switch (f.kind()) {
    case KptKind::Prop:
      return eval(sys.env_at(p), f.prop_formula(), sys.space->vocab);
    case KptKind::Learn:
      return p.time >= 1 && sys.obs_at(p.run, p.time).same_as(f.prop_formula());
    case KptKind::Not: return !model_check(sys, p, f.lhs());
    case KptKind::And:
      return model_check(sys, p, f.lhs()) && model_check(sys, p, f.rhs());
    case KptKind::Or:
      return model_check(sys, p, f.lhs()) || model_check(sys, p, f.rhs());
    case KptKind::Implies:
      return !model_check(sys, p, f.lhs()) || model_check(sys, p, f.rhs());
    case KptKind::Iff:
      return model_check(sys, p, f.lhs()) == model_check(sys, p, f.rhs());
    case KptKind::Know: {
      for (const Point& q : knowledge_cell(sys, p))
        if (!model_check(sys, q, f.lhs())) return false;
      return true;
    }
    case KptKind::Next: {
      if (p.time + 1 > sys.horizon) throw HorizonExceeded(p.time + 1);
      return model_check(sys, {p.run, p.time + 1}, f.lhs());
    }
    case KptKind::Belief:
    case KptKind::Cond: {
      const bool is_belief = f.kind() == KptKind::Belief;
      std::vector<int> sat_a, sat_ab, sat_anb;
      for (const Point& q : knowledge_cell(sys, p)) {
        bool in_a = is_belief || model_check(sys, q, f.lhs());
        if (!in_a) continue;
        sat_a.push_back(q.run);
        const KptFormula& target = is_belief ? f.lhs() : f.rhs();
        if (model_check(sys, q, target))
          sat_ab.push_back(q.run);
        else
          sat_anb.push_back(q.run);
      }
      if (point_set_bottom(sys, p.time, sat_a)) return true;
      return point_set_ge(sys, p.time, sat_ab, sat_anb) &&
             !point_set_ge(sys, p.time, sat_anb, sat_ab);
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Beliefs at local states

namespace {

// Minimal-plausibility runs within a cell. For lex priors only the env
// sequence matters, so dominance is decided between distinct sequences.
std::vector<int> minimal_runs(const SystemModel& sys,
                              const std::vector<int>& cell) {
  std::vector<int> out;
  if (cell.empty()) return out;
  if (sys.prior == PriorKind::Ranked) {
    std::int64_t best = min_rank_of(sys, cell);
    if (best == kInfRank) return out;
    for (int r : cell)
      if (sys.rank[static_cast<size_t>(r)] == best) out.push_back(r);
    return out;
  }
  if (sys.prior == PriorKind::Lex) {
    std::map<std::vector<World>, std::vector<int>> seqs;
    for (int r : cell) seqs[sys.runs[static_cast<size_t>(r)].env].push_back(r);
    for (auto& [seq, members] : seqs) {
      bool dominated = false;
      for (auto& [other, om] : seqs)
        if (lex_env_precedes(*sys.lex_structure, other, seq)) {
          dominated = true;
          break;
        }
      if (!dominated)
        out.insert(out.end(), members.begin(), members.end());
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  for (int r : cell) {
    bool dominated = false;
    for (int o : cell)
      if (run_precedes(sys, o, r)) {
        dominated = true;
        break;
      }
    if (!dominated) out.push_back(r);
  }
  return out;
}

const std::vector<int>* find_cell(const SystemModel& sys,
                                  const std::vector<int>& obs_indices) {
  int m = static_cast<int>(obs_indices.size());
  if (m > sys.horizon) return nullptr;
  for (const auto& cell : sys.cells[static_cast<size_t>(m)]) {
    const Run& r = sys.runs[static_cast<size_t>(cell.front())];
    if (std::equal(obs_indices.begin(), obs_indices.end(), r.obs.begin()))
      return &cell;
  }
  return nullptr;
}

}  // namespace

BeliefSet bel(const SystemModel& sys,
              const std::vector<Formula>& local_state) {
  std::vector<int> idx;
  for (const Formula& f : local_state) {
    int i = sys.alphabet_index(f);
    if (i < 0) return BeliefSet::inconsistent(sys.space);  // unattainable
    idx.push_back(i);
  }
  const std::vector<int>* cell = find_cell(sys, idx);
  if (!cell) return BeliefSet::inconsistent(sys.space);
  int m = static_cast<int>(idx.size());
  std::vector<World> worlds;
  for (int r : minimal_runs(sys, *cell))
    worlds.push_back(sys.runs[static_cast<size_t>(r)].env[static_cast<size_t>(m)]);
  return BeliefSet(sys.space, std::move(worlds));
}

std::vector<World> states_possible(const SystemModel& sys,
                                   const std::vector<Formula>& local_state) {
  return bel(sys, local_state).worlds();
}

// ---------------------------------------------------------------------------
// Constructors

namespace {

void require_alphabet(const SpacePtr& space,
                      const std::vector<Formula>& alphabet) {
  if (alphabet.empty()) throw EmptyAlphabet();
  bool has_true = false;
  for (const Formula& f : alphabet) {
    auto models = space->models(f);
    if (models.empty())
      throw std::invalid_argument("alphabet member is inconsistent: " +
                                  f.print());
    if (models.size() == space->worlds.size()) has_true = true;
  }
  if (!has_true)
    throw std::invalid_argument("alphabet must contain a tautology");
}

}  // namespace

SystemModel build_revision_system(const RevisionRanking& rk,
                                  const std::vector<Formula>& alphabet, int T,
                                  std::int64_t cap) {
  require_alphabet(rk.space, alphabet);
  SystemModel sys;
  sys.space = rk.space;
  sys.horizon = T;
  sys.alphabet = alphabet;
  sys.prior = PriorKind::Ranked;

  // Observation choices per world, then all length-T sequences.
  std::int64_t total = 0;
  std::vector<std::vector<int>> ok(rk.space->worlds.size());
  for (size_t wi = 0; wi < rk.space->worlds.size(); ++wi) {
    for (size_t a = 0; a < alphabet.size(); ++a)
      if (eval(rk.space->worlds[wi], alphabet[a], rk.space->vocab))
        ok[wi].push_back(static_cast<int>(a));
    std::int64_t c = 1;
    for (int t = 0; t < T; ++t) {
      c *= static_cast<std::int64_t>(ok[wi].size());
      if (c > cap) throw StateSpaceTooLarge("revision system exceeds cap");
    }
    total += c;
    if (total > cap) throw StateSpaceTooLarge("revision system exceeds cap");
  }

  for (size_t wi = 0; wi < rk.space->worlds.size(); ++wi) {
    World w = rk.space->worlds[wi];
    std::vector<int> seq(static_cast<size_t>(T), 0);
    std::vector<size_t> pick(static_cast<size_t>(T), 0);
    bool done = T == 0;
    if (T == 0) {
      sys.runs.push_back({std::vector<World>{w}, {}});
      sys.rank.push_back(rk.rank[wi]);
      continue;
    }
    while (true) {
      for (int t = 0; t < T; ++t)
        seq[static_cast<size_t>(t)] = ok[wi][pick[static_cast<size_t>(t)]];
      sys.runs.push_back(
          {std::vector<World>(static_cast<size_t>(T) + 1, w), seq});
      sys.rank.push_back(rk.rank[wi]);
      int t = T - 1;
      while (t >= 0 && ++pick[static_cast<size_t>(t)] == ok[wi].size()) {
        pick[static_cast<size_t>(t)] = 0;
        --t;
      }
      if (t < 0) break;
    }
    (void)done;
  }
  sys.finalize();
  return sys;
}

SystemModel build_update_system(const UpdateStructure& u,
                                const std::vector<Formula>& alphabet, int T,
                                std::int64_t cap) {
  require_alphabet(u.space, alphabet);
  const std::int64_t nw = u.space->size();
  std::int64_t bound = 1;
  for (int t = 0; t <= T; ++t) {
    bound *= nw;
    if (bound > cap) throw StateSpaceTooLarge("update system exceeds cap");
  }
  for (int t = 0; t < T; ++t) {
    bound *= static_cast<std::int64_t>(alphabet.size());
    if (bound > cap) throw StateSpaceTooLarge("update system exceeds cap");
  }

  SystemModel sys;
  sys.space = u.space;
  sys.horizon = T;
  sys.alphabet = alphabet;
  sys.prior = PriorKind::Lex;
  sys.lex_structure = u;

  std::vector<std::vector<int>> ok(u.space->worlds.size());
  for (size_t wi = 0; wi < u.space->worlds.size(); ++wi)
    for (size_t a = 0; a < alphabet.size(); ++a)
      if (eval(u.space->worlds[wi], alphabet[a], u.space->vocab))
        ok[wi].push_back(static_cast<int>(a));

  // Every env sequence, each obs true at its state.
  std::vector<size_t> env_pick(static_cast<size_t>(T) + 1, 0);
  while (true) {
    std::vector<World> env;
    for (size_t t = 0; t <= static_cast<size_t>(T); ++t)
      env.push_back(u.space->worlds[env_pick[t]]);
    // obs sequences: obs at time k+1 must hold at env[k+1]
    std::vector<size_t> obs_pick(static_cast<size_t>(T), 0);
    while (true) {
      std::vector<int> obs;
      for (size_t t = 0; t < static_cast<size_t>(T); ++t)
        obs.push_back(ok[env_pick[t + 1]][obs_pick[t]]);
      sys.runs.push_back({env, obs});
      size_t t = static_cast<size_t>(T);
      bool carried = true;
      while (t-- > 0) {
        if (++obs_pick[t] < ok[env_pick[t + 1]].size()) {
          carried = false;
          break;
        }
        obs_pick[t] = 0;
      }
      if (T == 0 || carried) break;
    }
    size_t t = static_cast<size_t>(T) + 1;
    bool carried = true;
    while (t-- > 0) {
      if (++env_pick[t] < u.space->worlds.size()) {
        carried = false;
        break;
      }
      env_pick[t] = 0;
    }
    if (carried) break;
  }
  sys.finalize();
  return sys;
}

// ---------------------------------------------------------------------------
// Validators

namespace {

std::string obs_seq_str(const SystemModel& sys, const std::vector<int>& seq) {
  std::ostringstream os;
  os << '<';
  for (size_t i = 0; i < seq.size(); ++i) {
    if (i) os << ',';
    os << sys.alphabet[static_cast<size_t>(seq[i])].print();
  }
  os << '>';
  return os.str();
}

std::string mask_str(const SpacePtr& space, std::uint64_t mask) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (int i = 0; i < space->size(); ++i)
    if (mask >> i & 1) {
      if (!first) os << ',';
      os << world_to_string(space->worlds[static_cast<size_t>(i)],
                            space->vocab.size());
      first = false;
    }
  os << '}';
  return os.str();
}

// Runs whose observation prefix equals seq.
std::vector<int> runs_with_prefix(const SystemModel& sys,
                                  const std::vector<int>& seq) {
  const std::vector<int>* cell = find_cell(sys, seq);
  if (!cell) return {};
  return *cell;
}

// Runs whose env world at each constrained time lies in the given masks.
// masks[i] constrains time i; obs_prefix optionally filters observations.
std::vector<int> event_runs(const SystemModel& sys,
                            const std::vector<std::uint64_t>& masks,
                            const std::vector<int>* obs_prefix) {
  std::vector<int> base;
  if (obs_prefix) {
    base = runs_with_prefix(sys, *obs_prefix);
  } else {
    base.resize(sys.runs.size());
    for (size_t i = 0; i < sys.runs.size(); ++i) base[i] = static_cast<int>(i);
  }
  std::vector<int> out;
  for (int r : base) {
    bool ok = true;
    for (size_t i = 0; i < masks.size(); ++i) {
      World w = sys.runs[static_cast<size_t>(r)].env[i];
      int idx = sys.space->index_of(w);
      if (!(masks[i] >> idx & 1)) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(r);
  }
  return out;
}

std::vector<std::vector<int>> alphabet_sequences(const SystemModel& sys,
                                                 int max_len) {
  std::vector<std::vector<int>> out{{}};
  size_t level_start = 0;
  for (int len = 1; len <= max_len; ++len) {
    size_t level_end = out.size();
    for (size_t i = level_start; i < level_end; ++i)
      for (size_t a = 0; a < sys.alphabet.size(); ++a) {
        auto seq = out[i];
        seq.push_back(static_cast<int>(a));
        out.push_back(std::move(seq));
      }
    level_start = level_end;
  }
  return out;
}

}  // namespace

CheckReport validate_bcs(const SystemModel& sys) {
  CheckReport rep;
  if (sys.runs.empty()) {
    rep.fail("BCS", "system has no runs");
    return rep;
  }
  for (size_t i = 0; i < sys.runs.size(); ++i) {
    const Run& r = sys.runs[i];
    for (World w : r.env)
      if (!sys.space->contains(w)) {
        rep.fail("BCS1", "run " + std::to_string(i) +
                             " visits a world outside the theory universe");
        return rep;
      }
    for (int m = 1; m <= sys.horizon; ++m)
      if (!eval(r.env[static_cast<size_t>(m)],
                sys.obs_at(static_cast<int>(i), m), sys.space->vocab)) {
        rep.fail("BCS4", "run " + std::to_string(i) + " time " +
                             std::to_string(m) + " observes " +
                             sys.obs_at(static_cast<int>(i), m).print() +
                             " falsely");
        return rep;
      }
  }
  // Perfect recall: same cell at m+1 implies same cell at m.
  for (int m = 0; m < sys.horizon; ++m)
    for (const auto& cell : sys.cells[static_cast<size_t>(m) + 1]) {
      int parent = sys.cell_of[static_cast<size_t>(m)]
                              [static_cast<size_t>(cell.front())];
      for (int r : cell)
        if (sys.cell_of[static_cast<size_t>(m)][static_cast<size_t>(r)] !=
            parent) {
          rep.fail("BCS2", "recall broken at time " + std::to_string(m + 1));
          return rep;
        }
    }
  // BCS5 prior shape.
  switch (sys.prior) {
    case PriorKind::Ranked:
      if (sys.rank.size() != sys.runs.size()) {
        rep.fail("BCS5", "rank table size mismatch");
        return rep;
      }
      break;
    case PriorKind::Lex:
      if (!sys.lex_structure) {
        rep.fail("BCS5", "lex prior lacks its distance structure");
        return rep;
      }
      break;
    case PriorKind::Pref: {
      if (sys.pref_rows.size() != sys.runs.size()) {
        rep.fail("BCS5", "preference rows size mismatch");
        return rep;
      }
      const int n = static_cast<int>(sys.runs.size());
      for (int i = 0; i < n; ++i)
        if (run_precedes(sys, i, i)) {
          rep.fail("BCS5", "preference order reflexive at run " +
                               std::to_string(i));
          return rep;
        }
      if (n <= 300) {
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            if (run_precedes(sys, a, b))
              for (int c = 0; c < n; ++c)
                if (run_precedes(sys, b, c) && !run_precedes(sys, a, c)) {
                  rep.fail("BCS5", "preference order not transitive");
                  return rep;
                }
      } else {
        rep.notes.push_back("preference transitivity sampled (large system)");
      }
      break;
    }
  }
  return rep;
}

CheckReport validate_rev(const SystemModel& sys,
                         const ValidationBounds& bounds) {
  CheckReport rep;
  const int nw = sys.space->size();
  // REV1: static propositions.
  for (size_t i = 0; i < sys.runs.size(); ++i)
    for (World w : sys.runs[i].env)
      if (w != sys.runs[i].env[0]) {
        rep.fail("REV1", "run " + std::to_string(i) + " changes its world");
        return rep;
      }
  // REV2: ranked prior.
  if (sys.prior != PriorKind::Ranked)
    rep.fail("REV2", "prior is not ranked");

  const bool ranked = sys.prior == PriorKind::Ranked;

  std::vector<int> all_runs(sys.runs.size());
  for (size_t i = 0; i < sys.runs.size(); ++i)
    all_runs[i] = static_cast<int>(i);

  // Initial plausibility per world (rank, or presence for dominance priors).
  auto start_rank = [&](const std::vector<int>& runs) {
    std::vector<std::int64_t> v(static_cast<size_t>(nw), kInfRank);
    for (int r : runs) {
      int wi = sys.space->index_of(sys.runs[static_cast<size_t>(r)].env[0]);
      std::int64_t x =
          ranked ? sys.rank[static_cast<size_t>(r)] : std::int64_t{0};
      v[static_cast<size_t>(wi)] = std::min(v[static_cast<size_t>(wi)], x);
    }
    return v;
  };

  // REV3: every world carries a run of nontrivial plausibility; singleton
  // formulas pin down the general case.
  {
    auto v = start_rank(all_runs);
    for (int wi = 0; wi < nw; ++wi)
      if (v[static_cast<size_t>(wi)] == kInfRank) {
        rep.fail("REV3",
                 "no plausible run starts at world " +
                     world_to_string(sys.space->worlds[static_cast<size_t>(wi)],
                                     sys.space->vocab.size()));
        return rep;
      }
  }

  if (nw > 64) {
    rep.notes.push_back("REV4 skipped: universe too large");
    return rep;
  }
  const std::uint64_t fullmask = nw == 64 ? ~0ull : (1ull << nw) - 1;

  // Candidate observation sequences: alphabet sequences up to the bound,
  // plus single world-set formulas (all of them for small universes, the
  // literals and a seeded sample above). Unobservable candidates make the
  // conditioned event empty, which is what breaks REV4 for partial
  // alphabets.
  struct Candidate {
    std::vector<int> seq;        // alphabet indices (when observable)
    bool virtual_empty = false;  // formula outside the alphabet
    std::uint64_t conj = 0;      // models of the conjunction
    std::string label;
  };
  std::mt19937_64 rng(bounds.seed);
  std::vector<Candidate> cands;
  for (auto& seq :
       alphabet_sequences(sys, std::min(sys.horizon, bounds.max_obs_len))) {
    std::uint64_t conj = fullmask;
    for (int a : seq)
      conj &= sys.space->models_mask(sys.alphabet[static_cast<size_t>(a)]);
    cands.push_back({seq, false, conj, obs_seq_str(sys, seq)});
  }
  if (sys.horizon >= 1) {
    std::vector<std::uint64_t> single_masks;
    if (nw <= 8) {
      for (std::uint64_t m = 1; m <= fullmask; ++m) single_masks.push_back(m);
    } else {
      for (int i = 0; i < sys.space->vocab.size(); ++i) {
        Formula atom = Formula::atom(sys.space->vocab.at(i));
        single_masks.push_back(sys.space->models_mask(atom));
        single_masks.push_back(fullmask & ~single_masks.back());
      }
      for (int i = 0; i < 24; ++i) {
        std::uint64_t m = rng() & fullmask;
        if (m) single_masks.push_back(m);
      }
    }
    for (std::uint64_t m : single_masks) {
      Formula f = char_formula_of(sys.space, sys.space->unmask(m));
      int idx = sys.alphabet_index(f);
      Candidate c;
      c.conj = m;
      c.label = "<" + f.print() + ">";
      if (idx >= 0)
        c.seq = {idx};
      else
        c.virtual_empty = true;
      cands.push_back(std::move(c));
    }
  }

  auto subset_min = [&](const std::vector<std::int64_t>& v) {
    std::vector<std::int64_t> best(fullmask + 1, kInfRank);
    for (std::uint64_t m = 1; m <= fullmask; ++m) {
      std::uint64_t low = m & (~m + 1);
      int wi = std::countr_zero(low);
      best[m] = std::min(best[m & (m - 1)], v[static_cast<size_t>(wi)]);
    }
    return best;
  };
  auto masked_min = [&](const std::vector<std::int64_t>& v, std::uint64_t m) {
    std::int64_t best = kInfRank;
    for (std::uint64_t rest = m; rest;) {
      int wi = std::countr_zero(rest);
      rest &= rest - 1;
      best = std::min(best, v[static_cast<size_t>(wi)]);
    }
    return best;
  };

  const bool exhaustive_pairs = ranked && nw <= 8;
  std::vector<std::int64_t> plain = start_rank(all_runs);
  std::vector<std::int64_t> plain_tbl;
  if (exhaustive_pairs) plain_tbl = subset_min(plain);

  bool got4 = false, got4p = false;
  auto fail_once = [&](const std::string& prop, const std::string& witness) {
    bool& got = prop == "REV4" ? got4 : got4p;
    if (got) return;
    got = true;
    rep.fail(prop, witness);
  };

  for (const Candidate& cand : cands) {
    if (got4 && got4p) break;
    std::vector<int> obs_runs = cand.virtual_empty
                                    ? std::vector<int>{}
                                    : runs_with_prefix(sys, cand.seq);
    if (ranked) {
      auto v = start_rank(obs_runs);
      if (cand.virtual_empty) std::fill(v.begin(), v.end(), kInfRank);
      auto test_pair = [&](std::uint64_t phi, std::uint64_t psi,
                           std::int64_t ophi, std::int64_t opsi,
                           std::int64_t rphi, std::int64_t rpsi) {
        bool lhs = ophi <= opsi;
        bool rhs = rphi <= rpsi;
        if (lhs != rhs) {
          fail_once("REV4", "obs=" + cand.label + " phi=" +
                                mask_str(sys.space, phi) + " psi=" +
                                mask_str(sys.space, psi));
          if (ophi != kInfRank)
            fail_once("REV4'", "obs=" + cand.label + " phi=" +
                                   mask_str(sys.space, phi) + " psi=" +
                                   mask_str(sys.space, psi));
        }
      };
      if (exhaustive_pairs) {
        auto obs_tbl = subset_min(v);
        for (std::uint64_t phi = 0; phi <= fullmask; ++phi)
          for (std::uint64_t psi = 0; psi <= fullmask; ++psi)
            test_pair(phi, psi, obs_tbl[phi], obs_tbl[psi],
                      plain_tbl[phi & cand.conj], plain_tbl[psi & cand.conj]);
      } else {
        int budget = std::max(
            64, bounds.pair_budget /
                    std::max<int>(1, static_cast<int>(cands.size())));
        for (int it = 0; it < budget; ++it) {
          std::uint64_t phi = rng() & fullmask, psi = rng() & fullmask;
          test_pair(phi, psi, masked_min(v, phi), masked_min(v, psi),
                    masked_min(plain, phi & cand.conj),
                    masked_min(plain, psi & cand.conj));
        }
      }
    } else {
      // Dominance path, sampled pairs.
      std::vector<std::vector<int>> runs_by_world(static_cast<size_t>(nw));
      for (int r : all_runs)
        runs_by_world[static_cast<size_t>(
                          sys.space->index_of(sys.runs[static_cast<size_t>(r)].env[0]))]
            .push_back(r);
      auto event_from = [&](const std::vector<int>& base,
                            std::uint64_t phimask) {
        std::vector<int> out;
        for (int r : base) {
          int wi =
              sys.space->index_of(sys.runs[static_cast<size_t>(r)].env[0]);
          if (phimask >> wi & 1) out.push_back(r);
        }
        return out;
      };
      int budget = std::max(
          32, bounds.pair_budget /
                  std::max<int>(1, static_cast<int>(cands.size())));
      for (int it = 0; it < budget && !(got4 && got4p); ++it) {
        std::uint64_t phi = rng() & fullmask, psi = rng() & fullmask;
        auto lphi = event_from(obs_runs, phi), lpsi = event_from(obs_runs, psi);
        auto rphi = event_from(all_runs, phi & cand.conj),
             rpsi = event_from(all_runs, psi & cand.conj);
        bool lhs = run_set_ge(sys, lphi, lpsi);
        bool rhs = run_set_ge(sys, rphi, rpsi);
        if (lhs != rhs) {
          fail_once("REV4", "obs=" + cand.label + " phi=" +
                                mask_str(sys.space, phi) + " psi=" +
                                mask_str(sys.space, psi));
          if (!run_set_bottom(sys, lphi))
            fail_once("REV4'", "obs=" + cand.label + " phi=" +
                                   mask_str(sys.space, phi) + " psi=" +
                                   mask_str(sys.space, psi));
        }
      }
    }
  }
  return rep;
}

CheckReport validate_upd(const SystemModel& sys,
                         const ValidationBounds& bounds) {
  CheckReport rep;
  const int nw = sys.space->size();
  if (nw > 16) {
    rep.notes.push_back("UPD checks skipped: universe too large");
    return rep;
  }
  const std::uint64_t fullmask = (1ull << nw) - 1;

  // UPD1: env states are worlds of the universe, pairwise separated by
  // construction; verify coverage.
  for (size_t i = 0; i < sys.runs.size(); ++i)
    for (World w : sys.runs[i].env)
      if (!sys.space->contains(w)) {
        rep.fail("UPD1", "run " + std::to_string(i) + " leaves the universe");
        return rep;
      }

  if (sys.prior == PriorKind::Ranked) {
    rep.fail("UPD2", "prior is ranked, not lexicographic");
    return rep;
  }
  rep.notes.push_back(
      "sequence comparisons use the first-divergence rule with the smaller "
      "change preferred");

  // UPD2 (consistency with d): cell-level comparisons follow the
  // first-divergence rule. Cells here are distinct env sequences.
  const UpdateStructure* u =
      sys.lex_structure ? &*sys.lex_structure : nullptr;
  std::map<std::vector<World>, std::vector<int>> seq_cells;
  for (size_t i = 0; i < sys.runs.size(); ++i)
    seq_cells[sys.runs[i].env].push_back(static_cast<int>(i));
  std::vector<const std::vector<World>*> seqs;
  std::vector<const std::vector<int>*> seq_runs;
  for (auto& [seq, cell] : seq_cells) {
    seqs.push_back(&seq);
    seq_runs.push_back(&cell);
  }
  std::mt19937_64 rng(bounds.seed);
  const size_t ns = seqs.size();
  if (u) {
    auto check_cell_pair = [&](size_t i, size_t j) -> bool {
      bool ge_ij = run_set_ge(sys, *seq_runs[i], *seq_runs[j]);
      bool ge_ji = run_set_ge(sys, *seq_runs[j], *seq_runs[i]);
      bool lt = ge_ji && !ge_ij;  // Pl(cell_i) < Pl(cell_j)
      bool rule = lex_env_precedes(*u, *seqs[j], *seqs[i]);
      if (lt != rule) {
        rep.fail("UPD2", "cells diverge from the distance rule");
        return false;
      }
      return true;
    };
    if (ns <= 128) {
      for (size_t i = 0; i < ns && rep.pass; ++i)
        for (size_t j = 0; j < ns; ++j)
          if (i != j && !check_cell_pair(i, j)) break;
    } else {
      for (int it = 0; it < bounds.pair_budget && rep.pass; ++it)
        check_cell_pair(rng() % ns, rng() % ns);
      rep.notes.push_back("UPD2 consistency sampled");
    }
  }
  if (!rep.pass) return rep;

  // UPD2 (prefix-defined): run-level dominance between env-formula events
  // matches cell-level dominance.
  {
    std::map<const std::vector<World>*, int> seq_id;
    auto cell_strict_gt = [&](size_t i, size_t j) {
      // Pl(cell_i) > Pl(cell_j) reduces to seq_i preceding seq_j.
      return u ? lex_env_precedes(*u, *seqs[i], *seqs[j]) : false;
    };
    int trials = std::min(bounds.pair_budget / 8, 64);
    for (int it = 0; it < trials && rep.pass && u; ++it) {
      int len = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(
                                         std::max(1, sys.horizon)));
      std::vector<std::uint64_t> fa, fb;
      for (int i = 0; i <= len; ++i) {
        fa.push_back(1 + rng() % fullmask);
        fb.push_back(1 + rng() % fullmask);
      }
      auto in_event = [&](const std::vector<World>& seq,
                          const std::vector<std::uint64_t>& masks) {
        for (size_t i = 0; i < masks.size(); ++i) {
          int wi = sys.space->index_of(seq[i]);
          if (!(masks[i] >> wi & 1)) return false;
        }
        return true;
      };
      bool run_ge = run_set_ge(sys, event_runs(sys, fa, nullptr),
                               event_runs(sys, fb, nullptr));
      // Cell-level dominance per the prefix-defined rule.
      bool cell_ge = true;
      for (size_t sj = 0; sj < ns && cell_ge; ++sj) {
        if (!in_event(*seqs[sj], fb) || in_event(*seqs[sj], fa)) continue;
        bool witness = false;
        for (size_t si = 0; si < ns; ++si)
          if (in_event(*seqs[si], fa) && cell_strict_gt(si, sj)) {
            witness = true;
            break;
          }
        if (!witness) cell_ge = false;
      }
      if (run_ge != cell_ge)
        rep.fail("UPD2", "prefix-defined rule mismatch on sampled events");
    }
  }
  if (!rep.pass) return rep;

  // UPD3: consistent formula sequences have nontrivial plausibility.
  {
    int len = std::min(sys.horizon + 1, 3);
    std::vector<std::uint64_t> masks(static_cast<size_t>(len), 1);
    double total = 1;
    for (int i = 0; i < len; ++i) total *= static_cast<double>(fullmask);
    if (total <= 100000) {
      std::vector<std::uint64_t> cur(static_cast<size_t>(len), 1);
      bool done = false;
      while (!done && rep.pass) {
        if (run_set_bottom(sys, event_runs(sys, cur, nullptr))) {
          std::ostringstream os;
          for (size_t i = 0; i < cur.size(); ++i)
            os << (i ? "," : "") << mask_str(sys.space, cur[i]);
          rep.fail("UPD3", os.str());
        }
        int i = len - 1;
        while (i >= 0) {
          if (++cur[static_cast<size_t>(i)] <= fullmask) break;
          cur[static_cast<size_t>(i)] = 1;
          --i;
        }
        if (i < 0) done = true;
      }
    } else {
      for (int it = 0; it < bounds.pair_budget && rep.pass; ++it) {
        std::vector<std::uint64_t> cur;
        for (int i = 0; i < len; ++i) cur.push_back(1 + rng() % fullmask);
        if (run_set_bottom(sys, event_runs(sys, cur, nullptr)))
          rep.fail("UPD3", "sampled sequence has bottom plausibility");
      }
      rep.notes.push_back("UPD3 sampled");
    }
  }
  if (!rep.pass) return rep;

  // UPD4 / UPD4': observation sequences from the alphabet.
  {
    int k = std::min(sys.horizon - 1, bounds.max_obs_len);
    auto obs_seqs = alphabet_sequences(sys, std::max(0, k));
    int budget = std::max(32, bounds.pair_budget /
                                  std::max<int>(1, static_cast<int>(obs_seqs.size())));
    for (const auto& oseq : obs_seqs) {
      if (!rep.pass) break;
      int m = static_cast<int>(oseq.size());
      if (m + 1 > sys.horizon) continue;
      std::vector<std::uint64_t> omask;
      for (int a : oseq)
        omask.push_back(
            sys.space->models_mask(sys.alphabet[static_cast<size_t>(a)]));
      for (int it = 0; it < budget && rep.pass; ++it) {
        std::vector<std::uint64_t> fa, fb;
        for (int i = 0; i <= m + 1; ++i) {
          fa.push_back(1 + rng() % fullmask);
          fb.push_back(1 + rng() % fullmask);
        }
        auto conj_masks = [&](const std::vector<std::uint64_t>& f) {
          std::vector<std::uint64_t> out = f;
          for (int i = 1; i <= m; ++i)
            out[static_cast<size_t>(i)] &= omask[static_cast<size_t>(i - 1)];
          return out;
        };
        auto lhs_a = event_runs(sys, fa, &oseq);
        auto lhs_b = event_runs(sys, fb, &oseq);
        auto rhs_a = event_runs(sys, conj_masks(fa), nullptr);
        auto rhs_b = event_runs(sys, conj_masks(fb), nullptr);
        bool lhs = run_set_ge(sys, lhs_a, lhs_b);
        bool rhs = run_set_ge(sys, rhs_a, rhs_b);
        if (lhs != rhs) {
          rep.fail("UPD4", "obs=" + obs_seq_str(sys, oseq));
          break;
        }
        if (!run_set_bottom(sys, lhs_a) && lhs != rhs)
          rep.fail("UPD4'", "obs=" + obs_seq_str(sys, oseq));
      }
    }
  }
  return rep;
}

CheckReport check_prev_rule(const SystemModel& sys, std::uint64_t seed) {
  CheckReport rep;
  std::mt19937_64 rng(seed);
  for (int m = 0; m < sys.horizon && rep.pass; ++m) {
    for (const auto& child : sys.cells[static_cast<size_t>(m) + 1]) {
      if (!rep.pass) break;
      const int k = static_cast<int>(child.size());
      auto lift = [&](std::uint64_t mask) {
        std::vector<int> s;
        for (int i = 0; i < k; ++i)
          if (mask >> i & 1) s.push_back(child[static_cast<size_t>(i)]);
        return s;
      };
      auto check_pair = [&](std::uint64_t am, std::uint64_t bm) -> bool {
        auto a = lift(am), b = lift(bm);
        bool next_le = point_set_ge(sys, m + 1, b, a);
        bool prev_le = point_set_ge(sys, m, b, a);
        if (next_le != prev_le) {
          rep.fail("prev-rule",
                   "time " + std::to_string(m + 1) + " A=" +
                       std::to_string(am) + " B=" + std::to_string(bm));
          return false;
        }
        return true;
      };
      if (k <= 12) {
        const std::uint64_t full = (1ull << k) - 1;
        if (sys.prior == PriorKind::Ranked && !sys.point_rank_override) {
          // Subset-min tables make the exhaustive sweep linear per pair.
          std::vector<std::int64_t> next_min(full + 1, kInfRank),
              prev_min(full + 1, kInfRank);
          for (std::uint64_t s = 1; s <= full; ++s) {
            std::uint64_t low = s & (~s + 1);
            int i = std::countr_zero(low);
            std::int64_t r =
                sys.rank[static_cast<size_t>(child[static_cast<size_t>(i)])];
            next_min[s] = std::min(next_min[s & (s - 1)], r);
            prev_min[s] = next_min[s];
          }
          for (std::uint64_t am = 0; am <= full && rep.pass; ++am)
            for (std::uint64_t bm = 0; bm <= full; ++bm)
              if ((next_min[bm] <= next_min[am]) !=
                  (prev_min[bm] <= prev_min[am])) {
                rep.fail("prev-rule", "time " + std::to_string(m + 1));
                break;
              }
        } else {
          for (std::uint64_t am = 0; am <= full && rep.pass; ++am)
            for (std::uint64_t bm = 0; bm <= full; ++bm)
              if (!check_pair(am, bm)) break;
        }
      } else {
        for (int it = 0; it < 2000 && rep.pass; ++it) {
          std::uint64_t am = 0, bm = 0;
          for (int i = 0; i < k; ++i) {
            if (rng() & 1) am |= 1ull << i;
            if (rng() & 1) bm |= 1ull << i;
          }
          check_pair(am, bm);
        }
      }
    }
  }
  return rep;
}

CheckReport cross_check_update(const SystemModel& sys,
                               const UpdateStructure& u) {
  CheckReport rep;
  for (int m = 0; m < sys.horizon && rep.pass; ++m) {
    for (const auto& cell : sys.cells[static_cast<size_t>(m)]) {
      if (!rep.pass) break;
      const Run& witness = sys.runs[static_cast<size_t>(cell.front())];
      std::vector<Formula> s_a;
      for (int t = 0; t < m; ++t)
        s_a.push_back(sys.alphabet[static_cast<size_t>(
            witness.obs[static_cast<size_t>(t)])]);
      std::vector<World> states = states_possible(sys, s_a);
      for (const Formula& psi : sys.alphabet) {
        auto extended = s_a;
        extended.push_back(psi);
        std::vector<World> via_system = states_possible(sys, extended);
        std::vector<World> via_min =
            min_u(u, states, sys.space->models(psi));
        std::sort(via_min.begin(), via_min.end());
        if (via_system != via_min) {
          std::ostringstream os;
          os << "s_a=";
          for (const auto& f : s_a) os << f.print() << ';';
          os << " psi=" << psi.print();
          rep.fail("states-min", os.str());
          break;
        }
      }
    }
  }
  return rep;
}

CheckReport check_correctness_propagation(const SystemModel& sys,
                                          const UpdateStructure& u) {
  CheckReport rep;
  int precondition_failures = 0;
  // Cache possible states per (time, cell).
  std::vector<std::vector<std::vector<World>>> states(
      static_cast<size_t>(sys.horizon) + 1);
  for (int m = 0; m <= sys.horizon; ++m) {
    states[static_cast<size_t>(m)].resize(
        sys.cells[static_cast<size_t>(m)].size());
    for (size_t c = 0; c < sys.cells[static_cast<size_t>(m)].size(); ++c) {
      std::vector<World> ws;
      for (int r : minimal_runs(sys, sys.cells[static_cast<size_t>(m)][c]))
        ws.push_back(sys.runs[static_cast<size_t>(r)].env[static_cast<size_t>(m)]);
      std::sort(ws.begin(), ws.end());
      ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
      states[static_cast<size_t>(m)][c] = std::move(ws);
    }
  }
  for (size_t i = 0; i < sys.runs.size() && rep.pass; ++i) {
    const Run& r = sys.runs[i];
    for (int m = 0; m < sys.horizon; ++m) {
      int c_now = sys.cell_of[static_cast<size_t>(m)][i];
      int c_next = sys.cell_of[static_cast<size_t>(m) + 1][i];
      const auto& now = states[static_cast<size_t>(m)][static_cast<size_t>(c_now)];
      const auto& next =
          states[static_cast<size_t>(m) + 1][static_cast<size_t>(c_next)];
      World w_now = r.env[static_cast<size_t>(m)];
      World w_next = r.env[static_cast<size_t>(m) + 1];
      bool correct_now = std::binary_search(now.begin(), now.end(), w_now);
      bool sufficient = sufficient_information(
          u, w_now, w_next, sys.obs_at(static_cast<int>(i), m + 1));
      if (correct_now && sufficient) {
        if (!std::binary_search(next.begin(), next.end(), w_next)) {
          rep.fail("correctness",
                   "run " + std::to_string(i) + " time " + std::to_string(m));
          break;
        }
      } else {
        ++precondition_failures;
      }
    }
  }
  rep.notes.push_back("precondition failures (not violations): " +
                      std::to_string(precondition_failures));
  return rep;
}

// ---------------------------------------------------------------------------
// Timestamping

Formula timestamp(const Formula& f, int m) {
  switch (f.kind()) {
    case FormulaKind::True: return Formula::truth();
    case FormulaKind::False: return Formula::falsity();
    case FormulaKind::Var: {
      if (f.var().timestamp)
        throw std::invalid_argument("atom already timestamped: " +
                                    f.var().display());
      return Formula::atom(Atom{f.var().name, m});
    }
    case FormulaKind::Not: return Formula::negate(timestamp(f.child(), m));
    case FormulaKind::And:
      return Formula::conj(timestamp(f.lhs(), m), timestamp(f.rhs(), m));
    case FormulaKind::Or:
      return Formula::disj(timestamp(f.lhs(), m), timestamp(f.rhs(), m));
    case FormulaKind::Implies:
      return Formula::implies(timestamp(f.lhs(), m), timestamp(f.rhs(), m));
    case FormulaKind::Iff:
      return Formula::iff(timestamp(f.lhs(), m), timestamp(f.rhs(), m));
  }
  return Formula::truth();
}

Vocabulary statified_vocabulary(const Vocabulary& vocab, int horizon) {
  int total = vocab.size() * (horizon + 1);
  if (total > kMaxAtoms) throw VocabularyTooLarge(total);
  std::vector<Atom> atoms;
  for (int m = 0; m <= horizon; ++m)
    for (int i = 0; i < vocab.size(); ++i)
      atoms.push_back(Atom{vocab.at(i).name, m});
  return Vocabulary(std::move(atoms));
}

SystemModel statify(const SystemModel& sys) {
  const int n = sys.space->vocab.size();
  const int T = sys.horizon;
  Vocabulary vstar = statified_vocabulary(sys.space->vocab, T);
  Theory tstar;
  for (const Formula& f : sys.space->theory.formulas)
    for (int m = 0; m <= T; ++m) tstar.formulas.push_back(timestamp(f, m));
  auto space_star = WorldSpace::make(vstar, tstar);

  SystemModel out;
  out.space = space_star;
  out.horizon = T;

  // Timestamped alphabet, deduplicated by printed form.
  std::map<std::string, int> alpha_ids;
  auto alpha_id = [&](const Formula& f) {
    auto key = f.print();
    auto it = alpha_ids.find(key);
    if (it != alpha_ids.end()) return it->second;
    int id = static_cast<int>(out.alphabet.size());
    out.alphabet.push_back(f);
    alpha_ids.emplace(std::move(key), id);
    return id;
  };

  const int nstar = vstar.size();
  for (const Run& r : sys.runs) {
    World wstar = 0;
    for (int m = 0; m <= T; ++m)
      for (int i = 0; i < n; ++i)
        if (world_bit(r.env[static_cast<size_t>(m)], n, i)) {
          int pos = m * n + i;
          wstar = static_cast<World>(wstar | (1u << (nstar - 1 - pos)));
        }
    Run rstar;
    rstar.env.assign(static_cast<size_t>(T) + 1, wstar);
    for (int m = 1; m <= T; ++m) {
      Formula o = sys.alphabet[static_cast<size_t>(
          r.obs[static_cast<size_t>(m - 1)])];
      rstar.obs.push_back(alpha_id(timestamp(o, m)));
    }
    out.runs.push_back(std::move(rstar));
  }

  if (sys.prior == PriorKind::Ranked) {
    out.prior = PriorKind::Ranked;
    out.rank = sys.rank;
  } else {
    out.prior = PriorKind::Pref;
    const size_t nr = sys.runs.size();
    if (nr > 4096)
      throw StateSpaceTooLarge("too many runs to materialize the prior");
    const size_t words = (nr + 63) / 64;
    out.pref_rows.assign(nr, std::vector<std::uint64_t>(words, 0));
    for (size_t b = 0; b < nr; ++b)
      for (size_t a = 0; a < nr; ++a)
        if (run_precedes(sys, static_cast<int>(a), static_cast<int>(b)))
          out.pref_rows[b][a / 64] |= 1ull << (a % 64);
  }
  out.finalize();
  return out;
}

CheckReport check_prop_7_1(const SystemModel& sys,
                           const ValidationBounds& bounds) {
  CheckReport rep;
  SystemModel star = statify(sys);
  auto bcs = validate_bcs(star);
  if (!bcs.pass) {
    rep.pass = false;
    for (auto& f : bcs.findings) rep.findings.push_back(f);
    return rep;
  }
  auto rev = validate_rev(star, bounds);
  bool rev1_ok = true, rev3_ok = true, rev4p_ok = true;
  for (auto& f : rev.findings) {
    if (f.property == "REV1") rev1_ok = false;
    if (f.property == "REV3") rev3_ok = false;
    if (f.property == "REV4'") rev4p_ok = false;
  }
  if (!rev1_ok) rep.fail("REV1", "statified system is not static");
  auto upd = validate_upd(sys, bounds);
  bool upd3_ok = upd.pass;
  bool upd4p_ok = upd.pass;
  for (auto& f : upd.findings) {
    if (f.property == "UPD3") upd3_ok = false;
    if (f.property == "UPD4" || f.property == "UPD4'") upd4p_ok = false;
  }
  if (upd3_ok && !rev3_ok)
    rep.fail("REV3", "source satisfies UPD3 but the image fails REV3");
  if (upd4p_ok && !rev4p_ok)
    rep.fail("REV4'", "source satisfies UPD4' but the image fails REV4'");
  bool rev4_skipped = std::any_of(
      rev.notes.begin(), rev.notes.end(), [](const std::string& n) {
        return n.rfind("REV4 skipped", 0) == 0;
      });
  if (rev4_skipped)
    rep.notes.push_back("REV4 (unprimed) not evaluated: image universe too large");
  else
    rep.notes.push_back(
        std::string("REV4 (unprimed) on the image: ") +
        (std::any_of(rev.findings.begin(), rev.findings.end(),
                     [](const CheckFinding& f) { return f.property == "REV4"; })
             ? "fails (observations cover current-time atoms only)"
             : "holds"));
  return rep;
}

CheckReport check_statify_belief_transfer(const SystemModel& sys,
                                          const SystemModel& statified) {
  CheckReport rep;
  if (sys.space->size() > 16) throw CarrierTooLarge(sys.space->size(), 16);
  const std::uint64_t full = (1ull << sys.space->size()) - 1;
  for (size_t i = 0; i < sys.runs.size() && rep.pass; ++i)
    for (int m = 0; m <= sys.horizon && rep.pass; ++m)
      for (std::uint64_t mask = 0; mask <= full; ++mask) {
        Formula phi = char_formula_of(sys.space, sys.space->unmask(mask));
        bool here = model_check(sys, {static_cast<int>(i), m},
                                KptFormula::belief(KptFormula::prop(phi)));
        bool there =
            model_check(statified, {static_cast<int>(i), m},
                        KptFormula::belief(KptFormula::prop(timestamp(phi, m))));
        if (here != there) {
          rep.fail("belief-transfer",
                   "run " + std::to_string(i) + " time " + std::to_string(m) +
                       " phi=" + phi.print());
          break;
        }
      }
  return rep;
}

std::string dump_system(const SystemModel& sys) {
  std::ostringstream os;
  const int n = sys.space->vocab.size();
  for (size_t i = 0; i < sys.runs.size(); ++i) {
    const Run& r = sys.runs[i];
    os << "env=";
    for (size_t m = 0; m < r.env.size(); ++m)
      os << (m ? "," : "") << world_to_string(r.env[m], n);
    os << " obs=";
    for (size_t m = 0; m < r.obs.size(); ++m)
      os << (m ? ";" : "")
         << sys.alphabet[static_cast<size_t>(r.obs[m])].print();
    if (sys.prior == PriorKind::Ranked) {
      os << " rank=";
      if (sys.rank[i] == kInfRank)
        os << "inf";
      else
        os << sys.rank[i];
    }
    os << '\n';
  }
  if (sys.prior != PriorKind::Ranked) {
    if (sys.runs.size() <= 200) {
      os << "order:\n";
      for (size_t a = 0; a < sys.runs.size(); ++a)
        for (size_t b = 0; b < sys.runs.size(); ++b)
          if (run_precedes(sys, static_cast<int>(a), static_cast<int>(b)))
            os << a << " < " << b << '\n';
    } else {
      os << "order: implicit (distance-derived)\n";
    }
  }
  return os.str();
}

}  // namespace bcs

