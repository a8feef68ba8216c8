#include "bcs/revision.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

namespace bcs {

RevisionRanking::RevisionRanking(SpacePtr s, std::vector<std::int64_t> r)
    : space(std::move(s)), rank(std::move(r)) {
  if (static_cast<int>(rank.size()) != space->size())
    throw std::invalid_argument("rank table size mismatch");
  for (auto v : rank)
    if (v == kInfRank || v < 0)
      throw std::invalid_argument("revision rankings need finite ranks");
}

BeliefSet RevisionRanking::initial_belief() const {
  return grove_revise(*this, Formula::truth());
}

BeliefSet grove_revise(const RevisionRanking& rk, const Formula& phi) {
  std::int64_t best = kInfRank;
  const auto& ws = rk.space->worlds;
  for (size_t i = 0; i < ws.size(); ++i)
    if (eval(ws[i], phi, rk.space->vocab)) best = std::min(best, rk.rank[i]);
  std::vector<World> out;
  if (best == kInfRank) return BeliefSet(rk.space, {});
  for (size_t i = 0; i < ws.size(); ++i)
    if (rk.rank[i] == best && eval(ws[i], phi, rk.space->vocab))
      out.push_back(ws[i]);
  return BeliefSet(rk.space, std::move(out));
}

namespace {

bool consistent_conj(const EpistemicState& e, size_t from, const SpacePtr& space) {
  for (World w : space->worlds) {
    bool ok = true;
    for (size_t i = from; i < e.size(); ++i)
      if (!eval(w, e[i], space->vocab)) {
        ok = false;
        break;
      }
    if (ok) return true;
  }
  return false;
}

}  // namespace

EpistemicState f_suffix(const EpistemicState& e, const SpacePtr& space) {
  if (e.empty()) return {};
  if (!consistent_conj(e, e.size() - 1, space)) return {Formula::falsity()};
  size_t k = e.size() - 1;
  while (k > 0 && consistent_conj(e, k - 1, space)) --k;
  return EpistemicState(e.begin() + static_cast<std::ptrdiff_t>(k), e.end());
}

BeliefSet epistemic_bs(const RevisionRanking& rk, const EpistemicState& e) {
  EpistemicState f = f_suffix(e, rk.space);
  if (f.size() == 1 && f[0].kind() == FormulaKind::False)
    return BeliefSet::inconsistent(rk.space);
  return grove_revise(rk, Formula::conj_all(f));
}

RevisionRanking extract_ranking(const RevisionOracle& oracle,
                                const BeliefSet& k, const SpacePtr& space) {
  if (k.empty())
    throw std::invalid_argument("extract_ranking needs a consistent belief set");
  const int n = space->size();
  // geq[i][j]: world i is at least as plausible as world j, read off the
  // oracle's answer to the pairwise disjunction query.
  std::vector<std::vector<bool>> geq(static_cast<size_t>(n),
                                     std::vector<bool>(static_cast<size_t>(n)));
  for (int i = 0; i < n; ++i) geq[static_cast<size_t>(i)][static_cast<size_t>(i)] = true;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      World wi = space->worlds[static_cast<size_t>(i)];
      World wj = space->worlds[static_cast<size_t>(j)];
      Formula query = Formula::disj(char_formula_of_world(space, wi),
                                    char_formula_of_world(space, wj));
      BeliefSet ans = oracle(k, query);
      bool has_i = false, has_j = false;
      for (World w : ans.worlds()) {
        if (w == wi) has_i = true;
        if (w == wj) has_j = true;
      }
      if (!has_i && !has_j)
        throw NotTotalPreorder("oracle answered the disjunction query with "
                               "neither disjunct",
                               wi, wj);
      geq[static_cast<size_t>(i)][static_cast<size_t>(j)] = has_i;
      geq[static_cast<size_t>(j)][static_cast<size_t>(i)] = has_j;
    }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (geq[static_cast<size_t>(a)][static_cast<size_t>(b)] &&
            geq[static_cast<size_t>(b)][static_cast<size_t>(c)] &&
            !geq[static_cast<size_t>(a)][static_cast<size_t>(c)])
          throw NotTotalPreorder(
              "pairwise answers are not transitive",
              space->worlds[static_cast<size_t>(a)],
              space->worlds[static_cast<size_t>(c)]);

  // Layer ranks by repeatedly peeling the most plausible remaining worlds.
  std::vector<std::int64_t> rank(static_cast<size_t>(n), -1);
  std::int64_t layer = 0;
  int assigned = 0;
  while (assigned < n) {
    std::vector<int> top;
    for (int i = 0; i < n; ++i) {
      if (rank[static_cast<size_t>(i)] >= 0) continue;
      bool dominated = false;
      for (int j = 0; j < n; ++j)
        if (rank[static_cast<size_t>(j)] < 0 && j != i &&
            geq[static_cast<size_t>(j)][static_cast<size_t>(i)] &&
            !geq[static_cast<size_t>(i)][static_cast<size_t>(j)])
          dominated = true;
      if (!dominated) top.push_back(i);
    }
    if (top.empty())
      throw NotTotalPreorder("no maximal world while layering (cycle)",
                             space->worlds[0], space->worlds[0]);
    for (int i : top) rank[static_cast<size_t>(i)] = layer;
    assigned += static_cast<int>(top.size());
    ++layer;
  }
  return RevisionRanking(space, std::move(rank));
}

namespace {

std::string ws_str(const SpacePtr& space, const std::vector<World>& ws) {
  std::ostringstream os;
  os << '{';
  for (size_t i = 0; i < ws.size(); ++i) {
    if (i) os << ',';
    os << world_to_string(ws[i], space->vocab.size());
  }
  os << '}';
  return os.str();
}

}  // namespace

CheckReport check_agm(const RevisionOracle& oracle, const SpacePtr& space,
                      const BeliefSet& k, std::uint64_t seed) {
  const int n = space->size();
  if (n > 8) throw CarrierTooLarge(n, 8);
  CheckReport rep;
  const std::uint64_t count = 1ull << n;

  auto fail_once = [&](const std::string& prop, const std::string& witness) {
    for (const auto& f : rep.findings)
      if (f.property == prop) return;
    rep.fail(prop, witness);
  };

  auto formula_of = [&](std::uint64_t mask) {
    return char_formula_of(space, space->unmask(mask));
  };
  std::vector<BeliefSet> result;
  result.reserve(count);
  for (std::uint64_t phi = 0; phi < count; ++phi)
    result.push_back(oracle(k, formula_of(phi)));

  std::uint64_t kmask = space->mask_of(k.worlds());
  auto name = [&](std::uint64_t m) { return ws_str(space, space->unmask(m)); };

  for (std::uint64_t phi = 0; phi < count; ++phi) {
    std::uint64_t r = space->mask_of(result[phi].worlds());
    // R1 is structural here: results are world sets over the universe.
    if (r & ~phi)
      fail_once("R2", "phi=" + name(phi) + " result=" + name(r));
    if ((kmask & phi) & ~r)
      fail_once("R3", "phi=" + name(phi) + " result=" + name(r));
    if ((kmask & phi) != 0 && (r & ~(kmask & phi)))
      fail_once("R4", "phi=" + name(phi) + " result=" + name(r));
    if ((r == 0) != (phi == 0))
      fail_once("R5", "phi=" + name(phi) + " result=" + name(r));
    // R6: ask again through a syntactic variant (double negation).
    BeliefSet variant =
        oracle(k, Formula::negate(Formula::negate(formula_of(phi))));
    if (space->mask_of(variant.worlds()) != r)
      fail_once("R6", "phi=" + name(phi));
  }

  // R7/R8 over formula pairs. Belief-set inclusion reverses world-set
  // inclusion: X subseteq Y as belief sets iff worlds(X) superseteq worlds(Y).
  auto check_pair = [&](std::uint64_t phi, std::uint64_t psi) {
    std::uint64_t r_phi = space->mask_of(result[phi].worlds());
    std::uint64_t r_conj = space->mask_of(result[phi & psi].worlds());
    std::uint64_t cl = r_phi & psi;  // worlds of Cl(K o phi + psi)
    if (cl & ~r_conj)
      fail_once("R7", "phi=" + name(phi) + " psi=" + name(psi));
    if (cl != 0 && (r_conj & ~cl))  // guard: !psi not in K o phi
      fail_once("R8", "phi=" + name(phi) + " psi=" + name(psi));
  };
  if (n <= 4) {
    for (std::uint64_t phi = 0; phi < count; ++phi)
      for (std::uint64_t psi = 0; psi < count; ++psi) check_pair(phi, psi);
  } else {
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 10000; ++i)
      check_pair(rng() & (count - 1), rng() & (count - 1));
  }
  return rep;
}

CheckReport check_agm_primed(const EpistemicOracle& oracle,
                             const SpacePtr& space, int depth) {
  const int n = space->size();
  if (n > 4) throw CarrierTooLarge(n, 4);
  if (depth > 3) throw std::invalid_argument("depth bound is 3");
  CheckReport rep;
  const int count = 1 << n;

  std::vector<Formula> formulas;
  for (int m = 0; m < count; ++m)
    formulas.push_back(
        char_formula_of(space, space->unmask(static_cast<std::uint64_t>(m))));

  auto bs = [&](const std::vector<int>& seq) {
    EpistemicState e;
    for (int f : seq) e.push_back(formulas[static_cast<size_t>(f)]);
    return space->mask_of(oracle(e).worlds());
  };

  auto seq_str = [&](const std::vector<int>& seq) {
    std::ostringstream os;
    os << '<';
    for (size_t i = 0; i < seq.size(); ++i) {
      if (i) os << ',';
      os << formulas[static_cast<size_t>(seq[i])].print();
    }
    os << '>';
    return os.str();
  };
  auto name = [&](std::uint64_t m) { return ws_str(space, space->unmask(m)); };

  // All base states E with |E| < depth, so every checked sequence E.phi
  // (and E.phi.psi for the pair postulates) stays within the depth bound.
  std::vector<std::vector<int>> bases{{}};
  for (int len = 1; len < depth; ++len) {
    size_t start = 0, end = bases.size();
    for (size_t i = start; i < end; ++i)
      if (static_cast<int>(bases[i].size()) == len - 1)
        for (int f = 0; f < count; ++f) {
          auto e = bases[i];
          e.push_back(f);
          bases.push_back(std::move(e));
        }
  }

  for (const auto& seq : bases) {
    if (!rep.pass) break;
    std::uint64_t base = bs(seq);
    std::vector<int> ext = seq;
    const bool pairs_fit = static_cast<int>(seq.size()) + 2 <= depth;
    for (int phi = 0; phi < count && rep.pass; ++phi) {
      ext.push_back(phi);
      std::uint64_t r = bs(ext);
      std::uint64_t pm = static_cast<std::uint64_t>(phi);
      if (r & ~pm)
        rep.fail("R2'", "E=" + seq_str(seq) + " phi=" + name(pm));
      else if ((base & pm) & ~r)
        rep.fail("R3'", "E=" + seq_str(seq) + " phi=" + name(pm));
      else if ((base & pm) != 0 && (r & ~(base & pm)))
        rep.fail("R4'", "E=" + seq_str(seq) + " phi=" + name(pm));
      else if ((r == 0) != (pm == 0))
        rep.fail("R5'", "E=" + seq_str(seq) + " phi=" + name(pm));
      if (rep.pass && pairs_fit) {
        for (int psi = 0; psi < count && rep.pass; ++psi) {
          std::uint64_t qm = static_cast<std::uint64_t>(psi);
          ext.push_back(psi);
          std::uint64_t r2 = bs(ext);
          ext.pop_back();
          std::vector<int> conj = seq;
          conj.push_back(static_cast<int>(pm & qm));
          std::uint64_t rc = bs(conj);
          std::uint64_t cl = r & qm;  // worlds of Cl(BS(E o phi) + psi)
          if (cl & ~rc)
            rep.fail("R7'", "E=" + seq_str(seq) + " phi=" + name(pm) +
                                " psi=" + name(qm));
          else if (cl != 0 && (rc & ~cl))
            rep.fail("R8'", "E=" + seq_str(seq) + " phi=" + name(pm) +
                                " psi=" + name(qm));
          else if ((pm & qm) != 0 && r2 != rc)
            rep.fail("R9'", "E=" + seq_str(seq) + " phi=" + name(pm) +
                                " psi=" + name(qm) + " lhs=" + name(r2) +
                                " rhs=" + name(rc));
        }
      }
      ext.pop_back();
    }
    // R6' (belief-level reading): a syntactic variant revises identically.
    for (int phi = 0; phi < count && rep.pass; ++phi) {
      EpistemicState e;
      for (int f : seq) e.push_back(formulas[static_cast<size_t>(f)]);
      e.push_back(Formula::negate(Formula::negate(formulas[static_cast<size_t>(phi)])));
      ext.push_back(phi);
      std::uint64_t direct = bs(ext);
      ext.pop_back();
      if (space->mask_of(oracle(e).worlds()) != direct)
        rep.fail("R6'", "E=" + seq_str(seq) +
                            " phi=" + name(static_cast<std::uint64_t>(phi)));
    }
  }
  return rep;
}

RevisionOracle make_grove_oracle(const RevisionRanking& rk) {
  return [rk](const BeliefSet&, const Formula& phi) {
    return grove_revise(rk, phi);
  };
}

RevisionOracle make_drastic_oracle() {
  return [](const BeliefSet& k, const Formula& phi) {
    return BeliefSet::from_formula(k.space(), phi);
  };
}

RevisionOracle make_full_meet_oracle() {
  return [](const BeliefSet& k, const Formula& phi) {
    auto models = k.space()->models(phi);
    auto both = intersect_worlds(k.worlds(), models);
    return BeliefSet(k.space(), both.empty() ? models : both);
  };
}

EpistemicOracle make_epistemic_oracle(const RevisionRanking& rk) {
  return [rk](const EpistemicState& e) { return epistemic_bs(rk, e); };
}

EpistemicOracle make_raw_conditioning_oracle(const RevisionRanking& rk) {
  return [rk](const EpistemicState& e) {
    return grove_revise(rk, Formula::conj_all(e));
  };
}

EpistemicOracle make_stubborn_oracle(const RevisionRanking& rk) {
  return [rk](const EpistemicState& e) {
    // Each observation is accepted, but conflicts retract the newest
    // commitments first: early observations stay entrenched. The suffix
    // rule does the opposite, and only R9' tells the two apart.
    std::vector<Formula> committed;
    bool last_inconsistent = false;
    auto consistent = [&](const std::vector<Formula>& fs) {
      for (World w : rk.space->worlds) {
        bool ok = true;
        for (const Formula& f : fs)
          if (!eval(w, f, rk.space->vocab)) {
            ok = false;
            break;
          }
        if (ok) return true;
      }
      return false;
    };
    for (const Formula& o : e) {
      if (!consistent({o})) {
        last_inconsistent = true;
        continue;
      }
      last_inconsistent = false;
      committed.push_back(o);
      while (!consistent(committed))
        committed.erase(committed.end() - 2);  // drop the newest older one
    }
    if (last_inconsistent) return BeliefSet::inconsistent(rk.space);
    return grove_revise(rk, Formula::conj_all(committed));
  };
}

RevisionOracle make_table_oracle(const std::string& text,
                                 const SpacePtr& space) {
  auto table = std::make_shared<std::map<std::pair<std::string, std::string>,
                                         std::vector<World>>>();
  std::istringstream in(text);
  std::string line;
  auto canon_dnf = [space](const std::string& s) {
    Formula f = parse_formula(s, space->vocab);
    return char_formula_of(space, space->models(f)).print();
  };
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string k_part, phi_part, res_part;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ';')) {
      auto eq = field.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("bad oracle table line: " + line);
      std::string key = field.substr(0, eq);
      key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
      std::string val = field.substr(eq + 1);
      if (key == "K")
        k_part = val;
      else if (key == "phi")
        phi_part = val;
      else if (key == "result")
        res_part = val;
      else
        throw std::invalid_argument("bad oracle table key: " + key);
    }
    if (k_part.empty() || phi_part.empty() || res_part.empty())
      throw std::invalid_argument("incomplete oracle table line: " + line);
    Formula res = parse_formula(res_part, space->vocab);
    (*table)[{canon_dnf(k_part), canon_dnf(phi_part)}] = space->models(res);
  }
  return [table, space](const BeliefSet& k, const Formula& phi) {
    auto key = std::make_pair(
        char_formula_of(space, k.worlds()).print(),
        char_formula_of(space, space->models(phi)).print());
    auto it = table->find(key);
    if (it == table->end())
      throw std::runtime_error("oracle table has no entry for K=" + key.first +
                               " ; phi=" + key.second);
    return BeliefSet(space, it->second);
  };
}

std::string table_oracle_entry(const SpacePtr& space, const BeliefSet& k,
                               const Formula& phi, const BeliefSet& result) {
  std::ostringstream os;
  os << "K=" << k.char_formula().print() << " ; phi=" << phi.print()
     << " ; result=" << result.char_formula().print();
  return os.str();
}

}  // namespace bcs
