#include "bcs/diagnosis.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace bcs {

namespace {

std::string short_suffix(const std::string& id, char prefix) {
  // "c1" -> "f1", "l3" -> "h3"; anything else gets an underscore.
  size_t i = 0;
  while (i < id.size() && !std::isdigit(static_cast<unsigned char>(id[i])))
    ++i;
  if (i < id.size() && i > 0)
    return std::string(1, prefix) + id.substr(i);
  return std::string(1, prefix) + "_" + id;
}

}  // namespace

std::vector<std::string> Circuit::line_names() const {
  std::vector<std::string> lines;
  auto add = [&](const std::string& l) {
    if (std::find(lines.begin(), lines.end(), l) == lines.end())
      lines.push_back(l);
  };
  for (const Gate& g : gates) {
    for (const auto& in : g.inputs) add(in);
    add(g.output);
  }
  // Stable numeric order when every line is l<digits>.
  bool numeric = std::all_of(lines.begin(), lines.end(), [](const std::string& l) {
    return l.size() >= 2 && l[0] == 'l' &&
           std::all_of(l.begin() + 1, l.end(), [](char c) {
             return std::isdigit(static_cast<unsigned char>(c));
           });
  });
  if (numeric)
    std::sort(lines.begin(), lines.end(), [](const auto& a, const auto& b) {
      return std::stoi(a.substr(1)) < std::stoi(b.substr(1));
    });
  return lines;
}

std::vector<std::string> Circuit::fault_atoms() const {
  std::vector<std::string> out;
  for (const Gate& g : gates) out.push_back(short_suffix(g.id, 'f'));
  return out;
}

std::vector<std::string> Circuit::line_atoms() const {
  std::vector<std::string> out;
  for (const auto& l : line_names()) out.push_back(short_suffix(l, 'h'));
  return out;
}

Vocabulary Circuit::vocabulary() const {
  std::vector<std::string> names = fault_atoms();
  for (const auto& h : line_atoms()) names.push_back(h);
  return Vocabulary::from_names(names);
}

void Circuit::validate() const {
  std::map<std::string, int> driver;
  for (size_t i = 0; i < gates.size(); ++i) {
    auto [it, fresh] = driver.emplace(gates[i].output, static_cast<int>(i));
    if (!fresh)
      throw std::invalid_argument("line " + gates[i].output +
                                  " driven by two components");
    if (gates[i].kind == GateKind::Not && gates[i].inputs.size() != 1)
      throw std::invalid_argument("NOT gate takes one input");
    if (gates[i].inputs.empty())
      throw std::invalid_argument("gate without inputs");
  }
  // Cycle check over line dependencies.
  std::map<std::string, int> state;  // 0 fresh, 1 visiting, 2 done
  auto dfs = [&](auto&& self, const std::string& line) -> void {
    int& s = state[line];
    if (s == 1) throw CyclicCircuit();
    if (s == 2) return;
    s = 1;
    auto it = driver.find(line);
    if (it != driver.end())
      for (const auto& in : gates[static_cast<size_t>(it->second)].inputs)
        self(self, in);
    s = 2;
  };
  for (const auto& l : line_names()) dfs(dfs, l);
}

namespace {

Formula gate_function(const Gate& g, const std::vector<Formula>& ins) {
  Formula acc = ins.front();
  switch (g.kind) {
    case GateKind::Not: return Formula::negate(ins.front());
    case GateKind::And:
    case GateKind::Nand:
      for (size_t i = 1; i < ins.size(); ++i) acc = Formula::conj(acc, ins[i]);
      return g.kind == GateKind::Nand ? Formula::negate(acc) : acc;
    case GateKind::Or:
    case GateKind::Nor:
      for (size_t i = 1; i < ins.size(); ++i) acc = Formula::disj(acc, ins[i]);
      return g.kind == GateKind::Nor ? Formula::negate(acc) : acc;
    case GateKind::Xor:
      for (size_t i = 1; i < ins.size(); ++i)
        acc = Formula::negate(Formula::iff(acc, ins[i]));
      return acc;
  }
  return acc;
}

}  // namespace

Theory circuit_theory(const Circuit& c) {
  c.validate();
  Vocabulary vocab = c.vocabulary();
  auto lines = c.line_names();
  auto line_atom = [&](const std::string& l) {
    return Formula::atom(Atom{short_suffix(l, 'h'), std::nullopt});
  };
  Theory t;
  for (size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    std::vector<Formula> ins;
    for (const auto& in : g.inputs) ins.push_back(line_atom(in));
    Formula healthy = Formula::negate(
        Formula::atom(Atom{short_suffix(g.id, 'f'), std::nullopt}));
    t.formulas.push_back(Formula::implies(
        healthy, Formula::iff(line_atom(g.output), gate_function(g, ins))));
  }
  return t;
}

namespace {

struct DiagContext {
  SpacePtr space;
  int n_faults;

  FaultSet faults_of(World w) const {
    FaultSet f;
    for (int i = 0; i < n_faults; ++i)
      if (world_bit(w, space->vocab.size(), i)) f.insert(i);
    return f;
  }
};

DiagContext make_context(const Circuit& c) {
  DiagContext ctx;
  ctx.space = WorldSpace::make(c.vocabulary(), circuit_theory(c));
  ctx.n_faults = static_cast<int>(c.gates.size());
  return ctx;
}

// Fault sets achievable under one observation.
std::set<FaultSet> achievable(const DiagContext& ctx, const Formula& obs) {
  std::set<FaultSet> out;
  for (World w : ctx.space->models(obs)) out.insert(ctx.faults_of(w));
  return out;
}

std::set<FaultSet> all_fault_sets(int n) {
  std::set<FaultSet> out;
  for (std::uint32_t m = 0; m < (1u << n); ++m) {
    FaultSet f;
    for (int i = 0; i < n; ++i)
      if (m >> i & 1) f.insert(i);
    out.insert(std::move(f));
  }
  return out;
}

std::set<FaultSet> min_cardinality(const std::set<FaultSet>& sets) {
  size_t best = SIZE_MAX;
  for (const auto& f : sets) best = std::min(best, f.size());
  std::set<FaultSet> out;
  for (const auto& f : sets)
    if (f.size() == best) out.insert(f);
  return out;
}

}  // namespace

std::string fault_set_str(const Circuit& c, const FaultSet& f) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (int i : f) {
    if (!first) os << ',';
    os << c.gates[static_cast<size_t>(i)].id;
    first = false;
  }
  os << '}';
  return os.str();
}

std::set<FaultSet> consistent_faults(const Circuit& c,
                                     const std::vector<Formula>& obs) {
  DiagContext ctx = make_context(c);
  std::set<FaultSet> result = all_fault_sets(ctx.n_faults);
  for (const Formula& o : obs) {
    std::set<FaultSet> here = achievable(ctx, o);
    std::set<FaultSet> keep;
    std::set_intersection(result.begin(), result.end(), here.begin(),
                          here.end(), std::inserter(keep, keep.begin()));
    result = std::move(keep);
  }
  return result;
}

std::set<FaultSet> diagnoses(const Circuit& c,
                             const std::vector<Formula>& obs) {
  auto cf = consistent_faults(c, obs);
  if (cf.empty()) return cf;
  return min_cardinality(cf);
}

CheckReport check_prop_2_4(const Circuit& c, const std::vector<Formula>& obs) {
  CheckReport rep;
  DiagContext ctx = make_context(c);
  std::set<FaultSet> cf = all_fault_sets(ctx.n_faults);
  std::set<FaultSet> d = min_cardinality(cf);
  for (size_t m = 0; m < obs.size(); ++m) {
    std::set<FaultSet> here = achievable(ctx, obs[m]);
    std::set<FaultSet> cf_next;
    std::set_intersection(cf.begin(), cf.end(), here.begin(), here.end(),
                          std::inserter(cf_next, cf_next.begin()));
    if (cf_next.empty()) {
      rep.fail("prop2.4", "observation " + std::to_string(m + 1) +
                              " is inconsistent with every fault set");
      return rep;
    }
    std::set<FaultSet> d_next = min_cardinality(cf_next);
    std::set<FaultSet> filtered;
    std::set_intersection(d.begin(), d.end(), here.begin(), here.end(),
                          std::inserter(filtered, filtered.begin()));
    if (!filtered.empty()) {
      // Expected: plain filtering.
      if (d_next != filtered) {
        rep.fail("prop2.4-filter", "step " + std::to_string(m + 1));
        return rep;
      }
    } else {
      // Surprising observation: a full jump, disjoint and strictly larger.
      std::set<FaultSet> overlap;
      std::set_intersection(d.begin(), d.end(), d_next.begin(), d_next.end(),
                            std::inserter(overlap, overlap.begin()));
      if (!overlap.empty()) {
        rep.fail("prop2.4-disjoint", "step " + std::to_string(m + 1));
        return rep;
      }
      size_t old_card = d.empty() ? 0 : d.begin()->size();
      size_t new_card = d_next.begin()->size();
      if (!(new_card > old_card)) {
        rep.fail("prop2.4-cardinality", "step " + std::to_string(m + 1));
        return rep;
      }
    }
    cf = std::move(cf_next);
    d = std::move(d_next);
  }
  return rep;
}

SystemModel build_diag_system(const Circuit& c,
                              const std::vector<Formula>& obs_alphabet, int T,
                              std::int64_t cap) {
  DiagContext ctx = make_context(c);
  SystemModel sys;
  sys.space = ctx.space;
  sys.horizon = T;
  sys.alphabet = obs_alphabet;
  sys.prior = PriorKind::Ranked;

  // Group worlds by fault pattern; faults persist along a run.
  std::map<FaultSet, std::vector<World>> by_fault;
  for (World w : ctx.space->worlds) by_fault[ctx.faults_of(w)].push_back(w);

  std::vector<std::vector<int>> ok(ctx.space->worlds.size());
  for (size_t wi = 0; wi < ctx.space->worlds.size(); ++wi)
    for (size_t a = 0; a < obs_alphabet.size(); ++a)
      if (eval(ctx.space->worlds[wi], obs_alphabet[a], ctx.space->vocab))
        ok[wi].push_back(static_cast<int>(a));

  std::int64_t produced = 0;
  for (auto& [faults, worlds] : by_fault) {
    // All world sequences within the fault class, with matching observations.
    std::vector<size_t> env_pick(static_cast<size_t>(T) + 1, 0);
    while (true) {
      std::vector<World> env;
      for (size_t t = 0; t <= static_cast<size_t>(T); ++t)
        env.push_back(worlds[env_pick[t]]);
      std::vector<size_t> obs_pick(static_cast<size_t>(T), 0);
      bool obs_possible = true;
      for (size_t t = 0; t < static_cast<size_t>(T); ++t)
        if (ok[static_cast<size_t>(ctx.space->index_of(env[t + 1]))].empty())
          obs_possible = false;
      if (obs_possible) {
        while (true) {
          std::vector<int> obs;
          for (size_t t = 0; t < static_cast<size_t>(T); ++t) {
            auto& choices =
                ok[static_cast<size_t>(ctx.space->index_of(env[t + 1]))];
            obs.push_back(choices[obs_pick[t]]);
          }
          sys.runs.push_back({env, obs});
          sys.rank.push_back(static_cast<std::int64_t>(faults.size()));
          if (++produced > cap)
            throw StateSpaceTooLarge("diagnosis system exceeds cap");
          size_t t = static_cast<size_t>(T);
          bool carried = true;
          while (t-- > 0) {
            auto& choices =
                ok[static_cast<size_t>(ctx.space->index_of(env[t + 1]))];
            if (++obs_pick[t] < choices.size()) {
              carried = false;
              break;
            }
            obs_pick[t] = 0;
          }
          if (T == 0 || carried) break;
        }
      }
      size_t t = static_cast<size_t>(T) + 1;
      bool carried = true;
      while (t-- > 0) {
        if (++env_pick[t] < worlds.size()) {
          carried = false;
          break;
        }
        env_pick[t] = 0;
      }
      if (carried) break;
    }
  }
  sys.finalize();
  return sys;
}

std::set<FaultSet> diagnoses_via_system(const Circuit& c,
                                        const std::vector<Formula>& obs) {
  DiagContext ctx = make_context(c);
  std::vector<Formula> alphabet{Formula::truth()};
  for (const Formula& o : obs) {
    bool seen = false;
    for (const Formula& a : alphabet)
      if (a.same_as(o)) seen = true;
    if (!seen) alphabet.push_back(o);
  }
  SystemModel sys =
      build_diag_system(c, alphabet, static_cast<int>(obs.size()));
  BeliefSet b = bel(sys, obs);
  std::set<FaultSet> out;
  for (World w : b.worlds()) out.insert(ctx.faults_of(w));
  return out;
}

Circuit parse_circuit(const std::string& text) {
  Circuit c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::vector<std::string> toks;
    std::string t;
    while (ls >> t) toks.push_back(t);
    if (toks.empty()) continue;
    if (toks[0] != "gate" || toks.size() < 5 || toks[toks.size() - 2] != "->")
      throw std::invalid_argument("bad circuit line: " + line);
    Gate g;
    g.id = toks[1];
    std::string kind = toks[2];
    std::transform(kind.begin(), kind.end(), kind.begin(), ::toupper);
    if (kind == "AND") g.kind = GateKind::And;
    else if (kind == "OR") g.kind = GateKind::Or;
    else if (kind == "NOT") g.kind = GateKind::Not;
    else if (kind == "XOR") g.kind = GateKind::Xor;
    else if (kind == "NAND") g.kind = GateKind::Nand;
    else if (kind == "NOR") g.kind = GateKind::Nor;
    else throw std::invalid_argument("unknown gate kind: " + kind);
    for (size_t i = 3; i + 2 < toks.size(); ++i) g.inputs.push_back(toks[i]);
    g.output = toks.back();
    c.gates.push_back(std::move(g));
  }
  c.validate();
  return c;
}

}  // namespace bcs
