#include "bcs/update.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <random>
#include <sstream>

namespace bcs {

Rational::Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

Rational Rational::parse(const std::string& text) {
  auto slash = text.find('/');
  if (slash == std::string::npos) return Rational(std::stoll(text), 1);
  return Rational(std::stoll(text.substr(0, slash)),
                  std::stoll(text.substr(slash + 1)));
}

bool Rational::operator<(const Rational& o) const {
  return num * o.den < o.num * den;
}

Rational Rational::operator+(const Rational& o) const {
  return Rational(num * o.den + o.num * den, den * o.den);
}

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

DistValue UpdateStructure::d(World a, World b) const {
  const int n = space->vocab.size();
  DistValue v;
  if (auto* h = std::get_if<HammingDistance>(&dist)) {
    (void)h;
    v.value = Rational(std::popcount(static_cast<unsigned>(a ^ b)), 1);
  } else if (auto* wh = std::get_if<WeightedHammingDistance>(&dist)) {
    Rational sum(0, 1);
    for (int i = 0; i < n; ++i)
      if (world_bit(a, n, i) != world_bit(b, n, i))
        sum = sum + wh->weights[static_cast<size_t>(i)];
    v.value = sum;
  } else if (auto* nm = std::get_if<NumericMatrixDistance>(&dist)) {
    v.value = nm->entries[static_cast<size_t>(space->index_of(a))]
                         [static_cast<size_t>(space->index_of(b))];
  } else {
    auto& pm = std::get<PosetMatrixDistance>(dist);
    v.numeric = false;
    v.label = pm.entries[static_cast<size_t>(space->index_of(a))]
                        [static_cast<size_t>(space->index_of(b))];
  }
  return v;
}

std::string UpdateStructure::dist_kind() const {
  switch (dist.index()) {
    case 0: return "hamming";
    case 1: return "weighted-hamming";
    case 2: return "explicit-numeric";
    default: return "explicit-poset";
  }
}

ComparisonResult compare_distance(const UpdateStructure& u, const DistValue& a,
                                  const DistValue& b) {
  ComparisonResult r;
  if (a.numeric != b.numeric)
    throw UnknownDistanceValue("mixed numeric and poset values");
  if (a.numeric) {
    if (a.value == b.value)
      r.rel = Ordering::EQ;
    else
      r.rel = a.value < b.value ? Ordering::LT : Ordering::GT;
    return r;
  }
  auto& pm = std::get<PosetMatrixDistance>(u.dist);
  if (a.label < 0 || b.label < 0 ||
      a.label >= static_cast<int>(pm.labels.size()) ||
      b.label >= static_cast<int>(pm.labels.size()))
    throw UnknownDistanceValue("label out of range");
  if (a.label == b.label)
    r.rel = Ordering::EQ;
  else if (pm.less[static_cast<size_t>(a.label)][static_cast<size_t>(b.label)])
    r.rel = Ordering::LT;
  else if (pm.less[static_cast<size_t>(b.label)][static_cast<size_t>(a.label)])
    r.rel = Ordering::GT;
  else
    r.rel = Ordering::Incomparable;
  return r;
}

bool distance_lt(const UpdateStructure& u, const DistValue& a,
                 const DistValue& b) {
  return compare_distance(u, a, b).rel == Ordering::LT;
}

std::vector<World> min_u(const UpdateStructure& u, const std::vector<World>& a,
                         const std::vector<World>& b) {
  std::vector<World> out;
  for (World w : b) {
    bool keep = false;
    for (World w0 : a) {
      DistValue dw = u.d(w0, w);
      bool undominated = true;
      for (World wp : b)
        if (distance_lt(u, u.d(w0, wp), dw)) {
          undominated = false;
          break;
        }
      if (undominated) {
        keep = true;
        break;
      }
    }
    if (keep) out.push_back(w);
  }
  return out;
}

BeliefSet km_update(const UpdateStructure& u, const BeliefSet& mu,
                    const Formula& phi) {
  return BeliefSet(u.space, min_u(u, mu.worlds(), u.space->models(phi)));
}

BeliefSet km_update_seq(const UpdateStructure& u, const BeliefSet& mu,
                        const std::vector<Formula>& obs) {
  BeliefSet acc = mu;
  for (const auto& f : obs) acc = km_update(u, acc, f);
  return acc;
}

bool sufficient_information(const UpdateStructure& u, World from, World to,
                            const Formula& phi) {
  if (!eval(to, phi, u.space->vocab))
    throw PreconditionViolated("sufficient_information: target world " +
                               world_to_string(to, u.space->vocab.size()) +
                               " does not satisfy the observation");
  DistValue dt = u.d(from, to);
  for (World w : u.space->models(phi))
    if (distance_lt(u, u.d(from, w), dt)) return false;
  return true;
}

namespace {

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

}  // namespace

CheckReport check_km(const UpdateOracle& oracle, const SpacePtr& space,
                     std::uint64_t seed) {
  const int n = space->size();
  if (n > 8) throw CarrierTooLarge(n, 8);
  CheckReport rep;
  const std::uint64_t full = (n == 64) ? ~0ull : (1ull << n) - 1;
  const std::uint64_t subset_count = full + 1;

  // One witness per postulate; later postulates still run.
  auto fail_once = [&](const std::string& prop, const std::string& witness) {
    for (const auto& f : rep.findings)
      if (f.property == prop) return;
    rep.fail(prop, witness);
  };

  // Memoized oracle over (mu_mask, phi_mask).
  std::vector<std::vector<std::uint64_t>> memo(
      subset_count, std::vector<std::uint64_t>(subset_count, ~0ull));
  auto call = [&](std::uint64_t mu, std::uint64_t phi) -> std::uint64_t {
    auto& slot = memo[mu][phi];
    if (slot != ~0ull) return slot;
    auto result = oracle(space->unmask(mu), phi);
    slot = space->mask_of(result);
    return slot;
  };

  auto name = [&](std::uint64_t m) { return mask_str(space, m); };

  // U1, U2, U3 over all (mu, phi); U4 re-queries for determinism.
  for (std::uint64_t mu = 0; mu < subset_count; ++mu)
    for (std::uint64_t phi = 0; phi < subset_count; ++phi) {
      std::uint64_t r = call(mu, phi);
      if (r & ~phi)
        fail_once("U1", "mu=" + name(mu) + " phi=" + name(phi) +
                            " result=" + name(r));
      if ((mu & ~phi) == 0 && r != mu)
        fail_once("U2", "mu=" + name(mu) + " phi=" + name(phi) +
                            " result=" + name(r));
      if ((r == 0) != (mu == 0 || phi == 0))
        fail_once("U3", "mu=" + name(mu) + " phi=" + name(phi) +
                            " result=" + name(r));
      auto again = space->mask_of(oracle(space->unmask(mu), phi));
      if (r != again)
        fail_once("U4", "mu=" + name(mu) + " phi=" + name(phi));
    }

  // U5, U6: exhaustive when the universe has at most 4 worlds, else sampled.
  std::mt19937_64 rng(seed);
  auto u56 = [&](std::uint64_t mu, std::uint64_t p1, std::uint64_t p2) {
    std::uint64_t r1 = call(mu, p1);
    if (r1 & p2) {
      std::uint64_t r12 = call(mu, p1 & p2);
      if ((r1 & p2) & ~r12)
        fail_once("U5", "mu=" + name(mu) + " phi=" + name(p1) +
                            " psi=" + name(p2));
    }
    std::uint64_t r2 = call(mu, p2);
    if ((r1 & ~p2) == 0 && (r2 & ~p1) == 0 && r1 != r2)
      fail_once("U6", "mu=" + name(mu) + " phi1=" + name(p1) +
                          " phi2=" + name(p2));
  };
  if (n <= 4) {
    for (std::uint64_t mu = 0; mu < subset_count; ++mu)
      for (std::uint64_t p1 = 0; p1 < subset_count; ++p1)
        for (std::uint64_t p2 = 0; p2 < subset_count; ++p2) u56(mu, p1, p2);
  } else {
    for (int i = 0; i < 20000; ++i)
      u56(rng() & full, rng() & full, rng() & full);
  }

  // U7 with complete mu (singletons).
  for (int i = 0; i < n; ++i) {
    std::uint64_t mu = 1ull << i;
    for (std::uint64_t p1 = 0; p1 < subset_count; ++p1)
      for (std::uint64_t p2 = 0; p2 < subset_count; ++p2) {
        std::uint64_t both = call(mu, p1) & call(mu, p2);
        if (both & ~call(mu, p1 | p2))
          fail_once("U7", "mu=" + name(mu) + " phi1=" + name(p1) +
                              " phi2=" + name(p2));
      }
  }

  // U8 decomposes into singleton additivity plus the empty-disjunct
  // instances: mu o phi must equal the union over its worlds, and
  // false o phi must be contained in every mu o phi.
  std::vector<std::vector<std::uint64_t>> single(
      static_cast<size_t>(n), std::vector<std::uint64_t>(subset_count));
  for (int i = 0; i < n; ++i)
    for (std::uint64_t phi = 0; phi < subset_count; ++phi)
      single[static_cast<size_t>(i)][phi] = call(1ull << i, phi);
  for (std::uint64_t mu = 1; mu < subset_count; ++mu)
    for (std::uint64_t phi = 0; phi < subset_count; ++phi) {
      std::uint64_t whole = call(mu, phi);
      std::uint64_t pointwise = 0;
      for (int i = 0; i < n; ++i)
        if (mu >> i & 1) pointwise |= single[static_cast<size_t>(i)][phi];
      if (whole != pointwise) {
        // Find a two-way split that fails outright.
        std::uint64_t w1 = mu & (~mu + 1), w2 = mu & ~w1;
        for (std::uint64_t a = (mu - 1) & mu; a; a = (a - 1) & mu) {
          std::uint64_t b = mu & ~a;  // proper nonempty split
          if ((call(a, phi) | call(b, phi)) != whole) {
            w1 = a;
            w2 = b;
            break;
          }
        }
        fail_once("U8", "mu1=" + name(w1) + " mu2=" + name(w2) + " phi=" +
                            name(phi) + " lhs=" + name(whole) + " rhs=" +
                            name(call(w1, phi) | call(w2, phi)));
      }
    }
  for (std::uint64_t mu = 0; mu < subset_count; ++mu)
    for (std::uint64_t phi = 0; phi < subset_count; ++phi) {
      std::uint64_t whole = call(mu, phi);
      if (call(0, phi) & ~whole)
        fail_once("U8", "mu1=" + name(mu) + " mu2=" + name(0) + " phi=" +
                            name(phi) + " lhs=" + name(whole) + " rhs=" +
                            name(whole | call(0, phi)));
    }
  return rep;
}

CheckReport validate_update_structure(const UpdateStructure& u) {
  CheckReport rep;
  const auto& ws = u.space->worlds;
  const int n = u.space->vocab.size();

  // Coverage: the universe is exactly the theory's models.
  auto fresh = WorldSpace::make(u.space->vocab, u.space->theory);
  if (fresh->worlds != ws)
    rep.fail("coverage", "universe differs from the theory's model set");

  for (World a : ws)
    for (World b : ws) {
      DistValue v = u.d(a, b);
      bool is_zero = v.numeric ? v.value == Rational(0, 1) : v.label == 0;
      if ((a == b) != is_zero) {
        rep.fail(a == b ? "zero-self-distance" : "zero-off-diagonal",
                 "d(" + world_to_string(a, n) + "," + world_to_string(b, n) +
                     ")=" + (v.numeric ? v.value.str() : std::to_string(v.label)));
        return rep;
      }
      if (a != b) {
        // 0 must be the unique minimum: d(a,b) > 0 for distinct pairs.
        DistValue zero;
        if (!v.numeric) {
          zero.numeric = false;
          zero.label = 0;
        }
        auto c = compare_distance(u, zero, v);
        if (c.rel != Ordering::LT) {
          rep.fail("zero-minimality",
                   "d(" + world_to_string(a, n) + "," + world_to_string(b, n) +
                       ") not above 0");
          return rep;
        }
      }
    }

  if (auto* pm = std::get_if<PosetMatrixDistance>(&u.dist)) {
    const int k = static_cast<int>(pm->labels.size());
    for (int i = 0; i < k; ++i) {
      if (pm->less[static_cast<size_t>(i)][static_cast<size_t>(i)]) {
        rep.fail("poset-irreflexive", pm->labels[static_cast<size_t>(i)]);
        return rep;
      }
      for (int j = 0; j < k; ++j)
        for (int l = 0; l < k; ++l)
          if (pm->less[static_cast<size_t>(i)][static_cast<size_t>(j)] &&
              pm->less[static_cast<size_t>(j)][static_cast<size_t>(l)] &&
              !pm->less[static_cast<size_t>(i)][static_cast<size_t>(l)]) {
            rep.fail("poset-transitive",
                     pm->labels[static_cast<size_t>(i)] + "<" +
                         pm->labels[static_cast<size_t>(j)] + "<" +
                         pm->labels[static_cast<size_t>(l)]);
            return rep;
          }
      if (i != 0 && !pm->less[0][static_cast<size_t>(i)]) {
        rep.fail("zero-minimality", "0 not below " + pm->labels[static_cast<size_t>(i)]);
        return rep;
      }
    }
  }
  if (std::holds_alternative<WeightedHammingDistance>(u.dist)) {
    auto& wh = std::get<WeightedHammingDistance>(u.dist);
    for (const auto& w : wh.weights)
      if (!(Rational(0, 1) < w)) {
        rep.fail("weights-positive", w.str());
        return rep;
      }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Text table format

UpdateStructure parse_distance_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> vocab_names;
  std::vector<std::string> header;
  std::vector<std::pair<std::string, std::vector<std::string>>> rows;
  std::vector<std::pair<std::string, std::string>> order_decls;

  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::vector<std::string> toks;
    std::string t;
    while (ls >> t) toks.push_back(t);
    if (toks.empty()) continue;
    if (toks[0] == "vocab:") {
      vocab_names.assign(toks.begin() + 1, toks.end());
    } else if (toks[0] == "order:") {
      if (toks.size() != 4 || toks[2] != "<")
        throw std::invalid_argument("bad order line: " + line);
      order_decls.emplace_back(toks[1], toks[3]);
    } else if (header.empty()) {
      header = toks;
    } else {
      if (toks.size() != header.size() + 1)
        throw std::invalid_argument("bad matrix row: " + line);
      rows.emplace_back(toks[0],
                        std::vector<std::string>(toks.begin() + 1, toks.end()));
    }
  }
  if (header.empty()) throw std::invalid_argument("missing matrix header");
  const int n_atoms = static_cast<int>(header[0].size());
  if (vocab_names.empty())
    for (int i = 0; i < n_atoms; ++i)
      vocab_names.push_back("p" + std::to_string(i + 1));

  auto space = WorldSpace::make(Vocabulary::from_names(vocab_names), Theory{});
  if (static_cast<int>(header.size()) != space->size() ||
      rows.size() != header.size())
    throw std::invalid_argument("matrix shape does not match the universe");

  // The matrix rows/columns may list worlds in any order; map them.
  std::vector<int> col(header.size());
  for (size_t j = 0; j < header.size(); ++j) {
    int idx = space->index_of(world_from_string(header[j]));
    if (idx < 0) throw std::invalid_argument("unknown world " + header[j]);
    col[j] = idx;
  }

  bool numeric = order_decls.empty();
  if (numeric)
    for (auto& [w, entries] : rows)
      for (auto& e : entries)
        if (e.find_first_not_of("0123456789/") != std::string::npos)
          numeric = false;

  UpdateStructure u;
  u.space = space;
  if (numeric) {
    NumericMatrixDistance nm;
    nm.entries.assign(static_cast<size_t>(space->size()),
                      std::vector<Rational>(static_cast<size_t>(space->size())));
    for (auto& [wtext, entries] : rows) {
      int i = space->index_of(world_from_string(wtext));
      if (i < 0) throw std::invalid_argument("unknown world " + wtext);
      for (size_t j = 0; j < entries.size(); ++j)
        nm.entries[static_cast<size_t>(i)][static_cast<size_t>(col[j])] =
            Rational::parse(entries[j]);
    }
    u.dist = std::move(nm);
  } else {
    PosetMatrixDistance pm;
    pm.labels.push_back("0");
    auto label_id = [&](const std::string& s) {
      for (size_t i = 0; i < pm.labels.size(); ++i)
        if (pm.labels[i] == s) return static_cast<int>(i);
      pm.labels.push_back(s);
      return static_cast<int>(pm.labels.size() - 1);
    };
    pm.entries.assign(static_cast<size_t>(space->size()),
                      std::vector<int>(static_cast<size_t>(space->size()), 0));
    for (auto& [wtext, entries] : rows) {
      int i = space->index_of(world_from_string(wtext));
      if (i < 0) throw std::invalid_argument("unknown world " + wtext);
      for (size_t j = 0; j < entries.size(); ++j)
        pm.entries[static_cast<size_t>(i)][static_cast<size_t>(col[j])] =
            label_id(entries[j]);
    }
    const int k = static_cast<int>(pm.labels.size());
    pm.less.assign(static_cast<size_t>(k),
                   std::vector<bool>(static_cast<size_t>(k), false));
    for (auto& [a, b] : order_decls) {
      pm.less[static_cast<size_t>(label_id(a))][static_cast<size_t>(label_id(b))] =
          true;
    }
    for (int i = 1; i < k; ++i) pm.less[0][static_cast<size_t>(i)] = true;
    for (int m = 0; m < k; ++m)
      for (int i = 0; i < k; ++i)
        if (pm.less[static_cast<size_t>(i)][static_cast<size_t>(m)])
          for (int j = 0; j < k; ++j)
            if (pm.less[static_cast<size_t>(m)][static_cast<size_t>(j)])
              pm.less[static_cast<size_t>(i)][static_cast<size_t>(j)] = true;
    u.dist = std::move(pm);
  }
  return u;
}

std::string distance_table_to_text(const UpdateStructure& u) {
  std::ostringstream os;
  const int n = u.space->vocab.size();
  os << "vocab:";
  for (int i = 0; i < n; ++i) os << ' ' << u.space->vocab.at(i).display();
  os << '\n';
  for (World w : u.space->worlds) os << ' ' << world_to_string(w, n);
  os << '\n';
  for (World a : u.space->worlds) {
    os << world_to_string(a, n);
    for (World b : u.space->worlds) {
      DistValue v = u.d(a, b);
      os << ' '
         << (v.numeric
                 ? v.value.str()
                 : std::get<PosetMatrixDistance>(u.dist)
                       .labels[static_cast<size_t>(v.label)]);
    }
    os << '\n';
  }
  if (auto* pm = std::get_if<PosetMatrixDistance>(&u.dist)) {
    for (size_t i = 0; i < pm->labels.size(); ++i)
      for (size_t j = 0; j < pm->labels.size(); ++j)
        if (pm->less[i][j]) os << "order: " << pm->labels[i] << " < "
                               << pm->labels[j] << '\n';
  }
  return os.str();
}

}  // namespace bcs
