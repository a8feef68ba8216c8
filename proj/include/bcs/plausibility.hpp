#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "bcs/kernel.hpp"

namespace bcs {

struct CarrierTooLarge : std::runtime_error {
  CarrierTooLarge(int n, int bound)
      : std::runtime_error("carrier of " + std::to_string(n) +
                           " elements exceeds checker bound " +
                           std::to_string(bound)) {}
};

enum class Ordering { LT, EQ, GT, Incomparable };

struct ComparisonResult {
  Ordering rel;
  bool left_bottom = false;
  bool right_bottom = false;
};

// Elements are indices into an abstract finite carrier [0, n).
using IndexSet = std::vector<int>;

inline constexpr std::int64_t kInfRank = INT64_MAX;

// Total preorder by rank; lower rank = more plausible. Set plausibility is
// the minimum rank; empty or all-infinite sets sit at bottom.
struct RankedMeasure {
  std::vector<std::int64_t> rank;

  int size() const { return static_cast<int>(rank.size()); }
  std::int64_t min_rank(const IndexSet& s) const;
  bool is_bottom(const IndexSet& s) const { return min_rank(s) == kInfRank; }
};

// Strict partial order; comparisons between sets follow the dominance rule:
// Pl(A) >= Pl(B) iff every e in B-A has a witness e' in A with e' < e and no
// element of B-A below e'.
struct PreferenceMeasure {
  int n = 0;
  std::vector<std::vector<bool>> precedes;  // transitive closure, irreflexive

  static PreferenceMeasure from_edges(
      int n, const std::vector<std::pair<int, int>>& edges);
  int size() const { return n; }
  bool prec(int a, int b) const {
    return precedes[static_cast<size_t>(a)][static_cast<size_t>(b)];
  }
  bool set_ge(const IndexSet& a, const IndexSet& b) const;
  bool is_bottom(const IndexSet& s) const { return s.empty(); }
  IndexSet minimal_elements(const IndexSet& s) const;
};

ComparisonResult compare(const RankedMeasure& m, const IndexSet& a,
                         const IndexSet& b);
ComparisonResult compare(const PreferenceMeasure& m, const IndexSet& a,
                         const IndexSet& b);

struct CheckFinding {
  std::string property;
  std::string witness;
};

struct CheckReport {
  bool pass = true;
  std::vector<CheckFinding> findings;
  std::vector<std::string> notes;

  void fail(std::string property, std::string witness) {
    pass = false;
    findings.push_back({std::move(property), std::move(witness)});
  }
};

namespace detail {

inline IndexSet set_intersect(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

inline IndexSet set_minus(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

inline IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

inline std::string set_to_string(const IndexSet& s) {
  std::ostringstream os;
  os << '{';
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << ',';
    os << s[i];
  }
  os << '}';
  return os.str();
}

}  // namespace detail

// phi -> psi: phi is at bottom, or phi/\psi is strictly more plausible than
// phi/\!psi. Works for any type with compare() and is_bottom().
template <class Measure>
bool conditional_holds(const Measure& m, const IndexSet& phi,
                       const IndexSet& psi) {
  if (m.is_bottom(phi)) return true;
  auto c = compare(m, detail::set_intersect(phi, psi),
                   detail::set_minus(phi, psi));
  return c.rel == Ordering::GT;
}

template <class Measure>
bool believes(const Measure& m, const IndexSet& universe,
              const IndexSet& phi) {
  return conditional_holds(m, universe, phi);
}

template <class Measure>
IndexSet belief_worlds(const Measure& m, const IndexSet& universe) {
  IndexSet out;
  for (int e : universe) {
    IndexSet without;
    for (int x : universe)
      if (x != e) without.push_back(x);
    if (!believes(m, universe, without)) out.push_back(e);
  }
  return out;
}

// The order-based conditional clause: every phi-element sees some element at
// least as preferred that satisfies phi/\psi, below which phi implies psi.
bool preferential_satisfies(const PreferenceMeasure& order, const IndexSet& phi,
                            const IndexSet& psi, const IndexSet& universe);

namespace detail {

template <class Measure>
bool set_gt(const Measure& m, const IndexSet& a, const IndexSet& b) {
  return compare(m, a, b).rel == Ordering::GT;
}

}  // namespace detail

// Exhaustive A1/A2/A3 test over subset pairs and ordered disjoint triples.
// Carrier bound 8.
template <class Measure>
CheckReport check_qualitative(const Measure& m, const IndexSet& universe) {
  constexpr int kBound = 8;
  const int n = static_cast<int>(universe.size());
  if (n > kBound) throw CarrierTooLarge(n, kBound);
  CheckReport rep;

  const std::uint32_t full = (1u << n) - 1;
  auto lift = [&](std::uint32_t mask) {
    IndexSet s;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1) s.push_back(universe[static_cast<size_t>(i)]);
    return s;
  };

  // A1: A subseteq B implies Pl(A) <= Pl(B).
  for (std::uint32_t b = 0; b <= full; ++b) {
    for (std::uint32_t a = b;; a = (a - 1) & b) {  // subsets of b
      auto c = compare(m, lift(a), lift(b));
      if (c.rel == Ordering::GT || c.rel == Ordering::Incomparable) {
        rep.fail("A1", "A=" + detail::set_to_string(lift(a)) +
                           " B=" + detail::set_to_string(lift(b)));
        return rep;
      }
      if (a == 0) break;
    }
  }

  // A2 over ordered disjoint triples (each element in A, B, C, or none).
  std::vector<int> slot(static_cast<size_t>(n), 0);
  while (true) {
    IndexSet A, B, C;
    for (int i = 0; i < n; ++i) {
      int e = universe[static_cast<size_t>(i)];
      switch (slot[static_cast<size_t>(i)]) {
        case 1: A.push_back(e); break;
        case 2: B.push_back(e); break;
        case 3: C.push_back(e); break;
        default: break;
      }
    }
    if (detail::set_gt(m, detail::set_union(A, B), C) &&
        detail::set_gt(m, detail::set_union(A, C), B) &&
        !detail::set_gt(m, A, detail::set_union(B, C))) {
      rep.fail("A2", "A=" + detail::set_to_string(A) +
                         " B=" + detail::set_to_string(B) +
                         " C=" + detail::set_to_string(C));
      return rep;
    }
    int i = 0;
    for (; i < n; ++i) {
      if (++slot[static_cast<size_t>(i)] <= 3) break;
      slot[static_cast<size_t>(i)] = 0;
    }
    if (i == n) break;
  }

  // A3: bottoms are closed under union.
  for (std::uint32_t a = 0; a <= full; ++a)
    for (std::uint32_t b = 0; b <= full; ++b) {
      IndexSet A = lift(a), B = lift(b);
      if (m.is_bottom(A) && m.is_bottom(B) &&
          !m.is_bottom(detail::set_union(A, B))) {
        rep.fail("A3", "A=" + detail::set_to_string(A) +
                           " B=" + detail::set_to_string(B));
        return rep;
      }
    }

  return rep;
}

// Rational monotonicity alone; pass/fail with witness. Carrier bound 5.
template <class Measure>
CheckReport check_rational_monotonicity(const Measure& m,
                                        const IndexSet& universe) {
  constexpr int kBound = 5;
  const int n = static_cast<int>(universe.size());
  if (n > kBound) throw CarrierTooLarge(n, kBound);
  CheckReport rep;
  const std::uint32_t full = (1u << n) - 1;
  auto lift = [&](std::uint32_t mask) {
    IndexSet s;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1) s.push_back(universe[static_cast<size_t>(i)]);
    return s;
  };
  for (std::uint32_t a = 0; a <= full; ++a)
    for (std::uint32_t c = 0; c <= full; ++c) {
      if (!conditional_holds(m, lift(a), lift(c))) continue;
      for (std::uint32_t b = 0; b <= full; ++b) {
        if (conditional_holds(m, lift(a), lift(full & ~b))) continue;
        if (!conditional_holds(m, lift(a & b), lift(c))) {
          rep.fail("RM", "A=" + detail::set_to_string(lift(a)) +
                             " B=" + detail::set_to_string(lift(b)) +
                             " C=" + detail::set_to_string(lift(c)));
          return rep;
        }
      }
    }
  return rep;
}

// LLE, RW, REF, AND, OR, CM over all set instantiations; rational
// monotonicity additionally enforced for ranked measures and reported as a
// note otherwise. Carrier bound 5.
template <class Measure>
CheckReport check_klm(const Measure& m, const IndexSet& universe) {
  constexpr int kBound = 5;
  const int n = static_cast<int>(universe.size());
  if (n > kBound) throw CarrierTooLarge(n, kBound);
  CheckReport rep;
  const std::uint32_t full = (1u << n) - 1;
  auto lift = [&](std::uint32_t mask) {
    IndexSet s;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1) s.push_back(universe[static_cast<size_t>(i)]);
    return s;
  };
  auto cond = [&](std::uint32_t a, std::uint32_t b) {
    return conditional_holds(m, lift(a), lift(b));
  };

  // REF: phi -> phi.
  for (std::uint32_t a = 0; a <= full; ++a)
    if (!cond(a, a)) {
      rep.fail("REF", "phi=" + detail::set_to_string(lift(a)));
      return rep;
    }

  // LLE is trivial extensionally; RW: phi -> psi and psi subseteq psi'
  // gives phi -> psi'.
  for (std::uint32_t a = 0; a <= full; ++a)
    for (std::uint32_t c = 0; c <= full; ++c) {
      if (!cond(a, c)) continue;
      for (std::uint32_t c2 = c;; c2 = (c2 + 1) | c) {  // supersets of c
        if (!cond(a, c2)) {
          rep.fail("RW", "phi=" + detail::set_to_string(lift(a)) +
                             " psi=" + detail::set_to_string(lift(c)) +
                             " psi'=" + detail::set_to_string(lift(c2)));
          return rep;
        }
        if (c2 == full) break;
      }
    }

  // AND and CM share the premise pair.
  for (std::uint32_t a = 0; a <= full; ++a)
    for (std::uint32_t c1 = 0; c1 <= full; ++c1) {
      if (!cond(a, c1)) continue;
      for (std::uint32_t c2 = 0; c2 <= full; ++c2) {
        if (!cond(a, c2)) continue;
        if (!cond(a, c1 & c2)) {
          rep.fail("AND", "phi=" + detail::set_to_string(lift(a)) +
                              " psi1=" + detail::set_to_string(lift(c1)) +
                              " psi2=" + detail::set_to_string(lift(c2)));
          return rep;
        }
        if (!cond(a & c1, c2)) {
          rep.fail("CM", "phi=" + detail::set_to_string(lift(a)) +
                             " psi1=" + detail::set_to_string(lift(c1)) +
                             " psi2=" + detail::set_to_string(lift(c2)));
          return rep;
        }
      }
    }

  // OR.
  for (std::uint32_t a1 = 0; a1 <= full; ++a1)
    for (std::uint32_t c = 0; c <= full; ++c) {
      if (!cond(a1, c)) continue;
      for (std::uint32_t a2 = 0; a2 <= full; ++a2) {
        if (!cond(a2, c)) continue;
        if (!cond(a1 | a2, c)) {
          rep.fail("OR", "phi1=" + detail::set_to_string(lift(a1)) +
                             " phi2=" + detail::set_to_string(lift(a2)) +
                             " psi=" + detail::set_to_string(lift(c)));
          return rep;
        }
      }
    }

  auto rm = check_rational_monotonicity(m, universe);
  if constexpr (std::is_same_v<Measure, RankedMeasure>) {
    if (!rm.pass) {
      rep.pass = false;
      rep.findings = rm.findings;
    }
  } else {
    if (!rm.pass)
      rep.notes.push_back("rational monotonicity fails: " +
                          rm.findings.front().witness);
  }
  return rep;
}

// Text table serialization: "<label> <rank>" lines (ranked) or
// "<a> < <b>" lines (preference).
std::string measure_to_table(const RankedMeasure& m,
                             const std::vector<std::string>& labels);
std::string measure_to_table(const PreferenceMeasure& m,
                             const std::vector<std::string>& labels);

}  // namespace bcs
