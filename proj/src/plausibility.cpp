#include "bcs/plausibility.hpp"

#include <algorithm>
#include <sstream>

namespace bcs {

std::int64_t RankedMeasure::min_rank(const IndexSet& s) const {
  std::int64_t best = kInfRank;
  for (int e : s) best = std::min(best, rank[static_cast<size_t>(e)]);
  return best;
}

PreferenceMeasure PreferenceMeasure::from_edges(
    int n, const std::vector<std::pair<int, int>>& edges) {
  PreferenceMeasure m;
  m.n = n;
  m.precedes.assign(static_cast<size_t>(n),
                    std::vector<bool>(static_cast<size_t>(n), false));
  for (auto [a, b] : edges)
    m.precedes[static_cast<size_t>(a)][static_cast<size_t>(b)] = true;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      if (m.precedes[static_cast<size_t>(i)][static_cast<size_t>(k)])
        for (int j = 0; j < n; ++j)
          if (m.precedes[static_cast<size_t>(k)][static_cast<size_t>(j)])
            m.precedes[static_cast<size_t>(i)][static_cast<size_t>(j)] = true;
  for (int i = 0; i < n; ++i)
    if (m.precedes[static_cast<size_t>(i)][static_cast<size_t>(i)])
      throw std::invalid_argument("preference order has a cycle");
  return m;
}

bool PreferenceMeasure::set_ge(const IndexSet& a, const IndexSet& b) const {
  IndexSet diff = detail::set_minus(b, a);
  for (int e : diff) {
    bool witnessed = false;
    for (int w : a) {
      if (!prec(w, e)) continue;
      bool undominated = true;
      for (int d : diff)
        if (prec(d, w)) {
          undominated = false;
          break;
        }
      if (undominated) {
        witnessed = true;
        break;
      }
    }
    if (!witnessed) return false;
  }
  return true;
}

IndexSet PreferenceMeasure::minimal_elements(const IndexSet& s) const {
  IndexSet out;
  for (int e : s) {
    bool minimal = true;
    for (int d : s)
      if (prec(d, e)) {
        minimal = false;
        break;
      }
    if (minimal) out.push_back(e);
  }
  return out;
}

ComparisonResult compare(const RankedMeasure& m, const IndexSet& a,
                         const IndexSet& b) {
  std::int64_t ra = m.min_rank(a), rb = m.min_rank(b);
  ComparisonResult r;
  r.left_bottom = ra == kInfRank;
  r.right_bottom = rb == kInfRank;
  if (ra == rb)
    r.rel = Ordering::EQ;
  else
    r.rel = ra < rb ? Ordering::GT : Ordering::LT;  // lower rank wins
  return r;
}

ComparisonResult compare(const PreferenceMeasure& m, const IndexSet& a,
                         const IndexSet& b) {
  bool ge = m.set_ge(a, b);
  bool le = m.set_ge(b, a);
  ComparisonResult r;
  r.left_bottom = a.empty();
  r.right_bottom = b.empty();
  if (ge && le)
    r.rel = Ordering::EQ;
  else if (ge)
    r.rel = Ordering::GT;
  else if (le)
    r.rel = Ordering::LT;
  else
    r.rel = Ordering::Incomparable;
  return r;
}

bool preferential_satisfies(const PreferenceMeasure& order, const IndexSet& phi,
                            const IndexSet& psi, const IndexSet& universe) {
  IndexSet phi_and_psi = detail::set_intersect(phi, psi);
  for (int w1 : phi) {
    bool found = false;
    for (int w2 : phi_and_psi) {
      if (!(w2 == w1 || order.prec(w2, w1))) continue;  // (a) w2 preceq w1
      // (c) everything strictly below w2 satisfies phi => psi
      bool clause_c = true;
      for (int w3 : universe) {
        if (!order.prec(w3, w2)) continue;
        bool in_phi = std::binary_search(phi.begin(), phi.end(), w3);
        bool in_psi = std::binary_search(psi.begin(), psi.end(), w3);
        if (in_phi && !in_psi) {
          clause_c = false;
          break;
        }
      }
      if (clause_c) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

std::string measure_to_table(const RankedMeasure& m,
                             const std::vector<std::string>& labels) {
  std::ostringstream os;
  for (int i = 0; i < m.size(); ++i) {
    os << labels[static_cast<size_t>(i)] << ' ';
    if (m.rank[static_cast<size_t>(i)] == kInfRank)
      os << "inf";
    else
      os << m.rank[static_cast<size_t>(i)];
    os << '\n';
  }
  return os.str();
}

std::string measure_to_table(const PreferenceMeasure& m,
                             const std::vector<std::string>& labels) {
  std::ostringstream os;
  for (int a = 0; a < m.n; ++a)
    for (int b = 0; b < m.n; ++b)
      if (m.prec(a, b))
        os << labels[static_cast<size_t>(a)] << " < "
           << labels[static_cast<size_t>(b)] << '\n';
  return os.str();
}

}  // namespace bcs
