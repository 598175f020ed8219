#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <utility>

#include <json.hpp>

#include "dforge/coefficients.hpp"
#include "dforge/errors.hpp"

namespace dforge {

namespace {

constexpr int kMaxOrder = 11;

// A factor ∂x^i z_j; terms keep factors sorted in descending order.
using Factor = std::pair<int, int>;
using Term = std::vector<Factor>;
using TermMap = std::map<Term, long long>;

TermMap differentiate(const TermMap& in, bool prune) {
  TermMap out;
  for (const auto& [term, coef] : in) {
    // Chain rule through f: a new factor ∂x z_j for every slot.
    for (int j = -1; j <= 3; ++j) {
      Term t = term;
      t.insert(std::upper_bound(t.begin(), t.end(), Factor{1, j}, std::greater<>{}), Factor{1, j});
      out[t] += coef;
    }
    // Product rule on each distinct factor type.
    for (std::size_t l = 0; l < term.size();) {
      std::size_t r = l;
      while (r < term.size() && term[r] == term[l]) ++r;
      const auto [i, j] = term[l];
      if (!(prune && j == -1)) {
        Term t = term;
        t.erase(t.begin() + static_cast<long>(l));
        const Factor nf{i + 1, j};
        t.insert(std::upper_bound(t.begin(), t.end(), nf, std::greater<>{}), nf);
        out[t] += coef * static_cast<long long>(r - l);
      }
      l = r;
    }
  }
  return out;
}

std::vector<IndexTuple> to_tuples(const TermMap& m) {
  std::vector<IndexTuple> v;
  v.reserve(m.size());
  for (const auto& [term, coef] : m) {
    IndexTuple t;
    t.k = static_cast<int>(term.size());
    for (const auto& [i, j] : term) {
      t.i.push_back(i);
      t.j.push_back(j);
    }
    t.multiplicity = coef;
    v.push_back(std::move(t));
  }
  return v;
}

}  // namespace

const std::vector<IndexTuple>& faa_di_bruno_terms(int n, bool prune) {
  if (n < 1) throw ArgumentError("expansion order must be positive");
  if (n > kMaxOrder) throw RegularityError("expansion order exceeds the regularity budget of 11");
  static std::mutex mutex;
  static std::map<std::pair<int, bool>, std::unique_ptr<const std::vector<IndexTuple>>> memo;
  static std::map<bool, std::vector<TermMap>> chains;
  std::lock_guard lock(mutex);
  auto& slot = memo[{n, prune}];
  if (!slot) {
    auto& chain = chains[prune];
    if (chain.empty()) chain.push_back(TermMap{{Term{}, 1}});
    while (static_cast<int>(chain.size()) <= n) chain.push_back(differentiate(chain.back(), prune));
    slot = std::make_unique<const std::vector<IndexTuple>>(to_tuples(chain[static_cast<std::size_t>(n)]));
  }
  return *slot;
}

std::vector<IndexTuple> enumerate_indices(int n, int k, IndexMode mode) {
  if (n > kMaxOrder) throw RegularityError("expansion order exceeds the regularity budget of 11");
  if (k < 1 || k > n) throw ArgumentError("tuple length must satisfy 1 <= k <= n");
  std::vector<IndexTuple> out;
  for (const auto& t : faa_di_bruno_terms(n, true)) {
    if (t.k != k) continue;
    if (mode == IndexMode::remainder) {
      bool ok = true;
      for (int l = 0; l < k; ++l)
        if (t.i[l] + t.j[l] >= n || std::max(t.j[l], 1 - t.i[l]) < 0) ok = false;
      if (!ok) continue;
    }
    out.push_back(t);
  }
  return out;
}

bool operator<(const ExpansionTerm& a, const ExpansionTerm& b) {
  return std::tie(a.partial, a.orders, a.coeff) < std::tie(b.partial, b.orders, b.coeff);
}

bool operator==(const ExpansionTerm& a, const ExpansionTerm& b) {
  return a.partial == b.partial && a.orders == b.orders && a.coeff == b.coeff;
}

ExpansionTerm to_expansion_term(const IndexTuple& t) {
  ExpansionTerm e;
  std::vector<Slot> slots;
  for (int l = 0; l < t.k; ++l) {
    slots.push_back(t.j[l] == -1 ? Slot::X : z_slot(t.j[l]));
    if (t.j[l] >= 0) e.orders.push_back(t.i[l] + t.j[l]);
  }
  e.partial = PartialKey(std::move(slots));
  std::sort(e.orders.begin(), e.orders.end());
  e.coeff = t.multiplicity;
  return e;
}

std::vector<ExpansionTerm> expansion_terms(int n) {
  std::vector<ExpansionTerm> out;
  for (const auto& t : faa_di_bruno_terms(n, true)) out.push_back(to_expansion_term(t));
  return out;
}

void write_terms_json(std::ostream& os, const std::vector<IndexTuple>& terms) {
  auto arr = nlohmann::json::array();
  for (const auto& t : terms) arr.push_back({{"partials", t.j}, {"orders", t.i}, {"coeff", t.multiplicity}});
  os << arr.dump(2) << '\n';
}

}  // namespace dforge
