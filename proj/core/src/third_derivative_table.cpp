#include "dforge/coefficients.hpp"

namespace dforge {

namespace {

struct Row {
  const char* partial;
  std::vector<int> orders;
  long long coeff;
};

// ∂x³ f written out term by term. Orders are derivative counts of u in each monomial factor.
const Row kRows[] = {
    {"f_xxx", {}, 1},
    {"f_xxz0", {1}, 3},
    {"f_xxz1", {2}, 3},
    {"f_xxz2", {3}, 3},
    {"f_xxz3", {4}, 3},
    {"f_xz0", {2}, 3},
    {"f_xz0z0", {1, 1}, 3},
    {"f_xz0z1", {1, 2}, 6},
    {"f_xz0z2", {1, 3}, 6},
    {"f_xz0z3", {1, 4}, 6},
    {"f_xz1", {3}, 3},
    {"f_xz1z1", {2, 2}, 3},
    {"f_xz1z2", {2, 3}, 6},
    {"f_xz1z3", {2, 4}, 6},
    {"f_xz2", {4}, 3},
    {"f_xz2z2", {3, 3}, 3},
    {"f_xz2z3", {3, 4}, 6},
    {"f_xz3", {5}, 3},
    {"f_xz3z3", {4, 4}, 3},
    {"f_z0", {3}, 1},
    {"f_z0z0", {1, 2}, 3},
    {"f_z0z1", {1, 3}, 3},
    {"f_z0z1", {2, 2}, 3},
    {"f_z0z2", {1, 4}, 3},
    {"f_z0z2", {2, 3}, 3},
    {"f_z0z3", {1, 5}, 3},
    {"f_z0z3", {2, 4}, 3},
    {"f_z0z0z0", {1, 1, 1}, 1},
    {"f_z0z0z1", {1, 1, 2}, 3},
    {"f_z0z0z2", {1, 1, 3}, 3},
    {"f_z0z0z3", {1, 1, 4}, 3},
    {"f_z0z1z1", {1, 2, 2}, 3},
    {"f_z0z1z2", {1, 2, 3}, 6},
    {"f_z0z1z3", {1, 2, 4}, 6},
    {"f_z0z2z2", {1, 3, 3}, 3},
    {"f_z0z2z3", {1, 3, 4}, 6},
    {"f_z0z3z3", {1, 4, 4}, 3},
    {"f_z1", {4}, 1},
    {"f_z1z1", {2, 3}, 3},
    {"f_z1z2", {2, 4}, 3},
    {"f_z1z2", {3, 3}, 3},
    {"f_z1z3", {2, 5}, 3},
    {"f_z1z3", {3, 4}, 3},
    {"f_z1z1z1", {2, 2, 2}, 1},
    {"f_z1z1z2", {2, 2, 3}, 3},
    {"f_z1z1z3", {2, 2, 4}, 3},
    {"f_z1z2z2", {2, 3, 3}, 3},
    {"f_z1z2z3", {2, 3, 4}, 6},
    {"f_z1z3z3", {2, 4, 4}, 3},
    {"f_z2", {5}, 1},
    {"f_z2z2", {3, 4}, 3},
    {"f_z2z3", {3, 5}, 3},
    {"f_z2z3", {4, 4}, 3},
    {"f_z2z2z2", {3, 3, 3}, 1},
    {"f_z2z2z3", {3, 3, 4}, 3},
    {"f_z2z3z3", {3, 4, 4}, 3},
    {"f_z3", {6}, 1},
    {"f_z3z3", {4, 5}, 3},
    {"f_z3z3z3", {4, 4, 4}, 1},
};

}  // namespace

const std::vector<ExpansionTerm>& tabulated_third_derivative_terms() {
  static const std::vector<ExpansionTerm> terms = [] {
    std::vector<ExpansionTerm> v;
    for (const auto& r : kRows) v.push_back({PartialKey::parse(r.partial), r.orders, r.coeff});
    return v;
  }();
  return terms;
}

}  // namespace dforge
