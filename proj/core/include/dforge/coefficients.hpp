#pragma once

#include <iosfwd>
#include <vector>

#include "dforge/nonlinearity.hpp"
#include "dforge/spectral.hpp"

namespace dforge {

/// One term C · f_{j_1…j_k} · Π ∂x^{i_l} z_{j_l} of the expanded ∂x^n f; j = −1 denotes the x slot.
struct IndexTuple {
  int k = 0;
  std::vector<int> i;  // nonincreasing, Σ i = n
  std::vector<int> j;  // −1 ≤ j ≤ 3, paired with i
  long long multiplicity = 0;
};

enum class IndexMode {
  full,       ///< every surviving term of ∂x^n f
  remainder,  ///< only tuples with i_l + j_l < n for all l
};

/// All terms of ∂x^n f(z3, z2, z1, z0, x) generated by repeated symbolic differentiation with
/// term merging. With `prune`, factors ∂x^i x for i ≥ 2 are dropped as identically zero.
const std::vector<IndexTuple>& faa_di_bruno_terms(int n, bool prune = true);

/// Terms with exactly k factors. Throws RegularityError for n > 11.
std::vector<IndexTuple> enumerate_indices(int n, int k, IndexMode mode = IndexMode::full);

/// A term in monomial form: coeff · ∂_partial f · Π ∂x^{o} u over `orders`.
struct ExpansionTerm {
  PartialKey partial;
  std::vector<int> orders;  // ascending derivative orders of u
  long long coeff = 0;

  friend bool operator<(const ExpansionTerm& a, const ExpansionTerm& b);
  friend bool operator==(const ExpansionTerm& a, const ExpansionTerm& b);
};

ExpansionTerm to_expansion_term(const IndexTuple& t);
std::vector<ExpansionTerm> expansion_terms(int n);

/// The hand-written 59-term expansion of ∂x³ f.
const std::vector<ExpansionTerm>& tabulated_third_derivative_terms();

/// Evaluates the tabulated expansion of ∂x³ f along u.
StateFunction third_derivative_rhs(const NonlinearitySpec& spec, const StateFunction& u);

/// Σ coeff · ∂_partial f · Π ∂x^o u over the given terms.
StateFunction evaluate_expansion(const NonlinearitySpec& spec, const StateFunction& u,
                                 const std::vector<ExpansionTerm>& terms);

/// ∂x^n f = a3 ∂x^{n+3}u + a2 ∂x^{n+2}u + a1 ∂x^{n+1}u + a0 ∂x^n u + remainder.
struct LinearizedCoefficients {
  int n = 0;
  StateFunction a3, a2, a1, a0, remainder;
  double epsilon = 0.0;

  /// Right-hand side of the identity above evaluated along u.
  StateFunction reconstruct(const StateFunction& u) const;
};

/// Coefficients from the explicit expansion at n = 3 or n = 7 followed by the recursion
/// a1 += ∂a2, a0 += ∂a1, f̃ ← ∂f̃ + ∂a0·∂x^m u. a3 and a2 are returned in closed form.
LinearizedCoefficients linearized_coefficients(const NonlinearitySpec& spec, const StateFunction& u,
                                               int n, double epsilon = 0.0);

/// Coefficients bucketed directly from the order-n expansion, without the recursion.
LinearizedCoefficients explicit_coefficients(const NonlinearitySpec& spec, const StateFunction& u,
                                             int n, double epsilon = 0.0);

/// ‖reconstruct(u) − ∂x^n f(u)‖_{L²} / ‖∂x^n f(u)‖_{L²} over the dealiased band, with ∂x^n taken spectrally.
double reconstruction_error(const NonlinearitySpec& spec, const StateFunction& u,
                            const LinearizedCoefficients& c);

struct RemainderRow {
  double amplitude = 0.0;
  double remainder_l2 = 0.0;
  double h7 = 0.0;
  double majorant = 0.0;  // 1, ‖u‖_{H^8} or ‖u‖_{H^11}
  double ratio = 0.0;
};

struct RemainderReport {
  int n = 0;
  std::vector<RemainderRow> rows;
  /// Log-log slope of ratio against ‖u‖_{H^7} over rows with nonzero ratio.
  double growth_exponent = 0.0;
  bool bounded = false;
};

/// Evaluates ‖f̃_n‖ against the majorant of the matching remainder estimate on the family
/// A·profile. `bounded` requires finite ratios growing at most like ‖u‖_{H^7}^{max_growth}.
RemainderReport remainder_norm_check(const NonlinearitySpec& spec, const StateFunction& profile, int n,
                                     const std::vector<double>& amplitudes, double max_growth = 3.0);

/// JSON array of {partials: [j…], orders: [i…], coeff}.
void write_terms_json(std::ostream& os, const std::vector<IndexTuple>& terms);

}  // namespace dforge
