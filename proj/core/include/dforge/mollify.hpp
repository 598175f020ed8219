#pragma once

#include <iosfwd>
#include <vector>

#include "dforge/spectral.hpp"

namespace dforge {

/// Radial cutoff φ with φ = 1 on [0,1], φ = 0 on [2,∞) and a C^∞ monotone transition.
class BumpCutoff {
 public:
  BumpCutoff();

  double operator()(double r) const;
  /// 1 − φ(r), computed without cancellation near r = 1.
  double complement(double r) const;
  /// Linear interpolation in the precomputed table on [1, 2].
  double tabulated(double r) const;
  const std::vector<double>& table() const noexcept { return table_; }

 private:
  std::vector<double> table_;
};

BumpCutoff build_bump();

struct MollifiedData {
  StateFunction original;
  double delta;
  StateFunction result;
};

/// Spectral regularization (u0)_δ with transform û0(ξ)·φ(δ|ξ|).
MollifiedData mollify(const StateFunction& u0, double delta);

struct MollifierRow {
  double delta = 0.0;
  double h[5] = {};  // ‖(u0)_δ‖_{H^{7+j}}, j = 0..4
  double l2_diff = 0.0;
  double h7_diff = 0.0;
  double l2_rate = 0.0;  // log-log slope against the previous row; NaN on the first row
  double h7_rate = 0.0;
};

struct MollifierReport {
  double h7_original = 0.0;
  std::vector<MollifierRow> rows;
  /// Least-squares slope of log l2_diff against log δ over rows with nonzero difference.
  double fitted_l2_rate = 0.0;

  void write_csv(std::ostream& os) const;
};

MollifierReport mollifier_report(const StateFunction& u0, const std::vector<double>& deltas);

}  // namespace dforge
