#pragma once

#include <optional>
#include <vector>

#include "persuasion/moments.hpp"

namespace persuasion {

/// Delta-method inference for beta1 / beta2.
struct RatioInference {
  double estimate = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double alpha = 0.05;
};

struct ArTestResult {
  double statistic = 0.0;
  bool reject = false;
};

/// One maximal run of non-rejected values. A flagged side means the run reached
/// the edge of the search grid, so the true set may extend further.
struct ArInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool lower_unbounded = false;
  bool upper_unbounded = false;
};

struct ArGrid {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t points = 2001;
  /// Bisection stops once the bracket is narrower than this.
  double tolerance = 1e-6;
};

struct ARResult {
  /// Statistic and p-value at the tested value p0.
  double p0 = 0.0;
  double statistic = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  double critical_value = 0.0;
  ArGrid grid;
  std::vector<ArInterval> intervals;

  bool empty() const { return intervals.empty(); }
  bool unbounded() const;
  bool contains(double p) const;
};

/// Standard normal quantile.
double normal_quantile(double p);
/// Quantile of chi-squared with one degree of freedom at 1 - alpha.
double chi2_1_critical(double alpha);

RatioInference delta_inference(const WaldComponents& c, double alpha = 0.05);

/// gamma(p0) = Var(b1) - 2 p0 Cov(b1, b2) + p0^2 Var(b2).
double ar_gamma(const WaldComponents& c, double p0);
/// (b1 - p0 b2)^2 / gamma(p0). Throws NumericalError when gamma <= 0.
double ar_statistic(const WaldComponents& c, double p0);
ArTestResult ar_test(const WaldComponents& c, double p0, double alpha = 0.05);

/// Default grid: estimate +/- 10 delta-method standard errors, 2001 points.
ArGrid default_ar_grid(const WaldComponents& c);
/// Inverts the AR test over `grid` (default_ar_grid when unset). The statistic
/// and p-value are reported at p0.
ARResult ar_confidence_set(const WaldComponents& c, double alpha = 0.05,
                           const std::optional<ArGrid>& grid = std::nullopt, double p0 = 0.0);

}  // namespace persuasion
