#include "persuasion/inference.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <string>

#include "persuasion/error.hpp"

namespace persuasion {
namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
}

// Acceptance at p0; a non-positive gamma only accepts an exact fit.
bool accepted(const WaldComponents& c, double p0, double crit) {
  const double gamma = ar_gamma(c, p0);
  const double resid = c.beta1 - p0 * c.beta2;
  if (!(gamma > 0.0)) return resid == 0.0;
  return resid * resid / gamma <= crit;
}

}  // namespace

bool ARResult::unbounded() const {
  return std::any_of(intervals.begin(), intervals.end(),
                     [](const ArInterval& i) { return i.lower_unbounded || i.upper_unbounded; });
}

bool ARResult::contains(double p) const {
  return std::any_of(intervals.begin(), intervals.end(), [p](const ArInterval& i) {
    return (i.lower_unbounded || p >= i.lo) && (i.upper_unbounded || p <= i.hi);
  });
}

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }

double chi2_1_critical(double alpha) {
  check_alpha(alpha);
  return boost::math::quantile(boost::math::complement(boost::math::chi_squared_distribution<double>(1.0), alpha));
}

RatioInference delta_inference(const WaldComponents& c, double alpha) {
  check_alpha(alpha);
  RatioInference r;
  r.alpha = alpha;
  r.estimate = wald_ratio(c);
  const double b1 = c.beta1;
  const double b2 = c.beta2;
  const double var = c.cov(0, 0) / (b2 * b2) - 2.0 * b1 * c.cov(0, 1) / (b2 * b2 * b2) +
                     b1 * b1 * c.cov(1, 1) / (b2 * b2 * b2 * b2);
  if (!std::isfinite(var)) throw NumericalError("delta-method variance is not finite");
  r.se = std::sqrt(std::max(0.0, var));
  const double z = normal_quantile(1.0 - alpha / 2.0);
  r.ci_lo = r.estimate - z * r.se;
  r.ci_hi = r.estimate + z * r.se;
  return r;
}

double ar_gamma(const WaldComponents& c, double p0) {
  return c.cov(0, 0) - 2.0 * p0 * c.cov(0, 1) + p0 * p0 * c.cov(1, 1);
}

double ar_statistic(const WaldComponents& c, double p0) {
  const double gamma = ar_gamma(c, p0);
  if (!(gamma > 0.0))
    throw NumericalError("AR variance gamma(p0) = " + std::to_string(gamma) + " is not positive");
  // Factored through the ratio so that p0 = beta1 / beta2 gives exactly zero.
  if (c.beta2 != 0.0) {
    const double gap = c.beta1 / c.beta2 - p0;
    return c.beta2 * c.beta2 * gap * gap / gamma;
  }
  return c.beta1 * c.beta1 / gamma;
}

ArTestResult ar_test(const WaldComponents& c, double p0, double alpha) {
  ArTestResult r;
  r.statistic = ar_statistic(c, p0);
  r.reject = r.statistic > chi2_1_critical(alpha);
  return r;
}

ArGrid default_ar_grid(const WaldComponents& c) {
  double center = 0.0;
  double half = 0.0;
  try {
    const RatioInference d = delta_inference(c);
    center = d.estimate;
    half = 10.0 * d.se;
  } catch (const NumericalError&) {
    // Weak first stage: fall back to a wide grid around zero.
  }
  if (!(half > 0.0) || !std::isfinite(half)) half = std::max(1.0, 10.0 * std::abs(center));
  return ArGrid{center - half, center + half, 2001, 1e-6};
}

ARResult ar_confidence_set(const WaldComponents& c, double alpha, const std::optional<ArGrid>& grid_opt,
                           double p0) {
  check_alpha(alpha);
  const ArGrid grid = grid_opt ? *grid_opt : default_ar_grid(c);
  if (!(grid.lo < grid.hi) || !std::isfinite(grid.lo) || !std::isfinite(grid.hi) || grid.points < 2 ||
      !(grid.tolerance > 0.0))
    throw ValidationError("AR grid is degenerate: need lo < hi, at least 2 points and a positive tolerance");

  ARResult res;
  res.alpha = alpha;
  res.grid = grid;
  res.p0 = p0;
  res.critical_value = chi2_1_critical(alpha);
  res.statistic = ar_statistic(c, p0);
  res.p_value = boost::math::cdf(
      boost::math::complement(boost::math::chi_squared_distribution<double>(1.0), res.statistic));

  const std::size_t m = grid.points;
  std::vector<double> pts(m);
  const double mid = 0.5 * (grid.lo + grid.hi);
  const double half = 0.5 * (grid.hi - grid.lo);
  const double steps = static_cast<double>(m - 1);
  for (std::size_t i = 0; i < m; ++i) pts[i] = mid + half * (2.0 * static_cast<double>(i) - steps) / steps;
  pts.front() = grid.lo;
  pts.back() = grid.hi;
  if (std::abs(c.beta2) >= kDenominatorGuard) {
    const double est = c.beta1 / c.beta2;
    if (est > grid.lo && est < grid.hi) {
      auto it = std::lower_bound(pts.begin(), pts.end(), est);
      if (*it != est) pts.insert(it, est);
    }
  }

  std::vector<char> ok(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) ok[i] = accepted(c, pts[i], res.critical_value);

  auto refine = [&](double in, double out) {
    while (std::abs(out - in) > grid.tolerance) {
      const double mid_pt = 0.5 * (in + out);
      if (accepted(c, mid_pt, res.critical_value))
        in = mid_pt;
      else
        out = mid_pt;
    }
    return in;
  };

  std::size_t i = 0;
  while (i < pts.size()) {
    if (!ok[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < pts.size() && ok[j + 1]) ++j;
    ArInterval iv;
    iv.lower_unbounded = i == 0;
    iv.upper_unbounded = j + 1 == pts.size();
    iv.lo = iv.lower_unbounded ? pts[i] : refine(pts[i], pts[i - 1]);
    iv.hi = iv.upper_unbounded ? pts[j] : refine(pts[j], pts[j + 1]);
    res.intervals.push_back(iv);
    i = j + 1;
  }
  return res;
}

}  // namespace persuasion
