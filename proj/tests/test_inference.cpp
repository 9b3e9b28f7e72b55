#include <catch_amalgamated.hpp>
#include <cmath>

#include "persuasion/error.hpp"
#include "persuasion/estimands.hpp"
#include "persuasion/inference.hpp"
#include "persuasion/oracle.hpp"
#include "support.hpp"

using namespace persuasion;
using Catch::Approx;

namespace {
WaldComponents comps(double b1, double b2, double v11, double v12, double v22) {
  WaldComponents c;
  c.beta1 = b1;
  c.beta2 = b2;
  c.cov << v11, v12, v12, v22;
  return c;
}
}  // namespace

TEST_CASE("quantiles", "[inference]") {
  CHECK(normal_quantile(0.975) == Approx(1.959963984540054).epsilon(1e-12));
  CHECK(chi2_1_critical(0.05) == Approx(3.841458820694124).epsilon(1e-12));
  CHECK(chi2_1_critical(0.05) == Approx(normal_quantile(0.975) * normal_quantile(0.975)).epsilon(1e-12));
}

TEST_CASE("delta_inference examples", "[inference]") {
  const RatioInference a = delta_inference(comps(0.0, 0.5, 0.04, 0.0, 0.01));
  CHECK(a.estimate == 0.0);
  CHECK(a.se == Approx(std::sqrt(0.04) / 0.5));

  const RatioInference b = delta_inference(comps(0.3, 1.0, 0.0, 0.0, 0.0));
  CHECK(b.se == 0.0);
  CHECK(b.ci_lo == b.estimate);
  CHECK(b.ci_hi == b.estimate);

  const RatioInference c = delta_inference(comps(0.05, 0.5, 1e-4, 2e-5, 3e-4), 0.1);
  const double var = 1e-4 / 0.25 - 2 * 0.05 * 2e-5 / 0.125 + 0.0025 * 3e-4 / 0.0625;
  CHECK(c.se == Approx(std::sqrt(var)).epsilon(1e-12));
  CHECK(c.ci_hi - c.estimate == Approx(normal_quantile(0.95) * c.se).epsilon(1e-12));
  CHECK(c.ci_lo <= c.estimate);
  CHECK(c.estimate <= c.ci_hi);

  CHECK_THROWS_AS(delta_inference(comps(0.1, 1e-12, 1, 0, 1)), WeakFirstStageError);
  CHECK_THROWS_AS(delta_inference(comps(0.1, 1, 1, 0, 1), 1.5), ValidationError);
}

TEST_CASE("ar_test examples", "[inference]") {
  const WaldComponents c = comps(1.0, 1.0, 1.0, 0.0, 0.0);
  const ArTestResult r = ar_test(c, 0.0);
  CHECK(r.statistic == Approx(1.0));
  CHECK_FALSE(r.reject);

  const WaldComponents w = comps(0.0137, 0.2113, 2e-5, 3e-6, 4e-5);
  const ArTestResult at = ar_test(w, w.beta1 / w.beta2);
  CHECK(at.statistic == 0.0);
  CHECK_FALSE(at.reject);

  CHECK_THROWS_AS(ar_test(comps(1, 1, 0, 0, 0), 0.5), NumericalError);
}

TEST_CASE("AR statistic is exactly zero at the estimate on samples", "[inference][property]") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const ObservedSample s = draw_sample(dgp1(), 300, seed);
    const SampleMoments m(s);
    for (const TransformSpec& t : {transforms::theta_local(), transforms::mobilised_share(),
                                   transforms::always_voter_share(), transforms::never_voter_share()}) {
      const WaldComponents c = wald_components(m, t);
      if (std::abs(c.beta2) < kDenominatorGuard || ar_gamma(c, c.beta1 / c.beta2) <= 0.0) continue;
      CHECK(ar_statistic(c, c.beta1 / c.beta2) == 0.0);
    }
  }
}

TEST_CASE("AR set matches the closed-form quadratic solution", "[inference][oracle]") {
  Rng rng(77);
  int bounded = 0;
  int split = 0;
  for (int rep = 0; rep < 300; ++rep) {
    const double b1 = rng.uniform() - 0.5;
    const double b2 = (rng.uniform() - 0.5) * (rep % 3 == 0 ? 0.05 : 1.0);
    const double v11 = 1e-4 + 1e-2 * rng.uniform();
    const double v22 = 1e-4 + 1e-2 * rng.uniform();
    const double v12 = (rng.uniform() * 1.8 - 0.9) * std::sqrt(v11 * v22);
    const WaldComponents c = comps(b1, b2, v11, v12, v22);
    const double crit = chi2_1_critical(0.05);
    const auto want = testsupport::ar_closed_form(c, crit);
    const ArGrid grid{-20.0, 20.0, 4001, 1e-9};
    const ARResult got = ar_confidence_set(c, 0.05, grid);

    // Clip the closed form to the grid window, dropping pieces narrower than a grid step.
    std::vector<std::pair<double, double>> clipped;
    for (auto [lo, hi] : want.intervals) {
      lo = std::max(lo, grid.lo);
      hi = std::min(hi, grid.hi);
      if (hi - lo > 0.02) clipped.push_back({lo, hi});
    }
    REQUIRE(got.intervals.size() == clipped.size());
    for (std::size_t i = 0; i < clipped.size(); ++i) {
      const ArInterval& iv = got.intervals[i];
      CHECK(iv.lo == Approx(clipped[i].first).margin(1e-6));
      CHECK(iv.hi == Approx(clipped[i].second).margin(1e-6));
      CHECK(iv.lower_unbounded == (clipped[i].first == grid.lo));
      CHECK(iv.upper_unbounded == (clipped[i].second == grid.hi));
    }
    if (clipped.size() == 1 && !got.unbounded()) ++bounded;
    if (clipped.size() == 2) ++split;
  }
  CHECK(bounded > 50);
  CHECK(split > 5);
}

TEST_CASE("AR and delta sets contain the estimate", "[inference][property]") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const ObservedSample s = draw_sample(dgp1(), 2000, seed);
    const WaldComponents c = wald_components(s, transforms::theta_local());
    const double est = c.beta1 / c.beta2;
    const RatioInference d = delta_inference(c);
    CHECK(d.ci_lo <= est);
    CHECK(est <= d.ci_hi);
    CHECK(ar_confidence_set(c).contains(est));
  }
}

TEST_CASE("AR set shrinks as alpha grows", "[inference][property]") {
  const ObservedSample s = draw_sample(dgp1(), 3000, 5);
  const WaldComponents c = wald_components(s, transforms::theta_local());
  const ArGrid grid = default_ar_grid(c);
  double prev_lo = -1e300;
  double prev_hi = 1e300;
  for (double alpha : {0.01, 0.05, 0.1, 0.2, 0.5}) {
    const ARResult r = ar_confidence_set(c, alpha, grid);
    REQUIRE(r.intervals.size() == 1);
    CHECK(r.intervals[0].lo >= prev_lo - 1e-6);
    CHECK(r.intervals[0].hi <= prev_hi + 1e-6);
    prev_lo = r.intervals[0].lo;
    prev_hi = r.intervals[0].hi;
  }
}

TEST_CASE("weak identification gives a flagged set", "[inference]") {
  // Denominator indistinguishable from zero.
  const WaldComponents c = comps(0.05, 0.001, 1e-4, 0.0, 1e-4);
  const ARResult r = ar_confidence_set(c, 0.05, ArGrid{-50.0, 50.0, 2001, 1e-6});
  CHECK(r.unbounded());
  const ARResult d = ar_confidence_set(c);
  CHECK(d.unbounded());
  CHECK_THROWS_AS(ar_confidence_set(c, 0.05, ArGrid{1.0, 1.0, 10, 1e-6}), ValidationError);
  CHECK_THROWS_AS(ar_confidence_set(c, 0.05, ArGrid{0.0, 1.0, 1, 1e-6}), ValidationError);
}
