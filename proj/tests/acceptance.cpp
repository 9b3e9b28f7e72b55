// Acceptance checks. Run with a criterion number (1-8) or without arguments for all.
// Prints one PASS/FAIL line per criterion; exit status is non-zero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "persuasion/error.hpp"
#include "persuasion/estimands.hpp"
#include "persuasion/falsifier.hpp"
#include "persuasion/inference.hpp"
#include "persuasion/oracle.hpp"
#include "persuasion/sensitivity.hpp"
#include "support.hpp"

#ifndef PERSUADE_EXE
#error "PERSUADE_EXE must point at the persuade executable"
#endif

using namespace persuasion;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failures with a short reason; the first few are kept for the report.
class Checker {
 public:
  void require(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) first_ += (first_.empty() ? "" : "; ") + what;
  }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    std::ostringstream s;
    s << checks_ << " checks";
    if (failures_) s << ", " << failures_ << " failed: " << first_;
    return s.str();
  }

 private:
  long checks_ = 0;
  long failures_ = 0;
  std::string first_;
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::vector<ProfileTarget> all_targets() {
  std::vector<ProfileTarget> t = {ProfileTarget::complier(), ProfileTarget::always_voter(),
                                  ProfileTarget::never_voter(), ProfileTarget::mobilised()};
  for (int tt = 0; tt < 2; ++tt)
    for (int y = 0; y < 2; ++y) t.push_back(ProfileTarget::marginal(tt, y));
  for (int v = 1; v <= 6; ++v) t.push_back(ProfileTarget::joint_indicator(v));
  for (int y = 0; y < 2; ++y) {
    t.push_back(ProfileTarget::always_taker(y));
    t.push_back(ProfileTarget::never_taker(y));
  }
  return t;
}

Outcome criterion1() {
  Checker c;
  Rng rng(20240601);
  const double tol = 1e-10;
  const CovariateFn g = [](int t, std::span<const double> x) { return 1.5 * x[0] - x[1] + 0.25 * t * x[1]; };
  const OutcomeCovariateFn gk = [](int y, int t, std::span<const double> x) { return y * (1.0 + x[1]) + 0.5 * t - x[0]; };
  const int dgps = 60;
  for (int rep = 0; rep < dgps; ++rep) {
    const LatentDGP d = random_valid_dgp(rng);
    const PopulationMoments pop(d);
    const OracleTruth truth = oracle_estimands(d);
    const std::string tag = "dgp " + std::to_string(rep);

    const ComplierJointPO j = joint_po(pop);
    c.require(close(j.p11, truth.joint->p11, tol) && close(j.p00, truth.joint->p00, tol) &&
                  close(j.p01, truth.joint->p01, tol),
              tag + " joint");
    const MarginalPO m = marginal_po(pop);
    for (int y = 0; y < 2; ++y)
      c.require(close(m.p_y0[y], truth.marginal->p_y0[y], tol) && close(m.p_y1[y], truth.marginal->p_y1[y], tol),
                tag + " marginal");
    const PersuasionRates r = persuasion_rates(pop);
    c.require(close(r.theta_local, *truth.theta_local, tol), tag + " theta_local");
    c.require(close(r.theta_dk, *truth.theta_dk, tol), tag + " theta_dk");
    c.require(close(r.theta_local_untreated, *truth.theta_local_untreated, tol), tag + " theta_local_untreated");
    const DkLocalComparison dk = compare_dk_local(pop);
    c.require(close(dk.gap, *truth.theta_dk - *truth.theta_local, tol), tag + " dk gap");
    for (int t = 0; t < 2; ++t) c.require(close(kappa_moment(pop, gk, t), *oracle_kappa(d, gk, t), tol), tag + " kappa");
    for (const ProfileTarget& target : all_targets()) {
      const auto want = oracle_profile(d, g, target);
      c.require(want.has_value(), tag + " oracle " + target.name());
      if (want) c.require(close(profile(pop, g, target).value, *want, tol), tag + " profile " + target.name());
    }
    for (std::size_t cov = 0; cov < 2; ++cov) {
      const std::vector<double> grid{-0.5, 0.0, 0.5, 1.0, 1.5, 2.0};
      for (const ProfileTarget& target : {ProfileTarget::mobilised(), ProfileTarget::always_voter(),
                                          ProfileTarget::never_voter(), ProfileTarget::marginal(1, 1)}) {
        const auto cdf = conditional_cdf(pop, cov, target, grid);
        for (const CdfPoint& pt : cdf) {
          const CovariateFn ind = [cov, at = pt.x](int, std::span<const double> x) { return x[cov] <= at ? 1.0 : 0.0; };
          c.require(close(pt.value, *oracle_profile(d, ind, target), tol), tag + " cdf");
        }
      }
    }
    c.require(oracle_population_residual(d) <= 1e-10, tag + " falsifier feasibility");
  }
  return {c.ok(), std::to_string(dgps) + " random DGPs, " + c.summary()};
}

Outcome criterion2() {
  Checker c;
  long evaluated = 0;
  long skipped = 0;
  double worst_sum = 0.0;
  double worst_rate = 0.0;
  Rng rng(77);
  std::vector<LatentDGP> dgps{dgp1()};
  for (int i = 0; i < 4; ++i) dgps.push_back(random_valid_dgp(rng));
  for (std::size_t di = 0; di < dgps.size(); ++di)
    for (std::size_t n : {20, 30, 50, 200, 2000})
      for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const ObservedSample s = draw_sample(dgps[di], n, Rng::derive(di * 1000 + n, seed));
        try {
          const SampleMoments mom(s);
          const ComplierJointPO j = joint_po(mom);
          const PersuasionRates r = persuasion_rates(mom);
          const double sum_err = std::abs(j.p11 + j.p00 + j.p01 - 1.0);
          const double rate_err = std::abs(r.theta_local * (j.p01 + j.p00) - j.p01);
          worst_sum = std::max(worst_sum, sum_err);
          worst_rate = std::max(worst_rate, rate_err);
          c.require(sum_err <= 1e-12, "sum identity n=" + std::to_string(n));
          c.require(rate_err <= 1e-12, "rate identity n=" + std::to_string(n));
          ++evaluated;
        } catch (const std::exception&) {
          // Guard failures (no first stage, empty arm, zero theta_local denominator) at small n.
          ++skipped;
        }
      }
  c.require(evaluated >= 4000, "too few evaluable samples");
  return {c.ok(), std::to_string(evaluated) + " samples (" + std::to_string(skipped) +
                      " skipped by guards), max |p11+p00+p01-1| = " + fmt(worst_sum, 3) +
                      ", max |theta*(p01+p00)-p01| = " + fmt(worst_rate, 3) + "; " + c.summary()};
}

Outcome criterion3() {
  Checker c;
  const double tol = 0.001 + 1e-12;
  {
    const auto curve = sensitivity_curve(SensitivityMarginals{0.302, 0.381}, {0.1, 0.12, 0.14, 0.16, 0.18, 0.2});
    const double p11[] = {0.202, 0.182, 0.162, 0.142, 0.122, 0.102};
    const double p00[] = {0.519, 0.499, 0.479, 0.459, 0.439, 0.419};
    const double p01[] = {0.179, 0.199, 0.219, 0.239, 0.259, 0.279};
    for (std::size_t i = 0; i < 6; ++i)
      c.require(close(curve[i].p11, p11[i], tol) && close(curve[i].p00, p00[i], tol) &&
                    close(curve[i].p01, p01[i], tol),
                "full-sample row " + std::to_string(i));
  }
  {
    const auto curve = sensitivity_curve(SensitivityMarginals{0.111, 0.250}, {0.05, 0.06, 0.07, 0.08, 0.09, 0.1});
    const double p11[] = {0.061, 0.051, 0.041, 0.031, 0.021, 0.011};
    const double p00[] = {0.7, 0.69, 0.68, 0.67, 0.66, 0.65};
    const double p01[] = {0.189, 0.199, 0.209, 0.219, 0.229, 0.239};
    for (std::size_t i = 0; i < 6; ++i)
      c.require(close(curve[i].p11, p11[i], tol) && close(curve[i].p00, p00[i], tol) &&
                    close(curve[i].p01, p01[i], tol),
                "Bridgeport row " + std::to_string(i));
  }
  const double full = theta_local_from_joint(0.079, 0.698 - 0.079);
  const double bridgeport = theta_local_from_joint(0.139, 0.889 - 0.139);
  c.require(close(full, 0.113, tol), "theta_local full sample");
  c.require(close(bridgeport, 0.157, tol), "theta_local Bridgeport");
  return {c.ok(), "12 sensitivity rows, theta_local " + fmt(full, 4) + " and " + fmt(bridgeport, 4) + "; " + c.summary()};
}

Outcome criterion4() {
  Checker c;
  const int reps = 500;
  const double truth[] = {0.3, 0.6, 0.1};
  double mean[3] = {};
  int covered[3] = {};
  for (int rep = 0; rep < reps; ++rep) {
    const ObservedSample s = draw_sample(dgp1(), 20000, Rng::derive(4, static_cast<std::uint64_t>(rep)));
    const ComplierJointPO j = joint_po(s);
    const WaldComponents* comps[] = {&j.components.p11, &j.components.p00, &j.components.p01};
    const double est[] = {j.p11, j.p00, j.p01};
    for (int k = 0; k < 3; ++k) {
      mean[k] += est[k] / reps;
      const RatioInference ci = delta_inference(*comps[k], 0.05);
      if (ci.ci_lo <= truth[k] && truth[k] <= ci.ci_hi) ++covered[k];
    }
  }
  std::string detail = "mean (p11,p00,p01) = (";
  for (int k = 0; k < 3; ++k) {
    c.require(std::abs(mean[k] - truth[k]) <= 0.01, "mean " + std::to_string(k));
    const double cov = static_cast<double>(covered[k]) / reps;
    c.require(cov >= 0.93 && cov <= 0.97, "coverage " + std::to_string(k) + " = " + fmt(cov, 3));
    detail += fmt(mean[k], 4) + (k < 2 ? ", " : ")");
  }
  detail += ", coverage = (" + fmt(covered[0] / double(reps), 3) + ", " + fmt(covered[1] / double(reps), 3) + ", " +
            fmt(covered[2] / double(reps), 3) + ") over " + std::to_string(reps) + " reps";
  return {c.ok(), detail + "; " + c.summary()};
}

double hausdorff(const ARResult& ar, const RatioInference& d) {
  if (ar.intervals.size() != 1 || ar.unbounded()) return std::numeric_limits<double>::infinity();
  return std::max(std::abs(ar.intervals[0].lo - d.ci_lo), std::abs(ar.intervals[0].hi - d.ci_hi));
}

Outcome criterion5() {
  Checker c;
  long zero_checks = 0;
  for (std::size_t n : {20, 100, 1000, 20000})
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const ObservedSample s = draw_sample(dgp1(), n, Rng::derive(5, seed * 100000 + n));
      try {
        const SampleMoments mom(s);
        for (const TransformSpec& t : {transforms::theta_local(), transforms::mobilised_share(),
                                       transforms::always_voter_share(), transforms::never_voter_share()}) {
          const WaldComponents w = wald_components(mom, t);
          if (std::abs(w.beta2) < kDenominatorGuard) continue;
          const double est = w.beta1 / w.beta2;
          if (!(ar_gamma(w, est) > 0.0)) continue;
          c.require(ar_statistic(w, est) == 0.0, "nonzero statistic at estimate");
          ++zero_checks;
        }
      } catch (const ValidationError&) {
      }
    }
  const int reps = 50;
  double dist[2] = {};
  const std::size_t sizes[] = {5000, 80000};
  for (int i = 0; i < 2; ++i)
    for (int rep = 0; rep < reps; ++rep) {
      const ObservedSample s = draw_sample(dgp1(), sizes[i], Rng::derive(55 + i, static_cast<std::uint64_t>(rep)));
      const WaldComponents w = wald_components(s, transforms::theta_local());
      dist[i] += hausdorff(ar_confidence_set(w, 0.05), delta_inference(w, 0.05)) / reps;
    }
  c.require(std::isfinite(dist[0]) && dist[1] < 0.5 * dist[0], "Hausdorff distance did not halve");
  return {c.ok(), std::to_string(zero_checks) + " zero-at-estimate checks; mean Hausdorff(AR, delta) for theta_local = " +
                      fmt(dist[0], 3) + " at n=5000, " + fmt(dist[1], 3) + " at n=80000; " + c.summary()};
}

Outcome criterion6() {
  Checker c;
  Rng rng(606);
  double worst_valid = oracle_population_residual(dgp1());
  for (int rep = 0; rep < 100; ++rep)
    worst_valid = std::max(worst_valid, oracle_population_residual(random_valid_dgp(rng)));
  c.require(worst_valid < 1e-8, "valid DGP residual " + fmt(worst_valid, 3));
  const double violating = oracle_population_residual(demobilised_dgp(0.1));
  c.require(violating > 1e-3, "violating residual " + fmt(violating, 3));

  // Cross-check with the brute-force minimiser on the violating system and on perturbed right-hand sides.
  double worst_gap = 0.0;
  FalsifierSystem sys = design_system(1, Restrictions::IaIvPlusMtr);
  std::vector<Eigen::VectorXd> rhs{population_b(demobilised_dgp(0.1), 1, [](std::span<const double>) { return std::size_t{0}; }),
                                   population_b(demobilised_dgp(0.3), 1, [](std::span<const double>) { return std::size_t{0}; })};
  Rng noise(7);
  for (int k = 0; k < 10; ++k) {
    Eigen::VectorXd b = rhs[0];
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = std::max(0.0, b(i) + 0.08 * (noise.uniform() - 0.5));
    for (int z = 0; z < 2; ++z) b.segment(4 * z, 4) /= b.segment(4 * z, 4).sum();
    rhs.push_back(b);
  }
  for (std::size_t k = 0; k < rhs.size(); ++k) {
    sys.b_hat = rhs[k];
    const double r = solve_feasibility(sys).residual;
    const double brute = testsupport::brute_force_simplex_ls(sys.a, sys.b_hat, 100 + k);
    worst_gap = std::max(worst_gap, std::abs(r * r - brute * brute));
    c.require(std::abs(r * r - brute * brute) <= 1e-6, "brute force disagreement");
  }
  return {c.ok(), "max valid residual " + fmt(worst_valid, 3) + ", violating residual " + fmt(violating, 4) +
                      ", max objective gap vs brute force " + fmt(worst_gap, 3) + " over " +
                      std::to_string(rhs.size()) + " systems; " + c.summary()};
}

Outcome criterion7() {
  Checker c;
  const int reps = 200;
  const std::size_t n = 20000;
  SubsampleOptions o;
  o.alpha = 0.05;
  o.m = 200;
  o.b = default_subsample_size(n);
  int rejections[2] = {};
  const LatentDGP dgps[] = {dgp1(), demobilised_dgp(0.1)};
  for (int which = 0; which < 2; ++which)
    for (int rep = 0; rep < reps; ++rep) {
      const ObservedSample s = draw_sample(dgps[which], n, Rng::derive(700 + which, static_cast<std::uint64_t>(rep)));
      o.seed = Rng::derive(7000 + which, static_cast<std::uint64_t>(rep));
      if (subsample_test(s, {}, Restrictions::IaIvPlusMtr, o).rejected) ++rejections[which];
    }
  const double size = static_cast<double>(rejections[0]) / reps;
  const double power = static_cast<double>(rejections[1]) / reps;
  c.require(size <= 0.08, "size " + fmt(size, 3));
  c.require(power >= 0.8, "power " + fmt(power, 3));
  return {c.ok(), "b = " + std::to_string(*o.b) + ", M = 200, size " + fmt(size, 3) + ", power " + fmt(power, 3) +
                      " over " + std::to_string(reps) + " reps each; " + c.summary()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion8() {
  Checker c;
  const auto dir = std::filesystem::temp_directory_path() / "persuade_acceptance";
  std::filesystem::create_directories(dir);
  const auto dgp = dir / "dgp1.json";
  std::ofstream(dgp) << dgp_to_json(dgp1());
  const std::string exe = PERSUADE_EXE;
  const auto data = dir / "data.csv";
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "simulate --dgp " + dgp.string() + " --n 20000 --seed 7"},
      {"estimate", "estimate --input " + data.string() + " --alpha 0.05 --by-cell --covariates x"},
      {"profile", "profile --input " + data.string() + " --covariates x --cdf-grid 0,1"},
      {"falsify", "falsify --input " + data.string() + " --b auto --M 200 --seed 7"},
      {"sensitivity", "sensitivity --input " + data.string()},
      {"ar-ci", "ar-ci --input " + data.string() + " --estimand p01"},
  };
  int compared = 0;
  for (const auto& [name, args] : commands) {
    std::string outputs[2];
    for (int run = 0; run < 2; ++run) {
      const auto out = dir / (name + "_" + std::to_string(run) + ".out");
      const std::string cmd = exe + " " + args + " --output " + out.string();
      c.require(std::system(cmd.c_str()) == 0, name + " exited non-zero");
      outputs[run] = slurp(out);
    }
    c.require(!outputs[0].empty() && outputs[0] == outputs[1], name + " outputs differ");
    ++compared;
    if (name == "simulate") std::filesystem::copy_file(dir / "simulate_0.out", data, std::filesystem::copy_options::overwrite_existing);
  }
  return {c.ok(), std::to_string(compared) + " commands run twice with byte-identical output; " + c.summary()};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> kCriteria = {
    {"oracle equivalence on exact population moments", criterion1},
    {"in-sample algebraic identities", criterion2},
    {"published arithmetic fixtures", criterion3},
    {"Monte Carlo consistency and delta-method coverage", criterion4},
    {"AR correctness and convergence to the delta CI", criterion5},
    {"falsifier soundness and brute-force agreement", criterion6},
    {"falsifier size and power", criterion7},
    {"CLI determinism", criterion8},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= static_cast<int>(kCriteria.size()); ++i) which.push_back(i);
  bool all = true;
  for (int k : which) {
    if (k < 1 || k > static_cast<int>(kCriteria.size())) {
      std::cout << "FAIL criterion " << k << ": no such criterion\n";
      all = false;
      continue;
    }
    const auto& [title, fn] = kCriteria[static_cast<std::size_t>(k - 1)];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k << " (" << title << "): " << o.detail << " ["
              << fmt(secs, 3) << " s]\n";
    std::cout.flush();
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
