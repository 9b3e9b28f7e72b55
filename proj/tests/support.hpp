#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <vector>

#include "persuasion/inference.hpp"
#include "persuasion/rng.hpp"
#include "persuasion/sample.hpp"

namespace testsupport {

using persuasion::ObservedRow;
using persuasion::ObservedSample;

// Rows given as (y, t, z) or (y, t, z, x).
inline ObservedSample sample_of(const std::vector<std::tuple<int, int, long>>& rows) {
  std::vector<ObservedRow> out;
  for (const auto& [y, t, z] : rows) out.push_back({y, t, z, {}});
  return ObservedSample::from_rows(out);
}

inline ObservedSample sample_with_x(const std::vector<std::tuple<int, int, long, double>>& rows) {
  std::vector<ObservedRow> out;
  for (const auto& [y, t, z, x] : rows) out.push_back({y, t, z, {x}});
  return ObservedSample::from_rows(out, {"x"});
}

// Cell counts n[z][y][t] over a binary-instrument sample.
struct Counts {
  double n[2][2][2] = {};
  double arm(int z) const { return n[z][0][0] + n[z][0][1] + n[z][1][0] + n[z][1][1]; }
  double p(int z, int y, int t) const { return n[z][y][t] / arm(z); }
};

inline Counts count_cells(const ObservedSample& s) {
  Counts c;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto r = s.row(i);
    c.n[r.z][r.y][r.t] += 1.0;
  }
  return c;
}

// Minimises ||A p - b|| over the simplex by Dirichlet random search followed by
// pairwise mass transfers with exact line search. Shares no code with the library solver.
inline double brute_force_simplex_ls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, std::uint64_t seed,
                                     int draws = 20000, int sweeps = 4000) {
  persuasion::Rng rng(seed);
  const Eigen::Index n = a.cols();
  auto obj = [&](const Eigen::VectorXd& p) { return (a * p - b).squaredNorm(); };
  Eigen::VectorXd best = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  double best_val = obj(best);
  for (int d = 0; d < draws; ++d) {
    Eigen::VectorXd p(n);
    for (Eigen::Index i = 0; i < n; ++i) p(i) = -std::log(1.0 - rng.uniform());
    // Sparse corners help for solutions on faces.
    if (d % 3 == 0)
      for (Eigen::Index i = 0; i < n; ++i)
        if (rng.uniform() < 0.4) p(i) = 0.0;
    if (p.sum() <= 0.0) continue;
    p /= p.sum();
    const double v = obj(p);
    if (v < best_val) {
      best_val = v;
      best = p;
    }
  }
  // Move mass between coordinate pairs: p_i += s, p_j -= s.
  Eigen::VectorXd r = a * best - b;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    bool moved = false;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const Eigen::VectorXd d = a.col(i) - a.col(j);
        const double dd = d.squaredNorm();
        if (dd == 0.0) continue;
        double s = -r.dot(d) / dd;
        s = std::clamp(s, -best(i), best(j));
        if (std::abs(s) < 1e-18) continue;
        best(i) += s;
        best(j) -= s;
        r += s * d;
        moved = true;
      }
    if (!moved) break;
  }
  return (a * best - b).norm();
}

struct ClosedFormSet {
  // Non-rejection region {p : (b1 - p b2)^2 <= c gamma(p)} as intervals; +-inf for unbounded ends.
  std::vector<std::pair<double, double>> intervals;
};

inline ClosedFormSet ar_closed_form(const persuasion::WaldComponents& w, double crit) {
  const double qa = w.beta2 * w.beta2 - crit * w.cov(1, 1);
  const double qb = -2.0 * w.beta1 * w.beta2 + 2.0 * crit * w.cov(0, 1);
  const double qc = w.beta1 * w.beta1 - crit * w.cov(0, 0);
  const double inf = std::numeric_limits<double>::infinity();
  ClosedFormSet out;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (qa > 0.0) {
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      out.intervals.push_back({(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)});
    }
  } else if (qa < 0.0) {
    if (disc > 0.0) {
      const double s = std::sqrt(disc);
      const double r1 = (-qb + s) / (2.0 * qa);
      const double r2 = (-qb - s) / (2.0 * qa);
      out.intervals.push_back({-inf, std::min(r1, r2)});
      out.intervals.push_back({std::max(r1, r2), inf});
    } else {
      out.intervals.push_back({-inf, inf});
    }
  }
  return out;
}

}  // namespace testsupport
