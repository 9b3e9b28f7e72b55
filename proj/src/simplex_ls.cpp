#include "persuasion/simplex_ls.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "persuasion/error.hpp"

namespace persuasion {

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  if (n == 0) throw ValidationError("cannot project an empty vector onto the simplex");
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumulative += u[static_cast<std::size_t>(k)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (u[static_cast<std::size_t>(k)] - candidate > 0.0) tau = candidate;
  }
  return (v.array() - tau).max(0.0).matrix();
}

SimplexLeastSquares::SimplexLeastSquares(Eigen::MatrixXd a) : a_(std::move(a)) {
  if (a_.cols() == 0 || a_.rows() == 0) throw ValidationError("design matrix is empty");
  gram_ = a_.transpose() * a_;
  const double lipschitz = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram_, Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .maxCoeff();
  step_ = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;
}

double SimplexLeastSquares::objective(const Eigen::VectorXd& p, const Eigen::VectorXd& atb, double btb) const {
  // 0.5 ||A p - b||^2 through the Gram matrix.
  return 0.5 * p.dot(gram_ * p) - p.dot(atb) + 0.5 * btb;
}

double SimplexLeastSquares::projected_gradient_norm(const Eigen::VectorXd& p, const Eigen::VectorXd& atb) const {
  const Eigen::VectorXd g = gram_ * p - atb;
  return (p - project_to_simplex(p - step_ * g)).norm() / step_;
}

bool SimplexLeastSquares::polish(Eigen::VectorXd& p, const Eigen::VectorXd& b, const Eigen::VectorXd& atb,
                                 double btb) const {
  Eigen::VectorXd current = p;
  double best = objective(current, atb, btb);
  bool improved = false;
  for (int round = 0; round < static_cast<int>(p.size()); ++round) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < current.size(); ++i)
      if (current(i) > 1e-10) support.push_back(i);
    const auto s = static_cast<Eigen::Index>(support.size());
    if (s < 2) break;

    Eigen::MatrixXd as(a_.rows(), s);
    Eigen::VectorXd ps(s);
    for (Eigen::Index j = 0; j < s; ++j) {
      as.col(j) = a_.col(support[static_cast<std::size_t>(j)]);
      ps(j) = current(support[static_cast<std::size_t>(j)]);
    }
    // Orthonormal basis of {d : sum(d) = 0} within the support.
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(s, 1);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(ones);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(s, s);
    const Eigen::MatrixXd null_basis = q.rightCols(s - 1);
    const Eigen::VectorXd r = b - as * ps;
    const Eigen::VectorXd w = (as * null_basis).completeOrthogonalDecomposition().solve(r);
    const Eigen::VectorXd delta = null_basis * w;

    double step = 1.0;
    for (Eigen::Index j = 0; j < s; ++j)
      if (delta(j) < 0.0) step = std::min(step, -ps(j) / delta(j));
    Eigen::VectorXd trial = current;
    for (Eigen::Index j = 0; j < s; ++j) {
      const auto i = support[static_cast<std::size_t>(j)];
      trial(i) = std::max(0.0, ps(j) + step * delta(j));
    }
    trial /= trial.sum();
    const double value = objective(trial, atb, btb);
    if (!(value <= best)) break;
    const bool full_step = step >= 1.0;
    current = trial;
    improved = improved || value < best;
    best = value;
    if (full_step) break;
    // A blocking coordinate hit zero; continue on the reduced support.
  }
  if (improved) p = current;
  return improved;
}

SimplexLsResult SimplexLeastSquares::solve(const Eigen::VectorXd& b, const SimplexLsOptions& options) const {
  if (b.size() != a_.rows()) throw ValidationError("right-hand side has the wrong length");
  const Eigen::Index n = a_.cols();
  const Eigen::VectorXd atb = a_.transpose() * b;
  const double btb = b.squaredNorm();

  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  Eigen::VectorXd y = x;
  double t = 1.0;
  double fx = objective(x, atb, btb);
  SimplexLsResult res;
  bool converged = false;
  int it = 0;
  while (it < options.max_iterations) {
    ++it;
    const Eigen::VectorXd x_next = project_to_simplex(y - step_ * (gram_ * y - atb));
    const double f_next = objective(x_next, atb, btb);
    if (f_next > fx) {
      // Momentum overshot: restart from the last iterate.
      y = x;
      t = 1.0;
      continue;
    }
    const double change = fx - f_next;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = x_next + ((t - 1.0) / t_next) * (x_next - x);
    x = x_next;
    fx = f_next;
    t = t_next;
    if (change < options.objective_tolerance) {
      converged = true;
      break;
    }
  }
  res.iterations = it;
  if (options.polish) res.polished = polish(x, b, atb, btb);
  res.p = x;
  res.gradient_norm = projected_gradient_norm(x, atb);
  res.residual = (a_ * x - b).norm();
  if (!converged && res.gradient_norm > 1e-6)
    throw ConvergenceError("simplex least squares did not converge in " + std::to_string(it) +
                               " iterations (residual " + std::to_string(res.residual) + ", gradient norm " +
                               std::to_string(res.gradient_norm) + ")",
                           res.residual, res.gradient_norm);
  if (res.residual <= options.zero_residual) res.residual = 0.0;
  return res;
}

SimplexLsResult solve_simplex_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                            const SimplexLsOptions& options) {
  return SimplexLeastSquares(a).solve(b, options);
}

}  // namespace persuasion
