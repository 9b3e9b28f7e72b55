#pragma once

#include <Eigen/Dense>

namespace persuasion {

/// Euclidean projection of v onto {p >= 0, sum(p) = 1}.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

struct SimplexLsOptions {
  int max_iterations = 10000;
  /// Stop when the objective changes by less than this between iterations.
  double objective_tolerance = 1e-12;
  /// Refine the support found by the gradient iterations with an equality-constrained solve.
  bool polish = true;
  /// Residuals at or below this are reported as exactly zero.
  double zero_residual = 1e-10;
};

struct SimplexLsResult {
  Eigen::VectorXd p;
  /// min ||A p - b|| over the simplex.
  double residual = 0.0;
  /// Norm of the projected-gradient step at p.
  double gradient_norm = 0.0;
  int iterations = 0;
  bool polished = false;
};

/// Simplex-constrained least squares for a fixed design matrix. The Gram matrix
/// and step size are computed once so that many right-hand sides are cheap.
class SimplexLeastSquares {
 public:
  explicit SimplexLeastSquares(Eigen::MatrixXd a);

  /// Accelerated projected gradient from the uniform point with adaptive
  /// restart, followed by an optional active-set polish. Throws ConvergenceError
  /// if the iteration cap is hit away from a stationary point.
  SimplexLsResult solve(const Eigen::VectorXd& b, const SimplexLsOptions& options = {}) const;

  const Eigen::MatrixXd& matrix() const { return a_; }

 private:
  double objective(const Eigen::VectorXd& p, const Eigen::VectorXd& atb, double btb) const;
  double projected_gradient_norm(const Eigen::VectorXd& p, const Eigen::VectorXd& atb) const;
  bool polish(Eigen::VectorXd& p, const Eigen::VectorXd& b, const Eigen::VectorXd& atb, double btb) const;

  Eigen::MatrixXd a_;
  Eigen::MatrixXd gram_;
  double step_ = 1.0;
};

SimplexLsResult solve_simplex_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                            const SimplexLsOptions& options = {});

}  // namespace persuasion
