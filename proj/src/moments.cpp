#include "persuasion/moments.hpp"

#include <cmath>
#include <string>

#include "persuasion/error.hpp"

namespace persuasion {

double MomentSource::arm_mean(const RowFn& g, int arm) const {
  return arm_moments(std::span<const RowFn>(&g, 1), arm).mean(0);
}

SampleMoments::SampleMoments(const ObservedSample& sample) : sample_(sample) {
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const long z = sample.row(i).z;
    if (z != 0 && z != 1)
      throw ValidationError("instrument must be binary (0/1); found level " + std::to_string(z) +
                            " (restrict to an instrument pair first)");
    arm_rows_[z].push_back(i);
  }
  pz1_ = static_cast<double>(arm_rows_[1].size()) / static_cast<double>(sample.size());
}

double SampleMoments::pz1_variance() const {
  return pz1_ * (1.0 - pz1_) / static_cast<double>(sample_.size());
}

ArmMoments SampleMoments::arm_moments(std::span<const RowFn> fns, int arm) const {
  const auto& rows = arm_rows_[arm != 0];
  if (rows.empty()) throw ValidationError("instrument arm z=" + std::to_string(arm != 0) + " is empty");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto k = static_cast<Eigen::Index>(fns.size());
  Eigen::MatrixXd values(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Row r = sample_.row(rows[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < k; ++j) values(i, j) = fns[static_cast<std::size_t>(j)](r);
  }
  ArmMoments m;
  // Plain sequential sums: identical columns must give bit-identical means.
  m.mean = Eigen::VectorXd::Zero(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += values(i, j);
    m.mean(j) = total / static_cast<double>(n);
  }
  if (n > 1) {
    const Eigen::MatrixXd centered = values.rowwise() - m.mean.transpose();
    m.mean_cov = (centered.transpose() * centered) / (static_cast<double>(n - 1) * static_cast<double>(n));
  } else {
    m.mean_cov = Eigen::MatrixXd::Zero(k, k);
  }
  return m;
}

double arm_mean(const ObservedSample& sample, const RowFn& g, int arm) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const Row r = sample.row(i);
    if (r.z != arm) continue;
    total += g(r);
    ++count;
  }
  if (count == 0) throw ValidationError("instrument arm z=" + std::to_string(arm) + " is empty");
  return total / static_cast<double>(count);
}

WaldComponents wald_components(const MomentSource& source, const TransformSpec& spec) {
  WaldComponents c;
  c.n = source.sample_size();
  c.pz1 = source.pz1();

  if (!spec.weighted()) {
    const RowFn fns[] = {spec.f, spec.h};
    const ArmMoments m1 = source.arm_moments(fns, 1);
    const ArmMoments m0 = source.arm_moments(fns, 0);
    c.beta1 = m1.mean(0) - m0.mean(0);
    c.beta2 = m1.mean(1) - m0.mean(1);
    c.cov = m1.mean_cov + m0.mean_cov;
    return c;
  }

  // Parameters: arm means of (f, f_control, h) in arm 1, then arm 0, then q.
  const RowFn fns[] = {spec.f, spec.f_control, spec.h};
  const ArmMoments m1 = source.arm_moments(fns, 1);
  const ArmMoments m0 = source.arm_moments(fns, 0);
  const double q = c.pz1;
  const double d_treated = m1.mean(0) - m0.mean(0);
  const double d_control = m1.mean(1) - m0.mean(1);
  // Written so that identical numerator transforms give exactly d_control.
  c.beta1 = d_control + q * (d_treated - d_control);
  c.beta2 = m1.mean(2) - m0.mean(2);

  Eigen::Matrix<double, 7, 7> sigma = Eigen::Matrix<double, 7, 7>::Zero();
  sigma.block<3, 3>(0, 0) = m1.mean_cov;
  sigma.block<3, 3>(3, 3) = m0.mean_cov;
  sigma(6, 6) = source.pz1_variance();

  Eigen::Matrix<double, 2, 7> jac = Eigen::Matrix<double, 2, 7>::Zero();
  jac(0, 0) = q;
  jac(0, 1) = 1.0 - q;
  jac(0, 3) = -q;
  jac(0, 4) = -(1.0 - q);
  jac(0, 6) = d_treated - d_control;
  jac(1, 2) = 1.0;
  jac(1, 5) = -1.0;
  c.cov = jac * sigma * jac.transpose();
  c.cov(1, 0) = c.cov(0, 1);
  return c;
}

WaldComponents wald_components(const ObservedSample& sample, const TransformSpec& spec) {
  return wald_components(SampleMoments(sample), spec);
}

double wald_ratio(const WaldComponents& c) {
  if (!(std::abs(c.beta2) >= kDenominatorGuard))
    throw WeakFirstStageError("Wald denominator " + std::to_string(c.beta2) + " is below the guard " +
                              std::to_string(kDenominatorGuard));
  return c.beta1 / c.beta2;
}

}  // namespace persuasion
