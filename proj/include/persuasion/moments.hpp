#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>

#include "persuasion/sample.hpp"

namespace persuasion {

/// Real-valued transform of one observation.
using RowFn = std::function<double(const Row&)>;

/// Numerator and denominator transforms of a Wald-form estimand
///
///   (E[f | Z=1] - E[f | Z=0]) / (E[h | Z=1] - E[h | Z=0]).
///
/// When the profiled function depends on the treatment, the numerator is the
/// P[Z=z]-weighted combination of two transforms evaluated at t=1 and t=0:
///   q * (contrast of f) + (1 - q) * (contrast of f_control),  q = P[Z=1].
struct TransformSpec {
  RowFn f;
  RowFn h;
  /// Empty unless the numerator depends on the treatment value.
  RowFn f_control{};

  bool weighted() const { return static_cast<bool>(f_control); }
};

/// Arm-difference coefficients of a Wald estimand and their joint covariance.
struct WaldComponents {
  double beta1 = 0.0;
  double beta2 = 0.0;
  /// Covariance of (beta1, beta2); already on the scale of the estimates.
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  /// Sample size; 0 for exact population moments.
  std::size_t n = 0;
  double pz1 = 0.0;
};

/// Mean vector of several transforms within one instrument arm and the
/// covariance of that mean vector.
struct ArmMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd mean_cov;
};

/// Anything that can supply instrument-arm conditional means: an observed
/// sample, or the exact observable distribution of a simulated population.
class MomentSource {
 public:
  virtual ~MomentSource() = default;

  virtual ArmMoments arm_moments(std::span<const RowFn> fns, int arm) const = 0;
  virtual double pz1() const = 0;
  /// Variance of the estimate of P[Z=1]; zero for exact moments.
  virtual double pz1_variance() const = 0;
  /// Number of observations; 0 for exact moments.
  virtual std::size_t sample_size() const = 0;

  double arm_mean(const RowFn& g, int arm) const;
};

/// Moment source over an observed binary-instrument sample. Within-arm
/// covariances use n-1 denominators. The sample must outlive this object.
class SampleMoments final : public MomentSource {
 public:
  explicit SampleMoments(const ObservedSample& sample);

  ArmMoments arm_moments(std::span<const RowFn> fns, int arm) const override;
  double pz1() const override { return pz1_; }
  double pz1_variance() const override;
  std::size_t sample_size() const override { return sample_.size(); }

  const ObservedSample& sample() const { return sample_; }

 private:
  const ObservedSample& sample_;
  std::vector<std::size_t> arm_rows_[2];
  double pz1_ = 0.0;
};

/// Mean of g over rows with z == arm. Throws ValidationError for an empty arm.
double arm_mean(const ObservedSample& sample, const RowFn& g, int arm);

WaldComponents wald_components(const MomentSource& source, const TransformSpec& spec);
WaldComponents wald_components(const ObservedSample& sample, const TransformSpec& spec);

/// Below this, a denominator coefficient is treated as zero.
inline constexpr double kDenominatorGuard = 1e-8;

/// beta1 / beta2. Throws WeakFirstStageError when |beta2| < kDenominatorGuard.
double wald_ratio(const WaldComponents& c);

}  // namespace persuasion
