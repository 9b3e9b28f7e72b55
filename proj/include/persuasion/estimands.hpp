#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "persuasion/moments.hpp"

namespace persuasion {

/// g(t, x): a profiled function of treatment and covariates.
using CovariateFn = std::function<double(int t, std::span<const double> x)>;
/// g(y, t, x) where y is the potential outcome Y(t).
using OutcomeCovariateFn = std::function<double(int y, int t, std::span<const double> x)>;

/// Joint distribution of (Y(0), Y(1)) among compliers. p11 + p00 + p01 = 1 in-sample.
struct ComplierJointPO {
  double p11 = 0.0;  // always-voters
  double p00 = 0.0;  // never-voters
  double p01 = 0.0;  // mobilised
  double first_stage = 0.0;
  struct {
    WaldComponents p11, p00, p01;
  } components;
};

/// Marginal distributions of Y(0) and Y(1) among compliers, indexed by y.
struct MarginalPO {
  std::array<double, 2> p_y0{};
  std::array<double, 2> p_y1{};
  std::array<WaldComponents, 2> components_y0{};
  std::array<WaldComponents, 2> components_y1{};
};

struct PersuasionRates {
  double theta_local = 0.0;
  double theta_dk = 0.0;
  double theta_local_untreated = 0.0;
  WaldComponents local_components;
};

/// Which latent subpopulation a profile conditions on.
struct ProfileTarget {
  enum class Kind {
    Complier,        // E[g | C]
    Marginal,        // E[g | Y(t)=y, C]
    AlwaysVoter,     // E[g | Y(0)=Y(1)=1, C]
    NeverVoter,      // E[g | Y(0)=Y(1)=0, C]
    Mobilised,       // E[g | Y(0)=0, Y(1)=1, C]
    JointIndicator,  // the six conditional indicator moments, variant 1..6
    AlwaysTaker,     // E[g | Y(1)=y, AT]
    NeverTaker,      // E[g | Y(0)=y, NT]
  };
  Kind kind = Kind::Complier;
  int t = 0;
  int y = 0;
  int variant = 0;

  static ProfileTarget complier() { return {Kind::Complier}; }
  static ProfileTarget marginal(int t, int y) { return {Kind::Marginal, t, y}; }
  static ProfileTarget always_voter() { return {Kind::AlwaysVoter}; }
  static ProfileTarget never_voter() { return {Kind::NeverVoter}; }
  static ProfileTarget mobilised() { return {Kind::Mobilised}; }
  static ProfileTarget joint_indicator(int variant) { return {Kind::JointIndicator, 0, 0, variant}; }
  static ProfileTarget always_taker(int y) { return {Kind::AlwaysTaker, 1, y}; }
  static ProfileTarget never_taker(int y) { return {Kind::NeverTaker, 0, y}; }

  /// Stable machine-readable name, e.g. "marginal_t0_y1", "joint_3", "at_y1".
  std::string name() const;
  /// Inverse of name(); throws ValidationError on unknown names.
  static ProfileTarget parse(const std::string& name);
};

struct TypeProfile {
  ProfileTarget target;
  double value = 0.0;
  WaldComponents components;
};

enum class PersuasionType { AlwaysVoter, NeverVoter, Mobilised };
enum class TakerGroup { AlwaysTaker, NeverTaker };

/// theta_DK versus theta_local, with the one-sided non-compliance diagnostics.
struct DkLocalComparison {
  double theta_dk = 0.0;
  double theta_local = 0.0;
  double gap = 0.0;  // theta_dk - theta_local
  /// P[T=1 | Z=1] = 1 (no never-takers).
  bool one_sided_control = false;
  /// P[T=1 | Z=0] = 0 (no always-takers).
  bool one_sided_treatment = false;
  /// dT * P[Y=0|Z=0] - (P[Y=0,T=0|Z=0] - P[Y=0,T=0|Z=1]); zero iff theta_dk == theta_local.
  double equivalence_contrast = 0.0;
  /// Under one_sided_control: P[Y(0)=0 | T(0)=0] - P[Y(1)=0 | T(0)=1].
  /// Under one_sided_treatment: P[Y(0)=0 | T(1)=0] - P[Y(0)=0].
  std::optional<double> one_sided_contrast;
};

struct CdfPoint {
  double x;
  double value;
};

namespace transforms {
// Transform pairs behind each estimand; exposed so inference can treat every
// target uniformly.
TransformSpec first_stage();
TransformSpec always_voter_share();
TransformSpec never_voter_share();
TransformSpec mobilised_share();
TransformSpec marginal_share(int t, int y);
TransformSpec theta_local();
TransformSpec kappa(const OutcomeCovariateFn& g, int t);
TransformSpec profile(const CovariateFn& g, const ProfileTarget& target);
}  // namespace transforms

MarginalPO marginal_po(const MomentSource& source);
ComplierJointPO joint_po(const MomentSource& source);
PersuasionRates persuasion_rates(const MomentSource& source);
DkLocalComparison compare_dk_local(const MomentSource& source);
double kappa_moment(const MomentSource& source, const OutcomeCovariateFn& g, int t);
TypeProfile profile_marginal(const MomentSource& source, const CovariateFn& g, int t, int y);
TypeProfile profile_persuasion(const MomentSource& source, const CovariateFn& g, PersuasionType type);
TypeProfile profile_joint_indicator(const MomentSource& source, const CovariateFn& g, int variant);
TypeProfile profile_at_nt(const MomentSource& source, const std::function<double(std::span<const double>)>& g,
                          TakerGroup group, int y);
/// Dispatches on target.kind. For Complier targets g is evaluated as g(t, x).
TypeProfile profile(const MomentSource& source, const CovariateFn& g, const ProfileTarget& target);
/// profile() at g = 1{x_j <= c} for each grid point c.
std::vector<CdfPoint> conditional_cdf(const MomentSource& source, std::size_t covariate,
                                      const ProfileTarget& target, const std::vector<double>& grid);

/// theta_local recovered from the joint distribution: p01 / (p01 + p00).
double theta_local_from_joint(double p01, double p00);
/// Clamp to [0, 1]; estimates are otherwise reported raw.
double clamp_unit(double v);

// Convenience overloads over an observed binary-instrument sample.
MarginalPO marginal_po(const ObservedSample& sample);
ComplierJointPO joint_po(const ObservedSample& sample);
PersuasionRates persuasion_rates(const ObservedSample& sample);
DkLocalComparison compare_dk_local(const ObservedSample& sample);
TypeProfile profile(const ObservedSample& sample, const CovariateFn& g, const ProfileTarget& target);

}  // namespace persuasion
