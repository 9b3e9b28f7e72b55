#include "persuasion/estimands.hpp"

#include <algorithm>
#include <cmath>

#include "persuasion/error.hpp"

namespace persuasion {
namespace {

double ind(bool b) { return b ? 1.0 : 0.0; }

enum class Guard { FirstStage, Mass };

double guarded_ratio(const WaldComponents& c, Guard guard, const std::string& what) {
  if (std::abs(c.beta2) >= kDenominatorGuard) return c.beta1 / c.beta2;
  const std::string msg = what + ": denominator " + std::to_string(c.beta2) + " below guard";
  if (guard == Guard::FirstStage) throw WeakFirstStageError("weak first stage in " + msg);
  throw ZeroMassError("zero-mass subpopulation in " + msg);
}

// Numerator pair g(1, x) * w(row), g(0, x) * w(row) for a treatment-dependent g.
TransformSpec weighted(const CovariateFn& g, std::function<double(const Row&)> weight, RowFn h,
                       double sign = 1.0) {
  TransformSpec spec;
  spec.f = [g, weight, sign](const Row& r) {
    const double w = weight(r);
    return w == 0.0 ? 0.0 : sign * w * g(1, r.x);
  };
  spec.f_control = [g, weight, sign](const Row& r) {
    const double w = weight(r);
    return w == 0.0 ? 0.0 : sign * w * g(0, r.x);
  };
  spec.h = std::move(h);
  return spec;
}

RowFn y_untreated() { return [](const Row& r) { return ind(r.y == 1 && r.t == 0); }; }
RowFn nonvoter_treated() { return [](const Row& r) { return ind(r.y == 0 && r.t == 1); }; }
RowFn outcome() { return [](const Row& r) { return static_cast<double>(r.y); }; }
RowFn voter_treated() { return [](const Row& r) { return ind(r.y == 1 && r.t == 1); }; }
RowFn neg_nonvoter_untreated() { return [](const Row& r) { return -ind(r.y == 0 && r.t == 0); }; }

}  // namespace

std::string ProfileTarget::name() const {
  switch (kind) {
    case Kind::Complier: return "complier";
    case Kind::Marginal: return "marginal_t" + std::to_string(t) + "_y" + std::to_string(y);
    case Kind::AlwaysVoter: return "always";
    case Kind::NeverVoter: return "never";
    case Kind::Mobilised: return "mobilised";
    case Kind::JointIndicator: return "joint_" + std::to_string(variant);
    case Kind::AlwaysTaker: return "at_y" + std::to_string(y);
    case Kind::NeverTaker: return "nt_y" + std::to_string(y);
  }
  return "unknown";
}

ProfileTarget ProfileTarget::parse(const std::string& name) {
  if (name == "complier") return complier();
  if (name == "always") return always_voter();
  if (name == "never") return never_voter();
  if (name == "mobilised") return mobilised();
  auto digit = [&](std::size_t pos) -> int {
    if (pos >= name.size() || (name[pos] != '0' && name[pos] != '1'))
      throw ValidationError("unknown profile target: " + name);
    return name[pos] - '0';
  };
  if (name.size() == 14 && name.rfind("marginal_t", 0) == 0 && name.substr(11, 2) == "_y")
    return marginal(digit(10), digit(13));
  if (name.size() == 7 && name.rfind("joint_", 0) == 0 && name[6] >= '1' && name[6] <= '6')
    return joint_indicator(name[6] - '0');
  if (name.size() == 5 && name.rfind("at_y", 0) == 0) return always_taker(digit(4));
  if (name.size() == 5 && name.rfind("nt_y", 0) == 0) return never_taker(digit(4));
  throw ValidationError("unknown profile target: " + name);
}

namespace transforms {

TransformSpec first_stage() {
  return {[](const Row& r) { return static_cast<double>(r.t); }, [](const Row& r) { return static_cast<double>(r.t); }};
}

TransformSpec always_voter_share() {
  return {[](const Row& r) { return -ind(r.y == 1 && r.t == 0); }, [](const Row& r) { return static_cast<double>(r.t); }};
}

TransformSpec never_voter_share() {
  return {nonvoter_treated(), [](const Row& r) { return static_cast<double>(r.t); }};
}

TransformSpec mobilised_share() {
  return {outcome(), [](const Row& r) { return static_cast<double>(r.t); }};
}

TransformSpec marginal_share(int t, int y) {
  if (t == 0)
    return {[y](const Row& r) { return -ind(r.y == y && r.t == 0); }, [](const Row& r) { return static_cast<double>(r.t); }};
  return {[y](const Row& r) { return ind(r.y == y && r.t == 1); }, [](const Row& r) { return static_cast<double>(r.t); }};
}

TransformSpec theta_local() { return {outcome(), neg_nonvoter_untreated()}; }

TransformSpec kappa(const OutcomeCovariateFn& g, int t) {
  TransformSpec spec;
  spec.f = [g, t](const Row& r) { return r.t == t ? g(r.y, 1, r.x) : 0.0; };
  spec.f_control = [g, t](const Row& r) { return r.t == t ? g(r.y, 0, r.x) : 0.0; };
  spec.h = [t](const Row& r) { return ind(r.t == t); };
  return spec;
}

TransformSpec profile(const CovariateFn& g, const ProfileTarget& target) {
  using Kind = ProfileTarget::Kind;
  switch (target.kind) {
    case Kind::Complier:
      return kappa([g](int, int t, std::span<const double> x) { return g(t, x); }, 1);
    case Kind::Marginal: {
      const int t = target.t;
      const int y = target.y;
      auto cell = [t, y](const Row& r) { return ind(r.y == y && r.t == t); };
      return weighted(g, cell, cell);
    }
    case Kind::AlwaysVoter: return weighted(g, y_untreated(), y_untreated());
    case Kind::NeverVoter: return weighted(g, nonvoter_treated(), nonvoter_treated());
    case Kind::Mobilised: return weighted(g, outcome(), outcome());
    case Kind::JointIndicator:
      switch (target.variant) {
        case 1: return weighted(g, nonvoter_treated(), neg_nonvoter_untreated());
        case 2: return weighted(g, outcome(), neg_nonvoter_untreated());
        case 3: return weighted(g, y_untreated(), y_untreated());
        case 4: return weighted(g, nonvoter_treated(), nonvoter_treated());
        case 5: return weighted(g, y_untreated(), voter_treated(), -1.0);
        case 6: return weighted(g, outcome(), voter_treated());
        default: throw ValidationError("joint indicator variant must be in 1..6");
      }
    case Kind::AlwaysTaker:
    case Kind::NeverTaker:
      throw ValidationError("always-/never-taker profiles are conditional means, not Wald ratios");
  }
  throw ValidationError("unknown profile target");
}

}  // namespace transforms

MarginalPO marginal_po(const MomentSource& source) {
  MarginalPO m;
  for (int y = 0; y < 2; ++y) {
    m.components_y0[y] = wald_components(source, transforms::marginal_share(0, y));
    m.components_y1[y] = wald_components(source, transforms::marginal_share(1, y));
    m.p_y0[y] = guarded_ratio(m.components_y0[y], Guard::FirstStage, "P[Y(0)=y | C]");
    m.p_y1[y] = guarded_ratio(m.components_y1[y], Guard::FirstStage, "P[Y(1)=y | C]");
  }
  return m;
}

ComplierJointPO joint_po(const MomentSource& source) {
  ComplierJointPO j;
  j.components.p11 = wald_components(source, transforms::always_voter_share());
  j.components.p00 = wald_components(source, transforms::never_voter_share());
  j.components.p01 = wald_components(source, transforms::mobilised_share());
  j.first_stage = j.components.p01.beta2;
  j.p11 = guarded_ratio(j.components.p11, Guard::FirstStage, "always-voter share");
  j.p00 = guarded_ratio(j.components.p00, Guard::FirstStage, "never-voter share");
  j.p01 = guarded_ratio(j.components.p01, Guard::FirstStage, "mobilised share");
  return j;
}

PersuasionRates persuasion_rates(const MomentSource& source) {
  PersuasionRates r;
  r.local_components = wald_components(source, transforms::theta_local());
  r.theta_local = guarded_ratio(r.local_components, Guard::Mass, "theta_local");
  r.theta_local_untreated = r.theta_local;

  const WaldComponents late = wald_components(source, transforms::mobilised_share());
  const double late_ratio = guarded_ratio(late, Guard::FirstStage, "theta_DK");
  const double y_control = source.arm_mean(outcome(), 0);
  if (y_control >= 1.0 - 1e-12) throw ZeroMassError("theta_DK undefined: E[Y | Z=0] = 1");
  r.theta_dk = late_ratio / (1.0 - y_control);
  return r;
}

DkLocalComparison compare_dk_local(const MomentSource& source) {
  DkLocalComparison d;
  const PersuasionRates rates = persuasion_rates(source);
  d.theta_dk = rates.theta_dk;
  d.theta_local = rates.theta_local;
  d.gap = d.theta_dk - d.theta_local;

  const RowFn fns[] = {
      [](const Row& r) { return static_cast<double>(r.t); },
      [](const Row& r) { return ind(r.y == 0); },
      [](const Row& r) { return ind(r.y == 0 && r.t == 0); },
      [](const Row& r) { return ind(r.y == 0 && r.t == 1); },
  };
  const Eigen::VectorXd m1 = source.arm_moments(fns, 1).mean;
  const Eigen::VectorXd m0 = source.arm_moments(fns, 0).mean;
  constexpr double tol = 1e-12;
  d.one_sided_control = m1(0) >= 1.0 - tol;
  d.one_sided_treatment = m0(0) <= tol;
  d.equivalence_contrast = (m1(0) - m0(0)) * m0(1) - (m0(2) - m1(2));
  if (d.one_sided_control && m0(0) > tol && m0(0) < 1.0 - tol) {
    d.one_sided_contrast = m0(2) / (1.0 - m0(0)) - m0(3) / m0(0);
  } else if (d.one_sided_treatment && m1(0) < 1.0 - tol) {
    d.one_sided_contrast = m1(2) / (1.0 - m1(0)) - m0(1);
  }
  return d;
}

double kappa_moment(const MomentSource& source, const OutcomeCovariateFn& g, int t) {
  return guarded_ratio(wald_components(source, transforms::kappa(g, t)), Guard::FirstStage, "kappa moment");
}

TypeProfile profile(const MomentSource& source, const CovariateFn& g, const ProfileTarget& target) {
  using Kind = ProfileTarget::Kind;
  if (target.kind == Kind::AlwaysTaker || target.kind == Kind::NeverTaker) {
    return profile_at_nt(
        source, [g, t = target.t](std::span<const double> x) { return g(t, x); },
        target.kind == Kind::AlwaysTaker ? TakerGroup::AlwaysTaker : TakerGroup::NeverTaker, target.y);
  }
  TypeProfile p;
  p.target = target;
  p.components = wald_components(source, transforms::profile(g, target));
  p.value = guarded_ratio(p.components, target.kind == Kind::Complier ? Guard::FirstStage : Guard::Mass,
                          "profile " + target.name());
  return p;
}

TypeProfile profile_marginal(const MomentSource& source, const CovariateFn& g, int t, int y) {
  return profile(source, g, ProfileTarget::marginal(t, y));
}

TypeProfile profile_persuasion(const MomentSource& source, const CovariateFn& g, PersuasionType type) {
  switch (type) {
    case PersuasionType::AlwaysVoter: return profile(source, g, ProfileTarget::always_voter());
    case PersuasionType::NeverVoter: return profile(source, g, ProfileTarget::never_voter());
    case PersuasionType::Mobilised: break;
  }
  return profile(source, g, ProfileTarget::mobilised());
}

TypeProfile profile_joint_indicator(const MomentSource& source, const CovariateFn& g, int variant) {
  return profile(source, g, ProfileTarget::joint_indicator(variant));
}

TypeProfile profile_at_nt(const MomentSource& source, const std::function<double(std::span<const double>)>& g,
                          TakerGroup group, int y) {
  // Always-takers are observed as (T=1, Z=0), never-takers as (T=0, Z=1).
  const bool at = group == TakerGroup::AlwaysTaker;
  const int t = at ? 1 : 0;
  const int arm = at ? 0 : 1;
  const RowFn fns[] = {
      [g, t, y](const Row& r) { return r.y == y && r.t == t ? g(r.x) : 0.0; },
      [t, y](const Row& r) { return ind(r.y == y && r.t == t); },
  };
  const ArmMoments m = source.arm_moments(fns, arm);
  if (!(m.mean(1) > 0.0))
    throw ZeroMassError(std::string("empty conditioning set for ") + (at ? "always" : "never") + "-taker profile");

  TypeProfile p;
  p.target = at ? ProfileTarget::always_taker(y) : ProfileTarget::never_taker(y);
  p.value = m.mean(0) / m.mean(1);
  // Delta method for a ratio of arm means, packaged as beta1 / 1.
  const Eigen::Vector2d grad(1.0 / m.mean(1), -p.value / m.mean(1));
  p.components.beta1 = p.value;
  p.components.beta2 = 1.0;
  p.components.cov(0, 0) = std::max(0.0, grad.dot(m.mean_cov * grad));
  p.components.n = source.sample_size();
  p.components.pz1 = source.pz1();
  return p;
}

std::vector<CdfPoint> conditional_cdf(const MomentSource& source, std::size_t covariate,
                                      const ProfileTarget& target, const std::vector<double>& grid) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw ValidationError("CDF grid must be sorted");
  std::vector<CdfPoint> out;
  out.reserve(grid.size());
  for (double c : grid) {
    const CovariateFn g = [covariate, c](int, std::span<const double> x) {
      if (covariate >= x.size()) throw ValidationError("covariate index out of range");
      return ind(x[covariate] <= c);
    };
    out.push_back({c, profile(source, g, target).value});
  }
  return out;
}

double theta_local_from_joint(double p01, double p00) {
  if (!(std::abs(p01 + p00) >= kDenominatorGuard)) throw ZeroMassError("P[Y(0)=0 | C] is zero");
  return p01 / (p01 + p00);
}

double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

MarginalPO marginal_po(const ObservedSample& sample) { return marginal_po(SampleMoments(sample)); }
ComplierJointPO joint_po(const ObservedSample& sample) { return joint_po(SampleMoments(sample)); }
PersuasionRates persuasion_rates(const ObservedSample& sample) { return persuasion_rates(SampleMoments(sample)); }
DkLocalComparison compare_dk_local(const ObservedSample& sample) { return compare_dk_local(SampleMoments(sample)); }
TypeProfile profile(const ObservedSample& sample, const CovariateFn& g, const ProfileTarget& target) {
  return profile(SampleMoments(sample), g, target);
}

}  // namespace persuasion
