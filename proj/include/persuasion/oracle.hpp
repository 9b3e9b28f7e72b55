#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "persuasion/estimands.hpp"
#include "persuasion/falsifier.hpp"
#include "persuasion/rng.hpp"
#include "persuasion/types.hpp"

namespace persuasion {

/// One support point of the discrete covariate distribution.
struct XAtom {
  std::vector<double> x;
  double mass = 0.0;
};

/// Population over latent (compliance, outcome type, covariate) types, with the
/// instrument drawn independently.
struct LatentDGP {
  double q = 0.5;
  std::map<Compliance, double> pi;
  std::map<Compliance, std::map<OutcomeType, double>> outcome_dist;
  /// Covariate distribution per (compliance, outcome type). Absent entries mean no covariates.
  std::map<Compliance, std::map<OutcomeType, std::vector<XAtom>>> x_dist;
  std::vector<std::string> covariate_names;

  /// Throws ValidationError describing the first violated invariant.
  void validate() const;
  /// Probability of a type; 0 when absent.
  double type_mass(Compliance c, OutcomeType o) const;
  /// Covariate atoms of a type (a single empty atom when there are no covariates).
  std::vector<XAtom> atoms(Compliance c, OutcomeType o) const;
  /// True when defiers or demobilised types carry mass.
  bool violates_restrictions() const;
};

/// JSON form: {"q", "pi": {"C": ..}, "outcome_dist": {"C": {"01": ..}}, "covariates": [..],
/// "x_dist": {"C": {"11" | "*": [{"x": [..], "p": ..}]}}}.
LatentDGP parse_dgp_json(const std::string& text);
LatentDGP load_dgp(const std::filesystem::path& path);
std::string dgp_to_json(const LatentDGP& dgp);

/// Reference fixture with one binary covariate.
LatentDGP dgp1();
/// dgp1 with a demobilised share among compliers: outcomes {11: 0.3, 00: 0.7 - d, 10: d}.
LatentDGP demobilised_dgp(double demobilised_share = 0.1);
/// Satisfies every restriction, has two discrete covariates and a first stage of at least 0.1.
LatentDGP random_valid_dgp(Rng& rng);

/// Observable atom: a (z, y, t, x) cell and its probability given Z = z.
struct PopulationAtom {
  int z;
  int y;
  int t;
  std::vector<double> x;
  double mass;
};

/// Exact arm moments of a DGP's observable distribution.
class PopulationMoments final : public MomentSource {
 public:
  explicit PopulationMoments(const LatentDGP& dgp);

  ArmMoments arm_moments(std::span<const RowFn> fns, int arm) const override;
  double pz1() const override { return q_; }
  double pz1_variance() const override { return 0.0; }
  std::size_t sample_size() const override { return 0; }

  const std::vector<PopulationAtom>& atoms() const { return atoms_; }
  std::size_t covariate_count() const { return covariates_; }

 private:
  double q_;
  std::size_t covariates_;
  std::vector<PopulationAtom> atoms_;
};

/// Population b over the falsifier rows, read off the observable atoms.
Eigen::VectorXd population_b(const LatentDGP& dgp, const CellPartition& partition = {});
/// Population b for a custom cell map (x -> cell in [0, cells)).
Eigen::VectorXd population_b(const LatentDGP& dgp, std::size_t cells,
                             const std::function<std::size_t(std::span<const double>)>& cell_of);
/// True type probabilities in the column order of design_system. Throws if a
/// type with mass is excluded by the restrictions.
Eigen::VectorXd true_type_vector(const LatentDGP& dgp, std::size_t cells,
                                 const std::function<std::size_t(std::span<const double>)>& cell_of,
                                 Restrictions restrictions);

/// Ground truth computed directly from type probabilities. Each field is empty
/// when its conditioning population has zero mass.
struct OracleTruth {
  std::optional<ComplierJointPO> joint;
  std::optional<MarginalPO> marginal;
  std::optional<double> theta_local;
  std::optional<double> theta_dk;
  std::optional<double> theta_local_untreated;
  double first_stage = 0.0;
  double ey_z1 = 0.0;
  double ey_z0 = 0.0;
  double et_z1 = 0.0;
  double et_z0 = 0.0;
};

OracleTruth oracle_estimands(const LatentDGP& dgp);

/// E[g(T, X) | target] from type definitions; empty on zero mass.
std::optional<double> oracle_profile(const LatentDGP& dgp, const CovariateFn& g, const ProfileTarget& target);
/// Complier moment E[g(Y(t), T, X) | C].
std::optional<double> oracle_kappa(const LatentDGP& dgp, const OutcomeCovariateFn& g, int t);
/// Population falsifier residual for the given restrictions and no covariate cells.
double oracle_population_residual(const LatentDGP& dgp, Restrictions restrictions = Restrictions::IaIvPlusMtr);

/// n i.i.d. draws; bit-identical for a given seed.
ObservedSample draw_sample(const LatentDGP& dgp, std::size_t n, std::uint64_t seed);

}  // namespace persuasion
