#include "persuasion/oracle.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "persuasion/error.hpp"

namespace persuasion {
namespace {

using nlohmann::json;

constexpr double kMassTolerance = 1e-9;
constexpr double kZeroMass = 1e-12;

std::vector<XAtom> binary_x(double p1) { return {{{0.0}, 1.0 - p1}, {{1.0}, p1}}; }

double mean_over_atoms(const std::vector<XAtom>& atoms, const std::function<double(std::span<const double>)>& g) {
  double s = 0.0;
  for (const XAtom& a : atoms) s += a.mass * g(a.x);
  return s;
}

// E[g(T, X) 1{numerator} | denominator, group] summed over the group's outcome types.
std::optional<double> conditional_over_types(const LatentDGP& dgp, Compliance group, const CovariateFn& g,
                                             const std::function<bool(OutcomeType)>& denominator,
                                             const std::function<bool(OutcomeType)>& numerator) {
  double mass = 0.0;
  double total = 0.0;
  for (OutcomeType o : kAllOutcomes) {
    const double m = dgp.type_mass(group, o);
    if (m == 0.0 || !denominator(o)) continue;
    mass += m;
    if (!numerator(o)) continue;
    const auto atoms = dgp.atoms(group, o);
    for (int z = 0; z < 2; ++z) {
      const double qz = z == 1 ? dgp.q : 1.0 - dgp.q;
      const int t = treatment_of(group, z);
      total += qz * m * mean_over_atoms(atoms, [&](std::span<const double> x) { return g(t, x); });
    }
  }
  if (mass < kZeroMass) return std::nullopt;
  return total / mass;
}

}  // namespace

void LatentDGP::validate() const {
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("DGP: q must lie in (0, 1)");
  double pi_sum = 0.0;
  for (const auto& [c, m] : pi) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw ValidationError("DGP: pi[" + to_string(c) + "] must be non-negative");
    pi_sum += m;
  }
  if (std::abs(pi_sum - 1.0) > kMassTolerance) throw ValidationError("DGP: pi must sum to 1");
  for (const auto& [c, m] : pi) {
    if (m == 0.0) continue;
    const auto it = outcome_dist.find(c);
    if (it == outcome_dist.end()) throw ValidationError("DGP: missing outcome_dist for " + to_string(c));
    double s = 0.0;
    for (const auto& [o, w] : it->second) {
      if (!(w >= 0.0) || !std::isfinite(w))
        throw ValidationError("DGP: outcome_dist[" + to_string(c) + "][" + to_string(o) + "] must be non-negative");
      s += w;
    }
    if (std::abs(s - 1.0) > kMassTolerance) throw ValidationError("DGP: outcome_dist[" + to_string(c) + "] must sum to 1");
    for (const auto& [o, w] : it->second) {
      if (w == 0.0 || covariate_names.empty()) continue;
      const auto ci = x_dist.find(c);
      if (ci == x_dist.end() || ci->second.find(o) == ci->second.end())
        throw ValidationError("DGP: missing x_dist for type (" + to_string(c) + ", " + to_string(o) + ")");
      double xs = 0.0;
      for (const XAtom& a : ci->second.at(o)) {
        if (a.x.size() != covariate_names.size())
          throw ValidationError("DGP: x_dist atom arity differs from the covariate count");
        if (!(a.mass >= 0.0)) throw ValidationError("DGP: x_dist masses must be non-negative");
        for (double v : a.x)
          if (!std::isfinite(v)) throw ValidationError("DGP: covariate values must be finite");
        xs += a.mass;
      }
      if (std::abs(xs - 1.0) > kMassTolerance)
        throw ValidationError("DGP: x_dist for (" + to_string(c) + ", " + to_string(o) + ") must sum to 1");
    }
  }
}

double LatentDGP::type_mass(Compliance c, OutcomeType o) const {
  const auto pc = pi.find(c);
  if (pc == pi.end() || pc->second == 0.0) return 0.0;
  const auto oc = outcome_dist.find(c);
  if (oc == outcome_dist.end()) return 0.0;
  const auto ow = oc->second.find(o);
  return ow == oc->second.end() ? 0.0 : pc->second * ow->second;
}

std::vector<XAtom> LatentDGP::atoms(Compliance c, OutcomeType o) const {
  if (covariate_names.empty()) return {XAtom{{}, 1.0}};
  return x_dist.at(c).at(o);
}

bool LatentDGP::violates_restrictions() const {
  for (Compliance c : {Compliance::NeverTaker, Compliance::Complier, Compliance::AlwaysTaker, Compliance::Defier}) {
    if (c == Compliance::Defier) {
      for (OutcomeType o : kAllOutcomes)
        if (type_mass(c, o) > 0.0) return true;
    } else if (type_mass(c, OutcomeType::Demobilised) > 0.0) {
      return true;
    }
  }
  return false;
}

LatentDGP parse_dgp_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("DGP file is not valid JSON: ") + e.what());
  }
  LatentDGP dgp;
  try {
    dgp.q = j.at("q").get<double>();
    for (const auto& [k, v] : j.at("pi").items()) dgp.pi[parse_compliance(k)] = v.get<double>();
    for (const auto& [k, v] : j.at("outcome_dist").items())
      for (const auto& [ok, ov] : v.items()) dgp.outcome_dist[parse_compliance(k)][parse_outcome_type(ok)] = ov.get<double>();
    if (j.contains("covariates")) dgp.covariate_names = j.at("covariates").get<std::vector<std::string>>();
    if (j.contains("x_dist")) {
      for (const auto& [k, v] : j.at("x_dist").items()) {
        const Compliance c = parse_compliance(k);
        auto read_atoms = [](const json& arr) {
          std::vector<XAtom> atoms;
          for (const auto& a : arr) atoms.push_back({a.at("x").get<std::vector<double>>(), a.at("p").get<double>()});
          return atoms;
        };
        if (v.contains("*")) {
          const auto atoms = read_atoms(v.at("*"));
          for (OutcomeType o : kAllOutcomes) dgp.x_dist[c][o] = atoms;
        }
        for (const auto& [ok, ov] : v.items())
          if (ok != "*") dgp.x_dist[c][parse_outcome_type(ok)] = read_atoms(ov);
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed DGP file: ") + e.what());
  }
  dgp.validate();
  return dgp;
}

LatentDGP load_dgp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open DGP file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dgp_json(ss.str());
}

std::string dgp_to_json(const LatentDGP& dgp) {
  json j;
  j["q"] = dgp.q;
  for (const auto& [c, m] : dgp.pi) j["pi"][to_string(c)] = m;
  for (const auto& [c, row] : dgp.outcome_dist)
    for (const auto& [o, w] : row) j["outcome_dist"][to_string(c)][to_string(o)] = w;
  j["covariates"] = dgp.covariate_names;
  if (!dgp.covariate_names.empty()) {
    for (const auto& [c, row] : dgp.x_dist)
      for (const auto& [o, atoms] : row) {
        json arr = json::array();
        for (const XAtom& a : atoms) arr.push_back({{"x", a.x}, {"p", a.mass}});
        j["x_dist"][to_string(c)][to_string(o)] = arr;
      }
  }
  return j.dump(2) + "\n";
}

LatentDGP dgp1() {
  LatentDGP d;
  d.q = 0.5;
  d.pi = {{Compliance::AlwaysTaker, 0.25}, {Compliance::Complier, 0.5}, {Compliance::NeverTaker, 0.25}};
  d.outcome_dist[Compliance::Complier] = {{OutcomeType::Always, 0.3}, {OutcomeType::Never, 0.6}, {OutcomeType::Mobilised, 0.1}};
  d.outcome_dist[Compliance::AlwaysTaker] = {{OutcomeType::Always, 0.5}, {OutcomeType::Never, 0.3}, {OutcomeType::Mobilised, 0.2}};
  d.outcome_dist[Compliance::NeverTaker] = {{OutcomeType::Always, 0.2}, {OutcomeType::Never, 0.7}, {OutcomeType::Mobilised, 0.1}};
  d.covariate_names = {"x"};
  d.x_dist[Compliance::Complier] = {{OutcomeType::Always, binary_x(0.9)},
                                    {OutcomeType::Never, binary_x(0.5)},
                                    {OutcomeType::Mobilised, binary_x(0.8)},
                                    {OutcomeType::Demobilised, binary_x(0.5)}};
  for (OutcomeType o : kAllOutcomes) {
    d.x_dist[Compliance::AlwaysTaker][o] = binary_x(0.6);
    d.x_dist[Compliance::NeverTaker][o] = binary_x(0.4);
  }
  return d;
}

LatentDGP demobilised_dgp(double share) {
  if (!(share >= 0.0 && share <= 0.7)) throw ValidationError("demobilised share must lie in [0, 0.7]");
  LatentDGP d = dgp1();
  d.outcome_dist[Compliance::Complier] = {
      {OutcomeType::Always, 0.3}, {OutcomeType::Never, 0.7 - share}, {OutcomeType::Demobilised, share}};
  return d;
}

LatentDGP random_valid_dgp(Rng& rng) {
  LatentDGP d;
  d.q = 0.2 + 0.6 * rng.uniform();
  const double complier = 0.15 + 0.5 * rng.uniform();
  const double nt = (1.0 - complier) * rng.uniform();
  d.pi = {{Compliance::Complier, complier}, {Compliance::NeverTaker, nt}, {Compliance::AlwaysTaker, 1.0 - complier - nt}};
  d.covariate_names = {"x1", "x2"};
  for (Compliance c : kMonotoneCompliance) {
    double w[3];
    double s = 0.0;
    for (double& v : w) s += (v = 0.05 + rng.uniform());
    for (std::size_t i = 0; i < 3; ++i) d.outcome_dist[c][kMonotoneOutcomes[i]] = w[i] / s;
    for (OutcomeType o : kMonotoneOutcomes) {
      std::vector<XAtom> atoms;
      double total = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 3; ++b) {
          atoms.push_back({{static_cast<double>(a), static_cast<double>(b)}, 0.05 + rng.uniform()});
          total += atoms.back().mass;
        }
      for (XAtom& at : atoms) at.mass /= total;
      d.x_dist[c][o] = std::move(atoms);
    }
  }
  return d;
}

PopulationMoments::PopulationMoments(const LatentDGP& dgp) : q_(dgp.q), covariates_(dgp.covariate_names.size()) {
  dgp.validate();
  for (int z = 0; z < 2; ++z)
    for (const auto& [c, pc] : dgp.pi)
      for (OutcomeType o : kAllOutcomes) {
        const double m = dgp.type_mass(c, o);
        if (m == 0.0) continue;
        const int t = treatment_of(c, z);
        const int y = outcome_of(o, t);
        for (const XAtom& a : dgp.atoms(c, o))
          if (a.mass > 0.0) atoms_.push_back({z, y, t, a.x, m * a.mass});
      }
}

ArmMoments PopulationMoments::arm_moments(std::span<const RowFn> fns, int arm) const {
  const auto k = static_cast<Eigen::Index>(fns.size());
  ArmMoments m;
  m.mean = Eigen::VectorXd::Zero(k);
  m.mean_cov = Eigen::MatrixXd::Zero(k, k);
  for (const PopulationAtom& a : atoms_) {
    if (a.z != arm) continue;
    const Row r{a.y, a.t, a.z, std::span<const double>(a.x)};
    for (Eigen::Index j = 0; j < k; ++j) m.mean(j) += a.mass * fns[static_cast<std::size_t>(j)](r);
  }
  return m;
}

Eigen::VectorXd population_b(const LatentDGP& dgp, std::size_t cells,
                             const std::function<std::size_t(std::span<const double>)>& cell_of) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(8 * cells));
  const PopulationMoments pop(dgp);
  for (const PopulationAtom& a : pop.atoms()) {
    const std::size_t k = cell_of(a.x);
    if (k >= cells) throw ValidationError("covariate value falls outside every cell");
    b(static_cast<Eigen::Index>(falsifier_row_index(k, a.z, a.y, a.t))) += a.mass;
  }
  return b;
}

Eigen::VectorXd population_b(const LatentDGP& dgp, const CellPartition& partition) {
  return population_b(dgp, partition.size(), [&](std::span<const double> x) {
    return partition.cell_of(x).value_or(partition.size());
  });
}

Eigen::VectorXd true_type_vector(const LatentDGP& dgp, std::size_t cells,
                                 const std::function<std::size_t(std::span<const double>)>& cell_of,
                                 Restrictions restrictions) {
  const FalsifierSystem sys = design_system(cells, restrictions);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.columns.size()));
  double covered = 0.0;
  for (std::size_t j = 0; j < sys.columns.size(); ++j) {
    const FalsifierColumn& col = sys.columns[j];
    const double m = dgp.type_mass(col.compliance, col.outcome);
    if (m == 0.0) continue;
    for (const XAtom& a : dgp.atoms(col.compliance, col.outcome))
      if (cell_of(a.x) == col.cell) p(static_cast<Eigen::Index>(j)) += m * a.mass;
  }
  covered = p.sum();
  if (std::abs(covered - 1.0) > kMassTolerance)
    throw ValidationError("DGP has type mass outside the columns allowed by the restrictions");
  return p;
}

OracleTruth oracle_estimands(const LatentDGP& dgp) {
  dgp.validate();
  OracleTruth truth;
  for (const auto& [c, pc] : dgp.pi)
    for (OutcomeType o : kAllOutcomes) {
      const double m = dgp.type_mass(c, o);
      truth.et_z1 += m * treatment_of(c, 1);
      truth.et_z0 += m * treatment_of(c, 0);
      truth.ey_z1 += m * outcome_of(o, treatment_of(c, 1));
      truth.ey_z0 += m * outcome_of(o, treatment_of(c, 0));
    }
  truth.first_stage = truth.et_z1 - truth.et_z0;

  const double pc = dgp.pi.count(Compliance::Complier) ? dgp.pi.at(Compliance::Complier) : 0.0;
  if (pc > kZeroMass) {
    auto share = [&](OutcomeType o) { return dgp.type_mass(Compliance::Complier, o) / pc; };
    ComplierJointPO joint;
    joint.p11 = share(OutcomeType::Always);
    joint.p00 = share(OutcomeType::Never);
    joint.p01 = share(OutcomeType::Mobilised);
    joint.first_stage = truth.first_stage;
    truth.joint = joint;

    MarginalPO marg;
    marg.p_y0[1] = share(OutcomeType::Always) + share(OutcomeType::Demobilised);
    marg.p_y0[0] = share(OutcomeType::Never) + share(OutcomeType::Mobilised);
    marg.p_y1[1] = share(OutcomeType::Always) + share(OutcomeType::Mobilised);
    marg.p_y1[0] = share(OutcomeType::Never) + share(OutcomeType::Demobilised);
    truth.marginal = marg;

    // P[Y(1)=1 | Y(0)=0, C], and the same among untreated (Z=0) compliers.
    const double y0_zero = share(OutcomeType::Never) + share(OutcomeType::Mobilised);
    if (y0_zero > kZeroMass) {
      truth.theta_local = share(OutcomeType::Mobilised) / y0_zero;
      const double untreated = (1.0 - dgp.q) * pc;
      truth.theta_local_untreated = untreated * share(OutcomeType::Mobilised) / (untreated * y0_zero);
    }
  }
  if (std::abs(truth.first_stage) > kZeroMass && truth.ey_z0 < 1.0 - 1e-12)
    truth.theta_dk = (truth.ey_z1 - truth.ey_z0) / truth.first_stage / (1.0 - truth.ey_z0);
  return truth;
}

std::optional<double> oracle_profile(const LatentDGP& dgp, const CovariateFn& g, const ProfileTarget& target) {
  using Kind = ProfileTarget::Kind;
  auto any = [](OutcomeType) { return true; };
  auto y0_is = [](int y) { return [y](OutcomeType o) { return outcome_of(o, 0) == y; }; };
  auto y1_is = [](int y) { return [y](OutcomeType o) { return outcome_of(o, 1) == y; }; };
  auto is = [](OutcomeType want) { return [want](OutcomeType o) { return o == want; }; };
  const Compliance c = Compliance::Complier;
  switch (target.kind) {
    case Kind::Complier: return conditional_over_types(dgp, c, g, any, any);
    case Kind::Marginal: {
      const int t = target.t;
      const int y = target.y;
      auto sel = [t, y](OutcomeType o) { return outcome_of(o, t) == y; };
      return conditional_over_types(dgp, c, g, sel, any);
    }
    case Kind::AlwaysVoter: return conditional_over_types(dgp, c, g, is(OutcomeType::Always), any);
    case Kind::NeverVoter: return conditional_over_types(dgp, c, g, is(OutcomeType::Never), any);
    case Kind::Mobilised: return conditional_over_types(dgp, c, g, is(OutcomeType::Mobilised), any);
    case Kind::JointIndicator:
      switch (target.variant) {
        case 1: return conditional_over_types(dgp, c, g, y0_is(0), y1_is(0));
        case 2: return conditional_over_types(dgp, c, g, y0_is(0), y1_is(1));
        case 3: return conditional_over_types(dgp, c, g, y0_is(1), y1_is(1));
        case 4: return conditional_over_types(dgp, c, g, y1_is(0), y0_is(0));
        case 5: return conditional_over_types(dgp, c, g, y1_is(1), y0_is(1));
        case 6: return conditional_over_types(dgp, c, g, y1_is(1), y0_is(0));
        default: throw ValidationError("joint indicator variant must be in 1..6");
      }
    case Kind::AlwaysTaker: return conditional_over_types(dgp, Compliance::AlwaysTaker, g, y1_is(target.y), any);
    case Kind::NeverTaker: return conditional_over_types(dgp, Compliance::NeverTaker, g, y0_is(target.y), any);
  }
  throw ValidationError("unknown profile target");
}

std::optional<double> oracle_kappa(const LatentDGP& dgp, const OutcomeCovariateFn& g, int t) {
  const Compliance c = Compliance::Complier;
  double mass = 0.0;
  double total = 0.0;
  for (OutcomeType o : kAllOutcomes) {
    const double m = dgp.type_mass(c, o);
    if (m == 0.0) continue;
    mass += m;
    const int yt = outcome_of(o, t);
    const auto atoms = dgp.atoms(c, o);
    for (int z = 0; z < 2; ++z) {
      const double qz = z == 1 ? dgp.q : 1.0 - dgp.q;
      total += qz * m * mean_over_atoms(atoms, [&](std::span<const double> x) { return g(yt, z, x); });
    }
  }
  if (mass < kZeroMass) return std::nullopt;
  return total / mass;
}

double oracle_population_residual(const LatentDGP& dgp, Restrictions restrictions) {
  FalsifierSystem sys = design_system(1, restrictions);
  sys.b_hat = population_b(dgp, 1, [](std::span<const double>) { return std::size_t{0}; });
  return solve_feasibility(sys).residual;
}

ObservedSample draw_sample(const LatentDGP& dgp, std::size_t n, std::uint64_t seed) {
  dgp.validate();
  if (n < 1) throw ValidationError("sample size must be at least 1");
  struct Type {
    Compliance c;
    OutcomeType o;
    std::vector<XAtom> atoms;
    std::vector<double> atom_weights;
  };
  std::vector<Type> types;
  std::vector<double> weights;
  for (const auto& [c, pc] : dgp.pi)
    for (OutcomeType o : kAllOutcomes) {
      const double m = dgp.type_mass(c, o);
      if (m == 0.0) continue;
      Type ty{c, o, dgp.atoms(c, o), {}};
      for (const XAtom& a : ty.atoms) ty.atom_weights.push_back(a.mass);
      types.push_back(std::move(ty));
      weights.push_back(m);
    }
  Rng rng(seed);
  std::vector<ObservedRow> rows(n);
  for (ObservedRow& row : rows) {
    const Type& ty = types[rng.categorical(weights)];
    row.x = ty.atoms[rng.categorical(ty.atom_weights)].x;
    row.z = rng.bernoulli(dgp.q) ? 1 : 0;
    row.t = treatment_of(ty.c, static_cast<int>(row.z));
    row.y = outcome_of(ty.o, row.t);
  }
  return ObservedSample::from_rows(rows, dgp.covariate_names);
}

}  // namespace persuasion
