#include "persuasion/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "persuasion/error.hpp"
#include "persuasion/estimands.hpp"
#include "persuasion/falsifier.hpp"
#include "persuasion/inference.hpp"
#include "persuasion/oracle.hpp"
#include "persuasion/sensitivity.hpp"

namespace persuasion::cli {
namespace {

using nlohmann::json;

struct Options {
  std::string input;
  std::string output;
  double alpha = 0.05;
  std::string z_pair;
  bool clamp = false;
  std::vector<std::string> covariates;
  std::vector<std::string> bins;
  bool by_cell = false;
  // profile
  std::vector<std::string> targets;
  std::vector<double> cdf_grid;
  // falsify
  std::string b = "auto";
  std::size_t m = 200;
  std::uint64_t seed = 0;
  std::string restrictions = "mtr";
  unsigned threads = 0;
  // sensitivity
  std::optional<double> p_y0_1;
  std::optional<double> p_y1_1;
  std::vector<double> deltas;
  std::size_t grid_count = 6;
  std::string format = "json";
  // simulate
  std::string dgp;
  std::size_t n = 0;
  // ar-ci
  std::string estimand = "theta_local";
  double p0 = 0.0;
  std::optional<double> grid_lo;
  std::optional<double> grid_hi;
  std::size_t grid_points = 2001;
};

const std::vector<std::string> kDefaultTargets = {"complier",       "marginal_t0_y0", "marginal_t0_y1",
                                                  "marginal_t1_y0", "marginal_t1_y1", "always",
                                                  "never",          "mobilised"};

double maybe_clamp(double v, bool clamp) { return clamp ? clamp_unit(v) : v; }

struct LoadedSample {
  ObservedSample sample;
  std::vector<std::string> warnings;
};

LoadedSample load_input(const Options& o) {
  if (o.input.empty()) throw ValidationError("--input is required");
  ObservedSample s = load_csv(o.input);
  std::vector<std::string> warnings;
  if (!o.z_pair.empty()) {
    const auto comma = o.z_pair.find(',');
    if (comma == std::string::npos) throw ValidationError("--z-pair expects two levels as lo,hi");
    long lo = 0;
    long hi = 0;
    try {
      std::size_t used = 0;
      lo = std::stol(o.z_pair.substr(0, comma), &used);
      if (used != comma) throw std::invalid_argument("lo");
      const std::string rest = o.z_pair.substr(comma + 1);
      hi = std::stol(rest, &used);
      if (used != rest.size()) throw std::invalid_argument("hi");
    } catch (const std::logic_error&) {
      throw ValidationError("--z-pair expects two integer levels as lo,hi");
    }
    s = restrict_pair(s, lo, hi, &warnings);
  }
  return {std::move(s), std::move(warnings)};
}

BinningSpec binning(const Options& o) {
  BinningSpec spec;
  for (const std::string& name : o.covariates) spec.covariates.push_back({name, {}});
  for (const std::string& b : o.bins) {
    // name:lo:hi
    const auto c1 = b.find(':');
    const auto c2 = c1 == std::string::npos ? c1 : b.find(':', c1 + 1);
    if (c2 == std::string::npos) throw ValidationError("--bin expects name:lo:hi, got '" + b + "'");
    const std::string name = b.substr(0, c1);
    Bin bin{};
    try {
      bin.lo = std::stod(b.substr(c1 + 1, c2 - c1 - 1));
      bin.hi = std::stod(b.substr(c2 + 1));
    } catch (const std::logic_error&) {
      throw ValidationError("--bin expects numeric bounds, got '" + b + "'");
    }
    auto it = std::find_if(spec.covariates.begin(), spec.covariates.end(),
                           [&](const CovariateBinning& cb) { return cb.covariate == name; });
    if (it == spec.covariates.end()) {
      spec.covariates.push_back({name, {}});
      it = spec.covariates.end() - 1;
    }
    it->bins.push_back(bin);
  }
  return spec;
}

json inference_json(const RatioInference& r, bool clamp) {
  return {{"estimate", maybe_clamp(r.estimate, clamp)},
          {"se", r.se},
          {"ci_lo", maybe_clamp(r.ci_lo, clamp)},
          {"ci_hi", maybe_clamp(r.ci_hi, clamp)},
          {"alpha", r.alpha}};
}

json ar_json(const ARResult& r) {
  json intervals = json::array();
  for (const ArInterval& i : r.intervals)
    intervals.push_back({{"lo", i.lo},
                         {"hi", i.hi},
                         {"lower_unbounded", i.lower_unbounded},
                         {"upper_unbounded", i.upper_unbounded}});
  return {{"p0", r.p0},
          {"statistic", r.statistic},
          {"p_value", r.p_value},
          {"alpha", r.alpha},
          {"critical_value", r.critical_value},
          {"grid", {{"lo", r.grid.lo}, {"hi", r.grid.hi}, {"points", r.grid.points}}},
          {"intervals", intervals},
          {"empty", r.empty()},
          {"unbounded", r.unbounded()}};
}

json marginal_json(const MarginalPO& m, bool clamp) {
  return {{"y0", {{"0", maybe_clamp(m.p_y0[0], clamp)}, {"1", maybe_clamp(m.p_y0[1], clamp)}}},
          {"y1", {{"0", maybe_clamp(m.p_y1[0], clamp)}, {"1", maybe_clamp(m.p_y1[1], clamp)}}}};
}

json joint_json(const ComplierJointPO& j, bool clamp) {
  return {{"p11", maybe_clamp(j.p11, clamp)},
          {"p00", maybe_clamp(j.p00, clamp)},
          {"p01", maybe_clamp(j.p01, clamp)},
          {"first_stage", j.first_stage}};
}

json error_json(const std::string& kind, const std::string& message) {
  return {{"error", {{"kind", kind}, {"message", message}}}};
}

std::string kind_of(const NumericalError& e) {
  if (dynamic_cast<const WeakFirstStageError*>(&e)) return "weak_first_stage";
  if (dynamic_cast<const ZeroMassError*>(&e)) return "zero_mass";
  if (dynamic_cast<const ConvergenceError*>(&e)) return "convergence";
  return "numerical";
}

json base_config(const std::string& command, const Options& o) {
  json c = {{"command", command}};
  if (!o.input.empty()) c["input"] = o.input;
  if (!o.z_pair.empty()) c["z_pair"] = o.z_pair;
  return c;
}

json sample_json(const ObservedSample& s) {
  return {{"n", s.size()}, {"n_z0", s.count_level(0)}, {"n_z1", s.count_level(1)}};
}

// Point estimates of the main quantities on one sample; used per cell.
json cell_estimates(const ObservedSample& s, bool clamp) {
  json out = sample_json(s);
  try {
    const SampleMoments mom(s);
    out["joint"] = joint_json(joint_po(mom), clamp);
    out["marginal"] = marginal_json(marginal_po(mom), clamp);
    out["theta_local"] = maybe_clamp(persuasion_rates(mom).theta_local, clamp);
  } catch (const NumericalError& e) {
    out["error"] = error_json(kind_of(e), e.what())["error"];
  } catch (const ValidationError& e) {
    out["error"] = error_json("validation", e.what())["error"];
  }
  return out;
}

json cmd_estimate(const Options& o) {
  const LoadedSample in = load_input(o);
  const SampleMoments mom(in.sample);
  const ComplierJointPO joint = joint_po(mom);
  const MarginalPO marg = marginal_po(mom);
  const PersuasionRates rates = persuasion_rates(mom);
  const DkLocalComparison dk = compare_dk_local(mom);

  json out;
  json config = base_config("estimate", o);
  config["alpha"] = o.alpha;
  config["clamp"] = o.clamp;
  config["by_cell"] = o.by_cell;
  config["covariates"] = o.covariates;
  config["bins"] = o.bins;
  out["config"] = config;
  out["sample"] = sample_json(in.sample);
  out["warnings"] = in.warnings;
  out["joint"] = joint_json(joint, o.clamp);
  out["marginal"] = marginal_json(marg, o.clamp);
  out["theta_local"] = maybe_clamp(rates.theta_local, o.clamp);
  out["theta_local_untreated"] = maybe_clamp(rates.theta_local_untreated, o.clamp);
  out["theta_dk"] = rates.theta_dk;
  json cmp = {{"theta_dk", dk.theta_dk},
              {"theta_local", dk.theta_local},
              {"gap", dk.gap},
              {"one_sided_control", dk.one_sided_control},
              {"one_sided_treatment", dk.one_sided_treatment},
              {"equivalence_contrast", dk.equivalence_contrast}};
  cmp["one_sided_contrast"] = dk.one_sided_contrast ? json(*dk.one_sided_contrast) : json(nullptr);
  out["dk_comparison"] = cmp;

  const std::pair<const char*, WaldComponents> comps[] = {
      {"theta_local", rates.local_components},
      {"p11", joint.components.p11},
      {"p00", joint.components.p00},
      {"p01", joint.components.p01},
      {"p_y0_1", marg.components_y0[1]},
      {"p_y1_1", marg.components_y1[1]},
  };
  json ci;
  json ar;
  for (const auto& [name, c] : comps) {
    ci[name] = inference_json(delta_inference(c, o.alpha), o.clamp);
    ar[name] = ar_json(ar_confidence_set(c, o.alpha));
  }
  out["ci"] = ci;
  out["ar_ci"] = ar;

  if (o.by_cell) {
    if (o.covariates.empty() && o.bins.empty()) throw ValidationError("--by-cell needs --covariates or --bin");
    const CellPartition part = partition_cells(in.sample, binning(o));
    const std::vector<std::size_t> cell = part.assign(in.sample);
    json cells = json::array();
    for (std::size_t k = 0; k < part.size(); ++k) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < cell.size(); ++i)
        if (cell[i] == k) idx.push_back(i);
      json entry;
      if (idx.empty()) {
        entry = {{"n", 0}, {"error", {{"kind", "validation"}, {"message", "empty cell"}}}};
      } else {
        entry = cell_estimates(in.sample.subset(idx), o.clamp);
      }
      entry["cell"] = part.labels()[k];
      cells.push_back(entry);
    }
    out["by_cell"] = cells;
  }
  return out;
}

json cmd_profile(const Options& o) {
  const LoadedSample in = load_input(o);
  if (o.covariates.empty()) throw ValidationError("profile needs --covariates");
  const SampleMoments mom(in.sample);
  std::vector<ProfileTarget> targets;
  for (const std::string& t : o.targets.empty() ? kDefaultTargets : o.targets) targets.push_back(ProfileTarget::parse(t));

  json out;
  json config = base_config("profile", o);
  config["alpha"] = o.alpha;
  config["clamp"] = o.clamp;
  config["covariates"] = o.covariates;
  json tnames = json::array();
  for (const auto& t : targets) tnames.push_back(t.name());
  config["targets"] = tnames;
  config["cdf_grid"] = o.cdf_grid;
  out["config"] = config;
  out["sample"] = sample_json(in.sample);
  out["warnings"] = in.warnings;

  json profiles;
  json cdfs;
  for (const std::string& cov : o.covariates) {
    const std::size_t j = in.sample.covariate_index(cov);
    const CovariateFn g = [j](int, std::span<const double> x) { return x[j]; };
    for (const ProfileTarget& t : targets) {
      try {
        const TypeProfile p = profile(mom, g, t);
        profiles[cov][t.name()] = inference_json(delta_inference(p.components, o.alpha), o.clamp);
      } catch (const NumericalError& e) {
        profiles[cov][t.name()] = error_json(kind_of(e), e.what());
      }
      if (!o.cdf_grid.empty()) {
        try {
          json pts = json::array();
          for (const CdfPoint& pt : conditional_cdf(mom, j, t, o.cdf_grid))
            pts.push_back({{"x", pt.x}, {"value", maybe_clamp(pt.value, o.clamp)}});
          cdfs[cov][t.name()] = pts;
        } catch (const NumericalError& e) {
          cdfs[cov][t.name()] = error_json(kind_of(e), e.what());
        }
      }
    }
  }
  out["profiles"] = profiles;
  if (!o.cdf_grid.empty()) out["cdf"] = cdfs;
  return out;
}

json cmd_falsify(const Options& o) {
  const LoadedSample in = load_input(o);
  const CellPartition part = partition_cells(in.sample, binning(o));
  SubsampleOptions so;
  so.alpha = o.alpha;
  so.m = o.m;
  so.seed = o.seed;
  so.threads = o.threads;
  if (o.b != "auto") {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(o.b, &used);
      if (used != o.b.size() || v < 0) throw std::invalid_argument("b");
      so.b = static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
      throw ValidationError("--b must be 'auto' or a positive integer");
    }
  }
  const FalsifierResult r = subsample_test(in.sample, part, parse_restrictions(o.restrictions), so);

  json out;
  json config = base_config("falsify", o);
  config["alpha"] = o.alpha;
  config["b"] = o.b;
  config["M"] = o.m;
  config["seed"] = o.seed;
  config["restrictions"] = o.restrictions;
  config["covariates"] = o.covariates;
  config["bins"] = o.bins;
  out["config"] = config;
  out["sample"] = sample_json(in.sample);
  out["warnings"] = in.warnings;
  out["statistic"] = r.statistic;
  out["critical_value"] = r.critical_value;
  out["p_value"] = r.p_value;
  out["b"] = r.b;
  out["M"] = r.m;
  out["seed"] = r.seed;
  out["alpha"] = r.alpha;
  out["rejected"] = r.rejected;
  out["residual"] = r.residual;
  out["restrictions"] = to_string(r.restrictions);
  out["p_star"] = std::vector<double>(r.p_star.data(), r.p_star.data() + r.p_star.size());
  json cols = json::array();
  for (const FalsifierColumn& c : r.columns)
    cols.push_back({{"cell", r.cell_labels[c.cell]}, {"compliance", to_string(c.compliance)}, {"outcome", to_string(c.outcome)}});
  out["columns"] = cols;
  out["cells"] = r.cell_labels;
  out["subsample_stats"] = r.subsample_stats;
  return out;
}

// Returns the JSON document, or CSV text through `csv`.
json cmd_sensitivity(const Options& o, std::string* csv) {
  SensitivityMarginals m;
  json config = base_config("sensitivity", o);
  if (o.p_y0_1 || o.p_y1_1) {
    if (!(o.p_y0_1 && o.p_y1_1)) throw ValidationError("give both --p-y0-1 and --p-y1-1");
    if (!o.input.empty()) throw ValidationError("use either --input or the marginal overrides, not both");
    m = {*o.p_y0_1, *o.p_y1_1};
  } else {
    const LoadedSample in = load_input(o);
    m = SensitivityMarginals::from(marginal_po(in.sample));
  }
  const std::vector<double> deltas = o.deltas.empty() ? default_delta_grid(m, o.grid_count) : o.deltas;
  const std::vector<SensitivityPoint> curve = sensitivity_curve(m, deltas);
  if (o.format == "csv") {
    *csv = format_sensitivity_csv(curve);
    return nullptr;
  }
  config["deltas"] = o.deltas;
  config["grid_count"] = o.grid_count;
  config["format"] = o.format;
  json table;
  for (const SensitivityPoint& p : curve) {
    table["delta"].push_back(p.delta);
    table["p11"].push_back(p.p11);
    table["p00"].push_back(p.p00);
    table["p01"].push_back(p.p01);
    table["out_of_range"].push_back(p.out_of_range);
  }
  return {{"config", config},
          {"marginals", {{"p_y0_1", m.p_y0_1}, {"p_y1_1", m.p_y1_1}}},
          {"max_delta", max_admissible_delta(m)},
          {"table", table}};
}

std::string cmd_simulate(const Options& o) {
  if (o.dgp.empty()) throw ValidationError("--dgp is required");
  if (o.n < 1) throw ValidationError("--n must be at least 1");
  return format_csv(draw_sample(load_dgp(o.dgp), o.n, o.seed));
}

// Wald components of a named estimand.
WaldComponents named_components(const SampleMoments& mom, const ObservedSample& s, const std::string& name) {
  if (name == "theta_local") return wald_components(mom, transforms::theta_local());
  if (name == "p11") return wald_components(mom, transforms::always_voter_share());
  if (name == "p00") return wald_components(mom, transforms::never_voter_share());
  if (name == "p01" || name == "late") return wald_components(mom, transforms::mobilised_share());
  for (int t = 0; t < 2; ++t)
    for (int y = 0; y < 2; ++y)
      if (name == "p_y" + std::to_string(t) + "_" + std::to_string(y))
        return wald_components(mom, transforms::marginal_share(t, y));
  // profile:<target>:<covariate>
  if (name.rfind("profile:", 0) == 0) {
    const auto c = name.find(':', 8);
    if (c == std::string::npos) throw ValidationError("expected profile:<target>:<covariate>");
    const ProfileTarget target = ProfileTarget::parse(name.substr(8, c - 8));
    const std::size_t j = s.covariate_index(name.substr(c + 1));
    return profile(mom, [j](int, std::span<const double> x) { return x[j]; }, target).components;
  }
  throw ValidationError("unknown estimand '" + name +
                        "' (theta_local, p11, p00, p01, late, p_y<t>_<y>, profile:<target>:<covariate>)");
}

json cmd_ar_ci(const Options& o) {
  const LoadedSample in = load_input(o);
  const SampleMoments mom(in.sample);
  const WaldComponents c = named_components(mom, in.sample, o.estimand);
  std::optional<ArGrid> grid;
  if (o.grid_lo || o.grid_hi) {
    if (!(o.grid_lo && o.grid_hi)) throw ValidationError("give both --grid-lo and --grid-hi");
    grid = ArGrid{*o.grid_lo, *o.grid_hi, o.grid_points, 1e-6};
  } else if (o.grid_points != 2001) {
    grid = default_ar_grid(c);
    grid->points = o.grid_points;
  }
  json config = base_config("ar-ci", o);
  config["alpha"] = o.alpha;
  config["estimand"] = o.estimand;
  config["p0"] = o.p0;
  config["grid_points"] = o.grid_points;
  config["grid_lo"] = o.grid_lo ? json(*o.grid_lo) : json(nullptr);
  config["grid_hi"] = o.grid_hi ? json(*o.grid_hi) : json(nullptr);
  json out = {{"config", config}, {"sample", sample_json(in.sample)}, {"warnings", in.warnings}};
  out["ar"] = ar_json(ar_confidence_set(c, o.alpha, grid, o.p0));
  out["components"] = {{"beta1", c.beta1},
                       {"beta2", c.beta2},
                       {"var_beta1", c.cov(0, 0)},
                       {"cov", c.cov(0, 1)},
                       {"var_beta2", c.cov(1, 1)}};
  try {
    out["delta"] = inference_json(delta_inference(c, o.alpha), false);
    out["estimate"] = c.beta1 / c.beta2;
  } catch (const NumericalError& e) {
    out["delta"] = error_json(kind_of(e), e.what());
    out["estimate"] = nullptr;
  }
  return out;
}

void emit(const std::string& text, const Options& o, std::ostream& out) {
  if (o.output.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.output, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + o.output);
  f << text;
  if (!f) throw ValidationError("failed writing " + o.output);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Persuasion estimands, inference, falsification and sensitivity analysis", "persuade"};
  app.require_subcommand(1);

  auto add_input = [&](CLI::App* sc) {
    sc->add_option("--input", o.input, "CSV with columns y,t,z and covariates");
    sc->add_option("--output", o.output, "Write the result here instead of stdout");
    sc->add_option("--z-pair", o.z_pair, "Restrict a multi-valued instrument to levels lo,hi");
  };
  auto add_alpha = [&](CLI::App* sc) {
    sc->add_option("--alpha", o.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  };

  auto* est = app.add_subcommand("estimate", "Joint and marginal complier distributions, persuasion rates, CIs");
  add_input(est);
  add_alpha(est);
  est->add_flag("--clamp", o.clamp, "Clamp probabilities to [0, 1]");
  est->add_flag("--by-cell", o.by_cell, "Also report point estimates per covariate cell");
  est->add_option("--covariates", o.covariates, "Covariates defining cells")->delimiter(',');
  est->add_option("--bin", o.bins, "Explicit bin name:lo:hi (repeatable)");

  auto* prof = app.add_subcommand("profile", "Covariate means of latent types");
  add_input(prof);
  add_alpha(prof);
  prof->add_flag("--clamp", o.clamp, "Clamp point estimates and CI ends to [0, 1]");
  prof->add_option("--covariates", o.covariates, "Covariates to profile")->delimiter(',');
  prof->add_option("--targets", o.targets, "Targets, e.g. complier,marginal_t0_y1,mobilised,joint_2,at_y1")
      ->delimiter(',');
  prof->add_option("--cdf-grid", o.cdf_grid, "Also report conditional CDFs at these points")->delimiter(',');

  auto* fal = app.add_subcommand("falsify", "Subsampling test of the model restrictions");
  add_input(fal);
  add_alpha(fal);
  fal->add_option("--b", o.b, "Subsample size or 'auto' for ceil(n^(2/3))");
  fal->add_option("--M", o.m, "Number of subsamples")->check(CLI::PositiveNumber);
  fal->add_option("--seed", o.seed, "Random seed");
  fal->add_option("--restrictions", o.restrictions, "mtr or iv")->check(CLI::IsMember({"mtr", "iv"}));
  fal->add_option("--covariates", o.covariates, "Discrete covariates defining cells")->delimiter(',');
  fal->add_option("--bin", o.bins, "Explicit bin name:lo:hi (repeatable)");
  fal->add_option("--threads", o.threads, "Worker threads (default: PERSUASION_THREADS or all cores)");

  auto* sen = app.add_subcommand("sensitivity", "Complier joint distribution under demobilisation");
  add_input(sen);
  sen->add_option("--p-y0-1", o.p_y0_1, "P[Y(0)=1 | complier] instead of estimating from --input");
  sen->add_option("--p-y1-1", o.p_y1_1, "P[Y(1)=1 | complier] instead of estimating from --input");
  sen->add_option("--deltas", o.deltas, "Demobilised shares")->delimiter(',');
  sen->add_option("--grid-count", o.grid_count, "Default grid size")->check(CLI::PositiveNumber);
  sen->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* sim = app.add_subcommand("simulate", "Draw a CSV sample from a DGP file");
  sim->add_option("--dgp", o.dgp, "DGP description (JSON)")->required();
  sim->add_option("--n", o.n, "Sample size")->required();
  sim->add_option("--seed", o.seed, "Random seed");
  sim->add_option("--output", o.output, "Write the CSV here instead of stdout");

  auto* ar = app.add_subcommand("ar-ci", "Anderson-Rubin confidence set for a named estimand");
  add_input(ar);
  add_alpha(ar);
  ar->add_option("--estimand", o.estimand, "theta_local, p11, p00, p01, late, p_y<t>_<y>, profile:<target>:<covariate>");
  ar->add_option("--p0", o.p0, "Value at which to report the AR statistic");
  ar->add_option("--grid-lo", o.grid_lo, "Grid lower end");
  ar->add_option("--grid-hi", o.grid_hi, "Grid upper end");
  ar->add_option("--grid-points", o.grid_points, "Grid size");

  std::vector<const char*> argv{"persuade"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_json("validation", e.what()).dump() << "\n";
    return 1;
  }

  try {
    std::string text;
    if (est->parsed()) {
      text = cmd_estimate(o).dump(2) + "\n";
    } else if (prof->parsed()) {
      text = cmd_profile(o).dump(2) + "\n";
    } else if (fal->parsed()) {
      text = cmd_falsify(o).dump(2) + "\n";
    } else if (sen->parsed()) {
      std::string csv;
      const json j = cmd_sensitivity(o, &csv);
      text = o.format == "csv" ? csv : j.dump(2) + "\n";
    } else if (sim->parsed()) {
      text = cmd_simulate(o);
    } else if (ar->parsed()) {
      text = cmd_ar_ci(o).dump(2) + "\n";
    }
    emit(text, o, out);
    return 0;
  } catch (const ValidationError& e) {
    err << error_json("validation", e.what()).dump() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    err << error_json(kind_of(e), e.what()).dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << error_json("io", e.what()).dump() << "\n";
    return 1;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace persuasion::cli
