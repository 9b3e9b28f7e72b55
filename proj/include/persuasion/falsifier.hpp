#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "persuasion/sample.hpp"
#include "persuasion/simplex_ls.hpp"
#include "persuasion/types.hpp"

namespace persuasion {

enum class Restrictions {
  /// Instrument validity and IV monotonicity; the demobilised outcome type is allowed.
  IaIvOnly,
  /// Additionally monotone treatment response: no demobilised type.
  IaIvPlusMtr,
};

std::string to_string(Restrictions r);
/// "iv" or "mtr".
Restrictions parse_restrictions(const std::string& s);

struct FalsifierColumn {
  std::size_t cell;
  Compliance compliance;
  OutcomeType outcome;
};

struct FalsifierRow {
  std::size_t cell;
  int z;
  int y;
  int t;
};

/// A p = b over latent-type-by-cell probabilities. Rows run over
/// (cell, z, (y, t)) and columns over (cell, compliance, outcome type), cell
/// outermost in both, so A is block diagonal.
struct FalsifierSystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd b_hat;
  std::vector<FalsifierColumn> columns;
  std::vector<FalsifierRow> rows;
  std::vector<std::string> cell_labels;
  Restrictions restrictions = Restrictions::IaIvPlusMtr;

  std::size_t cells() const { return cell_labels.size(); }
};

/// Index of row (cell, z, y, t).
constexpr std::size_t falsifier_row_index(std::size_t cell, int z, int y, int t) {
  return cell * 8 + static_cast<std::size_t>(z) * 4 + static_cast<std::size_t>(y) * 2 + static_cast<std::size_t>(t);
}

/// The design matrix and labels for K cells, with b_hat left at zero.
FalsifierSystem design_system(std::size_t cells, Restrictions restrictions);
FalsifierSystem design_system(const std::vector<std::string>& cell_labels, Restrictions restrictions);

/// b_hat(k, z, y, t) = #{Z=z, Y=y, T=t, X in cell k} / #{Z=z}. The sample must have a binary instrument.
FalsifierSystem build_system(const ObservedSample& sample, const CellPartition& partition,
                             Restrictions restrictions);

struct FeasibilityResult {
  double residual = 0.0;
  Eigen::VectorXd p_star;
  int iterations = 0;
};

FeasibilityResult solve_feasibility(const FalsifierSystem& sys, const SimplexLsOptions& options = {});

/// sqrt(n) times the feasibility residual.
double test_statistic(const FalsifierSystem& sys, std::size_t n);

struct SubsampleOptions {
  double alpha = 0.05;
  /// Subsample size; ceil(n^(2/3)) when unset.
  std::optional<std::size_t> b;
  std::size_t m = 200;
  std::uint64_t seed = 0;
  /// Worker threads; 0 picks default_thread_count().
  unsigned threads = 0;
};

struct FalsifierResult {
  double statistic = 0.0;
  double residual = 0.0;
  Eigen::VectorXd p_star;
  std::vector<FalsifierColumn> columns;
  std::vector<std::string> cell_labels;
  double critical_value = 0.0;
  double p_value = 1.0;
  std::vector<double> subsample_stats;
  std::size_t b = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  bool rejected = false;
  Restrictions restrictions = Restrictions::IaIvPlusMtr;
};

/// ceil(n^(2/3)).
std::size_t default_subsample_size(std::size_t n);
/// PERSUASION_THREADS when set to a positive integer, else the hardware concurrency.
unsigned default_thread_count();

/// Subsampling test of the restrictions. Subsample i is drawn from a stream
/// derived from (seed, i), so results do not depend on the thread count.
FalsifierResult subsample_test(const ObservedSample& sample, const CellPartition& partition,
                               Restrictions restrictions, const SubsampleOptions& options = {});

}  // namespace persuasion
