#include "persuasion/falsifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <thread>

#include "persuasion/error.hpp"
#include "persuasion/rng.hpp"

namespace persuasion {
namespace {

// Row codes cell * 8 + z * 4 + y * 2 + t; these coincide with falsifier_row_index.
std::vector<std::uint32_t> row_codes(const ObservedSample& sample, const CellPartition& partition) {
  const std::vector<std::size_t> cells = partition.assign(sample);
  std::vector<std::uint32_t> codes(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const Row r = sample.row(i);
    if (r.z != 0 && r.z != 1)
      throw ValidationError("falsification needs a binary instrument; found level " + std::to_string(r.z) +
                            " (restrict to an instrument pair first)");
    codes[i] = static_cast<std::uint32_t>(falsifier_row_index(cells[i], static_cast<int>(r.z), r.y, r.t));
  }
  return codes;
}

// Fills b from code counts; false if an arm is empty.
bool fill_b(const std::vector<double>& counts, Eigen::VectorXd& b) {
  double arm[2] = {0.0, 0.0};
  for (std::size_t r = 0; r < counts.size(); ++r) arm[(r / 4) % 2] += counts[r];
  if (arm[0] == 0.0 || arm[1] == 0.0) return false;
  for (std::size_t r = 0; r < counts.size(); ++r) b(static_cast<Eigen::Index>(r)) = counts[r] / arm[(r / 4) % 2];
  return true;
}

}  // namespace

std::string to_string(Restrictions r) { return r == Restrictions::IaIvOnly ? "iv" : "mtr"; }

Restrictions parse_restrictions(const std::string& s) {
  if (s == "iv") return Restrictions::IaIvOnly;
  if (s == "mtr") return Restrictions::IaIvPlusMtr;
  throw ValidationError("unknown restrictions '" + s + "' (expected iv or mtr)");
}

FalsifierSystem design_system(const std::vector<std::string>& cell_labels, Restrictions restrictions) {
  if (cell_labels.empty()) throw ValidationError("falsifier needs at least one covariate cell");
  FalsifierSystem sys;
  sys.cell_labels = cell_labels;
  sys.restrictions = restrictions;
  const std::size_t k = cell_labels.size();
  for (std::size_t cell = 0; cell < k; ++cell) {
    for (int z = 0; z < 2; ++z)
      for (int y = 0; y < 2; ++y)
        for (int t = 0; t < 2; ++t) sys.rows.push_back({cell, z, y, t});
    for (Compliance c : kMonotoneCompliance) {
      if (restrictions == Restrictions::IaIvOnly) {
        for (OutcomeType o : kAllOutcomes) sys.columns.push_back({cell, c, o});
      } else {
        for (OutcomeType o : kMonotoneOutcomes) sys.columns.push_back({cell, c, o});
      }
    }
  }
  sys.a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sys.rows.size()),
                                static_cast<Eigen::Index>(sys.columns.size()));
  for (std::size_t j = 0; j < sys.columns.size(); ++j) {
    const FalsifierColumn& col = sys.columns[j];
    for (int z = 0; z < 2; ++z) {
      const int t = treatment_of(col.compliance, z);
      const int y = outcome_of(col.outcome, t);
      sys.a(static_cast<Eigen::Index>(falsifier_row_index(col.cell, z, y, t)), static_cast<Eigen::Index>(j)) = 1.0;
    }
  }
  sys.b_hat = Eigen::VectorXd::Zero(sys.a.rows());
  return sys;
}

FalsifierSystem design_system(std::size_t cells, Restrictions restrictions) {
  std::vector<std::string> labels;
  if (cells == 1) {
    labels.emplace_back("all");
  } else {
    for (std::size_t k = 0; k < cells; ++k) labels.push_back("cell" + std::to_string(k));
  }
  return design_system(labels, restrictions);
}

FalsifierSystem build_system(const ObservedSample& sample, const CellPartition& partition,
                             Restrictions restrictions) {
  FalsifierSystem sys = design_system(partition.labels(), restrictions);
  const std::vector<std::uint32_t> codes = row_codes(sample, partition);
  std::vector<double> counts(sys.rows.size(), 0.0);
  for (std::uint32_t c : codes) counts[c] += 1.0;
  if (!fill_b(counts, sys.b_hat)) throw ValidationError("both instrument arms must be non-empty");
  return sys;
}

FeasibilityResult solve_feasibility(const FalsifierSystem& sys, const SimplexLsOptions& options) {
  const SimplexLsResult r = solve_simplex_least_squares(sys.a, sys.b_hat, options);
  return {r.residual, r.p, r.iterations};
}

double test_statistic(const FalsifierSystem& sys, std::size_t n) {
  return std::sqrt(static_cast<double>(n)) * solve_feasibility(sys).residual;
}

std::size_t default_subsample_size(std::size_t n) {
  auto b = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), 2.0 / 3.0)));
  // Correct for pow rounding around perfect cubes.
  while (b > 1 && static_cast<double>(b - 1) * static_cast<double>(b - 1) * static_cast<double>(b - 1) >=
                      static_cast<double>(n) * static_cast<double>(n))
    --b;
  while (static_cast<double>(b) * static_cast<double>(b) * static_cast<double>(b) <
         static_cast<double>(n) * static_cast<double>(n))
    ++b;
  return b;
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("PERSUASION_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

FalsifierResult subsample_test(const ObservedSample& sample, const CellPartition& partition,
                               Restrictions restrictions, const SubsampleOptions& options) {
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  const std::size_t n = sample.size();
  const std::size_t b = options.b.value_or(default_subsample_size(n));
  if (!(b > 1 && b < n)) throw ValidationError("subsample size b must satisfy 1 < b < n (n = " + std::to_string(n) + ")");
  if (options.m < 1) throw ValidationError("number of subsamples M must be at least 1");

  const FalsifierSystem sys = build_system(sample, partition, restrictions);
  const SimplexLeastSquares solver(sys.a);
  const SimplexLsResult full = solver.solve(sys.b_hat);

  FalsifierResult res;
  res.residual = full.residual;
  res.statistic = std::sqrt(static_cast<double>(n)) * full.residual;
  res.p_star = full.p;
  res.columns = sys.columns;
  res.cell_labels = sys.cell_labels;
  res.b = b;
  res.m = options.m;
  res.seed = options.seed;
  res.alpha = options.alpha;
  res.restrictions = restrictions;
  res.subsample_stats.assign(options.m, 0.0);

  const std::vector<std::uint32_t> codes = row_codes(sample, partition);
  const std::size_t rows = sys.rows.size();
  const unsigned threads =
      static_cast<unsigned>(std::min<std::size_t>(options.threads ? options.threads : default_thread_count(), options.m));

  std::vector<std::exception_ptr> errors(threads);
  auto worker = [&](unsigned tid) {
    try {
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    std::vector<double> counts(rows);
    Eigen::VectorXd bvec(static_cast<Eigen::Index>(rows));
    for (std::size_t m = tid; m < options.m; m += threads) {
      Rng rng(Rng::derive(options.seed, m));
      for (;;) {
        // Partial Fisher-Yates; swaps are undone so perm is the identity again.
        std::fill(counts.begin(), counts.end(), 0.0);
        std::vector<std::pair<std::size_t, std::size_t>> swaps;
        swaps.reserve(b);
        for (std::size_t i = 0; i < b; ++i) {
          const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
          std::swap(perm[i], perm[j]);
          swaps.emplace_back(i, j);
          counts[codes[perm[i]]] += 1.0;
        }
        for (auto it = swaps.rbegin(); it != swaps.rend(); ++it) std::swap(perm[it->first], perm[it->second]);
        if (fill_b(counts, bvec)) break;
      }
      res.subsample_stats[m] = std::sqrt(static_cast<double>(b)) * solver.solve(bvec).residual;
    }
    } catch (...) {
      errors[tid] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (unsigned tid = 1; tid < threads; ++tid) pool.emplace_back(worker, tid);
  worker(0);
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<double> sorted = res.subsample_stats;
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(std::ceil(static_cast<double>(options.m) * (1.0 - options.alpha) - 1e-9));
  res.critical_value = sorted[std::clamp<std::size_t>(rank, 1, options.m) - 1];
  res.rejected = res.statistic > res.critical_value;
  const auto at_least =
      std::count_if(sorted.begin(), sorted.end(), [&](double s) { return s >= res.statistic; });
  res.p_value = static_cast<double>(at_least) / static_cast<double>(options.m);
  return res;
}

}  // namespace persuasion
