#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace persuasion {

/// One observation (Y, T, Z, X) as supplied by the user.
struct ObservedRow {
  int y = 0;
  int t = 0;
  long z = 0;
  std::vector<double> x;
};

/// Read-only view of a stored row.
struct Row {
  int y;
  int t;
  long z;
  std::span<const double> x;
};

/// Validated, immutable experiment data. Covariates are stored row-major.
class ObservedSample {
 public:
  /// Validates every row; throws ValidationError naming the offending row (1-based).
  static ObservedSample from_rows(const std::vector<ObservedRow>& rows,
                                  std::vector<std::string> covariate_names = {});

  std::size_t size() const { return y_.size(); }
  std::size_t covariate_count() const { return names_.size(); }
  const std::vector<std::string>& covariate_names() const { return names_; }
  /// Index of a named covariate; throws ValidationError if absent.
  std::size_t covariate_index(const std::string& name) const;
  /// Sorted distinct instrument values.
  const std::vector<long>& instrument_levels() const { return levels_; }
  bool has_level(long z) const;
  std::size_t count_level(long z) const;

  Row row(std::size_t i) const {
    return Row{y_[i], t_[i], z_[i],
               std::span<const double>(x_.data() + i * names_.size(), names_.size())};
  }
  ObservedRow materialize(std::size_t i) const;

  /// New sample holding the given rows (in the given order).
  ObservedSample subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const ObservedSample&, const ObservedSample&) = default;

 private:
  ObservedSample() = default;

  std::vector<int> y_;
  std::vector<int> t_;
  std::vector<long> z_;
  std::vector<double> x_;
  std::vector<std::string> names_;
  std::vector<long> levels_;
};

/// Column names used when reading a CSV file.
struct CsvSchema {
  std::string y = "y";
  std::string t = "t";
  std::string z = "z";
  /// Covariate columns to keep; all remaining columns when unset.
  std::optional<std::vector<std::string>> covariates;
};

ObservedSample load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
ObservedSample parse_csv(std::string_view text, const CsvSchema& schema = {});
/// Writes y,t,z then covariates; reals use the shortest round-trip representation.
void write_csv(const ObservedSample& sample, const std::filesystem::path& path);
std::string format_csv(const ObservedSample& sample);

/// Keeps rows with z in {z_lo, z_hi} and recodes them to 0/1 so the result is
/// binary-instrument data. The arm with the larger take-up rate becomes 1; when
/// that reverses the requested order a note is appended to `warnings`.
ObservedSample restrict_pair(const ObservedSample& sample, long z_lo, long z_hi,
                             std::vector<std::string>* warnings = nullptr);

/// Half-open interval [lo, hi) used for explicit covariate bins.
struct Bin {
  double lo;
  double hi;
};

struct CovariateBinning {
  std::string covariate;
  /// Empty: one cell per observed level. Otherwise explicit bins.
  std::vector<Bin> bins;
};

struct BinningSpec {
  std::vector<CovariateBinning> covariates;
  /// Level-based binning refuses covariates with more distinct values than this.
  std::size_t max_levels = 64;
};

/// Exclusive, exhaustive partition of covariate space into K cells (the full
/// interaction of the per-covariate bins, in lexicographic order).
class CellPartition {
 public:
  /// The trivial partition (K = 1).
  CellPartition() = default;

  std::size_t size() const { return cell_count_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<std::size_t> cell_of(std::span<const double> x) const;
  bool contains(std::size_t cell, std::span<const double> x) const { return cell_of(x) == cell; }
  /// Cell index per row; throws ValidationError if a row falls outside every cell.
  std::vector<std::size_t> assign(const ObservedSample& sample) const;
  /// Row counts per cell.
  std::vector<std::size_t> counts(const ObservedSample& sample) const;

 private:
  friend CellPartition partition_cells(const ObservedSample&, const BinningSpec&);

  struct Axis {
    std::size_t column;
    std::vector<double> levels;  // used when bins is empty
    std::vector<Bin> bins;
    std::size_t extent() const { return bins.empty() ? levels.size() : bins.size(); }
    std::optional<std::size_t> locate(double v) const;
  };

  std::vector<Axis> axes_;
  std::size_t cell_count_ = 1;
  std::vector<std::string> labels_{"all"};
};

CellPartition partition_cells(const ObservedSample& sample, const BinningSpec& spec = {});

}  // namespace persuasion
