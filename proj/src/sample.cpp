#include "persuasion/sample.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "persuasion/error.hpp"

namespace persuasion {
namespace {

std::string row_label(std::size_t row) { return "row " + std::to_string(row); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_long(std::string_view s, long& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty() && std::isfinite(out);
}

void append_double(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

ObservedSample ObservedSample::from_rows(const std::vector<ObservedRow>& rows,
                                         std::vector<std::string> covariate_names) {
  if (rows.empty()) throw ValidationError("sample is empty");
  {
    std::set<std::string> seen;
    for (const auto& name : covariate_names)
      if (!seen.insert(name).second) throw ValidationError("duplicate covariate name: " + name);
  }
  ObservedSample s;
  const std::size_t k = covariate_names.size();
  s.names_ = std::move(covariate_names);
  s.y_.reserve(rows.size());
  s.t_.reserve(rows.size());
  s.z_.reserve(rows.size());
  s.x_.reserve(rows.size() * k);
  std::set<long> levels;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.y != 0 && r.y != 1) throw ValidationError(row_label(i + 1) + ", column y: value must be 0 or 1");
    if (r.t != 0 && r.t != 1) throw ValidationError(row_label(i + 1) + ", column t: value must be 0 or 1");
    if (r.x.size() != k)
      throw ValidationError(row_label(i + 1) + ": expected " + std::to_string(k) + " covariates, got " +
                            std::to_string(r.x.size()));
    for (std::size_t j = 0; j < k; ++j)
      if (!std::isfinite(r.x[j]))
        throw ValidationError(row_label(i + 1) + ", column " + s.names_[j] + ": non-finite covariate");
    s.y_.push_back(r.y);
    s.t_.push_back(r.t);
    s.z_.push_back(r.z);
    s.x_.insert(s.x_.end(), r.x.begin(), r.x.end());
    levels.insert(r.z);
  }
  s.levels_.assign(levels.begin(), levels.end());
  return s;
}

std::size_t ObservedSample::covariate_index(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ValidationError("unknown covariate: " + name);
  return static_cast<std::size_t>(it - names_.begin());
}

bool ObservedSample::has_level(long z) const {
  return std::binary_search(levels_.begin(), levels_.end(), z);
}

std::size_t ObservedSample::count_level(long z) const {
  return static_cast<std::size_t>(std::count(z_.begin(), z_.end(), z));
}

ObservedRow ObservedSample::materialize(std::size_t i) const {
  const Row r = row(i);
  return ObservedRow{r.y, r.t, r.z, std::vector<double>(r.x.begin(), r.x.end())};
}

ObservedSample ObservedSample::subset(std::span<const std::size_t> indices) const {
  if (indices.empty()) throw ValidationError("subset is empty");
  ObservedSample s;
  s.names_ = names_;
  const std::size_t k = names_.size();
  s.y_.reserve(indices.size());
  s.t_.reserve(indices.size());
  s.z_.reserve(indices.size());
  s.x_.reserve(indices.size() * k);
  std::set<long> levels;
  for (std::size_t i : indices) {
    s.y_.push_back(y_[i]);
    s.t_.push_back(t_[i]);
    s.z_.push_back(z_[i]);
    s.x_.insert(s.x_.end(), x_.begin() + static_cast<std::ptrdiff_t>(i * k),
                x_.begin() + static_cast<std::ptrdiff_t>((i + 1) * k));
    levels.insert(z_[i]);
  }
  s.levels_.assign(levels.begin(), levels.end());
  return s;
}

ObservedSample parse_csv(std::string_view text, const CsvSchema& schema) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto nl = text.find('\n', start);
      const auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
      if (!trim(line).empty()) lines.push_back(line);
      if (nl == std::string_view::npos) break;
      start = nl + 1;
    }
  }
  if (lines.empty()) throw ValidationError("CSV input is empty");
  // Strip a UTF-8 byte-order mark.
  if (lines.front().substr(0, 3) == "\xEF\xBB\xBF") lines.front().remove_prefix(3);

  const auto header = split_fields(lines.front());
  auto column_of = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ValidationError("missing column: " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t cy = column_of(schema.y);
  const std::size_t ct = column_of(schema.t);
  const std::size_t cz = column_of(schema.z);

  std::vector<std::string> names;
  std::vector<std::size_t> cx;
  if (schema.covariates) {
    for (const auto& name : *schema.covariates) {
      names.push_back(name);
      cx.push_back(column_of(name));
    }
  } else {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == cy || c == ct || c == cz) continue;
      names.emplace_back(header[c]);
      cx.push_back(c);
    }
  }
  if (lines.size() < 2) throw ValidationError("CSV input has a header but no data rows");

  std::vector<ObservedRow> rows;
  rows.reserve(lines.size() - 1);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t row_no = li;
    const auto fields = split_fields(lines[li]);
    if (fields.size() != header.size())
      throw ValidationError(row_label(row_no) + ": expected " + std::to_string(header.size()) +
                            " fields, got " + std::to_string(fields.size()));
    auto field = [&](std::size_t c, const std::string& name) {
      if (fields[c].empty()) throw ValidationError(row_label(row_no) + ", column " + name + ": missing value");
      return fields[c];
    };
    ObservedRow r;
    long v = 0;
    if (!parse_long(field(cy, schema.y), v) || (v != 0 && v != 1))
      throw ValidationError(row_label(row_no) + ", column " + schema.y + ": value must be 0 or 1");
    r.y = static_cast<int>(v);
    if (!parse_long(field(ct, schema.t), v) || (v != 0 && v != 1))
      throw ValidationError(row_label(row_no) + ", column " + schema.t + ": value must be 0 or 1");
    r.t = static_cast<int>(v);
    if (!parse_long(field(cz, schema.z), r.z))
      throw ValidationError(row_label(row_no) + ", column " + schema.z + ": instrument must be an integer");
    r.x.resize(cx.size());
    for (std::size_t j = 0; j < cx.size(); ++j)
      if (!parse_double(field(cx[j], names[j]), r.x[j]))
        throw ValidationError(row_label(row_no) + ", column " + names[j] + ": non-numeric covariate");
    rows.push_back(std::move(r));
  }
  return ObservedSample::from_rows(rows, std::move(names));
}

ObservedSample load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema);
}

std::string format_csv(const ObservedSample& sample) {
  std::string out = "y,t,z";
  for (const auto& name : sample.covariate_names()) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const Row r = sample.row(i);
    out += static_cast<char>('0' + r.y);
    out += ',';
    out += static_cast<char>('0' + r.t);
    out += ',';
    out += std::to_string(r.z);
    for (double v : r.x) {
      out += ',';
      append_double(out, v);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const ObservedSample& sample, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << format_csv(sample);
}

ObservedSample restrict_pair(const ObservedSample& sample, long z_lo, long z_hi,
                             std::vector<std::string>* warnings) {
  if (z_lo == z_hi) throw ValidationError("instrument pair levels must differ");
  for (long level : {z_lo, z_hi})
    if (!sample.has_level(level))
      throw ValidationError("instrument level " + std::to_string(level) + " is absent from the sample");

  double take_up[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const Row r = sample.row(i);
    if (r.z != z_lo && r.z != z_hi) continue;
    const int arm = r.z == z_hi ? 1 : 0;
    take_up[arm] += r.t;
    ++count[arm];
    keep.push_back(i);
  }
  long zero_level = z_lo;
  long one_level = z_hi;
  if (take_up[1] / static_cast<double>(count[1]) < take_up[0] / static_cast<double>(count[0])) {
    std::swap(zero_level, one_level);
    if (warnings)
      warnings->push_back("instrument pair (" + std::to_string(z_lo) + ", " + std::to_string(z_hi) +
                          ") has a negative first stage; recoding " + std::to_string(z_lo) + " as 1");
  }

  std::vector<ObservedRow> rows;
  rows.reserve(keep.size());
  for (std::size_t i : keep) {
    ObservedRow r = sample.materialize(i);
    r.z = r.z == one_level ? 1 : 0;
    rows.push_back(std::move(r));
  }
  return ObservedSample::from_rows(rows, sample.covariate_names());
}

std::optional<std::size_t> CellPartition::Axis::locate(double v) const {
  if (bins.empty()) {
    const auto it = std::lower_bound(levels.begin(), levels.end(), v);
    if (it == levels.end() || *it != v) return std::nullopt;
    return static_cast<std::size_t>(it - levels.begin());
  }
  for (std::size_t b = 0; b < bins.size(); ++b)
    if (v >= bins[b].lo && v < bins[b].hi) return b;
  return std::nullopt;
}

std::optional<std::size_t> CellPartition::cell_of(std::span<const double> x) const {
  std::size_t cell = 0;
  for (const auto& axis : axes_) {
    if (axis.column >= x.size()) return std::nullopt;
    const auto pos = axis.locate(x[axis.column]);
    if (!pos) return std::nullopt;
    cell = cell * axis.extent() + *pos;
  }
  return cell;
}

std::vector<std::size_t> CellPartition::assign(const ObservedSample& sample) const {
  std::vector<std::size_t> out(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto cell = cell_of(sample.row(i).x);
    if (!cell) throw ValidationError(row_label(i + 1) + ": covariates fall outside every cell");
    out[i] = *cell;
  }
  return out;
}

std::vector<std::size_t> CellPartition::counts(const ObservedSample& sample) const {
  std::vector<std::size_t> out(cell_count_, 0);
  for (std::size_t c : assign(sample)) ++out[c];
  return out;
}

CellPartition partition_cells(const ObservedSample& sample, const BinningSpec& spec) {
  CellPartition p;
  if (spec.covariates.empty()) return p;

  std::vector<std::vector<std::string>> axis_labels;
  for (const auto& cb : spec.covariates) {
    CellPartition::Axis axis;
    axis.column = sample.covariate_index(cb.covariate);
    std::vector<std::string> names;
    auto fmt = [](double v) {
      char buf[64];
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      return std::string(buf, ptr);
    };
    if (cb.bins.empty()) {
      std::set<double> levels;
      for (std::size_t i = 0; i < sample.size(); ++i) levels.insert(sample.row(i).x[axis.column]);
      if (levels.size() > spec.max_levels)
        throw ValidationError("covariate " + cb.covariate + " has " + std::to_string(levels.size()) +
                              " distinct values; supply explicit bins");
      axis.levels.assign(levels.begin(), levels.end());
      for (double v : axis.levels) names.push_back(cb.covariate + "=" + fmt(v));
    } else {
      axis.bins = cb.bins;
      std::sort(axis.bins.begin(), axis.bins.end(), [](const Bin& a, const Bin& b) { return a.lo < b.lo; });
      for (std::size_t b = 0; b < axis.bins.size(); ++b) {
        if (!(axis.bins[b].lo < axis.bins[b].hi))
          throw ValidationError("bin for " + cb.covariate + " has lo >= hi");
        if (b > 0 && axis.bins[b].lo < axis.bins[b - 1].hi)
          throw ValidationError("bins for " + cb.covariate + " overlap");
        names.push_back(cb.covariate + " in [" + fmt(axis.bins[b].lo) + ", " + fmt(axis.bins[b].hi) + ")");
      }
      for (std::size_t i = 0; i < sample.size(); ++i)
        if (!axis.locate(sample.row(i).x[axis.column]))
          throw ValidationError("bins for " + cb.covariate + " do not cover " + row_label(i + 1));
    }
    p.cell_count_ *= axis.extent();
    p.axes_.push_back(std::move(axis));
    axis_labels.push_back(std::move(names));
  }

  p.labels_.assign(p.cell_count_, "");
  for (std::size_t cell = 0; cell < p.cell_count_; ++cell) {
    std::size_t rest = cell;
    std::vector<std::string> parts(p.axes_.size());
    for (std::size_t a = p.axes_.size(); a-- > 0;) {
      const std::size_t ext = p.axes_[a].extent();
      parts[a] = axis_labels[a][rest % ext];
      rest /= ext;
    }
    std::string label;
    for (std::size_t a = 0; a < parts.size(); ++a) label += (a ? "," : "") + parts[a];
    p.labels_[cell] = std::move(label);
  }
  return p;
}

}  // namespace persuasion
