#include "persuasion/sensitivity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "persuasion/error.hpp"

namespace persuasion {
namespace {

std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

double max_admissible_delta(const SensitivityMarginals& m) {
  return std::min(m.p_y0_1, 1.0 - m.p_y1_1);
}

std::vector<double> default_delta_grid(const SensitivityMarginals& m, std::size_t count) {
  const double hi = max_admissible_delta(m);
  if (!(hi >= 0.0)) throw ValidationError("no admissible demobilised share: marginals leave an empty interval");
  if (count < 2) return {0.0};
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i)
    grid[i] = hi * static_cast<double>(i) / static_cast<double>(count - 1);
  grid.back() = hi;
  return grid;
}

std::vector<SensitivityPoint> sensitivity_curve(const SensitivityMarginals& m, const std::vector<double>& deltas) {
  if (!in_unit(m.p_y0_1) || !in_unit(m.p_y1_1))
    throw ValidationError("complier marginals must lie in [0, 1]");
  const double hi = max_admissible_delta(m);
  std::vector<SensitivityPoint> out;
  out.reserve(deltas.size());
  for (double d : deltas) {
    if (!(d >= 0.0 && d <= hi + 1e-12))
      throw ValidationError("delta " + shortest(d) + " outside the admissible interval [0, " + shortest(hi) + "]");
    SensitivityPoint p;
    p.delta = d;
    p.p11 = m.p_y0_1 - d;
    p.p00 = (1.0 - m.p_y1_1) - d;
    p.p01 = 1.0 - p.p11 - p.p00 - d;
    p.out_of_range = !in_unit(p.p11) || !in_unit(p.p00) || !in_unit(p.p01);
    out.push_back(p);
  }
  return out;
}

std::vector<SensitivityPoint> sensitivity_curve(const MarginalPO& m, const std::vector<double>& deltas) {
  return sensitivity_curve(SensitivityMarginals::from(m), deltas);
}

std::string format_sensitivity_csv(const std::vector<SensitivityPoint>& curve) {
  std::string out;
  auto line = [&](const char* name, auto get) {
    out += name;
    for (const auto& p : curve) {
      out += ',';
      out += get(p);
    }
    out += '\n';
  };
  line("delta", [](const SensitivityPoint& p) { return shortest(p.delta); });
  line("p11", [](const SensitivityPoint& p) { return shortest(p.p11); });
  line("p00", [](const SensitivityPoint& p) { return shortest(p.p00); });
  line("p01", [](const SensitivityPoint& p) { return shortest(p.p01); });
  line("out_of_range", [](const SensitivityPoint& p) { return std::string(p.out_of_range ? "1" : "0"); });
  return out;
}

}  // namespace persuasion
