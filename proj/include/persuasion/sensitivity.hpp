#pragma once

#include <string>
#include <vector>

#include "persuasion/estimands.hpp"

namespace persuasion {

/// Complier joint distribution under a postulated demobilised share delta.
struct SensitivityPoint {
  double delta = 0.0;
  double p11 = 0.0;
  double p00 = 0.0;
  double p01 = 0.0;
  /// Some component lies outside [0, 1]; values are not clipped.
  bool out_of_range = false;
};

/// Complier marginals the curve is computed from.
struct SensitivityMarginals {
  double p_y0_1 = 0.0;  // P[Y(0)=1 | C]
  double p_y1_1 = 0.0;  // P[Y(1)=1 | C]

  static SensitivityMarginals from(const MarginalPO& m) { return {m.p_y0[1], m.p_y1[1]}; }
};

/// Largest admissible delta: min(P[Y(0)=1 | C], P[Y(1)=0 | C]).
double max_admissible_delta(const SensitivityMarginals& m);
/// `count` evenly spaced deltas from 0 to the largest admissible value.
std::vector<double> default_delta_grid(const SensitivityMarginals& m, std::size_t count = 6);

/// p11 = P[Y(0)=1|C] - d, p00 = P[Y(1)=0|C] - d, p01 = 1 - p11 - p00 - d.
/// Throws ValidationError when a delta is outside the admissible interval.
std::vector<SensitivityPoint> sensitivity_curve(const SensitivityMarginals& m, const std::vector<double>& deltas);
std::vector<SensitivityPoint> sensitivity_curve(const MarginalPO& m, const std::vector<double>& deltas);

/// Wide table: one line per quantity (delta, p11, p00, p01, out_of_range), one column per delta.
std::string format_sensitivity_csv(const std::vector<SensitivityPoint>& curve);

}  // namespace persuasion
