#pragma once

#include <array>
#include <string>

namespace persuasion {

/// Treatment response (T(0), T(1)).
enum class Compliance { NeverTaker, Complier, AlwaysTaker, Defier };

/// Outcome response (Y(0), Y(1)).
enum class OutcomeType { Never, Mobilised, Demobilised, Always };

inline constexpr std::array<Compliance, 3> kMonotoneCompliance{Compliance::NeverTaker, Compliance::Complier,
                                                               Compliance::AlwaysTaker};
inline constexpr std::array<OutcomeType, 3> kMonotoneOutcomes{OutcomeType::Never, OutcomeType::Mobilised,
                                                              OutcomeType::Always};
inline constexpr std::array<OutcomeType, 4> kAllOutcomes{OutcomeType::Never, OutcomeType::Mobilised,
                                                         OutcomeType::Demobilised, OutcomeType::Always};

/// T(z) for a compliance type.
constexpr int treatment_of(Compliance c, int z) {
  switch (c) {
    case Compliance::NeverTaker: return 0;
    case Compliance::Complier: return z;
    case Compliance::AlwaysTaker: return 1;
    case Compliance::Defier: return 1 - z;
  }
  return 0;
}

/// Y(t) for an outcome type.
constexpr int outcome_of(OutcomeType o, int t) {
  switch (o) {
    case OutcomeType::Never: return 0;
    case OutcomeType::Mobilised: return t;
    case OutcomeType::Demobilised: return 1 - t;
    case OutcomeType::Always: return 1;
  }
  return 0;
}

/// "NT", "C", "AT", "DF".
std::string to_string(Compliance c);
/// "00", "01", "10", "11" as Y(0)Y(1).
std::string to_string(OutcomeType o);
/// Inverses; throw ValidationError on unknown codes.
Compliance parse_compliance(const std::string& s);
OutcomeType parse_outcome_type(const std::string& s);

}  // namespace persuasion
