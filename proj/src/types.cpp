#include "persuasion/types.hpp"

#include "persuasion/error.hpp"

namespace persuasion {

std::string to_string(Compliance c) {
  switch (c) {
    case Compliance::NeverTaker: return "NT";
    case Compliance::Complier: return "C";
    case Compliance::AlwaysTaker: return "AT";
    case Compliance::Defier: return "DF";
  }
  return "?";
}

std::string to_string(OutcomeType o) {
  switch (o) {
    case OutcomeType::Never: return "00";
    case OutcomeType::Mobilised: return "01";
    case OutcomeType::Demobilised: return "10";
    case OutcomeType::Always: return "11";
  }
  return "?";
}

Compliance parse_compliance(const std::string& s) {
  if (s == "NT") return Compliance::NeverTaker;
  if (s == "C") return Compliance::Complier;
  if (s == "AT") return Compliance::AlwaysTaker;
  if (s == "DF") return Compliance::Defier;
  throw ValidationError("unknown compliance type '" + s + "' (expected NT, C, AT or DF)");
}

OutcomeType parse_outcome_type(const std::string& s) {
  if (s == "00") return OutcomeType::Never;
  if (s == "01") return OutcomeType::Mobilised;
  if (s == "10") return OutcomeType::Demobilised;
  if (s == "11") return OutcomeType::Always;
  throw ValidationError("unknown outcome type '" + s + "' (expected 00, 01, 10 or 11)");
}

}  // namespace persuasion
