#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace persuasion::cli {

/// Runs the `persuade` command line. Results go to --output or `out`; errors are
/// written to `err` as {"error": {"kind", "message"}}. Returns 0, 1 (invalid
/// input) or 2 (numerical failure).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace persuasion::cli
