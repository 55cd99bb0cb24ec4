#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sfh {

/// Command-line entry point:
///   points spiral|random, quadrature check|solve, fit, eval,
///   experiment degree|sigma|machines.
/// Returns the process exit code. Failures print one line
///   error <category>: <message>
/// to `err` and return nonzero.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sfh
