#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mflab::cli {

/// Runs one subcommand. `args` excludes the program name. Returns the
/// process exit code: 0 success, 2 validation error, 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mflab::cli
