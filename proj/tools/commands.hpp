#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace forcemap::cli {

/// Runs the `forcemap` command line. Errors are reported as a single JSON
/// object on `err`; the return value is the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace forcemap::cli
