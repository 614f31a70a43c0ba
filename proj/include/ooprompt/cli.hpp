#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ooprompt {

/// Runs one CLI invocation. `args` excludes the program name. Returns the process
/// exit code: 0 success, 1 user error, 2 provider or I/O error.
int cli_dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace ooprompt
