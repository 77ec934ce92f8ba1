#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tubekit::cli {

enum ExitCode : int { ok = 0, usage_error = 1, data_error = 2, acceptance_failure = 3 };

/// Run the tubekit command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tubekit::cli
