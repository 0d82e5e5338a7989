#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tvf::app {

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Returns the process exit code: 0 on success, 1 on error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tvf::app
