#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace routing {

/// Runs the routeplan command line. `args` holds argv[0..argc); output goes
/// to `out`, diagnostics to `err`. Returns the process exit code:
///   0  success
///   1  a verification violation or a profitable-defection witness was found
///   2  malformed config, bad usage, or an engine error
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace routing
