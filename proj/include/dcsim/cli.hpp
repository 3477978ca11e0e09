#pragma once

#include <string>
#include <vector>

namespace dcsim {

/// Entry point behind the dcsim binary. `args` excludes the program name.
/// Returns 0 when every requested check passed, 1 when a check failed, 2 on
/// usage or configuration errors. Fully deterministic given the seed; the
/// manifest's wall_time_ms field is the only nondeterministic output.
int run_command(const std::vector<std::string>& args);

}  // namespace dcsim
