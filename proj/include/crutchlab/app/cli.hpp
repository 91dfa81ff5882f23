#pragma once

#include <string>
#include <vector>

namespace crutchlab::app {

/// Exit codes: 0 success, 1 usage error, 2 runtime or numerical failure.
/// The log level comes from CRUTCHLAB_LOG (trace, debug, info, warn, error, off).
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace crutchlab::app
