#pragma once

// Command-line front end, exposed as a library call so tests can drive the
// full interface in-process. args are argv[1..] (no program name).
// Exit codes: 0 success, 1 runtime failure, 2 invalid usage or validation.

#include <string>
#include <vector>

namespace pathwise {

int run_cli(const std::vector<std::string>& args);

}  // namespace pathwise
