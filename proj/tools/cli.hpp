#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace spit::cli {

/// Exit codes by error class.
enum ExitCode : int {
    ok = 0,
    failure = 1,
    usage = 2,
    config_error = 3,
    io_error = 4,
    invalid_input = 5,
    numeric_error = 6,
    check_failed = 7,
};

/// Parses and runs one command (args excludes the program name).
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace spit::cli
