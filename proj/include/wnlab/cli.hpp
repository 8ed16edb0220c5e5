/// @file cli.hpp
/// @brief Command-line front end. Exit codes: 0 all verdicts pass, 2 some
/// verdict fails, 1 error (bad arguments, malformed config, I/O).
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wnlab::cli {

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitFail = 2;

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace wnlab::cli
