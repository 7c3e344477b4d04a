#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dan {

// Exit codes of the command-line tool.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

// Subcommands: synth, train, eval, predict, gradcheck, report. args excludes
// the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace dan
