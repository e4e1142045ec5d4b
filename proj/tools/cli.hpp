#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace costcode::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kNumericError = 3;

// args excludes the program name. Errors go to `err` as one JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct CommandEntry {
  const char* operation;    // library entry point
  const char* subcommand;   // e.g. "code build"
};

// Which subcommand exposes each library operation.
const std::vector<CommandEntry>& command_table();

// Every leaf subcommand path the parser knows about.
std::vector<std::string> subcommand_paths();

} // namespace costcode::cli
