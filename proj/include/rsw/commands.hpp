#ifndef RSW_COMMANDS_HPP
#define RSW_COMMANDS_HPP

// The experiment commands behind the command-line tool. Each returns its
// report and output tables in memory; writing them out is the caller's job.

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "rsw/config.hpp"

namespace rsw {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitVerdict = 4;

inline constexpr const char* kSchemaVersion = "1";

struct CommandOptions {
  unsigned workers = 1;
};

struct OutputFile {
  std::string name;
  std::string content;
};

struct CommandResult {
  nlohmann::json report;
  std::vector<OutputFile> files;  // CSV tables and auxiliary JSON, in a fixed order
  std::string table;              // the main CSV table, for --format csv
  int exit_code = kExitOk;
};

const std::vector<std::string>& command_names();

CommandResult cmd_analyze(const RunConfig& cfg, const CommandOptions& opt);
CommandResult cmd_simulate(const RunConfig& cfg, const CommandOptions& opt);
CommandResult cmd_contract(const RunConfig& cfg, const CommandOptions& opt);
CommandResult cmd_wasserstein(const RunConfig& cfg, const CommandOptions& opt);
CommandResult cmd_expfun(const RunConfig& cfg, const CommandOptions& opt);
CommandResult cmd_invariant(const RunConfig& cfg, const CommandOptions& opt);
CommandResult cmd_check_example1(const RunConfig& cfg, const CommandOptions& opt);

/// Dispatches by name and converts library errors into an error report and exit code.
CommandResult run_command(const std::string& name, const RunConfig& cfg, const CommandOptions& opt);

/// Exit code for an error escaping a command.
int exit_code_for(const Error& e);

/// Report for an error raised before or during a command.
nlohmann::json error_report(const std::string& command, const Error& e);

}  // namespace rsw

#endif  // RSW_COMMANDS_HPP
