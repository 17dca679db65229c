#ifndef LIESTAB_PIPELINE_HPP
#define LIESTAB_PIPELINE_HPP

#include <liestab/config.hpp>

#include <string>
#include <utility>
#include <vector>

namespace liestab {

/// Outcome of one command: the structured report, CSV side files as
/// (name, content) pairs, and the process exit code.
/// Exit codes: 0 success, 2 config error, 3 decomposition or integration
/// error, 4 insufficient entropy growth data.
struct CommandResult {
  int exit_code = 0;
  Json report;
  std::vector<std::pair<std::string, std::string>> files;
};

CommandResult cmd_decompose(const RunConfig& cfg);
CommandResult cmd_simulate(const RunConfig& cfg);
CommandResult cmd_entropy(const RunConfig& cfg);
CommandResult cmd_certify(const RunConfig& cfg);

/// Dispatches a verb, writes report.json and side files into cfg.outputs.
int run_command(const std::string& verb, const RunConfig& cfg);

} // namespace liestab

#endif
