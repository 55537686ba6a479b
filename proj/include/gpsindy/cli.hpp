#ifndef GPSINDY_CLI_HPP
#define GPSINDY_CLI_HPP

#include <string>
#include <vector>

namespace gpsindy {

/// Runs the command-line front end (subcommands: simulate, fit, rollout,
/// benchmark, summarize) and returns the process exit code: 0 success,
/// 2 configuration error, 3 numerical failure, 4 I/O error. args excludes
/// the program name.
int run_cli(const std::vector<std::string>& args);

} // namespace gpsindy

#endif // GPSINDY_CLI_HPP
