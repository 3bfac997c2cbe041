#pragma once

#include <string>
#include <vector>

namespace mlab::cli {

// Parsed command line. Empty strings and -1 mean "use the config value".
struct Args {
  std::string command;
  std::string config_path;
  std::string out_dir = "out";
  std::string seed;        // decimal; overrides the config seed when set
  int samples = -1;        // overrides n_samples when >= 0
  std::string strategies;  // "all" or a comma-separated subset
  std::string as_of;       // YYYY-MM; restricts month-driven commands
  std::string universe;    // alternative universe file
};

const std::vector<std::string>& command_names();

// Runs one pipeline stage end to end and writes its manifest. Returns the
// process exit code: 0 on success, 1 when per-item errors were recorded,
// 2 on usage problems.
int run_command(const Args& args);

}  // namespace mlab::cli
