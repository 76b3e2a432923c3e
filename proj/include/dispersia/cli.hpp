#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dispersia {

enum ExitCode : int {
  exit_ok = 0,
  exit_config = 1,
  exit_certification = 2,
  exit_not_passive = 3,
  exit_unsupported = 4,
  exit_inconclusive = 5,
};

/// Command-line front end: `analyze`, `simulate`, `spectrum`, `fit`.
/// `args` excludes the program name. Results go to `--out` or `out`,
/// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dispersia
