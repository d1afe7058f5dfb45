#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "modelkit/config.hpp"
#include "modelkit/report.hpp"

namespace modelkit {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitBreakdown = 3 };

struct RunOptions {
  int threads = 1;
  bool strict = false;  // or-ed with the config's flag
  std::optional<OutputFormat> format;
  std::optional<std::string> out_dir;
};

// Executes every requested suite; records come back in a fixed order
// whatever the thread count.
Report run_checks(const ExperimentConfig& cfg, const RunOptions& opts);

// Samples every z grid for every boundary condition.
Report run_scan(const ExperimentConfig& cfg, const RunOptions& opts);

int exit_code_for(const Report& r, bool strict);

// argv-level entry point used by the executable; messages go to out/err.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace modelkit
