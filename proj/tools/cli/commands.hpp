// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace cophase::cli {

/// Subcommand names in display order.
const std::vector<std::string>& command_names();

/// Runs one subcommand. CSV goes to output.path (or `out` when unset),
/// summaries and failing trials go to `err`. Returns the exit code; throws
/// UsageError for missing keys and ConfigError for bad values.
int run_command(const std::string& name, const RunConfig& config, std::ostream& out, std::ostream& err);

/// run.threads, else COPHASE_THREADS, else 1.
unsigned resolve_threads(const RunConfig& config);

}  // namespace cophase::cli
