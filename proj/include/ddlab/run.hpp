#pragma once
// Mode orchestration: executes a validated RunConfig, writes the result files
// and a manifest describing inputs, outputs and versions.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ddlab/config.hpp"

namespace ddlab {

/// 0 success, 1 a check failed, 2 runtime abort or invalid configuration.
enum class ExitStatus : int { ok = 0, check_failed = 1, aborted = 2 };

struct RunContext {
  std::filesystem::path out_dir = "out";
  std::string config_text;  ///< hashed into the manifest
  std::optional<std::size_t> workers;  ///< overrides the config value
};

struct RunOutcome {
  ExitStatus status = ExitStatus::ok;
  std::string message;                     ///< one-line summary or diagnostic
  std::vector<std::string> outputs;        ///< file names written under out_dir
};

/// Results are computed first; files are written afterwards in a fixed order,
/// so the same config yields byte-identical files. timing.txt is the only
/// output that varies between runs and is left out of the manifest.
RunOutcome run(RunConfig config, const RunContext& ctx);

}  // namespace ddlab
