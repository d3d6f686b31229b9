#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "manifest.hpp"

namespace styleid::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kIo = 3,
  kNumerical = 4,
};

/// Entry point shared by the executable and the tests. `args` excludes
/// the program name. Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Command bodies on fully resolved settings. Each returns the manifest it
// wrote (train/sweep into settings["out"], invert/stylize next to the
// output file).
RunManifest execute_train(const Settings& s, std::ostream& out);
RunManifest execute_sweep(const Settings& s, std::ostream& out);
RunManifest execute_invert(const Settings& s, std::ostream& out);
RunManifest execute_stylize(const Settings& s, std::ostream& out);

/// Re-runs the manifest's command into `out_location` and compares output
/// digests. Returns kOk when every output is byte-identical.
int execute_replay(const std::filesystem::path& manifest_path,
                   const std::filesystem::path& out_location, std::ostream& out, std::ostream& err);

}  // namespace styleid::cli
