#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tailgraph/config.hpp"

namespace tailgraph {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitPrecondition = 3,
  kExitVerification = 4,
};

struct RunOverrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
  std::optional<std::vector<double>> t_levels;
  std::optional<int> workers;
};

void apply_overrides(RunConfig& config, const RunOverrides& overrides);

// JSON documents (pretty-printed, deterministic for a given config and seed).
std::string graph_document(const RunConfig& config);
std::string derive_document(const RunConfig& config);

// Runs the verification studies, writing CSVs under `out`.  Returns true when
// every gated check passes.
bool run_verify(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);

// Loads the config, runs `command` ("graph", "derive" or "verify") and maps
// failures onto the exit-code contract.  Error payloads go to `out` as JSON.
int run_command(const std::string& command, const std::filesystem::path& config_path,
                const RunOverrides& overrides, std::ostream& out, std::ostream& err);

}  // namespace tailgraph
