#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

#include "dodewalk/config.hpp"

namespace dodewalk {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitStability = 3;
inline constexpr int kExitTolerance = 4;

inline constexpr const char* kToolVersion = "0.1.0";

struct DispatchResult {
    int exit_code = kExitOk;
    std::vector<std::filesystem::path> outputs;
    nlohmann::json report;  // mode-specific summary, also written to disk
};

/// Run the pipeline for `mode` and write its files into `out_dir`, including
/// manifest.json. Module errors propagate as exceptions after any files
/// already written are removed.
DispatchResult dispatch(Mode mode, const RunConfig& config, const std::filesystem::path& out_dir,
                        std::size_t threads = 1);

/// Full command line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dodewalk
