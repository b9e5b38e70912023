#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rct::cli {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed; // overrides the config seed when set
    std::string out_dir = ".";
};

/// Runs one subcommand against a loaded config. Exit codes: 0 success,
/// 1 usage or config errors, 2 violated contraction premise, 3 numeric
/// failure or non-convergence.
int run_command(const std::string& command, const Options& opts, std::ostream& out,
                std::ostream& err);

/// argv-style entry point (program name excluded).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace rct::cli
