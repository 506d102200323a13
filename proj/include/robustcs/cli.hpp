#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "robustcs/bench.hpp"

namespace robustcs {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitUsage = 2,
    kExitFileNotFound = 3,
    kExitMalformed = 4,
    kExitUnknownPreset = 5,
    kExitDimensionMismatch = 6,
    kExitInvalidValue = 7,
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownPresetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reads an experiment file of `key = value` lines. Top-level keys set the
/// ExperimentConfig fields (preset, name, n, p, k, amplitude, trials, seed,
/// methods, fixed_matrix, tolerance, max_iterations, max_halvings, threads);
/// each `[grid]` section adds family x dof x snr points. `#` starts a comment.
/// A `preset` key seeds every field from that preset before the others apply.
ExperimentConfig parse_experiment_config(std::istream& in, const std::string& source = "<config>");

/// Entry point of the `robustcs` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace robustcs
