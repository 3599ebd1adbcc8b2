#pragma once

#include "warprig/cli/config.hpp"
#include "warprig/cli/report.hpp"

namespace warprig::cli {

/// Runs the configured task. `tolerance_scale` multiplies every tolerance.
/// Solver and geometry errors propagate as exceptions.
RunReport run_config(const ExperimentConfig& config, double tolerance_scale = 1.0);

}  // namespace warprig::cli
