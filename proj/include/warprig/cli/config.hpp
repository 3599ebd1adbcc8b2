#pragma once

// Experiment configuration: a JSON document with a strict schema.
//
// {
//   "task": "verify" | "curvature" | "minimize" | "spectrum" | "foliate" | "rigidity",
//   "ambient": {"n": 3, "gamma": 2.0,
//               "warp": {"mean": 2.0, "cos": [1.0], "sin": []},
//               "fiber": {"periods": [6.283185307179586, ...], "scalar_curvature": 0.0}},
//   "weight": {"kind": "canonical" | "unit" | "profile" | "canonical_times",
//              "profile": {"mean": 1.0, "cos": [...], "sin": [...]}},
//   "grid": {"resolution": [64, 64], "scheme": "spectral" | "central"},
//   "params": { task specific },
//   "tolerances": { check name: value }
// }

#include <json.hpp>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "warprig/foliation.hpp"

namespace warprig::cli {

/// Validation failure; the message names the offending field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// rho(x) = height + sum amplitude * cos(2 pi k.x / L + phase)
struct WaveTerm {
  double amplitude = 0.0;
  std::vector<int> wavenumbers;
  double phase = 0.0;
};

struct SurfaceInit {
  double height = 0.0;
  std::vector<WaveTerm> terms;

  GraphSurface build(const PeriodicGrid& grid) const;
};

struct VerifyParams {
  int samples = 256;
  std::vector<int> dimensions{3, 4, 5, 6, 7};
};

struct CurvatureParams {
  int samples = 16;
  double step = 1e-3;
};

struct MinimizeParams {
  SurfaceInit initial;
  SolveOptions solve;
  std::optional<double> expected_energy;
  bool expect_slice = false;
  SpectralKind kind = SpectralKind::ricci;
};

struct SpectrumParams {
  std::string op = "stability";  ///< stability | conformal_fiber | conformal_surface
  int k = 3;
  SurfaceInit surface;
  bool minimize_first = false;
  SolveOptions solve;
  std::vector<double> expected;
  std::vector<double> expected_tolerance;  ///< per eigenvalue; empty uses the "eigenvalue" tolerance
};

struct FoliateParams {
  double epsilon = 0.3;
  int steps = 13;
  SolveOptions solve;
  bool expect_constant_energy = false;
  bool linearization = false;
};

struct RigidityParams {
  SurfaceInit surface;
  bool minimize_first = true;
  SolveOptions solve;
  SpectralKind kind = SpectralKind::ricci;
};

using TaskParams =
    std::variant<VerifyParams, CurvatureParams, MinimizeParams, SpectrumParams, FoliateParams, RigidityParams>;

struct ExperimentConfig {
  std::string task;
  WarpedMetricSpec spec;
  std::string weight_kind = "canonical";
  std::optional<WarpProfile> weight_profile;
  std::vector<int> resolution;
  DifferenceScheme scheme = DifferenceScheme::spectral;
  TaskParams params;
  std::map<std::string, double> tolerances;  ///< defaults merged with overrides
  std::string canonical;                     ///< canonical JSON text of the input (hash source)

  RadialWeight weight() const;
  PeriodicGrid grid() const;
  double tolerance(const std::string& check) const;
};

/// Task names accepted on the command line and in "task".
const std::vector<std::string>& task_names();

/// Parses and fully validates. `task_override` (from the CLI verb) must agree
/// with "task" when both are present.
ExperimentConfig parse_config(const std::string& text, const std::string& task_override = "");

/// Hex SHA-256 of the canonical config text.
std::string config_hash(const ExperimentConfig& config);

}  // namespace warprig::cli
