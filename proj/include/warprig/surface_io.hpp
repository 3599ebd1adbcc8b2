#pragma once

// Surface snapshots and CSV exports.
//
// Snapshot JSON shape:
//   {"grid": {"dims": [..], "scheme": "spectral"|"central"},
//    "periods": [..], "rho": [..], "metadata": {string: string}}

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "warprig/hypersurface.hpp"
#include "warprig/minimize_stability.hpp"

namespace warprig {

std::string surface_snapshot_json(const GraphSurface& surface, const std::map<std::string, std::string>& metadata = {});
/// Throws std::invalid_argument on malformed input.
GraphSurface surface_from_snapshot_json(const std::string& text);

/// One row per node: coordinates, rho, area element, W, H, |A|^2, u, u_nu, w_nu, H~.
void write_geometry_csv(std::ostream& os, const SurfaceGeometry& geometry, const GraphSurface& surface);
void write_trace_csv(std::ostream& os, const std::vector<SolveTraceEntry>& trace);

/// Shortest-form decimal that reads back to the same double ("%.17g" style, fixed locale).
std::string format_number(double v);

}  // namespace warprig
