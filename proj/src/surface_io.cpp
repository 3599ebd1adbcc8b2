#include "warprig/surface_io.hpp"

#include <charconv>
#include <cmath>
#include <json.hpp>

namespace warprig {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string surface_snapshot_json(const GraphSurface& surface, const std::map<std::string, std::string>& metadata) {
  nlohmann::json j;
  j["grid"] = {{"dims", surface.grid.dims()},
               {"scheme", surface.grid.scheme() == DifferenceScheme::spectral ? "spectral" : "central"}};
  j["periods"] = surface.grid.periods();
  j["rho"] = surface.rho;
  j["metadata"] = metadata;
  return j.dump(2);
}

GraphSurface surface_from_snapshot_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    for (const auto& [key, _] : j.items())
      if (key != "grid" && key != "periods" && key != "rho" && key != "metadata")
        throw std::invalid_argument("surface snapshot: unknown key '" + key + "'");
    const auto dims = j.at("grid").at("dims").get<std::vector<int>>();
    const std::string scheme = j.at("grid").value("scheme", "spectral");
    if (scheme != "spectral" && scheme != "central")
      throw std::invalid_argument("surface snapshot: unknown scheme '" + scheme + "'");
    PeriodicGrid grid(dims, j.at("periods").get<std::vector<double>>(),
                      scheme == "spectral" ? DifferenceScheme::spectral : DifferenceScheme::central);
    GraphSurface s{grid, j.at("rho").get<std::vector<double>>()};
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("surface snapshot: ") + e.what());
  }
}

void write_geometry_csv(std::ostream& os, const SurfaceGeometry& geometry, const GraphSurface& surface) {
  const PeriodicGrid& grid = geometry.grid;
  for (int a = 0; a < grid.dim(); ++a) os << "x" << a + 1 << ',';
  os << "rho,area_element,normal_factor,mean_curvature,second_form_sq,u,u_nu,w_nu,htilde\n";
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const NodeGeometry& nd = geometry.nodes[p];
    for (int a = 0; a < grid.dim(); ++a) os << format_number(grid.coordinate(p, a)) << ',';
    os << format_number(surface.rho[p]) << ',' << format_number(nd.area_element) << ','
       << format_number(nd.normal_factor) << ',' << format_number(nd.mean_curvature) << ','
       << format_number(nd.second_form_sq) << ',' << format_number(nd.weight.value) << ','
       << format_number(nd.u_nu) << ',' << format_number(nd.w_nu) << ',' << format_number(nd.htilde) << '\n';
  }
}

void write_trace_csv(std::ostream& os, const std::vector<SolveTraceEntry>& trace) {
  os << "iteration,energy,residual\n";
  for (const auto& e : trace)
    os << e.iteration << ',' << format_number(e.energy) << ',' << format_number(e.residual) << '\n';
}

}  // namespace warprig
