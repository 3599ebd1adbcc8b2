// warprig-cli <verb> --config <path> [--out <dir>] [--format json|csv|text] [--tolerance-scale <x>]
//
// Exit codes: 0 every verdict passed, 2 a verdict failed, 1 execution error.

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "warprig/cli/run_config.hpp"

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace warprig::cli;
  CLI::App app{"Warped-product weighted-area verification runs"};
  app.require_subcommand(1);

  std::string config_path, out_dir, format = "json";
  double tolerance_scale = 1.0;
  for (const std::string& verb : task_names()) {
    CLI::App* sub = app.add_subcommand(verb, "run the '" + verb + "' task");
    sub->add_option("--config", config_path, "experiment configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory (default: $WARPRIG_OUTPUT_DIR, else stdout)");
    sub->add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv", "text"}));
    sub->add_option("--tolerance-scale", tolerance_scale, "multiply every tolerance")
        ->check(CLI::PositiveNumber);
  }
  CLI11_PARSE(app, argc, argv);
  const std::string verb = app.get_subcommands().front()->get_name();

  try {
    const ExperimentConfig cfg = parse_config(read_file(config_path), verb);
    const RunReport report = run_config(cfg, tolerance_scale);
    const std::string stamp = utc_now();
    const ReportFormat fmt = parse_format(format);

    if (out_dir.empty())
      if (const char* env = std::getenv("WARPRIG_OUTPUT_DIR"); env && *env) out_dir = env;
    if (out_dir.empty()) {
      switch (fmt) {
        case ReportFormat::json: std::cout << report_json_text(report); break;
        case ReportFormat::csv: std::cout << checks_csv(report); break;
        case ReportFormat::text: std::cout << report_text(report, stamp); break;
      }
    } else {
      for (const auto& path : emit_report(report, fmt, out_dir, stamp)) std::cerr << "wrote " << path.string() << "\n";
      std::cerr << "verdict: " << (report.passed() ? "PASS" : "FAIL") << "\n";
    }
    return report.passed() ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
