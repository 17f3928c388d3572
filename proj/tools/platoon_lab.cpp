// Batch front-end over the C API.
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "platoon_lab.h"

namespace {

constexpr const char* kDefaultOut = "platoon_out";

int report_failure(plab_status status) {
  std::cerr << "platoon_lab: " << plab_status_string(status) << ": " << plab_last_error()
            << '\n';
  return plab_exit_code(status);
}

int run(const std::string& command, const std::string& scenario_path,
        std::optional<std::uint64_t> seed, int jobs, std::string out_dir) {
  if (out_dir.empty()) {
    const char* env = std::getenv("PLATOON_LAB_OUT");
    out_dir = env && *env ? env : kDefaultOut;
  }
  plab_scenario* scenario = nullptr;
  plab_status status = plab_scenario_load(scenario_path.c_str(), &scenario);
  if (status != PLAB_OK) return report_failure(status);

  plab_run_options options{seed.has_value() ? 1 : 0, seed.value_or(0), jobs, out_dir.c_str()};
  plab_report* report = nullptr;
  status = plab_run(scenario, command.c_str(), &options, &report);
  plab_scenario_free(scenario);
  if (status != PLAB_OK) return report_failure(status);

  std::cout << plab_report_json(report) << '\n';
  for (std::size_t i = 0; i < plab_report_warning_count(report); ++i) {
    std::cerr << "warning: " << plab_report_warning(report, i) << '\n';
  }
  plab_report_free(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Platoon string-stability lab"};
  app.require_subcommand(1);

  std::string command, scenario, out_dir;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  auto* run_cmd = app.add_subcommand("run", "Run one command on a scenario");
  run_cmd->add_option("command", command, "headway | simulate | montecarlo | stability | oracle")
      ->required()
      ->check(CLI::IsMember({"headway", "simulate", "montecarlo", "stability", "oracle"}));
  run_cmd->add_option("--scenario", scenario, "Scenario INI file or bundled preset name")
      ->required();
  run_cmd->add_option("--seed", seed, "Master seed (default: the scenario's, else 12345)");
  run_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", out_dir, "Output directory (default: $PLATOON_LAB_OUT or ./platoon_out)");

  std::string preset;
  auto* preset_cmd = app.add_subcommand("preset", "List bundled presets or print one");
  preset_cmd->add_option("name", preset, "Preset to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*preset_cmd) {
    if (preset.empty()) {
      for (std::size_t i = 0; i < plab_preset_count(); ++i) std::cout << plab_preset_name(i) << '\n';
      return 0;
    }
    const char* text = plab_preset_text(preset.c_str());
    if (!text) {
      std::cerr << "platoon_lab: unknown preset '" << preset << "'\n";
      return 2;
    }
    std::cout << text;
    return 0;
  }
  return run(command, scenario, seed, jobs, out_dir);
}
