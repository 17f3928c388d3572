#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "platoon/platoon_sim.hpp"

namespace platoon {

/// One column of a scenario suite: a headway and whether V2V losses apply.
struct Panel {
  double h_w = 0.0;
  bool lossy = false;

  std::string label() const;
};

enum class SimMode { kDeterministic, kStochastic };

constexpr std::uint64_t kDefaultSeed = 12345;

struct Scenario {
  std::string id = "scenario";
  PlatoonConfig platoon;
  Maneuver maneuver;
  std::optional<double> gamma;  // overrides the Gilbert-derived rate
  std::optional<double> mu;
  std::vector<Panel> panels;

  SimMode mode = SimMode::kDeterministic;
  int realizations = 100;
  int seeds = 50;
  int oracle_k = 6;
  double oracle_dt = 0.01;
  int oracle_samples = 100000;
  double alpha_star = 0.0;
  std::vector<bool> expected_stable;  // per panel, when given

  std::string map_throttle;  // CSV paths; synthetic maps when empty
  std::string map_brake;
  double map_curvature = 0.5;
  bool plot = true;

  /// Reception rates used by the analysis and the expected-value runs.
  double effective_gamma(bool lossy = true) const;
  double effective_mu(bool lossy = true) const;

  /// Platoon configuration of one panel (headway, channel and rates applied).
  PlatoonConfig panel_config(const Panel& panel) const;

  /// Every panel, or a single implicit panel from [platoon] h_w.
  std::vector<Panel> effective_panels() const;

  /// Stable text form of every field; the config hash is taken over it.
  std::string canonical() const;
  std::string hash() const;
};

/// INI document with sections [platoon] [channel] [maneuver] [analysis]
/// [output]. Unknown sections and keys are rejected. Relative map paths are
/// resolved against `base_dir`.
Scenario parse_scenario(std::istream& in, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

/// Bundled scenarios: paper-fig4, paper-fig8, paper-fig9, paper-fig10.
std::vector<std::string> preset_names();
std::optional<std::string> preset_text(const std::string& name);
Scenario load_preset(const std::string& name);

/// A path that names an existing file is loaded; otherwise a preset name.
Scenario resolve_scenario(const std::string& path_or_preset);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace platoon
