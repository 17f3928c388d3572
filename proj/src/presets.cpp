#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "platoon/scenario.hpp"

namespace platoon {
namespace {

struct Preset {
  std::string_view name;
  std::string_view text;
};

// Lead brakes at -9 m/s^2 from 25 m/s to 16 m/s at t = 10 s.
constexpr std::string_view kFig4 = R"(; Ensemble of a ten-follower two-predecessor platoon under bursty losses.
[platoon]
scheme = cacc_plus
n_followers = 10
tau = 0.4
k_a = 0.2
k_v = 2.5
k_p = 1
h_w = 0.6
d = 5
dt = 0.01
horizon = 30
model = linear

[channel]
p_gb = 0.2
q_bg = 0.1
r_recv_bad = 0.2
seed = 12345

[maneuver]
initial_velocity = 25
segments = 0:0, 10:-9, 11:0

[analysis]
mode = stochastic
realizations = 100

[output]
id = paper-fig4
)";

constexpr std::string_view kFig8 = R"(; Two-predecessor lookup on the point-mass model.
[platoon]
scheme = cacc_plus
n_followers = 5
tau = 0.4
k_a = 0.2
k_v = 2.5
k_p = 1
h_w = 0.45
d = 5
dt = 0.01
horizon = 30
model = linear

[channel]
p_gb = 0.2
q_bg = 0.1
r_recv_bad = 0.2
seed = 12345

[maneuver]
initial_velocity = 25
segments = 0:0, 10:-9, 11:0

[analysis]
mode = deterministic
panels = 0.45@ideal, 0.45@lossy, 0.6@lossy
expected = stable, unstable, stable
seeds = 50

[output]
id = paper-fig8
)";

constexpr std::string_view kFig9 = R"(; One-predecessor lookup on map-based vehicles.
[platoon]
scheme = cacc
n_followers = 5
tau = 0.37
k_a = 0.8
k_v = 1.5
k_p = 2
h_w = 0.45
d = 5
dt = 0.01
horizon = 30
model = map
map_curvature = 0.5

[channel]
p_gb = 0.2
q_bg = 0.1
r_recv_bad = 0.2
seed = 12345

[maneuver]
initial_velocity = 25
segments = 0:0, 10:-9, 11:0

[analysis]
mode = deterministic
panels = 0.45@ideal, 0.45@lossy, 0.6@lossy
expected = stable, unstable, stable
seeds = 50

[output]
id = paper-fig9
)";

constexpr std::string_view kFig10 = R"(; Two-predecessor lookup on map-based vehicles.
[platoon]
scheme = cacc_plus
n_followers = 5
tau = 0.37
k_a = 0.75
k_v = 2.5
k_p = 1.5
h_w = 0.4
d = 5
dt = 0.01
horizon = 30
model = map
map_curvature = 0.5

[channel]
p_gb = 0.2
q_bg = 0.1
r_recv_bad = 0.2
seed = 12345

[maneuver]
initial_velocity = 25
segments = 0:0, 10:-9, 11:0

[analysis]
mode = deterministic
panels = 0.3@ideal, 0.3@lossy, 0.4@lossy
expected = stable, unstable, stable
seeds = 50

[output]
id = paper-fig10
)";

constexpr std::array<Preset, 4> kPresets{{
    {"paper-fig4", kFig4},
    {"paper-fig8", kFig8},
    {"paper-fig9", kFig9},
    {"paper-fig10", kFig10},
}};

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : kPresets) names.emplace_back(p.name);
  return names;
}

std::optional<std::string> preset_text(const std::string& name) {
  for (const auto& p : kPresets) {
    if (p.name == name) return std::string(p.text);
  }
  return std::nullopt;
}

}  // namespace platoon
