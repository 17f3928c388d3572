#include "platoon/scenario.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "platoon/error.hpp"

namespace platoon {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"platoon",
       {"scheme", "n_followers", "tau", "k_a", "k_v", "k_p", "h_w", "d", "dt", "horizon", "model",
        "map_throttle", "map_brake", "map_curvature", "saturation", "clamp_velocity", "accel_min",
        "accel_max", "divergence_limit"}},
      {"channel",
       {"p_gb", "q_bg", "r_recv_bad", "second_p_gb", "second_q_bg", "second_r_recv_bad", "gamma",
        "mu", "ideal", "initial_mode", "seed"}},
      {"maneuver", {"initial_velocity", "segments"}},
      {"analysis",
       {"mode", "panels", "expected", "realizations", "seeds", "oracle_k", "oracle_dt",
        "oracle_samples", "alpha_star"}},
      {"output", {"id", "plot"}},
  };
  return s;
}

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::kConfig, what); }

std::string fmt(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = boost::algorithm::trim_copy(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    fail(key + ": expected a number, got '" + t + "'");
  }
  return v;
}

long long to_int(const std::string& key, const std::string& text) {
  const std::string t = boost::algorithm::trim_copy(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    fail(key + ": expected an integer, got '" + t + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(text));
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  fail(key + ": expected a boolean, got '" + t + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, text, boost::is_any_of(","));
  for (auto& p : parts) boost::algorithm::trim(p);
  std::erase_if(parts, [](const std::string& p) { return p.empty(); });
  return parts;
}

// Drops inline comments, which the INI reader keeps as part of the value.
std::string strip_comments(std::istream& in) {
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    for (std::size_t i = 1; i < line.size(); ++i) {
      if ((line[i] == ';' || line[i] == '#') && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.erase(i);
        break;
      }
    }
    out << line << '\n';
  }
  return out.str();
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> get(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return boost::algorithm::trim_copy(*v);
  }
  void number(const std::string& s, const std::string& k, double& out) const {
    if (auto v = get(s, k)) out = to_double(s + "." + k, *v);
  }
  std::optional<double> number(const std::string& s, const std::string& k) const {
    if (auto v = get(s, k)) return to_double(s + "." + k, *v);
    return std::nullopt;
  }
  template <class I>
  void integer(const std::string& s, const std::string& k, I& out) const {
    if (auto v = get(s, k)) out = static_cast<I>(to_int(s + "." + k, *v));
  }
  void boolean(const std::string& s, const std::string& k, bool& out) const {
    if (auto v = get(s, k)) out = to_bool(s + "." + k, *v);
  }

 private:
  const pt::ptree& tree_;
};

std::vector<ManeuverSegment> parse_segments(const std::string& text) {
  std::vector<ManeuverSegment> segs;
  for (const auto& item : split_list(text)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      fail("maneuver.segments: expected start:accel, got '" + item + "'");
    }
    segs.push_back({to_double("maneuver.segments", item.substr(0, colon)),
                    to_double("maneuver.segments", item.substr(colon + 1))});
  }
  return segs;
}

std::vector<Panel> parse_panels(const std::string& text) {
  std::vector<Panel> panels;
  for (const auto& item : split_list(text)) {
    const auto at = item.find('@');
    if (at == std::string::npos) fail("analysis.panels: expected h@ideal or h@lossy");
    const std::string kind = boost::algorithm::trim_copy(item.substr(at + 1));
    if (kind != "ideal" && kind != "lossy") {
      fail("analysis.panels: channel must be 'ideal' or 'lossy', got '" + kind + "'");
    }
    panels.push_back({to_double("analysis.panels", item.substr(0, at)), kind == "lossy"});
  }
  return panels;
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

void check_rate(const std::string& key, double r) {
  if (!(r >= 0.0 && r <= 1.0)) fail(key + " must lie in [0, 1]");
}

}  // namespace

std::string Panel::label() const {
  return "h=" + fmt(h_w) + (lossy ? " lossy" : " ideal");
}

double Scenario::effective_gamma(bool lossy) const {
  if (!lossy || platoon.ideal_channel) return 1.0;
  if (gamma) return *gamma;
  PlatoonConfig c = platoon;
  return c.platoon_gamma();
}

double Scenario::effective_mu(bool lossy) const {
  if (!lossy || platoon.ideal_channel) return 1.0;
  if (mu) return *mu;
  if (gamma && !platoon.second_channel) return *gamma;
  return platoon.platoon_mu();
}

PlatoonConfig Scenario::panel_config(const Panel& panel) const {
  PlatoonConfig c = platoon;
  c.policy.h_w = panel.h_w;
  c.ideal_channel = platoon.ideal_channel || !panel.lossy;
  return c;
}

std::vector<Panel> Scenario::effective_panels() const {
  if (!panels.empty()) return panels;
  return {Panel{platoon.policy.h_w, !platoon.ideal_channel}};
}

std::string Scenario::canonical() const {
  std::ostringstream o;
  const auto& p = platoon;
  auto opt = [](const std::optional<double>& x) { return x ? fmt(*x) : std::string("-"); };
  o << "id=" << id << "\nscheme=" << to_string(p.scheme) << "\nn=" << p.n_followers
    << "\ntau=" << fmt(p.tau) << "\nk=" << fmt(p.gains.k_a) << ',' << fmt(p.gains.k_v) << ','
    << fmt(p.gains.k_p) << "\nh=" << fmt(p.policy.h_w) << "\nd=" << fmt(p.policy.d)
    << "\ndt=" << fmt(p.grid.dt) << "\nhorizon=" << fmt(p.grid.horizon)
    << "\nmodel=" << (p.model == VehicleModel::kMap ? "map" : "linear")
    << "\nmaps=" << map_throttle << '|' << map_brake << '|' << fmt(map_curvature)
    << "\nsat=" << p.saturation.enabled << ',' << fmt(p.saturation.min_accel) << ','
    << fmt(p.saturation.max_accel) << "\nclamp=" << p.clamp_velocity
    << "\nguard=" << fmt(p.divergence_limit)
    << "\nchannel=" << fmt(p.channel.p_gb) << ',' << fmt(p.channel.q_bg) << ','
    << fmt(p.channel.r_recv_bad);
  o << "\nsecond=";
  if (p.second_channel) {
    o << fmt(p.second_channel->p_gb) << ',' << fmt(p.second_channel->q_bg) << ','
      << fmt(p.second_channel->r_recv_bad);
  } else {
    o << '-';
  }
  o << "\ngamma=" << opt(gamma) << "\nmu=" << opt(mu) << "\nideal=" << p.ideal_channel
    << "\ninit=" << (p.initial_mode == InitialMode::kGood ? "good" : "stationary")
    << "\nseed=" << p.master_seed << "\nv0=" << fmt(maneuver.initial_velocity) << "\nsegments=";
  for (const auto& s : maneuver.segments) o << fmt(s.start_time) << ':' << fmt(s.acceleration) << ';';
  o << "\nmode=" << (mode == SimMode::kStochastic ? "stochastic" : "deterministic") << "\npanels=";
  for (const auto& pa : panels) o << fmt(pa.h_w) << '@' << (pa.lossy ? "lossy" : "ideal") << ';';
  o << "\nexpected=";
  for (bool e : expected_stable) o << (e ? "stable" : "unstable") << ';';
  o << "\nrealizations=" << realizations << "\nseeds=" << seeds << "\noracle=" << oracle_k << ','
    << fmt(oracle_dt) << ',' << oracle_samples << "\nalpha=" << fmt(alpha_star)
    << "\nplot=" << plot << '\n';
  return o.str();
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string Scenario::hash() const {
  char buf[17];
  const auto r = std::to_chars(buf, buf + 16, fnv1a64(canonical()), 16);
  std::string s(buf, r.ptr);
  return std::string(16 - s.size(), '0') + s;
}

Scenario parse_scenario(std::istream& in, const std::string& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream cleaned(strip_comments(in));
    pt::read_ini(cleaned, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(std::string("scenario is not valid INI: ") + e.message() + " (line " +
         std::to_string(e.line()) + ")");
  }
  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) {
      if (body.empty()) fail("key '" + section + "' is outside any section");
      fail("unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) fail("unknown key '" + key + "' in [" + section + "]");
    }
  }

  Reader r(tree);
  Scenario s;
  PlatoonConfig& p = s.platoon;
  p.master_seed = kDefaultSeed;
  if (auto v = r.get("platoon", "scheme")) {
    const auto scheme = parse_scheme(*v);
    if (!scheme) fail("platoon.scheme: unknown scheme '" + *v + "' (acc, cacc, cacc_plus)");
    p.scheme = *scheme;
  }
  r.integer("platoon", "n_followers", p.n_followers);
  r.number("platoon", "tau", p.tau);
  r.number("platoon", "k_a", p.gains.k_a);
  r.number("platoon", "k_v", p.gains.k_v);
  r.number("platoon", "k_p", p.gains.k_p);
  r.number("platoon", "h_w", p.policy.h_w);
  r.number("platoon", "d", p.policy.d);
  r.number("platoon", "dt", p.grid.dt);
  r.number("platoon", "horizon", p.grid.horizon);
  if (auto v = r.get("platoon", "model")) {
    if (*v == "linear") p.model = VehicleModel::kLinear;
    else if (*v == "map") p.model = VehicleModel::kMap;
    else fail("platoon.model: expected 'linear' or 'map', got '" + *v + "'");
  }
  if (auto v = r.get("platoon", "map_throttle")) s.map_throttle = resolve(base_dir, *v);
  if (auto v = r.get("platoon", "map_brake")) s.map_brake = resolve(base_dir, *v);
  if (s.map_throttle.empty() != s.map_brake.empty()) {
    fail("platoon.map_throttle and platoon.map_brake must be given together");
  }
  r.number("platoon", "map_curvature", s.map_curvature);
  r.boolean("platoon", "saturation", p.saturation.enabled);
  r.boolean("platoon", "clamp_velocity", p.clamp_velocity);
  r.number("platoon", "accel_min", p.saturation.min_accel);
  r.number("platoon", "accel_max", p.saturation.max_accel);
  r.number("platoon", "divergence_limit", p.divergence_limit);

  r.number("channel", "p_gb", p.channel.p_gb);
  r.number("channel", "q_bg", p.channel.q_bg);
  r.number("channel", "r_recv_bad", p.channel.r_recv_bad);
  const auto sp = r.number("channel", "second_p_gb");
  const auto sq = r.number("channel", "second_q_bg");
  const auto sr = r.number("channel", "second_r_recv_bad");
  if (sp || sq || sr) {
    if (!(sp && sq && sr)) fail("channel.second_* keys must be given together");
    p.second_channel = GilbertParams{*sp, *sq, *sr};
  }
  s.gamma = r.number("channel", "gamma");
  s.mu = r.number("channel", "mu");
  if (s.gamma) check_rate("channel.gamma", *s.gamma);
  if (s.mu) check_rate("channel.mu", *s.mu);
  r.boolean("channel", "ideal", p.ideal_channel);
  if (auto v = r.get("channel", "initial_mode")) {
    if (*v == "stationary") p.initial_mode = InitialMode::kStationary;
    else if (*v == "good") p.initial_mode = InitialMode::kGood;
    else fail("channel.initial_mode: expected 'stationary' or 'good'");
  }
  if (auto v = r.get("channel", "seed")) {
    const long long seed = to_int("channel.seed", *v);
    if (seed < 0) fail("channel.seed must be non-negative");
    p.master_seed = static_cast<std::uint64_t>(seed);
  }

  r.number("maneuver", "initial_velocity", s.maneuver.initial_velocity);
  if (auto v = r.get("maneuver", "segments")) {
    s.maneuver.segments = parse_segments(*v);
  } else {
    s.maneuver.segments = {{0.0, 0.0}};
  }

  if (auto v = r.get("analysis", "mode")) {
    if (*v == "deterministic") s.mode = SimMode::kDeterministic;
    else if (*v == "stochastic") s.mode = SimMode::kStochastic;
    else fail("analysis.mode: expected 'deterministic' or 'stochastic'");
  }
  if (auto v = r.get("analysis", "panels")) s.panels = parse_panels(*v);
  if (auto v = r.get("analysis", "expected")) {
    for (const auto& item : split_list(*v)) {
      if (item == "stable") s.expected_stable.push_back(true);
      else if (item == "unstable") s.expected_stable.push_back(false);
      else fail("analysis.expected: entries must be 'stable' or 'unstable'");
    }
    if (s.expected_stable.size() != s.effective_panels().size()) {
      fail("analysis.expected needs one entry per panel");
    }
  }
  r.integer("analysis", "realizations", s.realizations);
  r.integer("analysis", "seeds", s.seeds);
  r.integer("analysis", "oracle_k", s.oracle_k);
  r.number("analysis", "oracle_dt", s.oracle_dt);
  r.integer("analysis", "oracle_samples", s.oracle_samples);
  r.number("analysis", "alpha_star", s.alpha_star);
  if (auto v = r.get("output", "id")) s.id = *v;
  r.boolean("output", "plot", s.plot);

  if (s.realizations < 1) fail("analysis.realizations must be at least 1");
  if (s.seeds < 1) fail("analysis.seeds must be at least 1");
  if (s.oracle_k < 1) fail("analysis.oracle_k must be at least 1");
  if (!(s.oracle_dt > 0.0)) fail("analysis.oracle_dt must be positive");
  if (s.oracle_samples < 1) fail("analysis.oracle_samples must be at least 1");
  if (!(s.alpha_star >= 0.0)) fail("analysis.alpha_star must be non-negative");
  for (const auto& panel : s.panels) {
    if (!(panel.h_w > 0.0)) fail("analysis.panels: headway must be positive");
  }

  if (p.model == VehicleModel::kMap) {
    auto maps = std::make_shared<VehicleMaps>();
    if (s.map_throttle.empty()) {
      SyntheticMapParams mp;
      mp.curvature = s.map_curvature;
      *maps = synthetic_maps(mp);
    } else {
      maps->throttle = load_pedal_map_csv(s.map_throttle);
      maps->brake = load_pedal_map_csv(s.map_brake);
    }
    p.maps = std::move(maps);
  }

  try {
    for (const auto& panel : s.effective_panels()) s.panel_config(panel).validate();
    s.maneuver.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open scenario file " + path);
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_scenario(in, dir.empty() ? "." : dir.string());
}

Scenario load_preset(const std::string& name) {
  const auto text = preset_text(name);
  if (!text) throw Error(ErrorCode::kConfig, "unknown preset '" + name + "'");
  std::istringstream in(*text);
  return parse_scenario(in);
}

Scenario resolve_scenario(const std::string& path_or_preset) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(path_or_preset, ec)) return load_scenario(path_or_preset);
  if (preset_text(path_or_preset)) return load_preset(path_or_preset);
  throw Error(ErrorCode::kConfig,
              "scenario '" + path_or_preset + "' is neither a file nor a bundled preset");
}

}  // namespace platoon
