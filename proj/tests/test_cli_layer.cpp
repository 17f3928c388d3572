#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>

#include <doctest.h>

#include "platoon/commands.hpp"
#include "platoon/error.hpp"
#include "platoon/report_io.hpp"
#include "platoon/scenario.hpp"

using namespace platoon;

namespace {

const char* kMinimal = R"([platoon]
scheme = cacc
n_followers = 3
tau = 0.4
k_a = 0.2
k_v = 2.5
k_p = 1
h_w = 0.7
horizon = 20

[channel]
p_gb = 0.2
q_bg = 0.1
r_recv_bad = 0.2

[maneuver]
initial_velocity = 25
segments = 0:0, 10:-9, 11:0
)";

Scenario parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

ErrorCode parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIo;
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("minimal scenario and defaults") {
  const Scenario s = parse(kMinimal);
  CHECK(s.platoon.n_followers == 3);
  CHECK(s.platoon.scheme == Scheme::kCacc);
  CHECK(s.platoon.master_seed == kDefaultSeed);
  CHECK(s.platoon.grid.dt == 0.01);
  CHECK(s.maneuver.segments.size() == 3);
  CHECK(s.maneuver.segments[1].acceleration == -9.0);
  CHECK(s.effective_gamma() == doctest::Approx(0.4667).epsilon(1e-3));
  CHECK(s.effective_gamma(false) == 1.0);
  CHECK(s.effective_panels().size() == 1);
  CHECK(s.effective_panels()[0].h_w == 0.7);
}

TEST_CASE("inline comments are ignored") {
  const Scenario s = parse(replace(kMinimal, "tau = 0.4", "tau = 0.37 ; measured lag"));
  CHECK(s.platoon.tau == 0.37);
}

TEST_CASE("unknown keys, sections and bad values are config errors") {
  CHECK(parse_error(replace(kMinimal, "tau = 0.4", "tau = 0.4\nlag = 0.3")) ==
        ErrorCode::kConfig);
  CHECK(parse_error(std::string(kMinimal) + "\n[extras]\nfoo = 1\n") == ErrorCode::kConfig);
  CHECK(parse_error(replace(kMinimal, "tau = 0.4", "tau = fast")) == ErrorCode::kConfig);
  CHECK(parse_error(replace(kMinimal, "scheme = cacc", "scheme = magic")) ==
        ErrorCode::kConfig);
  CHECK(parse_error(replace(kMinimal, "q_bg = 0.1", "q_bg = 0.0\np_gb = 0.0")) ==
        ErrorCode::kConfig);
  CHECK(parse_error(replace(kMinimal, "horizon = 20", "horizon = 20.005")) ==
        ErrorCode::kConfig);
}

TEST_CASE("two-predecessor scheme with one follower is rejected with a clear message") {
  const std::string text = replace(replace(kMinimal, "scheme = cacc", "scheme = cacc_plus"),
                                   "n_followers = 3", "n_followers = 1");
  try {
    parse(text);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfig);
    CHECK(std::string(e.what()).find("CACC+ requires n_followers >= 2") != std::string::npos);
  }
}

TEST_CASE("config hash tracks every field") {
  const Scenario base = parse(kMinimal);
  CHECK(base.hash().size() == 16);
  CHECK(parse(kMinimal).hash() == base.hash());
  CHECK(parse(replace(kMinimal, "tau = 0.4", "tau = 0.4 ; same value")).hash() == base.hash());
  const std::pair<const char*, const char*> edits[] = {
      {"tau = 0.4", "tau = 0.41"},          {"k_a = 0.2", "k_a = 0.25"},
      {"h_w = 0.7", "h_w = 0.71"},          {"n_followers = 3", "n_followers = 4"},
      {"r_recv_bad = 0.2", "r_recv_bad = 0.3"}, {"10:-9", "10:-8"},
      {"horizon = 20", "horizon = 25"},     {"initial_velocity = 25", "initial_velocity = 20"},
  };
  for (const auto& [from, to] : edits) {
    CHECK_MESSAGE(parse(replace(kMinimal, from, to)).hash() != base.hash(), to);
  }
  Scenario seeded = base;
  seeded.platoon.master_seed = 7;
  CHECK(seeded.hash() != base.hash());
}

TEST_CASE("panels and rate overrides") {
  const Scenario s = parse(std::string(kMinimal) +
                           "\n[analysis]\npanels = 0.45@ideal, 0.45@lossy, 0.6@lossy\n"
                           "expected = stable, unstable, stable\n");
  REQUIRE(s.panels.size() == 3);
  CHECK_FALSE(s.panels[0].lossy);
  CHECK(s.panels[2].h_w == 0.6);
  CHECK(s.panels[1].label() == "h=0.45 lossy");
  CHECK(s.expected_stable == std::vector<bool>{true, false, true});
  CHECK(s.panel_config(s.panels[0]).ideal_channel);
  CHECK(s.panel_config(s.panels[2]).policy.h_w == 0.6);

  const Scenario g = parse(replace(kMinimal, "r_recv_bad = 0.2", "r_recv_bad = 0.2\ngamma = 0.9"));
  CHECK(g.effective_gamma() == 0.9);
}

TEST_CASE("bundled presets parse") {
  const auto names = preset_names();
  CHECK(names.size() == 4);
  for (const auto& n : names) {
    const Scenario s = load_preset(n);
    CHECK(s.id == n);
    CHECK(s.platoon.master_seed == kDefaultSeed);
  }
  CHECK(load_preset("paper-fig4").platoon.n_followers == 10);
  CHECK(load_preset("paper-fig9").platoon.scheme == Scheme::kCacc);
  CHECK_FALSE(preset_text("paper-fig99").has_value());
  CHECK_THROWS_AS(resolve_scenario("no-such-preset"), Error);
}

TEST_CASE("time series CSV re-parses to the simulated values") {
  Scenario s = parse(kMinimal);
  const SimOutput out = run_panel(s, s.effective_panels()[0], true);
  std::stringstream csv;
  write_timeseries_csv(csv, out);
  const CsvTable t = read_csv(csv);
  CHECK(t.header.front() == "t");
  CHECK(t.header.size() == 1 + 4 * 3 + 3);
  CHECK(t.column("e_0") == -1);
  REQUIRE(t.rows.size() == out.time.size());
  const int e3 = t.column("e_3"), x0 = t.column("x_0"), a2 = t.column("a_2");
  REQUIRE(e3 > 0);
  double worst = 0.0;
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    worst = std::max(worst, std::abs(t.rows[k][e3] - out.e[2][k]));
    worst = std::max(worst, std::abs(t.rows[k][x0] - out.x[0][k]));
    worst = std::max(worst, std::abs(t.rows[k][a2] - out.a[2][k]));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("format_double round trips") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 0.0}) {
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("headway command reports the one-predecessor minimum") {
  const auto dir = std::filesystem::temp_directory_path() / "platoon_cli_layer_test";
  RunOptions o;
  o.out_dir = dir.string();
  const RunReport r = run_command("headway", load_preset("paper-fig9"), o);
  CHECK(r.verdicts["h_min"]["cacc"].get<double>() == doctest::Approx(0.538).epsilon(0.002 / 0.538));
  CHECK(r.verdicts["h_min"]["acc"].get<double>() == doctest::Approx(0.74));
  CHECK_FALSE(r.artifacts.empty());
  CHECK(std::filesystem::exists(dir / "headway_report.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_command rejects unknown commands and job counts") {
  RunOptions o;
  o.out_dir = (std::filesystem::temp_directory_path() / "platoon_cli_layer_bad").string();
  try {
    run_command("explode", parse(kMinimal), o);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfig);
  }
  o.jobs = 0;
  CHECK_THROWS_AS(run_command("headway", parse(kMinimal), o), Error);
}

}  // TEST_SUITE
