// Acceptance suite. Prints one PASS/FAIL line per criterion; `--criterion N`
// runs a single one. The exit status is nonzero when any selected criterion
// fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "platoon/channel.hpp"
#include "platoon/commands.hpp"
#include "platoon/control.hpp"
#include "platoon/expectation_oracle.hpp"
#include "platoon/platoon_sim.hpp"
#include "platoon/scenario.hpp"
#include "platoon/stability.hpp"

using namespace platoon;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string join(const std::vector<double>& xs, const char* f = "%.4f") {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + fmt(f, xs[i]);
  return s;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Best of several repetitions, for the sub-millisecond budgets.
template <class F>
double best_time(F&& f, int reps = 50) {
  double best = 1e9;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

int jobs = 1;

Outcome criterion1() {
  double g = 0.0;
  const double t = best_time([&] { g = gamma_of({0.2, 0.1, 0.2}); });
  const bool ok = std::abs(g - 0.4667) <= 1e-4 && t < 1e-3;
  return {ok, "gamma=" + fmt("%.6f", g) + " time=" + fmt("%.2e", t) + "s"};
}

Outcome criterion2() {
  struct Case {
    const char* name;
    std::function<double()> f;
    double expected, tol;
  };
  const double g = 0.467;
  const Case cases[] = {
      {"cacc+ ideal", [] { return min_headway_cacc_plus(0.4, 1.0, 0.2); }, 0.38, 0.005},
      {"cacc+ lossy", [&] { return min_headway_cacc_plus(0.4, g, 0.2); }, 0.53, 0.01},
      {"cacc lossy", [&] { return min_headway_cacc(0.37, g, 0.8); }, 0.538, 0.002},
      {"acc 0.37", [] { return min_headway_acc(0.37); }, 0.74, 1e-12},
      {"acc 0.4", [] { return min_headway_acc(0.4); }, 0.8, 1e-12},
      {"cacc+ map", [&] { return min_headway_cacc_plus(0.37, g, 0.75); }, 0.371, 0.002},
  };
  bool ok = true;
  std::string d;
  for (const auto& c : cases) {
    double v = 0.0;
    const double t = best_time([&] { v = c.f(); });
    const bool hit = std::abs(v - c.expected) <= c.tol && t < 1e-3;
    ok = ok && hit;
    d += std::string(c.name) + "=" + fmt("%.4f", v) + (hit ? " " : "(!) ");
  }
  return {ok, d};
}

Outcome criterion3() {
  const auto t0 = Clock::now();
  struct Set {
    const char* name;
    Scheme scheme;
    Gains gains;
    double tau, gamma;
  };
  const double g = gamma_of({0.2, 0.1, 0.2});
  const Set sets[] = {
      {"cacc+ (0.2,2.5,1) ideal", Scheme::kCaccPlus, {0.2, 2.5, 1.0}, 0.4, 1.0},
      {"cacc+ (0.2,2.5,1) lossy", Scheme::kCaccPlus, {0.2, 2.5, 1.0}, 0.4, g},
      {"cacc (0.8,1.5,2) lossy", Scheme::kCacc, {0.8, 1.5, 2.0}, 0.37, g},
      {"cacc+ (0.75,2.5,1.5) lossy", Scheme::kCaccPlus, {0.75, 2.5, 1.5}, 0.37, g},
  };
  bool ok = true;
  std::string d;
  for (const auto& s : sets) {
    const double hmin = formula_headway(s.scheme, s.tau, s.gamma, s.gamma, s.gains.k_a);
    const auto at_min = frequency_condition(s.scheme, s.gains, s.tau, hmin, s.gamma, s.gamma);
    const double value_min = 1.0 - at_min.margin;
    bool tight = std::abs(value_min - 1.0) <= 1e-3;
    double worst = 0.0;
    int violations = 0;
    for (int k = 0; k < 20; ++k) {
      const double h = hmin * (1.0 + k / 19.0);
      const double v = 1.0 - frequency_condition(s.scheme, s.gains, s.tau, h, s.gamma, s.gamma).margin;
      worst = std::max(worst, v);
      if (v > 1.0 + 1e-9) ++violations;
    }
    ok = ok && tight && violations == 0;
    d += std::string(s.name) + ": h_min=" + fmt("%.4f", hmin) + " norm@h_min=" +
         fmt("%.4f", value_min) + " max_on_grid=" + fmt("%.4f", worst) + " over1=" +
         std::to_string(violations) + "/20; ";
  }
  const double t = seconds_since(t0);
  ok = ok && t < 1.0;
  return {ok, d + "time=" + fmt("%.3f", t) + "s"};
}

Outcome criterion4() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string d;
  for (const char* name : {"paper-fig8", "paper-fig9", "paper-fig10"}) {
    const Scenario s = load_preset(name);
    const auto panels = s.effective_panels();
    std::string got;
    bool match = true;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      const bool stable = empirical_string_stability(run_panel(s, panels[i], false)).stable;
      got += stable ? 'S' : 'U';
      if (i < s.expected_stable.size() && stable != s.expected_stable[i]) match = false;
    }
    const PlatoonConfig mid = s.panel_config(panels[1]);
    const SeedSweep sweep = seed_sweep(mid, s.maneuver, 50, jobs);
    const bool amplified = sweep.amplified_fraction() >= 0.6;
    ok = ok && match && amplified;
    d += std::string(name) + " (" + std::string(to_string(s.platoon.scheme)) + "): verdicts=" +
         got + " expected=SUS" + (match ? "" : "(!)") + " middle amplified " +
         std::to_string(sweep.amplified) + "/50" + (amplified ? "" : "(!)") + "; ";
  }
  const double t = seconds_since(t0);
  ok = ok && t < 30.0;
  return {ok, d + "time=" + fmt("%.2f", t) + "s"};
}

Outcome criterion5() {
  const auto t0 = Clock::now();
  const Scenario s = load_preset("paper-fig4");
  const PlatoonConfig cfg = s.panel_config(s.effective_panels()[0]);
  const EnsembleStats st = monte_carlo(cfg, s.maneuver, 100, jobs);
  const double mean_peak = st.peak_of_mean.back();
  const double det_peak = st.deterministic_peaks.back();
  const double rel = std::abs(mean_peak - det_peak) / det_peak;
  const double t = seconds_since(t0);
  const bool ok = st.n_realizations == 100 && cfg.n_followers == 10 && rel < 0.10 && t < 60.0;
  return {ok, "vehicle 10 peak(mean)=" + fmt("%.4f", mean_peak) + " peak(gamma)=" +
                  fmt("%.4f", det_peak) + " diff=" + fmt("%.4f", std::abs(mean_peak - det_peak)) +
                  "m rel=" + fmt("%.4f", rel) + " time=" + fmt("%.2f", t) + "s"};
}

Outcome criterion6() {
  const auto t0 = Clock::now();
  const double g = gamma_of({0.2, 0.1, 0.2});
  const Gains gains{0.2, 2.5, 1.0};
  const auto one = cacc_three_vehicle_spec(0.4, gains, 0.45, g);
  double worst = 0.0;
  for (int k = 1; k <= 6; ++k) worst = std::max(worst, check_multilinearity(one, k, jobs).frobenius_gap);
  const auto two = cacc_plus_three_vehicle_spec(0.4, gains, 0.45, g, g);
  const double gap3 = check_multilinearity(two, 3, jobs).frobenius_gap;
  const double t = seconds_since(t0);
  const bool ok = worst < 1e-10 && gap3 > 1e-6 && t < 5.0;
  return {ok, "cacc max gap k=1..6 " + fmt("%.2e", worst) + ", cacc+ gap k=3 " +
                  fmt("%.4e", gap3) + " time=" + fmt("%.3f", t) + "s"};
}

Outcome criterion7() {
  const auto t0 = Clock::now();
  const double g = gamma_of({0.2, 0.1, 0.2});
  struct Dyn {
    Scheme scheme;
    Gains gains;
    double tau, h;
  };
  const Dyn dyns[] = {{Scheme::kCacc, {0.8, 1.5, 2.0}, 0.37, 0.6},
                      {Scheme::kCaccPlus, {0.2, 2.5, 1.0}, 0.4, 0.6},
                      {Scheme::kCaccPlus, {0.75, 2.5, 1.5}, 0.37, 0.4}};
  double residual = 0.0;
  for (const auto& dy : dyns) {
    const StateSpace ss = error_state_space(dy.scheme, dy.gains, dy.tau, dy.h, g, g);
    const Eigen::MatrixXd p = lyapunov_gramian(ss.a, ss.b);
    const Eigen::MatrixXd bb = ss.b * ss.b.transpose();
    residual = std::max(residual, (ss.a * p + p * ss.a.transpose() + bb).norm() / bb.norm());
  }

  // Stable configuration: the one-predecessor suite at its wide headway.
  const Scenario s = load_preset("paper-fig9");
  PlatoonConfig cfg = s.panel_config({0.6, true});
  cfg.model = VehicleModel::kLinear;
  const StateSpace ss = error_state_space(Scheme::kCacc, cfg.gains, cfg.tau, 0.6, g, g);
  const double w0 = s.maneuver.l2_norm(cfg.grid.horizon);
  const PeakBound pb = peak_output_bound(ss, 0.0, w0);
  const EnsembleStats st = monte_carlo(cfg, s.maneuver, 100, jobs);
  int violations = 0;
  double worst = 0.0;
  for (const auto& row : st.realization_peaks) {
    for (double p : row) {
      worst = std::max(worst, p);
      if (p > pb.peak) ++violations;
    }
  }
  const double t = seconds_since(t0);
  const bool ok = residual < 1e-8 && violations == 0 && t < 60.0;
  return {ok, "rel residual=" + fmt("%.2e", residual) + " bound=" + fmt("%.4f", pb.peak) +
                  "m worst simulated=" + fmt("%.4f", worst) + "m violations=" +
                  std::to_string(violations) + "/" + std::to_string(100 * cfg.n_followers) +
                  " time=" + fmt("%.2f", t) + "s"};
}

Outcome criterion8() {
  const auto t0 = Clock::now();
  const Scenario s = load_preset("paper-fig9");
  PlatoonConfig cfg = s.panel_config({0.6, true});
  cfg.model = VehicleModel::kLinear;
  // Property over independent seed batches: the bursty channel makes one
  // batch's sup-gap noisy, so the ratio is taken on the batch-mean gaps.
  constexpr int kBatches = 10;
  double sum20 = 0.0, sum200 = 0.0;
  int batch_wins = 0;
  for (int b = 0; b < kBatches; ++b) {
    cfg.master_seed = kDefaultSeed + 1000000ULL * static_cast<unsigned>(b);
    const double g20 = monte_carlo(cfg, s.maneuver, 20, jobs).max_mean_gap;
    const double g200 = monte_carlo(cfg, s.maneuver, 200, jobs).max_mean_gap;
    sum20 += g20;
    sum200 += g200;
    if (g200 < 0.5 * g20) ++batch_wins;
  }
  const double ratio = sum200 / sum20;
  const double t = seconds_since(t0);
  const bool ok = ratio < 0.5 && t < 60.0;
  return {ok, "mean gap n=20 " + fmt("%.4f", sum20 / kBatches) + "m, n=200 " +
                  fmt("%.4f", sum200 / kBatches) + "m, ratio=" + fmt("%.3f", ratio) +
                  " (single batches below 50%: " + std::to_string(batch_wins) + "/" +
                  std::to_string(kBatches) + ") time=" + fmt("%.2f", t) + "s"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome criterion9() {
  const auto t0 = Clock::now();
  const auto root = std::filesystem::temp_directory_path() / "platoon_acceptance_repro";
  std::filesystem::remove_all(root);
  Scenario fig4 = load_preset("paper-fig4");
  fig4.realizations = 20;
  std::vector<std::string> files[2];
  for (int run = 0; run < 2; ++run) {
    RunOptions o;
    o.seed = 2024;
    o.jobs = jobs;
    o.out_dir = (root / std::to_string(run)).string();
    for (const auto& [cmd, sc] : {std::pair{"montecarlo", fig4},
                                  std::pair{"simulate", load_preset("paper-fig8")}}) {
      for (const auto& a : run_command(cmd, sc, o).artifacts) {
        if (a.size() > 4 && a.substr(a.size() - 4) == ".csv") files[run].push_back(a);
      }
    }
  }
  bool ok = !files[0].empty() && files[0].size() == files[1].size();
  int same = 0;
  for (std::size_t i = 0; ok && i < files[0].size(); ++i) {
    const std::string a = slurp(files[0][i]), b = slurp(files[1][i]);
    if (!a.empty() && a == b) ++same;
  }
  ok = ok && same == static_cast<int>(files[0].size());
  std::filesystem::remove_all(root);
  return {ok, std::to_string(same) + "/" + std::to_string(files[0].size()) +
                  " CSV files byte-identical time=" + fmt("%.2f", seconds_since(t0)) + "s"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-9)")->check(CLI::Range(1, 9));
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const std::function<Outcome()> all[] = {criterion1, criterion2, criterion3,
                                          criterion4, criterion5, criterion6,
                                          criterion7, criterion8, criterion9};
  int failed = 0;
  for (int i = 1; i <= 9; ++i) {
    if (only && only != i) continue;
    Outcome o;
    try {
      o = all[i - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("criterion %d: %s - %s\n", i, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
