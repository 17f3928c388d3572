#include "platoon/commands.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "platoon/error.hpp"
#include "platoon/expectation_oracle.hpp"
#include "platoon/report_io.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace platoon {
namespace {

using nlohmann::json;

std::string artifact(const RunOptions& o, const std::string& name) {
  return (std::filesystem::path(o.out_dir) / name).string();
}

void save(RunReport& r, const RunOptions& o, const std::string& name,
          const std::string& content) {
  const std::string path = artifact(o, name);
  write_text_file(path, content);
  r.artifacts.push_back(path);
}

RunReport start(const std::string& command, const Scenario& s) {
  RunReport r;
  r.command = command;
  r.scenario_id = s.id;
  r.config_hash = s.hash();
  return r;
}

void finish(RunReport& r, const RunOptions& o) {
  const std::string path = artifact(o, r.command + "_report.json");
  r.artifacts.push_back(path);
  write_text_file(path, r.to_json().dump(2) + "\n");
}

double panel_gamma(const Scenario& s, const Panel& p) { return s.effective_gamma(p.lossy); }
double panel_mu(const Scenario& s, const Panel& p) { return s.effective_mu(p.lossy); }

double condition_value(const SumCondition& c) { return 1.0 - c.margin; }

}  // namespace

json RunReport::to_json() const {
  return json{{"command", command},       {"scenario", scenario_id},
              {"config_hash", config_hash}, {"verdicts", verdicts},
              {"artifacts", artifacts},     {"warnings", warnings}};
}

std::vector<std::string> command_names() {
  return {"headway", "simulate", "montecarlo", "stability", "oracle"};
}

SumCondition frequency_condition(Scheme scheme, const Gains& gains, double tau, double h_w,
                                 double gamma, double mu) {
  if (scheme == Scheme::kCaccPlus) {
    const auto [hp1, hp2] = build_cacc_plus_tfs(gains, tau, h_w, gamma, mu);
    return string_stable_sum({hp1, hp2});
  }
  const double g = scheme == Scheme::kAcc ? 0.0 : gamma;
  return string_stable_sum({build_cacc_tf(gains, tau, h_w, g)});
}

double formula_headway(Scheme scheme, double tau, double gamma, double mu, double k_a) {
  switch (scheme) {
    case Scheme::kAcc: return min_headway_acc(tau);
    case Scheme::kCacc: return min_headway_cacc(tau, gamma, k_a);
    case Scheme::kCaccPlus: return min_headway_cacc_plus_mu(tau, gamma, mu, k_a);
  }
  return min_headway_acc(tau);
}

std::optional<double> certified_headway(Scheme scheme, const Gains& gains, double tau,
                                        double gamma, double mu, double h_max) {
  auto holds = [&](double h) {
    try {
      return frequency_condition(scheme, gains, tau, h, gamma, mu).stable;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kUnstableTransferFunction) return false;
      throw;
    }
  };
  constexpr double step = 0.01;
  double prev = 0.0;
  for (double h = step; h <= h_max + 1e-12; h += step) {
    if (holds(h)) {
      double lo = prev, hi = h;
      while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        if (mid > 0.0 && holds(mid)) hi = mid; else lo = mid;
      }
      return hi;
    }
    prev = h;
  }
  return std::nullopt;
}

SimOutput run_panel(const Scenario& s, const Panel& panel, bool stochastic) {
  PlatoonConfig cfg = s.panel_config(panel);
  SimOutput out = stochastic
                      ? simulate(cfg, s.maneuver)
                      : simulate_deterministic(cfg, s.maneuver, panel_gamma(s, panel),
                                               panel_mu(s, panel));
  out.scenario_id = s.id;
  out.config_hash = s.hash();
  return out;
}

RunReport cmd_headway(const Scenario& s, const RunOptions& o) {
  RunReport r = start("headway", s);
  const auto& p = s.platoon;
  const double ka = p.gains.k_a;
  const double gamma = s.effective_gamma(true);
  const double mu = s.effective_mu(true);
  json h;
  h["gamma"] = gamma;
  h["acc"] = min_headway_acc(p.tau);
  h["cacc_ideal"] = min_headway_cacc(p.tau, 1.0, ka);
  h["cacc"] = min_headway_cacc(p.tau, gamma, ka);
  h["cacc_plus_ideal"] = min_headway_cacc_plus(p.tau, 1.0, ka);
  h["cacc_plus"] = min_headway_cacc_plus(p.tau, gamma, ka);
  if (s.mu || p.second_channel) {
    h["mu"] = mu;
    h["cacc_plus_mu"] = min_headway_cacc_plus_mu(p.tau, gamma, mu, ka);
  }
  r.verdicts["h_min"] = h;

  std::ostringstream csv;
  csv << "panel,scheme,gamma,mu,h_w,h_min,verdict\n";
  json panels = json::array();
  bool insufficient = false;
  for (const auto& panel : s.effective_panels()) {
    const double g = panel_gamma(s, panel), m = panel_mu(s, panel);
    const double hmin = formula_headway(p.scheme, p.tau, g, m, ka);
    const bool ok = panel.h_w >= hmin;
    insufficient |= !ok;
    panels.push_back({{"panel", panel.label()}, {"gamma", g}, {"mu", m}, {"h_w", panel.h_w},
                      {"h_min", hmin}, {"verdict", ok ? "sufficient" : "insufficient"}});
    csv << panel.label() << ',' << to_string(p.scheme) << ',' << format_double(g) << ','
        << format_double(m) << ',' << format_double(panel.h_w) << ',' << format_double(hmin)
        << ',' << (ok ? "sufficient" : "insufficient") << '\n';
  }
  r.verdicts["panels"] = panels;
  r.verdicts["headway_insufficient"] = insufficient;
  if (insufficient) r.warnings.push_back("configured headway is below the minimum");
  save(r, o, "headway.csv", csv.str());
  finish(r, o);
  return r;
}

RunReport cmd_simulate(const Scenario& s, const RunOptions& o) {
  RunReport r = start("simulate", s);
  const bool stochastic = s.mode == SimMode::kStochastic;
  const auto panels = s.effective_panels();
  std::vector<PeakRow> peak_rows;
  json out = json::array();
  bool pattern_ok = true;
  for (std::size_t k = 0; k < panels.size(); ++k) {
    const Panel& panel = panels[k];
    const SimOutput sim = run_panel(s, panel, stochastic);
    const std::string tag = "simulate_panel" + std::to_string(k + 1);
    std::ostringstream csv;
    write_timeseries_csv(csv, sim);
    save(r, o, tag + ".csv", csv.str());
    if (s.plot) {
      std::vector<PlotSeries> series;
      for (int i = 0; i < sim.followers(); ++i) {
        series.push_back({"e_" + std::to_string(i + 1), sim.e[static_cast<std::size_t>(i)]});
      }
      std::ostringstream svg;
      write_svg_plot(svg, s.id + "  " + panel.label(), sim.time, series, "spacing error [m]");
      save(r, o, tag + ".svg", svg.str());
    }
    const auto peaks = sim.peaks();
    for (std::size_t i = 0; i < peaks.size(); ++i) {
      peak_rows.push_back({panel.label(), static_cast<int>(i + 1), peaks[i]});
    }
    json v{{"panel", panel.label()},
           {"mode", stochastic ? "stochastic" : "deterministic"},
           {"gamma", panel_gamma(s, panel)},
           {"peaks", peaks},
           {"amplified", peaks.back() > peaks.front()}};
    if (peaks.size() >= 2) {
      const bool stable = empirical_string_stability(sim).stable;
      v["string_stable"] = stable;
      if (k < s.expected_stable.size()) {
        v["expected_stable"] = static_cast<bool>(s.expected_stable[k]);
        pattern_ok &= stable == s.expected_stable[k];
      }
      if (stochastic && panel.lossy) {
        const SeedSweep sweep =
            seed_sweep(s.panel_config(panel), s.maneuver, s.seeds, o.jobs);
        v["seed_sweep"] = {{"seeds", sweep.seeds},
                           {"amplified_fraction", sweep.amplified_fraction()},
                           {"stable_fraction", sweep.stable_fraction()}};
      }
    }
    out.push_back(v);
  }
  r.verdicts["panels"] = out;
  if (!s.expected_stable.empty()) {
    r.verdicts["pattern_matches"] = pattern_ok;
    if (!pattern_ok) r.warnings.push_back("verdict pattern differs from the expected one");
  }
  std::ostringstream peaks_csv;
  write_peaks_csv(peaks_csv, peak_rows);
  save(r, o, "simulate_peaks.csv", peaks_csv.str());
  finish(r, o);
  return r;
}

RunReport cmd_montecarlo(const Scenario& s, const RunOptions& o) {
  RunReport r = start("montecarlo", s);
  const Panel panel = s.effective_panels().front();
  const PlatoonConfig cfg = s.panel_config(panel);
  const EnsembleStats st = monte_carlo(cfg, s.maneuver, s.realizations, o.jobs);
  const std::size_t nf = st.mean_e.size();
  const auto& t = st.deterministic.time;

  std::ostringstream csv;
  csv << 't';
  for (std::size_t i = 0; i < nf; ++i) csv << ",mean_e_" << i + 1 << ",det_e_" << i + 1;
  csv << '\n';
  for (std::size_t k = 0; k < t.size(); ++k) {
    csv << format_double(t[k]);
    for (std::size_t i = 0; i < nf; ++i) {
      csv << ',' << format_double(st.mean_e[i][k]) << ','
          << format_double(st.deterministic.e[i][k]);
    }
    csv << '\n';
  }
  save(r, o, "montecarlo_mean.csv", csv.str());

  std::vector<PeakRow> rows;
  for (std::size_t i = 0; i < nf; ++i) {
    rows.push_back({"mean", static_cast<int>(i + 1), st.peak_of_mean[i]});
    rows.push_back({"deterministic", static_cast<int>(i + 1), st.deterministic_peaks[i]});
  }
  for (std::size_t n = 0; n < st.realization_peaks.size(); ++n) {
    for (std::size_t i = 0; i < nf; ++i) {
      rows.push_back({"seed" + std::to_string(cfg.master_seed + n), static_cast<int>(i + 1),
                      st.realization_peaks[n][i]});
    }
  }
  std::ostringstream peaks_csv;
  write_peaks_csv(peaks_csv, rows);
  save(r, o, "montecarlo_peaks.csv", peaks_csv.str());

  if (s.plot) {
    std::ostringstream svg;
    write_svg_plot(svg, s.id + "  follower " + std::to_string(nf) + ", " +
                            std::to_string(st.n_realizations) + " realizations",
                   t, {{"ensemble mean", st.mean_e.back()}, {"expected-value", st.deterministic.e.back()}},
                   "spacing error [m]");
    save(r, o, "montecarlo.svg", svg.str());
  }

  const double pm = st.peak_of_mean.back(), pd = st.deterministic_peaks.back();
  r.verdicts = {{"realizations", st.n_realizations},
                {"gamma", cfg.platoon_gamma()},
                {"mu", cfg.platoon_mu()},
                {"peak_of_mean", st.peak_of_mean},
                {"deterministic_peaks", st.deterministic_peaks},
                {"last_peak_difference", std::abs(pm - pd)},
                {"last_peak_relative_difference", pd > 0.0 ? std::abs(pm - pd) / pd : 0.0},
                {"max_pointwise_gap", st.max_mean_gap}};
  finish(r, o);
  return r;
}

RunReport cmd_stability(const Scenario& s, const RunOptions& o) {
  RunReport r = start("stability", s);
  const auto& p = s.platoon;
  const double w0 = s.maneuver.l2_norm(p.grid.horizon);
  json panels = json::array();
  std::ostringstream sweep;
  sweep << "panel,h_w,condition\n";
  for (const auto& panel : s.effective_panels()) {
    const double g = panel_gamma(s, panel), m = panel_mu(s, panel);
    const SumCondition c = frequency_condition(p.scheme, p.gains, p.tau, panel.h_w, g, m);
    const double hmin = formula_headway(p.scheme, p.tau, g, m, p.gains.k_a);
    const auto certified = certified_headway(p.scheme, p.gains, p.tau, g, m);
    json v{{"panel", panel.label()}, {"gamma", g}, {"mu", m},
           {"h_w", panel.h_w},       {"h_min", hmin},
           {"norms", c.norms},       {"condition", condition_value(c)},
           {"margin", c.margin},     {"string_stable", c.stable}};
    v["certified_headway"] = certified ? json(*certified) : json(nullptr);
    const SumCondition at_min = frequency_condition(p.scheme, p.gains, p.tau, hmin, g, m);
    v["condition_at_h_min"] = condition_value(at_min);
    for (int k = 0; k < 20; ++k) {
      const double h = hmin * (1.0 + k / 19.0);
      const double val =
          condition_value(frequency_condition(p.scheme, p.gains, p.tau, h, g, m));
      sweep << panel.label() << ',' << format_double(h) << ',' << format_double(val) << '\n';
    }
    if (c.stable) {
      const StateSpace ss = error_state_space(p.scheme, p.gains, p.tau, panel.h_w, g, m);
      const PeakBound b = peak_output_bound(ss, s.alpha_star, w0);
      const Eigen::MatrixXd gram = lyapunov_gramian(ss.a, ss.b);
      const double residual =
          (ss.a * gram + gram * ss.a.transpose() + ss.b * ss.b.transpose()).norm();
      v["peak_bound"] = {{"j", b.j_value},       {"m1", b.m1},
                         {"m2", b.m2},           {"w0_l2", w0},
                         {"bound", b.peak},      {"gramian_residual", residual},
                         {"safe_standstill", safe_standstill_distance(b, w0)}};
    }
    panels.push_back(v);
  }
  r.verdicts["panels"] = panels;
  save(r, o, "stability_sweep.csv", sweep.str());
  finish(r, o);
  return r;
}

RunReport cmd_oracle(const Scenario& s, const RunOptions& o) {
  RunReport r = start("oracle", s);
  const auto& p = s.platoon;
  const double g = s.effective_gamma(true), m = s.effective_mu(true);
  const RandomMatrixSpec cacc = cacc_three_vehicle_spec(p.tau, p.gains, p.policy.h_w, g);
  const RandomMatrixSpec plus = cacc_plus_three_vehicle_spec(p.tau, p.gains, p.policy.h_w, g, m);

  std::ostringstream csv;
  csv << "spec,k,frobenius_gap,holds\n";
  json specs = json::object();
  for (const auto& [name, spec] : {std::pair{"cacc", &cacc}, std::pair{"cacc_plus", &plus}}) {
    json gaps = json::array();
    bool all = true;
    std::optional<int> first_fail;
    for (int k = 1; k <= s.oracle_k; ++k) {
      const auto c = check_multilinearity(*spec, k, o.jobs);
      gaps.push_back(c.frobenius_gap);
      all &= c.holds;
      if (!c.holds && !first_fail) first_fail = k;
      csv << name << ',' << k << ',' << format_double(c.frobenius_gap) << ','
          << (c.holds ? "true" : "false") << '\n';
    }
    const Eigen::MatrixXd exact = exact_expected_exponential(*spec, s.oracle_dt, o.jobs);
    const Eigen::MatrixXd det = (spec->mean() * s.oracle_dt).exp();
    const auto mc = monte_carlo_expected_exponential(*spec, s.oracle_dt, s.oracle_samples,
                                                     o.seed.value_or(p.master_seed));
    specs[name] = {{"variables", spec->variables()},
                   {"gaps", gaps},
                   {"holds", all},
                   {"first_failing_k", first_fail ? json(*first_fail) : json(nullptr)},
                   {"exponential_gap_exact", (exact - det).norm()},
                   {"exponential_gap_monte_carlo", (mc.mean - det).norm()},
                   {"monte_carlo_samples", mc.samples}};
  }
  r.verdicts = specs;
  save(r, o, "oracle.csv", csv.str());
  finish(r, o);
  return r;
}

RunReport run_command(const std::string& command, Scenario scenario, const RunOptions& options) {
  if (options.seed) scenario.platoon.master_seed = *options.seed;
  if (options.jobs < 1) throw Error(ErrorCode::kConfig, "--jobs must be at least 1");
  if (command == "headway") return cmd_headway(scenario, options);
  if (command == "simulate") return cmd_simulate(scenario, options);
  if (command == "montecarlo") return cmd_montecarlo(scenario, options);
  if (command == "stability") return cmd_stability(scenario, options);
  if (command == "oracle") return cmd_oracle(scenario, options);
  throw Error(ErrorCode::kConfig, "unknown command '" + command +
                                      "' (headway, simulate, montecarlo, stability, oracle)");
}

}  // namespace platoon
