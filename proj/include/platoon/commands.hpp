#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "platoon/scenario.hpp"
#include "platoon/stability.hpp"

namespace platoon {

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides [channel] seed
  int jobs = 1;
  std::string out_dir = ".";
};

struct RunReport {
  std::string command;
  std::string scenario_id;
  std::string config_hash;
  nlohmann::json verdicts = nlohmann::json::object();
  std::vector<std::string> artifacts;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

std::vector<std::string> command_names();

/// Dispatches to one of: headway, simulate, montecarlo, stability, oracle.
RunReport run_command(const std::string& command, Scenario scenario, const RunOptions& options);

RunReport cmd_headway(const Scenario& s, const RunOptions& o);
RunReport cmd_simulate(const Scenario& s, const RunOptions& o);
RunReport cmd_montecarlo(const Scenario& s, const RunOptions& o);
RunReport cmd_stability(const Scenario& s, const RunOptions& o);
RunReport cmd_oracle(const Scenario& s, const RunOptions& o);

/// Frequency-domain certificate at one headway: ||H||_inf for one
/// predecessor, ||H_p1||_inf + ||H_p2||_inf for two.
SumCondition frequency_condition(Scheme scheme, const Gains& gains, double tau, double h_w,
                                 double gamma, double mu);

/// Closed-form minimum headway of the scheme.
double formula_headway(Scheme scheme, double tau, double gamma, double mu, double k_a);

/// Smallest headway on a 10 ms grid up to `h_max` where the frequency
/// condition holds, refined by bisection to 1e-6 s. Empty when none does.
std::optional<double> certified_headway(Scheme scheme, const Gains& gains, double tau,
                                        double gamma, double mu, double h_max = 5.0);

/// Expected-value run, or a stochastic run, of one panel.
SimOutput run_panel(const Scenario& s, const Panel& panel, bool stochastic);

}  // namespace platoon
