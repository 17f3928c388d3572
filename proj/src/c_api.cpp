#include "platoon_lab.h"

#include <exception>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "platoon/commands.hpp"
#include "platoon/error.hpp"
#include "platoon/scenario.hpp"

struct plab_scenario {
  platoon::Scenario scenario;
  std::string hash;
};

struct plab_report {
  platoon::RunReport report;
  std::string json;
};

struct plab_sim {
  platoon::SimOutput out;
};

namespace {

thread_local std::string g_last_error;

plab_status status_of(platoon::ErrorCode code) {
  using platoon::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidInput:
    case ErrorCode::kUndefinedRate:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kMalformedMap:
    case ErrorCode::kConfig: return PLAB_ERR_CONFIG;
    case ErrorCode::kDivergence: return PLAB_ERR_DIVERGENCE;
    case ErrorCode::kInsufficientData:
    case ErrorCode::kUnstableTransferFunction:
    case ErrorCode::kNoSolution:
    case ErrorCode::kEnumerationLimit:
    case ErrorCode::kInversion: return PLAB_ERR_ANALYSIS;
    case ErrorCode::kIo: return PLAB_ERR_IO;
  }
  return PLAB_ERR_INTERNAL;
}

plab_status fail(plab_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `body`, translating exceptions. `phase_status` replaces the mapped
// status for every core error when set (scenario loading reports CONFIG).
template <class F>
plab_status guarded(F&& body, plab_status phase_status = PLAB_OK) {
  try {
    g_last_error.clear();
    body();
    return PLAB_OK;
  } catch (const platoon::Error& e) {
    const plab_status s = phase_status != PLAB_OK ? phase_status : status_of(e.code());
    return fail(s, std::string(platoon::to_string(e.code())) + ": " + e.what());
  } catch (const std::bad_alloc&) {
    return fail(PLAB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PLAB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PLAB_ERR_INTERNAL, "unknown error");
  }
}

platoon::Scheme scheme_of(plab_scheme s) {
  switch (s) {
    case PLAB_SCHEME_ACC: return platoon::Scheme::kAcc;
    case PLAB_SCHEME_CACC: return platoon::Scheme::kCacc;
    case PLAB_SCHEME_CACC_PLUS: return platoon::Scheme::kCaccPlus;
  }
  throw platoon::Error(platoon::ErrorCode::kInvalidInput, "unknown scheme");
}

}  // namespace

extern "C" {

const char* plab_version(void) { return "1.0.0"; }

const char* plab_last_error(void) { return g_last_error.c_str(); }

const char* plab_status_string(plab_status status) {
  switch (status) {
    case PLAB_OK: return "ok";
    case PLAB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PLAB_ERR_CONFIG: return "configuration error";
    case PLAB_ERR_DIVERGENCE: return "simulation divergence";
    case PLAB_ERR_ANALYSIS: return "analysis error";
    case PLAB_ERR_IO: return "i/o error";
    case PLAB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

int plab_exit_code(plab_status status) {
  switch (status) {
    case PLAB_OK: return 0;
    case PLAB_ERR_INVALID_ARGUMENT:
    case PLAB_ERR_CONFIG: return 2;
    case PLAB_ERR_DIVERGENCE: return 3;
    case PLAB_ERR_ANALYSIS: return 4;
    default: return 1;
  }
}

plab_status plab_gamma(double p_gb, double q_bg, double r_recv_bad, double* out) {
  if (!out) return fail(PLAB_ERR_INVALID_ARGUMENT, "out is NULL");
  return guarded([&] { *out = platoon::gamma_of({p_gb, q_bg, r_recv_bad}); });
}

plab_status plab_min_headway(plab_scheme scheme, double tau, double gamma, double mu,
                             double k_a, double* out) {
  if (!out) return fail(PLAB_ERR_INVALID_ARGUMENT, "out is NULL");
  return guarded([&] { *out = platoon::formula_headway(scheme_of(scheme), tau, gamma, mu, k_a); });
}

plab_status plab_string_condition(plab_scheme scheme, double k_a, double k_v, double k_p,
                                  double tau, double h_w, double gamma, double mu,
                                  double* value, int* stable) {
  if (!value || !stable) return fail(PLAB_ERR_INVALID_ARGUMENT, "output pointer is NULL");
  return guarded([&] {
    const auto c =
        platoon::frequency_condition(scheme_of(scheme), {k_a, k_v, k_p}, tau, h_w, gamma, mu);
    *value = 1.0 - c.margin;
    *stable = c.stable ? 1 : 0;
  });
}

size_t plab_preset_count(void) { return platoon::preset_names().size(); }

const char* plab_preset_name(size_t index) {
  static const std::vector<std::string> names = platoon::preset_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

const char* plab_preset_text(const char* name) {
  if (!name) return nullptr;
  static thread_local std::string text;
  const auto t = platoon::preset_text(name);
  if (!t) return nullptr;
  text = *t;
  return text.c_str();
}

plab_status plab_scenario_load(const char* path_or_preset, plab_scenario** out) {
  if (!out) return fail(PLAB_ERR_INVALID_ARGUMENT, "out is NULL");
  *out = nullptr;
  if (!path_or_preset) return fail(PLAB_ERR_INVALID_ARGUMENT, "scenario path is NULL");
  return guarded(
      [&] {
        auto s = std::make_unique<plab_scenario>();
        s->scenario = platoon::resolve_scenario(path_or_preset);
        s->hash = s->scenario.hash();
        *out = s.release();
      },
      PLAB_ERR_CONFIG);
}

plab_status plab_scenario_parse(const char* ini_text, const char* base_dir, plab_scenario** out) {
  if (!out) return fail(PLAB_ERR_INVALID_ARGUMENT, "out is NULL");
  *out = nullptr;
  if (!ini_text) return fail(PLAB_ERR_INVALID_ARGUMENT, "scenario text is NULL");
  return guarded(
      [&] {
        std::istringstream in(ini_text);
        auto s = std::make_unique<plab_scenario>();
        s->scenario = platoon::parse_scenario(in, base_dir ? base_dir : ".");
        s->hash = s->scenario.hash();
        *out = s.release();
      },
      PLAB_ERR_CONFIG);
}

const char* plab_scenario_id(const plab_scenario* scenario) {
  return scenario ? scenario->scenario.id.c_str() : nullptr;
}

const char* plab_scenario_hash(const plab_scenario* scenario) {
  return scenario ? scenario->hash.c_str() : nullptr;
}

size_t plab_scenario_panel_count(const plab_scenario* scenario) {
  return scenario ? scenario->scenario.effective_panels().size() : 0;
}

void plab_scenario_free(plab_scenario* scenario) { delete scenario; }

plab_status plab_run(const plab_scenario* scenario, const char* command,
                     const plab_run_options* options, plab_report** out) {
  if (!out) return fail(PLAB_ERR_INVALID_ARGUMENT, "out is NULL");
  *out = nullptr;
  if (!scenario || !command) return fail(PLAB_ERR_INVALID_ARGUMENT, "scenario or command is NULL");
  return guarded([&] {
    platoon::RunOptions o;
    if (options) {
      if (options->has_seed) o.seed = options->seed;
      o.jobs = options->jobs;
      if (options->out_dir) o.out_dir = options->out_dir;
    }
    auto r = std::make_unique<plab_report>();
    r->report = platoon::run_command(command, scenario->scenario, o);
    r->json = r->report.to_json().dump(2);
    *out = r.release();
  });
}

const char* plab_report_json(const plab_report* report) {
  return report ? report->json.c_str() : nullptr;
}

size_t plab_report_artifact_count(const plab_report* report) {
  return report ? report->report.artifacts.size() : 0;
}

const char* plab_report_artifact(const plab_report* report, size_t index) {
  if (!report || index >= report->report.artifacts.size()) return nullptr;
  return report->report.artifacts[index].c_str();
}

size_t plab_report_warning_count(const plab_report* report) {
  return report ? report->report.warnings.size() : 0;
}

const char* plab_report_warning(const plab_report* report, size_t index) {
  if (!report || index >= report->report.warnings.size()) return nullptr;
  return report->report.warnings[index].c_str();
}

void plab_report_free(plab_report* report) { delete report; }

plab_status plab_simulate(const plab_scenario* scenario, size_t panel, int stochastic,
                          plab_sim** out) {
  if (!out) return fail(PLAB_ERR_INVALID_ARGUMENT, "out is NULL");
  *out = nullptr;
  if (!scenario) return fail(PLAB_ERR_INVALID_ARGUMENT, "scenario is NULL");
  const auto panels = scenario->scenario.effective_panels();
  if (panel >= panels.size()) return fail(PLAB_ERR_INVALID_ARGUMENT, "panel index out of range");
  return guarded([&] {
    auto s = std::make_unique<plab_sim>();
    s->out = platoon::run_panel(scenario->scenario, panels[panel], stochastic != 0);
    *out = s.release();
  });
}

size_t plab_sim_samples(const plab_sim* sim) { return sim ? sim->out.time.size() : 0; }

size_t plab_sim_vehicles(const plab_sim* sim) { return sim ? sim->out.x.size() : 0; }

plab_status plab_sim_series(const plab_sim* sim, plab_series series, size_t vehicle,
                            const double** data, size_t* length) {
  if (!sim || !data || !length) return fail(PLAB_ERR_INVALID_ARGUMENT, "NULL argument");
  const auto& o = sim->out;
  if (vehicle >= o.x.size()) return fail(PLAB_ERR_INVALID_ARGUMENT, "vehicle out of range");
  const std::vector<double>* v = nullptr;
  switch (series) {
    case PLAB_SERIES_X: v = &o.x[vehicle]; break;
    case PLAB_SERIES_V: v = &o.v[vehicle]; break;
    case PLAB_SERIES_A: v = &o.a[vehicle]; break;
    case PLAB_SERIES_E:
      if (vehicle == 0) return fail(PLAB_ERR_INVALID_ARGUMENT, "the lead has no spacing error");
      v = &o.e[vehicle - 1];
      break;
    default: return fail(PLAB_ERR_INVALID_ARGUMENT, "unknown series");
  }
  *data = v->data();
  *length = v->size();
  return PLAB_OK;
}

void plab_sim_free(plab_sim* sim) { delete sim; }

}  // extern "C"
