/* C interface to the platoon analysis library. All handles are opaque and
 * owned by the caller once returned; release them with the matching
 * *_free function. Functions report failures through plab_status and leave a
 * thread-local message readable with plab_last_error(). */
#ifndef PLATOON_LAB_H
#define PLATOON_LAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PLAB_BUILDING_LIBRARY)
#    define PLAB_API __declspec(dllexport)
#  else
#    define PLAB_API __declspec(dllimport)
#  endif
#else
#  define PLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum plab_status {
  PLAB_OK = 0,
  PLAB_ERR_INVALID_ARGUMENT = 1,
  PLAB_ERR_CONFIG = 2,
  PLAB_ERR_DIVERGENCE = 3,
  PLAB_ERR_ANALYSIS = 4,
  PLAB_ERR_IO = 5,
  PLAB_ERR_INTERNAL = 6
} plab_status;

typedef enum plab_scheme {
  PLAB_SCHEME_ACC = 0,
  PLAB_SCHEME_CACC = 1,
  PLAB_SCHEME_CACC_PLUS = 2
} plab_scheme;

typedef enum plab_series {
  PLAB_SERIES_X = 0,
  PLAB_SERIES_V = 1,
  PLAB_SERIES_A = 2,
  PLAB_SERIES_E = 3 /* spacing error; vehicle 0 (the lead) has none */
} plab_series;

typedef struct plab_scenario plab_scenario;
typedef struct plab_report plab_report;
typedef struct plab_sim plab_sim;

typedef struct plab_run_options {
  int has_seed;        /* nonzero: `seed` overrides the scenario seed */
  uint64_t seed;
  int jobs;            /* worker threads, >= 1 */
  const char* out_dir; /* NULL: current directory */
} plab_run_options;

PLAB_API const char* plab_version(void);
PLAB_API const char* plab_last_error(void);
PLAB_API const char* plab_status_string(plab_status status);
/* Process exit code for a status: 0, 2 (config), 3 (divergence), 4 (analysis), 1 otherwise. */
PLAB_API int plab_exit_code(plab_status status);

/* Packet reception rate of a Gilbert channel. */
PLAB_API plab_status plab_gamma(double p_gb, double q_bg, double r_recv_bad, double* out);
/* Closed-form minimum headway; `mu` is only read for CACC+. */
PLAB_API plab_status plab_min_headway(plab_scheme scheme, double tau, double gamma, double mu,
                                      double k_a, double* out);
/* ||H||_inf (one predecessor) or ||H_p1||_inf + ||H_p2||_inf (CACC+). */
PLAB_API plab_status plab_string_condition(plab_scheme scheme, double k_a, double k_v,
                                           double k_p, double tau, double h_w, double gamma,
                                           double mu, double* value, int* stable);

PLAB_API size_t plab_preset_count(void);
PLAB_API const char* plab_preset_name(size_t index);
/* INI text of a bundled preset, or NULL. */
PLAB_API const char* plab_preset_text(const char* name);

/* Loads a scenario file, or a bundled preset when no such file exists. */
PLAB_API plab_status plab_scenario_load(const char* path_or_preset, plab_scenario** out);
PLAB_API plab_status plab_scenario_parse(const char* ini_text, const char* base_dir,
                                         plab_scenario** out);
PLAB_API const char* plab_scenario_id(const plab_scenario* scenario);
PLAB_API const char* plab_scenario_hash(const plab_scenario* scenario);
PLAB_API size_t plab_scenario_panel_count(const plab_scenario* scenario);
PLAB_API void plab_scenario_free(plab_scenario* scenario);

/* Runs headway, simulate, montecarlo, stability or oracle and writes its
 * artifacts. On failure *out is NULL. */
PLAB_API plab_status plab_run(const plab_scenario* scenario, const char* command,
                              const plab_run_options* options, plab_report** out);
PLAB_API const char* plab_report_json(const plab_report* report);
PLAB_API size_t plab_report_artifact_count(const plab_report* report);
PLAB_API const char* plab_report_artifact(const plab_report* report, size_t index);
PLAB_API size_t plab_report_warning_count(const plab_report* report);
PLAB_API const char* plab_report_warning(const plab_report* report, size_t index);
PLAB_API void plab_report_free(plab_report* report);

/* Simulates one panel (expected-value system unless `stochastic`). */
PLAB_API plab_status plab_simulate(const plab_scenario* scenario, size_t panel, int stochastic,
                                   plab_sim** out);
PLAB_API size_t plab_sim_samples(const plab_sim* sim);
PLAB_API size_t plab_sim_vehicles(const plab_sim* sim);
PLAB_API plab_status plab_sim_series(const plab_sim* sim, plab_series series, size_t vehicle,
                                     const double** data, size_t* length);
PLAB_API void plab_sim_free(plab_sim* sim);

#ifdef __cplusplus
}
#endif

#endif /* PLATOON_LAB_H */
