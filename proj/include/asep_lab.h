/* C interface of the asep_lab library: exact and simulated laws of the
 * asymmetric simple exclusion process with step Bernoulli initial data,
 * Tracy-Widom limit laws and exact identity checks.
 *
 * Every function returning asep_status reports failures through the status
 * code; asep_last_error() then returns a message for the calling thread.
 * Objects behind opaque handles are released with the matching *_free. */
#ifndef ASEP_LAB_H
#define ASEP_LAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define ASEP_API __attribute__((visibility("default")))
#else
#define ASEP_API
#endif

typedef enum asep_status {
  ASEP_OK = 0,
  ASEP_ERR_DOMAIN = 1,
  ASEP_ERR_CONVERGENCE = 2,
  ASEP_ERR_CONSISTENCY = 3,
  ASEP_ERR_SINGULAR = 4,
  ASEP_ERR_WINDOW = 5,
  ASEP_ERR_UNSUPPORTED = 6,
  ASEP_ERR_RANGE = 7,
  ASEP_ERR_PRECISION = 8,
  ASEP_ERR_DEGENERATE = 9,
  ASEP_ERR_IDENTITY = 10,
  ASEP_ERR_IO = 11,
  ASEP_ERR_NULL = 12,
  ASEP_ERR_INTERNAL = 13
} asep_status;

ASEP_API const char* asep_version(void);
ASEP_API const char* asep_status_name(asep_status status);
/* Message of the last failing call on this thread ("" if none). */
ASEP_API const char* asep_last_error(void);

/* ---- model ------------------------------------------------------------ */

/* Right rate p, left rate q (p + q = 1), initial density rho in (0, 1]. */
typedef struct asep_params {
  double p;
  double q;
  double rho;
} asep_params;

typedef enum asep_mode { ASEP_MODE_POSITION = 0, ASEP_MODE_CURRENT = 1 } asep_mode;

typedef enum asep_regime {
  ASEP_REGIME_AUTO = -1,
  ASEP_REGIME_TW2 = 0,
  ASEP_REGIME_CRITICAL = 1,
  ASEP_REGIME_GAUSSIAN = 2
} asep_regime;

typedef struct asep_scaling {
  double center;          /* c1 or a1 */
  double scale;           /* c2 or a2 */
  double gaussian_center; /* c1' or a1' */
  double gaussian_scale;  /* c2' or a2', valid when has_gaussian_scale */
  int has_gaussian_scale;
} asep_scaling;

ASEP_API asep_status asep_params_validate(const asep_params* params);
ASEP_API asep_status asep_scaling_constants(double sigma_or_v, double rho, asep_mode mode,
                                            asep_scaling* out);
ASEP_API asep_status asep_classify_regime(double sigma_or_v, double rho, asep_mode mode,
                                          asep_regime* out);
ASEP_API const char* asep_regime_name(asep_regime regime);

/* ---- exact law -------------------------------------------------------- */

typedef struct asep_numerics {
  int n_xi;          /* starting xi-contour nodes */
  int n_lambda;      /* lambda-contour nodes, 0 selects max(128, 16 m) */
  int n_cap;         /* node cap for both contours */
  double tol;        /* quadrature error target */
  double imag_tol;   /* admissible imaginary residual */
  double range_tol;  /* admissible excursion outside [0, 1] */
  double radius;     /* xi-contour radius, 0 selects the adaptive choice */
} asep_numerics;

typedef struct asep_prob_result {
  double probability; /* clamped to [0, 1] */
  double raw_real;
  double imag_residual;
  double error_estimate;
  int n_xi;
  int n_lambda;
  double radius;
  int warning_count; /* e.g. kernel time beyond the conditioning limit */
} asep_prob_result;

ASEP_API void asep_numerics_default(asep_numerics* out);

/* P(x_m(t) <= x). gamma_clock != 0 substitutes t / (q - p) in the kernel. */
ASEP_API asep_status asep_prob_position(const asep_params* params, int m, long x, double t,
                                        int gamma_clock, const asep_numerics* numerics,
                                        asep_prob_result* out);

/* P(x_m(t) = x) from the deterministic configuration y[0..ny) (ny <= 3). */
ASEP_API asep_status asep_prob_position_finite_y(const asep_params* params, const long* y,
                                                 size_t ny, int m, long x, double t,
                                                 const asep_numerics* numerics,
                                                 asep_prob_result* out);

/* det(I - lambda K) on n_nodes equally spaced nodes of the xi-contour
 * (radius 0 selects the default). */
ASEP_API asep_status asep_fredholm_det(const asep_params* params, long x, double t,
                                       int gamma_clock, double lambda_re, double lambda_im,
                                       int n_nodes, double radius, double* out_re,
                                       double* out_im);

/* Exact law on the lattice [lo, hi] from Bernoulli(rho) initial data on
 * [lo, hi] intersected with Z+, evaluated as P(x_m(t) <= x). */
ASEP_API asep_status asep_ctmc_prob_position(const asep_params* params, long lo, long hi,
                                             double t, int m, long x, double* out);

/* ---- limit laws ------------------------------------------------------- */

typedef enum asep_law { ASEP_LAW_G = 0, ASEP_LAW_F2 = 1, ASEP_LAW_F1SQ = 2 } asep_law;

typedef struct asep_law_numerics {
  int n_quad;
  double length;
  double tol;
} asep_law_numerics;

typedef struct asep_table asep_table;

ASEP_API void asep_law_numerics_default(asep_law_numerics* out);
ASEP_API const char* asep_law_name(asep_law law);
ASEP_API asep_status asep_airy(double x, double* ai, double* ai_prime);
ASEP_API asep_status asep_law_value(asep_law law, double s, const asep_law_numerics* numerics,
                                    double* value, double* error_estimate);
/* F1sq through the rank-one determinant lemma. */
ASEP_API asep_status asep_f1sq_lemma(double s, const asep_law_numerics* numerics, double* value);

ASEP_API asep_status asep_table_create(asep_law law, double s_min, double s_max, double step,
                                       const asep_law_numerics* numerics, int threads,
                                       asep_table** out);
ASEP_API size_t asep_table_size(const asep_table* table);
ASEP_API asep_status asep_table_point(const asep_table* table, size_t i, double* s, double* value,
                                      double* error_estimate);
ASEP_API asep_status asep_table_value_at(const asep_table* table, double s, double* value);
ASEP_API asep_status asep_table_quantile(const asep_table* table, double p, double* s);
ASEP_API asep_status asep_table_write_csv(const asep_table* table, const char* path);
ASEP_API void asep_table_free(asep_table* table);

/* ---- simulation ------------------------------------------------------- */

typedef struct asep_sim_request {
  asep_params params;
  double t;             /* physical time */
  int trials;
  uint64_t seed;
  const int* m_list;    /* observed particle labels */
  size_t n_m;
  const long* x_list;   /* observed current sites */
  size_t n_x;
  int threads;
  int margin;           /* labels sampled beyond the observed ones, < 0: automatic */
} asep_sim_request;

typedef struct asep_sim asep_sim;

ASEP_API asep_status asep_simulate(const asep_sim_request* request, asep_sim** out);
ASEP_API size_t asep_sim_trials(const asep_sim* sim);
ASEP_API asep_status asep_sim_position(const asep_sim* sim, size_t trial, size_t m_index,
                                       long* out);
ASEP_API asep_status asep_sim_current(const asep_sim* sim, size_t trial, size_t x_index,
                                      long* out);
/* Pairs (trial, m, x) where [T(x) >= m] differs from [x_m <= x]. */
ASEP_API uint64_t asep_sim_duality_violations(const asep_sim* sim, uint64_t* pairs_checked);
/* Empirical CDF `value,count,cum_prob`; kind 0 = position m_list[index],
 * kind 1 = current x_list[index]. */
ASEP_API asep_status asep_sim_write_cdf_csv(const asep_sim* sim, int kind, size_t index,
                                            const char* path);
ASEP_API void asep_sim_free(asep_sim* sim);

/* One trajectory of `particles` Bernoulli-placed particles without
 * truncation, written as lines `t site1 site2 ...` at `snapshots` equally
 * spaced times in [0, t_end]. */
ASEP_API asep_status asep_write_trajectory(const asep_params* params, int particles,
                                           double t_end, int snapshots, uint64_t seed,
                                           const char* path);

/* ---- identities ------------------------------------------------------- */

typedef struct asep_identity_report asep_identity_report;

/* perturb_tau != 0 shifts tau on every lhs (fault injection). */
ASEP_API asep_status asep_verify_identities(int k_max, int points_per_k, uint64_t seed,
                                            int perturb_tau, asep_identity_report** out);
ASEP_API size_t asep_identity_case_count(const asep_identity_report* report);
ASEP_API asep_status asep_identity_case(const asep_identity_report* report, size_t i,
                                        const char** identity, int* k, int* point, int* passed,
                                        int* retries);
ASEP_API int asep_identity_failures(const asep_identity_report* report);
ASEP_API int asep_identity_negative_control(const asep_identity_report* report);
ASEP_API void asep_identity_report_free(asep_identity_report* report);

/* ---- convergence harness --------------------------------------------- */

typedef struct asep_plan {
  asep_params params;
  asep_mode mode;
  asep_regime regime;   /* ASEP_REGIME_AUTO classifies from sigma_or_v */
  double sigma_or_v;
  const double* t_list; /* gamma clock, increasing */
  size_t n_t;
  int trials;
  uint64_t seed;
  int threads;
} asep_plan;

typedef struct asep_convergence_row {
  double t;
  double physical_time;
  long m_or_x;
  int trials;
  double ks;
  double mean;
  double sd;
  double ks_f2;
  double ks_f1sq;
  double ks_g;
  size_t clamped;
} asep_convergence_row;

typedef struct asep_convergence asep_convergence;

ASEP_API asep_status asep_validate_plan(const asep_plan* plan);
ASEP_API asep_status asep_run_convergence(const asep_plan* plan, asep_convergence** out);
ASEP_API size_t asep_convergence_rows(const asep_convergence* report);
ASEP_API asep_status asep_convergence_row_at(const asep_convergence* report, size_t i,
                                             asep_convergence_row* out);
ASEP_API asep_regime asep_convergence_regime(const asep_convergence* report);
ASEP_API asep_law asep_convergence_law(const asep_convergence* report);
ASEP_API asep_status asep_convergence_write_csv(const asep_convergence* report, const char* path);
ASEP_API void asep_convergence_free(asep_convergence* report);

#ifdef __cplusplus
}
#endif

#endif /* ASEP_LAB_H */
