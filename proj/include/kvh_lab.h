/* C API for the KvH phase-space laboratory.
 *
 * All functions return a kvh_status (0 on success); constructors return NULL
 * on failure. kvh_last_error() describes the most recent failure on the
 * calling thread. Handles are opaque and freed with the matching _destroy.
 */
#ifndef KVH_LAB_H
#define KVH_LAB_H

#include <stdint.h>

#if defined(_WIN32)
#define KVH_API __declspec(dllexport)
#else
#define KVH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kvh_status {
  KVH_OK = 0,
  KVH_ERR_CONFIG = 1,    /* bad configuration or usage */
  KVH_ERR_CHECK = 2,     /* a named check failed */
  KVH_ERR_NUMERICAL = 3, /* singular region, non-finite values, lost samples */
  KVH_ERR_INVALID = 4    /* invalid arguments to an API call */
} kvh_status;

KVH_API const char* kvh_last_error(void);
KVH_API const char* kvh_version(void);

/* ---- batch entry points (the CLI is a thin veneer over these) ---- */

typedef struct kvh_options {
  uint64_t seed;   /* used when has_seed != 0, overrides the config seed */
  int has_seed;
  int threads;     /* <0: KVH_LAB_THREADS env then auto; 0: auto; >0: fixed */
} kvh_options;

/* Runs the configured scenario; writes series.csv, summary.json and any
 * snapshots into out_dir (NULL: config/current directory). Returns the exit
 * status (0/1/2/3 as above). */
KVH_API int kvh_run(const char* config_path, const char* out_dir, const kvh_options* options);

/* Runs the configured (or default) named checks; writes summary.json. */
KVH_API int kvh_check(const char* config_path, const char* out_dir, const kvh_options* options);

/* Evaluates the characteristics oracle at points read from points_csv
 * (columns z1..z2n) and writes z..,re,im,theta,status to out_csv. */
KVH_API int kvh_oracle(const char* config_path, const char* points_csv, const char* out_csv,
                       const kvh_options* options);

/* ---- object-level API ---- */

typedef struct kvh_model kvh_model;

KVH_API kvh_model* kvh_model_harmonic(double k);
KVH_API kvh_model* kvh_model_anharmonic(double a, double b);
KVH_API kvh_model* kvh_model_kepler(double mu, double lambda, double r_min);
KVH_API kvh_model* kvh_model_free(double mass);
KVH_API void kvh_model_destroy(kvh_model* model);

/* q and p have length n (1..3). */
KVH_API int kvh_model_value(const kvh_model* model, int n, const double* q, const double* p, double* out);
KVH_API int kvh_model_gradient(const kvh_model* model, int n, const double* q, const double* p, double* dq,
                               double* dp);
/* a(z) = H - z.grad(H)/2, the multiplicative van Hove term */
KVH_API int kvh_model_phase_term(const kvh_model* model, int n, const double* q, const double* p, double* out);
/* Verlet flow to time t with step ~dt; phase_out receives the integral of
 * a(z) along the trajectory. KVH_ERR_NUMERICAL on singular abort. */
KVH_API int kvh_model_flow(const kvh_model* model, int n, const double* q, const double* p, double t, double dt,
                           double* q_out, double* p_out, double* phase_out);

typedef struct kvh_grid kvh_grid;

/* lo, hi, counts have 2n entries, q axes then p axes. */
KVH_API kvh_grid* kvh_grid_create(int n, const double* lo, const double* hi, const int* counts);
KVH_API void kvh_grid_destroy(kvh_grid* grid);
KVH_API long long kvh_grid_size(const kvh_grid* grid);

typedef struct kvh_state kvh_state;

/* Normalized Gaussian exp(-|z-z0|^2/(4 sigma^2)) exp(i k.z); wavevector may
 * be NULL (2n entries otherwise). */
KVH_API kvh_state* kvh_state_gaussian(const kvh_grid* grid, const double* center_q, const double* center_p,
                                      double sigma, const double* wavevector, double hbar);
KVH_API void kvh_state_destroy(kvh_state* state);
KVH_API long long kvh_state_size(const kvh_state* state);
KVH_API double kvh_state_norm_sq(const kvh_state* state);
/* copies the field into re/im arrays of kvh_state_size entries */
KVH_API int kvh_state_values(const kvh_state* state, double* re, double* im);
/* <chi| L chi> with the KvH (formalism=1) or KvN (formalism=0) Liouvillian */
KVH_API int kvh_state_energy(const kvh_state* state, const kvh_model* model, int kvh_formalism, double* out);
/* RK4 propagation in place; CFL-checked with safety factor cfl_safety */
KVH_API int kvh_state_propagate(kvh_state* state, const kvh_model* model, int kvh_formalism, double dt,
                                long long steps, double cfl_safety, double decay_tolerance);

#ifdef __cplusplus
}
#endif

#endif /* KVH_LAB_H */
