/* C interface to the exact reflected-Brownian-motion sampler.
 *
 * All functions return RBMX_OK on success or a negative error code; the
 * string for the most recent error on the calling thread is available via
 * rbmx_last_error(). Handles are opaque and must be released with their
 * matching destroy function. Strings returned through char** are allocated
 * by the library and released with rbmx_string_free().
 */
#ifndef RBM_EXACT_H
#define RBM_EXACT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RBMX_API __declspec(dllexport)
#else
#define RBMX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rbmx_status {
    RBMX_OK = 0,
    RBMX_ERR_INVALID_ARGUMENT = -1,
    RBMX_ERR_NUMERICAL = -2,
    RBMX_ERR_INTERNAL = -3
} rbmx_status;

typedef enum rbmx_sample_status {
    RBMX_SAMPLE_ACCEPTED = 0,
    RBMX_SAMPLE_BUDGET_EXHAUSTED = 1
} rbmx_sample_status;

typedef struct rbmx_sampler rbmx_sampler;

typedef struct rbmx_config {
    size_t d;               /* dimension */
    const double* Q;        /* row-major d x d routing matrix */
    double T;               /* query time in (0, 1] */
    const double* y0;       /* start point, componentwise >= 0 */
    uint64_t seed;
    int max_level;          /* 0 -> default 22 */
    uint64_t max_attempts;  /* 0 -> default 1e6 */
    uint64_t decision_budget; /* 0 -> default 1e6 */
} rbmx_config;

typedef struct rbmx_sample {
    double value[16];       /* first d entries are Y(T) when accepted */
    uint64_t attempts;
    int max_level_reached;
    int status;             /* rbmx_sample_status */
} rbmx_sample;

RBMX_API const char* rbmx_version(void);
RBMX_API const char* rbmx_last_error(void);
RBMX_API void rbmx_string_free(char* s);

RBMX_API rbmx_status rbmx_sampler_create(const rbmx_config* cfg, rbmx_sampler** out);
RBMX_API void rbmx_sampler_destroy(rbmx_sampler* s);

/* Draws the sample with the given index on its own deterministic substream. */
RBMX_API rbmx_status rbmx_sampler_draw(rbmx_sampler* s, uint64_t sample_index,
                                       rbmx_sample* out);

/* Reflection matrix diagnostics: alpha (spectral radius estimate), certified
 * upper bound, and the Lipschitz constant K = 1/(1 - alpha_upper). */
RBMX_API rbmx_status rbmx_spec_info(size_t d, const double* Q, double* alpha,
                                    double* alpha_upper, double* K);

/* Certified bracket [lo, hi] of the band-staying probability of a Brownian
 * bridge from a to b over duration r, with hi - lo <= tol. */
RBMX_API rbmx_status rbmx_gamma_bounds(double L, double U, double r, double a, double b,
                                       double tol, double* lo, double* hi);

/* Named validation suite; writes a JSON verdict. pass_out is 1/0. */
RBMX_API rbmx_status rbmx_validate(const char* suite, uint64_t seed, char** json_out,
                                   int* pass_out);

/* Envelope-area convergence study over layer levels [level_lo, level_hi];
 * writes CSV rows "level,mean_area" plus a trailing "slope,<value>" line. */
RBMX_API rbmx_status rbmx_convergence(int level_lo, int level_hi, uint64_t n_seeds,
                                      uint64_t seed, char** csv_out, double* slope_out);

/* Debug dump of a seeded layer set refined to `level`: one line per layer,
 * "level j b_left b_right min_lo min_hi max_lo max_hi". */
RBMX_API rbmx_status rbmx_inspect_layers(uint64_t seed, int level, char** table_out);

#ifdef __cplusplus
}
#endif

#endif /* RBM_EXACT_H */
