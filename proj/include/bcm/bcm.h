/* C interface to the boundary control core.
 *
 * Every call returns a bcm_status; on failure bcm_last_error() holds a
 * message for the calling thread until its next failing call. Matrices
 * cross the boundary as row-major double arrays. Strings returned through
 * char** are owned by the caller and released with bcm_string_free.
 */
#ifndef BCM_BCM_H
#define BCM_BCM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BCM_API __declspec(dllexport)
#else
#define BCM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bcm_status {
  BCM_OK = 0,
  BCM_INVALID_ARGUMENT = 1,
  BCM_GRID_MISMATCH = 2,
  BCM_NON_SYMMETRIC = 3,
  BCM_NOT_POSITIVE = 4,
  BCM_SINGULAR = 5,
  BCM_SINGULAR_INTERMEDIATE = 6,
  BCM_SINGULAR_CORNER = 7,
  BCM_CFL_VIOLATION = 8,
  BCM_NEGATIVE_DENSITY = 9,
  BCM_EMPTY_SIGMA = 10,
  BCM_EMPTY_SOURCE = 11,
  BCM_NON_POSITIVE_GRAM = 12,
  BCM_IO = 13,
  BCM_PARSE = 14,
  BCM_CHECK_FAILED = 15, /* verify ran, some check failed */
  BCM_INTERNAL = 99
} bcm_status;

typedef struct bcm_toeplitz bcm_toeplitz;
typedef struct bcm_config bcm_config;

BCM_API const char* bcm_last_error(void);
BCM_API const char* bcm_status_name(bcm_status status);
BCM_API void bcm_string_free(char* s);

/* Symmetric block-Toeplitz matrix from its first block row: n blocks of
 * m x m, block k at blocks + k*m*m. */
BCM_API bcm_status bcm_toeplitz_create(size_t m, size_t n, const double* blocks, bcm_toeplitz** out);
/* Synthetic SPD matrix, deterministic in seed. */
BCM_API bcm_status bcm_toeplitz_random_spd(size_t m, size_t n, uint64_t seed, bcm_toeplitz** out);
/* .csv selects the CSV layout, anything else the binary one. */
BCM_API bcm_status bcm_toeplitz_load(const char* path, bcm_toeplitz** out);
BCM_API bcm_status bcm_toeplitz_save(const bcm_toeplitz* g, const char* path);
BCM_API void bcm_toeplitz_destroy(bcm_toeplitz* g);
BCM_API bcm_status bcm_toeplitz_dims(const bcm_toeplitz* g, size_t* m, size_t* n);
/* Fails with BCM_NON_SYMMETRIC / BCM_NOT_POSITIVE; min_pivot may be NULL. */
BCM_API bcm_status bcm_toeplitz_validate(const bcm_toeplitz* g, double tol, double* min_pivot);
/* Last block column Y (m*n rows, m columns). */
BCM_API bcm_status bcm_toeplitz_levinson(const bcm_toeplitz* g, double* y);
/* Dense inverse, (m*n) x (m*n). */
BCM_API bcm_status bcm_toeplitz_inverse(const bcm_toeplitz* g, double* out);
/* Row system c G = b, both of length m*n. */
BCM_API bcm_status bcm_toeplitz_solve_row(const bcm_toeplitz* g, const double* b, double* c);
/* Same system through the dense pivoted elimination. */
BCM_API bcm_status bcm_toeplitz_solve_row_dense(const bcm_toeplitz* g, const double* b, double* c);

/* Experiment configuration. Keys match the config file. */
BCM_API bcm_status bcm_config_default(bcm_config** out);
BCM_API bcm_status bcm_config_load(const char* path, bcm_config** out);
BCM_API bcm_status bcm_config_set(bcm_config* cfg, const char* key, const char* value);
BCM_API void bcm_config_destroy(bcm_config* cfg);
/* Effective configuration as JSON. */
BCM_API bcm_status bcm_config_describe(const bcm_config* cfg, char** json);

/* Pipeline stages. Each writes its artifacts to the configured output
 * directory and returns a JSON summary through `summary` (may be NULL). */
BCM_API bcm_status bcm_run_forward(const bcm_config* cfg, char** summary);
BCM_API bcm_status bcm_run_gram(const bcm_config* cfg, char** summary);
BCM_API bcm_status bcm_run_solve(const bcm_config* cfg, char** summary);
/* BCM_CHECK_FAILED when any check fails; the summary is still produced. */
BCM_API bcm_status bcm_run_verify(const bcm_config* cfg, char** summary);
BCM_API bcm_status bcm_run_bench(const bcm_config* cfg, char** summary);
/* Full boundary control problem plus the shortened horizons, if configured. */
BCM_API bcm_status bcm_run_all(const bcm_config* cfg, char** summary);

#ifdef __cplusplus
}
#endif

#endif
