#ifndef RBIG_RBIG_H
#define RBIG_RBIG_H

/* C interface to the rbig density toolkit.
 *
 * Matrices are row-major arrays of n rows by d columns. Every fallible call
 * returns an rbig_status; on failure rbig_last_error() holds a message for the
 * calling thread. Handles are opaque and must be released with their _free
 * function. A handle may be used from several threads for read-only calls. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RBIG_BUILDING_LIBRARY)
#    define RBIG_API __declspec(dllexport)
#  else
#    define RBIG_API __declspec(dllimport)
#  endif
#else
#  define RBIG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rbig_status {
    RBIG_OK = 0,
    RBIG_ERR_DOMAIN = 1,
    RBIG_ERR_DEGENERATE_MARGINAL = 2,
    RBIG_ERR_INSUFFICIENT_DATA = 3,
    RBIG_ERR_SHAPE = 4,
    RBIG_ERR_CONFIG = 5,
    RBIG_ERR_PARSE = 6,
    RBIG_ERR_IO = 7,
    RBIG_ERR_CORRUPT = 8,
    RBIG_ERR_VERSION = 9,
    RBIG_ERR_INVALID_ARGUMENT = 10,
    RBIG_ERR_INTERNAL = 11
} rbig_status;

typedef enum rbig_rotation {
    RBIG_ROTATION_PCA = 0,
    RBIG_ROTATION_RANDOM = 1,
    RBIG_ROTATION_ICA = 2 /* reserved; rejected with RBIG_ERR_CONFIG */
} rbig_rotation;

typedef struct rbig_model rbig_model;
typedef struct rbig_oneclass rbig_oneclass;
typedef struct rbig_dataset rbig_dataset;

typedef struct rbig_fit_config {
    rbig_rotation rotation;
    size_t max_iterations;
    double stop_tolerance_bits; /* negative: d * max(0.005, (bins - 1) / (2 n ln 2)) */
    double gaussianity_alpha;
    uint64_t seed;
    size_t bins;            /* 0: automatic */
    size_t negentropy_bins; /* 0: automatic */
    double clamp;
    size_t null_resamples;
    size_t calibration_rows; /* 0: calibrate at the full n */
    size_t safety_iterations;
} rbig_fit_config;

typedef struct rbig_trace_record {
    size_t iteration;
    double jm_bits;
    double cumulative_dj_bits;
    double gauss_stat;
    double gauss_threshold;
    int gauss_accept;
    double wall_seconds; /* 0 for models loaded from file */
} rbig_trace_record;

typedef struct rbig_gauss_verdict {
    double statistic;
    double threshold;
    double alpha;
    int accept;
} rbig_gauss_verdict;

typedef void (*rbig_warning_fn)(const char* message, void* user);

RBIG_API const char* rbig_version(void);
RBIG_API const char* rbig_status_name(rbig_status status);
RBIG_API const char* rbig_last_error(void);

/* NULL restores the default handler, which writes to stderr. */
RBIG_API void rbig_set_warning_handler(rbig_warning_fn fn, void* user);
RBIG_API void rbig_silence_warnings(void);

RBIG_API void rbig_fit_config_init(rbig_fit_config* config);

/* Models */
RBIG_API rbig_status rbig_fit(const double* data, size_t n, size_t d, const rbig_fit_config* config, rbig_model** out);
RBIG_API void rbig_model_free(rbig_model* model);
RBIG_API size_t rbig_model_dim(const rbig_model* model);
RBIG_API size_t rbig_model_layer_count(const rbig_model* model);
RBIG_API rbig_status rbig_model_config(const rbig_model* model, rbig_fit_config* out);
RBIG_API double rbig_model_multi_information(const rbig_model* model);

RBIG_API rbig_status rbig_transform(const rbig_model* model, const double* x, size_t n, double* out);
RBIG_API rbig_status rbig_inverse_transform(const rbig_model* model, const double* y, size_t n, double* out);
RBIG_API rbig_status rbig_log_density(const rbig_model* model, const double* x, size_t n, double* out);
RBIG_API rbig_status rbig_log_abs_det_jacobian(const rbig_model* model, const double* x, size_t n, double* out);
RBIG_API rbig_status rbig_sample(const rbig_model* model, size_t n, uint64_t seed, double* out);

RBIG_API size_t rbig_trace_length(const rbig_model* model);
RBIG_API int rbig_trace_converged(const rbig_model* model);
RBIG_API rbig_status rbig_trace_get(const rbig_model* model, size_t index, rbig_trace_record* out);

RBIG_API rbig_status rbig_model_save(const rbig_model* model, const char* path);
RBIG_API rbig_status rbig_model_load(const char* path, rbig_model** out);

/* Information measures, in bits */
RBIG_API rbig_status rbig_marginal_negentropy(const double* samples, size_t n, size_t bins, double* bits, int* low_confidence);
RBIG_API rbig_status rbig_total_marginal_negentropy(const double* data, size_t n, size_t d, size_t bins, double* bits);
RBIG_API rbig_status rbig_multi_information(const double* data, size_t n, size_t d, const rbig_fit_config* config, double* bits);
RBIG_API rbig_status rbig_gaussianity_test(const double* data, size_t n, size_t d, double alpha, size_t null_resamples,
                                           uint64_t seed, size_t calibration_rows, rbig_gauss_verdict* out);

/* One-class scoring */
RBIG_API rbig_status rbig_oneclass_fit(const double* data, size_t n, size_t d, double nu, const rbig_fit_config* config,
                                       rbig_oneclass** out);
RBIG_API void rbig_oneclass_free(rbig_oneclass* model);
RBIG_API double rbig_oneclass_threshold(const rbig_oneclass* model);
RBIG_API double rbig_oneclass_nu(const rbig_oneclass* model);
RBIG_API const rbig_model* rbig_oneclass_density(const rbig_oneclass* model);
/* accept may be NULL */
RBIG_API rbig_status rbig_oneclass_score(const rbig_oneclass* model, const double* x, size_t n, double* log_density, int* accept);
RBIG_API rbig_status rbig_oneclass_save(const rbig_oneclass* model, const char* path);
RBIG_API rbig_status rbig_oneclass_load(const char* path, rbig_oneclass** out);

/* Posterior-mean denoising. sigma has d entries; fallback (n entries) may be NULL. */
RBIG_API rbig_status rbig_denoise(const rbig_model* prior, const double* noisy, size_t n, const double* sigma,
                                  size_t n_posterior, uint64_t seed, double* out, int* fallback);

/* CSV datasets */
RBIG_API rbig_status rbig_dataset_load_csv(const char* path, int has_header, rbig_dataset** out);
RBIG_API void rbig_dataset_free(rbig_dataset* dataset);
RBIG_API size_t rbig_dataset_rows(const rbig_dataset* dataset);
RBIG_API size_t rbig_dataset_cols(const rbig_dataset* dataset);
RBIG_API size_t rbig_dataset_rejected(const rbig_dataset* dataset);
RBIG_API const double* rbig_dataset_data(const rbig_dataset* dataset);
/* NULL when the file had no header */
RBIG_API const char* rbig_dataset_column_name(const rbig_dataset* dataset, size_t column);

/* header may be NULL */
RBIG_API rbig_status rbig_write_csv(const char* path, const double* values, size_t n, size_t d, const char* const* header);

#ifdef __cplusplus
}
#endif

#endif
