/*
 * C interface to the ascpd library: dense CP decomposition by fiber-sampled
 * stochastic proximal gradient solvers, with an ALS baseline.
 *
 * Objects are opaque handles created by ascpd_*_create / _read functions and
 * released with the matching _destroy. Every fallible call returns an
 * ascpd_status; on failure ascpd_last_error() holds a message for the
 * calling thread until its next failing call.
 */
#ifndef ASCPD_ASCPD_H
#define ASCPD_ASCPD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ASCPD_BUILDING_LIBRARY)
#    define ASCPD_API __declspec(dllexport)
#  else
#    define ASCPD_API __declspec(dllimport)
#  endif
#else
#  define ASCPD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ascpd_status {
  ASCPD_OK = 0,
  ASCPD_ERR_INVALID_ARGUMENT = 1,
  ASCPD_ERR_SHAPE = 2,
  ASCPD_ERR_OUT_OF_RANGE = 3,
  ASCPD_ERR_IO = 4,
  ASCPD_ERR_FORMAT = 5,
  ASCPD_ERR_NUMERIC = 6,
  ASCPD_ERR_INTERNAL = 7
} ascpd_status;

typedef struct ascpd_tensor ascpd_tensor;
typedef struct ascpd_model ascpd_model;
typedef struct ascpd_result ascpd_result;

ASCPD_API const char* ascpd_version(void);
ASCPD_API const char* ascpd_status_string(ascpd_status status);
ASCPD_API const char* ascpd_last_error(void);
/* Silences library warnings on stderr (process-wide). */
ASCPD_API void ascpd_set_quiet(int quiet);

/* ---- tensors ---------------------------------------------------------- */

/* Copies `values` (prod(dims) doubles, mode-1-fastest). */
ASCPD_API ascpd_status ascpd_tensor_create(size_t order, const uint64_t* dims, const double* values,
                                           ascpd_tensor** out);
ASCPD_API ascpd_status ascpd_tensor_read(const char* path, ascpd_tensor** out);
ASCPD_API ascpd_status ascpd_tensor_write(const ascpd_tensor* tensor, const char* path);
/* Reads a headerless little-endian float64 dump with the given dims. */
ASCPD_API ascpd_status ascpd_tensor_read_raw64(const char* path, size_t order, const uint64_t* dims,
                                               ascpd_tensor** out);
ASCPD_API void ascpd_tensor_destroy(ascpd_tensor* tensor);

ASCPD_API size_t ascpd_tensor_order(const ascpd_tensor* tensor);
ASCPD_API uint64_t ascpd_tensor_dim(const ascpd_tensor* tensor, size_t mode);
ASCPD_API size_t ascpd_tensor_size(const ascpd_tensor* tensor);
/* Borrowed pointer, valid until the tensor is destroyed. */
ASCPD_API const double* ascpd_tensor_data(const ascpd_tensor* tensor);
ASCPD_API double ascpd_tensor_frob_norm(const ascpd_tensor* tensor);

/* ---- models ----------------------------------------------------------- */

/* factors[n] is a column-major dims[n] x rank array. */
ASCPD_API ascpd_status ascpd_model_create(size_t order, const uint64_t* dims, uint64_t rank,
                                          const double* const* factors, ascpd_model** out);
ASCPD_API void ascpd_model_destroy(ascpd_model* model);
ASCPD_API size_t ascpd_model_order(const ascpd_model* model);
ASCPD_API uint64_t ascpd_model_rank(const ascpd_model* model);
/* Column-major factor data and its row count; borrowed. */
ASCPD_API const double* ascpd_model_factor(const ascpd_model* model, size_t mode, uint64_t* rows);
ASCPD_API ascpd_status ascpd_model_reconstruct(const ascpd_model* model, ascpd_tensor** out);
/* Relative error ||X - [[A]]||_F / ||X||_F. */
ASCPD_API ascpd_status ascpd_metric(const ascpd_tensor* tensor, const ascpd_model* model, double* out);

/* ---- synthetic data --------------------------------------------------- */

/* Nonnegative rank-`rank` tensor with uniform [0,1) factors; when has_snr
 * is nonzero, Gaussian noise scaled to realize snr_db exactly. */
ASCPD_API ascpd_status ascpd_synthesize(size_t order, const uint64_t* dims, uint64_t rank, int has_snr,
                                        double snr_db, uint64_t seed, ascpd_tensor** noisy, ascpd_model** truth,
                                        double* sigma);
/* Factor files and a JSON description next to `tensor_path`. */
ASCPD_API ascpd_status ascpd_write_truth_sidecar(const ascpd_model* truth, const char* tensor_path, double sigma,
                                                 int has_snr, double snr_db, uint64_t seed);

/* ---- decomposition ---------------------------------------------------- */

typedef struct ascpd_config {
  const char* solver;     /* "ascpd" | "spg" | "brascpd" | "adacpd" | "als" */
  uint64_t rank;
  const char* constraint; /* "none" | "nonneg" */
  const uint64_t* blocks; /* 1 entry (all modes) or one per mode */
  size_t n_blocks;
  int round_robin;        /* nonzero: cycle modes instead of sampling them */
  double cond;
  double alpha;
  double decay;
  double eta;
  double ada_b;
  double ada_eps;
  uint64_t seed;
  uint32_t trials;
  uint32_t threads;       /* 0: hardware concurrency */
  uint64_t max_full_iters;
  double tol;             /* 0 disables the m_k stopping rule */
} ascpd_config;

/* Fills defaults: ascpd, nonneg, block 100, cond 100, alpha 0.1,
 * decay 1e-6, eta 1, ada_b 1e-6, ada_eps 1e-6, seed 1, 1 trial,
 * 100 full iterations, tol 0. rank must still be set. */
ASCPD_API void ascpd_config_init(ascpd_config* config);

/* Runs config->trials trials (trial t with seed + t) on `tensor`. */
ASCPD_API ascpd_status ascpd_decompose(const ascpd_tensor* tensor, const ascpd_config* config,
                                       ascpd_result** out);
ASCPD_API void ascpd_result_destroy(ascpd_result* result);

ASCPD_API size_t ascpd_result_trials(const ascpd_result* result);
ASCPD_API size_t ascpd_result_checkpoints(const ascpd_result* result, size_t trial);
/* trial == ascpd_result_trials() addresses the averaged curve. */
ASCPD_API ascpd_status ascpd_result_checkpoint(const ascpd_result* result, size_t trial, size_t index,
                                               uint64_t* full_iter, uint64_t* work_units, double* m_k,
                                               double* wall_seconds);
/* Final factors of trial 0; borrowed. */
ASCPD_API const ascpd_model* ascpd_result_model(const ascpd_result* result);
/* CSV: trial,full_iter,work_units,m_k,wall_seconds with '#' config lines. */
ASCPD_API ascpd_status ascpd_result_write_csv(const ascpd_result* result, const char* path);

/* Monte-Carlo grid described by a JSON file; writes CSVs into out_dir. */
ASCPD_API ascpd_status ascpd_bench(const char* config_path, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* ASCPD_ASCPD_H */
