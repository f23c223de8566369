#ifndef SPHERICAL_SENSING_H
#define SPHERICAL_SENSING_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ss_status {
  SS_STATUS_OK = 0,
  SS_STATUS_ERR_DOMAIN = 1,
  SS_STATUS_ERR_CONVERGENCE = 2,
  SS_STATUS_ERR_NOT_HERMITIAN = 3,
  SS_STATUS_ERR_NULL_POINTER = 4,
  SS_STATUS_ERR_BUFFER_TOO_SMALL = 5,
  SS_STATUS_ERR_PANIC = 6,
} ss_status;

typedef enum ss_channel_mode {
  SS_CHANNEL_MODE_INDEPENDENT = 0,
  SS_CHANNEL_MODE_ORTHONORMAL = 1,
} ss_channel_mode;

typedef enum ss_detector {
  SS_DETECTOR_ST = 0,
  SS_DETECTOR_ER = 1,
  SS_DETECTOR_JOHN = 2,
  SS_DETECTOR_LE = 3,
  SS_DETECTOR_SLE = 4,
  SS_DETECTOR_ED = 5,
} ss_detector;

// Population covariance model (opaque).
typedef struct ss_model ss_model;

// ROC curve (opaque).
typedef struct ss_roc ss_roc;

// Moment-matched Beta law.
typedef struct ss_beta_params {
  double alpha;
  double beta;
} ss_beta_params;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread; empty after success.
// The pointer stays valid until the next library call on the same thread.
const char *ss_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ss_version(void);

// Threshold ζ with P_fa(ζ) = `pfa` for K sensors and N samples.
enum ss_status ss_threshold(size_t k, size_t n, double pfa, double *zeta_out);

// False-alarm probability of the rule "declare H1 when T < ζ".
enum ss_status ss_pfa(double zeta, size_t k, size_t n, double *pfa_out);

// Exact n-th moment of the statistic under H0.
enum ss_status ss_h0_moment(size_t k, size_t n, size_t order, double *moment_out);

enum ss_status ss_h0_beta(size_t k, size_t n, struct ss_beta_params *params_out);

// Exact null CDF for two sensors.
enum ss_status ss_h0_cdf_exact_k2(double y, size_t n, double *cdf_out);

// Exact null CDF for three sensors.
enum ss_status ss_h0_cdf_exact_k3(double y, size_t n, double *cdf_out);

// Exact H1 CDF for two sensors with population eigenvalues σ₁ ≥ σ₂ > 0.
enum ss_status ss_h1_cdf_exact_k2(double y,
                                  double sigma1,
                                  double sigma2,
                                  size_t n,
                                  double *cdf_out);

// Model with the given population eigenvalues (any order, all positive).
enum ss_status ss_model_from_eigenvalues(const double *eigs, size_t k, struct ss_model **model_out);

// Model `σ²(I + Σ snr_i u_i u_i^†)` with `p` channels drawn from `seed`.
enum ss_status ss_model_from_snrs(size_t k,
                                  double sigma2,
                                  const double *snrs_db,
                                  size_t p,
                                  enum ss_channel_mode mode,
                                  uint64_t seed,
                                  struct ss_model **model_out);

// Release a model; null is ignored.
void ss_model_free(struct ss_model *model);

// Number of sensors K, or 0 for a null handle.
size_t ss_model_k(const struct ss_model *model);

// Copy the K population eigenvalues (descending) into `eigs_out`.
enum ss_status ss_model_eigenvalues(const struct ss_model *model, double *eigs_out, size_t len);

// Gamma-fit n-th moment of the statistic under H1.
enum ss_status ss_h1_moment(const struct ss_model *model,
                            size_t n,
                            size_t order,
                            double *moment_out);

enum ss_status ss_h1_beta(const struct ss_model *model,
                          size_t n,
                          struct ss_beta_params *params_out);

// Detection probability at threshold ζ (exact for K = 2).
enum ss_status ss_pd(double zeta, const struct ss_model *model, size_t n, double *pd_out);

// Evaluate a detector statistic on K sample-covariance eigenvalues.
// Undefined statistics yield NaN; ER on a singular spectrum yields +inf.
enum ss_status ss_statistic(enum ss_detector detector,
                            const double *eigs,
                            size_t k,
                            double *value_out);

// Monte-Carlo sample of one detector statistic.
//
// With a null `model` the data are white noise of unit power (H0);
// otherwise they are drawn from `model`. Results depend only on `seed`.
enum ss_status ss_simulate(const struct ss_model *model,
                           size_t k,
                           size_t n,
                           enum ss_detector detector,
                           size_t trials,
                           uint64_t seed,
                           double *values_out,
                           size_t len);

// Analytic ROC on a strictly increasing false-alarm grid in (0, 1).
enum ss_status ss_roc_analytic(const struct ss_model *model,
                               size_t n,
                               const double *pfa_grid,
                               size_t len,
                               struct ss_roc **roc_out);

// Number of points on a ROC curve, or 0 for a null handle.
size_t ss_roc_len(const struct ss_roc *roc);

// Copy the curve into two arrays of at least `ss_roc_len` doubles.
enum ss_status ss_roc_points(const struct ss_roc *roc, double *pfa_out, double *pd_out, size_t len);

// Release a ROC curve; null is ignored.
void ss_roc_free(struct ss_roc *roc);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPHERICAL_SENSING_H */
