/* C interface to the soliton metrology library. */

#ifndef SOLITON_METROLOGY_H
#define SOLITON_METROLOGY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every FFI call.
 */
typedef enum SmStatus {
  /**
   * Success.
   */
  SM_OK = 0,
  /**
   * File or stream failure.
   */
  SM_ERR_IO = 1,
  /**
   * Invalid configuration or parameter outside its physical domain.
   */
  SM_ERR_CONFIG = 2,
  /**
   * The requested model is not valid or carries no information.
   */
  SM_ERR_MODEL = 3,
  /**
   * A numerical result did not converge to the requested precision.
   */
  SM_ERR_PRECISION = 4,
  /**
   * Null pointer, zero-length buffer, invalid enum value, or panic.
   */
  SM_ERR_INVALID = 5,
} SmStatus;

/**
 * Measurement model selector.
 */
typedef enum SmModelKind {
  /**
   * Independent Poisson pixel counts.
   */
  SM_MODEL_POISSON = 0,
  /**
   * Independent Gaussian counts with Poisson variances.
   */
  SM_MODEL_GAUSSIAN_DIAGONAL = 1,
  /**
   * Full quantum model with correlated pixel covariance.
   */
  SM_MODEL_BOGOLIUBOV = 2,
} SmModelKind;

/**
 * Estimator gain selector.
 */
typedef enum SmGainKind {
  /**
   * Optimal for independent Poisson counts; attains that bound.
   */
  SM_GAIN_OPTIMAL = 0,
  /**
   * Hand-tuned dip-weighting profile.
   */
  SM_GAIN_TUNED_DIP = 1,
  /**
   * Matched filter for the correlated Gaussian model.
   */
  SM_GAIN_MATCHED_FILTER = 2,
} SmGainKind;

/**
 * Opaque pixel-count measurement model (means plus covariance).
 */
typedef struct SmCountModel SmCountModel;

/**
 * Opaque condensate-plus-soliton description.
 */
typedef struct SmSystem SmSystem;

/**
 * Fisher information of the soliton position and its breakdown.
 */
typedef struct SmFisher {
  /**
   * Fisher information, units 1/length^2.
   */
  double fisher;
  /**
   * Cramer-Rao bound on the position variance, 1/fisher.
   */
  double crlb;
  /**
   * Contribution of the position dependence of the mean counts.
   */
  double mean_term;
  /**
   * Contribution of the position dependence of the covariance.
   */
  double cov_term;
} SmFisher;

/**
 * Summary of a Monte-Carlo estimator benchmark.
 */
typedef struct SmTrialReport {
  uint64_t trials;
  /**
   * Mean position estimate.
   */
  double mean;
  /**
   * Mean estimate minus the true position.
   */
  double bias;
  /**
   * Standard error of the mean.
   */
  double mean_std_error;
  /**
   * Unbiased sample variance of the estimates.
   */
  double variance;
  /**
   * Standard error of the sample variance.
   */
  double variance_std_error;
} SmTrialReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *sm_version(void);

/**
 * Message of the last failure on this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *sm_last_error_message(void);

/**
 * Create a system from explicit physical constants: action scale,
 * atomic mass, 1D interaction strength, linear density, box length, and
 * soliton position. On success `*out` owns the new handle.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SmStatus sm_system_new(double hbar,
                            double mass,
                            double interaction,
                            double density,
                            double box_length,
                            double position,
                            struct SmSystem **out);

/**
 * Create a system in soliton units from the dimensionless density
 * n*xi, the box length and soliton position in healing lengths.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SmStatus sm_system_new_dimensionless(double n_xi,
                                          double box_length_xi,
                                          double position_xi,
                                          struct SmSystem **out);

/**
 * Release a system handle. Null is ignored.
 *
 * # Safety
 * `system` must be null or a handle from `sm_system_new*`, not yet freed.
 */
void sm_system_free(struct SmSystem *system);

/**
 * Derived scales: healing length, inverse soliton width, chemical
 * potential, sound speed. Any out pointer may be null to skip it.
 *
 * # Safety
 * `system` must be a valid handle.
 */
enum SmStatus sm_system_scales(const struct SmSystem *system,
                               double *out_xi,
                               double *out_kappa,
                               double *out_mu,
                               double *out_sound_speed);

/**
 * Ideal-resolution Poisson Fisher information,
 * 16 sqrt(m g) n^(3/2) / (3 hbar).
 *
 * # Safety
 * `system` must be a valid handle and `out` a valid pointer.
 */
enum SmStatus sm_fisher_poisson_closed(const struct SmSystem *system, double *out);

/**
 * Fisher information of independent Poisson pixel counts on a uniform
 * grid of `m_px` pixels of width `dx` starting at `x0`.
 *
 * # Safety
 * `system` must be a valid handle and `out` a valid pointer.
 */
enum SmStatus sm_fisher_poisson_pixelated(const struct SmSystem *system,
                                          double x0,
                                          double dx,
                                          size_t m_px,
                                          struct SmFisher *out);

/**
 * Fisher information of independent Gaussian counts with Poisson
 * variances on the same grid convention as the Poisson variant.
 *
 * # Safety
 * `system` must be a valid handle and `out` a valid pointer.
 */
enum SmStatus sm_fisher_gaussian_diagonal(const struct SmSystem *system,
                                          double x0,
                                          double dx,
                                          size_t m_px,
                                          struct SmFisher *out);

/**
 * Fisher information of the full quantum (Bogoliubov) count model with
 * default numerical options.
 *
 * # Safety
 * `system` must be a valid handle and `out` a valid pointer.
 */
enum SmStatus sm_fisher_bogoliubov(const struct SmSystem *system,
                                   double x0,
                                   double dx,
                                   size_t m_px,
                                   struct SmFisher *out);

/**
 * Build a pixel-count measurement model (means plus covariance) on a
 * uniform grid. On success `*out` owns the new handle.
 *
 * # Safety
 * `system` must be a valid handle and `out` a valid pointer.
 */
enum SmStatus sm_count_model_new(const struct SmSystem *system,
                                 double x0,
                                 double dx,
                                 size_t m_px,
                                 enum SmModelKind kind,
                                 struct SmCountModel **out);

/**
 * Release a count-model handle. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle from `sm_count_model_new`, not freed.
 */
void sm_count_model_free(struct SmCountModel *model);

/**
 * Number of pixels of the count model.
 *
 * # Safety
 * `model` must be a valid handle and `out` a valid pointer.
 */
enum SmStatus sm_count_model_pixels(const struct SmCountModel *model, size_t *out);

/**
 * Copy the mean pixel counts into `buf` (`len` must equal the pixel
 * count).
 *
 * # Safety
 * `model` must be a valid handle; `buf` must point to `len` doubles.
 */
enum SmStatus sm_count_model_mean(const struct SmCountModel *model, double *buf, size_t len);

/**
 * Copy the pixel covariance, row major, into `buf` (`len` must equal the
 * squared pixel count).
 *
 * # Safety
 * `model` must be a valid handle; `buf` must point to `len` doubles.
 */
enum SmStatus sm_count_model_covariance(const struct SmCountModel *model, double *buf, size_t len);

/**
 * Simulate `trials` measurements of the count model and estimate the
 * soliton position in each with the selected gain; summary statistics
 * are written to `out`.
 *
 * # Safety
 * `model` must be a valid handle and `out` a valid pointer.
 */
enum SmStatus sm_simulate(const struct SmCountModel *model,
                          enum SmGainKind gain,
                          uint64_t seed,
                          uint64_t trials,
                          struct SmTrialReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOLITON_METROLOGY_H */
