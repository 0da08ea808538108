#ifndef DEFORMED_BEC_H
#define DEFORMED_BEC_H

/* Generated by cbindgen. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DbecStatus {
  DBEC_STATUS_OK = 0,
  DBEC_STATUS_NULL_POINTER = 1,
  DBEC_STATUS_INVALID_PARAMS = 2,
  DBEC_STATUS_NO_CONVERGENCE = 3,
  DBEC_STATUS_UNSTABLE = 4,
  DBEC_STATUS_OVERFLOW = 5,
  DBEC_STATUS_DOMAIN = 6,
  DBEC_STATUS_SINGULAR_SOLVE = 7,
  DBEC_STATUS_TRUNCATION = 8,
  DBEC_STATUS_PANIC = 9,
} DbecStatus;

typedef enum DbecVariant {
  /**
   * `|B|^2 / |Xi|^2`
   */
  DBEC_VARIANT_PAPER = 0,
  /**
   * `2 Gamma |B|^2 / |Xi|^2`
   */
  DBEC_VARIANT_PHYSICAL = 1,
} DbecVariant;

/**
 * Opaque model handle.
 */
typedef struct DbecModel DbecModel;

typedef struct DbecComplex {
  double re;
  double im;
} DbecComplex;

typedef struct DbecSteadyState {
  struct DbecComplex beta;
  struct DbecComplex beta_inf;
  struct DbecComplex lambda1;
  struct DbecComplex lambda2;
  double scaled_residual;
  uint32_t iterations;
  bool stable;
} DbecSteadyState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a model with rates in arbitrary but consistent units.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one `DbecModel*`.
 */
enum DbecStatus dbec_model_new(double delta,
                               double g,
                               double gamma,
                               double n_atoms,
                               struct DbecModel **out);

/**
 * Overrides the deformation parameter, which otherwise equals `1/N`.
 *
 * # Safety
 * `model` must be a live handle.
 */
enum DbecStatus dbec_model_set_eta(struct DbecModel *model, double eta);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `model` must be null or a live handle not used again afterwards.
 */
void dbec_model_free(struct DbecModel *model);

/**
 * # Safety
 * `model` must be a live handle and `out` must point to writable storage.
 */
enum DbecStatus dbec_model_steady_state(struct DbecModel *model, struct DbecSteadyState *out);

/**
 * `||beta| - |beta_inf||` for the model's parameters.
 *
 * # Safety
 * `model` must be a live handle and `out` must point to writable storage.
 */
enum DbecStatus dbec_model_deviation(struct DbecModel *model, double *out);

/**
 * Evaluates the fluctuation spectrum at `len` frequencies. Fails with
 * `DBEC_STATUS_UNSTABLE` when the steady state is not an attractor.
 *
 * # Safety
 * `model` must be a live handle; `omega` and `out` must each point to `len`
 * valid `double`s (they may be null when `len` is 0).
 */
enum DbecStatus dbec_model_spectrum(struct DbecModel *model,
                                    enum DbecVariant variant,
                                    const double *omega,
                                    double *out,
                                    size_t len);

/**
 * Message for the last failure on this thread, or an empty string. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *dbec_last_error_message(void);

const char *dbec_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEFORMED_BEC_H */
