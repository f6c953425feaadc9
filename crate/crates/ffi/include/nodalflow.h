/* C bindings for the nodalflow PDE evolution-operator library. */

#ifndef NODALFLOW_H
#define NODALFLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum NfStatus {
  NF_OK = 0,
  /**
   * A pointer argument was null.
   */
  NF_NULL_POINTER = 1,
  /**
   * A path argument was not valid UTF-8.
   */
  NF_INVALID_UTF8 = 2,
  /**
   * A buffer length disagreed with the model or dataset shape.
   */
  NF_SHAPE_MISMATCH = 3,
  /**
   * File missing, unreadable, or not a valid NPMC/NTDF payload.
   */
  NF_IO_ERROR = 4,
  /**
   * The operation produced non-finite values or otherwise failed
   * numerically.
   */
  NF_NUMERICAL_ERROR = 5,
  /**
   * Any other core-library error; see `nf_last_error_message`.
   */
  NF_INTERNAL_ERROR = 6,
} NfStatus;

/**
 * Opaque handle to a loaded trajectory dataset.
 */
typedef struct NfDataset NfDataset;

/**
 * Opaque handle to a loaded model checkpoint.
 */
typedef struct NfModel NfModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the message describing the most recent error on the calling
 * thread. The pointer stays valid until the next failing call on the
 * same thread; never free it.
 */
const char *nf_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *nf_version(void);

/**
 * Loads an NPMC checkpoint. On success writes a handle to `out` and
 * returns `NfOk`; the handle must be released with [`nf_model_free`].
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NfStatus nf_model_load(const char *path, struct NfModel **out);

/**
 * Releases a model handle. Passing null is a no-op.
 *
 * # Safety
 * `model` must come from [`nf_model_load`] and not be used afterwards.
 */
void nf_model_free(struct NfModel *model);

/**
 * State vector length the model consumes and produces (N).
 *
 * # Safety
 * `model` must be a live handle.
 */
uintptr_t nf_model_input_size(const struct NfModel *model);

/**
 * Total trainable parameter count.
 *
 * # Safety
 * `model` must be a live handle.
 */
uintptr_t nf_model_param_count(const struct NfModel *model);

/**
 * One model application: `output = N(input)`. Both buffers must hold
 * exactly `nf_model_input_size` doubles; they may alias.
 *
 * # Safety
 * `model`, `input` and `output` must be valid for `len` doubles.
 */
enum NfStatus nf_model_apply(const struct NfModel *model,
                             const double *input,
                             double *output,
                             uintptr_t len);

/**
 * Rolls the model out for `steps` applications from `ic` (length `len`,
 * must equal `nf_model_input_size`). Writes `(steps + 1) * len` doubles
 * to `output`, step-major, starting with the initial condition itself.
 * If the rollout blows up, the remaining steps are filled with NaN and
 * the 1-based index of the first bad step is written to `blowup_step`
 * (0 means no blowup; the pointer may be null if the caller does not
 * care).
 *
 * # Safety
 * `output` must be valid for `(steps + 1) * len` doubles.
 */
enum NfStatus nf_model_predict(const struct NfModel *model,
                               const double *ic,
                               uintptr_t len,
                               uintptr_t steps,
                               double dt,
                               double *output,
                               uintptr_t *blowup_step);

/**
 * Loads an NTDF dataset. The handle must be released with
 * [`nf_dataset_free`].
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NfStatus nf_dataset_load(const char *path, struct NfDataset **out);

/**
 * Releases a dataset handle. Passing null is a no-op.
 *
 * # Safety
 * `dataset` must come from [`nf_dataset_load`] and not be used afterwards.
 */
void nf_dataset_free(struct NfDataset *dataset);

/**
 * Trajectory count M; 0 for a null handle.
 *
 * # Safety
 * `dataset` must be a live handle.
 */
uintptr_t nf_dataset_len(const struct NfDataset *dataset);

/**
 * Steps per trajectory (each sequence has this many + 1 states).
 *
 * # Safety
 * `dataset` must be a live handle.
 */
uintptr_t nf_dataset_n_l(const struct NfDataset *dataset);

/**
 * Snapshot spacing in time.
 *
 * # Safety
 * `dataset` must be a live handle.
 */
double nf_dataset_dt(const struct NfDataset *dataset);

/**
 * State vector length (nodes x components).
 *
 * # Safety
 * `dataset` must be a live handle.
 */
uintptr_t nf_dataset_state_size(const struct NfDataset *dataset);

/**
 * Copies state `step` of trajectory `index` into `output` (length `len`
 * == `nf_dataset_state_size`).
 *
 * # Safety
 * `output` must be valid for `len` doubles.
 */
enum NfStatus nf_dataset_state(const struct NfDataset *dataset,
                               uintptr_t index,
                               uintptr_t step,
                               double *output,
                               uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NODALFLOW_H */
