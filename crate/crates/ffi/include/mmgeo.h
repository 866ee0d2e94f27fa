#ifndef MMGEO_H
#define MMGEO_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes; the non-zero values below 5 match the CLI exit codes.
typedef enum MmgeoStatus {
  MMGEO_STATUS_OK = 0,
  MMGEO_STATUS_CONFIG_ERROR = 2,
  MMGEO_STATUS_NUMERICAL_ERROR = 3,
  MMGEO_STATUS_IO_ERROR = 4,
  MMGEO_STATUS_NULL_POINTER = 5,
  MMGEO_STATUS_INVALID_ARGUMENT = 6,
  MMGEO_STATUS_PANIC = 7,
} MmgeoStatus;

// Opaque model handle.
typedef struct MmgeoModel MmgeoModel;

typedef struct MmgeoAnalysis {
  double n_r_exact;
  // NaN under uniform building orientation, where no closed form exists.
  double n_r_closed;
  double pl_db_exact;
  double pl_db_closed;
  // Delay statistics in seconds and hertz; NaN when undefined.
  double tau_mean;
  double tau_rms;
  double coherence_bw;
} MmgeoAnalysis;

typedef struct MmgeoSimulation {
  size_t realizations;
  double n_r_mean;
  double n_r_se;
  double pl_db;
  double pl_db_se;
  double tau_rms;
  double rejection_rate;
} MmgeoSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create a model with the default deployment.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum MmgeoStatus mmgeo_model_default(struct MmgeoModel **out);

// Create a model from `key = value` configuration text.
//
// # Safety
// `text` must be a NUL-terminated string and `out` writable storage for one handle.
enum MmgeoStatus mmgeo_model_from_config(const char *text, struct MmgeoModel **out);

// Release a model. Null is ignored.
//
// # Safety
// `m` must be null or a handle obtained from this library and not yet freed.
void mmgeo_model_free(struct MmgeoModel *m);

// Assign one configuration key. The model is left unchanged on failure.
//
// # Safety
// `m` must be a live handle; `key` and `value` NUL-terminated strings.
enum MmgeoStatus mmgeo_model_set(struct MmgeoModel *m, const char *key, const char *value);

// Canonical configuration text of a model, to be released with [`mmgeo_string_free`].
//
// # Safety
// `m` must be a live handle and `out` writable storage for one pointer.
enum MmgeoStatus mmgeo_model_serialize(const struct MmgeoModel *m, char **out);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void mmgeo_string_free(char *s);

// Analytic counts, path loss and delay statistics.
//
// # Safety
// `m` must be a live handle and `out` a writable [`MmgeoAnalysis`].
enum MmgeoStatus mmgeo_analyze(const struct MmgeoModel *m, struct MmgeoAnalysis *out);

// Monte Carlo estimates over `realizations` seeded scenes.
//
// # Safety
// `m` must be a live handle and `out` a writable [`MmgeoSimulation`].
enum MmgeoStatus mmgeo_simulate(const struct MmgeoModel *m,
                                uint64_t seed,
                                size_t realizations,
                                struct MmgeoSimulation *out);

// Evaluate the power delay profile (1/s) at `n` delays (s).
//
// # Safety
// `tau` and `out` must each point to `n` doubles; they may be null only when `n` is 0.
enum MmgeoStatus mmgeo_pdp(const struct MmgeoModel *m, const double *tau, size_t n, double *out);

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next library call on the same thread.
const char *mmgeo_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *mmgeo_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MMGEO_H */
