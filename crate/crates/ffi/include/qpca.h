#ifndef QPCA_H
#define QPCA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QpcaStatus {
  QPCA_STATUS_OK = 0,
  QPCA_STATUS_DIMENSION_ERROR = 1,
  QPCA_STATUS_NORMALIZATION_ERROR = 2,
  QPCA_STATUS_NOT_PROJECTOR_ERROR = 3,
  QPCA_STATUS_ZERO_PROBABILITY_ERROR = 4,
  QPCA_STATUS_DEGENERATE_SAMPLE_ERROR = 5,
  QPCA_STATUS_NUMERICAL_ERROR = 6,
  QPCA_STATUS_RANK_ERROR = 7,
  QPCA_STATUS_RANGE_ERROR = 8,
  QPCA_STATUS_MODEL_INTEGRITY_ERROR = 9,
  QPCA_STATUS_PARSE_ERROR = 10,
  QPCA_STATUS_FORMAT_ERROR = 11,
  QPCA_STATUS_VERSION_ERROR = 12,
  QPCA_STATUS_USAGE_ERROR = 13,
  QPCA_STATUS_IO_ERROR = 14,
  QPCA_STATUS_NULL_POINTER = 15,
  QPCA_STATUS_INVALID_UTF8 = 16,
  QPCA_STATUS_PANIC = 17,
} QpcaStatus;

// Opaque trained classifier.
typedef struct QpcaModel QpcaModel;

// Closed-form probabilities for one input.
typedef struct QpcaAnalytic {
  double likelihood;
  double per_trial_probability;
  uint64_t trials;
  double overall_yes_probability;
  double overall_no_probability;
  double input_norm;
} QpcaAnalytic;

// Outcome of the repeated-measurement protocol.
typedef struct QpcaClassification {
  // 1 for yes, 0 for no.
  int32_t decision;
  uint64_t trials_run;
  // Zero-based index of the first positive trial, or -1.
  int64_t positive_trial_index;
  double per_trial_probability;
  double analytic_overall_no_probability;
  uint64_t seed;
  double input_norm;
} QpcaClassification;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static nul-terminated string.
const char *qpca_version(void);

// Message for the last failing call on this thread, or null. Valid until
// the next failing call on the same thread.
const char *qpca_last_error_message(void);

// Static name of a status code, e.g. `"RankError"`.
const char *qpca_status_name(enum QpcaStatus status);

// Trains on `sample_count` row-major samples of `feature_count` values in
// `[0, 1]`. `components == 0` selects by the default variance threshold.
//
// # Safety
// `samples` must point to `sample_count * feature_count` readable doubles
// and `out` to writable storage for one pointer.
enum QpcaStatus qpca_model_train(const double *samples,
                                 size_t sample_count,
                                 size_t feature_count,
                                 size_t components,
                                 bool center,
                                 struct QpcaModel **out);

// # Safety
// `path` must be a nul-terminated string; `out` must be writable.
enum QpcaStatus qpca_model_load(const char *path, struct QpcaModel **out);

// Parses a model from its JSON text.
//
// # Safety
// `text` must be a nul-terminated string; `out` must be writable.
enum QpcaStatus qpca_model_from_json(const char *text, struct QpcaModel **out);

// # Safety
// `model` must come from this library; `path` must be a nul-terminated string.
enum QpcaStatus qpca_model_save(const struct QpcaModel *model, const char *path);

// Serializes the model; release the string with [`qpca_string_free`].
//
// # Safety
// `model` must come from this library; `out` must be writable.
enum QpcaStatus qpca_model_to_json(const struct QpcaModel *model, char **out);

// # Safety
// `text` must be null or a string returned by this library, freed once.
void qpca_string_free(char *text);

// # Safety
// `model` must be null or a handle from this library, freed once.
void qpca_model_free(struct QpcaModel *model);

// Pixel count `n`, or 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
size_t qpca_model_pixel_count(const struct QpcaModel *model);

// Component count `s`, or 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
size_t qpca_model_component_count(const struct QpcaModel *model);

// Block dimension `k`, or 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
size_t qpca_model_block_dim(const struct QpcaModel *model);

// # Safety
// `x` must point to `len` readable doubles; `out` must be writable.
enum QpcaStatus qpca_classical_likelihood(const struct QpcaModel *model,
                                          const double *x,
                                          size_t len,
                                          double *out);

// # Safety
// `x` must point to `len` readable doubles; `out` must be writable.
enum QpcaStatus qpca_yes_probability(const struct QpcaModel *model,
                                     const double *x,
                                     size_t len,
                                     double *out);

// `trials == 0` uses the model's `n^2`.
//
// # Safety
// `x` must point to `len` readable doubles; `out` must be writable.
enum QpcaStatus qpca_analyze(const struct QpcaModel *model,
                             const double *x,
                             size_t len,
                             uint64_t trials,
                             struct QpcaAnalytic *out);

// Runs the seeded protocol. `trials == 0` uses the model's `n^2`.
//
// # Safety
// `x` must point to `len` readable doubles; `out` must be writable.
enum QpcaStatus qpca_classify(const struct QpcaModel *model,
                              const double *x,
                              size_t len,
                              uint64_t seed,
                              uint64_t trials,
                              struct QpcaClassification *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QPCA_H */
