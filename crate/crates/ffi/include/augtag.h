#ifndef AUGTAG_H
#define AUGTAG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every fallible call.
 */
typedef enum AugtagStatus {
  AUGTAG_STATUS_OK = 0,
  AUGTAG_STATUS_NULL_POINTER = 1,
  AUGTAG_STATUS_INVALID_UTF8 = 2,
  AUGTAG_STATUS_IO = 3,
  AUGTAG_STATUS_INVALID_ARGUMENT = 4,
  AUGTAG_STATUS_INVALID_MODEL = 5,
  AUGTAG_STATUS_BUFFER_TOO_SMALL = 6,
  AUGTAG_STATUS_PANIC = 7,
} AugtagStatus;

/*
 Opaque handle to a loaded model archive.
 */
typedef struct AugtagModel AugtagModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Loads an archive written by `augtag train-base` or `augtag train-dat`.

 # Safety
 `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum AugtagStatus augtag_model_load(const char *path, struct AugtagModel **out);

/*
 Releases a handle. Null is ignored.

 # Safety
 `model` must come from [`augtag_model_load`] and not be used afterwards.
 */
void augtag_model_free(struct AugtagModel *model);

/*
 Number of labels, or 0 for a null handle.

 # Safety
 `model` must be null or a live handle.
 */
size_t augtag_model_num_labels(const struct AugtagModel *model);

/*
 Whether the archive holds an augmented tagger. Without one, tagging
 returns the base tagger's labels.

 # Safety
 `model` must be null or a live handle.
 */
bool augtag_model_has_dat(const struct AugtagModel *model);

/*
 Copies the NUL-terminated name of label `id` into `buf`.

 `*needed` (if non-null) receives the required size including the
 terminator; a short buffer fails with `AUGTAG_STATUS_BUFFER_TOO_SMALL`
 and is left untouched.

 # Safety
 `buf` must hold `buf_len` writable bytes, or be null when `buf_len` is 0.
 */
enum AugtagStatus augtag_model_label_name(const struct AugtagModel *model,
                                          uint32_t id,
                                          char *buf,
                                          size_t buf_len,
                                          size_t *needed);

/*
 Base-tagger distributions for one sentence, written row-major into
 `out` (`num_words * num_labels` values).

 # Safety
 `words` must point to `num_words` NUL-terminated strings and `out` to
 `out_len` writable doubles.
 */
enum AugtagStatus augtag_model_distribution(const struct AugtagModel *model,
                                            const char *const *words,
                                            size_t num_words,
                                            double *out,
                                            size_t out_len);

/*
 Tags one sentence. Tokens whose top base probability is below
 `threshold` are relabelled by the augmented tagger when the archive has
 one.

 `labels` receives `num_words` label ids. `relabelled` (nullable) receives
 1 for tokens labelled by the augmented tagger and 0 otherwise.

 # Safety
 `words` must point to `num_words` NUL-terminated strings; `labels`, and
 `relabelled` when non-null, must hold `num_words` writable elements.
 */
enum AugtagStatus augtag_model_tag(const struct AugtagModel *model,
                                   const char *const *words,
                                   size_t num_words,
                                   double threshold,
                                   uint32_t *labels,
                                   uint8_t *relabelled);

/*
 Reward for moving to the label encoded by `o_state` when the truth is
 `o_true` and the base distribution is `p`; all three have length `len`.

 # Safety
 The three inputs must hold `len` doubles and `out` must be writable.
 */
enum AugtagStatus augtag_reward(const double *o_true,
                                const double *o_state,
                                const double *p,
                                size_t len,
                                double epsilon,
                                double *out);

/*
 Message for the most recent failure on this thread, or null after a
 success. Valid until the next call on the same thread.
 */
const char *augtag_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *augtag_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AUGTAG_H */
