#ifndef MATILDA_H
#define MATILDA_H

/* Generated by cbindgen from matilda-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call in this interface.
 */
typedef enum MatildaStatus {
  MATILDA_STATUS_OK = 0,
  /**
   * A required pointer was null.
   */
  MATILDA_STATUS_NULL_POINTER = 1,
  /**
   * Arguments violate a precondition (sizes, ranges, encodings).
   */
  MATILDA_STATUS_INVALID_INPUT = 2,
  /**
   * The statistic has no defined value for this input.
   */
  MATILDA_STATUS_NOT_COMPUTABLE = 3,
  /**
   * The file could not be read or parsed.
   */
  MATILDA_STATUS_IO = 4,
} MatildaStatus;

/**
 * Opaque corpus handle.
 */
typedef struct MatildaCorpus MatildaCorpus;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Gini coefficient of `len` nonnegative values.
 *
 * # Safety
 * `values` must point at `len` readable doubles; `out` must be writable.
 */
enum MatildaStatus matilda_gini(const double *values, uintptr_t len, double *out);

/**
 * Mann-Whitney U for two samples: the male-group U statistic and the
 * two-sided tie-corrected p-value.
 *
 * # Safety
 * Both sample pointers must cover their stated lengths; both out
 * pointers must be writable.
 */
enum MatildaStatus matilda_mann_whitney_u(const double *male,
                                          uintptr_t male_len,
                                          const double *female,
                                          uintptr_t female_len,
                                          double *u_out,
                                          double *p_out);

/**
 * Cliff's d effect size; positive values mean the first (male) sample
 * dominates.
 *
 * # Safety
 * As for [`matilda_mann_whitney_u`].
 */
enum MatildaStatus matilda_cliffs_d(const double *male,
                                    uintptr_t male_len,
                                    const double *female,
                                    uintptr_t female_len,
                                    double *out);

/**
 * h-index of per-publication citation counts.
 *
 * # Safety
 * `counts` must point at `len` readable u64 values; `out` writable.
 */
enum MatildaStatus matilda_h_index(const uint64_t *counts, uintptr_t len, uint64_t *out);

/**
 * Scaling-law fit with automatic lower-cutoff estimation over
 * (x_prev, x_now) pairs: ln(x_now) ≈ intercept + beta·ln(x_prev) for
 * x_prev ≥ x_min. `bins` of zero uses the default binning (20).
 *
 * # Safety
 * `x_prev` and `x_now` must each cover `len` readable doubles; the five
 * out pointers must be writable.
 */
enum MatildaStatus matilda_fit_scaling(const double *x_prev,
                                       const double *x_now,
                                       uintptr_t len,
                                       uint32_t bins,
                                       uint32_t min_pairs,
                                       double *beta_out,
                                       double *intercept_out,
                                       double *x_min_out,
                                       double *r2_out,
                                       uint64_t *n_obs_out);

/**
 * Load a corpus snapshot (the `corpus.json` the CLI writes) into an
 * opaque handle. On success the handle must be released with
 * [`matilda_corpus_free`].
 *
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
 */
enum MatildaStatus matilda_corpus_load_snapshot(const char *path, struct MatildaCorpus **out);

/**
 * Release a corpus handle. Null is a no-op.
 *
 * # Safety
 * `handle` must come from [`matilda_corpus_load_snapshot`] and must not
 * be used afterwards.
 */
void matilda_corpus_free(struct MatildaCorpus *handle);

/**
 * Basic corpus counts.
 *
 * # Safety
 * `handle` must be a live corpus handle; out pointers must be writable.
 */
enum MatildaStatus matilda_corpus_counts(const struct MatildaCorpus *handle,
                                         uint64_t *publications_out,
                                         uint64_t *authors_out,
                                         uint64_t *citations_out);

/**
 * Gini per career age for one cohort. `measure` 0 counts publications,
 * 1 citations; `window` 0 counts cumulatively, otherwise it is the
 * backward window width. Writes 15 values and 15 presence flags
 * (absent ages carry no defined value).
 *
 * # Safety
 * `handle` must be live; `values_out` and `present_out` must each cover
 * 15 writable slots.
 */
enum MatildaStatus matilda_corpus_gini_series(const struct MatildaCorpus *handle,
                                              int32_t cohort,
                                              uint32_t measure,
                                              uint32_t window,
                                              bool first_author_only,
                                              bool dropouts_removed,
                                              double *values_out,
                                              bool *present_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MATILDA_H */
