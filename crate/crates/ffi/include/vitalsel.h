/* C ABI for the vitalsel feature-selection pipeline. Generated by cbindgen; do not edit. */

#ifndef VITALSEL_H
#define VITALSEL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible `vs_*` call.
 */
typedef enum VsStatus {
  /**
   * Success.
   */
  VsStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  VsStatus_NullPointer = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  VsStatus_Utf8 = 2,
  /**
   * A configuration value violates its documented range.
   */
  VsStatus_InvalidConfig = 3,
  /**
   * Input data is structurally broken (bad CSV, unknown labels, ...).
   */
  VsStatus_Data = 4,
  /**
   * A buffer or mask length does not match the feature table.
   */
  VsStatus_DimensionMismatch = 5,
  /**
   * An input was empty where rows were required.
   */
  VsStatus_EmptyInput = 6,
  /**
   * A signal was shorter than the operation requires.
   */
  VsStatus_TooShort = 7,
  /**
   * The operating system reported an I/O failure.
   */
  VsStatus_Io = 8,
  /**
   * An index argument was out of range.
   */
  VsStatus_OutOfRange = 9,
  /**
   * A panic was caught at the boundary; the error message describes it.
   */
  VsStatus_Panic = 10,
} VsStatus;

/**
 * Opaque handle to the Pareto archive produced by [`vs_select`].
 */
typedef struct VsArchive VsArchive;

/**
 * Opaque handle to an in-memory feature table (rows x named features).
 */
typedef struct VsFeatureTable VsFeatureTable;

/**
 * GA options for [`vs_select`]; obtain defaults from
 * [`vs_ga_options_default`] and override fields as needed.
 */
typedef struct VsGaOptions {
  /**
   * Master seed; drives the subject split, the GA, and every forest.
   */
  uint64_t seed;
  size_t population_size;
  size_t max_generations;
  /**
   * Per-pair probability of uniform crossover, in [0, 1].
   */
  double crossover_rate;
  /**
   * Per-bit mutation probability; any negative value selects the
   * 1/n_features default.
   */
  double mutation_rate;
  /**
   * Trees per forest during fitness evaluation.
   */
  size_t fitness_trees;
  /**
   * Swap the objectives: protect activity, expose identity.
   */
  bool suppress_activity;
  /**
   * Score masks with the PCA + k-NN surrogate instead of forests.
   */
  bool surrogate;
  /**
   * Scale crowding-distance gaps by each objective's front range.
   */
  bool normalized_crowding;
} VsGaOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string; do not free.
 */
const char *vs_version(void);

/**
 * Message describing the most recent failure on this thread, or null when
 * the last call succeeded. The caller owns the returned string; release it
 * with [`vs_string_free`].
 */
char *vs_last_error_message(void);

/**
 * Releases a string returned by this library. Tolerates null.
 *
 * # Safety
 * `s` must have been returned by a `vs_*` call and not freed already.
 */
void vs_string_free(char *s);

/**
 * Synthesizes the full subjects x activities x positions session grid and
 * extracts the feature catalog, returning a new table in `out`.
 *
 * # Safety
 * `out` must point to writable storage for one pointer.
 */
enum VsStatus vs_synthesize_features(uint64_t seed,
                                     size_t n_subjects,
                                     double duration_s,
                                     double sample_rate_hz,
                                     struct VsFeatureTable **out);

/**
 * Loads a feature table from a CSV written by [`vs_features_save_csv`] or
 * the `extract` CLI command.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` must point to writable storage for
 * one pointer.
 */
enum VsStatus vs_features_load_csv(const char *path, struct VsFeatureTable **out);

/**
 * Writes the table to CSV, one row per window with metadata columns.
 *
 * # Safety
 * `table` must be a live table handle; `path` must be NUL-terminated.
 */
enum VsStatus vs_features_save_csv(const struct VsFeatureTable *table, const char *path);

/**
 * Number of rows in the table; 0 when `table` is null.
 *
 * # Safety
 * `table` must be null or a live table handle.
 */
size_t vs_features_rows(const struct VsFeatureTable *table);

/**
 * Number of feature columns in the table; 0 when `table` is null.
 *
 * # Safety
 * `table` must be null or a live table handle.
 */
size_t vs_features_cols(const struct VsFeatureTable *table);

/**
 * Name of feature `index`, returned as a new string the caller must release
 * with [`vs_string_free`].
 *
 * # Safety
 * `table` must be a live table handle; `out` must point to writable storage
 * for one pointer.
 */
enum VsStatus vs_features_name(const struct VsFeatureTable *table, size_t index, char **out);

/**
 * Releases a table handle. Tolerates null.
 *
 * # Safety
 * `table` must be null or a live handle from this library, not freed twice.
 */
void vs_features_free(struct VsFeatureTable *table);

/**
 * The GA defaults used by the CLI: population 50, 30 generations, crossover
 * 0.9, 1/n mutation, 50-tree fitness forests, identity suppressed.
 */
struct VsGaOptions vs_ga_options_default(uint64_t seed);

/**
 * Runs multi-objective selection: derives the train/validation/test subject
 * split from `options.seed`, evolves masks on the train subjects with the
 * validation group held out, and returns the Pareto archive in `out`.
 *
 * # Safety
 * `table` and `options` must be live; `out` must point to writable storage
 * for one pointer.
 */
enum VsStatus vs_select(const struct VsFeatureTable *table,
                        const struct VsGaOptions *options,
                        struct VsArchive **out);

/**
 * Number of archive members; 0 when `archive` is null.
 *
 * # Safety
 * `archive` must be null or a live archive handle.
 */
size_t vs_archive_len(const struct VsArchive *archive);

/**
 * Index of the deployment pick (best trade-off objective, ties broken
 * toward higher recognition), or -1 when the archive is empty or null.
 *
 * # Safety
 * `archive` must be null or a live archive handle.
 */
ptrdiff_t vs_archive_picked(const struct VsArchive *archive);

/**
 * Copies the three objectives of member `index` into `out[0..3]`.
 *
 * # Safety
 * `archive` must be live; `out` must be valid for three writes.
 */
enum VsStatus vs_archive_objectives(const struct VsArchive *archive, size_t index, double *out);

/**
 * Copies member `index`'s mask into `out[0..len]` as 0/1 bytes; `len` must
 * equal the source table's feature count.
 *
 * # Safety
 * `archive` must be live; `out` must be valid for `len` writes.
 */
enum VsStatus vs_archive_mask(const struct VsArchive *archive,
                              size_t index,
                              uint8_t *out,
                              size_t len);

/**
 * Releases an archive handle. Tolerates null.
 *
 * # Safety
 * `archive` must be null or a live handle from this library, not freed twice.
 */
void vs_archive_free(struct VsArchive *archive);

/**
 * Leave-one-group-out evaluation of `mask` (null for all features) over
 * `repeats` reshuffles; writes micro-averaged accuracies. Pass null for
 * `identification_out` when only recognition is wanted.
 *
 * # Safety
 * `table` must be live; `mask` must be null or valid for `mask_len` reads;
 * `recognition_out` must be valid for one write, and `identification_out`
 * null or valid for one write.
 */
enum VsStatus vs_evaluate_logo(const struct VsFeatureTable *table,
                               const uint8_t *mask,
                               size_t mask_len,
                               size_t repeats,
                               uint64_t seed,
                               double *recognition_out,
                               double *identification_out);

/**
 * Recursive feature elimination down to `n_target` features, dropping
 * `step` per round, trained on the standardized train + validation rows of
 * the seed-derived split; writes the survivor mask into `out[0..len]`.
 *
 * # Safety
 * `table` must be live; `out` must be valid for `len` writes.
 */
enum VsStatus vs_rfe(const struct VsFeatureTable *table,
                     size_t n_target,
                     size_t step,
                     uint64_t seed,
                     uint8_t *out,
                     size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VITALSEL_H */
