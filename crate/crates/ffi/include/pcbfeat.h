/* Generated by cbindgen; do not edit. */

#ifndef PCBFEAT_H
#define PCBFEAT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PcbStatus {
  PCB_STATUS_OK = 0,
  // Some images failed; the rest were processed.
  PCB_STATUS_PARTIAL = 1,
  PCB_STATUS_NULL_POINTER = 2,
  PCB_STATUS_INVALID_ARGUMENT = 3,
  PCB_STATUS_IO = 4,
  PCB_STATUS_FORMAT = 5,
  PCB_STATUS_CONFIG = 6,
  // All regions fall into a single target class.
  PCB_STATUS_DEGENERATE_TARGET = 7,
  // Output buffer too small.
  PCB_STATUS_BUFFER_TOO_SMALL = 8,
  PCB_STATUS_PANIC = 9,
} PcbStatus;

// Pipeline configuration.
typedef struct PcbConfig PcbConfig;

// Region-by-feature matrix with decile labels.
typedef struct PcbFeatureMatrix PcbFeatureMatrix;

// 8-bit RGB image.
typedef struct PcbImage PcbImage;

// Per-pixel component mask (non-zero = component).
typedef struct PcbMask PcbMask;

typedef struct PcbQuartiles {
  size_t count;
  double min;
  double lower_hinge;
  double median;
  double upper_hinge;
  double max;
} PcbQuartiles;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static string.
const char *pcb_version(void);

// Message of the last failed call on this thread, or NULL. Valid until the
// next call into the library on this thread.
const char *pcb_last_error(void);

// # Safety
// `s` must come from this library and not have been freed.
void pcb_string_free(char *s);

// Default configuration.
//
// # Safety
// `out` must be a valid pointer.
enum PcbStatus pcb_config_new(struct PcbConfig **out);

// Parses a JSON configuration; missing fields take defaults.
//
// # Safety
// `json` must be a nul-terminated string and `out` a valid pointer.
enum PcbStatus pcb_config_from_json(const char *json, struct PcbConfig **out);

// # Safety
// `config` must be a live handle and `out` a valid pointer.
enum PcbStatus pcb_config_to_json(const struct PcbConfig *config, char **out);

// # Safety
// `config` must be a live handle and `path` a nul-terminated string.
enum PcbStatus pcb_config_set_dataset(struct PcbConfig *config, const char *path);

// # Safety
// `config` must be a live handle and `path` a nul-terminated string.
enum PcbStatus pcb_config_set_output_dir(struct PcbConfig *config, const char *path);

// # Safety
// `config` must be a live handle.
enum PcbStatus pcb_config_set_seed(struct PcbConfig *config, uint64_t seed);

// Worker threads; 0 uses every core. Results do not depend on it.
//
// # Safety
// `config` must be a live handle.
enum PcbStatus pcb_config_set_jobs(struct PcbConfig *config, size_t jobs);

// # Safety
// `config` must be a live handle and `ksizes` point to `len` values.
enum PcbStatus pcb_config_set_ksizes(struct PcbConfig *config, const size_t *ksizes, size_t len);

// # Safety
// `config` must be NULL or a handle not yet freed.
void pcb_config_free(struct PcbConfig *config);

// Writes `count` synthetic boards, masks and `dataset.json` into `out_dir`.
//
// # Safety
// `out_dir` must be a nul-terminated string.
enum PcbStatus pcb_synth(const char *out_dir, size_t count, uint64_t seed);

// Runs extraction over the configured dataset. `failed` (optional) receives
// the number of skipped images; `PCB_STATUS_PARTIAL` is returned if any.
//
// # Safety
// `config` must be a live handle; `failed` NULL or valid.
enum PcbStatus pcb_extract(const struct PcbConfig *config, size_t *failed);

// Fits forests on the extracted CSVs and writes the importance reports.
//
// # Safety
// `config` must be a live handle; `failed` NULL or valid.
enum PcbStatus pcb_rank(const struct PcbConfig *config, size_t *failed);

// Text digest of a finished rank run.
//
// # Safety
// `output_dir` must be a nul-terminated string and `out` a valid pointer.
enum PcbStatus pcb_report(const char *output_dir, char **out);

// Copies `width * height * 3` interleaved RGB bytes.
//
// # Safety
// `rgb` must point to `width * height * 3` bytes and `out` be valid.
enum PcbStatus pcb_image_from_rgb(size_t width,
                                  size_t height,
                                  const uint8_t *rgb,
                                  struct PcbImage **out);

// # Safety
// `path` must be a nul-terminated string and `out` a valid pointer.
enum PcbStatus pcb_image_load(const char *path, struct PcbImage **out);

// # Safety
// `image` must be NULL or a handle not yet freed.
void pcb_image_free(struct PcbImage *image);

// Copies `width * height` mask bytes.
//
// # Safety
// `data` must point to `width * height` bytes and `out` be valid.
enum PcbStatus pcb_mask_from_raw(size_t width,
                                 size_t height,
                                 const uint8_t *data,
                                 struct PcbMask **out);

// # Safety
// `path` must be a nul-terminated string and `out` a valid pointer.
enum PcbStatus pcb_mask_load(const char *path, struct PcbMask **out);

// # Safety
// `mask` must be NULL or a handle not yet freed.
void pcb_mask_free(struct PcbMask *mask);

// Extracts the enabled feature families of one image at one ksize.
//
// # Safety
// Handles must be live and `out` a valid pointer.
enum PcbStatus pcb_features_extract(const struct PcbConfig *config,
                                    const struct PcbImage *image,
                                    const struct PcbMask *mask,
                                    size_t ksize,
                                    struct PcbFeatureMatrix **out);

// # Safety
// `m` must be a live handle or NULL (returns 0).
size_t pcb_features_rows(const struct PcbFeatureMatrix *m);

// # Safety
// `m` must be a live handle or NULL (returns 0).
size_t pcb_features_cols(const struct PcbFeatureMatrix *m);

// Column name, borrowed from the matrix; NULL when out of range.
//
// # Safety
// `m` must be a live handle or NULL.
const char *pcb_features_name(const struct PcbFeatureMatrix *m, size_t col);

// Copies the values row-major into `out`, which holds `len` doubles.
//
// # Safety
// `m` must be a live handle and `out` point to `len` writable doubles.
enum PcbStatus pcb_features_values(const struct PcbFeatureMatrix *m, double *out, size_t len);

// Copies the per-region decile labels (0..=10) into `out`.
//
// # Safety
// `m` must be a live handle and `out` point to `len` writable bytes.
enum PcbStatus pcb_features_labels(const struct PcbFeatureMatrix *m, uint8_t *out, size_t len);

// Fits a forest with the configuration's forest settings and seed and
// writes one normalized importance per column into `out`.
//
// # Safety
// Handles must be live and `out` point to `len` writable doubles.
enum PcbStatus pcb_features_importances(const struct PcbFeatureMatrix *m,
                                        const struct PcbConfig *config,
                                        double *out,
                                        size_t len);

// # Safety
// `m` must be NULL or a handle not yet freed.
void pcb_features_free(struct PcbFeatureMatrix *m);

// `1 - sum p^2` of a class distribution summing to 1.
//
// # Safety
// `p` must point to `len` doubles and `out` be valid.
enum PcbStatus pcb_gini_impurity(const double *p, size_t len, double *out);

// Five-number summary with Tukey hinges.
//
// # Safety
// `values` must point to `len` doubles and `out` be valid.
enum PcbStatus pcb_tukey_quartiles(const double *values, size_t len, struct PcbQuartiles *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PCBFEAT_H */
