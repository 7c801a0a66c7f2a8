#ifndef CHLORA_H
#define CHLORA_H

/* Generated by cbindgen from the chlora-ffi crate. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of a fallible call.
//
// Values 1..=11 map one-to-one onto the library's error classes; the
// remaining values are produced by the binding layer itself.
typedef enum {
  // The call succeeded; out-parameters are valid.
  CHLORA_STATUS_OK = 0,
  // An argument is out of its documented range.
  CHLORA_STATUS_ARGUMENT = 1,
  // Input data does not match the expected schema.
  CHLORA_STATUS_SCHEMA = 2,
  // Shapes or georeferencing of two objects disagree.
  CHLORA_STATUS_DIMENSION = 3,
  // A value is outside the mathematical domain of the operation.
  CHLORA_STATUS_DOMAIN = 4,
  // A byte stream is not a valid instance of a file format.
  CHLORA_STATUS_FORMAT = 5,
  // A file's declared and actual sizes disagree.
  CHLORA_STATUS_LENGTH = 6,
  // A numeric or structural field failed to parse.
  CHLORA_STATUS_PARSE = 7,
  // A file declares an unsupported format version.
  CHLORA_STATUS_VERSION = 8,
  // A linear system is numerically singular.
  CHLORA_STATUS_RANK = 9,
  // The operation is invalid for the object's current state.
  CHLORA_STATUS_STATE = 10,
  // An underlying I/O operation failed.
  CHLORA_STATUS_IO = 11,
  // A required pointer argument was NULL.
  CHLORA_STATUS_NULL_POINTER = 12,
  // A string argument was not valid UTF-8.
  CHLORA_STATUS_UTF8 = 13,
  // An internal panic was caught; this indicates a library bug.
  CHLORA_STATUS_PANIC = 14,
} ChloraStatus;

// Opaque handle to a fitted estimator.
typedef struct ChloraModel ChloraModel;

// Opaque handle to an in-memory table of labelled reflectance samples.
typedef struct ChloraTable ChloraTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string. Never NULL; do not
// free.
const char *chlora_version(void);

// Stable lowercase name of a status code ("ok", "argument", ...). Static;
// do not free.
const char *chlora_status_name(ChloraStatus status);

// Description of the most recent failure on the calling thread, or an
// empty string if none. The pointer stays valid until the next failing
// call on the same thread; do not free.
const char *chlora_last_error_message(void);

// Read a sample-table CSV file into a new table handle.
//
// On success writes the handle to `out`; release it with
// [`chlora_table_free`].
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
ChloraStatus chlora_table_read_csv(const char *path, ChloraTable **out);

// Parse sample-table CSV text into a new table handle.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
ChloraStatus chlora_table_parse_csv(const char *text, ChloraTable **out);

// Build a table handle from dense arrays.
//
// `rrs` holds `n_rows * 6` doubles, row-major, in canonical band order
// (412, 443, 490, 510, 555, 670 nm). `chl` may be NULL (no row has a
// target) or hold `n_rows` doubles where NaN marks a missing target.
//
// # Safety
// `rrs` and `chl` must cover the lengths described above (`rrs` may be
// NULL only when `n_rows` is 0); `out` must be a valid pointer.
ChloraStatus chlora_table_from_rows(const double *rrs,
                                    const double *chl,
                                    size_t n_rows,
                                    ChloraTable **out);

// Write a table to a CSV file.
//
// # Safety
// `table` must be a live handle and `path` a NUL-terminated string.
ChloraStatus chlora_table_write_csv(const ChloraTable *table, const char *path);

// Number of rows in a table; 0 for NULL.
//
// # Safety
// `table` must be NULL or a live handle.
size_t chlora_table_len(const ChloraTable *table);

// Copy one row out of a table.
//
// Writes six doubles to `rrs_out` in canonical band order. `chl_out` may
// be NULL; otherwise it receives the target, or NaN when the row has
// none.
//
// # Safety
// `table` must be a live handle; `rrs_out` must have room for six
// doubles.
ChloraStatus chlora_table_get(const ChloraTable *table,
                              size_t row,
                              double *rrs_out,
                              double *chl_out);

// Serialize a table to CSV text.
//
// On success writes a NUL-terminated string to `out_csv`; release it
// with [`chlora_string_free`].
//
// # Safety
// `table` must be a live handle and `out_csv` a valid pointer.
ChloraStatus chlora_table_to_csv(const ChloraTable *table, char **out_csv);

// Release a table handle. NULL is ignored.
//
// # Safety
// `table` must be NULL or an owned handle not freed before.
void chlora_table_free(ChloraTable *table);

// Fit an estimator described by a JSON spec on a fully labelled table.
//
// The spec is a flat JSON object tagged by `"model"`, e.g.
// `{"model": "ridge", "lambda": 1.0}` or
// `{"model": "forest", "n_estimators": 100, "max_features": 2,
// "bootstrap": true, "max_depth": null, "min_samples_split": 2,
// "seed": 42}`. `seed` (default 42) and `log_chl` (default false) are
// optional on every model. On success writes a model handle to `out`;
// release it with [`chlora_model_free`].
//
// # Safety
// `table` must be a live handle, `spec_json` a NUL-terminated string,
// and `out` a valid pointer.
ChloraStatus chlora_fit(const ChloraTable *table, const char *spec_json, ChloraModel **out);

// Fit an estimator kind with its default hyperparameters.
//
// `kind` is one of "linear", "ridge", "tree", "bagging", "forest",
// "extra_trees", "svr", "knn".
//
// # Safety
// `table` must be a live handle, `kind` a NUL-terminated string, and
// `out` a valid pointer.
ChloraStatus chlora_fit_default(const ChloraTable *table, const char *kind, ChloraModel **out);

// Kind name of a fitted model ("linear", ..., "knn") as a static string.
// Returns NULL for a NULL model; do not free.
//
// # Safety
// `model` must be NULL or a live handle.
const char *chlora_model_kind(const ChloraModel *model);

// Predict chlorophyll-a (mg/m^3) for one spectrum of six reflectances in
// canonical band order.
//
// # Safety
// `model` must be a live handle, `rrs` must hold six doubles, and
// `out_chl` must be a valid pointer.
ChloraStatus chlora_model_predict(const ChloraModel *model, const double *rrs, double *out_chl);

// Predict chlorophyll-a for `n_rows` spectra.
//
// `rrs` holds `n_rows * 6` doubles, row-major; `out_chl` receives
// `n_rows` doubles. On failure the contents of `out_chl` are
// unspecified.
//
// # Safety
// `model` must be a live handle; `rrs` and `out_chl` must cover the
// lengths described above (they may be NULL only when `n_rows` is 0).
ChloraStatus chlora_model_predict_batch(const ChloraModel *model,
                                        const double *rrs,
                                        size_t n_rows,
                                        double *out_chl);

// Predict a chlorophyll plane for a grid-stack file.
//
// Reads the stack at `input_path`, predicts every pixel with all six
// bands present, and writes a chlorophyll-only stack (same geometry,
// fill value, and time window) to `output_path`.
//
// # Safety
// `model` must be a live handle; both paths must be NUL-terminated
// strings.
ChloraStatus chlora_model_predict_grid_file(const ChloraModel *model,
                                            const char *input_path,
                                            const char *output_path);

// Write a fitted model to a JSON model file.
//
// # Safety
// `model` must be a live handle and `path` a NUL-terminated string.
ChloraStatus chlora_model_write(const ChloraModel *model, const char *path);

// Read a fitted model from a JSON model file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
ChloraStatus chlora_model_read(const char *path, ChloraModel **out);

// Serialize a fitted model to JSON text.
//
// On success writes a NUL-terminated string to `out_json`; release it
// with [`chlora_string_free`].
//
// # Safety
// `model` must be a live handle and `out_json` a valid pointer.
ChloraStatus chlora_model_to_json(const ChloraModel *model, char **out_json);

// Deserialize a fitted model from JSON text.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
ChloraStatus chlora_model_from_json(const char *json, ChloraModel **out);

// Release a model handle. NULL is ignored.
//
// # Safety
// `model` must be NULL or an owned handle not freed before.
void chlora_model_free(ChloraModel *model);

// Release a string returned through an out-parameter. NULL is ignored.
//
// # Safety
// `s` must be NULL or a string obtained from this API and not freed
// before.
void chlora_string_free(char *s);

// Evaluate the maximum-band-ratio baseline on one spectrum.
//
// `rrs` holds six reflectances in canonical band order. `coeffs` selects
// the polynomial: NULL or "paper" for the default set, "canonical" for
// the OC4v4 set with cubic term 0.649, or an inline JSON object
// `{"a": [...], "numerator": [443, 490, 510], "denominator": 555}`.
//
// # Safety
// `rrs` must hold six doubles, `coeffs` must be NULL or a
// NUL-terminated string, and `out_chl` must be a valid pointer.
ChloraStatus chlora_baseline_chl(const double *rrs, const char *coeffs, double *out_chl);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHLORA_H */
