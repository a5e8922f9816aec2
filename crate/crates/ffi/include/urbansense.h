#ifndef URBANSENSE_H
#define URBANSENSE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a call.
 */
typedef enum UsStatus {
  US_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  US_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  US_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed JSON, CSV or timestamp input.
   */
  US_STATUS_INVALID_INPUT = 3,
  /**
   * The pipeline rejected the operation, e.g. an out-of-order message.
   */
  US_STATUS_PIPELINE = 4,
  /**
   * A bug inside the library; the handle should not be reused.
   */
  US_STATUS_PANIC = 5,
} UsStatus;

/**
 * Place index loaded from gazetteer CSV.
 */
typedef struct UsGazetteer UsGazetteer;

/**
 * Enrichment plus live analytics state.
 */
typedef struct UsPipeline UsPipeline;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, e.g. "0.1.0". Free with [`us_string_free`].
 */
char *us_version(void);

/**
 * Description of the last failure on this thread, or null if the last
 * call succeeded. Free with [`us_string_free`].
 */
char *us_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void us_string_free(char *s);

/**
 * Loads a gazetteer from CSV text.
 *
 * # Safety
 * `csv` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum UsStatus us_gazetteer_from_csv(const char *csv, struct UsGazetteer **out);

/**
 * # Safety
 * `g` must be null or a handle from [`us_gazetteer_from_csv`], not yet freed.
 */
void us_gazetteer_free(struct UsGazetteer *g);

/**
 * Toponyms in `text` as JSON: `{"matches":[...],"best":"id"|null}`.
 *
 * # Safety
 * `g` must be a live handle, `text` a NUL-terminated string and
 * `out_json` valid for writes.
 */
enum UsStatus us_gazetteer_geocode(const struct UsGazetteer *g, const char *text, char **out_json);

/**
 * Creates a pipeline from a JSON config, or the embedded defaults when
 * `config_json` is null.
 *
 * # Safety
 * `config_json` must be null or NUL-terminated; `out` valid for writes.
 */
enum UsStatus us_pipeline_new(const char *config_json, struct UsPipeline **out);

/**
 * # Safety
 * `p` must be null or a handle from [`us_pipeline_new`], not yet freed.
 */
void us_pipeline_free(struct UsPipeline *p);

/**
 * Enriches one message (event-log JSON) and feeds it to the analytics.
 * Writes `{"message": <enriched>, "events": [...]}`. `out_json` may be
 * null to discard the result.
 *
 * # Safety
 * `p` must be a live handle, `message_json` NUL-terminated and `out_json`
 * null or valid for writes.
 */
enum UsStatus us_pipeline_ingest(struct UsPipeline *p, const char *message_json, char **out_json);

/**
 * Closes the open window. Writes the resulting events as a JSON array.
 *
 * # Safety
 * `p` must be a live handle; `out_json` null or valid for writes.
 */
enum UsStatus us_pipeline_finish(struct UsPipeline *p, char **out_json);

/**
 * Heat surface JSON of the window containing `at` (ISO-8601 or epoch
 * seconds), or of the latest window when `at` is null.
 *
 * # Safety
 * `p` must be a live handle; `at` null or NUL-terminated; `out_json`
 * valid for writes.
 */
enum UsStatus us_pipeline_surface(const struct UsPipeline *p, const char *at, char **out_json);

/**
 * Exported analytics snapshot as JSON.
 *
 * # Safety
 * `p` must be a live handle; `out_json` valid for writes.
 */
enum UsStatus us_pipeline_snapshot(const struct UsPipeline *p, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* URBANSENSE_H */
