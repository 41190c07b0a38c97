#ifndef RFMASS_H
#define RFMASS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  RFM_STATUS_OK = 0,
  RFM_STATUS_NULL_POINTER = 1,
  RFM_STATUS_INVALID_ARGUMENT = 2,
  RFM_STATUS_CONFIG = 3,
  RFM_STATUS_CURVATURE_BLOW_UP = 4,
  RFM_STATUS_ASYMPTOTICS_VIOLATED = 5,
  RFM_STATUS_IO = 6,
  RFM_STATUS_NUMERICAL = 7,
  RFM_STATUS_BUFFER_TOO_SMALL = 8,
  RFM_STATUS_PANIC = 9,
} RfmStatus;

/**
 * A Ricci flow in progress.
 */
typedef struct RfmFlow RfmFlow;

/**
 * A metric sampled on a radial grid.
 */
typedef struct RfmMetric RfmMetric;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version string of the library; static, never freed.
 */
const char *rfm_version(void);

/**
 * Copy the calling thread's last error message into `buf` (NUL terminated,
 * truncated to `capacity`). Returns the full message length without the
 * terminator, or 0 when there is no error.
 *
 * # Safety
 * `buf` is null or points to `capacity` writable bytes.
 */
size_t rfm_last_error(char *buf, size_t capacity);

void rfm_clear_error(void);

/**
 * Build initial data from its JSON description (the `initial` table of an
 * experiment, e.g. `{"kind":"schwarzschild_slice","n":3,"amplitude":1}`)
 * on a compactified grid. Non-positive `r_min`, `r_max` or `scale` take
 * the defaults.
 *
 * # Safety
 * `spec_json` is a NUL-terminated string; `out` is a valid pointer.
 */
RfmStatus rfm_metric_new(const char *spec_json,
                         size_t nodes,
                         double r_min,
                         double r_max,
                         double scale,
                         RfmMetric **out);

/**
 * Load a metric snapshot (CSV with optional JSON sidecar).
 *
 * # Safety
 * `path` is a NUL-terminated string; `out` is a valid pointer.
 */
RfmStatus rfm_metric_read(const char *path, RfmMetric **out);

/**
 * # Safety
 * `metric` is a live handle; `path` is a NUL-terminated string.
 */
RfmStatus rfm_metric_write(const RfmMetric *metric, const char *path, double time);

/**
 * Number of grid nodes, 0 for a null handle.
 *
 * # Safety
 * `metric` is null or a live handle.
 */
size_t rfm_metric_nodes(const RfmMetric *metric);

/**
 * Copy radii and the warping functions `a`, `b` into caller buffers of
 * `len` entries each; any of them may be null.
 *
 * # Safety
 * `metric` is a live handle; non-null buffers hold `len` doubles.
 */
RfmStatus rfm_metric_samples(const RfmMetric *metric, double *r, double *a, double *b, size_t len);

/**
 * Extrapolated ADM mass and its uncertainty.
 *
 * # Safety
 * `metric` is a live handle; `mass` and `uncertainty` are null or valid.
 */
RfmStatus rfm_metric_adm_mass(const RfmMetric *metric, double *mass, double *uncertainty);

/**
 * # Safety
 * `metric` is a live handle; `out` is null or valid.
 */
RfmStatus rfm_metric_hawking_mass(const RfmMetric *metric, double r, double *out);

/**
 * # Safety
 * `metric` is null or a handle not yet freed.
 */
void rfm_metric_free(RfmMetric *metric);

/**
 * Start a flow at `t = 0` from a copy of `metric`.
 *
 * # Safety
 * `metric` is a live handle; `out` is a valid pointer.
 */
RfmStatus rfm_flow_new(const RfmMetric *metric, double blowup_factor, RfmFlow **out);

/**
 * Advance to `t_final`. On failure the flow keeps the last good state.
 *
 * # Safety
 * `flow` is a live handle.
 */
RfmStatus rfm_flow_evolve(RfmFlow *flow, double t_final, double cfl_safety);

/**
 * Current flow time, NaN for a null handle.
 *
 * # Safety
 * `flow` is null or a live handle.
 */
double rfm_flow_time(const RfmFlow *flow);

/**
 * # Safety
 * `flow` is null or a live handle.
 */
uint64_t rfm_flow_steps(const RfmFlow *flow);

/**
 * New metric handle holding a copy of the current metric.
 *
 * # Safety
 * `flow` is a live handle; `out` is a valid pointer.
 */
RfmStatus rfm_flow_metric(const RfmFlow *flow, RfmMetric **out);

/**
 * # Safety
 * `flow` is null or a handle not yet freed.
 */
void rfm_flow_free(RfmFlow *flow);

/**
 * Run an experiment given as TOML. With a non-null `output_dir` the run
 * artifacts are written there. `summary_json`, when non-null, receives the
 * run summary as JSON, released with [`rfm_string_free`]. A run that stops
 * early still fills the summary and reports its status.
 *
 * # Safety
 * `config_toml` is a NUL-terminated string; `output_dir` is null or one;
 * `summary_json` is null or valid.
 */
RfmStatus rfm_run_toml(const char *config_toml, const char *output_dir, char **summary_json);

/**
 * # Safety
 * `s` is null or a string returned by this library and not yet freed.
 */
void rfm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RFMASS_H */
