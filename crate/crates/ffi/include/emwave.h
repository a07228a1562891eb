#ifndef EMWAVE_H
#define EMWAVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result codes. Values 2 and above equal the CLI exit codes of the same
// error class.
typedef enum EmwaveStatus {
  EMWAVE_STATUS_OK = 0,
  // Null pointer, bad UTF-8 or out-of-range index.
  EMWAVE_STATUS_INVALID_ARGUMENT = 1,
  EMWAVE_STATUS_NOT_FOUND = 2,
  EMWAVE_STATUS_IO = 3,
  EMWAVE_STATUS_PARSE = 4,
  EMWAVE_STATUS_VALIDATION = 5,
  EMWAVE_STATUS_INVALID_PARAMETER = 6,
  EMWAVE_STATUS_CONFIG = 7,
  EMWAVE_STATUS_INFEASIBLE_PENETRATION = 8,
  EMWAVE_STATUS_NO_CONVERGENCE = 9,
  EMWAVE_STATUS_NUMERICAL_BLOWUP = 10,
  EMWAVE_STATUS_INVALID_DISTURBANCE = 11,
  EMWAVE_STATUS_UNKNOWN_SENSOR_BUS = 12,
  EMWAVE_STATUS_NO_CROSSING = 13,
  EMWAVE_STATUS_INSUFFICIENT_BASELINE = 14,
  EMWAVE_STATUS_TOO_FEW_ARRIVALS = 15,
  EMWAVE_STATUS_EMPTY_SAMPLES = 16,
  EMWAVE_STATUS_DEGENERATE_FIELD = 17,
  EMWAVE_STATUS_TIME_OUT_OF_RANGE = 18,
  EMWAVE_STATUS_INSUFFICIENT_CELLS = 19,
  EMWAVE_STATUS_ZERO_VARIANCE = 20,
  EMWAVE_STATUS_EMPTY_REGION = 21,
  // A Rust panic was caught at the boundary.
  EMWAVE_STATUS_INTERNAL = 100,
} EmwaveStatus;

// Threshold detection mode for [`emwave_detect`].
typedef enum EmwaveThresholdMode {
  EMWAVE_THRESHOLD_MODE_ABSOLUTE = 0,
  EMWAVE_THRESHOLD_MODE_RELATIVE = 1,
} EmwaveThresholdMode;

typedef struct EmwaveField EmwaveField;

typedef struct EmwaveNetwork EmwaveNetwork;

typedef struct EmwaveTdoa EmwaveTdoa;

typedef struct EmwaveTraces EmwaveTraces;

typedef struct EmwaveTrajectory EmwaveTrajectory;

// Node-centred raster bounds; `nx`, `ny` ≥ 2.
typedef struct EmwaveGrid {
  double x_min;
  double x_max;
  double y_min;
  double y_max;
  size_t nx;
  size_t ny;
} EmwaveGrid;

typedef struct EmwaveLocation {
  double x;
  double y;
  double residual;
  double v_hat;
  bool collinear;
} EmwaveLocation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the calling thread's last failure, or null. Owned by the
// library; valid until the next failing call on this thread.
const char *emwave_last_error(void);

// Stable upper-case name of a status code (static storage); null for
// values that are not an [`EmwaveStatus`].
const char *emwave_status_name(int32_t status);

enum EmwaveStatus emwave_network_load(const char *path, struct EmwaveNetwork **out);

enum EmwaveStatus emwave_network_from_json(const char *json, struct EmwaveNetwork **out);

// Network document as JSON; release with [`emwave_string_free`].
enum EmwaveStatus emwave_network_to_json(const struct EmwaveNetwork *net, char **out);

void emwave_string_free(char *s);

// Uniform chain; `flow` is carried from bus 1 towards bus n.
enum EmwaveStatus emwave_network_build_chain(size_t n,
                                             double spacing,
                                             double h,
                                             double d,
                                             double b,
                                             double v,
                                             double flow,
                                             struct EmwaveNetwork **out);

// Uniform lattice with `generation` dispatched at every bus.
enum EmwaveStatus emwave_network_build_lattice(size_t rows,
                                               size_t cols,
                                               double spacing,
                                               double h,
                                               double d,
                                               double b,
                                               double v,
                                               double generation,
                                               struct EmwaveNetwork **out);

// Applies a scenario given as JSON (`{"penetration", "region_weights", "seed"}`).
enum EmwaveStatus emwave_network_apply_scenario(const struct EmwaveNetwork *net,
                                                const char *scenario_json,
                                                struct EmwaveNetwork **out);

size_t emwave_network_bus_count(const struct EmwaveNetwork *net);

void emwave_network_free(struct EmwaveNetwork *net);

enum EmwaveStatus emwave_simulate(const struct EmwaveNetwork *net,
                                  uint32_t bus,
                                  double delta_p,
                                  double t_event,
                                  double dt,
                                  double t_end,
                                  struct EmwaveTrajectory **out);

// Number of time samples.
size_t emwave_trajectory_len(const struct EmwaveTrajectory *traj);

// Copies the frequency deviation (Hz) of bus `id` into `buf`, which must
// hold at least [`emwave_trajectory_len`] values.
enum EmwaveStatus emwave_trajectory_freq_dev(const struct EmwaveTrajectory *traj,
                                             uint32_t id,
                                             double *buf,
                                             size_t len);

void emwave_trajectory_free(struct EmwaveTrajectory *traj);

// Samples every bus at `sample_rate` with seeded Gaussian noise.
enum EmwaveStatus emwave_sample(const struct EmwaveTrajectory *traj,
                                const struct EmwaveNetwork *net,
                                double sample_rate,
                                double noise_sigma,
                                uint64_t seed,
                                struct EmwaveTraces **out);

size_t emwave_traces_count(const struct EmwaveTraces *traces);

void emwave_traces_free(struct EmwaveTraces *traces);

// `mode` is an [`EmwaveThresholdMode`]; `level` is the threshold in Hz
// (absolute) or the peak fraction (relative).
enum EmwaveStatus emwave_detect(const struct EmwaveTraces *traces,
                                double t_event,
                                int32_t mode,
                                double level,
                                double baseline_window,
                                struct EmwaveTdoa **out);

size_t emwave_tdoa_count(const struct EmwaveTdoa *tdoa);

// Number of traces excluded during detection.
size_t emwave_tdoa_excluded(const struct EmwaveTdoa *tdoa);

enum EmwaveStatus emwave_tdoa_get(const struct EmwaveTdoa *tdoa,
                                  size_t index,
                                  uint32_t *bus,
                                  double *x,
                                  double *y,
                                  double *seconds);

void emwave_tdoa_free(struct EmwaveTdoa *tdoa);

// IDW arrival map; `max_radius` ≤ 0 means unlimited.
enum EmwaveStatus emwave_interpolate(const struct EmwaveTdoa *tdoa,
                                     const struct EmwaveGrid *grid_spec,
                                     double power,
                                     double max_radius,
                                     struct EmwaveField **out);

enum EmwaveStatus emwave_speed_field(const struct EmwaveField *tdoa_field,
                                     double min_grad,
                                     struct EmwaveField **out);

enum EmwaveStatus emwave_field_grid(const struct EmwaveField *field, struct EmwaveGrid *out);

// Copies `nx·ny` values row-major from `y_min`; masked cells are NaN.
enum EmwaveStatus emwave_field_values(const struct EmwaveField *field, double *buf, size_t len);

void emwave_field_free(struct EmwaveField *field);

enum EmwaveStatus emwave_locate(const struct EmwaveTdoa *tdoa,
                                const struct EmwaveGrid *grid_spec,
                                struct EmwaveLocation *out);

// Pearson r between the network's rasterised PV fraction and `speed`.
enum EmwaveStatus emwave_penetration_correlation(const struct EmwaveField *speed,
                                                 const struct EmwaveNetwork *net,
                                                 double *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EMWAVE_H */
