#ifndef RDPS_H
#define RDPS_H

#include <stdbool.h>
#include <stddef.h>

typedef enum RdpsStatus {
  RDPS_STATUS_OK = 0,
  RDPS_STATUS_NULL_POINTER = 1,
  RDPS_STATUS_INVALID_ARGUMENT = 2,
  RDPS_STATUS_UNSUPPORTED = 3,
  RDPS_STATUS_NOT_MONOTONE = 4,
  RDPS_STATUS_NUMERICAL = 5,
  RDPS_STATUS_INTERNAL = 6,
} RdpsStatus;

typedef enum RdpsBackend {
  RDPS_BACKEND_OLS = 0,
  /**
   * Laplacian-kernel ridge regression; uses `gamma` and `lambda`.
   */
  RDPS_BACKEND_KRR = 1,
  /**
   * Kernel smoother; uses `bandwidth`, `trim_lo` and `trim_hi`.
   */
  RDPS_BACKEND_SMOOTHER = 2,
} RdpsBackend;

typedef enum RdpsStrategy {
  RDPS_STRATEGY_LINEAR_EXACT = 0,
  RDPS_STRATEGY_MONOTONE_LIMITS = 1,
  /**
   * Evenly spaced refits; uses `grid_points`.
   */
  RDPS_STRATEGY_GRID = 2,
} RdpsStrategy;

typedef struct RdpsDataset RdpsDataset;

typedef struct RdpsSystem RdpsSystem;

/**
 * Point regressor description. Unused fields are ignored.
 */
typedef struct RdpsRegressor {
  enum RdpsBackend backend;
  double gamma;
  double lambda;
  double bandwidth;
  /**
   * Pass -INFINITY and INFINITY to disable clipping.
   */
  double trim_lo;
  double trim_hi;
} RdpsRegressor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *rdps_last_error_message(void);

/**
 * Builds a dataset from `n` row-major covariate rows of length `dim` and
 * `n` outcomes.
 *
 * # Safety
 * `x` must point to `n * dim` doubles, `y` to `n` doubles and `out` to
 * writable storage for one pointer.
 */
enum RdpsStatus rdps_dataset_new(const double *x,
                                 const double *y,
                                 size_t n,
                                 size_t dim,
                                 struct RdpsDataset **out);

/**
 * # Safety
 * `d` must come from [`rdps_dataset_new`] and not be freed twice. Null is ignored.
 */
void rdps_dataset_free(struct RdpsDataset *d);

/**
 * Split system: the first `estimation_size` samples fit the regressor, the
 * rest calibrate. With `scaled` set, residuals are divided by a companion
 * fit of their absolute values.
 *
 * # Safety
 * `data` must be a live dataset, `x_new` must point to `dim` doubles and
 * `out` to writable storage for one pointer.
 */
enum RdpsStatus rdps_split_system(const struct RdpsDataset *data,
                                  struct RdpsRegressor regressor,
                                  size_t estimation_size,
                                  bool scaled,
                                  const double *x_new,
                                  size_t dim,
                                  struct RdpsSystem **out);

/**
 * Full conformal predictive system, studentised when `studentised` is set.
 *
 * # Safety
 * As for [`rdps_split_system`].
 */
enum RdpsStatus rdps_full_cps(const struct RdpsDataset *data,
                              struct RdpsRegressor regressor,
                              bool studentised,
                              const double *x_new,
                              size_t dim,
                              struct RdpsSystem **out);

/**
 * Full residual-distribution system. A positive `trim_fraction` refits
 * after dropping that share of the largest residuals and needs the grid
 * strategy. Grids span three outcome ranges beyond the data on each side.
 *
 * # Safety
 * As for [`rdps_split_system`].
 */
enum RdpsStatus rdps_full_rdps(const struct RdpsDataset *data,
                               struct RdpsRegressor regressor,
                               enum RdpsStrategy strategy,
                               size_t grid_points,
                               double trim_fraction,
                               const double *x_new,
                               size_t dim,
                               struct RdpsSystem **out);

/**
 * # Safety
 * `s` must come from a builder and not be freed twice. Null is ignored.
 */
void rdps_system_free(struct RdpsSystem *s);

/**
 * Bound values at `y`. The lower bound is reported right-continuous.
 *
 * # Safety
 * `s` must be live; `lower` and `upper` must be writable.
 */
enum RdpsStatus rdps_system_eval(const struct RdpsSystem *s,
                                 double y,
                                 double *lower,
                                 double *upper);

/**
 * # Safety
 * `s` must be live and `out` writable.
 */
enum RdpsStatus rdps_system_thickness(const struct RdpsSystem *s, double *out);

/**
 * Central interval at `level` in (0, 1). Endpoints may be infinite.
 *
 * # Safety
 * `s` must be live; `lo` and `hi` must be writable.
 */
enum RdpsStatus rdps_system_central_interval(const struct RdpsSystem *s,
                                             double level,
                                             double *lo,
                                             double *hi);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RDPS_H */
