#ifndef GLS_H
#define GLS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum GlsStatus {
  GLS_STATUS_OK = 0,
  GLS_STATUS_NULL_ARGUMENT = 1,
  GLS_STATUS_INVALID_UTF8 = 2,
  GLS_STATUS_PARSE = 3,
  GLS_STATUS_INVALID_PARAMETER = 4,
  GLS_STATUS_DOMAIN = 5,
  GLS_STATUS_DIVERGENT = 6,
  GLS_STATUS_UNSUPPORTED = 7,
  GLS_STATUS_SIZE_MISMATCH = 8,
  GLS_STATUS_NUMERICAL = 9,
  GLS_STATUS_IO = 10,
  GLS_STATUS_PANIC = 11,
} GlsStatus;

// A grid sequence `q`.
typedef struct GlsGrid GlsGrid;

// A finite group.
typedef struct GlsGroup GlsGroup;

// A random variable model.
typedef struct GlsModel GlsModel;

// A generating function `psi`.
typedef struct GlsPsi GlsPsi;

// A restricted exponent set.
typedef struct GlsSet GlsSet;

// A norm value. `decreasing` is 1 or 0 when the ratio's trend at the
// truncation point is known, -1 otherwise.
typedef struct GlsNorm {
  double value;
  double arg_p;
  double p_max;
  int32_t decreasing;
} GlsNorm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null after a
// successful one. The pointer stays valid until the next call on the same
// thread.
const char *gls_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *gls_version(void);

// Parses a model specifier such as `gaussian`, `constant:2`,
// `bernoulli:0.01`, `empirical:<path>` or `density:pareto:3`.
//
// # Safety
// `spec` must be a NUL-terminated string and `out` a valid pointer. The
// handle written to `out` must be released with [`gls_model_free`].
enum GlsStatus gls_model_new(const char *spec, struct GlsModel **out_model);

// The model of `alpha * xi`, as a new handle.
//
// # Safety
// `model` must be a live handle and `out_model` a valid pointer.
enum GlsStatus gls_model_scaled(const struct GlsModel *model,
                                double alpha,
                                struct GlsModel **out_model);

// `|xi|_p` for `p >= 1`.
//
// # Safety
// `model` must be a live handle and `out_value` a valid pointer.
enum GlsStatus gls_model_lp_norm(const struct GlsModel *model, double p, double *out_value);

// # Safety
// `model` must be null or a handle from this library not yet freed.
void gls_model_free(struct GlsModel *model);

// Parses a generating function such as `power_slowvary(r=2, delta=0)`,
// `oscillating(r=2, amp=0.3)` or `natural`. `natural` needs `model`;
// otherwise `model` may be null.
//
// # Safety
// `spec` must be a NUL-terminated string, `model` null or a live handle,
// and `out_psi` a valid pointer. Release the result with [`gls_psi_free`].
enum GlsStatus gls_psi_new(const char *spec, const struct GlsModel *model, struct GlsPsi **out_psi);

// `psi(p)` for `p >= 1`.
//
// # Safety
// `psi` must be a live handle and `out_value` a valid pointer.
enum GlsStatus gls_psi_eval(const struct GlsPsi *psi, double p, double *out_value);

// # Safety
// `psi` must be null or a handle from this library not yet freed.
void gls_psi_free(struct GlsPsi *psi);

// Parses a grid such as `integers:M=50` or `geometric:D=2:M=60`.
//
// # Safety
// `spec` must be a NUL-terminated string and `out_grid` a valid pointer.
// Release the result with [`gls_grid_free`].
enum GlsStatus gls_grid_new(const char *spec, struct GlsGrid **out_grid);

// `q(m)` for `m >= 1`, beyond the truncation if needed.
//
// # Safety
// `grid` must be a live handle and `out_value` a valid pointer.
enum GlsStatus gls_grid_value(const struct GlsGrid *grid, uintptr_t m, double *out_value);

// The equivalence constant `W` (or `W-hat` when `use_cell_minimum` is
// nonzero) of a grid. `+inf` means the discrete norm is not equivalent.
//
// # Safety
// `grid`, `psi` must be live handles and `out_value` a valid pointer.
enum GlsStatus gls_grid_w_constant(const struct GlsGrid *grid,
                                   const struct GlsPsi *psi,
                                   int32_t use_cell_minimum,
                                   double *out_value);

// # Safety
// `grid` must be null or a handle from this library not yet freed.
void gls_grid_free(struct GlsGrid *grid);

// Parses a restricted set such as `full`, `intervals:1-2,3-inf;points:5`
// or `grid:integers:M=100`.
//
// # Safety
// `spec` must be a NUL-terminated string and `out_set` a valid pointer.
// Release the result with [`gls_set_free`].
enum GlsStatus gls_set_new(const char *spec, struct GlsSet **out_set);

// `p+`, the smallest member of the set at or above `p`; `+inf` if none.
//
// # Safety
// `set` must be a live handle and `out_value` a valid pointer.
enum GlsStatus gls_set_p_plus(const struct GlsSet *set, double p, double *out_value);

// The equivalence constant `Z` of a restricted set.
//
// # Safety
// `set`, `psi` must be live handles and `out_value` a valid pointer.
enum GlsStatus gls_set_z_constant(const struct GlsSet *set,
                                  const struct GlsPsi *psi,
                                  double *out_value);

// # Safety
// `set` must be null or a handle from this library not yet freed.
void gls_set_free(struct GlsSet *set);

// The GLS norm over `[1, p_max]`; `p_max <= 0` picks the model's default.
//
// # Safety
// `model`, `psi` must be live handles and `out_norm` a valid pointer.
enum GlsStatus gls_norm_full(const struct GlsModel *model,
                             const struct GlsPsi *psi,
                             double p_max,
                             struct GlsNorm *out_norm);

// The norm restricted to `set`; `p_max <= 0` picks the model's default.
//
// # Safety
// `model`, `psi`, `set` must be live handles and `out_norm` a valid pointer.
enum GlsStatus gls_norm_restricted(const struct GlsModel *model,
                                   const struct GlsPsi *psi,
                                   const struct GlsSet *set,
                                   double p_max,
                                   struct GlsNorm *out_norm);

// The discrete norm over the grid's points.
//
// # Safety
// `model`, `psi`, `grid` must be live handles and `out_norm` a valid
// pointer.
enum GlsStatus gls_norm_discrete(const struct GlsModel *model,
                                 const struct GlsPsi *psi,
                                 const struct GlsGrid *grid,
                                 struct GlsNorm *out_norm);

// The tail transform `h(x)` for `x >= 1`, with the maximizing index.
// `out_argmax` may be null.
//
// # Safety
// `grid`, `psi` must be live handles, `out_value` a valid pointer and
// `out_argmax` null or valid.
enum GlsStatus gls_h_transform(const struct GlsGrid *grid,
                               const struct GlsPsi *psi,
                               double x,
                               double *out_value,
                               uintptr_t *out_argmax);

// The tail bound `P(|xi| >= x) <= exp(-h(x / norm))`, defined for
// `x >= e * norm`; smaller `x` gives `Domain`.
//
// # Safety
// `grid`, `psi` must be live handles and `out_value` a valid pointer.
enum GlsStatus gls_tail_envelope(const struct GlsGrid *grid,
                                 const struct GlsPsi *psi,
                                 double norm,
                                 double x,
                                 double *out_value);

// Parses a group such as `cyclic:8`, `dihedral:5`, `symmetric:4` or
// `product:cyclic:2xdihedral:3`.
//
// # Safety
// `spec` must be a NUL-terminated string and `out_group` a valid pointer.
// Release the result with [`gls_group_free`].
enum GlsStatus gls_group_new(const char *spec, struct GlsGroup **out_group);

// Number of elements; 0 for a null handle.
//
// # Safety
// `group` must be null or a live handle.
uintptr_t gls_group_order(const struct GlsGroup *group);

// Writes `f * g` (normalized Haar measure) to `out`. All three arrays have
// the group's order as length and are indexed by element.
//
// # Safety
// `group` must be a live handle; `f`, `g` must point to `len` readable
// values and `out_values` to `len` writable ones.
enum GlsStatus gls_convolve(const struct GlsGroup *group,
                            const double *f,
                            const double *g,
                            uintptr_t len,
                            double *out_values);

// `|f|_p` under normalized Haar measure; `p` may be `+inf`.
//
// # Safety
// `group` must be a live handle and `f` point to `len` readable values.
enum GlsStatus gls_group_lp_norm(const struct GlsGroup *group,
                                 const double *f,
                                 uintptr_t len,
                                 double p,
                                 double *out_value);

// # Safety
// `group` must be null or a handle from this library not yet freed.
void gls_group_free(struct GlsGroup *group);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GLS_H */
