#ifndef HAARLAB_H
#define HAARLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum HaarlabStatus {
  HAARLAB_STATUS_OK = 0,
  HAARLAB_STATUS_NULL_POINTER = 1,
  HAARLAB_STATUS_NOT_A_GROUP = 2,
  HAARLAB_STATUS_UNSUPPORTED_SIZE = 3,
  HAARLAB_STATUS_INVALID_INDEX = 4,
  HAARLAB_STATUS_GROUP_MISMATCH = 5,
  HAARLAB_STATUS_INVALID_DISTRIBUTION = 6,
  HAARLAB_STATUS_INFINITE_TERM = 7,
  HAARLAB_STATUS_NOT_A_DENSITY = 8,
  HAARLAB_STATUS_GRID_TOO_COARSE = 9,
  HAARLAB_STATUS_QUADRATURE_FAILURE = 10,
  HAARLAB_STATUS_PROFILE_INVALID = 11,
  HAARLAB_STATUS_SIZE_LIMIT = 12,
  HAARLAB_STATUS_RANGE_ERROR = 13,
  HAARLAB_STATUS_INVALID_BETA = 14,
  HAARLAB_STATUS_NO_CONVERGENCE = 15,
  HAARLAB_STATUS_PRECONDITION_FAILED = 16,
  HAARLAB_STATUS_PARSE = 17,
  HAARLAB_STATUS_BUFFER_TOO_SMALL = 18,
  HAARLAB_STATUS_INTERNAL = 19,
} HaarlabStatus;

// A probability distribution on a finite group.
typedef struct HaarlabDist HaarlabDist;

// A right-invariant distortion on a finite group or on the circle.
typedef struct HaarlabDistortion HaarlabDistortion;

// A truncated Fourier density on the circle.
typedef struct HaarlabFourier HaarlabFourier;

// A finite group.
typedef struct HaarlabGroup HaarlabGroup;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next call into this library from the same thread.
const char *haarlab_last_error(void);

// Library version, a static NUL-terminated string.
const char *haarlab_version(void);

// Built-in group from a family name such as `"cyclic:6"`, `"dihedral:4"`,
// `"symmetric:3"` or `"cube"`.
//
// # Safety
// `spec` must be a NUL-terminated string and `out` a valid pointer.
enum HaarlabStatus haarlab_group_builtin(const char *spec, struct HaarlabGroup **out);

// Group from a row-major `order × order` Cayley table; element 0 need not
// be the identity.
//
// # Safety
// `table` must point to `order * order` values and `out` be valid.
enum HaarlabStatus haarlab_group_from_table(const uint32_t *table,
                                            size_t order,
                                            struct HaarlabGroup **out);

// Group order, or 0 for a null handle.
//
// # Safety
// `g` must be null or a live group handle.
size_t haarlab_group_order(const struct HaarlabGroup *g);

// Product `a·b`, written to `out`.
//
// # Safety
// `g` must be a live group handle and `out` valid.
enum HaarlabStatus haarlab_group_mul(const struct HaarlabGroup *g, size_t a, size_t b, size_t *out);

// # Safety
// `g` must be null or a handle not yet freed.
void haarlab_group_free(struct HaarlabGroup *g);

// Distribution with the given masses (non-negative, summing to 1 within
// 1e-9; they are renormalized).
//
// # Safety
// `mass` must point to `len` doubles; `g` and `out` must be valid.
enum HaarlabStatus haarlab_dist_new(const struct HaarlabGroup *g,
                                    const double *mass,
                                    size_t len,
                                    struct HaarlabDist **out);

// Haar (uniform) distribution.
//
// # Safety
// `g` and `out` must be valid.
enum HaarlabStatus haarlab_dist_uniform(const struct HaarlabGroup *g, struct HaarlabDist **out);

// Copies the masses into `buf`; fails with `BufferTooSmall` when `len` is
// below the group order.
//
// # Safety
// `buf` must have room for `len` doubles.
enum HaarlabStatus haarlab_dist_mass(const struct HaarlabDist *p, double *buf, size_t len);

// `P ∗ Q`.
//
// # Safety
// All handles must be live and `out` valid.
enum HaarlabStatus haarlab_dist_convolve(const struct HaarlabDist *p,
                                         const struct HaarlabDist *q,
                                         struct HaarlabDist **out);

// `n`-fold convolution power, `n ≥ 1`.
//
// # Safety
// `p` must be live and `out` valid.
enum HaarlabStatus haarlab_dist_n_fold(const struct HaarlabDist *p,
                                       size_t n,
                                       struct HaarlabDist **out);

// # Safety
// `p` must be null or a handle not yet freed.
void haarlab_dist_free(struct HaarlabDist *p);

// `D(P‖Q)` in nats; `+INFINITY` when P is not absolutely continuous with
// respect to Q.
//
// # Safety
// Handles must be live and `out` valid.
enum HaarlabStatus haarlab_divergence(const struct HaarlabDist *p,
                                      const struct HaarlabDist *q,
                                      double *out);

// `D(P‖U)` in nats.
//
// # Safety
// `p` must be live and `out` valid.
enum HaarlabStatus haarlab_divergence_to_uniform(const struct HaarlabDist *p, double *out);

// Total variation `Σ|P − Q|`.
//
// # Safety
// Handles must be live and `out` valid.
enum HaarlabStatus haarlab_total_variation(const struct HaarlabDist *p,
                                           const struct HaarlabDist *q,
                                           double *out);

// Cosine profile `2 − 2cos(2πk/n)`; needs a standard cyclic group.
//
// # Safety
// `g` must be live and `out` valid.
enum HaarlabStatus haarlab_distortion_cosine(const struct HaarlabGroup *g,
                                             struct HaarlabDistortion **out);

// Hamming profile: 0 at the identity, 1 elsewhere.
//
// # Safety
// `g` must be live and `out` valid.
enum HaarlabStatus haarlab_distortion_hamming(const struct HaarlabGroup *g,
                                              struct HaarlabDistortion **out);

// Right-invariant distortion `d(x, y) = profile[x·y⁻¹]`.
//
// # Safety
// `profile` must point to `len` doubles; `g` and `out` must be valid.
enum HaarlabStatus haarlab_distortion_table(const struct HaarlabGroup *g,
                                            const double *profile,
                                            size_t len,
                                            struct HaarlabDistortion **out);

// `2 − 2cos(x − y)` on the circle.
//
// # Safety
// `out` must be valid.
enum HaarlabStatus haarlab_distortion_so2(struct HaarlabDistortion **out);

// # Safety
// `d` must be null or a handle not yet freed.
void haarlab_distortion_free(struct HaarlabDistortion *d);

// Exact transport distance. When `coupling` is non-null it receives the
// optimal joint distribution, row-major `order × order`.
//
// # Safety
// Handles must be live, `value` valid, `coupling` null or room for
// `order²` doubles.
enum HaarlabStatus haarlab_transport_distance(const struct HaarlabDist *p,
                                              const struct HaarlabDist *q,
                                              const struct HaarlabDistortion *d,
                                              double *value,
                                              double *coupling);

// Closed-form rate-distortion point of the uniform source at slope
// `beta ≤ 0` (`-INFINITY` allowed): mean distortion and rate in nats.
//
// # Safety
// `d` must be live; `delta` and `rate` valid.
enum HaarlabStatus haarlab_uniform_rd_point(const struct HaarlabDistortion *d,
                                            double beta,
                                            double *delta,
                                            double *rate);

// Blahut–Arimoto at slope `beta < 0` for source `p`. `tol ≤ 0` and
// `max_iter = 0` select the defaults. `iterations` may be null.
//
// # Safety
// Handles must be live; `delta` and `rate` valid.
enum HaarlabStatus haarlab_blahut_arimoto(const struct HaarlabDist *p,
                                          const struct HaarlabDistortion *d,
                                          double beta,
                                          double tol,
                                          size_t max_iter,
                                          double *delta,
                                          double *rate,
                                          size_t *iterations);

// Density `1 + Σ_k amps[k]·cos((k+1)(x + phases[k]))`; fails with
// `NotADensity` when it goes negative.
//
// # Safety
// `amps` and `phases` must point to `len` doubles; `out` must be valid.
enum HaarlabStatus haarlab_fourier_new(const double *amps,
                                       const double *phases,
                                       size_t len,
                                       struct HaarlabFourier **out);

// `n`-fold convolution power on the circle.
//
// # Safety
// `f` must be live and `out` valid.
enum HaarlabStatus haarlab_fourier_n_fold(const struct HaarlabFourier *f,
                                          size_t n,
                                          struct HaarlabFourier **out);

// Divergence to the uniform measure by adaptive quadrature, in nats.
//
// # Safety
// `f` must be live and `out` valid.
enum HaarlabStatus haarlab_fourier_divergence(const struct HaarlabFourier *f, double *out);

// Density value at angle `x`, or NaN for a null handle.
//
// # Safety
// `f` must be null or live.
double haarlab_fourier_eval(const struct HaarlabFourier *f, double x);

// # Safety
// `f` must be null or a handle not yet freed.
void haarlab_fourier_free(struct HaarlabFourier *f);

// Modified Bessel function `I_order(x)`.
//
// # Safety
// `out` must be valid.
enum HaarlabStatus haarlab_bessel_i(uint32_t order, double x, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAARLAB_H */
