#ifndef CIRCLE_SINGULAR_H
#define CIRCLE_SINGULAR_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum CsStatus {
  CS_STATUS_OK = 0,
  CS_STATUS_NULL_POINTER = 1,
  CS_STATUS_INVALID_ARGUMENT = 2,
  // A numeric precondition or certificate failed.
  CS_STATUS_NUMERIC = 3,
  CS_STATUS_BUFFER_TOO_SMALL = 4,
  CS_STATUS_IO = 5,
  CS_STATUS_PANIC = 6,
} CsStatus;

// Offset rule for [`cs_system_build`].
typedef enum CsOffsetMode {
  CS_OFFSET_MODE_RANDOM = 0,
  CS_OFFSET_MODE_ZERO = 1,
} CsOffsetMode;

// Opaque nested interval system.
typedef struct CsSystem CsSystem;

// Opaque window of Fourier coefficients.
typedef struct CsWindow CsWindow;

// A value with its error bound.
typedef struct CsCertified {
  double re;
  double im;
  double error_bound;
} CsCertified;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null if none.
//
// The pointer stays valid until the next failing call on the same thread.
const char *cs_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *cs_version(void);

// Builds the system for `seed` up to rank `n_max`.
//
// # Safety
// `mode` must be a [`CsOffsetMode`] value and `out` valid for a pointer
// write. The handle written there must be released with [`cs_system_free`].
enum CsStatus cs_system_build(uint64_t seed,
                              size_t n_max,
                              enum CsOffsetMode mode,
                              struct CsSystem **out);

// Releases a system. Null is ignored.
//
// # Safety
// `sys` must be null or a handle from [`cs_system_build`] not yet freed.
void cs_system_free(struct CsSystem *sys);

// Rank-`n` interval length `σ_n`.
//
// # Safety
// `sys` must be a live handle and `out` valid for a write.
enum CsStatus cs_system_sigma(const struct CsSystem *sys, size_t n, double *out);

// Copies the `2^n` rank-`n` left endpoints into `buf`.
//
// `written` always receives the number of endpoints. When `len` is too
// small nothing is copied and [`CsStatus::BufferTooSmall`] is returned, so a
// first call with `len = 0` sizes the buffer.
//
// # Safety
// `sys` must be a live handle, `written` valid for a write and `buf` valid
// for `len` writes (it may be null when `len` is 0).
enum CsStatus cs_system_lefts(const struct CsSystem *sys,
                              size_t n,
                              double *buf,
                              size_t len,
                              size_t *written);

// Checks nesting and measure invariants at every rank.
//
// # Safety
// `sys` must be a live handle.
enum CsStatus cs_system_verify(const struct CsSystem *sys);

// `2^n · σ_n log(1/σ_n)`.
//
// # Safety
// `sys` must be a live handle and `out` valid for a write.
enum CsStatus cs_gauge_cover_sum(const struct CsSystem *sys, size_t n, double *out);

// Taylor coefficient `F̂(m)` at the default stage for `m`.
//
// # Safety
// `sys` must be a live handle and `out` valid for a write.
enum CsStatus cs_taylor_coeff(const struct CsSystem *sys,
                              double delta,
                              int64_t m,
                              double c_log,
                              struct CsCertified *out);

// Window on `[lo, hi]` from `hi - lo + 1` real and imaginary parts. `im`
// may be null for a real window.
//
// # Safety
// `re` (and `im` when non-null) must be valid for `hi - lo + 1` reads and
// `out` valid for a pointer write. Release with [`cs_window_free`].
enum CsStatus cs_window_new(int64_t lo,
                            int64_t hi,
                            const double *re,
                            const double *im,
                            struct CsWindow **out);

// Releases a window. Null is ignored.
//
// # Safety
// `w` must be null or a live window handle.
void cs_window_free(struct CsWindow *w);

// Index range of a window.
//
// # Safety
// `w` must be a live handle; `lo` and `hi` valid for writes.
enum CsStatus cs_window_bounds(const struct CsWindow *w, int64_t *lo, int64_t *hi);

// Coefficient at `m`, zero outside the window.
//
// # Safety
// `w` must be a live handle; `re` and `im` valid for writes.
enum CsStatus cs_window_get(const struct CsWindow *w, int64_t m, double *re, double *im);

// Fourier dimension estimate from the block envelope of `|μ̂|²`.
//
// # Safety
// `w` must be a live handle and `out` valid for a write.
enum CsStatus cs_fourier_dim_fit(const struct CsWindow *w, double *out);

// Builds the asymmetric measure over `mu` and returns its coefficients.
//
// # Safety
// `mu` must be a live handle and `out` valid for a pointer write. Release
// the result with [`cs_window_free`].
enum CsStatus cs_build_nu(const struct CsWindow *mu, double p, size_t k_max, struct CsWindow **out);

// Runs a pipeline from a JSON config and returns the manifest as JSON.
//
// Artifacts are written as by the command-line tool. The manifest records
// failed checks; only execution errors produce a non-`Ok` status.
//
// # Safety
// `config_json` must be a NUL-terminated string and `out` valid for a
// pointer write. Release the result with [`cs_string_free`].
enum CsStatus cs_run_json(const char *config_json, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string from [`cs_run_json`] not yet freed.
void cs_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CIRCLE_SINGULAR_H */
