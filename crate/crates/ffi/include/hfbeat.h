/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#ifndef HFBEAT_H
#define HFBEAT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HfbStatus {
  HFB_STATUS_OK = 0,
  HFB_STATUS_NULL_POINTER = 1,
  HFB_STATUS_INVALID_ARGUMENT = 2,
  HFB_STATUS_DOMAIN = 3,
  HFB_STATUS_PARSE = 4,
  HFB_STATUS_VALIDATION = 5,
  HFB_STATUS_IO = 6,
  HFB_STATUS_CONVERGENCE = 7,
  HFB_STATUS_PROFILE = 8,
  HFB_STATUS_OUT_OF_RANGE = 9,
  HFB_STATUS_PANIC = 10,
} HfbStatus;

typedef enum HfbUncertainty {
  HFB_UNCERTAINTY_PROFILE = 0,
  HFB_UNCERTAINTY_COVARIANCE = 1,
} HfbUncertainty;

typedef struct HfbDataset HfbDataset;

typedef struct HfbFitResult HfbFitResult;

typedef struct HfbSpectrum HfbSpectrum;

// One beat component. `twice_f`/`twice_f_prime` are `2F` and `2F'`.
typedef struct HfbBeatComponent {
  int32_t twice_f;
  int32_t twice_f_prime;
  double nu_mhz;
  double amplitude;
} HfbBeatComponent;

// `max_refinements == 0` refines every grid node.
typedef struct HfbFitOptions {
  size_t max_refinements;
  enum HfbUncertainty uncertainty;
  bool parallel;
} HfbFitOptions;

typedef struct HfbParams {
  double a_mhz;
  double b_mhz;
  double dt_ns;
  double w_ns;
} HfbParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *hfb_version(void);

// Message for the most recent failure on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *hfb_last_error_message(void);

// Wigner 6-j symbol `{j1 j2 j3; j4 j5 j6}` from six twice-valued arguments.
//
// # Safety
// `twice_args` must point to six readable `int32_t`; `out` must be writable.
enum HfbStatus hfb_sixj(const int32_t *twice_args, double *out);

// Beat spectrum for nuclear spin `twice_i/2`, level `twice_j/2` and
// coupling constants `a_mhz`, `b_mhz`.
//
// # Safety
// `out` must be writable. The new handle is released with [`hfb_spectrum_free`].
enum HfbStatus hfb_spectrum_new(int32_t twice_i,
                                int32_t twice_j,
                                double a_mhz,
                                double b_mhz,
                                struct HfbSpectrum **out);

// # Safety
// `spectrum` must be NULL or a handle from [`hfb_spectrum_new`] not yet freed.
void hfb_spectrum_free(struct HfbSpectrum *spectrum);

// Number of beat components; 0 for NULL.
//
// # Safety
// `spectrum` must be NULL or a live handle.
size_t hfb_spectrum_len(const struct HfbSpectrum *spectrum);

// Non-oscillating part of the alignment.
//
// # Safety
// `spectrum` must be a live handle and `out` writable.
enum HfbStatus hfb_spectrum_constant(const struct HfbSpectrum *spectrum, double *out);

// # Safety
// `spectrum` must be a live handle and `out` writable.
enum HfbStatus hfb_spectrum_component(const struct HfbSpectrum *spectrum,
                                      size_t index,
                                      struct HfbBeatComponent *out);

// Alignment g2 at delay `t_ns` for a rectangular pulse of width `width_ns`
// and a delay offset `dt_ns`.
//
// # Safety
// `spectrum` must be a live handle and `out` writable.
enum HfbStatus hfb_g2(const struct HfbSpectrum *spectrum,
                      double width_ns,
                      double dt_ns,
                      double t_ns,
                      double *out);

// Linear polarization (fraction) for the stimulated P3/2 to D5/2 probe.
//
// # Safety
// `spectrum` must be a live handle and `out` writable.
enum HfbStatus hfb_polarization(const struct HfbSpectrum *spectrum,
                                double width_ns,
                                double dt_ns,
                                double t_ns,
                                double *out);

// Load a dataset CSV (`index,t_ns,PL_percent,sigma_percent`).
//
// # Safety
// `path` must be a NUL-terminated UTF-8 string and `out` writable.
enum HfbStatus hfb_dataset_load(const char *path, struct HfbDataset **out);

// Build a dataset from parallel arrays. Polarizations and sigmas are
// fractions, not percent. `index` may be NULL, in which case points are
// numbered from 1.
//
// # Safety
// Every non-NULL array must hold `n` readable elements; `out` must be writable.
enum HfbStatus hfb_dataset_from_arrays(size_t n,
                                       const int64_t *index,
                                       const double *t_ns,
                                       const double *pl,
                                       const double *sigma,
                                       struct HfbDataset **out);

// Number of points; 0 for NULL.
//
// # Safety
// `dataset` must be NULL or a live handle.
size_t hfb_dataset_len(const struct HfbDataset *dataset);

// # Safety
// `dataset` must be NULL or a handle not yet freed.
void hfb_dataset_free(struct HfbDataset *dataset);

// Profile uncertainties, full start grid, parallel refinement.
struct HfbFitOptions hfb_fit_options_default(void);

// Fit A, B, dt and W. `options` may be NULL for the defaults.
//
// # Safety
// `dataset` must be a live handle, `options` NULL or readable, `out` writable.
// The result is released with [`hfb_fit_result_free`].
enum HfbStatus hfb_fit(const struct HfbDataset *dataset,
                       int32_t twice_i,
                       int32_t twice_j,
                       const struct HfbFitOptions *options,
                       struct HfbFitResult **out);

// Best-fit parameters.
//
// # Safety
// `result` must be a live handle and `out` writable.
enum HfbStatus hfb_fit_result_params(const struct HfbFitResult *result, struct HfbParams *out);

// 2σ half-widths of the parameters.
//
// # Safety
// `result` must be a live handle and `out` writable.
enum HfbStatus hfb_fit_result_two_sigma(const struct HfbFitResult *result, struct HfbParams *out);

// Reduced chi-square at the optimum.
//
// # Safety
// `result` must be a live handle and `out` writable.
enum HfbStatus hfb_fit_result_red_chi2(const struct HfbFitResult *result, double *out);

// JSON report for the fit. Free the returned string with [`hfb_string_free`].
//
// # Safety
// `result` must be a live handle and `out` writable.
enum HfbStatus hfb_fit_result_json(const struct HfbFitResult *result, char **out);

// # Safety
// `result` must be NULL or a handle not yet freed.
void hfb_fit_result_free(struct HfbFitResult *result);

// Release a string returned by this library.
//
// # Safety
// `s` must be NULL or a string from this library not yet freed.
void hfb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HFBEAT_H */
