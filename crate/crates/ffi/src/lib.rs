//! C ABI for `hfbeat`.
//!
//! Every fallible function returns an [`HfbStatus`]; on failure a message is
//! available from [`hfb_last_error_message`] on the same thread until the next
//! failing call. Objects are handed out as opaque pointers and must be
//! released with the matching `*_free` function. Panics never cross the
//! boundary, they surface as `HFB_STATUS_PANIC`.
//!
//! Angular momenta are passed as twice their value (`7/2` is `7`).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hfbeat::beat_model::{g2, polarization_cs, PulseModel};
use hfbeat::dataset::{load_dataset, BeatDataset, DataPoint};
use hfbeat::fitting::{fit, FitConfig, FitParams, FitResult, UncertaintyMethod};
use hfbeat::hyperfine::{beat_spectrum, BeatSpectrum, HyperfineSystem};
use hfbeat::report::FitReport;
use hfbeat::{sixj, Error, HalfInt, SixJArgs};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HfbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Parse = 4,
    Validation = 5,
    Io = 6,
    Convergence = 7,
    Profile = 8,
    OutOfRange = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HfbUncertainty {
    Profile = 0,
    Covariance = 1,
}

/// One beat component. `twice_f`/`twice_f_prime` are `2F` and `2F'`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HfbBeatComponent {
    pub twice_f: i32,
    pub twice_f_prime: i32,
    pub nu_mhz: f64,
    pub amplitude: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HfbParams {
    pub a_mhz: f64,
    pub b_mhz: f64,
    pub dt_ns: f64,
    pub w_ns: f64,
}

/// `max_refinements == 0` refines every grid node.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HfbFitOptions {
    pub max_refinements: usize,
    pub uncertainty: HfbUncertainty,
    pub parallel: bool,
}

pub struct HfbSpectrum {
    spectrum: BeatSpectrum,
}

pub struct HfbDataset {
    data: BeatDataset,
}

pub struct HfbFitResult {
    result: FitResult,
    system: HyperfineSystem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Null(&'static str),
    Range(String),
    Invalid(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(f: &Failure) -> HfbStatus {
    match f {
        Failure::Null(_) => HfbStatus::NullPointer,
        Failure::Range(_) => HfbStatus::OutOfRange,
        Failure::Invalid(_) => HfbStatus::InvalidArgument,
        Failure::Lib(e) => match e {
            Error::Domain(_) => HfbStatus::Domain,
            Error::InvalidArgument(_) => HfbStatus::InvalidArgument,
            Error::Convergence(_) => HfbStatus::Convergence,
            Error::Profile { .. } => HfbStatus::Profile,
            Error::Parse { .. } => HfbStatus::Parse,
            Error::Validation(_) => HfbStatus::Validation,
            Error::Io { .. } => HfbStatus::Io,
        },
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HfbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HfbStatus::Ok,
        Ok(Err(failure)) => {
            let status = status_of(&failure);
            set_last_error(match failure {
                Failure::Null(name) => format!("null pointer passed as `{name}`"),
                Failure::Range(m) | Failure::Invalid(m) => m,
                Failure::Lib(e) => e.to_string(),
            });
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            HfbStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: caller promises `p` is either null or a live object of type T
    unsafe { p.as_ref() }.ok_or(Failure::Null(name))
}

fn write_out<T>(out: *mut T, name: &'static str, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(name));
    }
    // SAFETY: non-null and, per the API contract, valid for writes
    unsafe { out.write(value) };
    Ok(())
}

fn half_int(twice: i32, name: &str) -> Result<HalfInt, Failure> {
    if twice < 0 {
        return Err(Failure::Invalid(format!("{name} must be >= 0, got 2*{name} = {twice}")));
    }
    Ok(HalfInt::from_twice(twice))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        // SAFETY: p came from Box::into_raw in this crate and is freed once
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hfb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hfb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Wigner 6-j symbol `{j1 j2 j3; j4 j5 j6}` from six twice-valued arguments.
///
/// # Safety
/// `twice_args` must point to six readable `int32_t`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hfb_sixj(twice_args: *const i32, out: *mut f64) -> HfbStatus {
    guard(|| {
        if twice_args.is_null() {
            return Err(Failure::Null("twice_args"));
        }
        // SAFETY: the caller guarantees six elements
        let tw = unsafe { std::slice::from_raw_parts(twice_args, 6) };
        if let Some(bad) = tw.iter().find(|&&x| x < 0) {
            return Err(Failure::Invalid(format!("6-j arguments must be >= 0, got 2j = {bad}")));
        }
        let args = SixJArgs::from_twice([tw[0], tw[1], tw[2], tw[3], tw[4], tw[5]]);
        write_out(out, "out", sixj(args))
    })
}

/// Beat spectrum for nuclear spin `twice_i/2`, level `twice_j/2` and
/// coupling constants `a_mhz`, `b_mhz`.
///
/// # Safety
/// `out` must be writable. The new handle is released with [`hfb_spectrum_free`].
#[no_mangle]
pub unsafe extern "C" fn hfb_spectrum_new(
    twice_i: i32,
    twice_j: i32,
    a_mhz: f64,
    b_mhz: f64,
    out: *mut *mut HfbSpectrum,
) -> HfbStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let sys = HyperfineSystem::new(half_int(twice_i, "I")?, half_int(twice_j, "J")?, a_mhz, b_mhz)?;
        let handle = Box::new(HfbSpectrum {
            spectrum: beat_spectrum(&sys),
        });
        write_out(out, "out", Box::into_raw(handle))
    })
}

/// # Safety
/// `spectrum` must be NULL or a handle from [`hfb_spectrum_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hfb_spectrum_free(spectrum: *mut HfbSpectrum) {
    unsafe { free(spectrum) }
}

/// Number of beat components; 0 for NULL.
///
/// # Safety
/// `spectrum` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hfb_spectrum_len(spectrum: *const HfbSpectrum) -> usize {
    unsafe { spectrum.as_ref() }.map_or(0, |s| s.spectrum.components.len())
}

/// Non-oscillating part of the alignment.
///
/// # Safety
/// `spectrum` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hfb_spectrum_constant(spectrum: *const HfbSpectrum, out: *mut f64) -> HfbStatus {
    guard(|| {
        let s = non_null(spectrum, "spectrum")?;
        write_out(out, "out", s.spectrum.constant)
    })
}

/// # Safety
/// `spectrum` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hfb_spectrum_component(
    spectrum: *const HfbSpectrum,
    index: usize,
    out: *mut HfbBeatComponent,
) -> HfbStatus {
    guard(|| {
        let s = non_null(spectrum, "spectrum")?;
        let c = s.spectrum.components.get(index).ok_or_else(|| {
            Failure::Range(format!(
                "component {index} requested, spectrum has {}",
                s.spectrum.components.len()
            ))
        })?;
        write_out(
            out,
            "out",
            HfbBeatComponent {
                twice_f: c.f.twice(),
                twice_f_prime: c.f_prime.twice(),
                nu_mhz: c.nu,
                amplitude: c.amplitude,
            },
        )
    })
}

/// Alignment g2 at delay `t_ns` for a rectangular pulse of width `width_ns`
/// and a delay offset `dt_ns`.
///
/// # Safety
/// `spectrum` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hfb_g2(
    spectrum: *const HfbSpectrum,
    width_ns: f64,
    dt_ns: f64,
    t_ns: f64,
    out: *mut f64,
) -> HfbStatus {
    guard(|| {
        let s = non_null(spectrum, "spectrum")?;
        let pulse = PulseModel::new(width_ns, dt_ns)?;
        write_out(out, "out", g2(&s.spectrum, &pulse, t_ns))
    })
}

/// Linear polarization (fraction) for the stimulated P3/2 to D5/2 probe.
///
/// # Safety
/// `spectrum` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hfb_polarization(
    spectrum: *const HfbSpectrum,
    width_ns: f64,
    dt_ns: f64,
    t_ns: f64,
    out: *mut f64,
) -> HfbStatus {
    guard(|| {
        let s = non_null(spectrum, "spectrum")?;
        let pulse = PulseModel::new(width_ns, dt_ns)?;
        write_out(out, "out", polarization_cs(&s.spectrum, &pulse, t_ns))
    })
}

/// Load a dataset CSV (`index,t_ns,PL_percent,sigma_percent`).
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hfb_dataset_load(path: *const c_char, out: *mut *mut HfbDataset) -> HfbStatus {
    guard(|| {
        if path.is_null() {
            return Err(Failure::Null("path"));
        }
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        // SAFETY: caller passes a NUL-terminated string
        let path = unsafe { CStr::from_ptr(path) }
            .to_str()
            .map_err(|_| Failure::Invalid("path is not valid UTF-8".into()))?;
        let data = load_dataset(path)?;
        write_out(out, "out", Box::into_raw(Box::new(HfbDataset { data })))
    })
}

/// Build a dataset from parallel arrays. Polarizations and sigmas are
/// fractions, not percent. `index` may be NULL, in which case points are
/// numbered from 1.
///
/// # Safety
/// Every non-NULL array must hold `n` readable elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hfb_dataset_from_arrays(
    n: usize,
    index: *const i64,
    t_ns: *const f64,
    pl: *const f64,
    sigma: *const f64,
    out: *mut *mut HfbDataset,
) -> HfbStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        for (p, name) in [(t_ns, "t_ns"), (pl, "pl"), (sigma, "sigma")] {
            if p.is_null() && n > 0 {
                return Err(Failure::Null(name));
            }
        }
        let slice = |p: *const f64| -> &[f64] {
            if n == 0 {
                &[]
            } else {
                // SAFETY: non-null and n elements long per the contract
                unsafe { std::slice::from_raw_parts(p, n) }
            }
        };
        let (t, pl, sigma) = (slice(t_ns), slice(pl), slice(sigma));
        let idx: Option<&[i64]> = if index.is_null() || n == 0 {
            None
        } else {
            // SAFETY: as above
            Some(unsafe { std::slice::from_raw_parts(index, n) })
        };
        let points = (0..n)
            .map(|k| DataPoint {
                index: idx.map_or(k as i64 + 1, |ix| ix[k]),
                t: t[k],
                pl: pl[k],
                sigma: sigma[k],
            })
            .collect();
        let data = BeatDataset::new(points, 0.0)?;
        write_out(out, "out", Box::into_raw(Box::new(HfbDataset { data })))
    })
}

/// Number of points; 0 for NULL.
///
/// # Safety
/// `dataset` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hfb_dataset_len(dataset: *const HfbDataset) -> usize {
    unsafe { dataset.as_ref() }.map_or(0, |d| d.data.len())
}

/// # Safety
/// `dataset` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hfb_dataset_free(dataset: *mut HfbDataset) {
    unsafe { free(dataset) }
}

/// Profile uncertainties, full start grid, parallel refinement.
#[no_mangle]
pub extern "C" fn hfb_fit_options_default() -> HfbFitOptions {
    HfbFitOptions {
        max_refinements: 0,
        uncertainty: HfbUncertainty::Profile,
        parallel: true,
    }
}

/// Fit A, B, dt and W. `options` may be NULL for the defaults.
///
/// # Safety
/// `dataset` must be a live handle, `options` NULL or readable, `out` writable.
/// The result is released with [`hfb_fit_result_free`].
#[no_mangle]
pub unsafe extern "C" fn hfb_fit(
    dataset: *const HfbDataset,
    twice_i: i32,
    twice_j: i32,
    options: *const HfbFitOptions,
    out: *mut *mut HfbFitResult,
) -> HfbStatus {
    guard(|| {
        let d = non_null(dataset, "dataset")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        // SAFETY: NULL or readable per the contract
        let opts = unsafe { options.as_ref() }.copied().unwrap_or_else(|| hfb_fit_options_default());
        let system = HyperfineSystem::new(half_int(twice_i, "I")?, half_int(twice_j, "J")?, 0.0, 0.0)?;
        let config = FitConfig {
            max_refinements: (opts.max_refinements > 0).then_some(opts.max_refinements),
            uncertainty: match opts.uncertainty {
                HfbUncertainty::Profile => UncertaintyMethod::Profile,
                HfbUncertainty::Covariance => UncertaintyMethod::Covariance,
            },
            parallel: opts.parallel,
            ..FitConfig::default()
        };
        let result = fit(&d.data, &system, &config)?;
        write_out(out, "out", Box::into_raw(Box::new(HfbFitResult { result, system })))
    })
}

fn to_c(p: &FitParams) -> HfbParams {
    HfbParams {
        a_mhz: p.a,
        b_mhz: p.b,
        dt_ns: p.dt_offset,
        w_ns: p.width,
    }
}

/// Best-fit parameters.
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hfb_fit_result_params(result: *const HfbFitResult, out: *mut HfbParams) -> HfbStatus {
    guard(|| {
        let r = non_null(result, "result")?;
        write_out(out, "out", to_c(&r.result.params))
    })
}

/// 2σ half-widths of the parameters.
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hfb_fit_result_two_sigma(result: *const HfbFitResult, out: *mut HfbParams) -> HfbStatus {
    guard(|| {
        let r = non_null(result, "result")?;
        write_out(out, "out", to_c(&r.result.two_sigma))
    })
}

/// Reduced chi-square at the optimum.
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hfb_fit_result_red_chi2(result: *const HfbFitResult, out: *mut f64) -> HfbStatus {
    guard(|| {
        let r = non_null(result, "result")?;
        write_out(out, "out", r.result.red_chi2)
    })
}

/// JSON report for the fit. Free the returned string with [`hfb_string_free`].
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hfb_fit_result_json(result: *const HfbFitResult, out: *mut *mut c_char) -> HfbStatus {
    guard(|| {
        let r = non_null(result, "result")?;
        let json = FitReport::new(&r.result, &r.system).to_json();
        let c = CString::new(json).expect("JSON has no NUL bytes");
        write_out(out, "out", c.into_raw())
    })
}

/// # Safety
/// `result` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hfb_fit_result_free(result: *mut HfbFitResult) {
    unsafe { free(result) }
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hfb_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw
        drop(unsafe { CString::from_raw(s) });
    }
}
