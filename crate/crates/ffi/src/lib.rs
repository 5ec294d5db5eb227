//! C ABI for the soliton metrology library.
//!
//! Conventions:
//! - Every function returns an [`SmStatus`]; results come back through out
//!   pointers. Status codes match the CLI exit codes (0 success, 2 config /
//!   domain, 3 model validity, 4 numerical precision, 1 I/O), plus 5 for
//!   invalid pointers or panics.
//! - Objects are opaque handles created by `*_new` functions and released
//!   by the matching `*_free`; handles are never shared between `new` and
//!   `free` of different types.
//! - On failure, a thread-local message is readable through
//!   [`sm_last_error_message`] until the next failing call on the same
//!   thread.
//!
//! The C header is generated into `include/soliton_metrology.h` at build
//! time.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use soliton_metrology::bogoliubov::{bogoliubov_model, BdgOptions};
use soliton_metrology::estimator::{Discretization, Gain};
use soliton_metrology::fisher::{
    fisher_bogoliubov, fisher_gaussian_diag, fisher_poisson_closed, fisher_poisson_pixelated,
    FisherResult,
};
use soliton_metrology::montecarlo::{run_trials, TrialConfig};
use soliton_metrology::{CountModel, Error, PhysicalParams, PixelGrid, SolitonModel};

/// Status code of every FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmStatus {
    /// Success.
    SmOk = 0,
    /// File or stream failure.
    SmErrIo = 1,
    /// Invalid configuration or parameter outside its physical domain.
    SmErrConfig = 2,
    /// The requested model is not valid or carries no information.
    SmErrModel = 3,
    /// A numerical result did not converge to the requested precision.
    SmErrPrecision = 4,
    /// Null pointer, zero-length buffer, invalid enum value, or panic.
    SmErrInvalid = 5,
}

/// Measurement model selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmModelKind {
    /// Independent Poisson pixel counts.
    SmModelPoisson = 0,
    /// Independent Gaussian counts with Poisson variances.
    SmModelGaussianDiagonal = 1,
    /// Full quantum model with correlated pixel covariance.
    SmModelBogoliubov = 2,
}

/// Estimator gain selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmGainKind {
    /// Optimal for independent Poisson counts; attains that bound.
    SmGainOptimal = 0,
    /// Hand-tuned dip-weighting profile.
    SmGainTunedDip = 1,
    /// Matched filter for the correlated Gaussian model.
    SmGainMatchedFilter = 2,
}

/// Fisher information of the soliton position and its breakdown.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SmFisher {
    /// Fisher information, units 1/length^2.
    pub fisher: f64,
    /// Cramer-Rao bound on the position variance, 1/fisher.
    pub crlb: f64,
    /// Contribution of the position dependence of the mean counts.
    pub mean_term: f64,
    /// Contribution of the position dependence of the covariance.
    pub cov_term: f64,
}

/// Summary of a Monte-Carlo estimator benchmark.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SmTrialReport {
    pub trials: u64,
    /// Mean position estimate.
    pub mean: f64,
    /// Mean estimate minus the true position.
    pub bias: f64,
    /// Standard error of the mean.
    pub mean_std_error: f64,
    /// Unbiased sample variance of the estimates.
    pub variance: f64,
    /// Standard error of the sample variance.
    pub variance_std_error: f64,
}

/// Opaque condensate-plus-soliton description.
pub struct SmSystem {
    model: SolitonModel,
}

/// Opaque pixel-count measurement model (means plus covariance).
pub struct SmCountModel {
    model: SolitonModel,
    counts: CountModel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn status_of(e: &Error) -> SmStatus {
    match e {
        Error::Io(_) => SmStatus::SmErrIo,
        Error::Config(_) | Error::Domain(_) => SmStatus::SmErrConfig,
        Error::ModelValidity(_) | Error::DegenerateModel(_) => SmStatus::SmErrModel,
        Error::NumericalPrecision(_) => SmStatus::SmErrPrecision,
    }
}

fn fail(status: SmStatus, message: &str) -> SmStatus {
    let msg = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
    status
}

fn fail_error(e: Error) -> SmStatus {
    fail(status_of(&e), &e.to_string())
}

/// Run a fallible body, translating errors and panics to status codes.
fn guard<F: FnOnce() -> Result<(), SmStatus>>(body: F) -> SmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SmStatus::SmOk,
        Ok(Err(status)) => status,
        Err(_) => fail(SmStatus::SmErrInvalid, "internal panic"),
    }
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, SmStatus> {
    unsafe { p.as_mut() }.ok_or_else(|| fail(SmStatus::SmErrInvalid, "null output pointer"))
}

unsafe fn handle_ref<'a, T>(p: *const T) -> Result<&'a T, SmStatus> {
    unsafe { p.as_ref() }.ok_or_else(|| fail(SmStatus::SmErrInvalid, "null handle"))
}

fn grid_of(x0: f64, dx: f64, m_px: usize) -> Result<PixelGrid, SmStatus> {
    PixelGrid::new(x0, dx, m_px).map_err(fail_error)
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn sm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failure on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Create a system from explicit physical constants: action scale,
/// atomic mass, 1D interaction strength, linear density, box length, and
/// soliton position. On success `*out` owns the new handle.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_system_new(
    hbar: f64,
    mass: f64,
    interaction: f64,
    density: f64,
    box_length: f64,
    position: f64,
    out: *mut *mut SmSystem,
) -> SmStatus {
    guard(|| {
        let out = unsafe { out_ref(out) }?;
        let params =
            PhysicalParams::new(hbar, mass, interaction, density, box_length).map_err(fail_error)?;
        let model = SolitonModel::new(params, position).map_err(fail_error)?;
        *out = Box::into_raw(Box::new(SmSystem { model }));
        Ok(())
    })
}

/// Create a system in soliton units from the dimensionless density
/// n*xi, the box length and soliton position in healing lengths.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_system_new_dimensionless(
    n_xi: f64,
    box_length_xi: f64,
    position_xi: f64,
    out: *mut *mut SmSystem,
) -> SmStatus {
    guard(|| {
        let out = unsafe { out_ref(out) }?;
        let params = PhysicalParams::from_density_xi(n_xi, box_length_xi).map_err(fail_error)?;
        let model =
            SolitonModel::new(params, position_xi * params.scales().xi).map_err(fail_error)?;
        *out = Box::into_raw(Box::new(SmSystem { model }));
        Ok(())
    })
}

/// Release a system handle. Null is ignored.
///
/// # Safety
/// `system` must be null or a handle from `sm_system_new*`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sm_system_free(system: *mut SmSystem) {
    if !system.is_null() {
        drop(unsafe { Box::from_raw(system) });
    }
}

/// Derived scales: healing length, inverse soliton width, chemical
/// potential, sound speed. Any out pointer may be null to skip it.
///
/// # Safety
/// `system` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sm_system_scales(
    system: *const SmSystem,
    out_xi: *mut f64,
    out_kappa: *mut f64,
    out_mu: *mut f64,
    out_sound_speed: *mut f64,
) -> SmStatus {
    guard(|| {
        let sys = unsafe { handle_ref(system) }?;
        let s = sys.model.scales();
        for (p, v) in [
            (out_xi, s.xi),
            (out_kappa, s.kappa),
            (out_mu, s.mu),
            (out_sound_speed, s.sound_speed),
        ] {
            if let Some(slot) = unsafe { p.as_mut() } {
                *slot = v;
            }
        }
        Ok(())
    })
}

fn write_fisher(out: &mut SmFisher, r: FisherResult) {
    *out = SmFisher {
        fisher: r.fisher,
        crlb: r.crlb,
        mean_term: r.mean_term,
        cov_term: r.cov_term,
    };
}

/// Ideal-resolution Poisson Fisher information,
/// 16 sqrt(m g) n^(3/2) / (3 hbar).
///
/// # Safety
/// `system` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_fisher_poisson_closed(
    system: *const SmSystem,
    out: *mut f64,
) -> SmStatus {
    guard(|| {
        let sys = unsafe { handle_ref(system) }?;
        let out = unsafe { out_ref(out) }?;
        *out = fisher_poisson_closed(&sys.model.params);
        Ok(())
    })
}

/// Fisher information of independent Poisson pixel counts on a uniform
/// grid of `m_px` pixels of width `dx` starting at `x0`.
///
/// # Safety
/// `system` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_fisher_poisson_pixelated(
    system: *const SmSystem,
    x0: f64,
    dx: f64,
    m_px: usize,
    out: *mut SmFisher,
) -> SmStatus {
    guard(|| {
        let sys = unsafe { handle_ref(system) }?;
        let out = unsafe { out_ref(out) }?;
        let grid = grid_of(x0, dx, m_px)?;
        let r = fisher_poisson_pixelated(&sys.model, &grid).map_err(fail_error)?;
        write_fisher(out, r);
        Ok(())
    })
}

/// Fisher information of independent Gaussian counts with Poisson
/// variances on the same grid convention as the Poisson variant.
///
/// # Safety
/// `system` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_fisher_gaussian_diagonal(
    system: *const SmSystem,
    x0: f64,
    dx: f64,
    m_px: usize,
    out: *mut SmFisher,
) -> SmStatus {
    guard(|| {
        let sys = unsafe { handle_ref(system) }?;
        let out = unsafe { out_ref(out) }?;
        let grid = grid_of(x0, dx, m_px)?;
        let r = fisher_gaussian_diag(&sys.model, &grid).map_err(fail_error)?;
        write_fisher(out, r);
        Ok(())
    })
}

/// Fisher information of the full quantum (Bogoliubov) count model with
/// default numerical options.
///
/// # Safety
/// `system` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_fisher_bogoliubov(
    system: *const SmSystem,
    x0: f64,
    dx: f64,
    m_px: usize,
    out: *mut SmFisher,
) -> SmStatus {
    guard(|| {
        let sys = unsafe { handle_ref(system) }?;
        let out = unsafe { out_ref(out) }?;
        let grid = grid_of(x0, dx, m_px)?;
        let r = fisher_bogoliubov(
            &sys.model.params,
            sys.model.q,
            &grid,
            &BdgOptions::default(),
            None,
        )
        .map_err(fail_error)?;
        write_fisher(out, r);
        Ok(())
    })
}

/// Build a pixel-count measurement model (means plus covariance) on a
/// uniform grid. On success `*out` owns the new handle.
///
/// # Safety
/// `system` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_count_model_new(
    system: *const SmSystem,
    x0: f64,
    dx: f64,
    m_px: usize,
    kind: SmModelKind,
    out: *mut *mut SmCountModel,
) -> SmStatus {
    guard(|| {
        let sys = unsafe { handle_ref(system) }?;
        let out = unsafe { out_ref(out) }?;
        let grid = grid_of(x0, dx, m_px)?;
        let counts = match kind {
            SmModelKind::SmModelPoisson => CountModel::poisson(&sys.model, &grid),
            SmModelKind::SmModelGaussianDiagonal => CountModel::gaussian_diag(&sys.model, &grid),
            SmModelKind::SmModelBogoliubov => {
                bogoliubov_model(&sys.model, &grid, &BdgOptions::default())
            }
        }
        .map_err(fail_error)?;
        *out = Box::into_raw(Box::new(SmCountModel { model: sys.model, counts }));
        Ok(())
    })
}

/// Release a count-model handle. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle from `sm_count_model_new`, not freed.
#[no_mangle]
pub unsafe extern "C" fn sm_count_model_free(model: *mut SmCountModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Number of pixels of the count model.
///
/// # Safety
/// `model` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_count_model_pixels(
    model: *const SmCountModel,
    out: *mut usize,
) -> SmStatus {
    guard(|| {
        let cm = unsafe { handle_ref(model) }?;
        let out = unsafe { out_ref(out) }?;
        *out = cm.counts.m_px();
        Ok(())
    })
}

/// Copy the mean pixel counts into `buf` (`len` must equal the pixel
/// count).
///
/// # Safety
/// `model` must be a valid handle; `buf` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sm_count_model_mean(
    model: *const SmCountModel,
    buf: *mut f64,
    len: usize,
) -> SmStatus {
    guard(|| {
        let cm = unsafe { handle_ref(model) }?;
        if buf.is_null() || len != cm.counts.m_px() {
            return Err(fail(
                SmStatus::SmErrInvalid,
                "mean buffer must hold exactly one double per pixel",
            ));
        }
        let dst = unsafe { std::slice::from_raw_parts_mut(buf, len) };
        dst.copy_from_slice(cm.counts.mean.as_slice());
        Ok(())
    })
}

/// Copy the pixel covariance, row major, into `buf` (`len` must equal the
/// squared pixel count).
///
/// # Safety
/// `model` must be a valid handle; `buf` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sm_count_model_covariance(
    model: *const SmCountModel,
    buf: *mut f64,
    len: usize,
) -> SmStatus {
    guard(|| {
        let cm = unsafe { handle_ref(model) }?;
        let m = cm.counts.m_px();
        if buf.is_null() || len != m * m {
            return Err(fail(
                SmStatus::SmErrInvalid,
                "covariance buffer must hold pixels^2 doubles",
            ));
        }
        let dst = unsafe { std::slice::from_raw_parts_mut(buf, len) };
        for i in 0..m {
            for j in 0..m {
                dst[i * m + j] = cm.counts.cov[(i, j)];
            }
        }
        Ok(())
    })
}

/// Simulate `trials` measurements of the count model and estimate the
/// soliton position in each with the selected gain; summary statistics
/// are written to `out`.
///
/// # Safety
/// `model` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sm_simulate(
    model: *const SmCountModel,
    gain: SmGainKind,
    seed: u64,
    trials: u64,
    out: *mut SmTrialReport,
) -> SmStatus {
    guard(|| {
        let cm = unsafe { handle_ref(model) }?;
        let out = unsafe { out_ref(out) }?;
        let grid = cm.counts.grid;
        let g = match gain {
            SmGainKind::SmGainOptimal => Gain::poisson_optimal(&cm.model, &grid),
            SmGainKind::SmGainTunedDip => {
                Gain::tuned_dip(&cm.model, &grid, Discretization::PixelAverage)
            }
            SmGainKind::SmGainMatchedFilter => Gain::matched_filter(&cm.counts, &cm.model),
        }
        .map_err(fail_error)?;
        let report = run_trials(
            &cm.counts,
            cm.model.q,
            &g,
            &cm.model,
            &TrialConfig { seed, trials: trials as usize },
        )
        .map_err(fail_error)?;
        *out = SmTrialReport {
            trials: report.trials as u64,
            mean: report.mean,
            bias: report.bias,
            mean_std_error: report.mean_std_error,
            variance: report.variance,
            variance_std_error: report.variance_std_error,
        };
        Ok(())
    })
}
