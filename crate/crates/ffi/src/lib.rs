//! C ABI over the `mmgeo` channel model.
//!
//! A model is an opaque handle created from configuration text and released
//! with [`mmgeo_model_free`]. Every fallible call returns an [`MmgeoStatus`];
//! on failure the message is available from [`mmgeo_last_error_message`] on
//! the calling thread. Panics never cross the boundary.

use mmgeo::config::Config;
use mmgeo::first_order::{
    avg_first_order_closed, avg_first_order_exact, inverse_path_loss_closed, inverse_path_loss_exact, to_db,
};
use mmgeo::pdp::PdpModel;
use mmgeo::{montecarlo, Error, Orientation};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status codes; the non-zero values below 5 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmgeoStatus {
    Ok = 0,
    ConfigError = 2,
    NumericalError = 3,
    IoError = 4,
    NullPointer = 5,
    InvalidArgument = 6,
    Panic = 7,
}

/// Opaque model handle.
pub struct MmgeoModel {
    config: Config,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmgeoAnalysis {
    pub n_r_exact: f64,
    /// NaN under uniform building orientation, where no closed form exists.
    pub n_r_closed: f64,
    pub pl_db_exact: f64,
    pub pl_db_closed: f64,
    /// Delay statistics in seconds and hertz; NaN when undefined.
    pub tau_mean: f64,
    pub tau_rms: f64,
    pub coherence_bw: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmgeoSimulation {
    pub realizations: usize,
    pub n_r_mean: f64,
    pub n_r_se: f64,
    pub pl_db: f64,
    pub pl_db_se: f64,
    pub tau_rms: f64,
    pub rejection_rate: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MmgeoStatus {
    match e.exit_code() {
        2 => MmgeoStatus::ConfigError,
        4 => MmgeoStatus::IoError,
        _ => MmgeoStatus::NumericalError,
    }
}

enum Fail {
    Model(Error),
    Null(&'static str),
    Arg(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Model(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MmgeoStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MmgeoStatus::Ok,
        Ok(Err(Fail::Model(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer passed as {what}"));
            MmgeoStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(msg);
            MmgeoStatus::InvalidArgument
        }
        Err(_) => {
            set_error("internal panic".into());
            MmgeoStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Arg(format!("{what} is not valid UTF-8")))
}

unsafe fn model<'a>(p: *const MmgeoModel) -> Result<&'a MmgeoModel, Fail> {
    p.as_ref().ok_or(Fail::Null("model"))
}

fn boxed(config: Config, out: *mut *mut MmgeoModel) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    unsafe { *out = Box::into_raw(Box::new(MmgeoModel { config })) };
    Ok(())
}

/// Create a model with the default deployment.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn mmgeo_model_default(out: *mut *mut MmgeoModel) -> MmgeoStatus {
    guard(|| boxed(Config::default(), out))
}

/// Create a model from `key = value` configuration text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn mmgeo_model_from_config(text: *const c_char, out: *mut *mut MmgeoModel) -> MmgeoStatus {
    guard(|| boxed(Config::parse(self::text(text, "text")?)?, out))
}

/// Release a model. Null is ignored.
///
/// # Safety
/// `m` must be null or a handle obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mmgeo_model_free(m: *mut MmgeoModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Assign one configuration key. The model is left unchanged on failure.
///
/// # Safety
/// `m` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn mmgeo_model_set(m: *mut MmgeoModel, key: *const c_char, value: *const c_char) -> MmgeoStatus {
    guard(|| {
        let m = m.as_mut().ok_or(Fail::Null("model"))?;
        let mut next = m.config.clone();
        next.set(text(key, "key")?, text(value, "value")?, 0)?;
        next.validate()?;
        m.config = next;
        Ok(())
    })
}

/// Canonical configuration text of a model, to be released with [`mmgeo_string_free`].
///
/// # Safety
/// `m` must be a live handle and `out` writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn mmgeo_model_serialize(m: *const MmgeoModel, out: *mut *mut c_char) -> MmgeoStatus {
    guard(|| {
        let m = model(m)?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let s = CString::new(m.config.serialize()).map_err(|e| Fail::Arg(e.to_string()))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mmgeo_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Analytic counts, path loss and delay statistics.
///
/// # Safety
/// `m` must be a live handle and `out` a writable [`MmgeoAnalysis`].
#[no_mangle]
pub unsafe extern "C" fn mmgeo_analyze(m: *const MmgeoModel, out: *mut MmgeoAnalysis) -> MmgeoStatus {
    guard(|| {
        let s = model(m)?.config.scenario();
        let out = out.as_mut().ok_or(Fail::Null("out"))?;
        let fixed = matches!(s.orientation, Orientation::Fixed(_));
        let nan = f64::NAN;
        let mut a = MmgeoAnalysis {
            n_r_exact: avg_first_order_exact(&s)?,
            n_r_closed: nan,
            pl_db_exact: -to_db(inverse_path_loss_exact(&s)?),
            pl_db_closed: nan,
            tau_mean: nan,
            tau_rms: nan,
            coherence_bw: nan,
        };
        if fixed {
            a.n_r_closed = avg_first_order_closed(&s)?;
            a.pl_db_closed = -to_db(inverse_path_loss_closed(&s)?);
            match PdpModel::new(&s)?.moments().stats() {
                Ok(d) => {
                    a.tau_mean = d.tau_mean;
                    a.tau_rms = d.tau_rms;
                    a.coherence_bw = d.coherence_bw;
                }
                Err(Error::UndefinedStats(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
        *out = a;
        Ok(())
    })
}

/// Monte Carlo estimates over `realizations` seeded scenes.
///
/// # Safety
/// `m` must be a live handle and `out` a writable [`MmgeoSimulation`].
#[no_mangle]
pub unsafe extern "C" fn mmgeo_simulate(
    m: *const MmgeoModel,
    seed: u64,
    realizations: usize,
    out: *mut MmgeoSimulation,
) -> MmgeoStatus {
    guard(|| {
        let c = &model(m)?.config;
        let out = out.as_mut().ok_or(Fail::Null("out"))?;
        let mut cfg = c.scene_config()?;
        cfg.seed = seed;
        cfg.realizations = realizations;
        let r = montecarlo::run(&c.scenario(), &cfg)?;
        *out = MmgeoSimulation {
            realizations: r.realizations,
            n_r_mean: r.n_r.mean,
            n_r_se: r.n_r.se,
            pl_db: r.path_loss_db,
            pl_db_se: r.path_loss_db_se,
            tau_rms: r.delay.map_or(f64::NAN, |d| d.tau_rms),
            rejection_rate: r.rejection_rate,
        };
        Ok(())
    })
}

/// Evaluate the power delay profile (1/s) at `n` delays (s).
///
/// # Safety
/// `tau` and `out` must each point to `n` doubles; they may be null only when `n` is 0.
#[no_mangle]
pub unsafe extern "C" fn mmgeo_pdp(m: *const MmgeoModel, tau: *const f64, n: usize, out: *mut f64) -> MmgeoStatus {
    guard(|| {
        let model = PdpModel::new(&model(m)?.config.scenario())?;
        if n == 0 {
            return Ok(());
        }
        if tau.is_null() || out.is_null() {
            return Err(Fail::Null("array"));
        }
        let tau = std::slice::from_raw_parts(tau, n);
        let out = std::slice::from_raw_parts_mut(out, n);
        for (o, &t) in out.iter_mut().zip(tau) {
            if !(t.is_finite() && t > 0.0) {
                return Err(Fail::Arg(format!("delay {t} must be positive")));
            }
            *o = model.pdp(t);
        }
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn mmgeo_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mmgeo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
