//! C interface to the combcpt simulator.
//!
//! Scenarios and trajectories are opaque heap handles. Every function
//! returns a [`CombcptStatus`]; on failure a message is kept per thread and
//! can be fetched with [`combcpt_last_error`]. Handles must be released with
//! the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use combcpt::config::parse_config;
use combcpt::error::{Error, ErrorCategory};
use combcpt::presets::preset;
use combcpt::propagator::Trajectory;
use combcpt::state::StateTolerance;
use combcpt::sweep::Scenario;

/// Result codes. The nonzero simulator codes match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombcptStatus {
    Ok = 0,
    ConfigError = 2,
    IntegrationError = 3,
    InvariantViolation = 4,
    IoError = 5,
    NullPointer = 10,
    InvalidUtf8 = 11,
    OutOfRange = 12,
    Panic = 13,
}

/// A validated scenario: level scheme, decays, pulse train, policy, initial
/// state, radius and velocity.
pub struct CombcptScenario(Scenario);

/// Per-pulse snapshots of one propagation.
pub struct CombcptTrajectory(Trajectory);

/// One snapshot, flattened.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CombcptSnapshot {
    pub pulse: u64,
    pub time_s: f64,
    /// ρ11, ρ22, ρ33, ρ44.
    pub populations: [f64; 4],
    pub re_rho12: f64,
    pub im_rho12: f64,
    pub abs_rho12: f64,
    pub trace_err: f64,
    pub herm_err: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: CombcptStatus, msg: impl Into<String>) -> CombcptStatus {
    set_error(msg);
    status
}

fn from_error(e: &Error) -> CombcptStatus {
    let status = match e.category() {
        ErrorCategory::Config => CombcptStatus::ConfigError,
        ErrorCategory::Integration => CombcptStatus::IntegrationError,
        ErrorCategory::Invariant => CombcptStatus::InvariantViolation,
        ErrorCategory::Io => CombcptStatus::IoError,
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning panics into [`CombcptStatus::Panic`].
fn guard(f: impl FnOnce() -> CombcptStatus) -> CombcptStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == CombcptStatus::Ok {
                set_error("");
            }
            status
        }
        Err(_) => fail(CombcptStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, CombcptStatus> {
    if p.is_null() {
        return Err(fail(CombcptStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(CombcptStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn store_scenario(s: Scenario, out: *mut *mut CombcptScenario) -> CombcptStatus {
    unsafe { *out = Box::into_raw(Box::new(CombcptScenario(s))) };
    CombcptStatus::Ok
}

/// Builds a scenario from TOML config text.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn combcpt_scenario_from_config(
    toml: *const c_char,
    out: *mut *mut CombcptScenario,
) -> CombcptStatus {
    guard(|| {
        if out.is_null() {
            return fail(CombcptStatus::NullPointer, "null output pointer");
        }
        let text = match str_arg(toml) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_config(text).and_then(|c| c.scenario()) {
            Ok(s) => store_scenario(s, out),
            Err(e) => from_error(&e),
        }
    })
}

/// Builds the base scenario of a named preset.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn combcpt_scenario_from_preset(
    name: *const c_char,
    out: *mut *mut CombcptScenario,
) -> CombcptStatus {
    guard(|| {
        if out.is_null() {
            return fail(CombcptStatus::NullPointer, "null output pointer");
        }
        let name = match str_arg(name) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match preset(name).and_then(|c| c.scenario()) {
            Ok(s) => store_scenario(s, out),
            Err(e) => from_error(&e),
        }
    })
}

/// Sets the atom velocity in m/s.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn combcpt_scenario_set_velocity(scenario: *mut CombcptScenario, v: f64) -> CombcptStatus {
    guard(|| {
        let Some(s) = scenario.as_mut() else {
            return fail(CombcptStatus::NullPointer, "null scenario");
        };
        let mut next = s.0;
        next.velocity = v;
        match next.shifted_levels() {
            Ok(_) => {
                s.0 = next;
                CombcptStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Sets the radial sampling position in m.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn combcpt_scenario_set_radius(scenario: *mut CombcptScenario, r: f64) -> CombcptStatus {
    guard(|| {
        let Some(s) = scenario.as_mut() else {
            return fail(CombcptStatus::NullPointer, "null scenario");
        };
        if !(r.is_finite() && r >= 0.0) {
            return fail(CombcptStatus::ConfigError, format!("radius must be >= 0, got {r}"));
        }
        s.0.radius = r;
        CombcptStatus::Ok
    })
}

/// Sets the number of pulses.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn combcpt_scenario_set_pulses(scenario: *mut CombcptScenario, n: u64) -> CombcptStatus {
    guard(|| {
        let Some(s) = scenario.as_mut() else {
            return fail(CombcptStatus::NullPointer, "null scenario");
        };
        match usize::try_from(n) {
            Ok(n) => {
                s.0.spec.n_pulses = n;
                CombcptStatus::Ok
            }
            Err(_) => fail(CombcptStatus::OutOfRange, "pulse count too large"),
        }
    })
}

/// Propagates the scenario and checks every snapshot against the state
/// invariants.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn combcpt_scenario_run(
    scenario: *const CombcptScenario,
    out: *mut *mut CombcptTrajectory,
) -> CombcptStatus {
    guard(|| {
        let (Some(s), false) = (scenario.as_ref(), out.is_null()) else {
            return fail(CombcptStatus::NullPointer, "null scenario or output pointer");
        };
        let result = s.0.run().and_then(|t| {
            t.check_invariants(&StateTolerance::default())?;
            Ok(t)
        });
        match result {
            Ok(t) => {
                *out = Box::into_raw(Box::new(CombcptTrajectory(t)));
                CombcptStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Releases a scenario. Null is accepted.
///
/// # Safety
/// `scenario` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn combcpt_scenario_free(scenario: *mut CombcptScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Number of snapshots, initial state included; 0 for null.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn combcpt_trajectory_len(traj: *const CombcptTrajectory) -> u64 {
    traj.as_ref().map_or(0, |t| t.0.snapshots.len() as u64)
}

/// Copies snapshot `index` into `out`.
///
/// # Safety
/// `traj` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn combcpt_trajectory_snapshot(
    traj: *const CombcptTrajectory,
    index: u64,
    out: *mut CombcptSnapshot,
) -> CombcptStatus {
    guard(|| {
        let (Some(t), false) = (traj.as_ref(), out.is_null()) else {
            return fail(CombcptStatus::NullPointer, "null trajectory or output pointer");
        };
        let Some(s) = usize::try_from(index).ok().and_then(|i| t.0.snapshots.get(i)) else {
            return fail(
                CombcptStatus::OutOfRange,
                format!("snapshot {index} out of range (len {})", t.0.snapshots.len()),
            );
        };
        let c = s.rho.coherence12();
        *out = CombcptSnapshot {
            pulse: s.pulse_index as u64,
            time_s: s.time,
            populations: s.populations(),
            re_rho12: c.re,
            im_rho12: c.im,
            abs_rho12: c.norm(),
            trace_err: s.rho.trace_error(),
            herm_err: s.rho.hermiticity_defect(),
        };
        CombcptStatus::Ok
    })
}

/// Releases a trajectory. Null is accepted.
///
/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn combcpt_trajectory_free(traj: *mut CombcptTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Copies the calling thread's last error message into `buf` (truncated and
/// NUL-terminated) and returns the full message length in bytes. Pass a null
/// `buf` to query the length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn combcpt_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}
