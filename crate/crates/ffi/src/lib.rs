//! C interface to `rydberg_cz`.
//!
//! Objects cross the boundary as opaque handles created by `rcz_*_new`-style
//! constructors and released by the matching `*_free`. Every fallible call
//! returns an [`RczStatus`]; the message of the last failure on the calling
//! thread is available from [`rcz_last_error`]. Strings returned by the
//! library are released with [`rcz_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rydberg_cz::budget::{self, BudgetOptions, ErrorBudget, Mechanism, SystemConfig};
use rydberg_cz::metrics::ideal_gate;
use rydberg_cz::optimizer::{direct_search, gate_error, Objective, OptimizationProblem};
use rydberg_cz::pulses::PulseShape;
use rydberg_cz::quantum::IntegratorOptions;
use rydberg_cz::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RczStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Integration failed or a result did not converge.
    Numerical = 3,
    /// No pulse met the feasibility threshold; outputs hold the best found.
    Infeasible = 4,
    /// A Rust panic was caught at the boundary.
    Internal = 5,
}

/// Error source selector for [`rcz_mechanism_infidelity`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RczMechanism {
    Decay = 0,
    Recoil = 1,
    Vdw = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RczObjective {
    MinDuration = 0,
    MinBellInfidelity = 1,
    MinRydbergTime = 2,
}

/// Opaque pulse.
pub struct RczPulse(PulseShape);

/// Opaque physical setup.
pub struct RczSystem(SystemConfig);

/// Opaque error budget.
pub struct RczBudget(ErrorBudget);

/// Gate figures of merit; times in units of `1/Omega0`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RczGateSummary {
    pub phi_01: f64,
    pub phi_10: f64,
    pub phi_11: f64,
    /// `T_r` for inputs 00, 01, 10, 11.
    pub rydberg_time: [f64; 4],
    pub mean_rydberg_time: f64,
    pub pair_time: f64,
    pub gate_error: f64,
    pub phase_condition_error: f64,
    pub max_leakage: f64,
}

/// One line of a budget; `entry` is 0 decay, 1 recoil, 2 vdw, 3 summed,
/// 4 full simulation. `analytic` is NaN where no estimate exists.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RczBudgetRow {
    pub entry: i32,
    pub temperature_k: f64,
    pub bell_infidelity: f64,
    pub avg_infidelity: f64,
    pub analytic: f64,
    pub converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> RczStatus {
    match e {
        Error::StepUnderflow { .. }
        | Error::UndefinedPhase { .. }
        | Error::ThermalTail(_)
        | Error::FockNotConverged(_) => RczStatus::Numerical,
        Error::Infeasible { .. } => RczStatus::Infeasible,
        _ => RczStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<RczStatus, (RczStatus, String)>) -> RczStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal error");
            RczStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (RczStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (RczStatus, String) {
    (RczStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (RczStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), (RczStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

fn summary(g: &rydberg_cz::metrics::GateResult) -> RczGateSummary {
    RczGateSummary {
        phi_01: g.phi_01,
        phi_10: g.phi_10,
        phi_11: g.phi_11,
        rydberg_time: g.rydberg_time,
        mean_rydberg_time: g.mean_rydberg_time,
        pair_time: g.pair_time,
        gate_error: gate_error(g),
        phase_condition_error: g.phase_condition_error(),
        max_leakage: g.max_leakage(),
    }
}

/// Message of the last failed call on this thread; valid until the next
/// failing call. Never null.
#[no_mangle]
pub extern "C" fn rcz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn rcz_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn rcz_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn boxed_pulse(p: PulseShape) -> *mut RczPulse {
    Box::into_raw(Box::new(RczPulse(p)))
}

/// Constant detuning with a laser-phase jump `theta` at `tau / 2`.
#[no_mangle]
pub extern "C" fn rcz_pulse_delta_jump(tau: f64, delta0: f64, theta: f64) -> *mut RczPulse {
    boxed_pulse(PulseShape::delta_jump(tau, delta0, theta))
}

#[no_mangle]
pub extern "C" fn rcz_pulse_triangle(
    tau: f64,
    delta0: f64,
    height: f64,
    base: f64,
) -> *mut RczPulse {
    boxed_pulse(PulseShape::triangle(tau, delta0, height, base))
}

#[no_mangle]
pub extern "C" fn rcz_pulse_gaussian(
    tau: f64,
    delta0: f64,
    amplitude: f64,
    width: f64,
) -> *mut RczPulse {
    boxed_pulse(PulseShape::gaussian(tau, delta0, amplitude, width))
}

#[no_mangle]
pub extern "C" fn rcz_pulse_gaussian_ramped(
    tau: f64,
    delta0: f64,
    amplitude: f64,
    width: f64,
    kappa: f64,
) -> *mut RczPulse {
    boxed_pulse(PulseShape::gaussian_ramped(
        tau, delta0, amplitude, width, kappa,
    ))
}

/// Pulse from its JSON form (as produced by [`rcz_pulse_to_json`]); null
/// on error.
///
/// # Safety
/// `json` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rcz_pulse_from_json(json: *const c_char) -> *mut RczPulse {
    if json.is_null() {
        set_error("json is null");
        return ptr::null_mut();
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("json is not UTF-8");
            return ptr::null_mut();
        }
    };
    match serde_json::from_str::<PulseShape>(text) {
        Ok(p) => boxed_pulse(p),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// JSON form of the pulse; release with [`rcz_string_free`]. Null on error.
///
/// # Safety
/// `pulse` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rcz_pulse_to_json(pulse: *const RczPulse) -> *mut c_char {
    match pulse.as_ref() {
        Some(p) => CString::new(serde_json::to_string(&p.0).expect("pulse serializes"))
            .map(CString::into_raw)
            .unwrap_or(ptr::null_mut()),
        None => {
            set_error("pulse is null");
            ptr::null_mut()
        }
    }
}

/// Gate duration `tau Omega0`; NaN for a null handle.
///
/// # Safety
/// `pulse` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rcz_pulse_tau(pulse: *const RczPulse) -> f64 {
    pulse.as_ref().map_or(f64::NAN, |p| p.0.tau)
}

/// # Safety
/// `pulse` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rcz_pulse_free(pulse: *mut RczPulse) {
    if !pulse.is_null() {
        drop(Box::from_raw(pulse));
    }
}

/// Strontium-88 setup at 10 MHz Rabi frequency.
#[no_mangle]
pub extern "C" fn rcz_system_table_one() -> *mut RczSystem {
    Box::into_raw(Box::new(RczSystem(SystemConfig::table_one())))
}

/// Same atoms at 40 MHz and 2.38 um separation.
#[no_mangle]
pub extern "C" fn rcz_system_forty_megahertz() -> *mut RczSystem {
    Box::into_raw(Box::new(RczSystem(SystemConfig::forty_megahertz())))
}

/// # Safety
/// `system` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rcz_system_set_temperature(
    system: *mut RczSystem,
    kelvin: f64,
) -> RczStatus {
    guard(|| {
        let s = system.as_mut().ok_or_else(|| null("system"))?;
        if !(kelvin >= 0.0 && kelvin.is_finite()) {
            return Err((
                RczStatus::InvalidArgument,
                format!("temperature {kelvin} K"),
            ));
        }
        s.0.temperature_k = kelvin;
        Ok(RczStatus::Ok)
    })
}

/// `V / hbar Omega0`; NaN for a null handle.
///
/// # Safety
/// `system` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rcz_system_interaction(system: *const RczSystem) -> f64 {
    system.as_ref().map_or(f64::NAN, |s| s.0.interaction())
}

/// # Safety
/// `system` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rcz_system_free(system: *mut RczSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Runs the idealized gate at blockade `interaction` (`V / hbar Omega0`).
///
/// # Safety
/// `pulse` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rcz_ideal_gate(
    interaction: f64,
    pulse: *const RczPulse,
    tolerance: f64,
    out: *mut RczGateSummary,
) -> RczStatus {
    guard(|| {
        let p = deref(pulse, "pulse")?;
        let g = ideal_gate(
            interaction,
            &p.0,
            &IntegratorOptions::with_tolerance(tolerance),
        )
        .map_err(lib_err)?;
        write(out, summary(&g), "out")?;
        Ok(RczStatus::Ok)
    })
}

/// Optimizes the family of `template` with its default free parameters.
/// On `Ok` or `Infeasible` the best pulse is stored in `*out_pulse` (a new
/// handle owned by the caller) and its summary in `*out`.
///
/// # Safety
/// `template` must be a live handle; `out_pulse` and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rcz_optimize(
    template: *const RczPulse,
    interaction: f64,
    objective: RczObjective,
    seed: u64,
    out_pulse: *mut *mut RczPulse,
    out: *mut RczGateSummary,
) -> RczStatus {
    guard(|| {
        let t = deref(template, "template")?;
        if out_pulse.is_null() || out.is_null() {
            return Err(null("output"));
        }
        let objective = match objective {
            RczObjective::MinDuration => Objective::MinDurationFeasible,
            RczObjective::MinBellInfidelity => Objective::MinBellInfidelity,
            RczObjective::MinRydbergTime => Objective::MinRydbergTime,
        };
        let mut problem = OptimizationProblem::new(objective, t.0.clone(), interaction);
        problem.seed = seed;
        let r = direct_search(&problem).map_err(lib_err)?;
        write(out, summary(&r.gate), "out")?;
        write(out_pulse, boxed_pulse(r.pulse.clone()), "out_pulse")?;
        if r.feasible || objective == Objective::MinBellInfidelity {
            Ok(RczStatus::Ok)
        } else {
            set_error(&format!(
                "best gate error {:.3e} above threshold",
                r.gate_error
            ));
            Ok(RczStatus::Infeasible)
        }
    })
}

/// Infidelity from one error source at temperature `kelvin`, with the
/// analytic estimate. `*converged` is false (and the numeric outputs NaN)
/// when the Fock truncation did not converge.
///
/// # Safety
/// Handles must be live; output pointers writable.
#[no_mangle]
pub unsafe extern "C" fn rcz_mechanism_infidelity(
    system: *const RczSystem,
    pulse: *const RczPulse,
    mechanism: RczMechanism,
    kelvin: f64,
    bell: *mut f64,
    avg: *mut f64,
    analytic: *mut f64,
    converged: *mut bool,
) -> RczStatus {
    guard(|| {
        let s = deref(system, "system")?;
        let p = deref(pulse, "pulse")?;
        let m = match mechanism {
            RczMechanism::Decay => Mechanism::Decay,
            RczMechanism::Recoil => Mechanism::Recoil,
            RczMechanism::Vdw => Mechanism::Vdw,
        };
        let r = budget::mechanism_simulation(m, &s.0, &p.0, kelvin, &BudgetOptions::default())
            .map_err(lib_err)?;
        write(bell, r.bell_infidelity, "bell")?;
        write(avg, r.avg_infidelity, "avg")?;
        write(analytic, r.analytic, "analytic")?;
        write(converged, r.converged, "converged")?;
        Ok(RczStatus::Ok)
    })
}

/// Full error budget at `n` temperatures (kelvin). The new handle is
/// stored in `*out`.
///
/// # Safety
/// `temperatures` must point to `n` doubles; handles live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rcz_budget_compute(
    system: *const RczSystem,
    pulse: *const RczPulse,
    temperatures: *const f64,
    n: usize,
    out: *mut *mut RczBudget,
) -> RczStatus {
    guard(|| {
        let s = deref(system, "system")?;
        let p = deref(pulse, "pulse")?;
        if temperatures.is_null() || n == 0 {
            return Err((RczStatus::InvalidArgument, "no temperatures".into()));
        }
        let temps = std::slice::from_raw_parts(temperatures, n);
        let b =
            budget::full_budget(&s.0, &p.0, temps, &BudgetOptions::default()).map_err(lib_err)?;
        write(out, Box::into_raw(Box::new(RczBudget(b))), "out")?;
        Ok(RczStatus::Ok)
    })
}

/// Number of rows; 0 for a null handle.
///
/// # Safety
/// `budget` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rcz_budget_len(budget: *const RczBudget) -> usize {
    budget.as_ref().map_or(0, |b| b.0.rows.len())
}

/// # Safety
/// `budget` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rcz_budget_row(
    budget: *const RczBudget,
    index: usize,
    out: *mut RczBudgetRow,
) -> RczStatus {
    guard(|| {
        let b = deref(budget, "budget")?;
        let r = b.0.rows.get(index).ok_or_else(|| {
            (
                RczStatus::InvalidArgument,
                format!("row {index} of {}", b.0.rows.len()),
            )
        })?;
        let entry = match r.entry.as_str() {
            "decay" => 0,
            "recoil" => 1,
            "vdw" => 2,
            "summed" => 3,
            _ => 4,
        };
        let row = RczBudgetRow {
            entry,
            temperature_k: r.temperature_k,
            bell_infidelity: r.bell_infidelity,
            avg_infidelity: r.avg_infidelity,
            analytic: r.analytic.unwrap_or(f64::NAN),
            converged: r.converged,
        };
        write(out, row, "out")?;
        Ok(RczStatus::Ok)
    })
}

/// JSON form of the budget; release with [`rcz_string_free`].
///
/// # Safety
/// `budget` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rcz_budget_to_json(budget: *const RczBudget) -> *mut c_char {
    match budget.as_ref() {
        Some(b) => CString::new(serde_json::to_string(&b.0).expect("budget serializes"))
            .map(CString::into_raw)
            .unwrap_or(ptr::null_mut()),
        None => {
            set_error("budget is null");
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `budget` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rcz_budget_free(budget: *mut RczBudget) {
    if !budget.is_null() {
        drop(Box::from_raw(budget));
    }
}
