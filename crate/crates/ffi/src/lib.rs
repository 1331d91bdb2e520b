//! C ABI over `lyap3`.
//!
//! Every function returns a [`Lyap3Status`]; results are written through
//! out-pointers. Handles are opaque and must be released with the matching
//! `*_free`. After a non-`Ok` status, `lyap3_last_error` describes the
//! failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use lyap3::bvp::{shoot, solve_bc1, solve_bc2, SolutionBC1, SolutionBC2};
use lyap3::cli::{exit_code, EXIT_CONFIG, EXIT_NO_SOLUTION, EXIT_OK, EXIT_VIOLATION};
use lyap3::lyapunov::{self, verify_abs_bc1, verify_bc1, verify_bc2, zero_count_bound, InequalityKind, InequalityReport, Verdict};
use lyap3::{Equation, Error, Scenario};

/// Status codes; 0 to 4 coincide with the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lyap3Status {
    Ok = 0,
    InvariantViolation = 1,
    NoSolution = 2,
    InvalidConfig = 3,
    RuntimeError = 4,
    NullPointer = 5,
    InvalidUtf8 = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lyap3Kind {
    Thm21 = 0,
    Thm22Left = 1,
    Thm22Right = 2,
    Thm22Full = 3,
    Cor21Abs = 4,
    ZeroCount = 5,
    SupNorm = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lyap3Verdict {
    Holds = 0,
    Fails = 1,
    Inconclusive = 2,
}

/// Flat inequality report; absent `c` / `xi` are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct Lyap3Report {
    pub kind: Lyap3Kind,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub xi: f64,
    pub lhs: f64,
    pub threshold: f64,
    pub margin: f64,
    pub quadrature_error: f64,
    pub holds: bool,
    pub verdict: Lyap3Verdict,
}

impl From<&InequalityReport> for Lyap3Report {
    fn from(r: &InequalityReport) -> Self {
        Lyap3Report {
            kind: match r.kind {
                InequalityKind::Thm21 => Lyap3Kind::Thm21,
                InequalityKind::Thm22Left => Lyap3Kind::Thm22Left,
                InequalityKind::Thm22Right => Lyap3Kind::Thm22Right,
                InequalityKind::Thm22Full => Lyap3Kind::Thm22Full,
                InequalityKind::Cor21Abs => Lyap3Kind::Cor21Abs,
                InequalityKind::ZeroCount => Lyap3Kind::ZeroCount,
                InequalityKind::SupNorm => Lyap3Kind::SupNorm,
            },
            a: r.a,
            b: r.b,
            c: r.c.unwrap_or(f64::NAN),
            xi: r.xi.unwrap_or(f64::NAN),
            lhs: r.lhs,
            threshold: r.threshold,
            margin: r.margin,
            quadrature_error: r.quadrature_error,
            holds: r.holds,
            verdict: match r.verdict {
                Verdict::Holds => Lyap3Verdict::Holds,
                Verdict::Fails => Lyap3Verdict::Fails,
                Verdict::Inconclusive => Lyap3Verdict::Inconclusive,
            },
        }
    }
}

/// A parsed scenario that passed the hypothesis gate.
pub struct Lyap3Scenario {
    scenario: Scenario,
    eq: Equation,
}

pub struct Lyap3Bc1 {
    sol: SolutionBC1,
    eq: Equation,
}

pub struct Lyap3Bc2 {
    sol: SolutionBC2,
    eq: Equation,
    scan_n: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> Lyap3Status {
    match exit_code(e) {
        EXIT_OK => Lyap3Status::Ok,
        EXIT_VIOLATION => Lyap3Status::InvariantViolation,
        EXIT_NO_SOLUTION => Lyap3Status::NoSolution,
        EXIT_CONFIG => Lyap3Status::InvalidConfig,
        _ => Lyap3Status::RuntimeError,
    }
}

enum Failure {
    Core(Error),
    Null(&'static str),
    Utf8,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> Lyap3Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => Lyap3Status::Ok,
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer passed as `{what}`"));
            Lyap3Status::NullPointer
        }
        Ok(Err(Failure::Utf8)) => {
            set_error("string argument is not valid UTF-8".into());
            Lyap3Status::InvalidUtf8
        }
        Err(_) => {
            set_error("panic inside lyap3".into());
            Lyap3Status::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8)
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

/// Message for the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lyap3_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// `(2/(b-a))^(alpha2 (alpha1 + 1))`.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn lyap3_threshold_power(a: f64, b: f64, alpha1: f64, alpha2: f64, out: *mut f64) -> Lyap3Status {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = lyapunov::threshold_power(a, b, alpha1, alpha2)?;
        Ok(())
    })
}

fn scenario_handle(scenario: Scenario) -> Result<*mut Lyap3Scenario, Failure> {
    let eq = scenario.gated_equation()?;
    Ok(Box::into_raw(Box::new(Lyap3Scenario { scenario, eq })))
}

/// Parses a TOML scenario and runs the hypothesis gate.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lyap3_scenario_from_toml(toml: *const c_char, out: *mut *mut Lyap3Scenario) -> Lyap3Status {
    guard(|| {
        let src = str_arg(toml, "toml")?;
        let out = out_arg(out, "out")?;
        *out = scenario_handle(Scenario::from_toml(src)?)?;
        Ok(())
    })
}

/// Loads a TOML scenario file and runs the hypothesis gate.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lyap3_scenario_load(path: *const c_char, out: *mut *mut Lyap3Scenario) -> Lyap3Status {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        *out = scenario_handle(Scenario::load(Path::new(path))?)?;
        Ok(())
    })
}

/// # Safety
/// `s` must come from `lyap3_scenario_*` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lyap3_scenario_free(s: *mut Lyap3Scenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of failed hypothesis checks (always 0 for a loaded handle).
///
/// # Safety
/// `s` must be a live scenario handle; `failed` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lyap3_scenario_failed_checks(s: *const Lyap3Scenario, failed: *mut u32) -> Lyap3Status {
    guard(|| {
        let s = handle(s, "scenario")?;
        let failed = out_arg(failed, "failed")?;
        *failed = s.scenario.hypothesis_checks().iter().filter(|c| !c.holds).count() as u32;
        Ok(())
    })
}

/// Two-point problem on the scenario interval.
///
/// # Safety
/// `s` must be a live scenario handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lyap3_solve_bc1(s: *const Lyap3Scenario, out: *mut *mut Lyap3Bc1) -> Lyap3Status {
    guard(|| {
        let s = handle(s, "scenario")?;
        let out = out_arg(out, "out")?;
        let sc = &s.scenario;
        let sol = solve_bc1(&s.eq, sc.interval.a, sc.interval.b, &sc.bc1_config())?;
        *out = Box::into_raw(Box::new(Lyap3Bc1 { sol, eq: s.eq.clone() }));
        Ok(())
    })
}

/// Endpoints, inflection point and `max |u|` of a two-point solution.
///
/// # Safety
/// `sol` must be a live handle; the out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lyap3_bc1_summary(
    sol: *const Lyap3Bc1,
    a: *mut f64,
    b: *mut f64,
    xi: *mut f64,
    max_u: *mut f64,
) -> Lyap3Status {
    guard(|| {
        let s = &handle(sol, "sol")?.sol;
        *out_arg(a, "a")? = s.a;
        *out_arg(b, "b")? = s.b;
        *out_arg(xi, "xi")? = s.xi;
        *out_arg(max_u, "max_u")? = s.max_u;
        Ok(())
    })
}

/// `u(x)` from the dense output of a two-point solution.
///
/// # Safety
/// `sol` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lyap3_bc1_u_at(sol: *const Lyap3Bc1, x: f64, out: *mut f64) -> Lyap3Status {
    guard(|| {
        let s = &handle(sol, "sol")?.sol;
        let out = out_arg(out, "out")?;
        if !s.trajectory.covers(x, x) {
            return Err(Error::DomainExceeded {
                x,
                lo: s.trajectory.x_start(),
                hi: s.trajectory.x_end(),
            }
            .into());
        }
        *out = s.trajectory.u_at(x);
        Ok(())
    })
}

/// Two-point inequality; with `abs` nonzero the `|q|` variant.
///
/// # Safety
/// `sol` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lyap3_verify_bc1(sol: *const Lyap3Bc1, abs: bool, out: *mut Lyap3Report) -> Lyap3Status {
    guard(|| {
        let h = handle(sol, "sol")?;
        let out = out_arg(out, "out")?;
        let r = if abs { verify_abs_bc1(&h.sol, &h.eq) } else { verify_bc1(&h.sol, &h.eq) };
        match r {
            Ok(r) => {
                *out = (&r).into();
                Ok(())
            }
            Err(Error::InvariantViolation(r)) => {
                *out = (&*r).into();
                Err(Error::InvariantViolation(r).into())
            }
            Err(e) => Err(e.into()),
        }
    })
}

/// # Safety
/// `sol` must come from `lyap3_solve_bc1` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lyap3_bc1_free(sol: *mut Lyap3Bc1) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Three-point problem started at the scenario's `a`.
///
/// # Safety
/// `s` must be a live scenario handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lyap3_solve_bc2(s: *const Lyap3Scenario, out: *mut *mut Lyap3Bc2) -> Lyap3Status {
    guard(|| {
        let s = handle(s, "scenario")?;
        let out = out_arg(out, "out")?;
        let sc = &s.scenario;
        let sol = solve_bc2(&s.eq, sc.interval.a, &sc.bc2_config())?;
        *out = Box::into_raw(Box::new(Lyap3Bc2 {
            sol,
            eq: s.eq.clone(),
            scan_n: sc.verify.scan_n,
        }));
        Ok(())
    })
}

/// The three zeros of a three-point solution.
///
/// # Safety
/// `sol` must be a live handle; the out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lyap3_bc2_zeros(sol: *const Lyap3Bc2, a: *mut f64, b: *mut f64, c: *mut f64) -> Lyap3Status {
    guard(|| {
        let s = &handle(sol, "sol")?.sol;
        *out_arg(a, "a")? = s.a;
        *out_arg(b, "b")? = s.b;
        *out_arg(c, "c")? = s.c;
        Ok(())
    })
}

/// Writes the left, right and full reports to `out[0..3]`.
///
/// # Safety
/// `sol` must be a live handle; `out` must point to three reports.
#[no_mangle]
pub unsafe extern "C" fn lyap3_verify_bc2(sol: *const Lyap3Bc2, out: *mut Lyap3Report) -> Lyap3Status {
    guard(|| {
        let h = handle(sol, "sol")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let reports = verify_bc2(&h.sol, &h.eq, h.scan_n)?;
        for (i, r) in reports.iter().enumerate() {
            *out.add(i) = r.into();
        }
        Ok(())
    })
}

/// # Safety
/// `sol` must come from `lyap3_solve_bc2` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lyap3_bc2_free(sol: *mut Lyap3Bc2) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Zero-count bound on the scenario interval for the trajectory started
/// with the `[zero_count]` data.
///
/// # Safety
/// `s` must be a live scenario handle; the out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lyap3_zero_count(s: *const Lyap3Scenario, n: *mut u32, n_bound: *mut f64) -> Lyap3Status {
    guard(|| {
        let s = handle(s, "scenario")?;
        let n = out_arg(n, "n")?;
        let n_bound = out_arg(n_bound, "n_bound")?;
        let sc = &s.scenario;
        let (a, b) = (sc.interval.a, sc.interval.b);
        let traj = shoot(&s.eq, a, sc.zero_count.slope, sc.zero_count.curvature, b, &sc.ivp())?;
        let r = zero_count_bound(&traj, a, b, &s.eq, sc.verify.scan_n)?;
        *n = r.n as u32;
        *n_bound = r.n_bound;
        Ok(())
    })
}
