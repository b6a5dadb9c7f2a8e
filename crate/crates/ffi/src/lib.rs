//! C ABI for the `fobw` solver.
//!
//! Every function returns a [`FobwStatus`]; on anything other than
//! `FOBW_STATUS_OK` a message is available from [`fobw_last_error`] on the same
//! thread. Solutions are opaque handles released with [`fobw_solution_free`].
//!
//! # Safety
//!
//! Pointer arguments must be null or valid for the access the function
//! documents. Strings are NUL-terminated UTF-8. Null pointers are reported
//! as `FOBW_STATUS_ERR_NULL` rather than dereferenced.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fobw::basis::WaveletBasisSpec;
use fobw::cli::preset_problem;
use fobw::expr::Expr;
use fobw::fracops::OrderFunction;
use fobw::reference::residual_sample;
use fobw::solver::{assemble, newton_solve, Forcing, NewtonOptions, OscillatorProblem, SolutionApproximant};
use fobw::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FobwStatus {
    Ok = 0,
    ErrNull = 1,
    ErrArgument = 2,
    ErrDomain = 3,
    ErrSyntax = 4,
    ErrConfig = 5,
    ErrSolver = 6,
    /// Newton stopped short of tolerance; the handle still holds the last iterate.
    ErrNotConverged = 7,
    ErrAccuracy = 8,
    ErrPanic = 9,
    ErrOther = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FobwForcing {
    Forced = 0,
    ForceFree = 1,
    /// Use `forcing_expr`.
    Expression = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FobwProblemParams {
    pub mu: f64,
    pub a: f64,
    pub b: f64,
    pub f: f64,
    pub omega: f64,
    pub forcing: FobwForcing,
    /// Expression in `t`, read only when `forcing` is `Expression`.
    pub forcing_expr: *const c_char,
    /// Order as a number or an expression in `t`; null means 2.
    pub alpha: *const c_char,
    pub init_value: f64,
    pub init_slope: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FobwReport {
    pub iterations: usize,
    pub final_residual_norm: f64,
    pub converged: bool,
}

/// Opaque solution handle.
pub struct FobwSolution {
    approx: SolutionApproximant,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> FobwStatus {
    match err {
        Error::Argument(_) => FobwStatus::ErrArgument,
        Error::Domain(_) => FobwStatus::ErrDomain,
        Error::Syntax { .. } | Error::UnknownIdentifier { .. } => FobwStatus::ErrSyntax,
        Error::Config(_) => FobwStatus::ErrConfig,
        Error::Solver(_) => FobwStatus::ErrSolver,
        Error::Accuracy { .. } => FobwStatus::ErrAccuracy,
        _ => FobwStatus::ErrOther,
    }
}

struct Failure(FobwStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(FobwStatus::ErrNull, format!("`{what}` is null"))
}

fn guard(body: impl FnOnce() -> Result<FobwStatus, Failure>) -> FobwStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FobwStatus::ErrPanic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(FobwStatus::ErrArgument, format!("`{what}` is not UTF-8")))
}

unsafe fn order_arg(p: *const c_char) -> Result<OrderFunction, Failure> {
    if p.is_null() {
        return Ok(OrderFunction::Constant(2.0));
    }
    let src = str_arg(p, "alpha")?;
    Ok(match src.trim().parse::<f64>() {
        Ok(v) => OrderFunction::constant(v)?,
        Err(_) => OrderFunction::parse(src)?,
    })
}

unsafe fn solution<'a>(h: *const FobwSolution) -> Result<&'a SolutionApproximant, Failure> {
    h.as_ref().map(|s| &s.approx).ok_or_else(|| null("solution"))
}

unsafe fn write_out<T>(out: *mut T, v: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

fn solve_into(
    problem: OscillatorProblem,
    k: u32,
    m: u32,
    gamma: f64,
    out: *mut *mut FobwSolution,
) -> Result<FobwStatus, Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    let spec = WaveletBasisSpec::new(k, m, gamma)?;
    let sys = assemble(&problem, &spec)?;
    let report = newton_solve(&sys, NewtonOptions::default())?;
    let converged = report.converged;
    let msg = format!(
        "no convergence after {} iterations (residual {:e})",
        report.iterations, report.final_residual_norm
    );
    let handle = Box::new(FobwSolution {
        approx: SolutionApproximant::from_report(&sys, report),
    });
    unsafe { out.write(Box::into_raw(handle)) };
    if converged {
        Ok(FobwStatus::Ok)
    } else {
        Err(Failure(FobwStatus::ErrNotConverged, msg))
    }
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fobw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn fobw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub unsafe extern "C" fn fobw_gamma(x: f64, out: *mut f64) -> FobwStatus {
    guard(|| {
        write_out(out, fobw::special::gamma(x)?, "out")?;
        Ok(FobwStatus::Ok)
    })
}

/// Solve on the basis `(k, m, gamma)`. `*out` receives a handle on `FOBW_STATUS_OK`
/// and on `FOBW_STATUS_ERR_NOT_CONVERGED`; it is left untouched otherwise.
#[no_mangle]
pub unsafe extern "C" fn fobw_solve(
    params: *const FobwProblemParams,
    k: u32,
    m: u32,
    gamma: f64,
    out: *mut *mut FobwSolution,
) -> FobwStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let forcing = match p.forcing {
            FobwForcing::Forced => Forcing::Forced,
            FobwForcing::ForceFree => Forcing::ForceFree,
            FobwForcing::Expression => Forcing::Expression(Expr::parse(str_arg(p.forcing_expr, "forcing_expr")?)?),
        };
        let problem = OscillatorProblem {
            mu: p.mu,
            a: p.a,
            b: p.b,
            f: p.f,
            omega: p.omega,
            forcing,
            alpha: order_arg(p.alpha)?,
            init_value: p.init_value,
            init_slope: p.init_slope,
        };
        problem.validate()?;
        solve_into(problem, k, m, gamma, out)
    })
}

/// As [`fobw_solve`] for a named preset; `alpha` may be null for order 2.
#[no_mangle]
pub unsafe extern "C" fn fobw_solve_preset(
    name: *const c_char,
    alpha: *const c_char,
    k: u32,
    m: u32,
    gamma: f64,
    out: *mut *mut FobwSolution,
) -> FobwStatus {
    guard(|| {
        let mut problem = preset_problem(str_arg(name, "name")?)?;
        problem.alpha = order_arg(alpha)?;
        solve_into(problem, k, m, gamma, out)
    })
}

/// Approximant value and first two derivatives at `t` in [0, 1].
#[no_mangle]
pub unsafe extern "C" fn fobw_solution_eval(
    h: *const FobwSolution,
    t: f64,
    y: *mut f64,
    dy: *mut f64,
    d2y: *mut f64,
) -> FobwStatus {
    guard(|| {
        let (v, d1, d2) = solution(h)?.eval(t)?;
        write_out(y, v, "y")?;
        write_out(dy, d1, "dy")?;
        write_out(d2y, d2, "d2y")?;
        Ok(FobwStatus::Ok)
    })
}

/// Caputo derivative of the problem's order at `t`.
#[no_mangle]
pub unsafe extern "C" fn fobw_solution_caputo(h: *const FobwSolution, t: f64, out: *mut f64) -> FobwStatus {
    guard(|| {
        write_out(out, solution(h)?.caputo(t)?, "out")?;
        Ok(FobwStatus::Ok)
    })
}

/// `|R(t)|` of the equation on the approximant.
#[no_mangle]
pub unsafe extern "C" fn fobw_solution_residual(h: *const FobwSolution, t: f64, out: *mut f64) -> FobwStatus {
    guard(|| {
        let s = solution(h)?;
        write_out(out, residual_sample(s, s.problem(), t)?, "out")?;
        Ok(FobwStatus::Ok)
    })
}

/// Copy up to `cap` coefficients into `buf`; `*len` gets the full count.
/// Pass `buf = NULL, cap = 0` to query the length.
#[no_mangle]
pub unsafe extern "C" fn fobw_solution_coefficients(
    h: *const FobwSolution,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> FobwStatus {
    guard(|| {
        let u = solution(h)?.coefficients().as_slice();
        write_out(len, u.len(), "len")?;
        if cap > 0 {
            if buf.is_null() {
                return Err(null("buf"));
            }
            ptr::copy_nonoverlapping(u.as_ptr(), buf, cap.min(u.len()));
        }
        Ok(FobwStatus::Ok)
    })
}

#[no_mangle]
pub unsafe extern "C" fn fobw_solution_report(h: *const FobwSolution, out: *mut FobwReport) -> FobwStatus {
    guard(|| {
        let r = solution(h)?
            .report()
            .ok_or_else(|| Failure(FobwStatus::ErrArgument, "solution carries no solver report".into()))?;
        let rep = FobwReport {
            iterations: r.iterations,
            final_residual_norm: r.final_residual_norm,
            converged: r.converged,
        };
        write_out(out, rep, "out")?;
        Ok(FobwStatus::Ok)
    })
}

/// Release a handle; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fobw_solution_free(h: *mut FobwSolution) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}
