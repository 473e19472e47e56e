//! C ABI for the `anisolab` solvers.
//!
//! Conventions:
//!
//! * Every fallible function returns an [`AlStatus`]; results go through out
//!   pointers. On failure a message is kept per thread and can be copied out
//!   with [`al_last_error`].
//! * Handles ([`AlGrid`], [`AlProblem`]) are opaque, created by `*_new` /
//!   `*_from_config` and released by the matching `*_free`.
//! * Nodal arrays hold the interior nodes with the `X₁` index running
//!   fastest; their length is reported by `al_grid_len` / `al_problem_len`.
//! * Panics never cross the boundary; they surface as `AL_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use anisolab::cli::RunConfig;
use anisolab::grid::{full_norm, GridField, Interval, NormKind, TensorGrid};
use anisolab::solver::{picard_full, picard_limit, resolvent_apply};
use anisolab::studies::Problem;
use anisolab::Error;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlStatus {
    Ok = 0,
    /// A required pointer argument was null.
    Null = 1,
    /// Input rejected for reasons other than configuration syntax.
    InvalidArgument = 2,
    /// Malformed configuration text.
    Config = 3,
    /// CG or Picard iteration did not converge.
    Solver = 4,
    /// Output buffer shorter than the field.
    BufferTooSmall = 5,
    /// Internal panic caught at the boundary.
    Panic = 6,
}

/// Norm selector for [`al_field_norm`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlNorm {
    L2 = 0,
    /// Uses the `r` argument of `al_field_norm`.
    Lr = 1,
    H1 = 2,
    GradX1 = 3,
    GradX2 = 4,
    W = 5,
}

/// Opaque tensor grid.
pub struct AlGrid {
    grid: TensorGrid,
}

/// Opaque problem built from configuration text.
pub struct AlProblem {
    problem: Problem,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> AlStatus {
    match e {
        Error::Config(_) | Error::Io(_) => AlStatus::Config,
        Error::CgFailure { .. } | Error::PicardNonConvergence { .. } => AlStatus::Solver,
        _ => AlStatus::InvalidArgument,
    }
}

/// Run `f` with panics and errors translated into status codes.
fn guard(f: impl FnOnce() -> Result<(), (AlStatus, String)>) -> AlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            AlStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            AlStatus::Panic
        }
    }
}

fn fail(e: Error) -> (AlStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (AlStatus, String) {
    (AlStatus::Null, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or valid for reads of `T`.
unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (AlStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `p` must be null or valid for `len` reads.
unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (AlStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `out` must be null or valid for `capacity` writes.
unsafe fn copy_out(field: &GridField, out: *mut f64, capacity: usize) -> Result<(), (AlStatus, String)> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    let v = field.values();
    if capacity < v.len() {
        return Err((
            AlStatus::BufferTooSmall,
            format!("output buffer holds {capacity} values, field has {}", v.len()),
        ));
    }
    ptr::copy_nonoverlapping(v.as_ptr(), out, v.len());
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn al_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the calling thread's last error message into `buf` (always
/// NUL-terminated when `len > 0`). Returns the buffer size needed for the
/// full message including the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn al_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow();
        let bytes = bytes.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len) - 1;
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Grid on `(omega1_lo, omega1_hi) × (omega2_lo, omega2_hi)` with `n1 × n2`
/// interior nodes.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn al_grid_new(
    omega1_lo: f64,
    omega1_hi: f64,
    omega2_lo: f64,
    omega2_hi: f64,
    n1: usize,
    n2: usize,
    out: *mut *mut AlGrid,
) -> AlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = TensorGrid::new(Interval::new(omega1_lo, omega1_hi), Interval::new(omega2_lo, omega2_hi), n1, n2)
            .map_err(fail)?;
        *out = Box::into_raw(Box::new(AlGrid { grid }));
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or a pointer from `al_grid_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn al_grid_free(grid: *mut AlGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of interior nodes.
///
/// # Safety
/// `grid` must be a live handle; `out_len` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn al_grid_len(grid: *const AlGrid, out_len: *mut usize) -> AlStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        if out_len.is_null() {
            return Err(null("out_len"));
        }
        *out_len = g.grid.len();
        Ok(())
    })
}

/// Build a problem from flat `key = value` configuration text (UTF-8,
/// NUL-terminated). Unspecified keys take the CLI defaults.
///
/// # Safety
/// `config` must be a valid C string; `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn al_problem_from_config(config: *const c_char, out: *mut *mut AlProblem) -> AlStatus {
    guard(|| {
        if config.is_null() {
            return Err(null("config"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(config)
            .to_str()
            .map_err(|e| (AlStatus::Config, format!("config is not UTF-8: {e}")))?;
        let problem = RunConfig::parse(text).and_then(|c| c.problem()).map_err(fail)?;
        problem.validate().map_err(fail)?;
        *out = Box::into_raw(Box::new(AlProblem { problem }));
        Ok(())
    })
}

/// # Safety
/// `problem` must be null or a pointer from `al_problem_from_config` not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn al_problem_free(problem: *mut AlProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of interior nodes of the problem grid.
///
/// # Safety
/// `problem` must be a live handle; `out_len` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn al_problem_len(problem: *const AlProblem, out_len: *mut usize) -> AlStatus {
    guard(|| {
        let p = deref(problem, "problem")?;
        if out_len.is_null() {
            return Err(null("out_len"));
        }
        *out_len = p.problem.grid.len();
        Ok(())
    })
}

/// Solve the ε-problem at `epsilon ∈ (0, 1]` and write the nodal solution.
/// `out_iterations` may be null.
///
/// # Safety
/// `problem` must be a live handle, `out` valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn al_problem_solve(
    problem: *const AlProblem,
    epsilon: f64,
    out: *mut f64,
    capacity: usize,
    out_iterations: *mut usize,
) -> AlStatus {
    guard(|| {
        let p = &deref(problem, "problem")?.problem;
        let (u, h) = picard_full(&p.grid, &p.blocks, &p.spec, &p.solver.with_epsilon(epsilon)).map_err(fail)?;
        copy_out(&u, out, capacity)?;
        if !out_iterations.is_null() {
            *out_iterations = h.iterations();
        }
        Ok(())
    })
}

/// Solve the limit problem and write the nodal solution. `out_iterations`
/// may be null.
///
/// # Safety
/// `problem` must be a live handle, `out` valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn al_problem_solve_limit(
    problem: *const AlProblem,
    out: *mut f64,
    capacity: usize,
    out_iterations: *mut usize,
) -> AlStatus {
    guard(|| {
        let p = &deref(problem, "problem")?.problem;
        let (u, h) = picard_limit(&p.grid, &p.blocks, &p.spec, &p.solver).map_err(fail)?;
        copy_out(&u, out, capacity)?;
        if !out_iterations.is_null() {
            *out_iterations = h.iterations();
        }
        Ok(())
    })
}

/// Norm of the Q1 interpolant of `values` over the whole grid. `kind` is an
/// `AlNorm` value; `r` is read only for `AL_NORM_LR` and must exceed 2.
///
/// # Safety
/// `grid` must be a live handle, `values` valid for `len` reads, `out` for
/// one write.
#[no_mangle]
pub unsafe extern "C" fn al_field_norm(
    grid: *const AlGrid,
    values: *const f64,
    len: usize,
    kind: i32,
    r: f64,
    out: *mut f64,
) -> AlStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.grid;
        let field = GridField::from_values(g, slice(values, len, "values")?.to_vec()).map_err(fail)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let kind = match kind {
            k if k == AlNorm::L2 as i32 => NormKind::L2,
            k if k == AlNorm::Lr as i32 => {
                if !(r > 2.0 && r.is_finite()) {
                    return Err((AlStatus::InvalidArgument, format!("L^r norm needs finite r > 2, got {r}")));
                }
                NormKind::Lr(r)
            }
            k if k == AlNorm::H1 as i32 => NormKind::H1,
            k if k == AlNorm::GradX1 as i32 => NormKind::GradX1,
            k if k == AlNorm::GradX2 as i32 => NormKind::GradX2,
            k if k == AlNorm::W as i32 => NormKind::Wnorm,
            other => return Err((AlStatus::InvalidArgument, format!("unknown norm kind {other}"))),
        };
        *out = full_norm(&field, kind);
        Ok(())
    })
}

/// `(I − n⁻¹Δ)⁻¹ f` with homogeneous Dirichlet conditions, `n ≥ 1`.
///
/// # Safety
/// `grid` must be a live handle, `f` valid for `len` reads and `out` for
/// `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn al_resolvent_apply(
    grid: *const AlGrid,
    n: u64,
    f: *const f64,
    len: usize,
    out: *mut f64,
    capacity: usize,
) -> AlStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.grid;
        let field = GridField::from_values(g, slice(f, len, "f")?.to_vec()).map_err(fail)?;
        let u = resolvent_apply(g, n, &field).map_err(fail)?;
        copy_out(&u, out, capacity)
    })
}
