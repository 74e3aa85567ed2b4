//! C interface to the solver.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `_free` function. Every fallible call returns a [`CegrpStatus`];
//! on failure a description is kept per thread and can be read with
//! [`cegrp_last_error_message`]. Strings returned through `char **` out
//! parameters are heap allocated and must be released with
//! [`cegrp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cegrp::close_enough::{optimize_points, TouringProblem};
use cegrp::construction::ConstructionError;
use cegrp::driver::{solve, DriverParams, SolveError, SolveResult};
use cegrp::instance::{generate_instance, parse_instance, serialize_instance, GeneratorParams};
use cegrp::solution::{parse_solution, serialize_solution, total_distance, validate, validate_points};
use cegrp::{Disk, FleetSpec, Instance, Point2};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CegrpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    Infeasible = 4,
    ValidationFailed = 5,
    Panic = 6,
}

/// Parsed problem instance.
pub struct CegrpInstance {
    inner: Instance,
}

/// Outcome of one search run.
pub struct CegrpResult {
    name: String,
    inner: SolveResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(CegrpStatus, String);

fn fail<T>(status: CegrpStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CegrpStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CegrpStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            CegrpStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return fail(CegrpStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(s)
        .to_str()
        .or_else(|_| fail(CegrpStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().map_or_else(|| fail(CegrpStatus::NullPointer, format!("{what} is null")), Ok)
}

fn check_out<T>(out: *mut T) -> Result<(), Failure> {
    if out.is_null() {
        return fail(CegrpStatus::NullPointer, "output pointer is null");
    }
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    check_out(out)?;
    let c = CString::new(s).or_else(|_| fail(CegrpStatus::Panic, "string contains a NUL byte"))?;
    *out = c.into_raw();
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn cegrp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn cegrp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cegrp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an instance document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cegrp_instance_from_json(json: *const c_char, out: *mut *mut CegrpInstance) -> CegrpStatus {
    guard(|| {
        check_out(out)?;
        let text = read_str(json, "json")?;
        let inner = parse_instance(text).or_else(|e| fail(CegrpStatus::ParseError, e.to_string()))?;
        *out = Box::into_raw(Box::new(CegrpInstance { inner }));
        Ok(())
    })
}

/// Random instance. A negative `max_vehicles` leaves the fleet unbounded.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cegrp_instance_generate(
    seed: u64,
    n_nodes: usize,
    n_edges: usize,
    area: f64,
    radius: f64,
    flight_range: f64,
    node_capacity: u32,
    max_vehicles: i64,
    out: *mut *mut CegrpInstance,
) -> CegrpStatus {
    guard(|| {
        check_out(out)?;
        let max_vehicles = if max_vehicles < 0 {
            None
        } else {
            Some(u32::try_from(max_vehicles).or_else(|_| fail(CegrpStatus::InvalidArgument, "max_vehicles too large"))?)
        };
        let fleet = FleetSpec { flight_range, node_capacity, max_vehicles };
        let params = GeneratorParams { n_nodes, n_edges, area, radius, fleet };
        let inner = generate_instance(seed, &params).or_else(|e| fail(CegrpStatus::InvalidArgument, e.to_string()))?;
        *out = Box::into_raw(Box::new(CegrpInstance { inner }));
        Ok(())
    })
}

/// # Safety
/// `instance` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn cegrp_instance_free(instance: *mut CegrpInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// # Safety
/// `instance` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cegrp_instance_to_json(instance: *const CegrpInstance, out: *mut *mut c_char) -> CegrpStatus {
    guard(|| {
        let inst = deref(instance, "instance")?;
        write_string(out, serialize_instance(&inst.inner))
    })
}

/// Number of required nodes plus required edges.
///
/// # Safety
/// `instance` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cegrp_instance_task_count(instance: *const CegrpInstance, out: *mut usize) -> CegrpStatus {
    guard(|| {
        let inst = deref(instance, "instance")?;
        check_out(out)?;
        *out = inst.inner.task_count();
        Ok(())
    })
}

/// Copy of `instance` with every node radius set to `radius`.
///
/// # Safety
/// `instance` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cegrp_instance_with_radius(
    instance: *const CegrpInstance,
    radius: f64,
    out: *mut *mut CegrpInstance,
) -> CegrpStatus {
    guard(|| {
        let inst = deref(instance, "instance")?;
        check_out(out)?;
        if !(radius.is_finite() && radius >= 0.0) {
            return fail(CegrpStatus::InvalidArgument, "radius must be finite and non-negative");
        }
        *out = Box::into_raw(Box::new(CegrpInstance { inner: inst.inner.with_radius(radius) }));
        Ok(())
    })
}

/// Runs the search. `params_json` may be NULL for the defaults; otherwise it
/// is a JSON object with the same keys as the CLI parameter file.
///
/// # Safety
/// `instance` must be a live handle, `params_json` NULL or a NUL-terminated
/// string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cegrp_solve(
    instance: *const CegrpInstance,
    params_json: *const c_char,
    out: *mut *mut CegrpResult,
) -> CegrpStatus {
    guard(|| {
        let inst = deref(instance, "instance")?;
        check_out(out)?;
        let params: DriverParams = if params_json.is_null() {
            DriverParams::default()
        } else {
            let text = read_str(params_json, "params_json")?;
            serde_json::from_str(text).or_else(|e| fail(CegrpStatus::ParseError, format!("params: {e}")))?
        };
        let inner = solve(&inst.inner, &params).or_else(|e| {
            let status = match e {
                SolveError::Construction(ConstructionError::InfeasibleTask { .. } | ConstructionError::FleetExhausted(_)) => {
                    CegrpStatus::Infeasible
                }
                SolveError::Params(_) => CegrpStatus::InvalidArgument,
                _ => CegrpStatus::Infeasible,
            };
            fail(status, e.to_string())
        })?;
        *out = Box::into_raw(Box::new(CegrpResult { name: inst.inner.name().to_string(), inner }));
        Ok(())
    })
}

/// # Safety
/// `result` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn cegrp_result_free(result: *mut CegrpResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Total distance over the optimized touring points.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cegrp_result_objective(result: *const CegrpResult, out: *mut f64) -> CegrpStatus {
    guard(|| {
        let r = deref(result, "result")?;
        check_out(out)?;
        *out = r.inner.objective;
        Ok(())
    })
}

/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cegrp_result_route_count(result: *const CegrpResult, out: *mut usize) -> CegrpStatus {
    guard(|| {
        let r = deref(result, "result")?;
        check_out(out)?;
        *out = r.inner.solution.routes.len();
        Ok(())
    })
}

/// Solution document including the touring points.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cegrp_result_solution_json(result: *const CegrpResult, out: *mut *mut c_char) -> CegrpStatus {
    guard(|| {
        let r = deref(result, "result")?;
        let doc = serialize_solution(&r.name, &r.inner.solution, Some(&r.inner.points), r.inner.objective);
        write_string(out, doc)
    })
}

/// Per-iteration log, one JSON object per line.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cegrp_result_runlog_jsonl(result: *const CegrpResult, out: *mut *mut c_char) -> CegrpStatus {
    guard(|| {
        let r = deref(result, "result")?;
        write_string(out, r.inner.log.to_jsonl())
    })
}

/// Checks a solution document against `instance`. On success the recomputed
/// total distance is written to `total_out` (which may be NULL).
///
/// # Safety
/// `instance` must be a live handle, `solution_json` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cegrp_validate_solution(
    instance: *const CegrpInstance,
    solution_json: *const c_char,
    total_out: *mut f64,
) -> CegrpStatus {
    guard(|| {
        let inst = deref(instance, "instance")?;
        let text = read_str(solution_json, "solution_json")?;
        let file = parse_solution(text).or_else(|e| fail(CegrpStatus::ParseError, e.to_string()))?;
        let report = match &file.points {
            Some(p) => validate_points(&file.solution, &inst.inner, p),
            None => validate(&file.solution, &inst.inner),
        };
        if !report.is_ok() {
            let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            return fail(CegrpStatus::ValidationFailed, msgs.join("; "));
        }
        let total = total_distance(&file.solution, &inst.inner, file.points.as_ref())
            .or_else(|e| fail(CegrpStatus::ValidationFailed, e.to_string()))?;
        if !total_out.is_null() {
            *total_out = total;
        }
        Ok(())
    })
}

/// Shortest closed chain through one point per disk, in the given order.
///
/// `xy` holds `n` centers as interleaved x,y pairs and `radii` their radii.
/// The first and last disks must be the same zero-radius point. The chosen
/// points are written to `out_xy` (room for `2 * n` doubles) and the length to
/// `out_length`.
///
/// # Safety
/// `xy` and `out_xy` must point to `2 * n` doubles, `radii` to `n` doubles,
/// `out_length` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cegrp_optimize_points(
    xy: *const f64,
    radii: *const f64,
    n: usize,
    tol: f64,
    max_iter: usize,
    out_xy: *mut f64,
    out_length: *mut f64,
) -> CegrpStatus {
    guard(|| {
        if xy.is_null() || radii.is_null() {
            return fail(CegrpStatus::NullPointer, "input array is null");
        }
        check_out(out_xy)?;
        check_out(out_length)?;
        if !(tol.is_finite() && tol > 0.0) {
            return fail(CegrpStatus::InvalidArgument, "tol must be positive");
        }
        let xy = std::slice::from_raw_parts(xy, 2 * n);
        let radii = std::slice::from_raw_parts(radii, n);
        let mut disks = Vec::with_capacity(n);
        for i in 0..n {
            let (x, y, r) = (xy[2 * i], xy[2 * i + 1], radii[i]);
            if !(x.is_finite() && y.is_finite() && r.is_finite() && r >= 0.0) {
                return fail(CegrpStatus::InvalidArgument, format!("disk {i} is malformed"));
            }
            disks.push(Disk::new(Point2::new(x, y), r));
        }
        let problem = TouringProblem::new(disks).or_else(|e| fail(CegrpStatus::InvalidArgument, e.to_string()))?;
        let res = optimize_points(&problem, tol, max_iter);
        let out = std::slice::from_raw_parts_mut(out_xy, 2 * n);
        for (i, p) in res.points.iter().enumerate() {
            out[2 * i] = p.x;
            out[2 * i + 1] = p.y;
        }
        *out_length = res.objective;
        Ok(())
    })
}
