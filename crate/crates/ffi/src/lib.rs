//! C ABI over the toro solvers.
//!
//! Instances go in as JSON and come back as opaque [`ToroInstance`]
//! handles; solving produces a [`ToroReport`] handle whose fields are read
//! through accessors or dumped as JSON. Every fallible call returns a
//! [`ToroStatus`]; the message for the most recent failure on the calling
//! thread is available from [`toro_last_error`].
//!
//! Ownership: handles are released with their `_free` function, strings
//! returned by the library with [`toro_string_free`]. Passing null to a free
//! function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use toro_core::fvs::FvsMethod;
use toro_core::ilp::{Budget, Engine};
use toro_core::instance::{validate, Instance, Location};
use toro_core::mindist::default_engine;
use toro_core::pipeline::{self, PipelineError, SolveReport, TspMode};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToroStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    /// The instance breaks an invariant (overlapping starts, bad radius, ...).
    InvalidInstance = 4,
    /// The chosen method does not apply to this instance.
    Unsupported = 5,
    /// A report was produced but a solver budget ran out; it may be suboptimal.
    BudgetExhausted = 6,
    SolveFailed = 7,
    OutOfRange = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToroMethod {
    /// Tour pipeline without overlaps, single-FVS pipeline otherwise.
    Auto = 0,
    TspExact = 1,
    TspHeuristic = 2,
    FvsSingle = 3,
    FvsComplete = 4,
    Greedy = 5,
    Random = 6,
}

/// FVS solver for [`ToroMethod::FvsSingle`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToroFvsMethod {
    /// Exact ILP with heuristic fallback.
    Default = 0,
    BruteForce = 1,
    IlpConstraint = 2,
    IlpEnumerate = 3,
    Msch = 4,
    Mch = 5,
    Mdh = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToroLocationKind {
    Start = 0,
    Goal = 1,
    Buffer = 2,
}

/// One pick-and-place of a plan. `from_index`/`to_index` are object
/// positions for start and goal slots, buffer positions otherwise.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToroAction {
    pub object_id: u32,
    pub object_index: usize,
    pub from_kind: ToroLocationKind,
    pub from_index: usize,
    pub to_kind: ToroLocationKind,
    pub to_index: usize,
    pub pick_x: f64,
    pub pick_y: f64,
    pub place_x: f64,
    pub place_y: f64,
    /// Empty-handed travel before the pick.
    pub d_e: f64,
    /// Loaded travel from pick to place.
    pub d_l: f64,
}

/// Opaque validated instance.
pub struct ToroInstance(Instance);

/// Opaque solve result.
pub struct ToroReport(SolveReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(msg).expect("nul bytes stripped")));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: ToroStatus, msg: impl Into<String>) -> ToroStatus {
    set_error(msg);
    status
}

/// Runs `f` with the error slot cleared, turning panics into [`ToroStatus::Panic`].
fn guard(f: impl FnOnce() -> ToroStatus) -> ToroStatus {
    clear_error();
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| p.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        fail(ToroStatus::Panic, format!("panic: {msg}"))
    })
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, ToroStatus> {
    if s.is_null() {
        return Err(fail(ToroStatus::NullArgument, "string argument is null"));
    }
    CStr::from_ptr(s).to_str().map_err(|e| fail(ToroStatus::InvalidUtf8, e.to_string()))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes stripped").into_raw()
}

fn fvs_method(m: ToroFvsMethod) -> Option<FvsMethod> {
    match m {
        ToroFvsMethod::Default => None,
        ToroFvsMethod::BruteForce => Some(FvsMethod::BruteForce),
        ToroFvsMethod::IlpConstraint => Some(FvsMethod::IlpConstraint),
        ToroFvsMethod::IlpEnumerate => Some(FvsMethod::IlpEnumerate),
        ToroFvsMethod::Msch => Some(FvsMethod::Msch),
        ToroFvsMethod::Mch => Some(FvsMethod::Mch),
        ToroFvsMethod::Mdh => Some(FvsMethod::Mdh),
    }
}

fn location(l: Location) -> (ToroLocationKind, usize) {
    match l {
        Location::Start(i) => (ToroLocationKind::Start, i),
        Location::Goal(i) => (ToroLocationKind::Goal, i),
        Location::Buffer(k) => (ToroLocationKind::Buffer, k),
    }
}

fn status_of(e: &PipelineError) -> ToroStatus {
    match e {
        PipelineError::Overlap | PipelineError::UnlabeledOverlap | PipelineError::NotEnoughBuffers { .. } => {
            ToroStatus::Unsupported
        }
        PipelineError::Tsp(toro_core::tsp::TspError::ExactSizeExceeded { .. }) => ToroStatus::Unsupported,
        _ => ToroStatus::SolveFailed,
    }
}

/// Message of the last failed call on this thread, or null after a
/// successful one. The pointer stays valid until the next library call on
/// the same thread.
#[no_mangle]
pub extern "C" fn toro_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn toro_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and validates an instance from nul-terminated JSON.
///
/// # Safety
/// `json` must be null or a valid nul-terminated string; `out` must be null
/// or point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn toro_instance_from_json(json: *const c_char, out: *mut *mut ToroInstance) -> ToroStatus {
    guard(|| {
        if out.is_null() {
            return fail(ToroStatus::NullArgument, "out is null");
        }
        *out = ptr::null_mut();
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let inst = match Instance::from_json(text) {
            Ok(i) => i,
            Err(e) => return fail(ToroStatus::ParseError, e.to_string()),
        };
        let bad = validate(&inst);
        if !bad.is_empty() {
            let list: Vec<String> = bad.iter().map(ToString::to_string).collect();
            return fail(ToroStatus::InvalidInstance, list.join(", "));
        }
        *out = Box::into_raw(Box::new(ToroInstance(inst)));
        ToroStatus::Ok
    })
}

/// # Safety
/// `inst` must be null or a handle from [`toro_instance_from_json`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn toro_instance_free(inst: *mut ToroInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of objects, 0 for null.
///
/// # Safety
/// `inst` must be null or a live instance handle.
#[no_mangle]
pub unsafe extern "C" fn toro_instance_object_count(inst: *const ToroInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.len())
}

/// Whether some start overlaps another object's goal, false for null.
///
/// # Safety
/// `inst` must be null or a live instance handle.
#[no_mangle]
pub unsafe extern "C" fn toro_instance_has_overlap(inst: *const ToroInstance) -> bool {
    inst.as_ref().is_some_and(|i| i.0.has_overlap())
}

/// Solves `inst` with `method`.
///
/// `fvs` only matters for [`ToroMethod::FvsSingle`]. `time_limit_s` bounds
/// each ILP solve; zero or negative selects the default budget. `seed`
/// drives [`ToroMethod::Random`]. On [`ToroStatus::BudgetExhausted`] a
/// usable report is still written to `out`.
///
/// # Safety
/// `inst` must be null or a live instance handle; `out` must be null or
/// point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn toro_solve(
    inst: *const ToroInstance,
    method: ToroMethod,
    fvs: ToroFvsMethod,
    time_limit_s: f64,
    seed: u64,
    out: *mut *mut ToroReport,
) -> ToroStatus {
    guard(|| {
        if out.is_null() {
            return fail(ToroStatus::NullArgument, "out is null");
        }
        *out = ptr::null_mut();
        let Some(ToroInstance(inst)) = inst.as_ref() else {
            return fail(ToroStatus::NullArgument, "instance is null");
        };
        let engine = if time_limit_s > 0.0 && time_limit_s.is_finite() {
            Engine::from_env(Budget::time(Duration::from_secs_f64(time_limit_s)))
        } else {
            default_engine()
        };
        let result = match method {
            ToroMethod::Auto => pipeline::solve(inst, &engine),
            ToroMethod::TspExact => pipeline::toro_no_tsp(inst, TspMode::Exact),
            ToroMethod::TspHeuristic => pipeline::toro_no_tsp(inst, TspMode::Heuristic),
            ToroMethod::FvsSingle => pipeline::toro_fvs_single(inst, fvs_method(fvs), &engine),
            ToroMethod::FvsComplete => pipeline::toro_fvs_complete(inst, &engine),
            ToroMethod::Greedy => pipeline::greedy(inst),
            ToroMethod::Random => pipeline::random(inst, seed),
        };
        match result {
            Ok(r) => {
                let exhausted = r.budget_exhausted;
                *out = Box::into_raw(Box::new(ToroReport(r)));
                if exhausted {
                    fail(ToroStatus::BudgetExhausted, "solver budget exhausted; report may be suboptimal")
                } else {
                    ToroStatus::Ok
                }
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `report` must be null or a handle from [`toro_solve`] that has not been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn toro_report_free(report: *mut ToroReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of pick-and-place actions, 0 for null.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn toro_report_action_count(report: *const ToroReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.grasp_count)
}

/// Total travel distance, NaN for null.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn toro_report_distance(report: *const ToroReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.0.distance_term)
}

/// Weighted cost of the plan, NaN for null.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn toro_report_total_cost(report: *const ToroReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.0.total_cost)
}

/// Whether the plan is certified optimal for the method that produced it.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn toro_report_optimal(report: *const ToroReport) -> bool {
    report.as_ref().is_some_and(|r| r.0.optimal)
}

/// Copies action `index` into `out`.
///
/// # Safety
/// `report` must be null or a live report handle; `out` must be null or
/// point to a writable [`ToroAction`].
#[no_mangle]
pub unsafe extern "C" fn toro_report_action(report: *const ToroReport, index: usize, out: *mut ToroAction) -> ToroStatus {
    guard(|| {
        let (Some(ToroReport(r)), false) = (report.as_ref(), out.is_null()) else {
            return fail(ToroStatus::NullArgument, "report or out is null");
        };
        let Some(a) = r.plan.actions.get(index) else {
            return fail(ToroStatus::OutOfRange, format!("action {index} of {}", r.plan.actions.len()));
        };
        let (from_kind, from_index) = location(a.from);
        let (to_kind, to_index) = location(a.to);
        *out = ToroAction {
            object_id: a.object_id,
            object_index: a.object,
            from_kind,
            from_index,
            to_kind,
            to_index,
            pick_x: a.pick.x,
            pick_y: a.pick.y,
            place_x: a.place.x,
            place_y: a.place.y,
            d_e: a.d_e,
            d_l: a.d_l,
        };
        ToroStatus::Ok
    })
}

/// The full report as JSON, or null for a null handle. Free with
/// [`toro_string_free`].
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn toro_report_to_json(report: *const ToroReport) -> *mut c_char {
    report.as_ref().map_or(ptr::null_mut(), |r| to_c_string(r.0.to_json()))
}

/// Buffered object indices of an FVS run as a JSON array, `null` otherwise.
/// Free with [`toro_string_free`].
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn toro_report_buffered_json(report: *const ToroReport) -> *mut c_char {
    report.as_ref().map_or(ptr::null_mut(), |r| {
        to_c_string(serde_json::to_string(&r.0.fvs_used.as_ref().map(|f| &f.vertices)).expect("serializes"))
    })
}

/// # Safety
/// `s` must be null or a string returned by this library that has not been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn toro_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
