//! C ABI for the MIT* motion planner.
//!
//! The interface follows a conventional opaque-handle design: problems,
//! planner configurations, and solve results live behind pointers created
//! and destroyed by paired `_new`/`_free` calls, every fallible function
//! returns a [`MitStatus`], and the most recent error message is kept in
//! thread-local storage for retrieval with [`mit_last_error_message`].
//! The C header is regenerated into `include/mitstar.h` on every build.
//!
//! All pointer arguments are checked against null, and panics are caught
//! at the boundary and reported as [`MitStatus::Panic`], so no Rust unwind
//! ever crosses into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fmt::Display;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;

use mitstar::planner::{solve, ClockMode, PlannerConfig, PlannerVariant, SolveOutcome};
use mitstar::space::{make_scenario, ProblemDef, ScenarioFamily};

/// Outcome of a C API call. `Ok` is zero; every failure is nonzero and
/// leaves a message readable through [`mit_last_error_message`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MitStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer,
    /// An argument failed validation; the error message has details.
    InvalidArgument,
    /// The planner variant name was not recognized.
    UnknownVariant,
    /// The solve itself failed (not the same as finding no solution).
    SolveFailed,
    /// The result holds no solution path.
    NoSolution,
    /// An index argument was past the end of the collection.
    IndexOutOfRange,
    /// The caller-provided buffer is too small for the requested copy.
    BufferTooSmall,
    /// A panic was caught at the language boundary.
    Panic,
}

/// A motion-planning problem instance (opaque).
pub struct MitProblem(ProblemDef);

/// Planner settings for one solve (opaque).
pub struct MitConfig(PlannerConfig);

/// The result of one solve: solution events, the best path, and counters
/// (opaque).
pub struct MitSolution(SolveOutcome);

/// One solution discovery during a solve.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MitEvent {
    /// Clock reading when the solution was found, in seconds.
    pub time_seconds: f64,
    pub cost: f64,
    /// True for the first solution of the run, false for improvements.
    pub is_initial: bool,
}

/// Counters accumulated over one solve.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MitRunStats {
    /// States added to the planner's graph or trees.
    pub n_samples: u64,
    /// State evaluations spent in full motion validation.
    pub n_full_checks: u64,
    /// State evaluations spent in sparse motion validation.
    pub n_sparse_checks: u64,
    pub n_batches: u64,
    /// Abstract work performed, the basis of the deterministic clock.
    pub work_units: u64,
    /// Final reading of the solve clock, in its mode's seconds.
    pub elapsed_seconds: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Display) {
    let text = message.to_string().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).ok();
    });
}

fn clear_error() {
    LAST_ERROR.with(|slot| slot.borrow_mut().take());
}

fn fail(status: MitStatus, message: impl Display) -> MitStatus {
    set_error(message);
    status
}

/// Runs `body` with a panic guard; successful calls clear the error slot
/// first so `mit_last_error_message` never reports a stale failure.
fn guarded(body: impl FnOnce() -> MitStatus) -> MitStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let text = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            fail(MitStatus::Panic, format_args!("panic: {text}"))
        }
    }
}

/// Reads a required UTF-8 C string argument.
///
/// # Safety
/// `ptr` must be null or a valid nul-terminated string.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, MitStatus> {
    if ptr.is_null() {
        return Err(fail(MitStatus::NullPointer, "string argument is null"));
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|e| fail(MitStatus::InvalidArgument, format_args!("invalid UTF-8: {e}")))
}

/// Version of the planner library as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn mit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Returns the error message of the most recent failed call on this
/// thread, or null when the last call succeeded. The caller owns the
/// returned string and must release it with [`mit_string_free`].
#[no_mangle]
pub extern "C" fn mit_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or an unreleased string obtained from this library.
#[no_mangle]
pub unsafe extern "C" fn mit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parses a problem from its JSON description.
///
/// On success `*out` holds a new problem that must be released with
/// [`mit_problem_free`].
///
/// # Safety
/// `json` must be a valid nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mit_problem_from_json(
    json: *const c_char,
    out: *mut *mut MitProblem,
) -> MitStatus {
    guarded(|| {
        if out.is_null() {
            return fail(MitStatus::NullPointer, "out pointer is null");
        }
        let text = match unsafe { read_str(json) } {
            Ok(t) => t,
            Err(status) => return status,
        };
        match ProblemDef::from_json_str(text) {
            Ok(problem) => {
                unsafe { *out = Box::into_raw(Box::new(MitProblem(problem))) };
                MitStatus::Ok
            }
            Err(e) => fail(MitStatus::InvalidArgument, e),
        }
    })
}

/// Serializes a problem to JSON with enough digits to round-trip exactly.
/// The caller owns `*out_json` and must release it with [`mit_string_free`].
///
/// # Safety
/// `problem` must be a live problem handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mit_problem_to_json(
    problem: *const MitProblem,
    out_json: *mut *mut c_char,
) -> MitStatus {
    guarded(|| {
        if problem.is_null() || out_json.is_null() {
            return fail(MitStatus::NullPointer, "problem or out pointer is null");
        }
        let problem = unsafe { &*problem };
        match problem.0.to_json_string() {
            Ok(json) => match CString::new(json) {
                Ok(cstring) => {
                    unsafe { *out_json = cstring.into_raw() };
                    MitStatus::Ok
                }
                Err(e) => fail(MitStatus::InvalidArgument, e),
            },
            Err(e) => fail(MitStatus::InvalidArgument, e),
        }
    })
}

/// Builds a benchmark scenario. `family` is one of `"fg"`, `"rr"`, `"dw"`,
/// or `"ge"`; `dim` must be 2, 4, 8, or 16. The `rr` family draws its
/// obstacles from `seed`; the other families ignore it.
///
/// # Safety
/// `family` must be a valid nul-terminated string and `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn mit_problem_scenario(
    family: *const c_char,
    dim: usize,
    seed: u64,
    out: *mut *mut MitProblem,
) -> MitStatus {
    guarded(|| {
        if out.is_null() {
            return fail(MitStatus::NullPointer, "out pointer is null");
        }
        let name = match unsafe { read_str(family) } {
            Ok(t) => t,
            Err(status) => return status,
        };
        let family = match ScenarioFamily::from_str(name) {
            Ok(f) => f,
            Err(e) => return fail(MitStatus::InvalidArgument, e),
        };
        match make_scenario(family, dim, seed) {
            Ok(problem) => {
                unsafe { *out = Box::into_raw(Box::new(MitProblem(problem))) };
                MitStatus::Ok
            }
            Err(e) => fail(MitStatus::InvalidArgument, e),
        }
    })
}

/// Dimension of the problem's configuration space, or 0 for null.
///
/// # Safety
/// `problem` must be null or a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn mit_problem_dim(problem: *const MitProblem) -> usize {
    if problem.is_null() {
        return 0;
    }
    unsafe { &*problem }.0.dim
}

/// Releases a problem handle. Null is ignored.
///
/// # Safety
/// `problem` must be null or an unreleased handle from this library.
#[no_mangle]
pub unsafe extern "C" fn mit_problem_free(problem: *mut MitProblem) {
    if !problem.is_null() {
        drop(unsafe { Box::from_raw(problem) });
    }
}

/// Creates a planner configuration.
///
/// `variant` selects the planner: `"mitstar"`, `"mitstar-eis"`,
/// `"mitstar-as"`, `"mitstar-sc"`, `"baseline-off"`, or `"rrt-connect"`.
/// `max_time_seconds` is the solve budget on the deterministic virtual
/// clock (see [`mit_config_use_wall_clock`]); it may be infinite if a
/// batch cap is set afterwards. `seed` fixes the random stream: equal
/// seeds give bit-identical runs under the virtual clock.
///
/// # Safety
/// `variant` must be a valid nul-terminated string and `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn mit_config_new(
    variant: *const c_char,
    max_time_seconds: f64,
    seed: u64,
    out: *mut *mut MitConfig,
) -> MitStatus {
    guarded(|| {
        if out.is_null() {
            return fail(MitStatus::NullPointer, "out pointer is null");
        }
        let name = match unsafe { read_str(variant) } {
            Ok(t) => t,
            Err(status) => return status,
        };
        let variant = match PlannerVariant::from_str(name) {
            Ok(v) => v,
            Err(e) => return fail(MitStatus::UnknownVariant, e),
        };
        let config = PlannerConfig::for_variant(variant, max_time_seconds, seed);
        unsafe { *out = Box::into_raw(Box::new(MitConfig(config))) };
        MitStatus::Ok
    })
}

/// Sets the number of states sampled per batch. Must be positive.
///
/// # Safety
/// `config` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn mit_config_set_batch_size(
    config: *mut MitConfig,
    batch_size: usize,
) -> MitStatus {
    guarded(|| {
        if config.is_null() {
            return fail(MitStatus::NullPointer, "config pointer is null");
        }
        if batch_size == 0 {
            return fail(MitStatus::InvalidArgument, "batch size must be positive");
        }
        unsafe { &mut *config }.0.batch_size = batch_size;
        MitStatus::Ok
    })
}

/// Caps the number of sampling batches; 0 removes the cap. A cap is
/// required when the time budget is infinite.
///
/// # Safety
/// `config` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn mit_config_set_max_batches(
    config: *mut MitConfig,
    max_batches: u64,
) -> MitStatus {
    guarded(|| {
        if config.is_null() {
            return fail(MitStatus::NullPointer, "config pointer is null");
        }
        unsafe { &mut *config }.0.max_batches = (max_batches > 0).then_some(max_batches);
        MitStatus::Ok
    })
}

/// Switches between the wall clock and the default deterministic virtual
/// clock. Virtual time makes runs with equal seeds bit-identical; wall
/// time makes the budget a real-time limit.
///
/// # Safety
/// `config` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn mit_config_use_wall_clock(
    config: *mut MitConfig,
    wall: bool,
) -> MitStatus {
    guarded(|| {
        if config.is_null() {
            return fail(MitStatus::NullPointer, "config pointer is null");
        }
        unsafe { &mut *config }.0.clock_mode = if wall { ClockMode::Wall } else { ClockMode::Virtual };
        MitStatus::Ok
    })
}

/// Releases a configuration handle. Null is ignored.
///
/// # Safety
/// `config` must be null or an unreleased handle from this library.
#[no_mangle]
pub unsafe extern "C" fn mit_config_free(config: *mut MitConfig) {
    if !config.is_null() {
        drop(unsafe { Box::from_raw(config) });
    }
}

/// Runs the configured planner on a problem until its budget is spent.
///
/// Succeeds even when no solution was found within the budget; inspect
/// the result with [`mit_solution_waypoint_count`] or
/// [`mit_solution_final_cost`]. On success `*out` must be released with
/// [`mit_solution_free`].
///
/// # Safety
/// `problem` and `config` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mit_solve(
    problem: *const MitProblem,
    config: *const MitConfig,
    out: *mut *mut MitSolution,
) -> MitStatus {
    guarded(|| {
        if problem.is_null() || config.is_null() || out.is_null() {
            return fail(MitStatus::NullPointer, "problem, config, or out pointer is null");
        }
        let problem = unsafe { &*problem };
        let config = unsafe { &*config };
        match solve(&problem.0, &config.0) {
            Ok(outcome) => {
                unsafe { *out = Box::into_raw(Box::new(MitSolution(outcome))) };
                MitStatus::Ok
            }
            Err(e) => fail(MitStatus::SolveFailed, e),
        }
    })
}

/// Cost of the best solution, or positive infinity when none was found
/// (also for null).
///
/// # Safety
/// `solution` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn mit_solution_final_cost(solution: *const MitSolution) -> f64 {
    if solution.is_null() {
        return f64::INFINITY;
    }
    unsafe { &*solution }.0.final_cost
}

/// Number of waypoints on the best path, or 0 when no solution was found.
///
/// # Safety
/// `solution` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn mit_solution_waypoint_count(solution: *const MitSolution) -> usize {
    if solution.is_null() {
        return 0;
    }
    unsafe { &*solution }
        .0
        .final_path
        .as_ref()
        .map_or(0, |p| p.waypoints.len())
}

/// Dimension of the solution's waypoints, or 0 when no solution was found.
///
/// # Safety
/// `solution` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn mit_solution_dim(solution: *const MitSolution) -> usize {
    if solution.is_null() {
        return 0;
    }
    unsafe { &*solution }
        .0
        .final_path
        .as_ref()
        .and_then(|p| p.waypoints.first())
        .map_or(0, |w| w.dim())
}

/// Copies the best path into `buffer` as waypoint-major coordinates, so
/// waypoint `i` occupies `buffer[i * dim .. (i + 1) * dim]`. `capacity`
/// counts doubles and must be at least waypoint count times dimension.
///
/// # Safety
/// `solution` must be a live solution handle and `buffer` must point to
/// at least `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mit_solution_copy_path(
    solution: *const MitSolution,
    buffer: *mut f64,
    capacity: usize,
) -> MitStatus {
    guarded(|| {
        if solution.is_null() || buffer.is_null() {
            return fail(MitStatus::NullPointer, "solution or buffer pointer is null");
        }
        let solution = unsafe { &*solution };
        let Some(path) = solution.0.final_path.as_ref() else {
            return fail(MitStatus::NoSolution, "no solution path to copy");
        };
        let dim = path.waypoints.first().map_or(0, |w| w.dim());
        let needed = path.waypoints.len() * dim;
        if capacity < needed {
            return fail(
                MitStatus::BufferTooSmall,
                format_args!("need {needed} doubles, capacity is {capacity}"),
            );
        }
        let target = unsafe { std::slice::from_raw_parts_mut(buffer, needed) };
        for (chunk, waypoint) in target.chunks_exact_mut(dim).zip(&path.waypoints) {
            chunk.copy_from_slice(waypoint.coords());
        }
        MitStatus::Ok
    })
}

/// Number of solution events (initial discovery plus improvements).
///
/// # Safety
/// `solution` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn mit_solution_event_count(solution: *const MitSolution) -> usize {
    if solution.is_null() {
        return 0;
    }
    unsafe { &*solution }.0.events.len()
}

/// Fetches one solution event by index, oldest first.
///
/// # Safety
/// `solution` must be a live solution handle and `out_event` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn mit_solution_event(
    solution: *const MitSolution,
    index: usize,
    out_event: *mut MitEvent,
) -> MitStatus {
    guarded(|| {
        if solution.is_null() || out_event.is_null() {
            return fail(MitStatus::NullPointer, "solution or out pointer is null");
        }
        let solution = unsafe { &*solution };
        let Some(event) = solution.0.events.get(index) else {
            return fail(
                MitStatus::IndexOutOfRange,
                format_args!("event index {index} of {}", solution.0.events.len()),
            );
        };
        unsafe {
            *out_event = MitEvent {
                time_seconds: event.time,
                cost: event.cost,
                is_initial: event.kind == mitstar::planner::EventKind::Initial,
            };
        }
        MitStatus::Ok
    })
}

/// Copies the solve counters into `out_stats`.
///
/// # Safety
/// `solution` must be a live solution handle and `out_stats` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn mit_solution_stats(
    solution: *const MitSolution,
    out_stats: *mut MitRunStats,
) -> MitStatus {
    guarded(|| {
        if solution.is_null() || out_stats.is_null() {
            return fail(MitStatus::NullPointer, "solution or out pointer is null");
        }
        let stats = unsafe { &*solution }.0.stats;
        unsafe {
            *out_stats = MitRunStats {
                n_samples: stats.n_samples,
                n_full_checks: stats.n_full_checks,
                n_sparse_checks: stats.n_sparse_checks,
                n_batches: stats.n_batches,
                work_units: stats.work_units,
                elapsed_seconds: stats.elapsed_seconds,
            };
        }
        MitStatus::Ok
    })
}

/// Releases a solution handle. Null is ignored.
///
/// # Safety
/// `solution` must be null or an unreleased handle from this library.
#[no_mangle]
pub unsafe extern "C" fn mit_solution_free(solution: *mut MitSolution) {
    if !solution.is_null() {
        drop(unsafe { Box::from_raw(solution) });
    }
}
