//! Exercises the C ABI end to end from Rust: handle lifecycles, error
//! reporting, and a full solve through the boundary.

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use mitstar_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take_string(ptr: *mut c_char) -> Option<String> {
    if ptr.is_null() {
        return None;
    }
    let text = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_owned();
    unsafe { mit_string_free(ptr) };
    Some(text)
}

unsafe fn scenario(family: &str, dim: usize, seed: u64) -> *mut MitProblem {
    let family = cstr(family);
    let mut problem = ptr::null_mut();
    let status = unsafe { mit_problem_scenario(family.as_ptr(), dim, seed, &mut problem) };
    assert_eq!(status, MitStatus::Ok);
    assert!(!problem.is_null());
    problem
}

unsafe fn config(variant: &str, max_time: f64, seed: u64) -> *mut MitConfig {
    let variant = cstr(variant);
    let mut config = ptr::null_mut();
    let status = unsafe { mit_config_new(variant.as_ptr(), max_time, seed, &mut config) };
    assert_eq!(status, MitStatus::Ok);
    config
}

#[test]
fn version_is_a_nonempty_c_string() {
    let version = mit_version();
    assert!(!version.is_null());
    let text = unsafe { CStr::from_ptr(version) }.to_str().unwrap();
    assert!(!text.is_empty());
}

#[test]
fn solve_through_the_boundary_finds_a_valid_path() {
    unsafe {
        let problem = scenario("fg", 2, 0);
        assert_eq!(mit_problem_dim(problem), 2);

        let cfg = config("mitstar", f64::INFINITY, 5);
        assert_eq!(mit_config_set_max_batches(cfg, 8), MitStatus::Ok);
        assert_eq!(mit_config_set_batch_size(cfg, 100), MitStatus::Ok);

        let mut solution = ptr::null_mut();
        assert_eq!(mit_solve(problem, cfg, &mut solution), MitStatus::Ok);

        let waypoints = mit_solution_waypoint_count(solution);
        assert!(waypoints >= 2, "expected a solution path");
        assert_eq!(mit_solution_dim(solution), 2);
        let cost = mit_solution_final_cost(solution);
        assert!(cost.is_finite());

        let mut coords = vec![0.0; waypoints * 2];
        assert_eq!(
            mit_solution_copy_path(solution, coords.as_mut_ptr(), coords.len()),
            MitStatus::Ok
        );
        // FG starts at (0.3, 0.5); the copied path must begin there and the
        // segment lengths must reproduce the reported cost.
        assert_eq!(&coords[..2], &[0.3, 0.5]);
        let length: f64 = coords
            .windows(4)
            .step_by(2)
            .map(|w| ((w[2] - w[0]).powi(2) + (w[3] - w[1]).powi(2)).sqrt())
            .sum();
        assert!((length - cost).abs() < 1e-9);

        let events = mit_solution_event_count(solution);
        assert!(events >= 1);
        let mut event = MitEvent {
            time_seconds: 0.0,
            cost: 0.0,
            is_initial: false,
        };
        assert_eq!(mit_solution_event(solution, 0, &mut event), MitStatus::Ok);
        assert!(event.is_initial);
        assert_eq!(
            mit_solution_event(solution, events - 1, &mut event),
            MitStatus::Ok
        );
        assert_eq!(event.cost, cost);

        let mut stats = MitRunStats {
            n_samples: 0,
            n_full_checks: 0,
            n_sparse_checks: 0,
            n_batches: 0,
            work_units: 0,
            elapsed_seconds: 0.0,
        };
        assert_eq!(mit_solution_stats(solution, &mut stats), MitStatus::Ok);
        assert_eq!(stats.n_batches, 8);
        assert!(stats.n_samples > 0);
        assert!(stats.work_units > 0);

        mit_solution_free(solution);
        mit_config_free(cfg);
        mit_problem_free(problem);
    }
}

#[test]
fn identical_seeds_solve_identically() {
    unsafe {
        let problem = scenario("dw", 2, 3);
        let mut outcomes = Vec::new();
        for _ in 0..2 {
            let cfg = config("mitstar-sc", f64::INFINITY, 9);
            assert_eq!(mit_config_set_max_batches(cfg, 5), MitStatus::Ok);
            let mut solution = ptr::null_mut();
            assert_eq!(mit_solve(problem, cfg, &mut solution), MitStatus::Ok);
            let mut stats = MitRunStats {
                n_samples: 0,
                n_full_checks: 0,
                n_sparse_checks: 0,
                n_batches: 0,
                work_units: 0,
                elapsed_seconds: 0.0,
            };
            assert_eq!(mit_solution_stats(solution, &mut stats), MitStatus::Ok);
            outcomes.push((mit_solution_final_cost(solution), stats));
            mit_solution_free(solution);
            mit_config_free(cfg);
        }
        assert_eq!(outcomes[0].0.to_bits(), outcomes[1].0.to_bits());
        assert_eq!(outcomes[0].1, outcomes[1].1);
        mit_problem_free(problem);
    }
}

#[test]
fn problem_json_round_trips() {
    unsafe {
        let problem = scenario("rr", 4, 17);
        let mut json = ptr::null_mut();
        assert_eq!(mit_problem_to_json(problem, &mut json), MitStatus::Ok);
        let first = take_string(json).unwrap();

        let text = cstr(&first);
        let mut reparsed = ptr::null_mut();
        assert_eq!(
            mit_problem_from_json(text.as_ptr(), &mut reparsed),
            MitStatus::Ok
        );
        let mut json = ptr::null_mut();
        assert_eq!(mit_problem_to_json(reparsed, &mut json), MitStatus::Ok);
        let second = take_string(json).unwrap();
        assert_eq!(first, second);

        mit_problem_free(reparsed);
        mit_problem_free(problem);
    }
}

#[test]
fn failures_set_status_and_message() {
    unsafe {
        // Malformed JSON.
        let bad = cstr("{ not json");
        let mut problem = ptr::null_mut();
        assert_eq!(
            mit_problem_from_json(bad.as_ptr(), &mut problem),
            MitStatus::InvalidArgument
        );
        let message = take_string(mit_last_error_message()).unwrap();
        assert!(!message.is_empty());

        // Unknown planner variant.
        let variant = cstr("astar");
        let mut cfg = ptr::null_mut();
        assert_eq!(
            mit_config_new(variant.as_ptr(), 1.0, 0, &mut cfg),
            MitStatus::UnknownVariant
        );
        assert!(take_string(mit_last_error_message()).is_some());

        // Unsupported dimension.
        let family = cstr("fg");
        assert_eq!(
            mit_problem_scenario(family.as_ptr(), 3, 0, &mut problem),
            MitStatus::InvalidArgument
        );

        // Null pointers.
        assert_eq!(
            mit_problem_from_json(ptr::null(), &mut problem),
            MitStatus::NullPointer
        );
        assert_eq!(
            mit_problem_scenario(family.as_ptr(), 2, 0, ptr::null_mut()),
            MitStatus::NullPointer
        );
        assert_eq!(mit_config_set_batch_size(ptr::null_mut(), 1), MitStatus::NullPointer);

        // A successful call clears the stored message.
        let ok = scenario("fg", 2, 0);
        assert!(mit_last_error_message().is_null());
        mit_problem_free(ok);
    }
}

#[test]
fn result_accessors_reject_bad_requests() {
    unsafe {
        let problem = scenario("ge", 2, 0);
        // A zero budget does no work, so there is no solution to copy.
        let cfg = config("mitstar", 0.0, 1);
        let mut solution = ptr::null_mut();
        assert_eq!(mit_solve(problem, cfg, &mut solution), MitStatus::Ok);
        assert_eq!(mit_solution_waypoint_count(solution), 0);
        assert!(mit_solution_final_cost(solution).is_infinite());

        let mut buffer = [0.0; 4];
        assert_eq!(
            mit_solution_copy_path(solution, buffer.as_mut_ptr(), buffer.len()),
            MitStatus::NoSolution
        );
        let mut event = MitEvent {
            time_seconds: 0.0,
            cost: 0.0,
            is_initial: false,
        };
        assert_eq!(
            mit_solution_event(solution, 0, &mut event),
            MitStatus::IndexOutOfRange
        );
        mit_solution_free(solution);
        mit_config_free(cfg);

        // An undersized buffer is rejected before anything is written.
        let cfg = config("rrt-connect", f64::INFINITY, 2);
        assert_eq!(mit_config_set_max_batches(cfg, 20), MitStatus::Ok);
        let mut solution = ptr::null_mut();
        assert_eq!(mit_solve(problem, cfg, &mut solution), MitStatus::Ok);
        let waypoints = mit_solution_waypoint_count(solution);
        assert!(waypoints >= 2);
        let mut tiny = [0.0; 1];
        assert_eq!(
            mit_solution_copy_path(solution, tiny.as_mut_ptr(), tiny.len()),
            MitStatus::BufferTooSmall
        );
        assert_eq!(tiny[0], 0.0);
        mit_solution_free(solution);
        mit_config_free(cfg);
        mit_problem_free(problem);
    }
}

#[test]
fn generated_header_declares_the_api() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("mitstar.h");
    let text = std::fs::read_to_string(&header)
        .unwrap_or_else(|e| panic!("missing {}: {e}", header.display()));
    for needle in [
        "typedef struct MitProblem MitProblem;",
        "typedef struct MitConfig MitConfig;",
        "typedef struct MitSolution MitSolution;",
        "MIT_STATUS_OK",
        "mit_solve",
        "mit_solution_copy_path",
        "mit_last_error_message",
    ] {
        assert!(text.contains(needle), "header lacks {needle:?}");
    }
}
