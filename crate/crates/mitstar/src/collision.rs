//! Point validity and motion validation.
//!
//! Full-resolution checks are the planner's ground truth: a forward edge is
//! inserted only after one passes. Sparse checks validate a handful of
//! points whose count scales with edge length; they are deliberately
//! unsound (lazy) and get refined when the forward search catches them
//! admitting a colliding edge.

use crate::space::{ProblemDef, SpaceError, StateVec};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CollisionError {
    #[error("sparse delta_ini must be positive, got {0}")]
    BadDelta(f64),
    #[error("sparse omega must lie in (0, 1), got {0}")]
    BadOmega(f64),
}

/// Resolution state for length-related adaptive sparse checks.
///
/// `delta_k` starts at `delta_ini` and only shrinks, so the number of
/// checked points per edge only grows.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseCheckConfig {
    pub delta_ini: f64,
    /// Refinement factor in (0, 1).
    pub omega: f64,
    /// Current resolution; `delta_k <= delta_ini`.
    pub delta_k: f64,
    /// When set, every refinement applies `delta_k = omega * delta_ini`
    /// instead of compounding, so a single refinement step is the floor.
    pub one_shot: bool,
}

impl SparseCheckConfig {
    pub fn new(delta_ini: f64, omega: f64) -> Result<Self, CollisionError> {
        if !(delta_ini > 0.0 && delta_ini.is_finite()) {
            return Err(CollisionError::BadDelta(delta_ini));
        }
        if !(omega > 0.0 && omega < 1.0) {
            return Err(CollisionError::BadOmega(omega));
        }
        Ok(SparseCheckConfig {
            delta_ini,
            omega,
            delta_k: delta_ini,
            one_shot: false,
        })
    }

    /// Tightens the sparse resolution one step.
    pub fn refine(&mut self) {
        if self.one_shot {
            self.delta_k = self.omega * self.delta_ini;
        } else {
            self.delta_k *= self.omega;
        }
    }
}

impl Default for SparseCheckConfig {
    /// Benchmark default: a coarse 0.2 starting resolution (a few points on
    /// typical rewire-radius edges) halved per refinement.
    fn default() -> Self {
        SparseCheckConfig::new(0.2, 0.5).expect("literal defaults are valid")
    }
}

/// Checked point-validity entry point: `x` must match the problem dimension;
/// boundary contact with an obstacle counts as invalid.
pub fn is_valid(problem: &ProblemDef, x: &StateVec) -> Result<bool, SpaceError> {
    if x.dim() != problem.dim {
        return Err(SpaceError::DimensionMismatch {
            expected: problem.dim,
            got: x.dim(),
        });
    }
    Ok(problem.state_is_free(x))
}

fn lerp_into(a: &StateVec, b: &StateVec, t: f64, out: &mut StateVec) {
    out.0.clear();
    out.0
        .extend(a.coords().iter().zip(b.coords()).map(|(x, y)| x + t * (y - x)));
}

/// Full-resolution motion check over a custom validity oracle.
///
/// Points are spaced at most `resolution` apart and visited outside-in:
/// both endpoints first, then recursive interval midpoints breadth-first,
/// so collisions near either endpoint surface after few evaluations. Every
/// index is evaluated exactly once; evaluation stops at the first invalid
/// point.
pub fn check_motion_full_with(
    mut valid: impl FnMut(&StateVec) -> bool,
    a: &StateVec,
    b: &StateVec,
    resolution: f64,
) -> bool {
    debug_assert!(resolution > 0.0);
    if !valid(a) {
        return false;
    }
    let length = a.distance(b);
    if length == 0.0 {
        return true;
    }
    if !valid(b) {
        return false;
    }
    let segments = (length / resolution).ceil() as u64;
    let mut scratch = StateVec(Vec::with_capacity(a.dim()));
    let mut queue: VecDeque<(u64, u64)> = VecDeque::new();
    queue.push_back((0, segments));
    while let Some((lo, hi)) = queue.pop_front() {
        let mid = lo + (hi - lo) / 2;
        if mid == lo || mid == hi {
            continue;
        }
        lerp_into(a, b, mid as f64 / segments as f64, &mut scratch);
        if !valid(&scratch) {
            return false;
        }
        queue.push_back((lo, mid));
        queue.push_back((mid, hi));
    }
    true
}

/// Full-resolution motion check against the problem's obstacles.
pub fn check_motion_full(problem: &ProblemDef, a: &StateVec, b: &StateVec, resolution: f64) -> bool {
    check_motion_full_with(|x| problem.state_is_free(x), a, b, resolution)
}

/// Number of sparse points for an edge of length `len`:
/// `floor(len / delta_k + 1)`, never below 1.
pub fn sparse_check_count_len(len: f64, delta_k: f64) -> u64 {
    debug_assert!(delta_k > 0.0);
    let count = (len / delta_k + 1.0).floor();
    if count < 1.0 {
        1
    } else {
        count as u64
    }
}

/// Number of sparse points for the edge `(a, b)`.
pub fn sparse_check_count(a: &StateVec, b: &StateVec, delta_k: f64) -> u64 {
    sparse_check_count_len(a.distance(b), delta_k)
}

/// Sparse motion check over a custom validity oracle: evaluates exactly
/// `sparse_check_count` equally spaced points, endpoints included when two
/// or more points are placed. A `true` result is not a validity guarantee.
pub fn check_motion_sparse_with(
    mut valid: impl FnMut(&StateVec) -> bool,
    a: &StateVec,
    b: &StateVec,
    cfg: &SparseCheckConfig,
) -> bool {
    let count = sparse_check_count(a, b, cfg.delta_k);
    if count == 1 {
        return valid(a);
    }
    let mut scratch = StateVec(Vec::with_capacity(a.dim()));
    for i in 0..count {
        lerp_into(a, b, i as f64 / (count - 1) as f64, &mut scratch);
        if !valid(&scratch) {
            return false;
        }
    }
    true
}

/// Sparse motion check against the problem's obstacles.
pub fn check_motion_sparse(
    problem: &ProblemDef,
    a: &StateVec,
    b: &StateVec,
    cfg: &SparseCheckConfig,
) -> bool {
    check_motion_sparse_with(|x| problem.state_is_free(x), a, b, cfg)
}
