//! Problem definitions: states, bounds, axis-aligned obstacles, paths, and
//! the benchmark scenario generators.
//!
//! All scenarios live in the unit hypercube `[0, 1]^n`. States are plain
//! Euclidean points; the cost of a motion is the Euclidean distance between
//! its endpoints.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Dimensions the scenario generators support.
pub const SUPPORTED_DIMS: [usize; 4] = [2, 4, 8, 16];

/// Errors raised by problem construction and path evaluation.
#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported dimension {0}, expected one of 2, 4, 8, 16")]
    UnsupportedDimension(usize),
    #[error("state coordinate {index} is not finite")]
    NonFiniteCoordinate { index: usize },
    #[error("bounds axis {axis} is empty: lo {lo} >= hi {hi}")]
    EmptyBounds { axis: usize, lo: f64, hi: f64 },
    #[error("obstacle {index} is empty on axis {axis}")]
    EmptyObstacle { index: usize, axis: usize },
    #[error("state lies outside the problem bounds on axis {axis}")]
    OutOfBounds { axis: usize },
    #[error("problem has no goals")]
    NoGoals,
    #[error("goal tolerance must be non-negative and finite, got {0}")]
    BadGoalTolerance(f64),
    #[error("path needs at least two waypoints, got {0}")]
    TooFewWaypoints(usize),
    #[error("unknown scenario family `{0}`, expected fg, rr, dw, or ge")]
    UnknownFamily(String),
    #[error("could not place random rectangles clear of start and goal")]
    RectanglePlacement,
    #[error("scenario JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// A point in `R^n`, stored as its coordinate vector.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVec(pub Vec<f64>);

impl StateVec {
    /// Builds a state, rejecting NaN and infinite coordinates.
    pub fn new(coords: Vec<f64>) -> Result<Self, SpaceError> {
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(SpaceError::NonFiniteCoordinate { index });
        }
        Ok(StateVec(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Euclidean distance to `other`. Panics on dimension mismatch; callers
    /// that accept external input validate dimensions first.
    pub fn distance(&self, other: &StateVec) -> f64 {
        assert_eq!(self.0.len(), other.0.len(), "dimension mismatch");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Linear interpolation: `self + t * (other - self)`.
    pub fn lerp(&self, other: &StateVec, t: f64) -> StateVec {
        assert_eq!(self.0.len(), other.0.len(), "dimension mismatch");
        StateVec(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + t * (b - a))
                .collect(),
        )
    }
}

impl fmt::Debug for StateVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateVec{:?}", self.0)
    }
}

impl From<&[f64]> for StateVec {
    fn from(coords: &[f64]) -> Self {
        StateVec(coords.to_vec())
    }
}

/// An axis-aligned hyperrectangle obstacle. Boundary points collide: the
/// obstacle is the closed box `[min, max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AabbObstacle {
    #[serde(rename = "min")]
    pub min_corner: Vec<f64>,
    #[serde(rename = "max")]
    pub max_corner: Vec<f64>,
}

impl AabbObstacle {
    pub fn new(min_corner: Vec<f64>, max_corner: Vec<f64>) -> Self {
        AabbObstacle {
            min_corner,
            max_corner,
        }
    }

    /// Closed containment test.
    pub fn contains(&self, x: &StateVec) -> bool {
        self.min_corner
            .iter()
            .zip(&self.max_corner)
            .zip(x.coords())
            .all(|((lo, hi), c)| *lo <= *c && *c <= *hi)
    }

    /// Euclidean distance from `x` to the closed box; zero inside.
    pub fn distance(&self, x: &StateVec) -> f64 {
        self.min_corner
            .iter()
            .zip(&self.max_corner)
            .zip(x.coords())
            .map(|((lo, hi), c)| (lo - c).max(c - hi).max(0.0).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// The benchmark scenario families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioFamily {
    /// Flanking gap: a wall with one narrow off-center opening.
    Fg,
    /// Random rectangles: `10 n` random hyperrectangles.
    Rr,
    /// Dividing walls: three walls with alternating narrow gaps.
    Dw,
    /// Goal enclosure: the goal sits inside a C-shaped cavity.
    Ge,
}

impl ScenarioFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioFamily::Fg => "fg",
            ScenarioFamily::Rr => "rr",
            ScenarioFamily::Dw => "dw",
            ScenarioFamily::Ge => "ge",
        }
    }
}

impl FromStr for ScenarioFamily {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fg" => Ok(ScenarioFamily::Fg),
            "rr" => Ok(ScenarioFamily::Rr),
            "dw" => Ok(ScenarioFamily::Dw),
            "ge" => Ok(ScenarioFamily::Ge),
            other => Err(SpaceError::UnknownFamily(other.to_string())),
        }
    }
}

impl fmt::Display for ScenarioFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A complete planning problem. Immutable once constructed; the planner and
/// benchmark harness share problems behind `&` references.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemDef {
    pub dim: usize,
    /// Per-axis `[lo, hi]` limits of the configuration space.
    pub bounds: Vec<[f64; 2]>,
    pub start: StateVec,
    pub goals: Vec<StateVec>,
    /// A path terminates when its last waypoint lies within this Euclidean
    /// distance of some goal.
    pub goal_tolerance: f64,
    pub obstacles: Vec<AabbObstacle>,
}

impl ProblemDef {
    pub fn new(
        bounds: Vec<[f64; 2]>,
        start: StateVec,
        goals: Vec<StateVec>,
        goal_tolerance: f64,
        obstacles: Vec<AabbObstacle>,
    ) -> Result<Self, SpaceError> {
        let problem = ProblemDef {
            dim: bounds.len(),
            bounds,
            start,
            goals,
            goal_tolerance,
            obstacles,
        };
        problem.validate()?;
        Ok(problem)
    }

    /// Checks internal consistency: matching dimensions, non-empty bounds
    /// and obstacles, in-bounds start and goals.
    pub fn validate(&self) -> Result<(), SpaceError> {
        if self.dim == 0 || self.dim != self.bounds.len() {
            return Err(SpaceError::DimensionMismatch {
                expected: self.dim,
                got: self.bounds.len(),
            });
        }
        for (axis, [lo, hi]) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
                return Err(SpaceError::EmptyBounds {
                    axis,
                    lo: *lo,
                    hi: *hi,
                });
            }
        }
        if self.goals.is_empty() {
            return Err(SpaceError::NoGoals);
        }
        if !(self.goal_tolerance.is_finite() && self.goal_tolerance >= 0.0) {
            return Err(SpaceError::BadGoalTolerance(self.goal_tolerance));
        }
        self.check_state(&self.start)?;
        for goal in &self.goals {
            self.check_state(goal)?;
        }
        for (index, obstacle) in self.obstacles.iter().enumerate() {
            if obstacle.min_corner.len() != self.dim {
                return Err(SpaceError::DimensionMismatch {
                    expected: self.dim,
                    got: obstacle.min_corner.len(),
                });
            }
            if obstacle.max_corner.len() != self.dim {
                return Err(SpaceError::DimensionMismatch {
                    expected: self.dim,
                    got: obstacle.max_corner.len(),
                });
            }
            for axis in 0..self.dim {
                let lo = obstacle.min_corner[axis];
                let hi = obstacle.max_corner[axis];
                if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                    return Err(SpaceError::EmptyObstacle { index, axis });
                }
            }
        }
        Ok(())
    }

    /// Validates that `x` has the right dimension, finite coordinates, and
    /// lies within bounds.
    pub fn check_state(&self, x: &StateVec) -> Result<(), SpaceError> {
        if x.dim() != self.dim {
            return Err(SpaceError::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        if let Some(index) = x.coords().iter().position(|c| !c.is_finite()) {
            return Err(SpaceError::NonFiniteCoordinate { index });
        }
        for (axis, (c, [lo, hi])) in x.coords().iter().zip(&self.bounds).enumerate() {
            if c < lo || c > hi {
                return Err(SpaceError::OutOfBounds { axis });
            }
        }
        Ok(())
    }

    /// True when `x` is inside bounds and outside every obstacle. Assumes
    /// matching dimension; see [`crate::collision::is_valid`] for the
    /// checked entry point.
    pub fn state_is_free(&self, x: &StateVec) -> bool {
        debug_assert_eq!(x.dim(), self.dim, "dimension mismatch");
        let in_bounds = x
            .coords()
            .iter()
            .zip(&self.bounds)
            .all(|(c, [lo, hi])| *lo <= *c && *c <= *hi);
        in_bounds && !self.obstacles.iter().any(|o| o.contains(x))
    }

    /// Lebesgue measure of the bounded configuration space.
    pub fn bounds_measure(&self) -> f64 {
        self.bounds.iter().map(|[lo, hi]| hi - lo).product()
    }

    /// Largest per-axis extent, the reference scale for sampler defaults.
    pub fn max_extent(&self) -> f64 {
        self.bounds
            .iter()
            .map(|[lo, hi]| hi - lo)
            .fold(0.0, f64::max)
    }

    /// True when `x` lies within the goal tolerance of some goal.
    pub fn reaches_goal(&self, x: &StateVec) -> bool {
        self.goals
            .iter()
            .any(|g| g.distance(x) <= self.goal_tolerance)
    }

    /// Serializes the problem as scenario JSON with enough digits to
    /// round-trip every `f64` bit-exactly.
    pub fn to_json_string(&self) -> Result<String, SpaceError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and validates scenario JSON produced by [`Self::to_json_string`]
    /// or written by hand.
    pub fn from_json_str(json: &str) -> Result<Self, SpaceError> {
        let problem: ProblemDef = serde_json::from_str(json)?;
        problem.validate()?;
        Ok(problem)
    }
}

/// A piecewise-linear path with its precomputed cost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub waypoints: Vec<StateVec>,
    pub cost: f64,
}

impl Path {
    /// Builds a path from waypoints, computing its cost. Requires at least
    /// two waypoints; repeated waypoints contribute zero cost.
    pub fn from_waypoints(waypoints: Vec<StateVec>) -> Result<Self, SpaceError> {
        if waypoints.len() < 2 {
            return Err(SpaceError::TooFewWaypoints(waypoints.len()));
        }
        let cost = path_cost(&waypoints)?;
        Ok(Path { waypoints, cost })
    }
}

/// Sum of Euclidean segment lengths along `waypoints`.
///
/// Errors on fewer than two waypoints or inconsistent dimensions. A
/// degenerate path of repeated identical waypoints costs exactly zero.
pub fn path_cost(waypoints: &[StateVec]) -> Result<f64, SpaceError> {
    if waypoints.len() < 2 {
        return Err(SpaceError::TooFewWaypoints(waypoints.len()));
    }
    let dim = waypoints[0].dim();
    for w in waypoints {
        if w.dim() != dim {
            return Err(SpaceError::DimensionMismatch {
                expected: dim,
                got: w.dim(),
            });
        }
    }
    Ok(waypoints
        .windows(2)
        .map(|pair| pair[0].distance(&pair[1]))
        .sum())
}

/// Builds one problem instance of `family` in dimension `dim`.
///
/// All families share deterministic layouts except `rr`, whose rectangles
/// are drawn from a generator seeded with `seed`; the other families ignore
/// `seed`. Supported dimensions are 2, 4, 8, and 16. Obstacles in the
/// deterministic families are 2D layouts extruded over the full `[0, 1]`
/// range of every higher axis, so passage widths do not shrink with
/// dimension.
pub fn make_scenario(
    family: ScenarioFamily,
    dim: usize,
    seed: u64,
) -> Result<ProblemDef, SpaceError> {
    if !SUPPORTED_DIMS.contains(&dim) {
        return Err(SpaceError::UnsupportedDimension(dim));
    }
    let bounds = vec![[0.0, 1.0]; dim];
    let goal_tolerance = 1e-4;
    match family {
        ScenarioFamily::Fg => {
            // One wall of thickness 0.15 at the middle of the x-axis with a
            // single gap of height 0.02 near the top, so the straight-line
            // start-goal motion is blocked and the optimum flanks upward.
            let start = axis_state(dim, &[0.3, 0.5]);
            let goal = axis_state(dim, &[0.7, 0.5]);
            let obstacles = vec![
                extruded_box(dim, &[[0.425, 0.575], [0.0, 0.83]]),
                extruded_box(dim, &[[0.425, 0.575], [0.85, 1.0]]),
            ];
            ProblemDef::new(bounds, start, vec![goal], goal_tolerance, obstacles)
        }
        ScenarioFamily::Dw => {
            // Three walls of thickness 0.05, each with one gap of height
            // 0.01; gaps alternate between the upper and lower half so that
            // any solution must thread three misaligned openings.
            let start = axis_state(dim, &[0.05, 0.5]);
            let goal = axis_state(dim, &[0.95, 0.5]);
            let walls = [
                (0.225, 0.275, 0.695, 0.705),
                (0.475, 0.525, 0.295, 0.305),
                (0.725, 0.775, 0.695, 0.705),
            ];
            let mut obstacles = Vec::with_capacity(6);
            for (x_lo, x_hi, gap_lo, gap_hi) in walls {
                obstacles.push(extruded_box(dim, &[[x_lo, x_hi], [0.0, gap_lo]]));
                obstacles.push(extruded_box(dim, &[[x_lo, x_hi], [gap_hi, 1.0]]));
            }
            ProblemDef::new(bounds, start, vec![goal], goal_tolerance, obstacles)
        }
        ScenarioFamily::Ge => {
            // A C-shaped enclosure of wall thickness 0.1 around the goal;
            // the only entrance is the 0.2-high opening on the side facing
            // away from the start.
            let start = axis_state(dim, &[0.1, 0.5]);
            let goal = axis_state(dim, &[0.6, 0.5]);
            let obstacles = vec![
                extruded_box(dim, &[[0.4, 0.5], [0.3, 0.7]]),
                extruded_box(dim, &[[0.4, 0.8], [0.6, 0.7]]),
                extruded_box(dim, &[[0.4, 0.8], [0.3, 0.4]]),
            ];
            ProblemDef::new(bounds, start, vec![goal], goal_tolerance, obstacles)
        }
        ScenarioFamily::Rr => {
            // 10 n random hyperrectangles with per-axis widths in
            // [0.02, 0.2], redrawn whenever one covers the start or a goal.
            let start_coords: Vec<f64> =
                (0..dim).map(|i| if i < 2 { 0.1 } else { 0.5 }).collect();
            let goal_coords: Vec<f64> =
                (0..dim).map(|i| if i < 2 { 0.9 } else { 0.5 }).collect();
            let start = StateVec(start_coords);
            let goal = StateVec(goal_coords);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut obstacles = Vec::with_capacity(10 * dim);
            for _ in 0..10 * dim {
                let mut placed = false;
                for _ in 0..1000 {
                    let rect = random_rect(&mut rng, dim);
                    if !rect.contains(&start) && !rect.contains(&goal) {
                        obstacles.push(rect);
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    return Err(SpaceError::RectanglePlacement);
                }
            }
            ProblemDef::new(bounds, start, vec![goal], goal_tolerance, obstacles)
        }
    }
}

/// State whose leading coordinates come from `head` and whose remaining
/// axes sit at the cube center 0.5.
fn axis_state(dim: usize, head: &[f64]) -> StateVec {
    let mut coords = vec![0.5; dim];
    coords[..head.len()].copy_from_slice(head);
    StateVec(coords)
}

/// 2D box footprint extruded over `[0, 1]` on every axis >= 2.
fn extruded_box(dim: usize, footprint: &[[f64; 2]; 2]) -> AabbObstacle {
    let mut min_corner = vec![0.0; dim];
    let mut max_corner = vec![1.0; dim];
    for (axis, [lo, hi]) in footprint.iter().enumerate() {
        min_corner[axis] = *lo;
        max_corner[axis] = *hi;
    }
    AabbObstacle::new(min_corner, max_corner)
}

fn random_rect(rng: &mut ChaCha8Rng, dim: usize) -> AabbObstacle {
    let mut min_corner = Vec::with_capacity(dim);
    let mut max_corner = Vec::with_capacity(dim);
    for _ in 0..dim {
        let width: f64 = rng.gen_range(0.02..=0.2);
        let center: f64 = rng.gen_range(0.0..=1.0);
        min_corner.push((center - width / 2.0).max(0.0));
        max_corner.push((center + width / 2.0).min(1.0));
    }
    AabbObstacle::new(min_corner, max_corner)
}
