//! State-generation strategies.
//!
//! The planner draws batches through an adaptive cascade: a primary draw
//! (uniform, estimated-informed, or informed depending on the solve phase),
//! then for invalid draws a Gaussian retry near the invalid state, then a
//! bisection search for a free point between the two invalid states. The
//! Gaussian and bridge stages concentrate samples near obstacle surfaces
//! and inside narrow passages, where uniform sampling is weakest.

use crate::phs::{build_phs, PhsError, ProlateHyperspheroid};
use crate::space::{ProblemDef, StateVec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("diameter {s_diam} is infeasible for every goal")]
    InfeasibleForAllGoals { s_diam: f64 },
    #[error(transparent)]
    Phs(#[from] PhsError),
}

/// Tuning knobs for the adaptive sampler.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    /// Standard deviation of the Gaussian retry, in configuration-space
    /// units.
    pub gauss_sigma: f64,
    /// Draw attempts per batch; the emitted batch may be shorter.
    pub batch_size: usize,
    /// The bridge bisection stops splitting segments shorter than this.
    pub bridge_resolution: f64,
    pub rng_seed: u64,
}

impl SamplerConfig {
    /// Defaults scaled to `problem`: sigma at 10% of the largest axis
    /// extent, 100 draws per batch. The bridge stops at 1% of sigma, or at
    /// the collision-check resolution if that is coarser: the bisection only
    /// hunts for a free point to hand to the validity oracle, so a finer
    /// search buys nothing and makes hopeless bridges expensive.
    pub fn for_problem(problem: &ProblemDef, collision_resolution: f64, rng_seed: u64) -> Self {
        let gauss_sigma = 0.1 * problem.max_extent();
        SamplerConfig {
            gauss_sigma,
            batch_size: 100,
            bridge_resolution: (0.01 * gauss_sigma).max(collision_resolution),
            rng_seed,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.gauss_sigma > 0.0 && self.batch_size >= 1 && self.bridge_resolution > 0.0
    }
}

/// Solve-phase inputs that select the primary sampling case.
#[derive(Clone, Copy, Debug)]
pub struct SampleContext<'a> {
    /// Best known solution cost; infinite until a solution exists.
    pub c_curr: f64,
    /// Estimated-informed-set diameter; infinite until the first admissible
    /// failed edge defines it.
    pub s_est: f64,
    pub problem: &'a ProblemDef,
}

/// One state uniform over the problem bounds.
pub fn sample_uniform(problem: &ProblemDef, rng: &mut ChaCha8Rng) -> StateVec {
    StateVec(
        problem
            .bounds
            .iter()
            .map(|[lo, hi]| rng.gen_range(*lo..*hi))
            .collect(),
    )
}

/// One state uniform over the closed unit n-ball: normalized Gaussian
/// direction scaled by a `U^(1/n)` radius.
pub fn sample_unit_ball(n: usize, rng: &mut ChaCha8Rng) -> StateVec {
    loop {
        let dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let radius: f64 = rng.gen::<f64>().powf(1.0 / n as f64);
        return StateVec(dir.into_iter().map(|c| c * radius / norm).collect());
    }
}

/// Prebuilt sampler for the union of per-goal prolate hyperspheroids with
/// common transverse diameter `s_diam` and common focus at the start.
///
/// Goals whose straight-line distance from the start already reaches
/// `s_diam` contribute nothing; if that holds for every goal the diameter
/// is infeasible. Building the ellipsoid transforms costs a Gram-Schmidt
/// pass per goal, so callers drawing many states at one diameter should
/// build once and draw repeatedly.
pub struct PhsUnionSampler {
    candidates: Vec<ProlateHyperspheroid>,
    total_measure: f64,
    s_diam: f64,
}

impl PhsUnionSampler {
    pub fn build(problem: &ProblemDef, s_diam: f64) -> Result<Self, SamplingError> {
        let mut candidates: Vec<ProlateHyperspheroid> = Vec::with_capacity(problem.goals.len());
        for goal in &problem.goals {
            match build_phs(&problem.start, goal, s_diam) {
                Ok(phs) => candidates.push(phs),
                Err(PhsError::InfeasibleDiameter { .. }) | Err(PhsError::DegenerateFoci) => continue,
                Err(e) => return Err(e.into()),
            }
        }
        if candidates.is_empty() {
            return Err(SamplingError::InfeasibleForAllGoals { s_diam });
        }
        let total_measure: f64 = candidates.iter().map(|p| p.measure()).sum();
        Ok(PhsUnionSampler {
            candidates,
            total_measure,
            s_diam,
        })
    }

    /// One state from the union: a goal is chosen with probability
    /// proportional to its ellipsoid's measure, then a unit-ball point is
    /// pushed through that ellipsoid's transform. Points in ellipsoid
    /// overlaps are slightly oversampled; the union is otherwise uniform.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> StateVec {
        let phs = if self.candidates.len() == 1 || !(self.total_measure > 0.0) {
            &self.candidates[0]
        } else {
            let mut pick: f64 = rng.gen_range(0.0..self.total_measure);
            let mut chosen = &self.candidates[0];
            for c in &self.candidates {
                let m = c.measure();
                if pick < m {
                    chosen = c;
                    break;
                }
                pick -= m;
            }
            chosen
        };
        // The transform can land exactly on the boundary, which strict
        // membership excludes; retry, falling back to the center (focal sum
        // s_min < s_diam) if rounding keeps rejecting.
        for _ in 0..64 {
            let x = phs.transform_ball_point(&sample_unit_ball(phs.dim(), rng));
            if phs.focal_distance_sum(&x) < self.s_diam {
                return x;
            }
        }
        phs.center.clone()
    }
}

fn sample_phs_union(
    problem: &ProblemDef,
    s_diam: f64,
    rng: &mut ChaCha8Rng,
) -> Result<StateVec, SamplingError> {
    Ok(PhsUnionSampler::build(problem, s_diam)?.draw(rng))
}

/// Estimated-informed-set sample: the PHS union with diameter `s_est`.
pub fn sample_eis(
    problem: &ProblemDef,
    s_est: f64,
    rng: &mut ChaCha8Rng,
) -> Result<StateVec, SamplingError> {
    sample_phs_union(problem, s_est, rng)
}

/// Informed-set sample: the PHS union with diameter `c_curr`.
pub fn sample_informed(
    problem: &ProblemDef,
    c_curr: f64,
    rng: &mut ChaCha8Rng,
) -> Result<StateVec, SamplingError> {
    sample_phs_union(problem, c_curr, rng)
}

/// The phase-selected primary distribution, resolved once per batch:
/// informed when a solution exists, estimated-informed when only a
/// failed-edge estimate exists, uniform otherwise. An estimate wider than
/// the bounds diagonal covers the whole space, so it degrades to uniform;
/// degenerate diameters do too. Resolution consumes no randomness, so
/// resolving per draw and per batch yield identical streams.
pub enum PrimarySampler {
    Union(PhsUnionSampler),
    Uniform,
}

impl PrimarySampler {
    pub fn resolve(ctx: &SampleContext) -> PrimarySampler {
        if ctx.c_curr.is_finite() {
            return match PhsUnionSampler::build(ctx.problem, ctx.c_curr) {
                Ok(u) => PrimarySampler::Union(u),
                Err(_) => PrimarySampler::Uniform,
            };
        }
        if ctx.s_est.is_finite() {
            let diagonal = ctx
                .problem
                .bounds
                .iter()
                .map(|[lo, hi]| (hi - lo) * (hi - lo))
                .sum::<f64>()
                .sqrt();
            if ctx.s_est <= diagonal {
                return match PhsUnionSampler::build(ctx.problem, ctx.s_est) {
                    Ok(u) => PrimarySampler::Union(u),
                    Err(_) => PrimarySampler::Uniform,
                };
            }
        }
        PrimarySampler::Uniform
    }

    pub fn draw(&self, problem: &ProblemDef, rng: &mut ChaCha8Rng) -> StateVec {
        match self {
            PrimarySampler::Union(u) => u.draw(rng),
            PrimarySampler::Uniform => sample_uniform(problem, rng),
        }
    }
}

/// Primary draw without the obstacle-aware cascade: one state from the
/// phase-selected distribution, valid or not. Callers looping over many
/// draws should resolve a [`PrimarySampler`] instead.
pub fn sample_primary(ctx: &SampleContext, rng: &mut ChaCha8Rng) -> StateVec {
    PrimarySampler::resolve(ctx).draw(ctx.problem, rng)
}

/// Isotropic Gaussian around `center`, clamped per-axis into bounds.
fn sample_gaussian_clamped(
    center: &StateVec,
    sigma: f64,
    problem: &ProblemDef,
    rng: &mut ChaCha8Rng,
) -> StateVec {
    StateVec(
        center
            .coords()
            .iter()
            .zip(&problem.bounds)
            .map(|(c, [lo, hi])| {
                let z: f64 = rng.sample(StandardNormal);
                (c + sigma * z).clamp(*lo, *hi)
            })
            .collect(),
    )
}

/// Breadth-first midpoint bisection between two invalid states: tests the
/// segment midpoint, then both halves' midpoints, and so on, returning the
/// first valid point found. Segments shorter than `resolution` are not
/// split further. Both endpoints are known invalid and never re-tested.
fn bridge_search(
    a: &StateVec,
    b: &StateVec,
    resolution: f64,
    valid: &mut impl FnMut(&StateVec) -> bool,
) -> Option<StateVec> {
    let length = a.distance(b);
    if length == 0.0 {
        return None;
    }
    let mut queue: VecDeque<(f64, f64)> = VecDeque::new();
    queue.push_back((0.0, 1.0));
    while let Some((lo, hi)) = queue.pop_front() {
        if (hi - lo) * length < resolution {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let x = a.lerp(b, mid);
        if valid(&x) {
            return Some(x);
        }
        queue.push_back((lo, mid));
        queue.push_back((mid, hi));
    }
    None
}

/// Runs exactly `cfg.batch_size` cascade attempts and returns the valid
/// states they produced, at most one per attempt.
///
/// Per attempt: draw a primary state; emit it if valid; otherwise draw a
/// Gaussian neighbor and emit that if valid; otherwise bridge-search the
/// segment between the two invalid states and emit the first free point;
/// otherwise the attempt yields nothing. Every emitted state passes the
/// validity oracle.
pub fn sample_adaptive_batch(
    ctx: &SampleContext,
    cfg: &SamplerConfig,
    valid: &mut impl FnMut(&StateVec) -> bool,
    rng: &mut ChaCha8Rng,
) -> Vec<StateVec> {
    debug_assert!(cfg.is_valid());
    let primary = PrimarySampler::resolve(ctx);
    let mut batch = Vec::with_capacity(cfg.batch_size);
    for _ in 0..cfg.batch_size {
        let x_pre = primary.draw(ctx.problem, rng);
        if valid(&x_pre) {
            batch.push(x_pre);
            continue;
        }
        let x_temp = sample_gaussian_clamped(&x_pre, cfg.gauss_sigma, ctx.problem, rng);
        if valid(&x_temp) {
            batch.push(x_temp);
            continue;
        }
        if let Some(x_crit) = bridge_search(&x_pre, &x_temp, cfg.bridge_resolution, valid) {
            batch.push(x_crit);
        }
    }
    batch
}
