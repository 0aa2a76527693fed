//! Anytime planner driver: the batchwise solve loop, the deterministic
//! work-based clock, and the feature-flag variants used by the benchmark
//! harness, plus an RRT-Connect baseline.
//!
//! Time budgets are interpreted by a [`Meter`]. In the default
//! [`ClockMode::Virtual`] the meter counts units of work (state-validity
//! evaluations and sample draw attempts, which dominate planning cost) and
//! converts them to seconds at a fixed rate, so a given seed and budget
//! produce bit-identical results on any machine at any load.
//! [`ClockMode::Wall`] switches to real elapsed time for live use.

use crate::collision::{check_motion_full_with, check_motion_sparse_with, SparseCheckConfig};
use crate::phs::build_phs;
use crate::sampling::{sample_adaptive_batch, sample_uniform, PrimarySampler, SampleContext, SamplerConfig};
use crate::search::{
    prune, rewire_radius, update_eis, EisState, ForwardStep, RggConfig, SearchError, SearchGraph,
};
use crate::space::{Path, ProblemDef, StateVec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::cell::Cell;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("unknown planner '{0}'")]
    UnknownVariant(String),
    #[error("invalid planner config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Search(#[from] SearchError),
}

/// How the solve loop measures its time budget.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ClockMode {
    /// Deterministic: counted work units scaled by `seconds_per_unit`.
    #[default]
    Virtual,
    /// Real elapsed time.
    Wall,
}

/// Virtual seconds per unit of work. One unit is one state-validity
/// evaluation or one sample draw attempt; the rate is chosen so one
/// virtual second roughly matches one second of optimized single-core
/// planning.
pub const SECONDS_PER_UNIT: f64 = 2.5e-8;

/// Work meter behind the planner's notion of time. Interior mutability
/// lets validity closures tick it while the search holds it by shared
/// reference.
pub struct Meter {
    mode: ClockMode,
    started: Instant,
    units: Cell<u64>,
    seconds_per_unit: f64,
}

impl Meter {
    pub fn new(mode: ClockMode) -> Self {
        Self::with_rate(mode, SECONDS_PER_UNIT)
    }

    pub fn with_rate(mode: ClockMode, seconds_per_unit: f64) -> Self {
        Meter {
            mode,
            started: Instant::now(),
            units: Cell::new(0),
            seconds_per_unit,
        }
    }

    pub fn tick(&self, n: u64) {
        self.units.set(self.units.get() + n);
    }

    pub fn units(&self) -> u64 {
        self.units.get()
    }

    /// Elapsed seconds under the meter's mode.
    pub fn now(&self) -> f64 {
        match self.mode {
            ClockMode::Virtual => self.units.get() as f64 * self.seconds_per_unit,
            ClockMode::Wall => self.started.elapsed().as_secs_f64(),
        }
    }
}

/// Planner selection for the benchmark harness. The three `MitStar*`
/// ablations enable exactly one feature each; `BaselineOff` disables all
/// three while keeping the batchwise search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlannerVariant {
    MitStar,
    MitStarEis,
    MitStarAs,
    MitStarSc,
    BaselineOff,
    RrtConnect,
}

impl PlannerVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlannerVariant::MitStar => "mitstar",
            PlannerVariant::MitStarEis => "mitstar-eis",
            PlannerVariant::MitStarAs => "mitstar-as",
            PlannerVariant::MitStarSc => "mitstar-sc",
            PlannerVariant::BaselineOff => "baseline-off",
            PlannerVariant::RrtConnect => "rrt-connect",
        }
    }

    pub fn all() -> [PlannerVariant; 6] {
        [
            PlannerVariant::MitStar,
            PlannerVariant::MitStarEis,
            PlannerVariant::MitStarAs,
            PlannerVariant::MitStarSc,
            PlannerVariant::BaselineOff,
            PlannerVariant::RrtConnect,
        ]
    }
}

impl fmt::Display for PlannerVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlannerVariant {
    type Err = PlannerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mitstar" => Ok(PlannerVariant::MitStar),
            "mitstar-eis" => Ok(PlannerVariant::MitStarEis),
            "mitstar-as" => Ok(PlannerVariant::MitStarAs),
            "mitstar-sc" => Ok(PlannerVariant::MitStarSc),
            "baseline-off" => Ok(PlannerVariant::BaselineOff),
            "rrt-connect" => Ok(PlannerVariant::RrtConnect),
            other => Err(PlannerError::UnknownVariant(other.to_string())),
        }
    }
}

/// Everything a solve needs besides the problem itself.
#[derive(Clone, Debug)]
pub struct PlannerConfig {
    pub variant: PlannerVariant,
    /// Estimated informed set: failed edges bound the sampling region
    /// before a first solution exists.
    pub enable_eis: bool,
    /// Obstacle-based adaptive sampling: Gaussian and bridge retries
    /// rescue invalid primary draws.
    pub enable_adaptive_sampler: bool,
    /// Length-adaptive sparse checking: the reverse search's check
    /// spacing refines when it lets a colliding edge through.
    pub enable_adaptive_sparse: bool,
    pub batch_size: usize,
    pub rgg: RggConfig,
    pub sparse: SparseCheckConfig,
    /// Spacing of full motion validation, in configuration-space units.
    pub full_resolution: f64,
    /// Budget in seconds under `clock_mode`.
    pub max_time: f64,
    /// Optional hard cap on batches (or on `batch_size`-sized draw blocks
    /// for RRT-Connect); mainly for tests.
    pub max_batches: Option<u64>,
    pub rng_seed: u64,
    pub clock_mode: ClockMode,
    pub seconds_per_unit: f64,
    /// Probability that RRT-Connect aims straight at the other tree's root.
    pub rrt_goal_bias: f64,
    /// RRT-Connect steering cap; `None` picks a per-dimension default.
    pub rrt_max_edge: Option<f64>,
}

impl PlannerConfig {
    /// Defaults for `variant` with the given budget and seed.
    pub fn for_variant(variant: PlannerVariant, max_time: f64, rng_seed: u64) -> Self {
        let (eis, adaptive_sampler, adaptive_sparse) = match variant {
            PlannerVariant::MitStar => (true, true, true),
            PlannerVariant::MitStarEis => (true, false, false),
            PlannerVariant::MitStarAs => (false, true, false),
            PlannerVariant::MitStarSc => (false, false, true),
            PlannerVariant::BaselineOff | PlannerVariant::RrtConnect => (false, false, false),
        };
        PlannerConfig {
            variant,
            enable_eis: eis,
            enable_adaptive_sampler: adaptive_sampler,
            enable_adaptive_sparse: adaptive_sparse,
            batch_size: 100,
            rgg: RggConfig::default(),
            sparse: SparseCheckConfig::default(),
            full_resolution: 5e-6,
            max_time,
            max_batches: None,
            rng_seed,
            clock_mode: ClockMode::Virtual,
            seconds_per_unit: SECONDS_PER_UNIT,
            rrt_goal_bias: 0.05,
            rrt_max_edge: None,
        }
    }

    fn validate(&self) -> Result<(), PlannerError> {
        if self.batch_size == 0 {
            return Err(PlannerError::InvalidConfig("batch_size must be positive".into()));
        }
        if !(self.full_resolution > 0.0) {
            return Err(PlannerError::InvalidConfig("full_resolution must be positive".into()));
        }
        if !(self.seconds_per_unit > 0.0) {
            return Err(PlannerError::InvalidConfig("seconds_per_unit must be positive".into()));
        }
        if self.max_time.is_nan() || self.max_time < 0.0 {
            return Err(PlannerError::InvalidConfig("max_time must be nonnegative".into()));
        }
        if !self.max_time.is_finite() && self.max_batches.is_none() {
            return Err(PlannerError::InvalidConfig(
                "unbounded max_time needs a max_batches cap".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.rrt_goal_bias) {
            return Err(PlannerError::InvalidConfig("rrt_goal_bias must be in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    Initial,
    Improved,
}

/// One solution discovery: when, how good, and the path itself.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionEvent {
    pub time: f64,
    pub cost: f64,
    pub kind: EventKind,
    pub path: Path,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolveStats {
    /// States added to the planner's graph or trees.
    pub n_samples: u64,
    /// State evaluations spent in full motion validation.
    pub n_full_checks: u64,
    /// State evaluations spent in sparse motion validation.
    pub n_sparse_checks: u64,
    pub n_batches: u64,
    pub work_units: u64,
    /// Final reading of the solve clock, in its mode's seconds.
    pub elapsed_seconds: f64,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    /// Strictly improving solutions in discovery order.
    pub events: Vec<SolutionEvent>,
    pub final_cost: f64,
    pub final_path: Option<Path>,
    pub stats: SolveStats,
}

impl SolveOutcome {
    pub fn initial(&self) -> Option<&SolutionEvent> {
        self.events.first()
    }

    pub fn best(&self) -> Option<&SolutionEvent> {
        self.events.last()
    }
}

#[derive(Default)]
struct WorkCounters {
    full: Cell<u64>,
    sparse: Cell<u64>,
    sample_evals: Cell<u64>,
    draws: Cell<u64>,
}

impl WorkCounters {
    fn bump(cell: &Cell<u64>, n: u64) {
        cell.set(cell.get() + n);
    }
}

/// Solves `problem` under `cfg`, dispatching on the variant.
pub fn solve(problem: &ProblemDef, cfg: &PlannerConfig) -> Result<SolveOutcome, PlannerError> {
    cfg.validate()?;
    match cfg.variant {
        PlannerVariant::RrtConnect => solve_rrt_connect(problem, cfg),
        _ => solve_mit_star(problem, cfg),
    }
}

/// Measure of the region sampling currently targets: the informed
/// hyperspheroid union once a solution exists, the estimated union before
/// that, the whole bounds otherwise. Never exceeds the bounds measure.
fn sampling_measure(problem: &ProblemDef, c_curr: f64, s_est: f64) -> f64 {
    let bounds = problem.bounds_measure();
    let diam = if c_curr.is_finite() {
        c_curr
    } else if s_est.is_finite() {
        s_est
    } else {
        return bounds;
    };
    let mut total = 0.0;
    let mut any = false;
    for goal in &problem.goals {
        let s_min = problem.start.distance(goal);
        if s_min == 0.0 {
            continue;
        }
        // A diameter at or below the foci distance means the optimum was
        // matched to rounding; keep a degenerate sliver instead of zero.
        let d = if diam <= s_min { s_min * (1.0 + 1e-12) } else { diam };
        if let Ok(phs) = build_phs(&problem.start, goal, d) {
            total += phs.measure();
            any = true;
        }
    }
    if any {
        total.min(bounds)
    } else {
        bounds
    }
}

fn run_reverse(
    graph: &mut SearchGraph,
    problem: &ProblemDef,
    sparse_cfg: &SparseCheckConfig,
    meter: &Meter,
    counters: &WorkCounters,
) {
    let snapshot = sparse_cfg.clone();
    graph.reverse_search(&mut |a: &StateVec, b: &StateVec| {
        check_motion_sparse_with(
            |x: &StateVec| {
                meter.tick(1);
                WorkCounters::bump(&counters.sparse, 1);
                problem.state_is_free(x)
            },
            a,
            b,
            &snapshot,
        )
    });
}

/// Rejection sampling from the phase-selected distribution: the adaptive
/// sampler's ablation. Draws until `batch_size` valid states or a hard
/// attempt cap, so a near-blocked space cannot hang the loop.
fn rejection_batch(
    ctx: &SampleContext,
    batch_size: usize,
    problem: &ProblemDef,
    meter: &Meter,
    counters: &WorkCounters,
    rng: &mut ChaCha8Rng,
) -> Vec<StateVec> {
    let cap = batch_size.saturating_mul(1000);
    let primary = PrimarySampler::resolve(ctx);
    let mut out = Vec::with_capacity(batch_size);
    let mut attempts = 0usize;
    while out.len() < batch_size && attempts < cap {
        attempts += 1;
        meter.tick(1);
        WorkCounters::bump(&counters.draws, 1);
        let x = primary.draw(problem, rng);
        meter.tick(1);
        WorkCounters::bump(&counters.sample_evals, 1);
        if problem.state_is_free(&x) {
            out.push(x);
        }
    }
    out
}

fn solve_mit_star(problem: &ProblemDef, cfg: &PlannerConfig) -> Result<SolveOutcome, PlannerError> {
    let meter = Meter::with_rate(cfg.clock_mode, cfg.seconds_per_unit);
    let counters = WorkCounters::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut graph = SearchGraph::new(problem);
    let mut sparse_cfg = cfg.sparse.clone();
    let mut eis = EisState::unset();
    let mut c_curr = f64::INFINITY;
    let mut events: Vec<SolutionEvent> = Vec::new();
    let mut n_samples: u64 = 0;
    let mut n_batches: u64 = 0;

    let mut sampler_cfg = SamplerConfig::for_problem(problem, cfg.full_resolution, cfg.rng_seed);
    sampler_cfg.batch_size = cfg.batch_size;

    while meter.now() < cfg.max_time {
        if let Some(cap) = cfg.max_batches {
            if n_batches >= cap {
                break;
            }
        }
        n_batches += 1;

        // The estimated set steers sampling only while the latest reverse
        // search still offers a lazy route. Without one the batch reverts to
        // space-wide sampling (and the matching prune below is suspended) so
        // coverage can outgrow a too-small estimate; the stored state keeps
        // expanding from where it left off once lazy routes reappear.
        let eis_scope = cfg.enable_eis && graph.lazy_path_exists();
        let s_est_eff = if eis_scope { eis.s_est } else { f64::INFINITY };
        let ctx = SampleContext { c_curr, s_est: s_est_eff, problem };
        let batch = if cfg.enable_adaptive_sampler {
            meter.tick(cfg.batch_size as u64);
            WorkCounters::bump(&counters.draws, cfg.batch_size as u64);
            let mut valid = |x: &StateVec| {
                meter.tick(1);
                WorkCounters::bump(&counters.sample_evals, 1);
                problem.state_is_free(x)
            };
            sample_adaptive_batch(&ctx, &sampler_cfg, &mut valid, &mut rng)
        } else {
            rejection_batch(&ctx, cfg.batch_size, problem, &meter, &counters, &mut rng)
        };
        n_samples += graph.add_samples(batch) as u64;

        let lambda = sampling_measure(problem, c_curr, s_est_eff);
        let radius =
            cfg.rgg.rewire_factor * rewire_radius(&cfg.rgg, lambda, graph.q(), problem.dim)?;
        graph.rebuild_adjacency(radius);
        graph.clear_sparse_passed();
        run_reverse(&mut graph, problem, &sparse_cfg, &meter, &counters);
        graph.rebuild_forward_queue(c_curr);
        meter.tick(graph.take_ops());

        let mut refined_this_batch = false;
        let mut dbg_found = 0u64;
        let mut dbg_collided = 0u64;
        let mut dbg_eis_skipped = 0u64;
        let mut full_ok = |a: &StateVec, b: &StateVec| {
            check_motion_full_with(
                |x: &StateVec| {
                    meter.tick(1);
                    WorkCounters::bump(&counters.full, 1);
                    problem.state_is_free(x)
                },
                a,
                b,
                cfg.full_resolution,
            )
        };
        while meter.now() < cfg.max_time && graph.could_improve(c_curr) {
            let step = graph.forward_step(c_curr, &mut full_ok);
            meter.tick(graph.take_ops());
            match step {
                ForwardStep::FoundEdge { .. } => {
                    dbg_found += 1;
                    if let Some((goal_id, cost)) = graph.best_goal() {
                        if cost < c_curr {
                            c_curr = cost;
                            if let Some(waypoints) = graph.extract_path_states(goal_id) {
                                if let Ok(path) = Path::from_waypoints(waypoints) {
                                    let kind = if events.is_empty() {
                                        EventKind::Initial
                                    } else {
                                        EventKind::Improved
                                    };
                                    events.push(SolutionEvent {
                                        time: meter.now(),
                                        cost,
                                        kind,
                                        path,
                                    });
                                }
                            }
                        }
                    }
                }
                ForwardStep::Collided { src, dst } => {
                    dbg_collided += 1;
                    if cfg.enable_eis && c_curr.is_infinite() {
                        let c_hat = graph.state(src).distance(graph.state(dst));
                        if !graph.g_f(src).is_finite() || !graph.h_hat(dst).is_finite() {
                            dbg_eis_skipped += 1;
                        }
                        update_eis(&mut eis, graph.g_f(src), c_hat, graph.h_hat(dst));
                    }
                    if cfg.enable_adaptive_sparse
                        && !refined_this_batch
                        && graph.was_sparse_passed(src, dst)
                    {
                        sparse_cfg.refine();
                        refined_this_batch = true;
                    }
                    // The repair corrects existing queue entries lazily;
                    // edges first admitted by a finer sparse resolution wait
                    // for the next batch's queue rebuild.
                    run_reverse(&mut graph, problem, &sparse_cfg, &meter, &counters);
                    meter.tick(graph.take_ops());
                }
                ForwardStep::Exhausted => break,
            }
        }

        // Prune to the estimated set only when it framed this batch's
        // samples and the repairs left its lazy route intact; otherwise the
        // exploration samples it would delete are exactly what the next
        // batch builds on.
        let eis_for_prune = if eis_scope && graph.lazy_path_exists() {
            eis
        } else {
            EisState::unset()
        };
        prune(&mut graph, problem, c_curr, &eis_for_prune);
        meter.tick(graph.take_ops());

        if std::env::var_os("MITPROBE_DEBUG").is_some() {
            eprintln!(
                "batch {} t {:.4} s_est {:.6} e_gamma {:?} c_curr {:.4} q {} found {} collided {} eis_skipped {}",
                n_batches,
                meter.now(),
                eis.s_est,
                eis.e_gamma,
                c_curr,
                graph.q(),
                dbg_found,
                dbg_collided,
                dbg_eis_skipped
            );
        }
    }

    let (final_cost, final_path) = match graph.best_goal() {
        Some((goal_id, cost)) => {
            let path = graph
                .extract_path_states(goal_id)
                .and_then(|ws| Path::from_waypoints(ws).ok());
            (cost, path)
        }
        None => (f64::INFINITY, None),
    };
    let stats = SolveStats {
        n_samples,
        n_full_checks: counters.full.get(),
        n_sparse_checks: counters.sparse.get(),
        n_batches,
        work_units: meter.units(),
        elapsed_seconds: meter.now(),
    };
    Ok(SolveOutcome { events, final_cost, final_path, stats })
}

fn rrt_max_edge_for_dim(dim: usize) -> f64 {
    match dim {
        2 => 0.3,
        4 => 0.5,
        8 => 1.25,
        16 => 3.0,
        n => 0.3 * (n as f64 / 2.0).sqrt(),
    }
}

struct RrtTree {
    /// `(state, parent index)`; roots carry `None`.
    nodes: Vec<(StateVec, Option<usize>)>,
    n_roots: usize,
}

impl RrtTree {
    fn new(roots: Vec<StateVec>) -> Self {
        let n_roots = roots.len();
        RrtTree {
            nodes: roots.into_iter().map(|s| (s, None)).collect(),
            n_roots,
        }
    }

    /// Brute-force nearest node, ties to the smaller index.
    fn nearest(&self, x: &StateVec) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, (s, _)) in self.nodes.iter().enumerate() {
            let d = s.distance(x);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    fn walk_from_root(&self, mut idx: usize) -> Vec<StateVec> {
        let mut chain = vec![idx];
        while let Some(parent) = self.nodes[idx].1 {
            chain.push(parent);
            idx = parent;
        }
        chain.reverse();
        chain.into_iter().map(|i| self.nodes[i].0.clone()).collect()
    }
}

enum ExtendResult {
    Advanced(usize),
    Reached(usize),
    Trapped,
}

fn steer(from: &StateVec, to: &StateVec, max_edge: f64) -> StateVec {
    let d = from.distance(to);
    if d <= max_edge {
        to.clone()
    } else {
        from.lerp(to, max_edge / d)
    }
}

fn rrt_extend(
    tree: &mut RrtTree,
    target: &StateVec,
    max_edge: f64,
    motion_ok: &mut dyn FnMut(&StateVec, &StateVec) -> bool,
    meter: &Meter,
) -> ExtendResult {
    // The linear nearest-neighbor scan is this planner's graph work.
    meter.tick(tree.nodes.len() as u64);
    let ni = tree.nearest(target);
    let from = tree.nodes[ni].0.clone();
    let d = from.distance(target);
    if d == 0.0 {
        return ExtendResult::Reached(ni);
    }
    let next = steer(&from, target, max_edge);
    if !motion_ok(&from, &next) {
        return ExtendResult::Trapped;
    }
    tree.nodes.push((next, Some(ni)));
    let idx = tree.nodes.len() - 1;
    if d <= max_edge {
        ExtendResult::Reached(idx)
    } else {
        ExtendResult::Advanced(idx)
    }
}

fn rrt_connect_toward(
    tree: &mut RrtTree,
    target: &StateVec,
    max_edge: f64,
    motion_ok: &mut dyn FnMut(&StateVec, &StateVec) -> bool,
    meter: &Meter,
) -> Option<usize> {
    loop {
        match rrt_extend(tree, target, max_edge, motion_ok, meter) {
            ExtendResult::Reached(idx) => return Some(idx),
            ExtendResult::Advanced(_) => continue,
            ExtendResult::Trapped => return None,
        }
    }
}

/// Bidirectional RRT-Connect baseline: alternating trees from the start
/// and the goals, greedy connects, a small bias toward the other side's
/// roots. Not anytime; the first connection is returned and the solve
/// ends.
fn solve_rrt_connect(problem: &ProblemDef, cfg: &PlannerConfig) -> Result<SolveOutcome, PlannerError> {
    let meter = Meter::with_rate(cfg.clock_mode, cfg.seconds_per_unit);
    let counters = WorkCounters::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let max_edge = cfg.rrt_max_edge.unwrap_or_else(|| rrt_max_edge_for_dim(problem.dim));
    let draw_cap = cfg.max_batches.map(|b| b.saturating_mul(cfg.batch_size as u64));

    let mut tree_a = RrtTree::new(vec![problem.start.clone()]);
    let mut tree_b = RrtTree::new(problem.goals.clone());
    let mut a_is_start = true;

    let mut motion_ok = |a: &StateVec, b: &StateVec| {
        check_motion_full_with(
            |x: &StateVec| {
                meter.tick(1);
                WorkCounters::bump(&counters.full, 1);
                problem.state_is_free(x)
            },
            a,
            b,
            cfg.full_resolution,
        )
    };

    let mut events = Vec::new();
    while meter.now() < cfg.max_time {
        if let Some(cap) = draw_cap {
            if counters.draws.get() >= cap {
                break;
            }
        }
        meter.tick(1);
        WorkCounters::bump(&counters.draws, 1);
        let x_rand = if rng.gen::<f64>() < cfg.rrt_goal_bias {
            if a_is_start {
                let k = rng.gen_range(0..problem.goals.len());
                problem.goals[k].clone()
            } else {
                problem.start.clone()
            }
        } else {
            sample_uniform(problem, &mut rng)
        };

        let extended = match rrt_extend(&mut tree_a, &x_rand, max_edge, &mut motion_ok, &meter) {
            ExtendResult::Advanced(idx) | ExtendResult::Reached(idx) => Some(idx),
            ExtendResult::Trapped => None,
        };
        if let Some(idx) = extended {
            let meet = tree_a.nodes[idx].0.clone();
            if let Some(b_idx) = rrt_connect_toward(&mut tree_b, &meet, max_edge, &mut motion_ok, &meter) {
                let walk_a = tree_a.walk_from_root(idx);
                let walk_b = tree_b.walk_from_root(b_idx);
                let (start_side, goal_side) = if a_is_start {
                    (walk_a, walk_b)
                } else {
                    (walk_b, walk_a)
                };
                let mut waypoints = start_side;
                for s in goal_side.into_iter().rev().skip(1) {
                    waypoints.push(s);
                }
                if let Ok(path) = Path::from_waypoints(waypoints) {
                    events.push(SolutionEvent {
                        time: meter.now(),
                        cost: path.cost,
                        kind: EventKind::Initial,
                        path,
                    });
                    break;
                }
            }
        }

        std::mem::swap(&mut tree_a, &mut tree_b);
        a_is_start = !a_is_start;
    }

    let n_samples =
        (tree_a.nodes.len() - tree_a.n_roots + tree_b.nodes.len() - tree_b.n_roots) as u64;
    let (final_cost, final_path) = match events.last() {
        Some(e) => (e.cost, Some(e.path.clone())),
        None => (f64::INFINITY, None),
    };
    let stats = SolveStats {
        n_samples,
        n_full_checks: counters.full.get(),
        n_sparse_checks: counters.sparse.get(),
        n_batches: 0,
        work_units: meter.units(),
        elapsed_seconds: meter.now(),
    };
    Ok(SolveOutcome { events, final_cost, final_path, stats })
}
