//! The asymmetric bidirectional search core.
//!
//! Samples (plus start and goals) induce an implicit random geometric graph
//! whose connection radius shrinks as the sample count grows. A reverse
//! Dijkstra search from the goals over sparsely checked edges labels states
//! with an admissible cost-to-go `h_hat`. The forward search pops edges
//! from a queue keyed by `g_F(src) + c_hat + h_hat(dst)`, fully validates
//! them, and grows the forward tree; collisions feed the estimated informed
//! set and blacklist the edge for both directions, after which the reverse
//! search is recomputed. Pruning drops samples that can no longer
//! participate in a better solution.
//!
//! All tie-breaks are deterministic (cost, then edge cost, then ids), so a
//! fixed seed reproduces runs bit for bit.

use crate::collision::{check_motion_full, check_motion_sparse, SparseCheckConfig};
use crate::phs::{build_phs, unit_ball_measure, ProlateHyperspheroid};
use crate::space::{ProblemDef, StateVec};
use rustc_hash::{FxHashMap, FxHashSet};
use serde_json::json;
use std::cell::Cell;
use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("rewire radius needs at least two samples, got {0}")]
    TooFewSamples(usize),
}

/// Constants of the random-geometric-graph radius rule.
#[derive(Clone, Copy, Debug)]
pub struct RggConfig {
    /// Inflation factor applied to the minimal asymptotically optimal
    /// radius; must exceed 1.
    pub eta: f64,
    /// Connection neighborhoods use `rewire_factor * rewire_radius`.
    pub rewire_factor: f64,
}

impl Default for RggConfig {
    fn default() -> Self {
        RggConfig {
            eta: 1.001,
            rewire_factor: 1.2,
        }
    }
}

/// The rewiring radius
/// `eta * (2 (1 + 1/n) * (lambda / zeta_n) * (ln q / q))^(1/n)`
/// where `lambda` is the measure of the region the planner currently
/// samples and `zeta_n` the unit-ball volume.
pub fn rewire_radius(cfg: &RggConfig, lambda: f64, q: usize, n: usize) -> Result<f64, SearchError> {
    if q < 2 {
        return Err(SearchError::TooFewSamples(q));
    }
    let nf = n as f64;
    let qf = q as f64;
    let inner = 2.0 * (1.0 + 1.0 / nf) * (lambda / unit_ball_measure(n)) * (qf.ln() / qf);
    Ok(cfg.eta * inner.powf(1.0 / nf))
}

/// Estimated-informed-set state. `s_adms` and `s_est` are infinite until
/// the first admissible failed edge defines them; `gamma` and `e_gamma`
/// stay unset until then.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EisState {
    /// Admissible total cost of the first failed edge's hypothetical path.
    pub s_adms: f64,
    /// Known fraction of `s_adms` (forward cost-to-come share).
    pub gamma: Option<f64>,
    /// Expansion factor `sqrt(1 + (1 - gamma)^2)`, kept from the first
    /// computation and reused for every later expansion.
    pub e_gamma: Option<f64>,
    /// Transverse diameter of the estimated informed set.
    pub s_est: f64,
}

impl EisState {
    pub fn unset() -> Self {
        EisState {
            s_adms: f64::INFINITY,
            gamma: None,
            e_gamma: None,
            s_est: f64::INFINITY,
        }
    }

    pub fn is_set(&self) -> bool {
        self.s_est.is_finite()
    }
}

/// Folds one failed forward edge into the estimated informed set.
///
/// The first admissible failure fixes `s_adms = g_s + c_hat + h_t`,
/// `gamma = g_s / s_adms`, `e_gamma = sqrt(1 + (1 - gamma)^2)` and
/// `s_est = s_adms * e_gamma`. Every later failure expands the set by the
/// same factor: `s_est *= e_gamma`. Edges without finite forward cost and
/// reverse heuristic carry no admissible prior and are ignored.
pub fn update_eis(eis: &mut EisState, g_s: f64, c_hat: f64, h_t: f64) {
    if !g_s.is_finite() || !h_t.is_finite() {
        return;
    }
    if eis.s_est.is_finite() {
        if let Some(e_gamma) = eis.e_gamma {
            eis.s_est *= e_gamma;
        }
        return;
    }
    let s_adms = g_s + c_hat + h_t;
    if !(s_adms > 0.0) || !s_adms.is_finite() {
        return;
    }
    let gamma = g_s / s_adms;
    let e_gamma = (1.0 + (1.0 - gamma) * (1.0 - gamma)).sqrt();
    eis.s_adms = s_adms;
    eis.gamma = Some(gamma);
    eis.e_gamma = Some(e_gamma);
    eis.s_est = s_adms * e_gamma;
}

pub type SampleId = usize;

struct SampleNode {
    state: StateVec,
    active: bool,
    is_start: bool,
    is_goal: bool,
    g_f: f64,
    forward_parent: Option<SampleId>,
    forward_children: Vec<SampleId>,
    h_hat: f64,
    reverse_parent: Option<SampleId>,
}

impl SampleNode {
    fn new(state: StateVec) -> Self {
        SampleNode {
            state,
            active: true,
            is_start: false,
            is_goal: false,
            g_f: f64::INFINITY,
            forward_parent: None,
            forward_children: Vec::new(),
            h_hat: f64::INFINITY,
            reverse_parent: None,
        }
    }
}

/// Forward edge-queue entry. Ordered ascending by total key, then edge
/// cost, then endpoint ids; `g_src` snapshots the source cost at push time
/// so stale entries can be recognized.
#[derive(Clone, Copy, Debug)]
struct QueueEdge {
    total: f64,
    c_hat: f64,
    src: SampleId,
    dst: SampleId,
    g_src: f64,
}

impl PartialEq for QueueEdge {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for QueueEdge {}
impl PartialOrd for QueueEdge {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueueEdge {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total
            .total_cmp(&other.total)
            .then(self.c_hat.total_cmp(&other.c_hat))
            .then(self.src.cmp(&other.src))
            .then(self.dst.cmp(&other.dst))
    }
}

#[derive(Clone, Copy, Debug)]
struct ReverseItem {
    cost: f64,
    id: SampleId,
}

impl PartialEq for ReverseItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for ReverseItem {}
impl PartialOrd for ReverseItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ReverseItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost.total_cmp(&other.cost).then(self.id.cmp(&other.id))
    }
}

/// Outcome of one forward-search step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForwardStep {
    /// The edge passed full validation and was folded into the forward tree.
    FoundEdge { src: SampleId, dst: SampleId },
    /// The edge failed full validation and is now blacklisted; the caller
    /// updates the estimated informed set and repairs the reverse search.
    Collided { src: SampleId, dst: SampleId },
    /// No queue entry can improve on the current solution.
    Exhausted,
}

fn pair_key(a: SampleId, b: SampleId) -> (SampleId, SampleId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn bits_key(state: &StateVec) -> Vec<u64> {
    state.coords().iter().map(|c| c.to_bits()).collect()
}

/// Below this many active samples the brute-force pair loop beats grid
/// construction.
const GRID_MIN_SAMPLES: usize = 256;

/// Hard cap on gridded axes; `total * 2 > max_cells` breaks the axis loop
/// long before this, so the cap only bounds the stack buffers in
/// [`SampleGrid::collect_candidates`].
const MAX_GRID_AXES: usize = 64;

/// Uniform bucket grid over the axes that subdivide at the connection
/// radius. Cells are at least `radius` wide, so every neighbor of a point
/// lies in a cell overlapping its per-axis `[x - radius, x + radius]`
/// window. Axes whose sample spread is below the radius stay ungridded;
/// in high dimensions, where the radius approaches the bounds, the grid
/// degenerates to a single bucket and neighbor search is effectively the
/// brute-force scan it replaces.
///
/// Buckets live in one flat id array laid out by counting sort, so a build
/// allocates a constant number of vectors regardless of the cell count.
struct SampleGrid {
    axes: Vec<GridAxis>,
    strides: Vec<usize>,
    /// Bucket `c` holds `items[bucket_start[c]..bucket_start[c + 1]]`.
    bucket_start: Vec<usize>,
    items: Vec<SampleId>,
}

struct GridAxis {
    axis: usize,
    lo: f64,
    width: f64,
    cells: usize,
}

impl SampleGrid {
    fn build(nodes: &[SampleNode], active: &[SampleId], radius: f64) -> SampleGrid {
        let dim = nodes[active[0]].state.dim();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &i in active {
            for (axis, &c) in nodes[i].state.coords().iter().enumerate() {
                lo[axis] = lo[axis].min(c);
                hi[axis] = hi[axis].max(c);
            }
        }
        // Keep the table linear in the sample count; extra cells past that
        // only cost memory without shrinking buckets.
        let max_cells = (4 * active.len()).max(64);
        let mut axes = Vec::new();
        let mut total = 1usize;
        for axis in 0..dim {
            let span = hi[axis] - lo[axis];
            if !(span > radius) {
                continue;
            }
            let cells = ((span / radius) as usize).max(1).min(max_cells / total);
            if cells < 2 {
                continue;
            }
            total *= cells;
            axes.push(GridAxis {
                axis,
                lo: lo[axis],
                // span / cells >= radius because cells <= span / radius.
                width: span / cells as f64,
                cells,
            });
            if total * 2 > max_cells || axes.len() == MAX_GRID_AXES {
                break;
            }
        }
        if axes.is_empty() {
            return SampleGrid {
                axes,
                strides: Vec::new(),
                bucket_start: vec![0, active.len()],
                items: active.to_vec(),
            };
        }
        let mut strides = vec![0usize; axes.len()];
        let mut acc = 1usize;
        for (k, ax) in axes.iter().enumerate() {
            strides[k] = acc;
            acc *= ax.cells;
        }
        let cell_of_sample = |i: SampleId| -> usize {
            axes.iter()
                .zip(&strides)
                .map(|(ax, s)| Self::cell_of(ax, nodes[i].state.coords()[ax.axis]) * s)
                .sum()
        };
        let mut cells: Vec<usize> = Vec::with_capacity(active.len());
        let mut bucket_start = vec![0usize; acc + 1];
        for &i in active {
            let c = cell_of_sample(i);
            cells.push(c);
            bucket_start[c + 1] += 1;
        }
        for c in 1..=acc {
            bucket_start[c] += bucket_start[c - 1];
        }
        // Filling in `active` order keeps every bucket ascending by id.
        let mut cursor = bucket_start.clone();
        let mut items = vec![0; active.len()];
        for (&i, &c) in active.iter().zip(&cells) {
            items[cursor[c]] = i;
            cursor[c] += 1;
        }
        SampleGrid {
            axes,
            strides,
            bucket_start,
            items,
        }
    }

    fn cell_of(ax: &GridAxis, x: f64) -> usize {
        let cell = ((x - ax.lo) / ax.width).floor();
        (cell.max(0.0) as usize).min(ax.cells - 1)
    }

    /// Gathers the ids in every cell overlapping the radius window around
    /// `coords`. Supersets the true neighbors; callers re-check distances.
    fn collect_candidates(&self, coords: &[f64], radius: f64, out: &mut Vec<SampleId>) {
        out.clear();
        if self.axes.is_empty() {
            out.extend_from_slice(&self.items);
            return;
        }
        let k_axes = self.axes.len();
        let mut ranges = [(0usize, 0usize); MAX_GRID_AXES];
        let mut cursor = [0usize; MAX_GRID_AXES];
        for (k, ax) in self.axes.iter().enumerate() {
            let first = Self::cell_of(ax, coords[ax.axis] - radius);
            ranges[k] = (first, Self::cell_of(ax, coords[ax.axis] + radius));
            cursor[k] = first;
        }
        loop {
            let mut index = 0usize;
            for k in 0..k_axes {
                index += cursor[k] * self.strides[k];
            }
            out.extend_from_slice(&self.items[self.bucket_start[index]..self.bucket_start[index + 1]]);
            let mut k = 0;
            loop {
                if k == k_axes {
                    return;
                }
                if cursor[k] < ranges[k].1 {
                    cursor[k] += 1;
                    break;
                }
                cursor[k] = ranges[k].0;
                k += 1;
            }
        }
    }
}

/// Samples, both trees, the edge queue, and the edge caches.
///
/// Sample ids are stable; pruning deactivates nodes instead of removing
/// them. Neighbor lookups run over a per-batch adjacency, maintained
/// incrementally while the connection radius shrinks and rebuilt in full
/// (bucket grid above desk scale, see [`SampleGrid`]) when it grows.
///
/// Every graph operation proportional to samples or edges bumps an
/// internal op counter which callers drain through [`Self::take_ops`].
/// Late batches on large graphs spend most of their effort in these
/// loops rather than in collision checks, so a time accounting that
/// ignored them would underprice exactly the batches that cost the most.
pub struct SearchGraph {
    nodes: Vec<SampleNode>,
    active_count: usize,
    dedupe: FxHashSet<Vec<u64>>,
    /// Per-node neighbor lists as `(id, distance)`, sorted by id; rebuilt
    /// each batch. Caching the distance here keeps the relaxation and
    /// queue-seeding loops free of norm computations.
    adjacency: Vec<Vec<(SampleId, f64)>>,
    /// Edges that failed full validation, keyed by unordered id pair.
    /// Blacklisted pairs are also stripped from the adjacency so the
    /// relaxation and queue-seeding loops never pay a lookup for them;
    /// only [`Self::maintain_top`] still consults the set, to drop queue
    /// entries that predate the blacklisting.
    blacklist: FxHashSet<(SampleId, SampleId)>,
    /// Edges that passed full validation; accepted again without recheck.
    valid_edges: FxHashSet<(SampleId, SampleId)>,
    /// Edges sparse-validated since the last batch began; a forward
    /// collision on one of these triggers sparse refinement.
    sparse_passed: FxHashSet<(SampleId, SampleId)>,
    queue: BinaryHeap<Reverse<QueueEdge>>,
    start: SampleId,
    goals: Vec<SampleId>,
    ops: Cell<u64>,
    /// Connection radius of the currently materialized adjacency; `0.0`
    /// when none is. A rebuild at a smaller or equal radius only has to
    /// filter existing lists and connect nodes added since.
    adjacency_radius: f64,
    /// Node-count watermark of the last rebuild; ids at or past it have no
    /// materialized neighbors yet.
    adjacency_nodes: usize,
}

impl SearchGraph {
    /// Seeds the graph with the problem's start and goal states.
    pub fn new(problem: &ProblemDef) -> Self {
        let mut graph = SearchGraph {
            nodes: Vec::new(),
            active_count: 0,
            dedupe: FxHashSet::default(),
            adjacency: Vec::new(),
            blacklist: FxHashSet::default(),
            valid_edges: FxHashSet::default(),
            sparse_passed: FxHashSet::default(),
            queue: BinaryHeap::new(),
            start: 0,
            goals: Vec::new(),
            ops: Cell::new(0),
            adjacency_radius: 0.0,
            adjacency_nodes: 0,
        };
        let start = graph.push_node(problem.start.clone());
        graph.nodes[start].is_start = true;
        graph.nodes[start].g_f = 0.0;
        graph.start = start;
        for goal in &problem.goals {
            let id = graph.push_node(goal.clone());
            graph.nodes[id].is_goal = true;
            graph.goals.push(id);
        }
        graph
    }

    fn push_node(&mut self, state: StateVec) -> SampleId {
        self.dedupe.insert(bits_key(&state));
        self.nodes.push(SampleNode::new(state));
        self.adjacency.push(Vec::new());
        self.active_count += 1;
        self.nodes.len() - 1
    }

    /// Inserts one sample, rejecting exact-coordinate duplicates.
    pub fn insert_sample(&mut self, state: StateVec) -> Option<SampleId> {
        if !self.dedupe.insert(bits_key(&state)) {
            return None;
        }
        self.nodes.push(SampleNode::new(state));
        self.adjacency.push(Vec::new());
        self.active_count += 1;
        Some(self.nodes.len() - 1)
    }

    fn bump_ops(&self, n: u64) {
        self.ops.set(self.ops.get() + n);
    }

    /// Returns and resets the count of elementary graph operations (edge
    /// scans, relaxations, queue pops, prune visits) performed since the
    /// last call. Callers fold these into their work accounting.
    pub fn take_ops(&self) -> u64 {
        self.ops.replace(0)
    }

    /// Inserts a batch; returns how many were new.
    pub fn add_samples(&mut self, states: Vec<StateVec>) -> usize {
        states
            .into_iter()
            .filter(|s| self.insert_sample(s.clone()).is_some())
            .count()
    }

    /// Number of active samples, start and goals included.
    pub fn q(&self) -> usize {
        self.active_count
    }

    /// Total node slots, tombstones included.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn start_id(&self) -> SampleId {
        self.start
    }

    pub fn goal_ids(&self) -> &[SampleId] {
        &self.goals
    }

    pub fn state(&self, id: SampleId) -> &StateVec {
        &self.nodes[id].state
    }

    pub fn g_f(&self, id: SampleId) -> f64 {
        self.nodes[id].g_f
    }

    pub fn h_hat(&self, id: SampleId) -> f64 {
        self.nodes[id].h_hat
    }

    /// True when a lazy start-goal route exists: some active sample sits in
    /// both trees, so the forward path to it concatenated with its reverse
    /// branch reaches a goal. The start itself qualifies once the reverse
    /// search reaches it.
    pub fn lazy_path_exists(&self) -> bool {
        self.bump_ops(self.nodes.len() as u64);
        self.nodes
            .iter()
            .any(|n| n.active && n.g_f.is_finite() && n.h_hat.is_finite())
    }

    pub fn is_active(&self, id: SampleId) -> bool {
        self.nodes[id].active
    }

    pub fn forward_parent(&self, id: SampleId) -> Option<SampleId> {
        self.nodes[id].forward_parent
    }

    pub fn reverse_parent(&self, id: SampleId) -> Option<SampleId> {
        self.nodes[id].reverse_parent
    }

    pub fn is_blacklisted(&self, a: SampleId, b: SampleId) -> bool {
        self.blacklist.contains(&pair_key(a, b))
    }

    /// Goal with the cheapest finite forward cost, ties to the smaller id.
    pub fn best_goal(&self) -> Option<(SampleId, f64)> {
        let mut best: Option<(SampleId, f64)> = None;
        for &g in &self.goals {
            let cost = self.nodes[g].g_f;
            if cost.is_finite() && best.map_or(true, |(_, b)| cost < b) {
                best = Some((g, cost));
            }
        }
        best
    }

    /// Forward-tree waypoints from the start to `id`, or None when `id`
    /// is not in the tree.
    pub fn extract_path_states(&self, id: SampleId) -> Option<Vec<StateVec>> {
        if !self.nodes[id].g_f.is_finite() {
            return None;
        }
        let mut chain = vec![id];
        let mut cursor = id;
        while let Some(parent) = self.nodes[cursor].forward_parent {
            chain.push(parent);
            cursor = parent;
        }
        if *chain.last().unwrap() != self.start {
            return None;
        }
        chain.reverse();
        Some(chain.iter().map(|&i| self.nodes[i].state.clone()).collect())
    }

    fn dist(&self, a: SampleId, b: SampleId) -> f64 {
        self.nodes[a].state.distance(&self.nodes[b].state)
    }

    /// Rebuilds neighbor lists for the given connection radius over active
    /// nodes, leaving out blacklisted pairs; lists come out sorted by id.
    ///
    /// The planner's radius shrinks almost every batch, so the usual call
    /// filters the standing lists down to the new radius and connects only
    /// the nodes added since the last rebuild. A radius increase (estimate
    /// inflation, or the radius rule rebounding after a heavy prune) falls
    /// back to a full rebuild. Both paths produce identical lists.
    pub fn rebuild_adjacency(&mut self, radius: f64) {
        if !(radius > 0.0) {
            for list in &mut self.adjacency {
                list.clear();
            }
            self.adjacency_radius = 0.0;
            self.adjacency_nodes = self.nodes.len();
            return;
        }
        if radius <= self.adjacency_radius {
            self.refresh_adjacency(radius);
        } else {
            self.rebuild_adjacency_full(radius);
        }
        self.adjacency_radius = radius;
        self.adjacency_nodes = self.nodes.len();
    }

    /// Full rebuild: brute-force pair loop below desk scale, bucket grid
    /// above it; the grid yields the same lists without the quadratic scan.
    fn rebuild_adjacency_full(&mut self, radius: f64) {
        for list in &mut self.adjacency {
            list.clear();
        }
        let active: Vec<SampleId> = (0..self.nodes.len())
            .filter(|&i| self.nodes[i].active)
            .collect();
        let mut scanned: u64 = 0;
        if active.len() <= GRID_MIN_SAMPLES {
            for (rank, &i) in active.iter().enumerate() {
                scanned += (active.len() - rank - 1) as u64;
                for &j in &active[rank + 1..] {
                    let d = self.dist(i, j);
                    if d > 0.0 && d <= radius && !self.blacklist.contains(&pair_key(i, j)) {
                        self.adjacency[i].push((j, d));
                        self.adjacency[j].push((i, d));
                    }
                }
            }
            self.bump_ops(scanned);
            return;
        }

        let grid = SampleGrid::build(&self.nodes, &active, radius);
        let mut candidates = Vec::new();
        for &i in &active {
            grid.collect_candidates(self.nodes[i].state.coords(), radius, &mut candidates);
            scanned += candidates.len() as u64;
            for &j in &candidates {
                // Each unordered pair is handled once, from its smaller id.
                if j <= i {
                    continue;
                }
                let d = self.dist(i, j);
                if d > 0.0 && d <= radius && !self.blacklist.contains(&pair_key(i, j)) {
                    self.adjacency[i].push((j, d));
                    self.adjacency[j].push((i, d));
                }
            }
        }
        // The cell scan emits neighbors out of id order; restore the sorted
        // invariant the brute-force loop produces.
        for &i in &active {
            self.adjacency[i].sort_unstable_by_key(|e| e.0);
        }
        self.bump_ops(scanned);
    }

    /// Incremental rebuild for a non-increasing radius: drops list entries
    /// that died (pruned targets, edges past the new radius) and connects
    /// the nodes added since the last rebuild against all active nodes.
    ///
    /// Sortedness is preserved for free: surviving entries keep their
    /// order, and appended neighbors are new nodes, whose ids exceed every
    /// id already present. Only the new nodes' own lists need a sort.
    fn refresh_adjacency(&mut self, radius: f64) {
        let first_new = self.adjacency_nodes;
        let mut scanned: u64 = 0;
        {
            let Self { nodes, adjacency, .. } = self;
            for id in 0..first_new.min(adjacency.len()) {
                if !nodes[id].active {
                    adjacency[id].clear();
                    continue;
                }
                scanned += adjacency[id].len() as u64;
                adjacency[id].retain(|&(j, d)| nodes[j].active && d <= radius);
            }
        }
        let n = self.nodes.len();
        let new_active: Vec<SampleId> =
            (first_new..n).filter(|&i| self.nodes[i].active).collect();
        if !new_active.is_empty() {
            let active: Vec<SampleId> = (0..n).filter(|&i| self.nodes[i].active).collect();
            if active.len() <= GRID_MIN_SAMPLES {
                for &i in &new_active {
                    scanned += active.len() as u64;
                    for &j in &active {
                        // New-new pairs connect from the larger id; new-old
                        // pairs only ever reach this loop from the new side.
                        if j >= first_new && j >= i {
                            continue;
                        }
                        let d = self.dist(i, j);
                        if d > 0.0 && d <= radius && !self.blacklist.contains(&pair_key(i, j)) {
                            self.adjacency[i].push((j, d));
                            self.adjacency[j].push((i, d));
                        }
                    }
                }
            } else {
                let grid = SampleGrid::build(&self.nodes, &active, radius);
                let mut candidates = Vec::new();
                for &i in &new_active {
                    grid.collect_candidates(self.nodes[i].state.coords(), radius, &mut candidates);
                    scanned += candidates.len() as u64;
                    for &j in &candidates {
                        if j >= first_new && j >= i {
                            continue;
                        }
                        let d = self.dist(i, j);
                        if d > 0.0 && d <= radius && !self.blacklist.contains(&pair_key(i, j)) {
                            self.adjacency[i].push((j, d));
                            self.adjacency[j].push((i, d));
                        }
                    }
                }
            }
            for &i in &new_active {
                self.adjacency[i].sort_unstable_by_key(|e| e.0);
            }
        }
        self.bump_ops(scanned);
    }

    /// Forgets which edges were sparse-validated; called at batch start so
    /// the refinement trigger is scoped per batch.
    pub fn clear_sparse_passed(&mut self) {
        self.sparse_passed.clear();
    }

    pub fn was_sparse_passed(&self, a: SampleId, b: SampleId) -> bool {
        self.sparse_passed.contains(&pair_key(a, b))
    }

    /// Marks an edge invalid in both directions for all future searches and
    /// drops it from the adjacency, so the hot loops never revisit it.
    pub fn blacklist_edge(&mut self, a: SampleId, b: SampleId) {
        self.blacklist.insert(pair_key(a, b));
        self.remove_adjacency_pair(a, b);
    }

    fn remove_adjacency_pair(&mut self, a: SampleId, b: SampleId) {
        if let Ok(pos) = self.adjacency[a].binary_search_by_key(&b, |e| e.0) {
            self.adjacency[a].remove(pos);
        }
        if let Ok(pos) = self.adjacency[b].binary_search_by_key(&a, |e| e.0) {
            self.adjacency[b].remove(pos);
        }
    }

    /// Multi-source Dijkstra from the goals over the adjacency, admitting
    /// an edge iff `motion_ok` passes; results land in `h_hat` and
    /// `reverse_parent`. Each undirected edge is checked at most once per
    /// invocation; passes are recorded for the refinement trigger.
    pub fn reverse_search(&mut self, motion_ok: &mut dyn FnMut(&StateVec, &StateVec) -> bool) {
        for node in &mut self.nodes {
            node.h_hat = f64::INFINITY;
            node.reverse_parent = None;
        }
        let mut heap: BinaryHeap<Reverse<ReverseItem>> = BinaryHeap::new();
        for &g in &self.goals {
            if self.nodes[g].active {
                self.nodes[g].h_hat = 0.0;
                heap.push(Reverse(ReverseItem { cost: 0.0, id: g }));
            }
        }
        let mut checked: FxHashMap<(SampleId, SampleId), bool> = FxHashMap::default();
        let mut scanned: u64 = 0;
        while let Some(Reverse(item)) = heap.pop() {
            scanned += 1;
            if item.cost > self.nodes[item.id].h_hat {
                continue;
            }
            scanned += self.adjacency[item.id].len() as u64;
            for k in 0..self.adjacency[item.id].len() {
                let (nb, d) = self.adjacency[item.id][k];
                if !self.nodes[nb].active {
                    continue;
                }
                let cand = item.cost + d;
                if cand >= self.nodes[nb].h_hat {
                    continue;
                }
                let pk = pair_key(item.id, nb);
                let ok = match checked.get(&pk) {
                    Some(&cached) => cached,
                    None => {
                        let result = motion_ok(&self.nodes[item.id].state, &self.nodes[nb].state);
                        checked.insert(pk, result);
                        result
                    }
                };
                if !ok {
                    continue;
                }
                self.sparse_passed.insert(pk);
                self.nodes[nb].h_hat = cand;
                self.nodes[nb].reverse_parent = Some(item.id);
                heap.push(Reverse(ReverseItem { cost: cand, id: nb }));
            }
        }
        self.bump_ops(scanned);
    }

    fn push_edge(&mut self, src: SampleId, dst: SampleId, c_hat: f64, c_curr: f64) {
        if !self.nodes[dst].active {
            return;
        }
        let h_dst = self.nodes[dst].h_hat;
        if !h_dst.is_finite() {
            return;
        }
        let g_src = self.nodes[src].g_f;
        if g_src + c_hat >= self.nodes[dst].g_f {
            return;
        }
        let total = g_src + c_hat + h_dst;
        if !(total < c_curr) {
            return;
        }
        self.queue.push(Reverse(QueueEdge {
            total,
            c_hat,
            src,
            dst,
            g_src,
        }));
    }

    fn push_outgoing(&mut self, src: SampleId, c_curr: f64) {
        self.bump_ops(self.adjacency[src].len() as u64);
        for k in 0..self.adjacency[src].len() {
            let (dst, c_hat) = self.adjacency[src][k];
            self.push_edge(src, dst, c_hat, c_curr);
        }
    }

    /// Clears and reseeds the edge queue from every forward-tree vertex;
    /// run after each batch's reverse search refreshes `h_hat`.
    pub fn rebuild_forward_queue(&mut self, c_curr: f64) {
        self.queue.clear();
        for id in 0..self.nodes.len() {
            if self.nodes[id].active && self.nodes[id].g_f.is_finite() {
                self.push_outgoing(id, c_curr);
            }
        }
    }

    /// Drops dead queue entries and fixes entries whose `h_hat` moved since
    /// push; afterwards the top entry (if any) carries an accurate key.
    fn maintain_top(&mut self) -> Option<QueueEdge> {
        while let Some(Reverse(top)) = self.queue.peek() {
            let e = *top;
            self.bump_ops(1);
            let src_ok = self.nodes[e.src].active && self.nodes[e.src].g_f == e.g_src;
            let dst_ok = self.nodes[e.dst].active && self.nodes[e.dst].h_hat.is_finite();
            if !src_ok || !dst_ok || self.blacklist.contains(&pair_key(e.src, e.dst)) {
                self.queue.pop();
                continue;
            }
            let current = e.g_src + e.c_hat + self.nodes[e.dst].h_hat;
            if current != e.total {
                self.queue.pop();
                self.queue.push(Reverse(QueueEdge { total: current, ..e }));
                continue;
            }
            return Some(e);
        }
        None
    }

    /// True iff the best queue entry's key is strictly below `c_curr`.
    pub fn could_improve(&mut self, c_curr: f64) -> bool {
        match self.maintain_top() {
            Some(e) => e.total < c_curr,
            None => false,
        }
    }

    /// Pops queue entries until one is decisive: a full-check success that
    /// extends the tree, a collision, or queue exhaustion. Entries that can
    /// no longer improve their target are skipped silently.
    pub fn forward_step(
        &mut self,
        c_curr: f64,
        full_ok: &mut dyn FnMut(&StateVec, &StateVec) -> bool,
    ) -> ForwardStep {
        loop {
            let Some(e) = self.maintain_top() else {
                return ForwardStep::Exhausted;
            };
            if !(e.total < c_curr) {
                return ForwardStep::Exhausted;
            }
            self.queue.pop();
            let g_new = e.g_src + e.c_hat;
            if g_new >= self.nodes[e.dst].g_f {
                continue;
            }
            let pk = pair_key(e.src, e.dst);
            if !self.valid_edges.contains(&pk) {
                let ok = full_ok(&self.nodes[e.src].state, &self.nodes[e.dst].state);
                if !ok {
                    self.blacklist_edge(e.src, e.dst);
                    return ForwardStep::Collided { src: e.src, dst: e.dst };
                }
                self.valid_edges.insert(pk);
            }
            self.accept_edge(e.src, e.dst, g_new, c_curr);
            return ForwardStep::FoundEdge { src: e.src, dst: e.dst };
        }
    }

    /// Rewires `dst` under `src`, propagates the improvement through the
    /// subtree, and expands every improved vertex into the queue.
    fn accept_edge(&mut self, src: SampleId, dst: SampleId, g_new: f64, c_curr: f64) {
        if let Some(old_parent) = self.nodes[dst].forward_parent {
            let pos = self.nodes[old_parent]
                .forward_children
                .iter()
                .position(|&c| c == dst);
            if let Some(pos) = pos {
                self.nodes[old_parent].forward_children.remove(pos);
            }
        }
        self.nodes[dst].forward_parent = Some(src);
        self.nodes[dst].g_f = g_new;
        self.nodes[src].forward_children.push(dst);

        let mut improved = vec![dst];
        let mut stack = vec![dst];
        while let Some(v) = stack.pop() {
            self.bump_ops(1);
            for k in 0..self.nodes[v].forward_children.len() {
                let child = self.nodes[v].forward_children[k];
                let g_child = self.nodes[v].g_f + self.dist(v, child);
                self.nodes[child].g_f = g_child;
                improved.push(child);
                stack.push(child);
            }
        }
        for v in improved {
            self.push_outgoing(v, c_curr);
        }
    }

    #[cfg(test)]
    pub(crate) fn test_force_edge(&mut self, src: SampleId, dst: SampleId) {
        let g_new = self.nodes[src].g_f + self.dist(src, dst);
        self.accept_edge(src, dst, g_new, f64::INFINITY);
    }

    fn deactivate(&mut self, id: SampleId) {
        if self.nodes[id].active {
            self.nodes[id].active = false;
            self.active_count -= 1;
        }
        self.nodes[id].g_f = f64::INFINITY;
        self.nodes[id].forward_parent = None;
        self.nodes[id].forward_children.clear();
        self.nodes[id].h_hat = f64::INFINITY;
        self.nodes[id].reverse_parent = None;
    }

    /// Re-walks the forward tree from the start and resets vertices whose
    /// parent chain was severed by pruning.
    fn repair_forward_tree(&mut self) {
        let n = self.nodes.len();
        let mut visited = vec![false; n];
        visited[self.start] = true;
        let mut stack = vec![self.start];
        while let Some(v) = stack.pop() {
            let children = std::mem::take(&mut self.nodes[v].forward_children);
            let mut kept = Vec::with_capacity(children.len());
            for child in children {
                if self.nodes[child].active && self.nodes[child].forward_parent == Some(v) {
                    visited[child] = true;
                    kept.push(child);
                    stack.push(child);
                }
            }
            self.nodes[v].forward_children = kept;
        }
        for id in 0..n {
            if self.nodes[id].active && !visited[id] && id != self.start {
                self.nodes[id].g_f = f64::INFINITY;
                self.nodes[id].forward_parent = None;
                self.nodes[id].forward_children.clear();
            }
        }
    }
}

/// Reverse search with the problem's sparse motion check at the config's
/// current resolution.
pub fn lazy_reverse_search(graph: &mut SearchGraph, problem: &ProblemDef, cfg: &SparseCheckConfig) {
    graph.reverse_search(&mut |a, b| check_motion_sparse(problem, a, b, cfg));
}

/// Forward step with the problem's full-resolution motion check.
pub fn forward_search_step(
    graph: &mut SearchGraph,
    problem: &ProblemDef,
    c_curr: f64,
    full_resolution: f64,
) -> ForwardStep {
    graph.forward_step(c_curr, &mut |a, b| {
        check_motion_full(problem, a, b, full_resolution)
    })
}

/// Removes samples that cannot contribute to a better solution.
///
/// With a finite solution cost, a sample survives only if its Euclidean
/// lower bound `dist(start, x) + min_goal dist(x, goal)` stays strictly
/// below `c_curr`; the start, the goals, and the incumbent best path are
/// never removed, and subtrees severed by a removal are reset to plain
/// samples. Before a solution exists but with a finite estimated diameter,
/// unconnected samples outside the estimated-informed union are removed;
/// forward-tree vertices embody full-check work and are kept.
pub fn prune(graph: &mut SearchGraph, problem: &ProblemDef, c_curr: f64, eis: &EisState) {
    graph.bump_ops(graph.nodes.len() as u64);
    if c_curr.is_finite() {
        let n = graph.nodes.len();
        let mut protected = vec![false; n];
        protected[graph.start] = true;
        for &g in &graph.goals {
            protected[g] = true;
        }
        if let Some((best, _)) = graph.best_goal() {
            let mut cursor = Some(best);
            while let Some(id) = cursor {
                protected[id] = true;
                cursor = graph.nodes[id].forward_parent;
            }
        }
        let start_state = graph.nodes[graph.start].state.clone();
        for id in 0..n {
            if !graph.nodes[id].active || protected[id] {
                continue;
            }
            let x = &graph.nodes[id].state;
            let g_hat = start_state.distance(x);
            let h_hat_euclid = problem
                .goals
                .iter()
                .map(|g| g.distance(x))
                .fold(f64::INFINITY, f64::min);
            if g_hat + h_hat_euclid >= c_curr {
                graph.deactivate(id);
            }
        }
        graph.repair_forward_tree();
    } else if eis.s_est.is_finite() {
        let mut union: Vec<ProlateHyperspheroid> = Vec::new();
        for goal in &problem.goals {
            if let Ok(phs) = build_phs(&problem.start, goal, eis.s_est) {
                union.push(phs);
            }
        }
        if union.is_empty() {
            return;
        }
        for id in 0..graph.nodes.len() {
            let node = &graph.nodes[id];
            if !node.active || node.is_start || node.is_goal || node.g_f.is_finite() {
                continue;
            }
            let inside = union
                .iter()
                .any(|phs| phs.focal_distance_sum(&node.state) < phs.s_diam);
            if !inside {
                graph.deactivate(id);
            }
        }
    }
}

/// Debug snapshot of the whole search state as JSON. Infinite costs and
/// unset fields are encoded as null; arrays are ordered by sample id.
pub fn snapshot_json(graph: &SearchGraph, eis: &EisState, c_curr: f64) -> serde_json::Value {
    fn num(v: f64) -> serde_json::Value {
        if v.is_finite() {
            json!(v)
        } else {
            serde_json::Value::Null
        }
    }
    let samples: Vec<serde_json::Value> = graph
        .nodes
        .iter()
        .enumerate()
        .map(|(id, node)| {
            json!({
                "id": id,
                "coords": node.state.coords(),
                "active": node.active,
                "is_start": node.is_start,
                "is_goal": node.is_goal,
                "g_f": num(node.g_f),
                "h_hat": num(node.h_hat),
                "forward_parent": node.forward_parent,
                "reverse_parent": node.reverse_parent,
            })
        })
        .collect();
    let forward_edges: Vec<[SampleId; 2]> = graph
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.active)
        .filter_map(|(id, n)| n.forward_parent.map(|p| [p, id]))
        .collect();
    let reverse_edges: Vec<[SampleId; 2]> = graph
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.active)
        .filter_map(|(id, n)| n.reverse_parent.map(|p| [p, id]))
        .collect();
    json!({
        "q": graph.q(),
        "c_curr": num(c_curr),
        "eis": {
            "s_adms": num(eis.s_adms),
            "gamma": eis.gamma,
            "e_gamma": eis.e_gamma,
            "s_est": num(eis.s_est),
        },
        "samples": samples,
        "forward_edges": forward_edges,
        "reverse_edges": reverse_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sv(coords: &[f64]) -> StateVec {
        StateVec(coords.to_vec())
    }

    fn empty_problem_2d(start: &[f64], goal: &[f64]) -> ProblemDef {
        ProblemDef::new(
            vec![[0.0, 1.0], [0.0, 1.0]],
            sv(start),
            vec![sv(goal)],
            1e-4,
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn rewire_radius_worked_value_and_scaling() {
        let cfg = RggConfig::default();
        let r = rewire_radius(&cfg, 1.0, 100, 2).unwrap();
        assert!((r - 0.20991458305884117).abs() < 1e-12);
        assert!((r - 0.20991).abs() < 1e-5);

        // Doubling the measure scales the 2D radius by sqrt(2).
        let r2 = rewire_radius(&cfg, 2.0, 100, 2).unwrap();
        assert!((r2 / r - 2f64.sqrt()).abs() < 1e-12);

        // Monotone decrease beyond q = e.
        let mut last = rewire_radius(&cfg, 1.0, 3, 2).unwrap();
        for q in 4..200 {
            let next = rewire_radius(&cfg, 1.0, q, 2).unwrap();
            assert!(next < last);
            last = next;
        }

        assert!(matches!(
            rewire_radius(&cfg, 1.0, 1, 2),
            Err(SearchError::TooFewSamples(1))
        ));
    }

    #[test]
    fn update_eis_boundary_cases_and_worked_triple() {
        // gamma = 0: the failed edge leaves the start itself.
        let mut eis = EisState::unset();
        update_eis(&mut eis, 0.0, 0.4, 0.6);
        assert_eq!(eis.gamma, Some(0.0));
        assert_eq!(eis.e_gamma, Some(2f64.sqrt()));
        assert!((eis.s_est - 2f64.sqrt()).abs() < 1e-15);

        // gamma = 1 limit: everything known, no inflation.
        let mut eis = EisState::unset();
        update_eis(&mut eis, 1.0, 0.0, 0.0);
        assert_eq!(eis.gamma, Some(1.0));
        assert_eq!(eis.e_gamma, Some(1.0));
        assert_eq!(eis.s_est, eis.s_adms);

        let mut eis = EisState::unset();
        update_eis(&mut eis, 0.3, 0.2, 0.5);
        assert!((eis.s_adms - 1.0).abs() < 1e-15);
        assert!((eis.gamma.unwrap() - 0.3).abs() < 1e-15);
        assert!((eis.e_gamma.unwrap() - 1.2206555615733703).abs() < 1e-12);
        assert!((eis.s_est - 1.22066).abs() < 1e-5);
    }

    #[test]
    fn update_eis_expands_with_first_e_gamma_and_skips_inadmissible() {
        let mut eis = EisState::unset();
        update_eis(&mut eis, 0.3, 0.2, 0.5);
        let e = eis.e_gamma.unwrap();
        let s1 = eis.s_est;
        // Later failures reuse the first factor even with other g shares.
        update_eis(&mut eis, 0.9, 0.05, 0.05);
        assert!((eis.s_est - s1 * e).abs() < 1e-15);
        assert_eq!(eis.e_gamma, Some(e));

        let mut unset = EisState::unset();
        update_eis(&mut unset, f64::INFINITY, 0.2, 0.5);
        assert!(!unset.is_set());
        update_eis(&mut unset, 0.2, 0.2, f64::INFINITY);
        assert!(!unset.is_set());
    }

    #[test]
    fn s_est_never_decreases_within_a_phase() {
        let mut eis = EisState::unset();
        update_eis(&mut eis, 0.5, 0.3, 0.4);
        let mut last = eis.s_est;
        for _ in 0..20 {
            update_eis(&mut eis, 0.1, 0.1, 0.1);
            assert!(eis.s_est >= last);
            last = eis.s_est;
        }
    }

    #[test]
    fn reverse_search_empty_space_tracks_euclidean_oracle() {
        let problem = empty_problem_2d(&[0.1, 0.1], &[0.9, 0.9]);
        let mut graph = SearchGraph::new(&problem);
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let mut batch = Vec::new();
        for _ in 0..500 {
            batch.push(sv(&[rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]));
        }
        graph.add_samples(batch);
        let cfg = RggConfig::default();
        let radius = cfg.rewire_factor * rewire_radius(&cfg, 1.0, graph.q(), 2).unwrap();
        graph.rebuild_adjacency(radius);
        graph.reverse_search(&mut |_, _| true);

        assert_eq!(graph.h_hat(graph.goal_ids()[0]), 0.0);
        let goal_state = sv(&[0.9, 0.9]);
        let mut reached = 0;
        let mut ratio_sum = 0.0;
        for id in 0..graph.len() {
            let h = graph.h_hat(id);
            if !h.is_finite() {
                continue;
            }
            let euclid = graph.state(id).distance(&goal_state);
            if euclid == 0.0 {
                continue;
            }
            assert!(h >= euclid - 1e-9, "h_hat below the metric lower bound");
            reached += 1;
            ratio_sum += h / euclid;
        }
        assert!(reached > 450, "graph should be well connected");
        let mean_ratio = ratio_sum / reached as f64;
        assert!(mean_ratio < 1.05, "mean detour ratio {mean_ratio}");
    }

    #[test]
    fn reverse_search_leaves_disconnected_states_infinite() {
        let problem = empty_problem_2d(&[0.1, 0.1], &[0.9, 0.9]);
        let mut graph = SearchGraph::new(&problem);
        let far = graph.insert_sample(sv(&[0.1, 0.9])).unwrap();
        // Radius below every pairwise distance: nothing connects.
        graph.rebuild_adjacency(0.05);
        graph.reverse_search(&mut |_, _| true);
        assert!(!graph.h_hat(far).is_finite());
        assert!(!graph.h_hat(graph.start_id()).is_finite());
    }

    #[test]
    fn blacklisted_edge_forces_reverse_detour() {
        let problem = empty_problem_2d(&[0.0, 0.0], &[1.0, 0.0]);
        let mut graph = SearchGraph::new(&problem);
        let mid = graph.insert_sample(sv(&[0.5, 0.1])).unwrap();
        graph.rebuild_adjacency(2.0);
        graph.reverse_search(&mut |_, _| true);
        let direct = graph.h_hat(graph.start_id());
        assert!((direct - 1.0).abs() < 1e-12);

        graph.blacklist_edge(graph.start_id(), graph.goal_ids()[0]);
        graph.reverse_search(&mut |_, _| true);
        let detour = graph.h_hat(graph.start_id());
        let expected = sv(&[0.0, 0.0]).distance(&sv(&[0.5, 0.1])) * 2.0;
        assert!((detour - expected).abs() < 1e-12);
        assert!(detour > direct);
        assert_eq!(graph.reverse_parent(graph.start_id()), Some(mid));
    }

    #[test]
    fn forward_step_extends_then_exhausts() {
        let problem = empty_problem_2d(&[0.0, 0.0], &[1.0, 1.0]);
        let mut graph = SearchGraph::new(&problem);
        graph.rebuild_adjacency(2.0);
        graph.reverse_search(&mut |_, _| true);
        graph.rebuild_forward_queue(f64::INFINITY);

        assert!(graph.could_improve(f64::INFINITY));
        let step = graph.forward_step(f64::INFINITY, &mut |_, _| true);
        let goal = graph.goal_ids()[0];
        assert_eq!(
            step,
            ForwardStep::FoundEdge { src: graph.start_id(), dst: goal }
        );
        assert!((graph.g_f(goal) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(graph.forward_parent(goal), Some(graph.start_id()));

        assert!(!graph.could_improve(graph.g_f(goal)));
        assert_eq!(
            graph.forward_step(graph.g_f(goal), &mut |_, _| true),
            ForwardStep::Exhausted
        );
    }

    #[test]
    fn forward_collision_blacklists_and_reverse_repair_reroutes() {
        let problem = empty_problem_2d(&[0.0, 0.0], &[1.0, 0.0]);
        let mut graph = SearchGraph::new(&problem);
        let mid = graph.insert_sample(sv(&[0.5, 0.2])).unwrap();
        graph.rebuild_adjacency(2.0);
        graph.reverse_search(&mut |_, _| true);
        graph.rebuild_forward_queue(f64::INFINITY);

        // Treat only the direct start-goal motion as blocked.
        let start_state = sv(&[0.0, 0.0]);
        let goal_state = sv(&[1.0, 0.0]);
        let mut full = |a: &StateVec, b: &StateVec| {
            !((a == &start_state && b == &goal_state) || (a == &goal_state && b == &start_state))
        };
        let step = graph.forward_step(f64::INFINITY, &mut full);
        let goal = graph.goal_ids()[0];
        assert_eq!(
            step,
            ForwardStep::Collided { src: graph.start_id(), dst: goal }
        );
        assert!(graph.is_blacklisted(graph.start_id(), goal));

        graph.reverse_search(&mut |_, _| true);
        // The queue self-corrects; the next steps route through mid.
        let step = graph.forward_step(f64::INFINITY, &mut full);
        assert_eq!(
            step,
            ForwardStep::FoundEdge { src: graph.start_id(), dst: mid }
        );
        let step = graph.forward_step(f64::INFINITY, &mut full);
        assert_eq!(step, ForwardStep::FoundEdge { src: mid, dst: goal });
        let detour = sv(&[0.0, 0.0]).distance(&sv(&[0.5, 0.2])) * 2.0;
        assert!((graph.g_f(goal) - detour).abs() < 1e-12);
    }

    #[test]
    fn rewiring_propagates_costs_through_subtrees() {
        let problem = empty_problem_2d(&[0.0, 0.0], &[1.0, 0.0]);
        let mut graph = SearchGraph::new(&problem);
        let a = graph.insert_sample(sv(&[0.0, 0.5])).unwrap();
        let b = graph.insert_sample(sv(&[0.5, 0.5])).unwrap();
        graph.rebuild_adjacency(2.0);
        // Hand-build a deliberately bad chain: start -> a -> b.
        graph.test_force_edge(graph.start_id(), a);
        graph.test_force_edge(a, b);
        let bad = graph.g_f(b);
        assert!((bad - 1.0).abs() < 1e-12);

        // A better edge into b shifts b and would shift its subtree.
        graph.reverse_search(&mut |_, _| true);
        graph.test_force_edge(graph.start_id(), b);
        let good = graph.g_f(b);
        assert!((good - sv(&[0.0, 0.0]).distance(&sv(&[0.5, 0.5]))).abs() < 1e-12);
        assert!(good < bad);
        assert_eq!(graph.forward_parent(b), Some(graph.start_id()));
        // a keeps its chain; g_F stays consistent along parents.
        assert_eq!(graph.forward_parent(a), Some(graph.start_id()));
    }

    #[test]
    fn duplicate_samples_are_dropped() {
        let problem = empty_problem_2d(&[0.0, 0.0], &[1.0, 1.0]);
        let mut graph = SearchGraph::new(&problem);
        assert!(graph.insert_sample(sv(&[0.25, 0.75])).is_some());
        assert!(graph.insert_sample(sv(&[0.25, 0.75])).is_none());
        assert!(graph.insert_sample(sv(&[0.0, 0.0])).is_none(), "start exists");
        assert_eq!(graph.q(), 3);
    }

    #[test]
    fn prune_with_finite_cost_removes_strictly_unhelpful_samples() {
        let problem = empty_problem_2d(&[0.0, 0.0], &[1.0, 0.0]);
        let mut graph = SearchGraph::new(&problem);
        let keep = graph.insert_sample(sv(&[0.5, 0.1])).unwrap();
        let drop = graph.insert_sample(sv(&[0.5, 0.9])).unwrap();
        let colinear = graph.insert_sample(sv(&[0.2, 0.0])).unwrap();
        prune(&mut graph, &problem, 1.4, &EisState::unset());
        assert!(graph.is_active(keep));
        assert!(!graph.is_active(drop));
        // f_hat equals 1.0 < 1.4 for on-segment samples.
        assert!(graph.is_active(colinear));
        assert!(graph.is_active(graph.start_id()));
        assert!(graph.is_active(graph.goal_ids()[0]));
        assert_eq!(graph.q(), 4);

        // c_curr = 1.0 removes even the colinear sample (strict boundary).
        prune(&mut graph, &problem, 1.0, &EisState::unset());
        assert!(!graph.is_active(colinear));
    }

    #[test]
    fn prune_detaches_severed_subtrees_but_keeps_best_path() {
        let problem = empty_problem_2d(&[0.0, 0.0], &[1.0, 0.0]);
        let mut graph = SearchGraph::new(&problem);
        let detour = graph.insert_sample(sv(&[0.5, 0.8])).unwrap();
        let child = graph.insert_sample(sv(&[0.6, 0.1])).unwrap();
        graph.rebuild_adjacency(2.0);
        graph.test_force_edge(graph.start_id(), detour);
        graph.test_force_edge(detour, child);
        graph.test_force_edge(graph.start_id(), graph.goal_ids()[0]);

        // Incumbent cost 1.0 via the direct edge; detour's bound exceeds it.
        prune(&mut graph, &problem, 1.05, &EisState::unset());
        assert!(!graph.is_active(detour));
        // child survives membership but is detached from the tree.
        assert!(graph.is_active(child));
        assert!(!graph.g_f(child).is_finite());
        assert_eq!(graph.forward_parent(child), None);
        // Best path start -> goal intact.
        assert!((graph.g_f(graph.goal_ids()[0]) - 1.0).abs() < 1e-12);
        assert_eq!(
            graph.extract_path_states(graph.goal_ids()[0]).unwrap().len(),
            2
        );
    }

    #[test]
    fn prune_no_op_without_cost_or_estimate() {
        let problem = empty_problem_2d(&[0.0, 0.0], &[1.0, 0.0]);
        let mut graph = SearchGraph::new(&problem);
        graph.insert_sample(sv(&[0.9, 0.9])).unwrap();
        let before = graph.q();
        prune(&mut graph, &problem, f64::INFINITY, &EisState::unset());
        assert_eq!(graph.q(), before);
    }

    #[test]
    fn eis_prune_scopes_to_unconnected_samples() {
        let problem = empty_problem_2d(&[0.0, 0.0], &[1.0, 0.0]);
        let mut graph = SearchGraph::new(&problem);
        let inside = graph.insert_sample(sv(&[0.5, 0.05])).unwrap();
        let outside = graph.insert_sample(sv(&[0.5, 0.9])).unwrap();
        let tree_outside = graph.insert_sample(sv(&[0.0, 0.6])).unwrap();
        graph.rebuild_adjacency(2.0);
        graph.test_force_edge(graph.start_id(), tree_outside);

        let mut eis = EisState::unset();
        update_eis(&mut eis, 0.0, 0.5, 0.6);
        assert!((eis.s_est - 1.1 * 2f64.sqrt()).abs() < 1e-12);
        prune(&mut graph, &problem, f64::INFINITY, &eis);
        assert!(graph.is_active(inside));
        assert!(!graph.is_active(outside));
        // Tree vertices carry validated work and stay.
        assert!(graph.is_active(tree_outside));
    }

    #[test]
    fn snapshot_round_trips_through_json() {
        let problem = empty_problem_2d(&[0.0, 0.0], &[1.0, 0.0]);
        let mut graph = SearchGraph::new(&problem);
        graph.insert_sample(sv(&[0.5, 0.1])).unwrap();
        graph.rebuild_adjacency(2.0);
        graph.reverse_search(&mut |_, _| true);
        graph.rebuild_forward_queue(f64::INFINITY);
        let _ = graph.forward_step(f64::INFINITY, &mut |_, _| true);

        let mut eis = EisState::unset();
        update_eis(&mut eis, 0.3, 0.2, 0.5);
        let snap = snapshot_json(&graph, &eis, f64::INFINITY);
        let text = serde_json::to_string(&snap).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["q"], 3);
        assert!(parsed["c_curr"].is_null());
        assert_eq!(parsed["samples"].as_array().unwrap().len(), 3);
        assert!(parsed["eis"]["s_est"].is_number());
        assert!(!parsed["forward_edges"].as_array().unwrap().is_empty());
        assert!(!parsed["reverse_edges"].as_array().unwrap().is_empty());
        // Start's reverse heuristic is recorded and finite.
        assert!(parsed["samples"][0]["h_hat"].is_number());
    }

    #[test]
    fn could_improve_respects_strict_threshold() {
        let problem = empty_problem_2d(&[0.0, 0.0], &[1.0, 0.0]);
        let mut graph = SearchGraph::new(&problem);
        graph.rebuild_adjacency(2.0);
        graph.reverse_search(&mut |_, _| true);
        graph.rebuild_forward_queue(f64::INFINITY);
        // Single edge with key exactly 1.0.
        assert!(graph.could_improve(f64::INFINITY));
        assert!(graph.could_improve(1.5));
        assert!(!graph.could_improve(1.0));
        assert!(!graph.could_improve(0.5));

        let mut none = SearchGraph::new(&problem);
        none.rebuild_adjacency(2.0);
        // No reverse search ran: h_hat infinite, queue stays empty.
        none.rebuild_forward_queue(f64::INFINITY);
        assert!(!none.could_improve(f64::INFINITY));
    }

    #[test]
    fn adjacency_rebuilds_match_the_quadratic_oracle() {
        let problem = empty_problem_2d(&[0.05, 0.05], &[0.95, 0.95]);
        let mut graph = SearchGraph::new(&problem);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let batch: Vec<StateVec> = (0..900)
            .map(|_| sv(&[rng.gen::<f64>(), rng.gen::<f64>()]))
            .collect();
        graph.add_samples(batch);

        let sweep = |graph: &SearchGraph, radius: f64| {
            for i in 0..graph.len() {
                let mut expected = Vec::new();
                if graph.is_active(i) {
                    for j in 0..graph.len() {
                        if j == i || !graph.is_active(j) || graph.is_blacklisted(i, j) {
                            continue;
                        }
                        let d = graph.state(i).distance(graph.state(j));
                        if d > 0.0 && d <= radius {
                            expected.push((j, d));
                        }
                    }
                }
                assert_eq!(graph.adjacency[i], expected, "radius {radius}, node {i}");
            }
        };
        // Descending radii run one full rebuild, then the incremental
        // filter; 0.5 leaves under two cells per axis, exercising the
        // single-bucket fallback, the smaller radii exercise real grids.
        for radius in [0.5, 0.15, 0.06, 0.02] {
            graph.rebuild_adjacency(radius);
            sweep(&graph, radius);
        }
        // Growing radii must fall back to full rebuilds.
        for radius in [0.06, 0.5] {
            graph.rebuild_adjacency(radius);
            sweep(&graph, radius);
        }

        // Tombstones from pruning must stay out of every list, on both the
        // incremental and the full path.
        prune(&mut graph, &problem, 1.4, &EisState::unset());
        assert!(graph.q() < 902);
        graph.rebuild_adjacency(0.02);
        sweep(&graph, 0.02);
        graph.rebuild_adjacency(0.15);
        sweep(&graph, 0.15);

        // New samples join incrementally: only they and their neighbors may
        // gain entries, and repeating a radius is idempotent.
        let more: Vec<StateVec> = (0..300)
            .map(|_| sv(&[rng.gen::<f64>(), rng.gen::<f64>()]))
            .collect();
        graph.add_samples(more);
        graph.rebuild_adjacency(0.15);
        sweep(&graph, 0.15);
        graph.rebuild_adjacency(0.15);
        sweep(&graph, 0.15);
        graph.rebuild_adjacency(0.04);
        sweep(&graph, 0.04);

        // Blacklisting strips the pair immediately and keeps it out of
        // both rebuild paths.
        let (a, &(b, _)) = (0..graph.len())
            .filter_map(|i| graph.adjacency[i].first().map(|e| (i, e)))
            .next()
            .expect("some edge survives at 0.04");
        graph.blacklist_edge(a, b);
        sweep(&graph, 0.04);
        graph.rebuild_adjacency(0.03);
        sweep(&graph, 0.03);
        graph.rebuild_adjacency(0.3);
        sweep(&graph, 0.3);
    }
}
