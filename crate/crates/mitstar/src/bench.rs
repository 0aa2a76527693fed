//! Benchmark harness: seeded multi-run campaigns over the scenario
//! families, nonparametric statistics, and CSV/JSON/SVG outputs.
//!
//! Campaigns are deterministic: run and instance seeds derive from the
//! base seed by a tagged splitmix64 split, workers claim whole runs from a
//! shared counter, and records merge in (planner, run index) order, so the
//! emitted CSV is byte-identical regardless of scheduling or worker count.

use crate::planner::{solve, ClockMode, PlannerConfig, PlannerVariant, SolutionEvent};
use crate::space::{make_scenario, ProblemDef, ScenarioFamily, SpaceError};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid campaign: {0}")]
    InvalidCampaign(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv parse error at line {line}: {msg}")]
    CsvParse { line: usize, msg: String },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Planner(#[from] crate::planner::PlannerError),
}

/// Tag for per-run planner seeds.
pub const TAG_RUN: u64 = 1;
/// Tag for per-run scenario instance seeds.
pub const TAG_INSTANCE: u64 = 2;

/// Derives an independent seed stream from `base`: the tag and index are
/// mixed in and the result passed through the splitmix64 finalizer. Run
/// `i` of every planner in a campaign shares `derive_seed(base, TAG_RUN,
/// i)`, so planner comparisons are seed-paired.
pub fn derive_seed(base: u64, tag: u64, index: u64) -> u64 {
    let mut z = base
        ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Where a campaign's problems come from.
#[derive(Clone, Debug)]
pub enum ScenarioSource {
    /// A built-in family, instantiated per run with a derived seed.
    Family(ScenarioFamily),
    /// A fixed user-supplied problem.
    Custom(ProblemDef),
}

/// Full description of one campaign.
#[derive(Clone, Debug)]
pub struct CampaignSpec {
    /// Label recorded in the CSV `scenario` column; no commas.
    pub scenario_label: String,
    pub source: ScenarioSource,
    pub dim: usize,
    pub planners: Vec<PlannerVariant>,
    pub runs: usize,
    /// Per-run budget in seconds under `clock_mode`.
    pub max_time: f64,
    pub base_seed: u64,
    pub workers: usize,
    pub clock_mode: ClockMode,
}

impl CampaignSpec {
    fn validate(&self) -> Result<(), BenchError> {
        if self.scenario_label.is_empty() || self.scenario_label.contains(',') {
            return Err(BenchError::InvalidCampaign(
                "scenario label must be nonempty and comma-free".into(),
            ));
        }
        if self.planners.is_empty() {
            return Err(BenchError::InvalidCampaign("no planners selected".into()));
        }
        if self.runs == 0 {
            return Err(BenchError::InvalidCampaign("runs must be positive".into()));
        }
        if !(self.max_time > 0.0) || !self.max_time.is_finite() {
            return Err(BenchError::InvalidCampaign(
                "max_time must be positive and finite".into(),
            ));
        }
        if self.workers == 0 {
            return Err(BenchError::InvalidCampaign("workers must be positive".into()));
        }
        if let ScenarioSource::Custom(problem) = &self.source {
            if problem.dim != self.dim {
                return Err(BenchError::InvalidCampaign(format!(
                    "custom scenario has dim {}, campaign says {}",
                    problem.dim, self.dim
                )));
            }
        }
        Ok(())
    }
}

/// One benchmark run's outcome. The scalar fields mirror the CSV columns;
/// `events` keeps the full solution history (with paths) for plotting and
/// re-validation and is not serialized to CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub scenario: String,
    pub dim: usize,
    pub instance_seed: u64,
    pub planner: String,
    pub run_seed: u64,
    pub success: bool,
    pub t_init: f64,
    pub c_init: f64,
    pub t_final: f64,
    pub c_final: f64,
    pub n_samples: u64,
    pub n_full_checks: u64,
    pub n_sparse_checks: u64,
    pub events: Vec<SolutionEvent>,
}

/// Worker count resolution: the `BENCH_WORKERS` environment variable wins,
/// then the explicit request, then available parallelism.
pub fn resolve_workers(requested: Option<usize>) -> usize {
    if let Ok(raw) = std::env::var("BENCH_WORKERS") {
        if let Ok(n) = raw.trim().parse::<usize>() {
            if n >= 1 {
                return n;
            }
        }
    }
    if let Some(n) = requested {
        if n >= 1 {
            return n;
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Builds every problem instance up front so configuration errors surface
/// before any run starts. Instance `i` uses `derive_seed(base,
/// TAG_INSTANCE, i)`; deterministic families ignore it.
fn build_problems(spec: &CampaignSpec) -> Result<Vec<ProblemDef>, BenchError> {
    let mut problems = Vec::with_capacity(spec.runs);
    for i in 0..spec.runs {
        let instance_seed = derive_seed(spec.base_seed, TAG_INSTANCE, i as u64);
        let problem = match &spec.source {
            ScenarioSource::Family(family) => make_scenario(*family, spec.dim, instance_seed)?,
            ScenarioSource::Custom(problem) => problem.clone(),
        };
        problems.push(problem);
    }
    Ok(problems)
}

fn execute_run(
    spec: &CampaignSpec,
    problem: &ProblemDef,
    planner: PlannerVariant,
    run_index: usize,
) -> Result<RunRecord, BenchError> {
    let run_seed = derive_seed(spec.base_seed, TAG_RUN, run_index as u64);
    let instance_seed = derive_seed(spec.base_seed, TAG_INSTANCE, run_index as u64);
    let mut cfg = PlannerConfig::for_variant(planner, spec.max_time, run_seed);
    cfg.clock_mode = spec.clock_mode;
    let out = solve(problem, &cfg)?;
    let (t_init, c_init) = match out.initial() {
        Some(e) => (e.time, e.cost),
        None => (f64::INFINITY, f64::INFINITY),
    };
    let t_final = out.best().map(|e| e.time).unwrap_or(f64::INFINITY);
    Ok(RunRecord {
        scenario: spec.scenario_label.clone(),
        dim: spec.dim,
        instance_seed,
        planner: planner.as_str().to_string(),
        run_seed,
        success: out.final_cost.is_finite(),
        t_init,
        c_init,
        t_final,
        c_final: out.final_cost,
        n_samples: out.stats.n_samples,
        n_full_checks: out.stats.n_full_checks,
        n_sparse_checks: out.stats.n_sparse_checks,
        events: out.events,
    })
}

/// Runs the whole campaign, parallel across runs, and returns records in
/// (planner, run index) order.
pub fn run_campaign(spec: &CampaignSpec) -> Result<Vec<RunRecord>, BenchError> {
    spec.validate()?;
    let problems = build_problems(spec)?;
    let n_jobs = spec.planners.len() * spec.runs;
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; n_jobs]);
    let failure: Mutex<Option<BenchError>> = Mutex::new(None);

    let workers = spec.workers.min(n_jobs).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let job = next.fetch_add(1, Ordering::Relaxed);
                if job >= n_jobs {
                    break;
                }
                let planner_idx = job / spec.runs;
                let run_idx = job % spec.runs;
                match execute_run(spec, &problems[run_idx], spec.planners[planner_idx], run_idx) {
                    Ok(record) => {
                        slots.lock().unwrap()[job] = Some(record);
                    }
                    Err(e) => {
                        let mut slot = failure.lock().unwrap();
                        if slot.is_none() {
                            *slot = Some(e);
                        }
                        break;
                    }
                }
            });
        }
    });

    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every job produced a record"))
        .collect())
}

// ---- statistics ----------------------------------------------------------

/// Median with its conservative 99% confidence bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MedianCi {
    pub median: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Per-group summary; groups are keyed by (scenario, dim, planner).
#[derive(Clone, Debug, PartialEq)]
pub struct GroupStats {
    pub scenario: String,
    pub dim: usize,
    pub planner: String,
    pub runs: usize,
    pub success_rate: f64,
    pub t_init: MedianCi,
    pub c_init: MedianCi,
    pub c_final: MedianCi,
    /// `(baseline - candidate) / baseline` on median `t_init`, in percent,
    /// against the `baseline-off` group of the same scenario; absent for
    /// the baseline itself or when no baseline ran.
    pub t_init_improvement_vs_baseline_pct: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchStats {
    pub groups: Vec<GroupStats>,
}

/// `P(X <= k)` for `X ~ Binomial(n, 1/2)`, by direct summation; accurate
/// for the campaign sizes this harness targets (n up to a few thousand).
fn binomial_half_cdf(n: usize, k: usize) -> f64 {
    let mut term = 0.5f64.powi(n as i32);
    let mut cdf = term;
    for i in 1..=k.min(n) {
        term *= (n - i + 1) as f64 / i as f64;
        cdf += term;
    }
    cdf.min(1.0)
}

/// Lower order-statistic rank (1-based) of the conservative two-sided 99%
/// CI for the median: the largest `l` with `P(X <= l - 1) <= 0.005`, or 1
/// when even the first order statistic is too likely.
pub fn ci99_lower_rank(n: usize) -> usize {
    let mut l = 1;
    for k in 1..=n {
        if binomial_half_cdf(n, k - 1) <= 0.005 {
            l = k;
        } else {
            break;
        }
    }
    l
}

/// Sample median; infinities participate in the ordering, so a group with
/// more than half failures reports an infinite median.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Median plus conservative 99% CI from order statistics.
pub fn median_ci99(values: &[f64]) -> MedianCi {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let med = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let l = ci99_lower_rank(n);
    let u = n + 1 - l;
    MedianCi {
        median: med,
        ci_lo: sorted[l - 1],
        ci_hi: sorted[u - 1],
    }
}

/// Improvement of `candidate` over `baseline` in percent:
/// `(baseline - candidate) / baseline * 100`. An infinite baseline beaten
/// by a finite candidate counts as 100%; two infinities tie at 0%.
pub fn improvement_pct(baseline: f64, candidate: f64) -> f64 {
    if baseline.is_finite() {
        (baseline - candidate) / baseline * 100.0
    } else if candidate.is_finite() {
        100.0
    } else {
        0.0
    }
}

fn planner_order_key(name: &str) -> (usize, String) {
    let rank = PlannerVariant::all()
        .iter()
        .position(|v| v.as_str() == name)
        .unwrap_or(usize::MAX);
    (rank, name.to_string())
}

/// Groups records by (scenario, dim, planner) and summarizes each group.
/// Permutation-invariant: grouping is order-free and values are sorted
/// before any statistic.
pub fn compute_stats(records: &[RunRecord]) -> BenchStats {
    let mut groups: BTreeMap<(String, usize, (usize, String)), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.scenario.clone(), r.dim, planner_order_key(&r.planner)))
            .or_default()
            .push(r);
    }
    // Baseline medians per scenario for the improvement column.
    let mut baseline_t_init: BTreeMap<(String, usize), f64> = BTreeMap::new();
    for ((scenario, dim, (_, planner)), rs) in &groups {
        if planner == PlannerVariant::BaselineOff.as_str() {
            let t: Vec<f64> = rs.iter().map(|r| r.t_init).collect();
            baseline_t_init.insert((scenario.clone(), *dim), median(&t));
        }
    }
    let mut out = Vec::new();
    for ((scenario, dim, (_, planner)), rs) in &groups {
        let t_init: Vec<f64> = rs.iter().map(|r| r.t_init).collect();
        let c_init: Vec<f64> = rs.iter().map(|r| r.c_init).collect();
        let c_final: Vec<f64> = rs.iter().map(|r| r.c_final).collect();
        let successes = rs.iter().filter(|r| r.success).count();
        let t_init_ci = median_ci99(&t_init);
        let improvement = if planner == PlannerVariant::BaselineOff.as_str() {
            None
        } else {
            baseline_t_init
                .get(&(scenario.clone(), *dim))
                .map(|&b| improvement_pct(b, t_init_ci.median))
        };
        out.push(GroupStats {
            scenario: scenario.clone(),
            dim: *dim,
            planner: planner.clone(),
            runs: rs.len(),
            success_rate: successes as f64 / rs.len() as f64,
            t_init: t_init_ci,
            c_init: median_ci99(&c_init),
            c_final: median_ci99(&c_final),
            t_init_improvement_vs_baseline_pct: improvement,
        });
    }
    BenchStats { groups: out }
}

// ---- CSV -----------------------------------------------------------------

pub const CSV_HEADER: &str = "scenario,dim,instance_seed,planner,run_seed,success,t_init,c_init,t_final,c_final,n_samples,n_full_checks,n_sparse_checks";

/// Shortest representation that parses back to the identical bits;
/// infinities render as "inf"/"-inf".
fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub fn records_to_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.dim,
            r.instance_seed,
            r.planner,
            r.run_seed,
            r.success,
            fmt_float(r.t_init),
            fmt_float(r.c_init),
            fmt_float(r.t_final),
            fmt_float(r.c_final),
            r.n_samples,
            r.n_full_checks,
            r.n_sparse_checks,
        );
    }
    out
}

/// Parses harness CSV back into records; `events` come back empty since
/// the CSV stores only the scalar projection.
pub fn records_from_csv(text: &str) -> Result<Vec<RunRecord>, BenchError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        Some((_, header)) => {
            return Err(BenchError::CsvParse {
                line: 1,
                msg: format!("unexpected header '{header}'"),
            })
        }
        None => {
            return Err(BenchError::CsvParse { line: 1, msg: "empty input".into() });
        }
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 13 {
            return Err(BenchError::CsvParse {
                line: lineno,
                msg: format!("expected 13 fields, got {}", fields.len()),
            });
        }
        let err = |msg: String| BenchError::CsvParse { line: lineno, msg };
        let parse_f = |s: &str| s.parse::<f64>().map_err(|e| err(format!("'{s}': {e}")));
        let parse_u = |s: &str| s.parse::<u64>().map_err(|e| err(format!("'{s}': {e}")));
        records.push(RunRecord {
            scenario: fields[0].to_string(),
            dim: fields[1].parse().map_err(|e| err(format!("'{}': {e}", fields[1])))?,
            instance_seed: parse_u(fields[2])?,
            planner: fields[3].to_string(),
            run_seed: parse_u(fields[4])?,
            success: match fields[5] {
                "true" => true,
                "false" => false,
                other => return Err(err(format!("bad bool '{other}'"))),
            },
            t_init: parse_f(fields[6])?,
            c_init: parse_f(fields[7])?,
            t_final: parse_f(fields[8])?,
            c_final: parse_f(fields[9])?,
            n_samples: parse_u(fields[10])?,
            n_full_checks: parse_u(fields[11])?,
            n_sparse_checks: parse_u(fields[12])?,
            events: Vec::new(),
        });
    }
    Ok(records)
}

// ---- JSON ----------------------------------------------------------------

/// JSON value for a possibly infinite float: a number when finite, the
/// strings "inf"/"-inf" otherwise (bare JSON has no infinities).
fn json_float(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else if v > 0.0 {
        serde_json::json!("inf")
    } else {
        serde_json::json!("-inf")
    }
}

fn json_median_ci(m: &MedianCi) -> serde_json::Value {
    serde_json::json!({
        "median": json_float(m.median),
        "ci_lo": json_float(m.ci_lo),
        "ci_hi": json_float(m.ci_hi),
    })
}

pub fn stats_to_json(stats: &BenchStats) -> serde_json::Value {
    let groups: Vec<serde_json::Value> = stats
        .groups
        .iter()
        .map(|g| {
            serde_json::json!({
                "scenario": g.scenario,
                "dim": g.dim,
                "planner": g.planner,
                "runs": g.runs,
                "success_rate": g.success_rate,
                "t_init": json_median_ci(&g.t_init),
                "c_init": json_median_ci(&g.c_init),
                "c_final": json_median_ci(&g.c_final),
                "t_init_improvement_vs_baseline_pct":
                    g.t_init_improvement_vs_baseline_pct.map(json_float),
            })
        })
        .collect();
    serde_json::json!({ "groups": groups })
}

// ---- SVG -----------------------------------------------------------------

const PALETTE: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
];

struct PlotFrame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    t_max: f64,
    c_min: f64,
    c_max: f64,
}

impl PlotFrame {
    fn map_x(&self, t: f64) -> f64 {
        self.x0 + (t / self.t_max).clamp(0.0, 1.0) * self.w
    }

    fn map_y(&self, c: f64) -> f64 {
        let frac = ((c - self.c_min) / (self.c_max - self.c_min)).clamp(0.0, 1.0);
        self.y0 + self.h - frac * self.h
    }
}

/// Cost of `record` at time `t` under step (anytime) semantics: the best
/// solution found no later than `t`, infinite before the first.
fn cost_at(record: &RunRecord, t: f64) -> f64 {
    let mut best = f64::INFINITY;
    for e in &record.events {
        if e.time <= t {
            best = e.cost;
        } else {
            break;
        }
    }
    best
}

/// One scenario panel: per-planner median cost-vs-time step traces with
/// 99% CI bands, plus a success-rate bar per planner.
fn svg_scenario_plot(scenario: &str, dim: usize, records: &[&RunRecord]) -> String {
    let mut planners: Vec<String> = Vec::new();
    for r in records {
        if !planners.contains(&r.planner) {
            planners.push(r.planner.clone());
        }
    }
    planners.sort_by_key(|p| planner_order_key(p));

    let mut t_max = 0.0f64;
    let mut c_lo = f64::INFINITY;
    let mut c_hi = f64::NEG_INFINITY;
    for r in records {
        for e in &r.events {
            t_max = t_max.max(e.time);
            c_lo = c_lo.min(e.cost);
            c_hi = c_hi.max(e.cost);
        }
    }
    if !c_lo.is_finite() {
        c_lo = 0.0;
        c_hi = 1.0;
    }
    if c_hi - c_lo < 1e-12 {
        c_lo -= 0.05 * c_lo.abs().max(1.0);
        c_hi += 0.05 * c_hi.abs().max(1.0);
    }
    if t_max <= 0.0 {
        t_max = 1.0;
    }
    let pad = 0.05 * (c_hi - c_lo);
    let frame = PlotFrame {
        x0: 70.0,
        y0: 40.0,
        w: 790.0,
        h: 380.0,
        t_max,
        c_min: c_lo - pad,
        c_max: c_hi + pad,
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="900" height="640" viewBox="0 0 900 640">"#
    );
    let _ = writeln!(svg, r#"<rect width="900" height="640" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="450" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{scenario}-r{dim}: median cost vs time (99% CI)</text>"#
    );
    // Axes.
    let _ = writeln!(
        svg,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        frame.x0, frame.y0, frame.w, frame.h
    );
    for i in 0..=5 {
        let t = frame.t_max * i as f64 / 5.0;
        let x = frame.map_x(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="#ccc"/><text x="{x}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{t:.3}</text>"##,
            frame.y0,
            frame.y0 + frame.h,
            frame.y0 + frame.h + 16.0
        );
        let c = frame.c_min + (frame.c_max - frame.c_min) * i as f64 / 5.0;
        let y = frame.map_y(c);
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#eee"/><text x="{}" y="{y}" text-anchor="end" font-family="sans-serif" font-size="11">{c:.3}</text>"##,
            frame.x0,
            frame.x0 + frame.w,
            frame.x0 - 6.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="450" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">time (s)</text>"#,
        frame.y0 + frame.h + 34.0
    );

    for (pi, planner) in planners.iter().enumerate() {
        let color = PALETTE[pi % PALETTE.len()];
        let runs: Vec<&&RunRecord> = records.iter().filter(|r| &r.planner == planner).collect();
        let mut grid: Vec<f64> = runs
            .iter()
            .flat_map(|r| r.events.iter().map(|e| e.time))
            .collect();
        grid.push(t_max);
        grid.sort_by(f64::total_cmp);
        grid.dedup_by(|a, b| a == b);

        // Per grid time: median and CI over the runs' current costs.
        let mut med_pts: Vec<(f64, f64)> = Vec::new();
        let mut band: Vec<(f64, f64, f64)> = Vec::new();
        for &t in &grid {
            let costs: Vec<f64> = runs.iter().map(|r| cost_at(r, t)).collect();
            let ci = median_ci99(&costs);
            if ci.median.is_finite() {
                med_pts.push((t, ci.median));
            }
            if ci.ci_hi.is_finite() {
                band.push((t, ci.ci_lo, ci.ci_hi));
            }
        }
        if !band.is_empty() {
            let mut d = String::new();
            for (i, (t, _, hi)) in band.iter().enumerate() {
                let cmd = if i == 0 { 'M' } else { 'L' };
                let _ = write!(d, "{cmd}{:.2},{:.2} ", frame.map_x(*t), frame.map_y(*hi));
                if i + 1 < band.len() {
                    let _ = write!(d, "L{:.2},{:.2} ", frame.map_x(band[i + 1].0), frame.map_y(*hi));
                }
            }
            for (i, (t, lo, _)) in band.iter().enumerate().rev() {
                let _ = write!(d, "L{:.2},{:.2} ", frame.map_x(*t), frame.map_y(*lo));
                if i > 0 {
                    let _ = write!(d, "L{:.2},{:.2} ", frame.map_x(*t), frame.map_y(band[i - 1].1));
                }
            }
            let _ = writeln!(svg, r#"<path d="{}Z" fill="{color}" opacity="0.15"/>"#, d.trim_end());
        }
        if !med_pts.is_empty() {
            let mut points = String::new();
            for (i, (t, c)) in med_pts.iter().enumerate() {
                let _ = write!(points, "{:.2},{:.2} ", frame.map_x(*t), frame.map_y(*c));
                if i + 1 < med_pts.len() {
                    // Step interpolation: hold the cost until the next event.
                    let _ = write!(points, "{:.2},{:.2} ", frame.map_x(med_pts[i + 1].0), frame.map_y(*c));
                }
            }
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
                points.trim_end()
            );
        }
        // Legend entry.
        let ly = 52.0 + 18.0 * pi as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="12" height="12" fill="{color}"/><text x="{}" y="{}" font-family="sans-serif" font-size="12">{planner}</text>"#,
            frame.x0 + frame.w - 150.0,
            ly,
            frame.x0 + frame.w - 132.0,
            ly + 10.0
        );
    }

    // Success-rate bars.
    let bar_y0 = 490.0;
    let _ = writeln!(
        svg,
        r#"<text x="70" y="{}" font-family="sans-serif" font-size="12">success rate</text>"#,
        bar_y0 - 8.0
    );
    for (pi, planner) in planners.iter().enumerate() {
        let color = PALETTE[pi % PALETTE.len()];
        let runs: Vec<&&RunRecord> = records.iter().filter(|r| &r.planner == planner).collect();
        let rate = runs.iter().filter(|r| r.success).count() as f64 / runs.len() as f64;
        let y = bar_y0 + 22.0 * pi as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="70" y="{y}" width="{:.2}" height="14" fill="{color}"/><text x="{}" y="{}" font-family="sans-serif" font-size="11">{planner} {:.0}%</text>"#,
            600.0 * rate,
            680.0,
            y + 11.0,
            rate * 100.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn write_file(path: &Path, contents: &str) -> Result<(), BenchError> {
    std::fs::write(path, contents).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `runs.csv`, `stats.json`, and one `plot-<scenario>-r<dim>.svg`
/// per scenario group; returns the written paths.
pub fn emit_outputs(
    records: &[RunRecord],
    stats: &BenchStats,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, BenchError> {
    std::fs::create_dir_all(out_dir).map_err(|source| BenchError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();

    let csv_path = out_dir.join("runs.csv");
    write_file(&csv_path, &records_to_csv(records))?;
    written.push(csv_path);

    let json_path = out_dir.join("stats.json");
    let json = serde_json::to_string_pretty(&stats_to_json(stats)).expect("stats serialize");
    write_file(&json_path, &format!("{json}\n"))?;
    written.push(json_path);

    let mut panels: BTreeMap<(String, usize), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        panels.entry((r.scenario.clone(), r.dim)).or_default().push(r);
    }
    for ((scenario, dim), group) in &panels {
        let path = out_dir.join(format!("plot-{scenario}-r{dim}.svg"));
        write_file(&path, &svg_scenario_plot(scenario, *dim, group))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn record(planner: &str, seed: u64, t_init: f64, c_final: f64) -> RunRecord {
        RunRecord {
            scenario: "fg".into(),
            dim: 2,
            instance_seed: seed,
            planner: planner.into(),
            run_seed: seed,
            success: c_final.is_finite(),
            t_init,
            c_init: if t_init.is_finite() { c_final + 0.1 } else { f64::INFINITY },
            t_final: t_init,
            c_final,
            n_samples: 10,
            n_full_checks: 100,
            n_sparse_checks: 50,
            events: Vec::new(),
        }
    }

    #[test]
    fn derive_seed_separates_streams() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..1000u64 {
            assert!(seen.insert(derive_seed(7, TAG_RUN, i)));
            assert!(seen.insert(derive_seed(7, TAG_INSTANCE, i)));
        }
        assert_eq!(derive_seed(7, TAG_RUN, 3), derive_seed(7, TAG_RUN, 3));
        assert_ne!(derive_seed(7, TAG_RUN, 3), derive_seed(8, TAG_RUN, 3));
    }

    #[test]
    fn median_handles_odd_even_and_infinite() {
        assert_eq!(median(&[1.0, 2.0, 3.0, 4.0, 5.0]), 3.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        // Half failures: the upper middle order statistic is infinite.
        assert_eq!(median(&[1.0, 1.0, f64::INFINITY, f64::INFINITY]), f64::INFINITY);
        assert_eq!(median(&[1.0, f64::INFINITY, 1.0]), 1.0);
    }

    #[test]
    fn ci_ranks_match_the_binomial_rule() {
        // Frozen: for n = 100, P(X <= 36) ~ 0.0033 <= 0.005 < P(X <= 37).
        assert_eq!(ci99_lower_rank(100), 37);
        // Tiny n falls back to the full range.
        assert_eq!(ci99_lower_rank(5), 1);
        let values: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let ci = median_ci99(&values);
        assert_eq!(ci.median, 50.5);
        assert_eq!(ci.ci_lo, 37.0);
        assert_eq!(ci.ci_hi, 64.0);
        assert!(ci.ci_lo <= ci.median && ci.median <= ci.ci_hi);
    }

    #[test]
    fn ci_covers_the_true_median_in_bootstrap_campaigns() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut covered = 0;
        let campaigns = 1000;
        for _ in 0..campaigns {
            let sample: Vec<f64> = (0..100).map(|_| rng.gen::<f64>()).collect();
            let ci = median_ci99(&sample);
            if ci.ci_lo <= 0.5 && 0.5 <= ci.ci_hi {
                covered += 1;
            }
        }
        // True coverage is ~0.993; 980/1000 leaves a >5 sigma margin.
        assert!(covered >= 980, "coverage {covered}/1000");
    }

    #[test]
    fn improvement_matches_the_reference_ratio() {
        let x = improvement_pct(0.0068, 0.0053);
        assert!((x - 22.06).abs() < 0.05, "got {x}");
        assert_eq!(improvement_pct(f64::INFINITY, 1.0), 100.0);
        assert_eq!(improvement_pct(f64::INFINITY, f64::INFINITY), 0.0);
        assert!(improvement_pct(1.0, 2.0) < 0.0);
    }

    #[test]
    fn stats_are_permutation_invariant_and_group_by_planner() {
        let mut records = Vec::new();
        for i in 0..20u64 {
            records.push(record("mitstar", i, 0.01 + i as f64 * 1e-3, 1.5));
            records.push(record("baseline-off", i, 0.02 + i as f64 * 1e-3, 1.6));
        }
        let a = compute_stats(&records);
        records.reverse();
        records.swap(0, 17);
        let b = compute_stats(&records);
        assert_eq!(a, b);
        assert_eq!(a.groups.len(), 2);
        // Known-planner ordering puts mitstar before baseline-off.
        assert_eq!(a.groups[0].planner, "mitstar");
        assert_eq!(a.groups[1].planner, "baseline-off");
        let imp = a.groups[0].t_init_improvement_vs_baseline_pct.unwrap();
        assert!(imp > 0.0, "mitstar should improve on baseline, got {imp}");
        assert!(a.groups[1].t_init_improvement_vs_baseline_pct.is_none());
        assert_eq!(a.groups[0].success_rate, 1.0);
    }

    #[test]
    fn stats_json_encodes_infinities_as_strings() {
        let records = vec![record("mitstar", 0, f64::INFINITY, f64::INFINITY)];
        let stats = compute_stats(&records);
        let json = stats_to_json(&stats);
        assert_eq!(json["groups"][0]["t_init"]["median"], "inf");
        assert_eq!(json["groups"][0]["success_rate"], 0.0);
        let text = serde_json::to_string(&json).unwrap();
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back, json);
    }

    #[test]
    fn csv_round_trips_scalar_fields_exactly() {
        let records = vec![
            record("mitstar", 1, 0.012345678901234567, 1.4142135623730951),
            record("rrt-connect", 2, f64::INFINITY, f64::INFINITY),
            record("baseline-off", 3, 1e-300, 2.0),
        ];
        let csv = records_to_csv(&records);
        assert!(csv.starts_with(CSV_HEADER));
        assert!(csv.contains(",inf,"));
        let parsed = records_from_csv(&csv).unwrap();
        assert_eq!(parsed, records);
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert!(records_from_csv("bad header\n1,2,3").is_err());
        let mut csv = String::from(CSV_HEADER);
        csv.push_str("\nfg,2,0,mitstar,0,true,0.1,1.0,0.1\n");
        assert!(matches!(
            records_from_csv(&csv),
            Err(BenchError::CsvParse { line: 2, .. })
        ));
    }

    #[test]
    fn empty_record_list_yields_header_only_csv_and_empty_stats() {
        let csv = records_to_csv(&[]);
        assert_eq!(csv, format!("{CSV_HEADER}\n"));
        assert_eq!(records_from_csv(&csv).unwrap(), Vec::new());
        assert!(compute_stats(&[]).groups.is_empty());
    }

    proptest::proptest! {
        #[test]
        fn csv_round_trip_property(
            t_init in proptest::prop_oneof![0.0f64..1e3, proptest::strategy::Just(f64::INFINITY)],
            c in proptest::prop_oneof![1e-6f64..1e3, proptest::strategy::Just(f64::INFINITY)],
            samples in 0u64..1_000_000,
            seed in proptest::num::u64::ANY,
        ) {
            let mut r = record("mitstar", seed, t_init, c);
            r.n_samples = samples;
            let parsed = records_from_csv(&records_to_csv(&[r.clone()])).unwrap();
            proptest::prop_assert_eq!(parsed, vec![r]);
        }
    }

    #[test]
    fn tiny_campaign_is_deterministic_across_worker_counts() {
        let mut spec = CampaignSpec {
            scenario_label: "fg".into(),
            source: ScenarioSource::Family(ScenarioFamily::Fg),
            dim: 2,
            planners: vec![PlannerVariant::MitStar, PlannerVariant::BaselineOff],
            runs: 3,
            max_time: 0.02,
            base_seed: 5,
            workers: 1,
            clock_mode: ClockMode::Virtual,
        };
        let a = run_campaign(&spec).unwrap();
        spec.workers = 4;
        let b = run_campaign(&spec).unwrap();
        assert_eq!(records_to_csv(&a), records_to_csv(&b));
        assert_eq!(a.len(), 6);
        // Paired seeds: run i shares its seed across planners.
        assert_eq!(a[0].run_seed, a[3].run_seed);
        assert_ne!(a[0].run_seed, a[1].run_seed);
        for r in &a {
            assert!(r.success == r.c_final.is_finite());
            assert!(r.t_init <= r.t_final);
        }
    }

    #[test]
    fn campaign_validation_rejects_bad_specs() {
        let spec = CampaignSpec {
            scenario_label: "fg".into(),
            source: ScenarioSource::Family(ScenarioFamily::Fg),
            dim: 2,
            planners: vec![],
            runs: 1,
            max_time: 0.1,
            base_seed: 0,
            workers: 1,
            clock_mode: ClockMode::Virtual,
        };
        assert!(matches!(run_campaign(&spec), Err(BenchError::InvalidCampaign(_))));
        let spec2 = CampaignSpec {
            planners: vec![PlannerVariant::MitStar],
            dim: 3,
            ..spec
        };
        // Unsupported dimension fails before any run starts.
        assert!(run_campaign(&spec2).is_err());
    }

    #[test]
    fn emit_outputs_writes_csv_json_and_svg() {
        let dir = tempfile::tempdir().unwrap();
        let mut records = Vec::new();
        for i in 0..5u64 {
            let mut r = record("dw", i, 0.01 * (i + 1) as f64, 1.5 - 0.01 * i as f64);
            r.events = vec![SolutionEvent {
                time: r.t_init,
                cost: r.c_init,
                kind: crate::planner::EventKind::Initial,
                path: crate::space::Path::from_waypoints(vec![
                    crate::space::StateVec(vec![0.0, 0.0]),
                    crate::space::StateVec(vec![1.0, 1.0]),
                ])
                .unwrap(),
            }];
            r.scenario = "dw".into();
            records.push(r);
        }
        let stats = compute_stats(&records);
        let written = emit_outputs(&records, &stats, dir.path()).unwrap();
        assert_eq!(written.len(), 3);
        let csv = std::fs::read_to_string(dir.path().join("runs.csv")).unwrap();
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 6);
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("stats.json")).unwrap())
                .unwrap();
        assert_eq!(json["groups"][0]["runs"], 5);
        let svg = std::fs::read_to_string(dir.path().join("plot-dw-r2.svg")).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
        assert!(svg.contains("success rate"));
    }

    #[test]
    fn workers_env_overrides_request() {
        // Serialized through a lock-free convention: this is the only test
        // touching BENCH_WORKERS.
        std::env::set_var("BENCH_WORKERS", "3");
        assert_eq!(resolve_workers(Some(8)), 3);
        std::env::set_var("BENCH_WORKERS", "not a number");
        assert_eq!(resolve_workers(Some(8)), 8);
        std::env::remove_var("BENCH_WORKERS");
        assert_eq!(resolve_workers(Some(8)), 8);
        assert!(resolve_workers(None) >= 1);
    }
}
