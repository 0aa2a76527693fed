//! Multi-Informed Trees (MIT*): an anytime, almost-surely asymptotically
//! optimal sampling-based motion planner.
//!
//! MIT* runs an asymmetric bidirectional search over batches of sampled
//! states. A lazy reverse search with sparse collision checks supplies
//! adaptive cost-to-go heuristics to a forward search that fully validates
//! edges. Before an initial solution exists, failed forward edges yield an
//! admissible prior cost that defines an *estimated informed set*, an
//! ellipsoidal region the sampler focuses on; after a solution is found the
//! classic informed set takes over. An obstacle-based adaptive sampler
//! (uniform draw, Gaussian retry, bridge bisection) densifies samples in
//! narrow passages.
//!
//! The crate is organized along the planning pipeline:
//!
//! - [`space`]: problem definitions, paths, and benchmark scenario
//!   generators (`fg`, `rr`, `dw`, `ge`).
//! - [`phs`]: prolate hyperspheroid geometry shared by informed and
//!   estimated-informed sampling.
//! - [`sampling`]: uniform, ellipsoidal, and adaptive samplers.
//! - [`collision`]: point validity, full-resolution motion checks, and
//!   length-related adaptive sparse checks.
//! - [`search`]: the search graph, lazy reverse search, forward edge queue,
//!   estimated-informed-set bookkeeping, and pruning.
//! - [`planner`]: the MIT* anytime loop, ablation variants, and an
//!   RRT-Connect baseline.
//! - [`bench`]: seeded benchmark campaigns, statistics, and CSV/JSON/SVG
//!   outputs behind the `bench` CLI.

pub mod bench;
pub mod collision;
pub mod phs;
pub mod planner;
pub mod sampling;
pub mod search;
pub mod space;

pub use planner::{PlannerConfig, PlannerVariant, SolutionEvent, SolveOutcome};
pub use space::{AabbObstacle, Path, ProblemDef, ScenarioFamily, StateVec};
