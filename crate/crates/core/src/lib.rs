//! PFD: a particle-swarm solver for functional distributed constraint
//! optimization problems (continuous variables, binary cost functions).
//!
//! Agents run as message-driven state machines over a deterministic
//! round-based network ([`runtime`]). [`oracle`] holds a centralized
//! reference that consumes the same random streams, plus brute-force grid
//! search. [`generator`] and [`bench`] produce and batch-solve random
//! instances.

pub mod bench;
pub mod generator;
pub mod model;
pub mod oracle;
pub mod pseudotree;
pub mod rng;
pub mod runtime;
pub mod swarm;
pub mod trace;

pub use generator::{generate, GenSpec, Topology};
pub use model::{evaluate_edge, global_cost, parse_problem, serialize_problem, Assignment, Problem, QuadraticCost};
pub use oracle::{centralized_gcpso, grid_search, GridSpec};
pub use pseudotree::{build_bfs_pseudotree, PseudoTree};
pub use runtime::{run, run_with, InitialPositions, RunError, Simulator};
pub use swarm::{BestInfo, SwarmParams};
pub use trace::AnytimeTrace;
