//! Max-min transmitter placement.
//!
//! A transmitter at `p` delivers `Q_n = q0 / d_n` to receiver `n`, where the
//! pathloss `d_n = |p - p_n|^2` is the squared distance. The placement problem
//! maximizes `min_n P_dc(Q_n)` over a box. Because `P_dc` is convex in `d_n`,
//! its tangent at the current anchor is a global lower bound, and maximizing
//! the lower bound is a convex problem. Iterating that step
//! ([`sia_solve`]) improves the objective monotonically. [`exhaustive_search`]
//! evaluates the true objective on a mesh as an independent reference.

mod geometry;
mod grid;
mod scenario;
mod sia;
mod subproblem;
mod surrogate;

pub use geometry::{pathloss, BBox, Point};
pub use grid::{exhaustive_search, finish_grid, scan_rows, GridCandidate, GridResult, GridSpec, DEFAULT_CELL_LIMIT};
pub use scenario::{generate_receivers, generate_scenario, Scenario, D_FLOOR, NEAR_RECEIVER_OFFSET};
pub use sia::{sia_solve, SiaIteration, SiaOptions, SiaTrace, StepStatus, StopReason};
pub use subproblem::{solve_subproblem, SubproblemSolution};
pub use surrogate::{build_surrogate, Surrogate, SurrogateTerm};
