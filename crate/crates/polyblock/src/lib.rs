//! Global maximization of increasing functions over the intersection of a
//! normal set and a co-normal set, by outer polyblock approximation.
//!
//! A problem lives in the box `[0, b]`. The feasible region is `G ∩ H`, where
//! `G` is downward closed (if `x ∈ G` and `0 ≤ y ≤ x` then `y ∈ G`) and `H` is
//! upward closed inside the box. The solver keeps a polyblock (a finite union
//! of boxes `[0, v]`) that contains every point of `G ∩ H`, repeatedly picks
//! the vertex with the largest objective value, projects it onto the upper
//! boundary of `G` by bisection along the ray from the origin, and cuts away
//! the cone above the projection.
//!
//! The crate does not know anything about where the problem comes from; callers
//! implement [`MonotonicProblem`] (or use [`FnProblem`] with closures).

mod cut;
mod error;
mod problem;
mod projection;
mod solver;

pub use cut::{cut_cone, is_proper};
pub use error::SolveError;
pub use problem::{FnProblem, MonotonicProblem};
pub use projection::{bisect_project, project, Projection};
pub use solver::{solve, Counters, SolveOptions, SolveResult, Status, TraceRecord};
