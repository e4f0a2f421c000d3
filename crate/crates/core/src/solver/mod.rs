//! Reliability-maximizing portfolio selection under a normal aggregate.
//!
//! A [`SelectionProblem`] holds per-candidate response means and variances
//! (independent responses, uniform recruitment cost). The objective is to
//! pick at most `n_max` candidates maximizing `P(sum of responses >= target)`,
//! which under the normal aggregate is the same as minimizing the
//! standardized shortfall `rho = (target - mean) / sd`.
//!
//! [`solve_heuristic`] sweeps the linearized score `λ'·μ ∓ σ²` over slopes
//! `λ' = tan(iπ/2M)`; each sweep step is a top-N selection, so the whole
//! solve costs `2(M+1)` linear-time selections. [`solve_exact`] enumerates
//! subsets and serves as the test oracle on small instances.

mod bound;
mod exact;
mod problem;
mod sweep;

pub use bound::approximation_bound;
pub use exact::{solve_exact, EXACT_CANDIDATE_LIMIT};
pub use problem::{reliability, rho, Selection, SelectionProblem, SolverError};
pub use sweep::{
    slope_for, solve_heuristic, solve_lambda_diagonal, ExtremePoint, HeuristicSolution, Slope,
    SweepBranch, DEFAULT_ITERATIONS,
};
