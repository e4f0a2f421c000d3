//! Demand response program targeting: hourly load/temperature ingestion,
//! per-customer response models, and selection of a customer portfolio that
//! maximizes the probability of meeting an aggregate curtailment target.
//!
//! Numerical code is generic over [`scalar::Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the CLI uses.

pub mod greedy;
pub mod ingest;
pub mod normal;
pub mod response;
pub mod scalar;
pub mod solver;
pub mod tradeoff;

pub use scalar::Scalar;

pub type Problem = solver::SelectionProblem<f64>;
pub type Portfolio = solver::Selection<f64>;
pub type Heuristic = solver::HeuristicSolution<f64>;
pub type Greedy = greedy::GradualGreedy<f64>;
pub type Fit = response::HourlyFit<f64>;
pub type Estimate = response::ResponseEstimate<f64>;
pub type Pool = response::CandidatePool<f64>;
pub type Curve = tradeoff::TradeoffCurve<f64>;
