//! Curve families over a fixed candidate pool: reliability against the
//! target, reliability against the cardinality budget, and the smallest
//! budget reaching a reliability level for each target.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::greedy::solve_greedy;
use crate::scalar::Scalar;
use crate::solver::{solve_exact, solve_heuristic, Selection, SelectionProblem, SolverError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Heuristic,
    Greedy,
    Oracle,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Heuristic => "heuristic",
            Self::Greedy => "greedy",
            Self::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    #[serde(rename = "reliability_vs_T")]
    ReliabilityVsTarget,
    #[serde(rename = "reliability_vs_N")]
    ReliabilityVsN,
    #[serde(rename = "minN_vs_T")]
    MinNVsTarget,
}

/// Direct solves backing a minimum-N point: reliability at `n_min` and,
/// when `n_min > 1`, at `n_min − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate<T> {
    pub n_min: usize,
    pub reliability_at: T,
    pub reliability_below: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint<T> {
    pub control: T,
    /// Reliability, or the minimum N; `None` marks an unreachable target.
    pub value: Option<T>,
    pub certificate: Option<Certificate<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffCurve<T> {
    pub kind: CurveKind,
    pub algorithm: Algorithm,
    /// Sweep size for the heuristic; ignored by the other algorithms.
    pub iterations: usize,
    pub points: Vec<CurvePoint<T>>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TradeoffError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("p_min {0} must lie in (0.5, 1)")]
    InvalidPMin(f64),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// A drop of a curve that should be non-increasing or non-decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityViolation<T> {
    pub index: usize,
    pub control: T,
    /// Distance from the running extreme of the earlier points, > 0.
    pub magnitude: T,
}

/// Reliability of one solve. A pool without any positive-mean candidate
/// yields the empty portfolio, whose response is zero.
pub fn solve_reliability<T: Scalar>(
    problem: &SelectionProblem<T>,
    algorithm: Algorithm,
    m: usize,
) -> Result<T, SolverError> {
    solve_with(problem, algorithm, m).map(|s| s.map_or_else(|| empty_reliability(problem), |s| s.reliability))
}

fn empty_reliability<T: Scalar>(problem: &SelectionProblem<T>) -> T {
    if problem.target() <= T::zero() {
        T::one()
    } else {
        T::zero()
    }
}

/// Runs one algorithm; `Ok(None)` when the heuristic finds no non-empty
/// portfolio.
pub fn solve_with<T: Scalar>(
    problem: &SelectionProblem<T>,
    algorithm: Algorithm,
    m: usize,
) -> Result<Option<Selection<T>>, SolverError> {
    match algorithm {
        Algorithm::Heuristic => match solve_heuristic(problem, m) {
            Ok(sol) => Ok(Some(sol.best)),
            Err(SolverError::NoFeasiblePortfolio) => Ok(None),
            Err(e) => Err(e),
        },
        Algorithm::Greedy => Ok(Some(solve_greedy(problem))),
        Algorithm::Oracle => solve_exact(problem).map(Some),
    }
}

fn check_increasing<T: Scalar>(grid: &[T], what: &str, positive: bool) -> Result<(), TradeoffError> {
    if grid.is_empty() {
        return Err(TradeoffError::InvalidGrid(format!("{what} grid is empty")));
    }
    if let Some(v) = grid
        .iter()
        .find(|v| !v.is_finite() || (positive && **v <= T::zero()))
    {
        return Err(TradeoffError::InvalidGrid(format!(
            "{what} value {v} must be finite{}",
            if positive { " and > 0" } else { "" }
        )));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(TradeoffError::InvalidGrid(format!("{what} grid must be strictly increasing")));
    }
    Ok(())
}

/// Reliability against the target with the budget of `base` held fixed.
pub fn reliability_vs_target<T: Scalar>(
    base: &SelectionProblem<T>,
    t_grid: &[T],
    algorithm: Algorithm,
    m: usize,
) -> Result<TradeoffCurve<T>, TradeoffError> {
    check_increasing(t_grid, "target", true)?;
    let points = t_grid
        .par_iter()
        .map(|&t| {
            let p = solve_reliability(&base.with_target(t)?, algorithm, m)?;
            Ok(CurvePoint {
                control: t,
                value: Some(p),
                certificate: None,
            })
        })
        .collect::<Result<Vec<_>, TradeoffError>>()?;
    Ok(TradeoffCurve {
        kind: CurveKind::ReliabilityVsTarget,
        algorithm,
        iterations: m,
        points,
    })
}

/// Reliability against the budget with the target of `base` held fixed.
pub fn reliability_vs_n<T: Scalar>(
    base: &SelectionProblem<T>,
    n_grid: &[usize],
    algorithm: Algorithm,
    m: usize,
) -> Result<TradeoffCurve<T>, TradeoffError> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(TradeoffError::InvalidGrid(
            "N grid must be non-empty and strictly increasing".into(),
        ));
    }
    if n_grid[0] == 0 || n_grid[n_grid.len() - 1] > base.len() {
        return Err(TradeoffError::InvalidGrid(format!(
            "N values must lie in [1, {}]",
            base.len()
        )));
    }
    let points = n_grid
        .par_iter()
        .map(|&n| {
            let p = solve_reliability(&base.with_n_max(n)?, algorithm, m)?;
            Ok(CurvePoint {
                control: T::from_usize_lossy(n),
                value: Some(p),
                certificate: None,
            })
        })
        .collect::<Result<Vec<_>, TradeoffError>>()?;
    Ok(TradeoffCurve {
        kind: CurveKind::ReliabilityVsN,
        algorithm,
        iterations: m,
        points,
    })
}

/// Memoized heuristic reliability as a function of N for one target.
struct ByBudget<T> {
    problem: SelectionProblem<T>,
    m: usize,
    cache: BTreeMap<usize, T>,
}

impl<T: Scalar> ByBudget<T> {
    fn at(&mut self, n: usize) -> Result<T, SolverError> {
        if let Some(&p) = self.cache.get(&n) {
            return Ok(p);
        }
        let p = solve_reliability(&self.problem.with_n_max(n)?, Algorithm::Heuristic, self.m)?;
        self.cache.insert(n, p);
        Ok(p)
    }

    fn fresh(&self, n: usize) -> Result<T, SolverError> {
        solve_reliability(&self.problem.with_n_max(n)?, Algorithm::Heuristic, self.m)
    }
}

/// Smallest N whose heuristic reliability reaches `p_min`, or `None`.
///
/// Searches exponentially then by bisection as if reliability were
/// non-decreasing in N, then re-solves N and N − 1 from scratch. If that
/// certificate fails, the bracket below the found N is scanned linearly.
fn min_n_one<T: Scalar>(
    base: &SelectionProblem<T>,
    target: T,
    p_min: T,
    m: usize,
) -> Result<Option<Certificate<T>>, SolverError> {
    let k = base.len();
    let mut f = ByBudget {
        problem: base.with_target(target)?.with_n_max(k)?,
        m,
        cache: BTreeMap::new(),
    };
    if f.at(k)? < p_min {
        return Ok(None);
    }
    let mut lo = 0usize; // reliability below p_min (N = 0 means nothing chosen)
    let mut hi = 1usize;
    while hi < k && f.at(hi)? < p_min {
        lo = hi;
        hi = (hi * 2).min(k);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if f.at(mid)? >= p_min {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let check = |f: &ByBudget<T>, n: usize| -> Result<Option<Certificate<T>>, SolverError> {
        let at = f.fresh(n)?;
        let below = if n > 1 { Some(f.fresh(n - 1)?) } else { None };
        let ok = at >= p_min && below.map_or(true, |b| b < p_min);
        Ok(ok.then_some(Certificate {
            n_min: n,
            reliability_at: at,
            reliability_below: below,
        }))
    };
    if let Some(cert) = check(&f, hi)? {
        return Ok(Some(cert));
    }
    for n in 1..=hi {
        if f.at(n)? >= p_min {
            return check(&f, n);
        }
    }
    Ok(None)
}

/// Minimum heuristic budget reaching `p_min` for each target. Targets that
/// stay below `p_min` even with every candidate are marked unreachable.
pub fn min_n_for_target<T: Scalar>(
    base: &SelectionProblem<T>,
    t_grid: &[T],
    p_min: T,
    m: usize,
) -> Result<TradeoffCurve<T>, TradeoffError> {
    check_increasing(t_grid, "target", true)?;
    if !(p_min > T::lit(0.5) && p_min < T::one()) {
        return Err(TradeoffError::InvalidPMin(p_min.to_f64_lossy()));
    }
    let points = t_grid
        .par_iter()
        .map(|&t| {
            let cert = min_n_one(base, t, p_min, m)?;
            Ok(CurvePoint {
                control: t,
                value: cert.as_ref().map(|c| T::from_usize_lossy(c.n_min)),
                certificate: cert,
            })
        })
        .collect::<Result<Vec<_>, TradeoffError>>()?;
    Ok(TradeoffCurve {
        kind: CurveKind::MinNVsTarget,
        algorithm: Algorithm::Heuristic,
        iterations: m,
        points,
    })
}

/// Points where a curve expected to be non-decreasing (`increasing = true`)
/// or non-increasing falls behind the running extreme of earlier points.
/// Unreachable points are skipped.
pub fn monotonicity_violations<T: Scalar>(
    curve: &TradeoffCurve<T>,
    increasing: bool,
) -> Vec<MonotonicityViolation<T>> {
    let mut out = Vec::new();
    let mut extreme: Option<T> = None;
    for (index, p) in curve.points.iter().enumerate() {
        let Some(v) = p.value else { continue };
        if let Some(e) = extreme {
            let gap = if increasing { e - v } else { v - e };
            if gap > T::zero() {
                out.push(MonotonicityViolation {
                    index,
                    control: p.control,
                    magnitude: gap,
                });
                continue;
            }
        }
        extreme = Some(v);
    }
    out
}

/// Default target grid: 200 to 4000 kWh in steps of 200.
pub fn default_target_grid<T: Scalar>() -> Vec<T> {
    (1..=20).map(|i| T::lit(200.0 * i as f64)).collect()
}
