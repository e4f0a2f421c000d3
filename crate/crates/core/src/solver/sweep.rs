use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bound::approximation_bound;
use super::problem::{Selection, SelectionProblem, SolverError};
use crate::scalar::Scalar;

pub const DEFAULT_ITERATIONS: usize = 10;

/// Slope `λ'` of the linearized objective. `Infinite` ranks by mean alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slope<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> Slope<T> {
    pub fn as_scalar(self) -> T {
        match self {
            Slope::Finite(v) => v,
            Slope::Infinite => T::infinity(),
        }
    }
}

/// Sign of the variance term in the linearized score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepBranch {
    /// `λ'·μ − σ²`: extreme points on the low-variance side of the hull,
    /// where the optimum lies when the target is reachable (`rho* < 0`).
    RiskAverse,
    /// `λ'·μ + σ²`: used when the target exceeds what the budget can
    /// deliver on average (`rho* > 0`).
    RiskSeeking,
}

/// One solved slope of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremePoint<T> {
    pub lambda_index: usize,
    pub lambda_prime: Slope<T>,
    pub branch: SweepBranch,
    pub selection: Selection<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicSolution<T> {
    pub best: Selection<T>,
    /// Every non-empty sweep result in `(lambda_index, branch)` order.
    pub extreme_points: Vec<ExtremePoint<T>>,
    /// Ratio bound on `rho_best / rho*`; only computed when `best.rho < 0`.
    pub bound: Option<T>,
    pub iterations: usize,
}

/// `λ'_i = tan(iπ / 2m)`, with `i = m` taken as the limit `+∞`.
pub fn slope_for<T: Scalar>(i: usize, m: usize) -> Slope<T> {
    if i >= m {
        Slope::Infinite
    } else if i == 0 {
        Slope::Finite(T::zero())
    } else {
        let angle = T::from_usize_lossy(i) * T::PI() / T::from_usize_lossy(2 * m);
        Slope::Finite(angle.tan())
    }
}

fn by_score_desc<T: Scalar>(a: &(T, usize), b: &(T, usize)) -> Ordering {
    b.0.partial_cmp(&a.0)
        .unwrap_or(Ordering::Equal)
        .then(a.1.cmp(&b.1))
}

/// Maximizes the linearized score over subsets of at most `n_max`
/// candidates: keeps the highest strictly positive scores, ties by
/// ascending index. Returns an empty selection when no score is positive.
pub fn solve_lambda_diagonal<T: Scalar>(
    problem: &SelectionProblem<T>,
    lambda_prime: Slope<T>,
    branch: SweepBranch,
) -> Result<Selection<T>, SolverError> {
    if let Slope::Finite(l) = lambda_prime {
        if !(l >= T::zero()) || !l.is_finite() {
            return Err(SolverError::InvalidSlope(l.to_f64_lossy()));
        }
    }
    let mu = problem.mu();
    let var = problem.var();
    let mut scored: Vec<(T, usize)> = match lambda_prime {
        Slope::Infinite => mu
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > T::zero())
            .map(|(k, &m)| (m, k))
            .collect(),
        Slope::Finite(l) => mu
            .iter()
            .zip(var)
            .enumerate()
            .filter_map(|(k, (&m, &v))| {
                let s = match branch {
                    SweepBranch::RiskAverse => l * m - v,
                    SweepBranch::RiskSeeking => l * m + v,
                };
                (s > T::zero()).then_some((s, k))
            })
            .collect(),
    };
    let n = problem.n_max();
    if scored.len() > n {
        scored.select_nth_unstable_by(n - 1, by_score_desc);
        scored.truncate(n);
    }
    let mut chosen: Vec<usize> = scored.into_iter().map(|(_, k)| k).collect();
    chosen.sort_unstable();
    Ok(problem.evaluate_sorted(chosen))
}

/// Runs both sweeps over `m + 1` slopes and returns the best portfolio.
///
/// The sweep steps are independent and run on the rayon pool; the result
/// does not depend on evaluation order.
pub fn solve_heuristic<T: Scalar>(
    problem: &SelectionProblem<T>,
    m: usize,
) -> Result<HeuristicSolution<T>, SolverError> {
    if m == 0 {
        return Err(SolverError::InvalidIterations);
    }
    let jobs: Vec<(usize, SweepBranch)> = (0..=m)
        .flat_map(|i| [(i, SweepBranch::RiskAverse), (i, SweepBranch::RiskSeeking)])
        .collect();
    let solved: Vec<ExtremePoint<T>> = jobs
        .par_iter()
        .map(|&(i, branch)| {
            let lambda_prime = slope_for(i, m);
            solve_lambda_diagonal(problem, lambda_prime, branch).map(|selection| ExtremePoint {
                lambda_index: i,
                lambda_prime,
                branch,
                selection,
            })
        })
        .collect::<Result<_, _>>()?;
    let extreme_points: Vec<ExtremePoint<T>> = solved
        .into_iter()
        .filter(|p| !p.selection.is_empty())
        .collect();

    let best = extreme_points
        .iter()
        .map(|p| &p.selection)
        .min_by(|a, b| a.rank_cmp(b))
        .cloned()
        .ok_or(SolverError::NoFeasiblePortfolio)?;
    let bound = if best.rho < T::zero() {
        approximation_bound(&extreme_points)
    } else {
        None
    };
    Ok(HeuristicSolution {
        best,
        extreme_points,
        bound,
        iterations: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(mu: &[f64], var: &[f64], n: usize, t: f64) -> SelectionProblem<f64> {
        SelectionProblem::new(mu.to_vec(), var.to_vec(), n, t).unwrap()
    }

    #[test]
    fn infinite_slope_ranks_by_mean() {
        let p = problem(&[3.0, 1.0, 2.0], &[1.0, 1.0, 1.0], 2, 1.0);
        let s = solve_lambda_diagonal(&p, Slope::Infinite, SweepBranch::RiskAverse).unwrap();
        assert_eq!(s.chosen, vec![0, 2]);
    }

    #[test]
    fn zero_slope_risk_averse_is_empty() {
        let p = problem(&[3.0, 1.0, 2.0], &[1.0, 0.5, 2.0], 2, 1.0);
        let s = solve_lambda_diagonal(&p, Slope::Finite(0.0), SweepBranch::RiskAverse).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn ties_prefer_lower_index() {
        let p = problem(&[1.0; 5], &[1.0; 5], 3, 1.0);
        let s = solve_lambda_diagonal(&p, Slope::Finite(2.0), SweepBranch::RiskAverse).unwrap();
        assert_eq!(s.chosen, vec![0, 1, 2]);
    }

    #[test]
    fn negative_slope_rejected() {
        let p = problem(&[1.0], &[1.0], 1, 1.0);
        assert!(solve_lambda_diagonal(&p, Slope::Finite(-1.0), SweepBranch::RiskAverse).is_err());
        assert_eq!(solve_heuristic(&p, 0), Err(SolverError::InvalidIterations));
    }

    #[test]
    fn slopes_follow_equal_angles() {
        assert_eq!(slope_for::<f64>(0, 10), Slope::Finite(0.0));
        assert_eq!(slope_for::<f64>(10, 10), Slope::Infinite);
        match slope_for::<f64>(5, 10) {
            Slope::Finite(v) => assert!((v - 1.0).abs() < 1e-15),
            Slope::Infinite => panic!(),
        }
    }

    #[test]
    fn single_candidate() {
        let p = problem(&[10.0], &[1.0], 1, 8.0);
        let sol = solve_heuristic(&p, 10).unwrap();
        assert_eq!(sol.best.chosen, vec![0]);
        assert_eq!(sol.best.rho, -2.0);
        assert!((sol.best.reliability - 0.977_249_868).abs() < 1e-6);
        // one distinct extreme point only
        assert_eq!(sol.bound, None);
    }

    #[test]
    fn identical_candidates() {
        let p = problem(&vec![1.0; 100], &vec![1.0; 100], 50, 40.0);
        let sol = solve_heuristic(&p, 10).unwrap();
        assert_eq!(sol.best.len(), 50);
        assert!((sol.best.rho - (40.0 - 50.0) / 50f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn no_positive_mean_is_infeasible() {
        let p = problem(&[-1.0, 0.0], &[1.0, 1.0], 1, 1.0);
        // the risk-seeking branch still scores variance positively
        let sol = solve_heuristic(&p, 4).unwrap();
        assert!(sol.best.rho > 0.0);
        let p = problem(&[-1.0, -2.0], &[0.0, 0.0], 1, 1.0);
        assert_eq!(solve_heuristic(&p, 4), Err(SolverError::NoFeasiblePortfolio));
    }
}
