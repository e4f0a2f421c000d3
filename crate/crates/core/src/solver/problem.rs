use std::cmp::Ordering;

use thiserror::Error;

use crate::normal::std_normal_sf;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("mean vector has {mu} entries but variance vector has {var}")]
    LengthMismatch { mu: usize, var: usize },
    #[error("candidate {index}: {what} must be finite")]
    NonFinite { index: usize, what: &'static str },
    #[error("candidate {index}: variance {value} is negative")]
    NegativeVariance { index: usize, value: f64 },
    #[error("budget n_max = {n_max} must be between 1 and the candidate count {candidates}")]
    InvalidBudget { n_max: usize, candidates: usize },
    #[error("target must be finite")]
    NonFiniteTarget,
    #[error("candidate pool is empty")]
    EmptyPool,
    #[error("candidate index {index} out of range for {candidates} candidates")]
    IndexOutOfRange { index: usize, candidates: usize },
    #[error("selection is empty")]
    EmptySelection,
    #[error("selection has zero total variance (shortfall {shortfall}); reliability is deterministic")]
    DegenerateVariance { shortfall: f64 },
    #[error("unsupported feature: {0}")]
    Unsupported(String),
    #[error("iteration count must be at least 1")]
    InvalidIterations,
    #[error("slope lambda' must be non-negative, got {0}")]
    InvalidSlope(f64),
    #[error("no slope produced a non-empty portfolio")]
    NoFeasiblePortfolio,
    #[error("exact enumeration refused: {candidates} candidates exceeds the limit of {limit}")]
    TooLargeForExact { candidates: usize, limit: usize },
}

/// Selection instance with diagonal covariance and uniform cost.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionProblem<T> {
    mu: Vec<T>,
    var: Vec<T>,
    n_max: usize,
    target: T,
}

impl<T: Scalar> SelectionProblem<T> {
    pub fn new(mu: Vec<T>, var: Vec<T>, n_max: usize, target: T) -> Result<Self, SolverError> {
        if mu.len() != var.len() {
            return Err(SolverError::LengthMismatch {
                mu: mu.len(),
                var: var.len(),
            });
        }
        if mu.is_empty() {
            return Err(SolverError::EmptyPool);
        }
        for (index, (&m, &v)) in mu.iter().zip(&var).enumerate() {
            if !m.is_finite() {
                return Err(SolverError::NonFinite { index, what: "mean" });
            }
            if !v.is_finite() {
                return Err(SolverError::NonFinite {
                    index,
                    what: "variance",
                });
            }
            if v < T::zero() {
                return Err(SolverError::NegativeVariance {
                    index,
                    value: v.to_f64_lossy(),
                });
            }
        }
        if n_max == 0 || n_max > mu.len() {
            return Err(SolverError::InvalidBudget {
                n_max,
                candidates: mu.len(),
            });
        }
        if !target.is_finite() {
            return Err(SolverError::NonFiniteTarget);
        }
        Ok(Self {
            mu,
            var,
            n_max,
            target,
        })
    }

    /// Builds a problem from response standard deviations.
    pub fn from_sigma(
        mu: Vec<T>,
        sigma: &[T],
        n_max: usize,
        target: T,
    ) -> Result<Self, SolverError> {
        let var = sigma.iter().map(|&s| s * s).collect();
        Self::new(mu, var, n_max, target)
    }

    /// Builds a problem from per-candidate costs and a total budget.
    ///
    /// Only uniform positive costs are supported; they reduce to a cardinality
    /// budget `floor(budget / cost)` (capped at the candidate count).
    pub fn from_costs(
        mu: Vec<T>,
        var: Vec<T>,
        costs: &[T],
        budget: T,
        target: T,
    ) -> Result<Self, SolverError> {
        if costs.len() != mu.len() {
            return Err(SolverError::LengthMismatch {
                mu: mu.len(),
                var: costs.len(),
            });
        }
        let first = *costs.first().ok_or(SolverError::EmptyPool)?;
        if !(first > T::zero()) || costs.iter().any(|&c| c != first) {
            return Err(SolverError::Unsupported(
                "heterogeneous or non-positive recruitment costs".into(),
            ));
        }
        let n = (budget / first).floor().to_usize().unwrap_or(0).min(mu.len());
        Self::new(mu, var, n, target)
    }

    /// Builds a problem from a full covariance matrix, which must be
    /// diagonal.
    pub fn from_covariance(
        mu: Vec<T>,
        covariance: &[Vec<T>],
        n_max: usize,
        target: T,
    ) -> Result<Self, SolverError> {
        if covariance.len() != mu.len() || covariance.iter().any(|row| row.len() != mu.len()) {
            return Err(SolverError::LengthMismatch {
                mu: mu.len(),
                var: covariance.len(),
            });
        }
        let mut var = Vec::with_capacity(mu.len());
        for (j, row) in covariance.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                if j != k && v != T::zero() {
                    return Err(SolverError::Unsupported(format!(
                        "correlated responses (covariance entry ({j}, {k}) is non-zero)"
                    )));
                }
            }
            var.push(row[j]);
        }
        Self::new(mu, var, n_max, target)
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    pub fn var(&self) -> &[T] {
        &self.var
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn target(&self) -> T {
        self.target
    }

    pub fn with_target(&self, target: T) -> Result<Self, SolverError> {
        Self::new(self.mu.clone(), self.var.clone(), self.n_max, target)
    }

    pub fn with_n_max(&self, n_max: usize) -> Result<Self, SolverError> {
        Self::new(self.mu.clone(), self.var.clone(), n_max, self.target)
    }

    /// Evaluates a candidate subset. Indices are sorted and deduplicated;
    /// sums accumulate in ascending index order so equal sets always give
    /// bit-identical totals.
    pub fn evaluate(&self, chosen: &[usize]) -> Result<Selection<T>, SolverError> {
        let mut chosen = chosen.to_vec();
        chosen.sort_unstable();
        chosen.dedup();
        if let Some(&index) = chosen.iter().find(|&&k| k >= self.len()) {
            return Err(SolverError::IndexOutOfRange {
                index,
                candidates: self.len(),
            });
        }
        Ok(self.evaluate_sorted(chosen))
    }

    pub(crate) fn evaluate_sorted(&self, chosen: Vec<usize>) -> Selection<T> {
        let mut total_mu = T::zero();
        let mut total_var = T::zero();
        for &k in &chosen {
            total_mu += self.mu[k];
            total_var += self.var[k];
        }
        Selection::from_totals(chosen, total_mu, total_var, self.target)
    }
}

/// A chosen subset together with its aggregate statistics.
///
/// When `total_var` is zero the aggregate is deterministic: `rho` is `-inf`
/// if the mean meets the target (reliability 1) and `+inf` otherwise
/// (reliability 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Selection<T> {
    pub chosen: Vec<usize>,
    pub total_mu: T,
    pub total_var: T,
    pub rho: T,
    pub reliability: T,
}

impl<T: Scalar> Selection<T> {
    pub(crate) fn from_totals(chosen: Vec<usize>, total_mu: T, total_var: T, target: T) -> Self {
        let shortfall = target - total_mu;
        let rho = if total_var > T::zero() {
            shortfall / total_var.sqrt()
        } else if shortfall <= T::zero() {
            T::neg_infinity()
        } else {
            T::infinity()
        };
        Selection {
            chosen,
            total_mu,
            total_var,
            rho,
            reliability: reliability(rho),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn total_sd(&self) -> T {
        self.total_var.sqrt()
    }

    /// Total order used for every argmin: smaller `rho` first, then the
    /// lexicographically smaller chosen set.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        self.rho
            .partial_cmp(&other.rho)
            .unwrap_or(Ordering::Equal)
            .then_with(|| self.chosen.cmp(&other.chosen))
    }
}

/// Standardized shortfall `(T - μᵀx) / sqrt(xᵀΣx)` of a subset.
pub fn rho<T: Scalar>(problem: &SelectionProblem<T>, chosen: &[usize]) -> Result<T, SolverError> {
    if chosen.is_empty() {
        return Err(SolverError::EmptySelection);
    }
    let sel = problem.evaluate(chosen)?;
    if sel.total_var > T::zero() {
        Ok(sel.rho)
    } else {
        Err(SolverError::DegenerateVariance {
            shortfall: (problem.target() - sel.total_mu).to_f64_lossy(),
        })
    }
}

/// Probability that the normal aggregate meets the target: `Φ(-rho)`.
pub fn reliability<T: Scalar>(rho: T) -> T {
    std_normal_sf(rho)
}
