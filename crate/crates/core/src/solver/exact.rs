use super::problem::{Selection, SelectionProblem, SolverError};
use crate::scalar::Scalar;

/// Largest candidate count accepted by [`solve_exact`].
pub const EXACT_CANDIDATE_LIMIT: usize = 24;

/// Exact optimum by enumerating every subset of size `1..=n_max`.
///
/// Subsets are visited in lexicographic order and only strict improvements
/// replace the incumbent, so ties resolve to the lexicographically smallest
/// chosen set.
pub fn solve_exact<T: Scalar>(problem: &SelectionProblem<T>) -> Result<Selection<T>, SolverError> {
    if problem.len() > EXACT_CANDIDATE_LIMIT {
        return Err(SolverError::TooLargeForExact {
            candidates: problem.len(),
            limit: EXACT_CANDIDATE_LIMIT,
        });
    }
    let mut search = Search {
        problem,
        stack: Vec::with_capacity(problem.n_max()),
        best: None,
    };
    search.descend(0, T::zero(), T::zero());
    Ok(search.best.expect("at least one non-empty subset"))
}

struct Search<'a, T> {
    problem: &'a SelectionProblem<T>,
    stack: Vec<usize>,
    best: Option<Selection<T>>,
}

impl<T: Scalar> Search<'_, T> {
    fn descend(&mut self, start: usize, mu: T, var: T) {
        for k in start..self.problem.len() {
            let mu_k = mu + self.problem.mu()[k];
            let var_k = var + self.problem.var()[k];
            self.stack.push(k);
            let candidate =
                Selection::from_totals(self.stack.clone(), mu_k, var_k, self.problem.target());
            let improves = match &self.best {
                None => true,
                Some(b) => candidate.rho < b.rho,
            };
            if improves {
                self.best = Some(candidate);
            }
            if self.stack.len() < self.problem.n_max() {
                self.descend(k + 1, mu_k, var_k);
            }
            self.stack.pop();
        }
    }
}
