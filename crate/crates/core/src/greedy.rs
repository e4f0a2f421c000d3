//! Greedy baselines for the selection problem.
//!
//! The gradual greedy picks, one customer at a time, the best mean-to-sd
//! ratio among candidates whose mean covers an even share of the remaining
//! target: `μ_k ≥ T_{i-1} / (N + 1 - i)`. If every step can honor that floor,
//! the chosen means sum to at least the target, so the portfolio's
//! reliability is at least one half.

use std::cmp::Ordering;

use crate::scalar::Scalar;
use crate::solver::{Selection, SelectionProblem};

/// Result of [`solve_gradual_greedy`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradualGreedy<T> {
    pub selection: Selection<T>,
    /// Whether some unchosen candidate met the residual-target floor at
    /// every step.
    pub floor_met_every_step: bool,
    /// Steps (1-based) that fell back to the largest remaining mean.
    pub fallback_steps: Vec<usize>,
}

/// Ranking key: zero-variance candidates first (infinite ratio, by mean),
/// then by `μ/σ`, ties by ascending index.
fn ratio_cmp<T: Scalar>(mu: &[T], sd: &[T], a: usize, b: usize) -> Ordering {
    let za = sd[a] == T::zero();
    let zb = sd[b] == T::zero();
    let primary = match (za, zb) {
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        (true, true) => mu[a].partial_cmp(&mu[b]).unwrap_or(Ordering::Equal),
        (false, false) => (mu[a] / sd[a])
            .partial_cmp(&(mu[b] / sd[b]))
            .unwrap_or(Ordering::Equal),
    };
    primary.then(b.cmp(&a))
}

/// Max-segment tree over candidates laid out in ascending-mean order.
struct RatioTree<'a, T> {
    mu: &'a [T],
    sd: &'a [T],
    size: usize,
    nodes: Vec<Option<usize>>,
}

impl<'a, T: Scalar> RatioTree<'a, T> {
    fn new(mu: &'a [T], sd: &'a [T], order: &[usize]) -> Self {
        let size = order.len().next_power_of_two();
        let mut nodes = vec![None; 2 * size];
        for (pos, &k) in order.iter().enumerate() {
            nodes[size + pos] = Some(k);
        }
        let mut tree = RatioTree {
            mu,
            sd,
            size,
            nodes,
        };
        for i in (1..size).rev() {
            tree.nodes[i] = tree.pick(tree.nodes[2 * i], tree.nodes[2 * i + 1]);
        }
        tree
    }

    fn pick(&self, a: Option<usize>, b: Option<usize>) -> Option<usize> {
        match (a, b) {
            (Some(x), Some(y)) => match ratio_cmp(self.mu, self.sd, x, y) {
                Ordering::Less => Some(y),
                _ => Some(x),
            },
            (x, None) => x,
            (None, y) => y,
        }
    }

    fn remove(&mut self, pos: usize) {
        let mut i = self.size + pos;
        self.nodes[i] = None;
        while i > 1 {
            i /= 2;
            self.nodes[i] = self.pick(self.nodes[2 * i], self.nodes[2 * i + 1]);
        }
    }

    /// Best candidate among positions `from..`.
    fn best_from(&self, from: usize) -> Option<usize> {
        let mut lo = self.size + from;
        let mut hi = 2 * self.size;
        let mut best = None;
        while lo < hi {
            if lo & 1 == 1 {
                best = self.pick(best, self.nodes[lo]);
                lo += 1;
            }
            if hi & 1 == 1 {
                hi -= 1;
                best = self.pick(best, self.nodes[hi]);
            }
            lo /= 2;
            hi /= 2;
        }
        best
    }
}

/// Gradual greedy selection of up to `n_max` candidates.
///
/// When no unchosen candidate meets the floor at some step, the largest
/// remaining mean is taken instead and the step is recorded.
pub fn solve_gradual_greedy<T: Scalar>(problem: &SelectionProblem<T>) -> GradualGreedy<T> {
    let mu = problem.mu();
    let sd: Vec<T> = problem.var().iter().map(|v| v.sqrt()).collect();
    let k = problem.len();
    let n = problem.n_max();

    // ascending mean; among equal means the lower index sits higher
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        mu[a]
            .partial_cmp(&mu[b])
            .unwrap_or(Ordering::Equal)
            .then(b.cmp(&a))
    });
    let mut position = vec![0usize; k];
    for (pos, &c) in order.iter().enumerate() {
        position[c] = pos;
    }
    let mut tree = RatioTree::new(mu, &sd, &order);
    let mut taken = vec![false; k];
    let mut top = k;

    let mut remaining = problem.target();
    let mut chosen = Vec::with_capacity(n);
    let mut fallback_steps = Vec::new();
    for step in 1..=n {
        let floor = remaining / T::from_usize_lossy(n + 1 - step);
        let from = order.partition_point(|&c| mu[c] < floor);
        let pick = match tree.best_from(from) {
            Some(c) => c,
            None => {
                fallback_steps.push(step);
                while taken[order[top - 1]] {
                    top -= 1;
                }
                order[top - 1]
            }
        };
        taken[pick] = true;
        tree.remove(position[pick]);
        remaining -= mu[pick];
        chosen.push(pick);
    }
    chosen.sort_unstable();
    GradualGreedy {
        selection: problem.evaluate_sorted(chosen),
        floor_met_every_step: fallback_steps.is_empty(),
        fallback_steps,
    }
}

/// The `n_max` largest means, ties by ascending index.
pub fn solve_greedy_mu<T: Scalar>(problem: &SelectionProblem<T>) -> Selection<T> {
    let mu = problem.mu();
    let n = problem.n_max();
    let mut idx: Vec<usize> = (0..problem.len()).collect();
    let by_mean = |a: &usize, b: &usize| {
        mu[*b]
            .partial_cmp(&mu[*a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(b))
    };
    if idx.len() > n {
        idx.select_nth_unstable_by(n - 1, by_mean);
        idx.truncate(n);
    }
    idx.sort_unstable();
    problem.evaluate_sorted(idx)
}

/// Greedy baseline with regime choice: the gradual greedy result, unless
/// its mean falls short of the target, in which case the better of it and
/// the largest-means portfolio.
pub fn solve_greedy<T: Scalar>(problem: &SelectionProblem<T>) -> Selection<T> {
    let gradual = solve_gradual_greedy(problem).selection;
    if gradual.total_mu >= problem.target() {
        return gradual;
    }
    let by_mean = solve_greedy_mu(problem);
    if by_mean.rank_cmp(&gradual) == Ordering::Less {
        by_mean
    } else {
        gradual
    }
}
