use super::problem::Selection;
use super::sweep::{ExtremePoint, SweepBranch};
use crate::scalar::Scalar;

/// Ratio bound `min_i σ'_{i-1} / σ'_i` over consecutive risk-averse
/// extreme points sorted by total standard deviation.
///
/// Only distinct, non-empty selections with positive variance count.
/// Returns `None` when fewer than two such points exist.
pub fn approximation_bound<T: Scalar>(points: &[ExtremePoint<T>]) -> Option<T> {
    let mut distinct: Vec<&Selection<T>> = Vec::new();
    for p in points {
        if p.branch != SweepBranch::RiskAverse
            || p.selection.is_empty()
            || !(p.selection.total_var > T::zero())
        {
            continue;
        }
        if !distinct.iter().any(|s| s.chosen == p.selection.chosen) {
            distinct.push(&p.selection);
        }
    }
    if distinct.len() < 2 {
        return None;
    }
    let mut sds: Vec<T> = distinct.iter().map(|s| s.total_sd()).collect();
    sds.sort_by(|a, b| a.partial_cmp(b).expect("finite standard deviations"));
    sds.windows(2).map(|w| w[0] / w[1]).reduce(T::min)
}
