use std::collections::HashMap;

use rayon::prelude::*;

use super::fit::{estimate_response, fit_hour};
use super::{FitConfig, FitUnavailable, HourlyFit, ModelKind, ResponseError, ResponseEstimate};
use crate::ingest::{JoinResult, JoinedObservations};
use crate::scalar::Scalar;
use crate::solver::{SelectionProblem, SolverError};

#[derive(Debug, Clone, PartialEq)]
pub struct Exclusion {
    pub customer_id: String,
    pub hour: u8,
    pub reason: FitUnavailable,
}

/// Model selection outcome for one hour of day.
#[derive(Debug, Clone, PartialEq)]
pub struct HourSummary {
    pub hour: u8,
    pub fitted: usize,
    pub breakpoint: usize,
    pub excluded: usize,
    /// `breakpoint / fitted`, zero when nothing was fitted.
    pub breakpoint_share: f64,
    pub mean_r2: f64,
}

/// Half-open `[lower, upper)` bin; the last bin also holds 1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct R2Bin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport<T> {
    /// Selected fits sorted by `(customer_id, hour)`.
    pub fits: Vec<HourlyFit<T>>,
    pub exclusions: Vec<Exclusion>,
    pub hourly: Vec<HourSummary>,
    /// R² of the selected fits in ten equal bins.
    pub r2_histogram: Vec<R2Bin>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationFit<T> {
    pub estimates: Vec<ResponseEstimate<T>>,
    pub report: FitReport<T>,
}

const R2_BINS: usize = 10;

/// Fits every customer of a join at each requested hour. Customers listed
/// in the join's coverage but without samples at an hour are excluded for
/// that hour, as are customer-hours where neither model can be fitted.
pub fn fit_population<T: Scalar>(
    joined: &JoinResult,
    hours: &[u8],
    delta_tr: T,
    cfg: &FitConfig,
) -> Result<PopulationFit<T>, ResponseError> {
    cfg.validate()?;
    if !(delta_tr.is_finite() && delta_tr > T::zero()) {
        return Err(ResponseError::InvalidDeltaTr(delta_tr.to_f64_lossy()));
    }
    if hours.is_empty() {
        return Err(ResponseError::NoHours);
    }
    if let Some(&h) = hours.iter().find(|&&h| h > 23) {
        return Err(ResponseError::InvalidHour(h));
    }
    let mut hours = hours.to_vec();
    hours.sort_unstable();
    hours.dedup();

    let mut customers: Vec<&str> = joined
        .coverage
        .iter()
        .map(|c| c.customer_id.as_str())
        .chain(joined.observations.iter().map(|o| o.customer_id.as_str()))
        .collect();
    customers.sort_unstable();
    customers.dedup();
    if customers.is_empty() {
        return Err(ResponseError::EmptyPopulation);
    }

    let by_key: HashMap<(&str, u8), &JoinedObservations> = joined
        .observations
        .iter()
        .map(|o| ((o.customer_id.as_str(), o.hour), o))
        .collect();
    let jobs: Vec<(&str, u8)> = customers
        .iter()
        .flat_map(|&c| hours.iter().map(move |&h| (c, h)))
        .collect();
    let outcomes: Vec<Result<HourlyFit<T>, Exclusion>> = jobs
        .par_iter()
        .map(|&(customer, hour)| {
            let exclude = |reason| Exclusion {
                customer_id: customer.to_string(),
                hour,
                reason,
            };
            match by_key.get(&(customer, hour)) {
                None => Err(exclude(FitUnavailable::NoSamples)),
                Some(obs) => fit_hour(obs, cfg).map_err(exclude),
            }
        })
        .collect();

    let mut fits = Vec::new();
    let mut exclusions = Vec::new();
    for o in outcomes {
        match o {
            Ok(f) => fits.push(f),
            Err(e) => exclusions.push(e),
        }
    }
    let estimates = fits
        .iter()
        .map(|f| estimate_response(f, delta_tr))
        .collect::<Result<Vec<_>, _>>()?;

    let hourly = hours
        .iter()
        .map(|&hour| {
            let at: Vec<&HourlyFit<T>> = fits.iter().filter(|f| f.hour == hour).collect();
            let breakpoint = at
                .iter()
                .filter(|f| f.fit.kind == ModelKind::Breakpoint)
                .count();
            let fitted = at.len();
            let r2_sum: f64 = at.iter().map(|f| f.fit.r2.to_f64_lossy()).sum();
            HourSummary {
                hour,
                fitted,
                breakpoint,
                excluded: exclusions.iter().filter(|e| e.hour == hour).count(),
                breakpoint_share: if fitted == 0 {
                    0.0
                } else {
                    breakpoint as f64 / fitted as f64
                },
                mean_r2: if fitted == 0 { 0.0 } else { r2_sum / fitted as f64 },
            }
        })
        .collect();

    let mut r2_histogram: Vec<R2Bin> = (0..R2_BINS)
        .map(|i| R2Bin {
            lower: i as f64 / R2_BINS as f64,
            upper: (i + 1) as f64 / R2_BINS as f64,
            count: 0,
        })
        .collect();
    for f in &fits {
        let r2 = f.fit.r2.to_f64_lossy();
        let bin = ((r2 * R2_BINS as f64).floor() as usize).min(R2_BINS - 1);
        r2_histogram[bin].count += 1;
    }

    Ok(PopulationFit {
        estimates,
        report: FitReport {
            fits,
            exclusions,
            hourly,
            r2_histogram,
        },
    })
}

/// Selection candidates for one hour, in estimate order.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePool<T> {
    pub hour: u8,
    pub ids: Vec<String>,
    pub mu: Vec<T>,
    pub sigma: Vec<T>,
}

impl<T: Scalar> CandidatePool<T> {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn to_problem(&self, n_max: usize, target: T) -> Result<SelectionProblem<T>, SolverError> {
        SelectionProblem::from_sigma(self.mu.clone(), &self.sigma, n_max, target)
    }
}

/// Eligible estimates at `hour`. Negative means are dropped unless
/// `allow_negative_mu`.
pub fn candidate_pool<T: Scalar>(
    estimates: &[ResponseEstimate<T>],
    hour: u8,
    allow_negative_mu: bool,
) -> CandidatePool<T> {
    let mut pool = CandidatePool {
        hour,
        ids: Vec::new(),
        mu: Vec::new(),
        sigma: Vec::new(),
    };
    for e in estimates {
        if e.hour == hour && e.eligible && (allow_negative_mu || e.mu >= T::zero()) {
            pool.ids.push(e.customer_id.clone());
            pool.mu.push(e.mu);
            pool.sigma.push(e.sigma);
        }
    }
    pool
}
