//! Per-customer, per-hour temperature response models and the DR response
//! estimates derived from them.
//!
//! Two models are fitted to the joined samples of one customer-hour: a
//! breakpoint model, load = a(To−Tr)₊ + b(Tr−To)₊ + c with integer Tr on a
//! grid, and a straight line, load = a·To + c'. An F-test with one numerator
//! degree of freedom picks between them. Only breakpoint fits yield a
//! response estimate; `se_a` uses the usual OLS normal approximation.

mod fit;
mod io;
mod ols;
mod population;

pub use fit::{
    estimate_response, f_test, feasible_breakpoints, fit_breakpoint, fit_breakpoint_at,
    fit_hour, fit_linear, select_model,
};
pub use io::{
    read_estimates_csv, write_estimates_csv, write_fit_report_csv, write_hourly_summary_csv,
    write_r2_histogram_csv,
};
pub use population::{
    candidate_pool, fit_population, CandidatePool, Exclusion, FitReport, HourSummary,
    PopulationFit, R2Bin,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Breakpoint,
    Linear,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Breakpoint => "breakpoint",
            Self::Linear => "linear",
        }
    }
}

/// Fitting knobs. The breakpoint grid is inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub min_samples: usize,
    pub tr_min: i32,
    pub tr_max: i32,
    /// Minimum share of samples strictly below and strictly above Tr.
    pub side_fraction: f64,
    pub alpha: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            min_samples: 20,
            tr_min: 68,
            tr_max: 86,
            side_fraction: 0.15,
            alpha: 0.05,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), ResponseError> {
        let bad = |m: String| Err(ResponseError::InvalidConfig(m));
        if self.min_samples < 4 {
            return bad(format!("min_samples {} must be at least 4", self.min_samples));
        }
        if self.tr_min > self.tr_max {
            return bad(format!("empty breakpoint grid [{}, {}]", self.tr_min, self.tr_max));
        }
        if !(self.side_fraction > 0.0 && self.side_fraction <= 0.5) {
            return bad(format!("side_fraction {} outside (0, 0.5]", self.side_fraction));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha {} outside (0, 1)", self.alpha));
        }
        Ok(())
    }
}

/// Why a model could not be fitted to a customer-hour.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FitUnavailable {
    #[error("{n} samples, at least {min} required")]
    TooFewSamples { n: usize, min: usize },
    #[error("temperatures and loads differ in length ({temps} vs {loads})")]
    LengthMismatch { temps: usize, loads: usize },
    #[error("non-finite sample")]
    NonFinite,
    #[error("constant temperature")]
    ConstantTemperature,
    #[error("no breakpoint in the grid has enough samples on both sides")]
    NoFeasibleBreakpoint,
    #[error("singular design")]
    Singular,
    #[error("no joined samples for this hour")]
    NoSamples,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResponseError {
    #[error("delta_tr must be finite and > 0, got {0}")]
    InvalidDeltaTr(f64),
    #[error("invalid fit config: {0}")]
    InvalidConfig(String),
    #[error("no customers to fit")]
    EmptyPopulation,
    #[error("no hours requested")]
    NoHours,
    #[error("hour {0} outside 0..=23")]
    InvalidHour(u8),
    #[error("{0}")]
    Format(String),
}

/// One fitted model. `tr` and `b` are present only for the breakpoint
/// model; for the linear model `c` is the intercept c'.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFit<T> {
    pub kind: ModelKind,
    pub tr: Option<i32>,
    pub a: T,
    pub se_a: T,
    pub b: Option<T>,
    pub c: T,
    pub rss: T,
    pub r2: T,
    pub n_samples: usize,
}

/// The selected model plus the test statistic when both were available.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelChoice<T> {
    pub fit: ModelFit<T>,
    pub f_stat: Option<T>,
    pub f_pvalue: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HourlyFit<T> {
    pub customer_id: String,
    pub hour: u8,
    pub fit: ModelFit<T>,
    pub f_stat: Option<T>,
    pub f_pvalue: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseEstimate<T> {
    pub customer_id: String,
    pub hour: u8,
    pub delta_tr: T,
    pub mu: T,
    pub sigma: T,
    pub eligible: bool,
}
