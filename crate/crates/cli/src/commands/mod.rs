pub mod compare;
pub mod fit;
pub mod replay;
pub mod select;
pub mod synth;
pub mod tradeoff;

use std::fs::File;
use std::path::Path;

use drtarget_core::response::{candidate_pool, read_estimates_csv};
use drtarget_core::{Estimate, Pool};

use crate::error::{CliError, Result};

/// Candidate pool of one hour from an estimates file, plus the ΔTr the
/// estimates were computed with.
pub struct LoadedPool {
    pub pool: Pool,
    pub delta_tr: f64,
}

pub fn load_pool(path: &Path, hour: Option<u8>, allow_negative_mu: bool) -> Result<LoadedPool> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let estimates: Vec<Estimate> = read_estimates_csv(file, &path.display().to_string())?;
    let mut hours: Vec<u8> = estimates.iter().map(|e| e.hour).collect();
    hours.sort_unstable();
    hours.dedup();
    let hour = match (hour, hours.as_slice()) {
        (Some(h), _) => h,
        (None, [h]) => *h,
        (None, []) => return Err(CliError::Data(format!("{}: no estimates", path.display()))),
        (None, _) => {
            return Err(CliError::Validation(format!(
                "{} holds hours {hours:?}; pick one with --hour",
                path.display()
            )))
        }
    };
    let pool = candidate_pool(&estimates, hour, allow_negative_mu);
    if pool.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no eligible candidates at hour {hour}",
            path.display()
        )));
    }
    let delta_tr = estimates
        .iter()
        .find(|e| e.hour == hour)
        .map_or(0.0, |e| e.delta_tr);
    Ok(LoadedPool { pool, delta_tr })
}

/// `start:end:step` (inclusive) or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || CliError::Validation(format!("bad grid {text:?}: use start:end:step or a,b,c"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let (start, end, step) = (v[0], v[1], v[2]);
        if !(step > 0.0) || !start.is_finite() || !end.is_finite() || end < start {
            return Err(bad());
        }
        let count = ((end - start) / step + 1e-9).floor() as usize;
        return Ok((0..=count).map(|i| start + step * i as f64).collect());
    }
    text.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

pub fn parse_n_grid(text: &str) -> Result<Vec<usize>> {
    let bad = || CliError::Validation(format!("bad N grid {text:?}: integers expected"));
    parse_grid(text)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(bad())
            }
        })
        .collect()
}
