use std::path::PathBuf;

use clap::{Args, ValueEnum};
use drtarget_core::tradeoff::{
    min_n_for_target, monotonicity_violations, reliability_vs_n, reliability_vs_target,
    Algorithm, CurveKind,
};
use drtarget_core::{Curve, Problem};
use serde::{Deserialize, Serialize};

use super::select::AlgorithmArg;
use super::{load_pool, parse_grid, parse_n_grid};
use crate::error::{CliError, Result};
use crate::manifest::{resolve, OutDir};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Kind {
    /// Reliability against the target at fixed N.
    #[value(name = "rel-vs-t")]
    #[serde(rename = "rel-vs-t")]
    RelVsT,
    /// Reliability against N at a fixed target.
    #[value(name = "rel-vs-n")]
    #[serde(rename = "rel-vs-n")]
    RelVsN,
    /// Smallest N reaching `--p-min` for each target.
    #[value(name = "minn-vs-t")]
    #[serde(rename = "minn-vs-t")]
    MinNVsT,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TradeoffArgs {
    #[arg(long)]
    pub estimates: PathBuf,
    #[arg(long)]
    pub hour: Option<u8>,
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Target grid, `start:end:step` or a list, kWh.
    #[arg(long, default_value = "200:4000:200")]
    pub t_grid: String,
    /// N grid for `rel-vs-n`; defaults to every N from 1 to the pool size.
    #[arg(long)]
    pub n_grid: Option<String>,
    /// Fixed N for `rel-vs-t`.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Fixed target for `rel-vs-n`, kWh.
    #[arg(long)]
    pub target: Option<f64>,
    /// Reliability level for `minn-vs-t`.
    #[arg(long, default_value_t = 0.95)]
    pub p_min: f64,
    #[arg(long, default_value_t = 10)]
    pub iterations: usize,
    /// Algorithms to trace, comma separated (`minn-vs-t` uses the heuristic).
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [AlgorithmArg::Heuristic])]
    pub algorithms: Vec<AlgorithmArg>,
    #[arg(long)]
    pub allow_negative_mu: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: PathBuf,
}

fn algorithm(a: AlgorithmArg) -> Algorithm {
    match a {
        AlgorithmArg::Heuristic => Algorithm::Heuristic,
        AlgorithmArg::Greedy => Algorithm::Greedy,
        AlgorithmArg::Oracle => Algorithm::Oracle,
    }
}

#[derive(Serialize)]
struct Params {
    kind: CurveKind,
    hour: u8,
    delta_tr: f64,
    candidates: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_min: Option<f64>,
    iterations: usize,
    algorithm: Algorithm,
}

pub fn run(args: &mut TradeoffArgs) -> Result<()> {
    args.estimates = resolve(&args.estimates)?;
    let loaded = load_pool(&args.estimates, args.hour, args.allow_negative_mu)?;
    let pool = &loaded.pool;
    let k = pool.len();
    let t_grid = parse_grid(&args.t_grid)?;

    let mut curves: Vec<(Curve, Params)> = Vec::new();
    let params = |kind, alg, n_max, target, p_min| Params {
        kind,
        hour: pool.hour,
        delta_tr: loaded.delta_tr,
        candidates: k,
        n_max,
        target,
        p_min,
        iterations: args.iterations,
        algorithm: alg,
    };
    match args.kind {
        Kind::RelVsT => {
            let n = args
                .n_max
                .ok_or_else(|| CliError::Validation("rel-vs-t needs --n-max".into()))?;
            let base = Problem::from_sigma(pool.mu.clone(), &pool.sigma, n, t_grid[0])?;
            for &a in &args.algorithms {
                let alg = algorithm(a);
                let curve = reliability_vs_target(&base, &t_grid, alg, args.iterations)?;
                curves.push((curve, params(CurveKind::ReliabilityVsTarget, alg, Some(n), None, None)));
            }
        }
        Kind::RelVsN => {
            let t = args
                .target
                .ok_or_else(|| CliError::Validation("rel-vs-n needs --target".into()))?;
            let n_grid = match &args.n_grid {
                Some(g) => parse_n_grid(g)?,
                None => (1..=k).collect(),
            };
            let base = Problem::from_sigma(pool.mu.clone(), &pool.sigma, k, t)?;
            for &a in &args.algorithms {
                let alg = algorithm(a);
                let curve = reliability_vs_n(&base, &n_grid, alg, args.iterations)?;
                curves.push((curve, params(CurveKind::ReliabilityVsN, alg, None, Some(t), None)));
            }
        }
        Kind::MinNVsT => {
            let base = Problem::from_sigma(pool.mu.clone(), &pool.sigma, k, t_grid[0])?;
            let curve = min_n_for_target(&base, &t_grid, args.p_min, args.iterations)?;
            curves.push((
                curve,
                params(CurveKind::MinNVsTarget, Algorithm::Heuristic, None, None, Some(args.p_min)),
            ));
        }
    }

    let mut dir = OutDir::create(&args.out_dir)?;
    dir.write("curve.csv", |w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["control", "value", "algorithm", "params_json"])?;
        for (curve, p) in &curves {
            let json = serde_json::to_string(p).expect("params serialize");
            for pt in &curve.points {
                wtr.write_record([
                    pt.control.to_string(),
                    pt.value.map(|v| v.to_string()).unwrap_or_default(),
                    curve.algorithm.as_str().to_string(),
                    json.clone(),
                ])?;
            }
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    })?;
    let mut unreachable = 0usize;
    if args.kind == Kind::MinNVsT {
        dir.write("certificates.csv", |w| {
            let mut wtr = csv::Writer::from_writer(w);
            wtr.write_record(["target", "n_min", "reliability_at", "reliability_below", "status"])?;
            for pt in &curves[0].0.points {
                match &pt.certificate {
                    Some(c) => wtr.write_record([
                        pt.control.to_string(),
                        c.n_min.to_string(),
                        c.reliability_at.to_string(),
                        c.reliability_below.map(|v| v.to_string()).unwrap_or_default(),
                        "reached".to_string(),
                    ])?,
                    None => {
                        unreachable += 1;
                        wtr.write_record([
                            pt.control.to_string(),
                            String::new(),
                            String::new(),
                            String::new(),
                            "unreachable".to_string(),
                        ])?
                    }
                }
            }
            wtr.flush().map_err(csv::Error::from)?;
            Ok(())
        })?;
    } else {
        dir.write("monotonicity.csv", |w| {
            let mut wtr = csv::Writer::from_writer(w);
            wtr.write_record(["algorithm", "control", "magnitude"])?;
            for (curve, _) in &curves {
                let increasing = args.kind == Kind::RelVsN;
                for v in monotonicity_violations(curve, increasing) {
                    wtr.write_record([
                        curve.algorithm.as_str().to_string(),
                        v.control.to_string(),
                        v.magnitude.to_string(),
                    ])?;
                }
            }
            wtr.flush().map_err(csv::Error::from)?;
            Ok(())
        })?;
    }
    dir.finish("tradeoff", args, &[args.estimates.as_path()])?;

    let points = curves[0].0.points.len();
    if unreachable > 0 {
        eprintln!("{unreachable} of {points} targets unreachable at p_min {}", args.p_min);
    }
    if points > 0 && unreachable == points {
        return Err(CliError::Infeasible("no target in the grid is reachable".into()));
    }
    Ok(())
}
