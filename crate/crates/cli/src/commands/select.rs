use std::fs::File;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use drtarget_core::greedy::solve_greedy;
use drtarget_core::solver::{
    solve_exact, solve_heuristic, Slope, SweepBranch, EXACT_CANDIDATE_LIMIT,
};
use drtarget_core::{Heuristic, Portfolio, Problem};
use serde::{Deserialize, Serialize};

use super::{load_pool, LoadedPool};
use crate::error::{CliError, Result};
use crate::manifest::{resolve, OutDir};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmArg {
    Heuristic,
    Greedy,
    Oracle,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SelectArgs {
    /// Estimates CSV written by `fit`.
    #[arg(long)]
    pub estimates: PathBuf,
    /// Hour to select for; required when the file holds several.
    #[arg(long)]
    pub hour: Option<u8>,
    /// Aggregate response target, kWh.
    #[arg(long)]
    pub target: f64,
    /// Maximum number of customers.
    #[arg(long, required_unless_present = "costs")]
    pub n_max: Option<usize>,
    /// Per-customer costs (customer_id,cost); only uniform costs are supported.
    #[arg(long, requires = "budget")]
    pub costs: Option<PathBuf>,
    /// Total budget in the units of `--costs`.
    #[arg(long)]
    pub budget: Option<f64>,
    /// Full response covariance matrix CSV (rows and columns in pool order);
    /// only diagonal matrices are supported.
    #[arg(long)]
    pub covariance: Option<PathBuf>,
    /// Number of slope steps M of the heuristic sweep.
    #[arg(long, default_value_t = 10)]
    pub iterations: usize,
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Heuristic)]
    pub algorithm: AlgorithmArg,
    /// Run heuristic, greedy and (when small enough) the exact search.
    #[arg(long)]
    pub compare: bool,
    /// Keep eligible customers with a negative mean response.
    #[arg(long)]
    pub allow_negative_mu: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Serialize)]
struct PointOut {
    lambda_index: usize,
    /// `null` for the mean-only endpoint.
    lambda_prime: Option<f64>,
    branch: SweepBranch,
    count: usize,
    total_mu: f64,
    total_sd: f64,
    rho: f64,
}

#[derive(Debug, Serialize)]
struct ResultOut {
    algorithm: AlgorithmArg,
    status: String,
    chosen: Vec<String>,
    count: usize,
    total_mu: f64,
    total_sd: f64,
    rho: Option<f64>,
    reliability: f64,
    bound: Option<f64>,
    extreme_points: Vec<PointOut>,
}

#[derive(Debug, Serialize)]
struct SelectionOut<'a> {
    hour: u8,
    delta_tr: f64,
    candidates: usize,
    target: f64,
    n_max: usize,
    results: Vec<ResultOut>,
    config: &'a SelectArgs,
    version: &'static str,
}

fn result_out(
    algorithm: AlgorithmArg,
    sel: &Portfolio,
    ids: &[String],
    heuristic: Option<&Heuristic>,
) -> ResultOut {
    ResultOut {
        algorithm,
        status: "ok".into(),
        chosen: sel.chosen.iter().map(|&k| ids[k].clone()).collect(),
        count: sel.len(),
        total_mu: sel.total_mu,
        total_sd: sel.total_sd(),
        rho: sel.rho.is_finite().then_some(sel.rho),
        reliability: sel.reliability,
        bound: heuristic.and_then(|h| h.bound),
        extreme_points: heuristic.map_or_else(Vec::new, |h| {
            h.extreme_points
                .iter()
                .map(|p| PointOut {
                    lambda_index: p.lambda_index,
                    lambda_prime: match p.lambda_prime {
                        Slope::Finite(v) => Some(v),
                        Slope::Infinite => None,
                    },
                    branch: p.branch,
                    count: p.selection.len(),
                    total_mu: p.selection.total_mu,
                    total_sd: p.selection.total_sd(),
                    rho: p.selection.rho,
                })
                .collect()
        }),
    }
}

fn skipped(algorithm: AlgorithmArg, reason: String) -> ResultOut {
    ResultOut {
        algorithm,
        status: reason,
        chosen: Vec::new(),
        count: 0,
        total_mu: 0.0,
        total_sd: 0.0,
        rho: None,
        reliability: 0.0,
        bound: None,
        extreme_points: Vec::new(),
    }
}

fn read_costs(path: &Path, ids: &[String]) -> Result<Vec<f64>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let mut by_id = std::collections::HashMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let cost: f64 = rec.get(1).unwrap_or("").trim().parse().map_err(|_| {
            CliError::Data(format!("{}: bad cost on line {:?}", path.display(), rec.position().map(|p| p.line())))
        })?;
        by_id.insert(rec.get(0).unwrap_or("").trim().to_string(), cost);
    }
    ids.iter()
        .map(|id| {
            by_id
                .get(id)
                .copied()
                .ok_or_else(|| CliError::Data(format!("{}: no cost for {id}", path.display())))
        })
        .collect()
}

fn read_matrix(path: &Path, k: usize) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(file);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| CliError::Data(format!("{}: non-numeric entry", path.display())))?;
        rows.push(row);
    }
    if rows.len() != k || rows.iter().any(|r| r.len() != k) {
        return Err(CliError::Data(format!(
            "{}: expected a {k}x{k} matrix",
            path.display()
        )));
    }
    Ok(rows)
}

pub fn build_problem(args: &SelectArgs, loaded: &LoadedPool) -> Result<Problem> {
    let pool = &loaded.pool;
    if args.costs.is_some() && args.covariance.is_some() {
        return Err(CliError::Validation("--costs and --covariance cannot be combined".into()));
    }
    if let Some(path) = &args.covariance {
        let n = args
            .n_max
            .ok_or_else(|| CliError::Validation("--covariance needs --n-max".into()))?;
        let matrix = read_matrix(path, pool.len())?;
        return Ok(Problem::from_covariance(pool.mu.clone(), &matrix, n, args.target)?);
    }
    if let Some(path) = &args.costs {
        let costs = read_costs(path, &pool.ids)?;
        let budget = args.budget.expect("clap enforces --budget");
        let var = pool.sigma.iter().map(|s| s * s).collect();
        return Ok(Problem::from_costs(pool.mu.clone(), var, &costs, budget, args.target)?);
    }
    let n = args.n_max.expect("clap enforces --n-max");
    Ok(Problem::from_sigma(pool.mu.clone(), &pool.sigma, n, args.target)?)
}

pub fn run(args: &mut SelectArgs) -> Result<()> {
    args.estimates = resolve(&args.estimates)?;
    for p in [&mut args.costs, &mut args.covariance].into_iter().flatten() {
        *p = resolve(p)?;
    }
    let loaded = load_pool(&args.estimates, args.hour, args.allow_negative_mu)?;
    let problem = build_problem(args, &loaded)?;
    let ids = &loaded.pool.ids;

    let algorithms: Vec<AlgorithmArg> = if args.compare {
        vec![AlgorithmArg::Heuristic, AlgorithmArg::Greedy, AlgorithmArg::Oracle]
    } else {
        vec![args.algorithm]
    };
    let mut results = Vec::new();
    for alg in algorithms {
        let out = match alg {
            AlgorithmArg::Heuristic => match solve_heuristic(&problem, args.iterations) {
                Ok(h) => result_out(alg, &h.best, ids, Some(&h)),
                Err(e) => return Err(e.into()),
            },
            AlgorithmArg::Greedy => result_out(alg, &solve_greedy(&problem), ids, None),
            AlgorithmArg::Oracle => {
                if args.compare && problem.len() > EXACT_CANDIDATE_LIMIT {
                    skipped(
                        alg,
                        format!("skipped: {} candidates exceed the exact limit {EXACT_CANDIDATE_LIMIT}", problem.len()),
                    )
                } else {
                    result_out(alg, &solve_exact(&problem)?, ids, None)
                }
            }
        };
        results.push(out);
    }

    let doc = SelectionOut {
        hour: loaded.pool.hour,
        delta_tr: loaded.delta_tr,
        candidates: problem.len(),
        target: args.target,
        n_max: problem.n_max(),
        results,
        config: args,
        version: env!("CARGO_PKG_VERSION"),
    };
    for r in &doc.results {
        if r.status == "ok" {
            eprintln!(
                "{:?}: {} customers, mean {:.3} kWh, sd {:.3} kWh, reliability {:.6}",
                r.algorithm, r.count, r.total_mu, r.total_sd, r.reliability
            );
        }
    }
    let mut dir = OutDir::create(&args.out_dir)?;
    dir.write("selection.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &doc)
            .map_err(|e| CliError::Data(e.to_string()))?;
        w.push(b'\n');
        Ok(())
    })?;
    let mut inputs = vec![args.estimates.as_path()];
    inputs.extend(args.costs.as_deref());
    inputs.extend(args.covariance.as_deref());
    dir.finish("select", args, &inputs)?;
    Ok(())
}
