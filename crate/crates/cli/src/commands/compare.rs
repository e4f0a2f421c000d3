use std::path::PathBuf;

use clap::Args;
use drtarget_core::greedy::solve_greedy;
use drtarget_core::solver::{solve_exact, solve_heuristic, SolverError, EXACT_CANDIDATE_LIMIT};
use drtarget_core::{Portfolio, Problem};
use serde::{Deserialize, Serialize};

use super::load_pool;
use crate::error::Result;
use crate::manifest::{resolve, OutDir};

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CompareArgs {
    #[arg(long)]
    pub estimates: PathBuf,
    #[arg(long)]
    pub hour: Option<u8>,
    #[arg(long)]
    pub target: f64,
    #[arg(long)]
    pub n_max: usize,
    /// Heuristic sweep sizes to tabulate.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 5, 10, 20, 50])]
    pub iterations: Vec<usize>,
    #[arg(long)]
    pub allow_negative_mu: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: PathBuf,
}

fn row(alg: &str, m: Option<usize>, sel: Option<&Portfolio>, bound: Option<f64>, note: &str) -> [String; 9] {
    let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    [
        alg.to_string(),
        m.map(|m| m.to_string()).unwrap_or_default(),
        sel.map(|s| s.len().to_string()).unwrap_or_default(),
        num(sel.map(|s| s.total_mu)),
        num(sel.map(|s| s.total_sd())),
        num(sel.map(|s| s.rho)),
        num(sel.map(|s| s.reliability)),
        num(bound),
        note.to_string(),
    ]
}

/// Heuristic at every requested sweep size next to greedy and, for small
/// pools, the exact optimum.
pub fn run(args: &mut CompareArgs) -> Result<()> {
    args.estimates = resolve(&args.estimates)?;
    let loaded = load_pool(&args.estimates, args.hour, args.allow_negative_mu)?;
    let pool = &loaded.pool;
    let problem = Problem::from_sigma(pool.mu.clone(), &pool.sigma, args.n_max, args.target)?;

    let mut rows = Vec::new();
    for &m in &args.iterations {
        match solve_heuristic(&problem, m) {
            Ok(h) => rows.push(row("heuristic", Some(m), Some(&h.best), h.bound, "")),
            Err(SolverError::NoFeasiblePortfolio) => {
                rows.push(row("heuristic", Some(m), None, None, "no feasible portfolio"))
            }
            Err(e) => return Err(e.into()),
        }
    }
    rows.push(row("greedy", None, Some(&solve_greedy(&problem)), None, ""));
    if problem.len() <= EXACT_CANDIDATE_LIMIT {
        rows.push(row("oracle", None, Some(&solve_exact(&problem)?), None, ""));
    } else {
        rows.push(row("oracle", None, None, None, "skipped: pool too large"));
    }

    let mut dir = OutDir::create(&args.out_dir)?;
    dir.write("compare.csv", |w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([
            "algorithm", "iterations", "count", "total_mu", "total_sd", "rho", "reliability",
            "bound", "note",
        ])?;
        for r in &rows {
            wtr.write_record(r)?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    })?;
    dir.finish("compare", args, &[args.estimates.as_path()])?;
    for r in &rows {
        eprintln!("{:<9} M={:<3} reliability {} bound {}", r[0], r[1], r[6], r[7]);
    }
    Ok(())
}
