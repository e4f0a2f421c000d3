use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;

use super::{compare, fit, select, synth, tradeoff};
use crate::error::{CliError, Result};
use crate::manifest::{read_manifest, sha256_file, Manifest};

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// manifest.json of an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Where to regenerate; defaults to `replay/` next to the manifest.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn config<T: DeserializeOwned>(m: &Manifest) -> Result<T> {
    serde_json::from_value(m.config.clone())
        .map_err(|e| CliError::Data(format!("manifest config for {}: {e}", m.command)))
}

/// Re-runs the recorded command and compares every artifact hash.
pub fn run(args: &ReplayArgs) -> Result<()> {
    let manifest = read_manifest(&args.manifest)?;
    if manifest.version != env!("CARGO_PKG_VERSION") {
        eprintln!(
            "warning: manifest written by version {}, replaying with {}",
            manifest.version,
            env!("CARGO_PKG_VERSION")
        );
    }
    for input in &manifest.inputs {
        let now = sha256_file(Path::new(&input.path))?;
        if now != input.sha256 {
            return Err(CliError::Data(format!("input {} changed since the run", input.path)));
        }
    }
    let out_dir = args.out_dir.clone().unwrap_or_else(|| {
        args.manifest
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join("replay")
    });
    match manifest.command.as_str() {
        "synth" => {
            let mut c: synth::SynthArgs = config(&manifest)?;
            c.out_dir = out_dir.clone();
            synth::run(&c)?;
        }
        "fit" => {
            let mut c: fit::FitArgs = config(&manifest)?;
            c.out_dir = out_dir.clone();
            fit::run(&mut c)?;
        }
        "select" => {
            let mut c: select::SelectArgs = config(&manifest)?;
            c.out_dir = out_dir.clone();
            select::run(&mut c)?;
        }
        "tradeoff" => {
            let mut c: tradeoff::TradeoffArgs = config(&manifest)?;
            c.out_dir = out_dir.clone();
            tradeoff::run(&mut c)?;
        }
        "compare" => {
            let mut c: compare::CompareArgs = config(&manifest)?;
            c.out_dir = out_dir.clone();
            compare::run(&mut c)?;
        }
        other => return Err(CliError::Data(format!("unknown command {other:?} in manifest"))),
    }

    let mut mismatched = Vec::new();
    for artifact in &manifest.artifacts {
        let now = sha256_file(&out_dir.join(&artifact.path))?;
        let same = now == artifact.sha256;
        println!("{} {}", if same { "identical" } else { "DIFFERENT" }, artifact.path);
        if !same {
            mismatched.push(artifact.path.clone());
        }
    }
    if mismatched.is_empty() {
        Ok(())
    } else {
        Err(CliError::Data(format!("artifacts differ: {}", mismatched.join(", "))))
    }
}
