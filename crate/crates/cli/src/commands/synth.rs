use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, ValueEnum};
use drtarget_core::ingest::{
    synth_population, write_ground_truth_csv, write_meter_csv, write_weather_csv, SynthSpec,
    TempProfile,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::manifest::OutDir;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Hot,
    Cool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SynthArgs {
    /// Number of customers.
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    /// Share of customers with a breakpoint (AC) response.
    #[arg(long, default_value_t = 0.6)]
    pub fraction_ac: f64,
    /// Cooling slope range, kWh/°F, as `min,max`.
    #[arg(long, value_delimiter = ',', num_args = 1, default_values_t = [0.1, 0.5])]
    pub a_range: Vec<f64>,
    /// Sub-breakpoint slope range (also the slope of non-AC customers).
    #[arg(long, value_delimiter = ',', num_args = 1, default_values_t = [-0.02, 0.05], allow_hyphen_values = true)]
    pub b_range: Vec<f64>,
    /// Base load range, kWh.
    #[arg(long, value_delimiter = ',', num_args = 1, default_values_t = [0.5, 2.0])]
    pub c_range: Vec<f64>,
    /// Breakpoint range, integer °F within 68..=86.
    #[arg(long, value_delimiter = ',', num_args = 1, default_values_t = [74, 84])]
    pub tr_range: Vec<i32>,
    /// Standard deviation of the hourly load noise, kWh.
    #[arg(long, default_value_t = 0.2)]
    pub noise_sd: f64,
    #[arg(long, value_enum, default_value_t = Profile::Hot)]
    pub profile: Profile,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 90)]
    pub days: u32,
    #[arg(long, default_value = "2011-05-01")]
    pub start_date: NaiveDate,
    #[arg(long, default_value = "93701")]
    pub zip: String,
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: PathBuf,
}

fn pair<T: Copy>(name: &str, v: &[T]) -> Result<(T, T)> {
    match v {
        [lo, hi] => Ok((*lo, *hi)),
        _ => Err(CliError::Validation(format!(
            "--{name} takes exactly two values as min,max, got {}",
            v.len()
        ))),
    }
}

impl SynthArgs {
    pub fn spec(&self) -> Result<SynthSpec> {
        Ok(SynthSpec {
            count: self.count,
            fraction_ac: self.fraction_ac,
            a_range: pair("a-range", &self.a_range)?,
            b_range: pair("b-range", &self.b_range)?,
            c_range: pair("c-range", &self.c_range)?,
            tr_range: pair("tr-range", &self.tr_range)?,
            noise_sd: self.noise_sd,
            temp_profile: match self.profile {
                Profile::Hot => TempProfile::hot(),
                Profile::Cool => TempProfile::cool(),
            },
            seed: self.seed,
            days: self.days,
            start_date: self.start_date,
            zip: self.zip.clone(),
        })
    }
}

pub fn run(args: &SynthArgs) -> Result<()> {
    let out = synth_population(&args.spec()?)?;
    let mut dir = OutDir::create(&args.out_dir)?;
    dir.write("meter.csv", |w| Ok(write_meter_csv(w, &out.meters)?))?;
    dir.write("weather.csv", |w| Ok(write_weather_csv(w, &[out.weather.clone()])?))?;
    dir.write("ground_truth.csv", |w| Ok(write_ground_truth_csv(w, &out.truth)?))?;
    dir.finish("synth", args, &[])?;
    eprintln!(
        "wrote {} customers x {} days to {}",
        args.count,
        args.days,
        args.out_dir.display()
    );
    Ok(())
}
