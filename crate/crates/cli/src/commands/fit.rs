use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::Args;
use drtarget_core::ingest::{join_weather, load_meter_csv, load_weather_csv, SchemaOptions};
use drtarget_core::response::{
    fit_population, write_estimates_csv, write_fit_report_csv, write_hourly_summary_csv,
    write_r2_histogram_csv, FitConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::manifest::{resolve, OutDir};

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// Meter CSV: customer_id,zip,timestamp,kwh.
    #[arg(long)]
    pub meter: PathBuf,
    /// Weather CSV: zip,timestamp,temp_f.
    #[arg(long)]
    pub weather: PathBuf,
    /// Hours of day to fit, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [17u8])]
    pub hours: Vec<u8>,
    /// Setpoint increase during an event, °F.
    #[arg(long, default_value_t = 3.0)]
    pub delta_tr: f64,
    /// F-test level for choosing the breakpoint model.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 20)]
    pub min_samples: usize,
    #[arg(long, default_value_t = 68)]
    pub tr_min: i32,
    #[arg(long, default_value_t = 86)]
    pub tr_max: i32,
    /// Minimum share of samples on each side of a breakpoint.
    #[arg(long, default_value_t = 0.15)]
    pub side_fraction: f64,
    /// Field delimiter of both input files.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: PathBuf,
}

pub fn run(args: &mut FitArgs) -> Result<()> {
    if !args.delimiter.is_ascii() {
        return Err(CliError::Validation("delimiter must be a single ASCII character".into()));
    }
    if let Some(h) = args.hours.iter().find(|&&h| h > 23) {
        return Err(CliError::Validation(format!("hour {h} outside 0..=23")));
    }
    let cfg = FitConfig {
        min_samples: args.min_samples,
        tr_min: args.tr_min,
        tr_max: args.tr_max,
        side_fraction: args.side_fraction,
        alpha: args.alpha,
    };
    cfg.validate()?;
    if !(args.delta_tr.is_finite() && args.delta_tr > 0.0) {
        return Err(CliError::Validation(format!("delta_tr {} must be > 0", args.delta_tr)));
    }
    args.meter = resolve(&args.meter)?;
    args.weather = resolve(&args.weather)?;

    let opts = SchemaOptions {
        delimiter: args.delimiter as u8,
        ..SchemaOptions::default()
    };
    let meters = load_meter_csv(&args.meter, &opts)?;
    let weather = load_weather_csv(&args.weather, &opts)?;
    let hours: BTreeSet<u8> = args.hours.iter().copied().collect();
    let joined = join_weather(&meters.series, &weather.series, Some(&hours))?;
    let hour_list: Vec<u8> = hours.iter().copied().collect();
    let pop = fit_population::<f64>(&joined, &hour_list, args.delta_tr, &cfg)?;

    let mut dir = OutDir::create(&args.out_dir)?;
    dir.write("fit_report.csv", |w| Ok(write_fit_report_csv(w, &pop.report.fits)?))?;
    dir.write("estimates.csv", |w| Ok(write_estimates_csv(w, &pop.estimates)?))?;
    dir.write("hourly_summary.csv", |w| {
        Ok(write_hourly_summary_csv(w, &pop.report.hourly)?)
    })?;
    dir.write("r2_histogram.csv", |w| {
        Ok(write_r2_histogram_csv(w, &pop.report.r2_histogram)?)
    })?;
    dir.write("exclusions.csv", |w| Ok(pop.report.write_exclusions_csv(w)?))?;
    dir.write("coverage.csv", |w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["customer_id", "meter_readings", "joined", "ratio"])?;
        for c in &joined.coverage {
            wtr.write_record([
                c.customer_id.clone(),
                c.meter_readings.to_string(),
                c.joined.to_string(),
                c.ratio.to_string(),
            ])?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    })?;
    dir.write("rejected_rows.csv", |w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["source", "line", "reason"])?;
        for (source, rows) in [("meter", &meters.rejected), ("weather", &weather.rejected)] {
            for r in rows {
                wtr.write_record([source.to_string(), r.line.to_string(), r.reason.clone()])?;
            }
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    })?;
    dir.finish("fit", args, &[args.meter.as_path(), args.weather.as_path()])?;

    let rejected = meters.rejected.len() + weather.rejected.len();
    if rejected > 0 {
        eprintln!("warning: {rejected} input rows rejected; see rejected_rows.csv");
    }
    if !joined.flagged.is_empty() {
        eprintln!(
            "warning: {} customers have no joined samples",
            joined.flagged.len()
        );
    }
    let eligible = pop.estimates.iter().filter(|e| e.eligible).count();
    eprintln!(
        "fitted {} customer-hours, {} eligible, {} excluded",
        pop.report.fits.len(),
        eligible,
        pop.report.exclusions.len()
    );
    if eligible == 0 {
        return Err(CliError::Data("no eligible customers".into()));
    }
    Ok(())
}
