//! Hourly meter and weather data: loading, validation, joining, and a
//! seeded synthetic population generator with known ground truth.
//!
//! Timestamps are local clock hours (`YYYY-MM-DDTHH:00`) with no daylight
//! saving arithmetic; a reading stamped hour `h` belongs to bucket `h`.
//! Temperatures are degrees Fahrenheit throughout. Missing hours are simply
//! absent; nothing is imputed.

mod csv_io;
mod join;
mod synth;
mod types;

pub use csv_io::{
    load_meter_csv, load_weather_csv, read_ground_truth_csv, read_meter_csv, read_weather_csv,
    write_ground_truth_csv, write_meter_csv, write_weather_csv, Loaded, MeterColumns,
    RejectedRow, SchemaOptions, WeatherColumns,
};
pub use join::{join_weather, Coverage, JoinResult};
pub use synth::{synth_population, GroundTruth, SynthOutput, SynthSpec, TempProfile, TruthModel};
pub use types::{
    HourStamp, JoinedObservations, MeterSeries, Reading, Sample, WeatherSeries, TEMP_MAX_F,
    TEMP_MIN_F, TIMESTAMP_FORMAT,
};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{source_name}: {source}")]
    Csv {
        source_name: String,
        #[source]
        source: csv::Error,
    },
    #[error("{source_name}: missing required column(s): {}", missing.join(", "))]
    MissingColumns {
        source_name: String,
        missing: Vec<String>,
    },
    #[error("{source_name}: duplicate readings for {}", format_duplicates(offenders))]
    Duplicates {
        source_name: String,
        /// `(series key, timestamp)` pairs that occur more than once.
        offenders: Vec<(String, String)>,
    },
    #[error("no weather series for zip code(s): {}", zips.join(", "))]
    MissingWeather { zips: Vec<String> },
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("invalid timestamp {0:?}: expected YYYY-MM-DDTHH:00")]
    BadTimestamp(String),
    #[error("invalid synthetic population spec: {0}")]
    InvalidSpec(String),
}

fn format_duplicates(offenders: &[(String, String)]) -> String {
    const SHOWN: usize = 10;
    let mut s = offenders
        .iter()
        .take(SHOWN)
        .map(|(k, t)| format!("{k}@{t}"))
        .collect::<Vec<_>>()
        .join(", ");
    if offenders.len() > SHOWN {
        s.push_str(&format!(" and {} more", offenders.len() - SHOWN));
    }
    s
}
