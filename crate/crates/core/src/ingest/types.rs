use std::fmt;

use chrono::{NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};

use super::IngestError;

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:00";
pub const TEMP_MIN_F: f64 = -60.0;
pub const TEMP_MAX_F: f64 = 140.0;

/// A local clock hour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HourStamp(NaiveDateTime);

impl HourStamp {
    pub fn new(date: NaiveDate, hour: u8) -> Option<Self> {
        let time = NaiveTime::from_hms_opt(u32::from(hour), 0, 0)?;
        Some(Self(date.and_time(time)))
    }

    /// Parses `YYYY-MM-DDTHH:00` exactly.
    pub fn parse(s: &str) -> Result<Self, IngestError> {
        let bad = || IngestError::BadTimestamp(s.to_string());
        if s.len() != 16 || !s.ends_with(":00") {
            return Err(bad());
        }
        let dt = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M").map_err(|_| bad())?;
        if dt.minute() != 0 {
            return Err(bad());
        }
        Ok(Self(dt))
    }

    pub fn date(&self) -> NaiveDate {
        self.0.date()
    }

    pub fn hour(&self) -> u8 {
        self.0.hour() as u8
    }
}

impl fmt::Display for HourStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format(TIMESTAMP_FORMAT))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reading {
    pub at: HourStamp,
    pub value: f64,
}

fn check_increasing(key: &str, readings: &[Reading]) -> Result<(), IngestError> {
    if let Some(w) = readings.windows(2).find(|w| w[0].at >= w[1].at) {
        return Err(IngestError::InvalidSeries(format!(
            "{key}: timestamps not strictly increasing at {}",
            w[1].at
        )));
    }
    Ok(())
}

/// Hourly kWh readings of one customer.
#[derive(Debug, Clone, PartialEq)]
pub struct MeterSeries {
    customer_id: String,
    zip: String,
    readings: Vec<Reading>,
}

impl MeterSeries {
    pub fn new(
        customer_id: impl Into<String>,
        zip: impl Into<String>,
        readings: Vec<Reading>,
    ) -> Result<Self, IngestError> {
        let customer_id = customer_id.into();
        check_increasing(&customer_id, &readings)?;
        if let Some(r) = readings
            .iter()
            .find(|r| !r.value.is_finite() || r.value < 0.0)
        {
            return Err(IngestError::InvalidSeries(format!(
                "{customer_id}: load {} at {} must be finite and non-negative",
                r.value, r.at
            )));
        }
        Ok(Self {
            customer_id,
            zip: zip.into(),
            readings,
        })
    }

    pub fn customer_id(&self) -> &str {
        &self.customer_id
    }

    pub fn zip(&self) -> &str {
        &self.zip
    }

    pub fn readings(&self) -> &[Reading] {
        &self.readings
    }
}

/// Hourly outdoor temperatures (°F) for one zip code.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSeries {
    zip: String,
    readings: Vec<Reading>,
}

impl WeatherSeries {
    pub fn new(zip: impl Into<String>, readings: Vec<Reading>) -> Result<Self, IngestError> {
        let zip = zip.into();
        check_increasing(&zip, &readings)?;
        if let Some(r) = readings
            .iter()
            .find(|r| !r.value.is_finite() || !(TEMP_MIN_F..=TEMP_MAX_F).contains(&r.value))
        {
            return Err(IngestError::InvalidSeries(format!(
                "{zip}: temperature {} at {} outside [{TEMP_MIN_F}, {TEMP_MAX_F}] °F",
                r.value, r.at
            )));
        }
        Ok(Self { zip, readings })
    }

    pub fn zip(&self) -> &str {
        &self.zip
    }

    pub fn readings(&self) -> &[Reading] {
        &self.readings
    }
}

/// One joined observation: day index relative to the customer's first
/// meter reading, outdoor temperature and load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub day: i64,
    pub temp_f: f64,
    pub load_kwh: f64,
}

/// All joined samples of one customer at one hour of day.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinedObservations {
    pub customer_id: String,
    pub hour: u8,
    pub samples: Vec<Sample>,
}

impl JoinedObservations {
    pub fn temps(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.temp_f)
    }

    pub fn loads(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.load_kwh)
    }
}
