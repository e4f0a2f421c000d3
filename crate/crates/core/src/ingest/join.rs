use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::types::{JoinedObservations, MeterSeries, Sample, WeatherSeries};
use super::IngestError;

/// Share of a customer's meter readings (inside the hour filter) that found
/// a matching temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct Coverage {
    pub customer_id: String,
    pub meter_readings: usize,
    pub joined: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoinResult {
    /// Non-empty buckets, sorted by `(customer_id, hour)`.
    pub observations: Vec<JoinedObservations>,
    /// One entry per meter series, sorted by customer id.
    pub coverage: Vec<Coverage>,
    /// Customers with no joined sample at all.
    pub flagged: Vec<String>,
}

/// Inner-joins meter readings with the weather series of the meter's zip
/// and buckets the result by hour of day. `hours` restricts the buckets
/// kept; `None` keeps all 24.
pub fn join_weather(
    meters: &[MeterSeries],
    weathers: &[WeatherSeries],
    hours: Option<&BTreeSet<u8>>,
) -> Result<JoinResult, IngestError> {
    let by_zip: HashMap<&str, &WeatherSeries> = weathers.iter().map(|w| (w.zip(), w)).collect();
    let missing: BTreeSet<&str> = meters
        .iter()
        .map(|m| m.zip())
        .filter(|z| !by_zip.contains_key(z))
        .collect();
    if !missing.is_empty() {
        return Err(IngestError::MissingWeather {
            zips: missing.into_iter().map(String::from).collect(),
        });
    }

    let mut sorted: Vec<&MeterSeries> = meters.iter().collect();
    sorted.sort_by(|a, b| a.customer_id().cmp(b.customer_id()));

    let keep = |h: u8| hours.map_or(true, |set| set.contains(&h));
    let mut result = JoinResult {
        observations: Vec::new(),
        coverage: Vec::with_capacity(sorted.len()),
        flagged: Vec::new(),
    };
    for meter in sorted {
        let weather = by_zip[meter.zip()].readings();
        let readings = meter.readings();
        let Some(first) = readings.first() else {
            result.coverage.push(Coverage {
                customer_id: meter.customer_id().to_string(),
                meter_readings: 0,
                joined: 0,
                ratio: 0.0,
            });
            result.flagged.push(meter.customer_id().to_string());
            continue;
        };
        let day0 = first.at.date();
        let mut buckets: BTreeMap<u8, Vec<Sample>> = BTreeMap::new();
        let mut considered = 0usize;
        let mut joined = 0usize;
        let mut w = 0usize;
        for r in readings {
            if !keep(r.at.hour()) {
                continue;
            }
            considered += 1;
            while w < weather.len() && weather[w].at < r.at {
                w += 1;
            }
            if w < weather.len() && weather[w].at == r.at {
                joined += 1;
                buckets.entry(r.at.hour()).or_default().push(Sample {
                    day: (r.at.date() - day0).num_days(),
                    temp_f: weather[w].value,
                    load_kwh: r.value,
                });
            }
        }
        result.coverage.push(Coverage {
            customer_id: meter.customer_id().to_string(),
            meter_readings: considered,
            joined,
            ratio: if considered == 0 {
                0.0
            } else {
                joined as f64 / considered as f64
            },
        });
        if joined == 0 {
            result.flagged.push(meter.customer_id().to_string());
        }
        for (hour, samples) in buckets {
            result.observations.push(JoinedObservations {
                customer_id: meter.customer_id().to_string(),
                hour,
                samples,
            });
        }
    }
    Ok(result)
}
