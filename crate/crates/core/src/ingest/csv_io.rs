use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::synth::{GroundTruth, TruthModel};
use super::types::{HourStamp, MeterSeries, Reading, WeatherSeries, TEMP_MAX_F, TEMP_MIN_F};
use super::IngestError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeterColumns {
    pub customer_id: String,
    pub zip: String,
    pub timestamp: String,
    pub kwh: String,
}

impl Default for MeterColumns {
    fn default() -> Self {
        Self {
            customer_id: "customer_id".into(),
            zip: "zip".into(),
            timestamp: "timestamp".into(),
            kwh: "kwh".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeatherColumns {
    pub zip: String,
    pub timestamp: String,
    pub temp_f: String,
}

impl Default for WeatherColumns {
    fn default() -> Self {
        Self {
            zip: "zip".into(),
            timestamp: "timestamp".into(),
            temp_f: "temp_f".into(),
        }
    }
}

/// Column names and delimiter for the input files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaOptions {
    pub delimiter: u8,
    pub meter: MeterColumns,
    pub weather: WeatherColumns,
}

impl Default for SchemaOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            meter: MeterColumns::default(),
            weather: WeatherColumns::default(),
        }
    }
}

/// A data row that could not be used, with its 1-based file line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedRow {
    pub line: u64,
    pub reason: String,
}

/// Parsed series plus every row that was rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded<S> {
    pub series: Vec<S>,
    pub rejected: Vec<RejectedRow>,
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_err(source_name: &str) -> impl Fn(csv::Error) -> IngestError + '_ {
    move |source| IngestError::Csv {
        source_name: source_name.to_string(),
        source,
    }
}

fn column_indices(
    headers: &csv::StringRecord,
    wanted: &[&str],
    source_name: &str,
) -> Result<Vec<usize>, IngestError> {
    let mut found = Vec::with_capacity(wanted.len());
    let mut missing = Vec::new();
    for &name in wanted {
        match headers.iter().position(|h| h.trim() == name) {
            Some(i) => found.push(i),
            None => missing.push(name.to_string()),
        }
    }
    if missing.is_empty() {
        Ok(found)
    } else {
        Err(IngestError::MissingColumns {
            source_name: source_name.to_string(),
            missing,
        })
    }
}

/// Rows grouped by series key, with line numbers for duplicate reporting.
struct Grouped {
    rows: BTreeMap<String, (String, Vec<(u64, Reading)>)>,
    rejected: Vec<RejectedRow>,
}

fn read_rows<R: Read>(
    reader: R,
    delimiter: u8,
    columns: &[&str],
    source_name: &str,
    mut parse: impl FnMut(&[&str]) -> Result<(String, String, Reading), String>,
) -> Result<Grouped, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_err(source_name))?.clone();
    let idx = column_indices(&headers, columns, source_name)?;
    let mut grouped = Grouped {
        rows: BTreeMap::new(),
        rejected: Vec::new(),
    };
    for record in rdr.records() {
        let record = record.map_err(csv_err(source_name))?;
        let line = record.position().map_or(0, |p| p.line());
        let fields: Option<Vec<&str>> = idx.iter().map(|&i| record.get(i).map(str::trim)).collect();
        let Some(fields) = fields else {
            grouped.rejected.push(RejectedRow {
                line,
                reason: format!("expected at least {} fields", headers.len()),
            });
            continue;
        };
        match parse(&fields) {
            Ok((key, zip, reading)) => {
                let entry = grouped
                    .rows
                    .entry(key.clone())
                    .or_insert_with(|| (zip.clone(), Vec::new()));
                if entry.0 != zip {
                    grouped.rejected.push(RejectedRow {
                        line,
                        reason: format!("{key}: zip {zip} conflicts with earlier zip {}", entry.0),
                    });
                    continue;
                }
                entry.1.push((line, reading));
            }
            Err(reason) => grouped.rejected.push(RejectedRow { line, reason }),
        }
    }
    Ok(grouped)
}

/// Sorts each group by time and reports every repeated `(key, timestamp)`.
fn sorted_groups(
    grouped: BTreeMap<String, (String, Vec<(u64, Reading)>)>,
    source_name: &str,
) -> Result<Vec<(String, String, Vec<Reading>)>, IngestError> {
    let mut out = Vec::with_capacity(grouped.len());
    let mut offenders = Vec::new();
    for (key, (zip, mut rows)) in grouped {
        rows.sort_by_key(|(line, r)| (r.at, *line));
        let mut readings: Vec<Reading> = Vec::with_capacity(rows.len());
        for (_, r) in rows {
            match readings.last() {
                Some(prev) if prev.at == r.at => {
                    if offenders.last() != Some(&(key.clone(), r.at.to_string())) {
                        offenders.push((key.clone(), r.at.to_string()));
                    }
                }
                _ => readings.push(r),
            }
        }
        out.push((key, zip, readings));
    }
    if offenders.is_empty() {
        Ok(out)
    } else {
        Err(IngestError::Duplicates {
            source_name: source_name.to_string(),
            offenders,
        })
    }
}

fn parse_number(field: &str, what: &str) -> Result<f64, String> {
    field
        .parse::<f64>()
        .map_err(|_| format!("{what} {field:?} is not a number"))
}

/// Reads meter rows (`customer_id,zip,timestamp,kwh`); one series per
/// customer, sorted by customer id and time.
pub fn read_meter_csv<R: Read>(
    reader: R,
    options: &SchemaOptions,
    source_name: &str,
) -> Result<Loaded<MeterSeries>, IngestError> {
    let c = &options.meter;
    let columns = [
        c.customer_id.as_str(),
        c.zip.as_str(),
        c.timestamp.as_str(),
        c.kwh.as_str(),
    ];
    let grouped = read_rows(reader, options.delimiter, &columns, source_name, |f| {
        if f[0].is_empty() {
            return Err("empty customer_id".into());
        }
        if f[1].is_empty() {
            return Err("empty zip".into());
        }
        let at = HourStamp::parse(f[2]).map_err(|e| e.to_string())?;
        let kwh = parse_number(f[3], "kwh")?;
        if !kwh.is_finite() || kwh < 0.0 {
            return Err(format!("kwh {kwh} must be finite and non-negative"));
        }
        Ok((f[0].to_string(), f[1].to_string(), Reading { at, value: kwh }))
    })?;
    let series = sorted_groups(grouped.rows, source_name)?
        .into_iter()
        .map(|(id, zip, readings)| MeterSeries::new(id, zip, readings))
        .collect::<Result<_, _>>()?;
    Ok(Loaded {
        series,
        rejected: grouped.rejected,
    })
}

/// Reads weather rows (`zip,timestamp,temp_f`); one series per zip.
pub fn read_weather_csv<R: Read>(
    reader: R,
    options: &SchemaOptions,
    source_name: &str,
) -> Result<Loaded<WeatherSeries>, IngestError> {
    let c = &options.weather;
    let columns = [c.zip.as_str(), c.timestamp.as_str(), c.temp_f.as_str()];
    let grouped = read_rows(reader, options.delimiter, &columns, source_name, |f| {
        if f[0].is_empty() {
            return Err("empty zip".into());
        }
        let at = HourStamp::parse(f[1]).map_err(|e| e.to_string())?;
        let temp = parse_number(f[2], "temp_f")?;
        if !temp.is_finite() || !(TEMP_MIN_F..=TEMP_MAX_F).contains(&temp) {
            return Err(format!(
                "temp_f {temp} outside [{TEMP_MIN_F}, {TEMP_MAX_F}] °F"
            ));
        }
        Ok((f[0].to_string(), f[0].to_string(), Reading { at, value: temp }))
    })?;
    let series = sorted_groups(grouped.rows, source_name)?
        .into_iter()
        .map(|(zip, _, readings)| WeatherSeries::new(zip, readings))
        .collect::<Result<_, _>>()?;
    Ok(Loaded {
        series,
        rejected: grouped.rejected,
    })
}

pub fn load_meter_csv(
    path: impl AsRef<Path>,
    options: &SchemaOptions,
) -> Result<Loaded<MeterSeries>, IngestError> {
    let path = path.as_ref();
    read_meter_csv(open(path)?, options, &path.display().to_string())
}

pub fn load_weather_csv(
    path: impl AsRef<Path>,
    options: &SchemaOptions,
) -> Result<Loaded<WeatherSeries>, IngestError> {
    let path = path.as_ref();
    read_weather_csv(open(path)?, options, &path.display().to_string())
}

fn write_err(source_name: &str) -> impl Fn(csv::Error) -> IngestError + '_ {
    csv_err(source_name)
}

fn finish<W: Write>(wtr: csv::Writer<W>, name: &str) -> Result<(), IngestError> {
    let mut inner = wtr
        .into_inner()
        .map_err(|e| IngestError::Csv {
            source_name: name.to_string(),
            source: csv::Error::from(e.into_error()),
        })?;
    inner.flush().map_err(|source| IngestError::Io {
        path: name.into(),
        source,
    })
}

/// Writes meter series in customer then time order.
pub fn write_meter_csv<W: Write>(writer: W, meters: &[MeterSeries]) -> Result<(), IngestError> {
    let name = "meter csv";
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["customer_id", "zip", "timestamp", "kwh"])
        .map_err(write_err(name))?;
    let mut sorted: Vec<&MeterSeries> = meters.iter().collect();
    sorted.sort_by(|a, b| a.customer_id().cmp(b.customer_id()));
    for m in sorted {
        for r in m.readings() {
            wtr.write_record([
                m.customer_id(),
                m.zip(),
                &r.at.to_string(),
                &r.value.to_string(),
            ])
            .map_err(write_err(name))?;
        }
    }
    finish(wtr, name)
}

pub fn write_weather_csv<W: Write>(
    writer: W,
    weathers: &[WeatherSeries],
) -> Result<(), IngestError> {
    let name = "weather csv";
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["zip", "timestamp", "temp_f"])
        .map_err(write_err(name))?;
    let mut sorted: Vec<&WeatherSeries> = weathers.iter().collect();
    sorted.sort_by(|a, b| a.zip().cmp(b.zip()));
    for w in sorted {
        for r in w.readings() {
            wtr.write_record([w.zip(), &r.at.to_string(), &r.value.to_string()])
                .map_err(write_err(name))?;
        }
    }
    finish(wtr, name)
}

fn opt_to_string<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `customer_id,model,tr,a,b,c,noise_sd`; `tr` and `b` are blank for
/// linear-model customers.
pub fn write_ground_truth_csv<W: Write>(
    writer: W,
    truth: &[GroundTruth],
) -> Result<(), IngestError> {
    let name = "ground truth csv";
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["customer_id", "model", "tr", "a", "b", "c", "noise_sd"])
        .map_err(write_err(name))?;
    for g in truth {
        wtr.write_record([
            g.customer_id.clone(),
            g.model.as_str().to_string(),
            opt_to_string(g.tr),
            g.a.to_string(),
            opt_to_string(g.b),
            g.c.to_string(),
            g.noise_sd.to_string(),
        ])
        .map_err(write_err(name))?;
    }
    finish(wtr, name)
}

pub fn read_ground_truth_csv<R: Read>(
    reader: R,
    source_name: &str,
) -> Result<Vec<GroundTruth>, IngestError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(csv_err(source_name))?.clone();
    let idx = column_indices(
        &headers,
        &["customer_id", "model", "tr", "a", "b", "c", "noise_sd"],
        source_name,
    )?;
    let bad = |line: u64, msg: String| {
        IngestError::InvalidSeries(format!("{source_name} line {line}: {msg}"))
    };
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err(source_name))?;
        let line = record.position().map_or(0, |p| p.line());
        let f = |i: usize| record.get(idx[i]).unwrap_or("").trim();
        let num = |i: usize| parse_number(f(i), "value").map_err(|m| bad(line, m));
        let opt = |i: usize| -> Result<Option<f64>, IngestError> {
            if f(i).is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        let model = match f(1) {
            "breakpoint" => TruthModel::Breakpoint,
            "linear" => TruthModel::Linear,
            other => return Err(bad(line, format!("unknown model {other:?}"))),
        };
        let tr = if f(2).is_empty() {
            None
        } else {
            Some(
                f(2).parse::<i32>()
                    .map_err(|_| bad(line, format!("tr {:?} is not an integer", f(2))))?,
            )
        };
        out.push(GroundTruth {
            customer_id: f(0).to_string(),
            model,
            tr,
            a: num(3)?,
            b: opt(4)?,
            c: num(5)?,
            noise_sd: num(6)?,
        });
    }
    Ok(out)
}
