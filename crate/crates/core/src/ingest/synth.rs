use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::types::{HourStamp, MeterSeries, Reading, WeatherSeries, TEMP_MAX_F, TEMP_MIN_F};
use super::IngestError;

/// Daily temperature generator: a cosine daily cycle around a mean, a
/// stationary AR(1) day-to-day offset and independent hourly jitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TempProfile {
    pub mean_f: f64,
    pub daily_amplitude_f: f64,
    /// Hour of the daily maximum.
    pub peak_hour: f64,
    pub ar_phi: f64,
    /// Stationary standard deviation of the day offset.
    pub ar_sd_f: f64,
    pub hourly_sd_f: f64,
}

impl TempProfile {
    pub fn hot() -> Self {
        Self {
            mean_f: 72.0,
            daily_amplitude_f: 10.0,
            peak_hour: 16.0,
            ar_phi: 0.8,
            ar_sd_f: 4.0,
            hourly_sd_f: 1.5,
        }
    }

    pub fn cool() -> Self {
        Self {
            mean_f: 62.0,
            daily_amplitude_f: 6.0,
            ar_sd_f: 3.0,
            ..Self::hot()
        }
    }

    /// Noise-free part of the temperature at `hour`.
    pub fn cycle(&self, hour: u8) -> f64 {
        let phase = 2.0 * std::f64::consts::PI * (f64::from(hour) - self.peak_hour) / 24.0;
        self.mean_f + self.daily_amplitude_f * phase.cos()
    }

    fn validate(&self) -> Result<(), String> {
        let all = [
            self.mean_f,
            self.daily_amplitude_f,
            self.peak_hour,
            self.ar_phi,
            self.ar_sd_f,
            self.hourly_sd_f,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err("temperature profile values must be finite".into());
        }
        if !(0.0..1.0).contains(&self.ar_phi.abs()) {
            return Err(format!("ar_phi {} must satisfy |phi| < 1", self.ar_phi));
        }
        if self.daily_amplitude_f < 0.0 || self.ar_sd_f < 0.0 || self.hourly_sd_f < 0.0 {
            return Err("amplitude and standard deviations must be non-negative".into());
        }
        Ok(())
    }
}

impl Default for TempProfile {
    fn default() -> Self {
        Self::hot()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub count: usize,
    pub fraction_ac: f64,
    /// Cooling slope above the breakpoint, kWh/°F.
    pub a_range: (f64, f64),
    /// Slope below the breakpoint for AC customers, and the single slope of
    /// non-AC customers, kWh/°F.
    pub b_range: (f64, f64),
    pub c_range: (f64, f64),
    pub tr_range: (i32, i32),
    pub noise_sd: f64,
    pub temp_profile: TempProfile,
    pub seed: u64,
    pub days: u32,
    pub start_date: NaiveDate,
    pub zip: String,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            count: 100,
            fraction_ac: 0.6,
            a_range: (0.1, 0.5),
            b_range: (-0.02, 0.05),
            c_range: (0.5, 2.0),
            tr_range: (74, 84),
            noise_sd: 0.2,
            temp_profile: TempProfile::hot(),
            seed: 0,
            days: 90,
            start_date: NaiveDate::from_ymd_opt(2011, 5, 1).expect("valid date"),
            zip: "93701".into(),
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), IngestError> {
        let bad = |m: String| Err(IngestError::InvalidSpec(m));
        if self.count == 0 {
            return bad("count must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.fraction_ac) {
            return bad(format!("fraction_ac {} outside [0, 1]", self.fraction_ac));
        }
        for (name, (lo, hi)) in [
            ("a_range", self.a_range),
            ("b_range", self.b_range),
            ("c_range", self.c_range),
        ] {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return bad(format!("{name} [{lo}, {hi}] is empty or not finite"));
            }
        }
        let (lo, hi) = self.tr_range;
        if lo > hi || lo < 68 || hi > 86 {
            return bad(format!("tr_range [{lo}, {hi}] must be non-empty within [68, 86]"));
        }
        if !self.noise_sd.is_finite() || self.noise_sd < 0.0 {
            return bad(format!("noise_sd {} must be finite and >= 0", self.noise_sd));
        }
        if self.days == 0 {
            return bad("days must be positive".into());
        }
        if self.zip.is_empty() {
            return bad("zip must not be empty".into());
        }
        self.temp_profile.validate().map_err(IngestError::InvalidSpec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthModel {
    Breakpoint,
    Linear,
}

impl TruthModel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Breakpoint => "breakpoint",
            Self::Linear => "linear",
        }
    }
}

/// Sampled parameters of one customer. Linear-model customers have no
/// breakpoint and carry their slope in `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub customer_id: String,
    pub model: TruthModel,
    pub tr: Option<i32>,
    pub a: f64,
    pub b: Option<f64>,
    pub c: f64,
    pub noise_sd: f64,
}

impl GroundTruth {
    /// Noise-free load at outdoor temperature `temp_f`.
    pub fn mean_load(&self, temp_f: f64) -> f64 {
        match (self.model, self.tr, self.b) {
            (TruthModel::Breakpoint, Some(tr), Some(b)) => {
                let tr = f64::from(tr);
                self.a * (temp_f - tr).max(0.0) + b * (tr - temp_f).max(0.0) + self.c
            }
            _ => self.a * temp_f + self.c,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub meters: Vec<MeterSeries>,
    pub weather: WeatherSeries,
    pub truth: Vec<GroundTruth>,
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

fn hours(spec: &SynthSpec) -> Vec<HourStamp> {
    spec.start_date
        .iter_days()
        .take(spec.days as usize)
        .flat_map(|d| (0..24u8).map(move |h| HourStamp::new(d, h).expect("hour < 24")))
        .collect()
}

fn temperatures(spec: &SynthSpec, stamps: &[HourStamp]) -> Vec<f64> {
    let p = &spec.temp_profile;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(0);
    let z = Normal::new(0.0, 1.0).expect("unit normal");
    let innovation = p.ar_sd_f * (1.0 - p.ar_phi * p.ar_phi).sqrt();
    let mut offset = p.ar_sd_f * z.sample(&mut rng);
    let mut out = Vec::with_capacity(stamps.len());
    for (i, at) in stamps.iter().enumerate() {
        if i > 0 && at.hour() == 0 {
            offset = p.ar_phi * offset + innovation * z.sample(&mut rng);
        }
        let t = p.cycle(at.hour()) + offset + p.hourly_sd_f * z.sample(&mut rng);
        out.push(t.clamp(TEMP_MIN_F, TEMP_MAX_F));
    }
    out
}

/// Generates a single-zip population with known parameters. Output depends
/// only on the spec; customer `k` draws from its own random stream, so
/// changing `count` does not perturb earlier customers. Loads are clamped at
/// zero after noise is added.
pub fn synth_population(spec: &SynthSpec) -> Result<SynthOutput, IngestError> {
    spec.validate()?;
    let stamps = hours(spec);
    let temps = temperatures(spec, &stamps);
    let weather = WeatherSeries::new(
        spec.zip.clone(),
        stamps
            .iter()
            .zip(&temps)
            .map(|(&at, &value)| Reading { at, value })
            .collect(),
    )?;

    let noise = Normal::new(0.0, spec.noise_sd)
        .map_err(|e| IngestError::InvalidSpec(e.to_string()))?;
    let mut meters = Vec::with_capacity(spec.count);
    let mut truth = Vec::with_capacity(spec.count);
    for k in 0..spec.count {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(k as u64 + 1);
        let customer_id = format!("C{k:06}");
        let g = if rng.random_bool(spec.fraction_ac) {
            GroundTruth {
                customer_id: customer_id.clone(),
                model: TruthModel::Breakpoint,
                tr: Some(rng.random_range(spec.tr_range.0..=spec.tr_range.1)),
                a: uniform(&mut rng, spec.a_range),
                b: Some(uniform(&mut rng, spec.b_range)),
                c: uniform(&mut rng, spec.c_range),
                noise_sd: spec.noise_sd,
            }
        } else {
            GroundTruth {
                customer_id: customer_id.clone(),
                model: TruthModel::Linear,
                tr: None,
                a: uniform(&mut rng, spec.b_range),
                b: None,
                c: uniform(&mut rng, spec.c_range),
                noise_sd: spec.noise_sd,
            }
        };
        let readings = stamps
            .iter()
            .zip(&temps)
            .map(|(&at, &t)| {
                let e = if spec.noise_sd > 0.0 {
                    noise.sample(&mut rng)
                } else {
                    0.0
                };
                Reading {
                    at,
                    value: (g.mean_load(t) + e).max(0.0),
                }
            })
            .collect();
        meters.push(MeterSeries::new(customer_id, spec.zip.clone(), readings)?);
        truth.push(g);
    }
    Ok(SynthOutput {
        meters,
        weather,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_load_follows_model() {
        let spec = SynthSpec {
            count: 1,
            fraction_ac: 1.0,
            noise_sd: 0.0,
            days: 10,
            ..SynthSpec::default()
        };
        let out = synth_population(&spec).unwrap();
        let g = &out.truth[0];
        let (tr, b) = (f64::from(g.tr.unwrap()), g.b.unwrap());
        for (m, w) in out.meters[0].readings().iter().zip(out.weather.readings()) {
            let to = w.value;
            let expected = g.a * (to - tr).max(0.0) + b * (tr - to).max(0.0) + g.c;
            assert_eq!(m.value, expected.max(0.0));
        }
    }

    #[test]
    fn same_seed_same_output() {
        let spec = SynthSpec {
            count: 5,
            days: 7,
            seed: 42,
            ..SynthSpec::default()
        };
        assert_eq!(synth_population(&spec).unwrap(), synth_population(&spec).unwrap());
        let other = SynthSpec { seed: 43, ..spec.clone() };
        assert_ne!(
            synth_population(&spec).unwrap().weather,
            synth_population(&other).unwrap().weather
        );
    }

    #[test]
    fn customer_streams_are_independent_of_count() {
        let small = SynthSpec { count: 3, days: 5, ..SynthSpec::default() };
        let large = SynthSpec { count: 9, ..small.clone() };
        let a = synth_population(&small).unwrap();
        let b = synth_population(&large).unwrap();
        assert_eq!(a.meters[..], b.meters[..3]);
        assert_eq!(a.truth[..], b.truth[..3]);
    }

    #[test]
    fn ac_fraction_within_binomial_interval() {
        let spec = SynthSpec {
            count: 1000,
            fraction_ac: 0.6,
            days: 1,
            seed: 7,
            ..SynthSpec::default()
        };
        let out = synth_population(&spec).unwrap();
        let ac = out
            .truth
            .iter()
            .filter(|g| g.model == TruthModel::Breakpoint)
            .count() as f64;
        // 4-sigma binomial interval
        let sd = (1000.0f64 * 0.6 * 0.4).sqrt();
        assert!((ac - 600.0).abs() <= 4.0 * sd, "ac = {ac}");
    }

    #[test]
    fn ninety_full_days_give_ninety_samples_per_hour() {
        let spec = SynthSpec { count: 2, ..SynthSpec::default() };
        let out = synth_population(&spec).unwrap();
        let joined = crate::ingest::join_weather(&out.meters, &[out.weather.clone()], None).unwrap();
        assert_eq!(joined.observations.len(), 2 * 24);
        assert!(joined.observations.iter().all(|o| o.samples.len() == 90));
        let days: Vec<i64> = joined.observations[0].samples.iter().map(|s| s.day).collect();
        assert_eq!(days, (0..90).collect::<Vec<_>>());
    }

    #[test]
    fn validation() {
        let ok = SynthSpec::default();
        assert!(ok.validate().is_ok());
        for bad in [
            SynthSpec { count: 0, ..ok.clone() },
            SynthSpec { fraction_ac: 1.5, ..ok.clone() },
            SynthSpec { tr_range: (66, 80), ..ok.clone() },
            SynthSpec { tr_range: (80, 79), ..ok.clone() },
            SynthSpec { a_range: (0.5, 0.1), ..ok.clone() },
            SynthSpec { noise_sd: -1.0, ..ok.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(IngestError::InvalidSpec(_))));
        }
    }

    #[test]
    fn hot_profile_is_warmer_in_the_afternoon() {
        let p = TempProfile::hot();
        assert!(p.cycle(17) > p.cycle(4));
        assert!(p.cycle(16) == p.mean_f + p.daily_amplitude_f);
    }
}
