use std::io::{Read, Write};

use super::{FitReport, HourSummary, HourlyFit, R2Bin, ResponseError, ResponseEstimate};
use crate::scalar::Scalar;

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn flush<W: Write>(wtr: csv::Writer<W>) -> Result<(), csv::Error> {
    let mut inner = wtr.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    inner.flush()?;
    Ok(())
}

/// `customer_id,hour,model,tr,a,se_a,b,c,rss,r2,n,f_stat,f_pvalue,eligible`
pub fn write_fit_report_csv<T: Scalar, W: Write>(
    writer: W,
    fits: &[HourlyFit<T>],
) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record([
        "customer_id", "hour", "model", "tr", "a", "se_a", "b", "c", "rss", "r2", "n", "f_stat",
        "f_pvalue", "eligible",
    ])?;
    for f in fits {
        let m = &f.fit;
        wtr.write_record([
            f.customer_id.clone(),
            f.hour.to_string(),
            m.kind.as_str().to_string(),
            opt(m.tr),
            m.a.to_string(),
            m.se_a.to_string(),
            opt(m.b),
            m.c.to_string(),
            m.rss.to_string(),
            m.r2.to_string(),
            m.n_samples.to_string(),
            opt(f.f_stat),
            opt(f.f_pvalue),
            (m.kind == super::ModelKind::Breakpoint).to_string(),
        ])?;
    }
    flush(wtr)
}

/// `customer_id,hour,delta_tr,mu,sigma,eligible`
pub fn write_estimates_csv<T: Scalar, W: Write>(
    writer: W,
    estimates: &[ResponseEstimate<T>],
) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["customer_id", "hour", "delta_tr", "mu", "sigma", "eligible"])?;
    for e in estimates {
        wtr.write_record([
            e.customer_id.clone(),
            e.hour.to_string(),
            e.delta_tr.to_string(),
            e.mu.to_string(),
            e.sigma.to_string(),
            e.eligible.to_string(),
        ])?;
    }
    flush(wtr)
}

/// `hour,fitted,breakpoint,excluded,breakpoint_share,mean_r2`
pub fn write_hourly_summary_csv<W: Write>(
    writer: W,
    hourly: &[HourSummary],
) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["hour", "fitted", "breakpoint", "excluded", "breakpoint_share", "mean_r2"])?;
    for h in hourly {
        wtr.write_record([
            h.hour.to_string(),
            h.fitted.to_string(),
            h.breakpoint.to_string(),
            h.excluded.to_string(),
            h.breakpoint_share.to_string(),
            h.mean_r2.to_string(),
        ])?;
    }
    flush(wtr)
}

/// `r2_lower,r2_upper,count`
pub fn write_r2_histogram_csv<W: Write>(writer: W, bins: &[R2Bin]) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["r2_lower", "r2_upper", "count"])?;
    for b in bins {
        wtr.write_record([b.lower.to_string(), b.upper.to_string(), b.count.to_string()])?;
    }
    flush(wtr)
}

impl<T: Scalar> FitReport<T> {
    /// Exclusions as `customer_id,hour,reason`.
    pub fn write_exclusions_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["customer_id", "hour", "reason"])?;
        for e in &self.exclusions {
            wtr.write_record([e.customer_id.clone(), e.hour.to_string(), e.reason.to_string()])?;
        }
        flush(wtr)
    }
}

/// Reads an estimates file as written by [`write_estimates_csv`].
pub fn read_estimates_csv<T: Scalar, R: Read>(
    reader: R,
    source_name: &str,
) -> Result<Vec<ResponseEstimate<T>>, ResponseError> {
    let fail = |m: String| ResponseError::Format(format!("{source_name}: {m}"));
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(|e| fail(e.to_string()))?.clone();
    let names = ["customer_id", "hour", "delta_tr", "mu", "sigma", "eligible"];
    let mut idx = [0usize; 6];
    for (slot, name) in idx.iter_mut().zip(names) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| fail(format!("missing column {name}")))?;
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| fail(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(idx[i]).unwrap_or("").trim();
        let num = |i: usize| -> Result<T, ResponseError> {
            let v: f64 = field(i)
                .parse()
                .map_err(|_| fail(format!("line {line}: {} {:?} is not a number", names[i], field(i))))?;
            if v.is_finite() {
                Ok(T::lit(v))
            } else {
                Err(fail(format!("line {line}: {} must be finite", names[i])))
            }
        };
        let hour: u8 = field(1)
            .parse()
            .ok()
            .filter(|h| *h <= 23)
            .ok_or_else(|| fail(format!("line {line}: bad hour {:?}", field(1))))?;
        let eligible = match field(5) {
            "true" => true,
            "false" => false,
            other => return Err(fail(format!("line {line}: bad eligible flag {other:?}"))),
        };
        let sigma = num(4)?;
        if sigma < T::zero() {
            return Err(fail(format!("line {line}: sigma must be >= 0")));
        }
        out.push(ResponseEstimate {
            customer_id: field(0).to_string(),
            hour,
            delta_tr: num(2)?,
            mu: num(3)?,
            sigma,
            eligible,
        });
    }
    Ok(out)
}
