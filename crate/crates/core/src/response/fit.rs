use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::ols::ols;
use super::{FitConfig, FitUnavailable, ModelChoice, ModelFit, ModelKind, ResponseError};
use super::{HourlyFit, ResponseEstimate};
use crate::ingest::JoinedObservations;
use crate::scalar::Scalar;

fn check_inputs<T: Scalar>(temps: &[T], loads: &[T], cfg: &FitConfig) -> Result<(), FitUnavailable> {
    if temps.len() != loads.len() {
        return Err(FitUnavailable::LengthMismatch {
            temps: temps.len(),
            loads: loads.len(),
        });
    }
    if temps.len() < cfg.min_samples {
        return Err(FitUnavailable::TooFewSamples {
            n: temps.len(),
            min: cfg.min_samples,
        });
    }
    if temps.iter().chain(loads).any(|v| !v.is_finite()) {
        return Err(FitUnavailable::NonFinite);
    }
    if temps.iter().all(|&t| t == temps[0]) {
        return Err(FitUnavailable::ConstantTemperature);
    }
    Ok(())
}

fn r_squared<T: Scalar>(loads: &[T], rss: T) -> T {
    let n = T::from_usize_lossy(loads.len());
    let mean = loads.iter().copied().sum::<T>() / n;
    let tss = loads.iter().fold(T::zero(), |acc, &y| acc + (y - mean) * (y - mean));
    if tss > T::zero() {
        (T::one() - rss / tss).max(T::zero()).min(T::one())
    } else {
        T::one()
    }
}

/// Breakpoint fit for one fixed `tr`, or `None` if the design is singular.
pub fn fit_breakpoint_at<T: Scalar>(temps: &[T], loads: &[T], tr: i32) -> Option<ModelFit<T>> {
    let n = temps.len();
    let trf = T::lit(f64::from(tr));
    let mut x = Vec::with_capacity(3 * n);
    x.extend(temps.iter().map(|&t| (t - trf).max(T::zero())));
    x.extend(temps.iter().map(|&t| (trf - t).max(T::zero())));
    x.extend(std::iter::repeat(T::one()).take(n));
    let mut y = loads.to_vec();
    let sol = ols(&mut x, &mut y, n, 3)?;
    let dof = T::from_usize_lossy(n - 3);
    let se_a = (sol.rss / dof * sol.inv_diag[0]).max(T::zero()).sqrt();
    Some(ModelFit {
        kind: ModelKind::Breakpoint,
        tr: Some(tr),
        a: sol.coef[0],
        se_a,
        b: Some(sol.coef[1]),
        c: sol.coef[2],
        rss: sol.rss,
        r2: r_squared(loads, sol.rss),
        n_samples: n,
    })
}

/// Integer breakpoints in the grid with enough samples strictly on each side.
pub fn feasible_breakpoints<T: Scalar>(temps: &[T], cfg: &FitConfig) -> Vec<i32> {
    let need = T::lit(cfg.side_fraction) * T::from_usize_lossy(temps.len());
    (cfg.tr_min..=cfg.tr_max)
        .filter(|&tr| {
            let trf = T::lit(f64::from(tr));
            let below = temps.iter().filter(|&&t| t < trf).count();
            let above = temps.iter().filter(|&&t| t > trf).count();
            T::from_usize_lossy(below) >= need && T::from_usize_lossy(above) >= need
        })
        .collect()
}

/// Fits load = a(To−Tr)₊ + b(Tr−To)₊ + c over the integer breakpoint grid
/// and keeps the smallest RSS; equal RSS keeps the smaller `tr`.
pub fn fit_breakpoint<T: Scalar>(
    temps: &[T],
    loads: &[T],
    cfg: &FitConfig,
) -> Result<ModelFit<T>, FitUnavailable> {
    check_inputs(temps, loads, cfg)?;
    let grid = feasible_breakpoints(temps, cfg);
    if grid.is_empty() {
        return Err(FitUnavailable::NoFeasibleBreakpoint);
    }
    let mut best: Option<ModelFit<T>> = None;
    for tr in grid {
        if let Some(fit) = fit_breakpoint_at(temps, loads, tr) {
            if best.as_ref().map_or(true, |b| fit.rss < b.rss) {
                best = Some(fit);
            }
        }
    }
    best.ok_or(FitUnavailable::Singular)
}

/// Fits load = a·To + c'.
pub fn fit_linear<T: Scalar>(
    temps: &[T],
    loads: &[T],
    cfg: &FitConfig,
) -> Result<ModelFit<T>, FitUnavailable> {
    check_inputs(temps, loads, cfg)?;
    let n = temps.len();
    let mut x = Vec::with_capacity(2 * n);
    x.extend_from_slice(temps);
    x.extend(std::iter::repeat(T::one()).take(n));
    let mut y = loads.to_vec();
    let sol = ols(&mut x, &mut y, n, 2).ok_or(FitUnavailable::Singular)?;
    let dof = T::from_usize_lossy(n - 2);
    Ok(ModelFit {
        kind: ModelKind::Linear,
        tr: None,
        a: sol.coef[0],
        se_a: (sol.rss / dof * sol.inv_diag[0]).max(T::zero()).sqrt(),
        b: None,
        c: sol.coef[1],
        rss: sol.rss,
        r2: r_squared(loads, sol.rss),
        n_samples: n,
    })
}

/// F statistic and upper-tail p-value for the breakpoint model against the
/// linear one, one numerator and `n − 3` denominator degrees of freedom.
pub fn f_test<T: Scalar>(rss_breakpoint: T, rss_linear: T, n: usize) -> (T, T) {
    let gain = (rss_linear - rss_breakpoint).max(T::zero());
    if gain == T::zero() {
        return (T::zero(), T::one());
    }
    if rss_breakpoint <= T::zero() {
        return (T::infinity(), T::zero());
    }
    let dof = n - 3;
    let f = gain / (rss_breakpoint / T::from_usize_lossy(dof));
    let dist = FisherSnedecor::new(1.0, dof as f64).expect("positive degrees of freedom");
    (f, T::lit(dist.sf(f.to_f64_lossy())))
}

/// Picks the breakpoint model iff its F-test p-value is below `alpha`.
/// With only one candidate it is returned as is; with none, `None`.
pub fn select_model<T: Scalar>(
    breakpoint: Option<ModelFit<T>>,
    linear: Option<ModelFit<T>>,
    alpha: f64,
) -> Option<ModelChoice<T>> {
    match (breakpoint, linear) {
        (Some(b), Some(l)) => {
            debug_assert_eq!(b.n_samples, l.n_samples);
            let (f_stat, p) = f_test(b.rss, l.rss, b.n_samples);
            let fit = if p < T::lit(alpha) { b } else { l };
            Some(ModelChoice {
                fit,
                f_stat: Some(f_stat),
                f_pvalue: Some(p),
            })
        }
        (Some(fit), None) | (None, Some(fit)) => Some(ModelChoice {
            fit,
            f_stat: None,
            f_pvalue: None,
        }),
        (None, None) => None,
    }
}

/// Fits both models to one customer-hour and selects between them.
pub fn fit_hour<T: Scalar>(
    obs: &JoinedObservations,
    cfg: &FitConfig,
) -> Result<HourlyFit<T>, FitUnavailable> {
    let temps: Vec<T> = obs.temps().map(T::lit).collect();
    let loads: Vec<T> = obs.loads().map(T::lit).collect();
    let linear = fit_linear(&temps, &loads, cfg);
    let breakpoint = fit_breakpoint(&temps, &loads, cfg);
    let reason = match (&breakpoint, &linear) {
        (Err(e), Err(_)) => Some(e.clone()),
        _ => None,
    };
    match select_model(breakpoint.ok(), linear.ok(), cfg.alpha) {
        Some(choice) => Ok(HourlyFit {
            customer_id: obs.customer_id.clone(),
            hour: obs.hour,
            fit: choice.fit,
            f_stat: choice.f_stat,
            f_pvalue: choice.f_pvalue,
        }),
        None => Err(reason.unwrap_or(FitUnavailable::Singular)),
    }
}

/// μ = a·ΔTr and σ = se(a)·ΔTr for breakpoint fits; other fits are
/// ineligible with zero response.
pub fn estimate_response<T: Scalar>(
    fit: &HourlyFit<T>,
    delta_tr: T,
) -> Result<ResponseEstimate<T>, ResponseError> {
    if !(delta_tr.is_finite() && delta_tr > T::zero()) {
        return Err(ResponseError::InvalidDeltaTr(delta_tr.to_f64_lossy()));
    }
    let eligible = fit.fit.kind == ModelKind::Breakpoint;
    let (mu, sigma) = if eligible {
        (fit.fit.a * delta_tr, fit.fit.se_a * delta_tr)
    } else {
        (T::zero(), T::zero())
    };
    Ok(ResponseEstimate {
        customer_id: fit.customer_id.clone(),
        hour: fit.hour,
        delta_tr,
        mu,
        sigma,
        eligible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> FitConfig {
        FitConfig::default()
    }

    fn spread(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn noiseless_breakpoint_recovered() {
        let temps = spread(60, 60.0, 95.0);
        let loads: Vec<f64> = temps
            .iter()
            .map(|&t| 0.4 * (t - 78.0f64).max(0.0) + 0.05 * (78.0 - t).max(0.0) + 1.2)
            .collect();
        let fit = fit_breakpoint(&temps, &loads, &cfg()).unwrap();
        assert_eq!(fit.tr, Some(78));
        assert!((fit.a - 0.4).abs() < 1e-12);
        assert!((fit.b.unwrap() - 0.05).abs() < 1e-12);
        assert!((fit.c - 1.2).abs() < 1e-12);
        assert!(fit.rss < 1e-20);
        assert!(fit.se_a < 1e-9);
    }

    #[test]
    fn cold_data_has_no_breakpoint() {
        let temps = spread(40, 50.0, 67.5);
        let loads = vec![1.0; 40];
        assert_eq!(
            fit_breakpoint(&temps, &loads, &cfg()),
            Err(FitUnavailable::NoFeasibleBreakpoint)
        );
    }

    #[test]
    fn side_fraction_rule_matches_counting() {
        // 20 samples: 3 at 60, 17 at 90 -> 15% of 20 = 3 below every Tr
        let mut temps = vec![60.0; 3];
        temps.extend(vec![90.0; 17]);
        assert_eq!(feasible_breakpoints(&temps, &cfg()), (68..=86).collect::<Vec<_>>());
        let mut temps = vec![60.0; 2];
        temps.extend(vec![90.0; 18]);
        assert!(feasible_breakpoints(&temps, &cfg()).is_empty());
        // samples at the breakpoint itself are on neither side
        let mut temps = vec![70.0; 17];
        temps.extend(vec![60.0; 3]);
        assert_eq!(feasible_breakpoints(&temps, &cfg()), vec![68, 69]);
    }

    #[test]
    fn exact_line() {
        let temps = spread(25, 60.0, 90.0);
        let loads: Vec<f64> = temps.iter().map(|t| 2.0 * t + 5.0).collect();
        let fit = fit_linear(&temps, &loads, &cfg()).unwrap();
        assert!((fit.a - 2.0).abs() < 1e-12);
        assert!((fit.c - 5.0).abs() < 1e-9);
        assert!(fit.rss < 1e-18);
        assert_eq!(fit.r2, 1.0);
    }

    #[test]
    fn two_points_rejected() {
        assert_eq!(
            fit_linear(&[70.0, 80.0], &[1.0, 2.0], &cfg()),
            Err(FitUnavailable::TooFewSamples { n: 2, min: 20 })
        );
    }

    #[test]
    fn constant_temperature_rejected() {
        let temps = vec![75.0; 30];
        let loads = spread(30, 1.0, 2.0);
        assert_eq!(
            fit_linear(&temps, &loads, &cfg()),
            Err(FitUnavailable::ConstantTemperature)
        );
    }

    #[test]
    fn se_matches_textbook_slope_formula() {
        // linear model: se(a) = sqrt(s² / Σ(t − t̄)²)
        let temps = spread(30, 60.0, 90.0);
        let loads: Vec<f64> = temps
            .iter()
            .enumerate()
            .map(|(i, t)| 0.3 * t + 1.0 + if i % 2 == 0 { 0.5 } else { -0.4 })
            .collect();
        let fit = fit_linear(&temps, &loads, &cfg()).unwrap();
        let tm = temps.iter().sum::<f64>() / 30.0;
        let sxx: f64 = temps.iter().map(|t| (t - tm) * (t - tm)).sum();
        let expected = (fit.rss / 28.0 / sxx).sqrt();
        assert!((fit.se_a - expected).abs() < 1e-12);
    }

    #[test]
    fn f_test_edges() {
        let (f, p): (f64, f64) = f_test(2.0, 2.0, 30);
        assert_eq!((f, p), (0.0, 1.0));
        let (f, p): (f64, f64) = f_test(0.0, 1.0, 30);
        assert!(f.is_infinite() && p == 0.0);
        // F(1, 27) with F = 4.21 sits near the 5% critical value
        let (_, p): (f64, f64) = f_test(27.0, 27.0 + 4.21, 30);
        assert!((p - 0.05).abs() < 1e-3, "{p}");
    }

    #[test]
    fn equal_rss_picks_linear() {
        let b = ModelFit {
            kind: ModelKind::Breakpoint,
            tr: Some(75),
            a: 0.1,
            se_a: 0.01,
            b: Some(0.0),
            c: 1.0,
            rss: 3.0,
            r2: 0.5,
            n_samples: 30,
        };
        let l = ModelFit {
            kind: ModelKind::Linear,
            tr: None,
            b: None,
            ..b.clone()
        };
        let choice = select_model(Some(b.clone()), Some(l), 0.05).unwrap();
        assert_eq!(choice.fit.kind, ModelKind::Linear);
        assert_eq!(choice.f_stat, Some(0.0));
        let only = select_model(Some(b), None, 0.05).unwrap();
        assert_eq!(only.fit.kind, ModelKind::Breakpoint);
        assert_eq!(only.f_stat, None);
    }

    fn hourly(kind: ModelKind, a: f64, se_a: f64) -> HourlyFit<f64> {
        HourlyFit {
            customer_id: "c".into(),
            hour: 17,
            fit: ModelFit {
                kind,
                tr: (kind == ModelKind::Breakpoint).then_some(75),
                a,
                se_a,
                b: (kind == ModelKind::Breakpoint).then_some(0.0),
                c: 1.0,
                rss: 1.0,
                r2: 0.5,
                n_samples: 90,
            },
            f_stat: None,
            f_pvalue: None,
        }
    }

    #[test]
    fn response_estimate() {
        let e = estimate_response(&hourly(ModelKind::Breakpoint, 0.5, 0.1), 3.0).unwrap();
        assert_eq!(e.mu, 0.5 * 3.0);
        assert_eq!(e.sigma, 0.1 * 3.0);
        assert!((e.mu - 1.5).abs() < 1e-15 && (e.sigma - 0.3).abs() < 1e-15);
        assert!(e.eligible);
        let e = estimate_response(&hourly(ModelKind::Linear, 0.5, 0.1), 3.0).unwrap();
        assert!(!e.eligible);
        assert_eq!((e.mu, e.sigma), (0.0, 0.0));
        assert!(estimate_response(&hourly(ModelKind::Breakpoint, 0.5, 0.1), 0.0).is_err());
    }

    #[test]
    fn single_precision_fit() {
        let temps: Vec<f32> = (0..40).map(|i| 60.0 + i as f32).collect();
        let loads: Vec<f32> = temps.iter().map(|&t| 0.3 * (t - 80.0f32).max(0.0) + 1.0).collect();
        let fit = fit_breakpoint(&temps, &loads, &cfg()).unwrap();
        assert_eq!(fit.tr, Some(80));
        assert!((fit.a - 0.3).abs() < 1e-4);
    }
}
