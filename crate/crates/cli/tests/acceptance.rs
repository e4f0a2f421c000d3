//! End-to-end acceptance checks. Prints one `PASS`/`FAIL` line per
//! criterion and exits non-zero if any fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use drtarget_core::greedy::{solve_gradual_greedy, solve_greedy};
use drtarget_core::ingest::{join_weather, synth_population, SynthSpec, TruthModel};
use drtarget_core::normal::std_normal_cdf;
use drtarget_core::response::{
    candidate_pool, feasible_breakpoints, fit_breakpoint, fit_hour, fit_population, FitConfig, ModelKind,
};
use drtarget_core::solver::{solve_exact, solve_heuristic, SelectionProblem};
use drtarget_core::tradeoff::{
    min_n_for_target, monotonicity_violations, reliability_vs_n, reliability_vs_target, Algorithm,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances and thresholds.
const FLOAT_SLACK: f64 = 1e-12;
const HEURISTIC_MONOTONE_TOL: f64 = 0.01;
const BOUND_M10_MIN: f64 = 0.9;
const TR_EXACT_MIN: f64 = 0.90;
const SLOPE_COVER_MIN: f64 = 0.99;
const F_POWER_MIN: f64 = 0.95;
const F_FALSE_MAX: f64 = 0.10;
const SCALE_SECONDS_MAX: f64 = 60.0;
const SCALE_MEMORY_MAX_KB: u64 = 4 * 1024 * 1024;
const SCALE_RATIO_MAX: f64 = 3.0;
const PHI_TOL: f64 = 1e-6;

struct Outcome {
    pass: bool,
    detail: String,
}

/// Random instance with the top-N mean sum either above or below the target.
struct Instance {
    mu: Vec<f64>,
    sd: Vec<f64>,
    n: usize,
    target: f64,
}

impl Instance {
    fn problem(&self) -> SelectionProblem<f64> {
        SelectionProblem::from_sigma(self.mu.clone(), &self.sd, self.n, self.target).unwrap()
    }
}

fn top_n_sum(mu: &[f64], n: usize) -> f64 {
    let mut m = mu.to_vec();
    m.sort_by(|a, b| b.total_cmp(a));
    m[..n].iter().sum()
}

fn random_instance(rng: &mut ChaCha8Rng, target_met: bool) -> Instance {
    let k = rng.random_range(8..=16);
    let n = rng.random_range(2..=5);
    let mu: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..=3.0)).collect();
    let sd: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..=1.0)).collect();
    let s = top_n_sum(&mu, n);
    let target = if target_met {
        s * rng.random_range(0.3..0.98)
    } else {
        s * rng.random_range(1.02..1.5)
    };
    Instance { mu, sd, n, target }
}

fn instances(seed: u64, count: usize, target_met: bool) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_instance(&mut rng, target_met)).collect()
}

fn reachable_set() -> Vec<Instance> {
    instances(0xA11CE, 500, true)
}

fn criterion_1() -> Outcome {
    let mut checked = 0;
    let mut violations = Vec::new();
    let mut negative = 0;
    for (i, inst) in reachable_set().iter().enumerate() {
        let p = inst.problem();
        let exact = solve_exact(&p).unwrap();
        if exact.rho >= 0.0 {
            continue;
        }
        negative += 1;
        let h = solve_heuristic(&p, 10).unwrap();
        if let Some(bound) = h.bound {
            checked += 1;
            let limit = exact.rho * bound;
            if h.best.rho > limit + FLOAT_SLACK * limit.abs() {
                violations.push(format!("#{i}: rho_h {:.6} > rho*·bound {:.6}", h.best.rho, limit));
            }
        }
    }
    Outcome {
        pass: negative == 500 && violations.is_empty(),
        detail: format!(
            "{negative}/500 with rho*<0, {checked} with a bound, {} violations{}",
            violations.len(),
            violations.first().map(|v| format!(" (first {v})")).unwrap_or_default()
        ),
    }
}

fn criterion_2() -> Outcome {
    let mut all = reachable_set();
    all.extend(instances(0xB0B, 500, false));
    let mut positive = 0;
    let mut greedy_wins = Vec::new();
    let mut oracle_loses = 0;
    let mut worst_gap: f64 = 0.0;
    let mut worst = String::new();
    for (i, inst) in all.iter().enumerate() {
        let p = inst.problem();
        let exact = solve_exact(&p).unwrap();
        if i >= 500 && exact.rho > 0.0 {
            positive += 1;
        }
        let h = solve_heuristic(&p, 10).unwrap().best;
        let g = solve_greedy(&p);
        if h.reliability < g.reliability - FLOAT_SLACK {
            greedy_wins.push(i);
            if g.reliability - h.reliability > worst_gap {
                worst_gap = g.reliability - h.reliability;
                worst = format!(" at #{i}: rho_h {:.6} vs rho_g {:.6}", h.rho, g.rho);
            }
        }
        if exact.reliability < h.reliability - FLOAT_SLACK {
            oracle_loses += 1;
        }
    }
    Outcome {
        pass: positive == 500 && greedy_wins.is_empty() && oracle_loses == 0,
        detail: format!(
            "{positive}/500 with rho*>0; greedy above heuristic on {} of 1000 (largest gap {worst_gap:.3e}{worst}); oracle below heuristic on {oracle_loses}",
            greedy_wins.len()
        ),
    }
}

fn criterion_3() -> Outcome {
    let mut eligible = 0;
    let mut violations = 0;
    let mut lowest = f64::INFINITY;
    for inst in reachable_set() {
        let p = inst.problem();
        if solve_exact(&p).unwrap().rho >= 0.0 {
            continue;
        }
        let gradual = solve_gradual_greedy(&p);
        if !gradual.floor_met_every_step {
            continue;
        }
        eligible += 1;
        let r = solve_greedy(&p).reliability;
        lowest = lowest.min(r);
        if !(r > 0.5) {
            violations += 1;
        }
    }
    Outcome {
        pass: eligible > 0 && violations == 0,
        detail: format!("{eligible} instances with the floor met at every step, {violations} at or below 0.5 (lowest {lowest:.6})"),
    }
}

/// Fixed 1000-customer hot-zone instance: estimates at 17:00 with ΔTr = 3 °F.
fn reference_pool() -> (Vec<f64>, Vec<f64>) {
    let spec = SynthSpec {
        count: 1000,
        seed: 2011,
        ..SynthSpec::default()
    };
    let out = synth_population(&spec).unwrap();
    let hours = BTreeSet::from([17u8]);
    let joined = join_weather(&out.meters, &[out.weather], Some(&hours)).unwrap();
    let pop = fit_population(&joined, &[17], 3.0f64, &FitConfig::default()).unwrap();
    let pool = candidate_pool(&pop.estimates, 17, false);
    (pool.mu, pool.sigma)
}

fn criterion_4() -> Outcome {
    let (mu, sigma) = reference_pool();
    let again = reference_pool();
    let regenerated = again == (mu.clone(), sigma.clone());
    let k = mu.len();
    let target = 0.25 * mu.iter().sum::<f64>();
    let base = SelectionProblem::from_sigma(mu, &sigma, k, target).unwrap();
    let curve = min_n_for_target(&base, &[target], 0.95, 10).unwrap();
    let Some(n) = curve.points[0].certificate.as_ref().map(|c| c.n_min) else {
        return Outcome {
            pass: false,
            detail: format!("target {target:.3} kWh unreachable with {k} candidates"),
        };
    };
    let p = base.with_n_max(n).unwrap();
    let mut bounds = Vec::new();
    for m in [2usize, 5, 10, 20, 50] {
        bounds.push((m, solve_heuristic(&p, m).unwrap().bound));
    }
    let in_range = bounds.iter().all(|(_, b)| matches!(b, Some(v) if *v > 0.0 && *v <= 1.0));
    let get = |m: usize| bounds.iter().find(|(x, _)| *x == m).and_then(|(_, b)| *b);
    let grows = matches!((get(2), get(50)), (Some(a), Some(b)) if b >= a);
    let m10 = matches!(get(10), Some(b) if b >= BOUND_M10_MIN);
    Outcome {
        pass: regenerated && in_range && grows && m10,
        detail: format!(
            "K={k}, T={target:.3} kWh, N={n}; bounds {}; regenerated identically: {regenerated}",
            bounds
                .iter()
                .map(|(m, b)| format!("M={m}:{}", b.map_or("none".into(), |v| format!("{v:.4}"))))
                .collect::<Vec<_>>()
                .join(" ")
        ),
    }
}

/// Noise-free load at 17:00 averaged over the days: the customer's typical
/// load at the fitted hour.
fn typical_load(spec: &SynthSpec) -> f64 {
    let quiet = SynthSpec {
        noise_sd: 0.0,
        ..spec.clone()
    };
    let out = synth_population(&quiet).unwrap();
    let loads: Vec<f64> = out.meters[0]
        .readings()
        .iter()
        .filter(|r| r.at.hour() == 17)
        .map(|r| r.value)
        .collect();
    loads.iter().sum::<f64>() / loads.len() as f64
}

fn hour17(spec: &SynthSpec) -> (drtarget_core::ingest::JoinedObservations, drtarget_core::ingest::GroundTruth) {
    let out = synth_population(spec).unwrap();
    let hours = BTreeSet::from([17u8]);
    let mut joined = join_weather(&out.meters, &[out.weather], Some(&hours)).unwrap();
    (joined.observations.remove(0), out.truth[0].clone())
}

fn criterion_5() -> Outcome {
    let cfg = FitConfig::default();
    let seeds = 200u64;
    let (mut tr_exact, mut covered, mut power, mut false_pos) = (0, 0, 0, 0);
    let mut outside_grid = 0;
    for seed in 0..seeds {
        let ac = SynthSpec {
            count: 1,
            fraction_ac: 1.0,
            tr_range: (78, 84),
            seed,
            ..SynthSpec::default()
        };
        let ac = SynthSpec {
            noise_sd: 0.2 * typical_load(&ac),
            ..ac
        };
        let (obs, truth) = hour17(&ac);
        assert_eq!(truth.model, TruthModel::Breakpoint);
        let temps: Vec<f64> = obs.temps().collect();
        let loads: Vec<f64> = obs.loads().collect();
        if !truth.tr.is_some_and(|tr| feasible_breakpoints(&temps, &cfg).contains(&tr)) {
            outside_grid += 1;
        }
        if let Ok(fit) = fit_breakpoint(&temps, &loads, &cfg) {
            if fit.tr == truth.tr {
                tr_exact += 1;
            }
            if (fit.a - truth.a).abs() <= 4.0 * fit.se_a {
                covered += 1;
            }
        }
        if fit_hour::<f64>(&obs, &cfg).map_or(false, |f| f.fit.kind == ModelKind::Breakpoint) {
            power += 1;
        }

        let line = SynthSpec {
            count: 1,
            fraction_ac: 0.0,
            seed: seed + 10_000,
            ..SynthSpec::default()
        };
        let line = SynthSpec {
            noise_sd: 0.2 * typical_load(&line),
            ..line
        };
        let (obs, truth) = hour17(&line);
        assert_eq!(truth.model, TruthModel::Linear);
        if fit_hour::<f64>(&obs, &cfg).map_or(false, |f| f.fit.kind == ModelKind::Breakpoint) {
            false_pos += 1;
        }
    }
    let share = |c: i32| c as f64 / seeds as f64;
    let pass = share(tr_exact) >= TR_EXACT_MIN
        && share(covered) >= SLOPE_COVER_MIN
        && share(power) >= F_POWER_MIN
        && share(false_pos) <= F_FALSE_MAX;
    Outcome {
        pass,
        detail: format!(
            "tr exact {:.3} (>= {TR_EXACT_MIN}), |a-â| <= 4se {:.3} (>= {SLOPE_COVER_MIN}), breakpoint chosen {:.3} (>= {F_POWER_MIN}) under hinge truth and {:.3} (<= {F_FALSE_MAX}) under linear truth; true tr outside the feasible grid in {outside_grid} seeds",
            share(tr_exact),
            share(covered),
            share(power),
            share(false_pos)
        ),
    }
}

fn peak_rss_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find(|l| l.starts_with("VmHWM:"))?
        .split_whitespace()
        .nth(1)?
        .parse()
        .ok()
}

fn scale_problem(k: usize) -> SelectionProblem<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5CA1E);
    let mu: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..=3.0)).collect();
    let sd: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..=1.0)).collect();
    let n = k / 100;
    let target = 0.8 * top_n_sum(&mu, n);
    SelectionProblem::from_sigma(mu, &sd, n, target).unwrap()
}

fn timed(p: &SelectionProblem<f64>) -> Duration {
    (0..3)
        .map(|_| {
            let start = Instant::now();
            let sol = solve_heuristic(p, 10).unwrap();
            let elapsed = start.elapsed();
            assert!(!sol.best.chosen.is_empty());
            elapsed
        })
        .min()
        .unwrap()
}

fn criterion_6() -> Outcome {
    let sizes = [250_000usize, 500_000, 1_000_000];
    let times: Vec<Duration> = sizes.iter().map(|&k| timed(&scale_problem(k))).collect();
    let peak = peak_rss_kb();
    let secs = times[2].as_secs_f64();
    let r1 = times[1].as_secs_f64() / times[0].as_secs_f64();
    let r2 = times[2].as_secs_f64() / times[1].as_secs_f64();
    let pass = secs < SCALE_SECONDS_MAX
        && peak.map_or(false, |kb| kb < SCALE_MEMORY_MAX_KB)
        && r1 < SCALE_RATIO_MAX
        && r2 < SCALE_RATIO_MAX;
    Outcome {
        pass,
        detail: format!(
            "K=1e6 in {secs:.3} s; doubling ratios {r1:.2} and {r2:.2}; peak RSS {}",
            peak.map_or("unavailable".into(), |kb| format!("{:.1} MiB", kb as f64 / 1024.0))
        ),
    }
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x70_70);
    let mut exact_violations = 0;
    let mut worst_heuristic: f64 = 0.0;
    for _ in 0..100 {
        let k = rng.random_range(8..=14);
        let n = rng.random_range(2..=k / 2);
        let mu: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..=3.0)).collect();
        let sd: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..=1.0)).collect();
        let s = top_n_sum(&mu, n);
        let t_grid: Vec<f64> = (1..=12).map(|i| s * 0.12 * i as f64).collect();
        let base_n = SelectionProblem::from_sigma(mu.clone(), &sd, n, t_grid[0]).unwrap();
        let n_grid: Vec<usize> = (1..=k).collect();
        let t_fixed = 0.5 * mu.iter().sum::<f64>();
        let base_t = SelectionProblem::from_sigma(mu, &sd, k, t_fixed).unwrap();

        let by_t = reliability_vs_target(&base_n, &t_grid, Algorithm::Oracle, 10).unwrap();
        let by_n = reliability_vs_n(&base_t, &n_grid, Algorithm::Oracle, 10).unwrap();
        exact_violations += monotonicity_violations(&by_t, false).len();
        exact_violations += monotonicity_violations(&by_n, true).len();

        let by_t = reliability_vs_target(&base_n, &t_grid, Algorithm::Heuristic, 10).unwrap();
        let by_n = reliability_vs_n(&base_t, &n_grid, Algorithm::Heuristic, 10).unwrap();
        for v in monotonicity_violations(&by_t, false)
            .into_iter()
            .chain(monotonicity_violations(&by_n, true))
        {
            worst_heuristic = worst_heuristic.max(v.magnitude);
        }
    }
    Outcome {
        pass: exact_violations == 0 && worst_heuristic <= HEURISTIC_MONOTONE_TOL,
        detail: format!(
            "exact curves: {exact_violations} violations; largest heuristic drop {worst_heuristic:.3e} (<= {HEURISTIC_MONOTONE_TOL})"
        ),
    }
}

fn criterion_8() -> Outcome {
    let at0 = std_normal_cdf(0.0f64);
    let lo = std_normal_cdf(-1.959964f64);
    let hi = std_normal_cdf(2.0f64);
    Outcome {
        pass: at0 == 0.5 && (lo - 0.025).abs() <= PHI_TOL && (hi - 0.977250).abs() <= PHI_TOL,
        detail: format!("Φ(0)={at0}, Φ(-1.959964)={lo:.9}, Φ(2)={hi:.9}"),
    }
}

fn drtarget(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_drtarget"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "drtarget {} exited {:?}: {}",
            args.first().unwrap_or(&""),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

fn compare_dirs(a: &Path, b: &Path, names: &[String]) -> Vec<String> {
    names
        .iter()
        .filter(|n| std::fs::read(a.join(n)).ok() != std::fs::read(b.join(n)).ok())
        .cloned()
        .collect()
}

fn criterion_9() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let d = |name: &str| tmp.path().join(name).display().to_string();
    let runs: Vec<(&str, Vec<String>)> = vec![
        ("synth", vec!["synth", "--count", "150", "--seed", "7", "--out-dir", &d("synth")].into_iter().map(String::from).collect()),
        ("fit", vec!["fit".into(), "--meter".into(), d("synth/meter.csv"), "--weather".into(), d("synth/weather.csv"), "--hours".into(), "16,17".into(), "--out-dir".into(), d("fit")]),
        ("select", vec!["select".into(), "--estimates".into(), d("fit/estimates.csv"), "--hour".into(), "17".into(), "--target".into(), "10".into(), "--n-max".into(), "20".into(), "--compare".into(), "--out-dir".into(), d("select")]),
        ("rel-vs-t", vec!["tradeoff".into(), "--estimates".into(), d("fit/estimates.csv"), "--hour".into(), "17".into(), "--kind".into(), "rel-vs-t".into(), "--n-max".into(), "20".into(), "--t-grid".into(), "2:30:2".into(), "--algorithms".into(), "heuristic,greedy".into(), "--out-dir".into(), d("rel_t")]),
        ("rel-vs-n", vec!["tradeoff".into(), "--estimates".into(), d("fit/estimates.csv"), "--hour".into(), "17".into(), "--kind".into(), "rel-vs-n".into(), "--target".into(), "10".into(), "--algorithms".into(), "heuristic,greedy".into(), "--out-dir".into(), d("rel_n")]),
        ("minn-vs-t", vec!["tradeoff".into(), "--estimates".into(), d("fit/estimates.csv"), "--hour".into(), "17".into(), "--kind".into(), "minn-vs-t".into(), "--t-grid".into(), "2:40:4".into(), "--out-dir".into(), d("minn")]),
        ("compare", vec!["compare".into(), "--estimates".into(), d("fit/estimates.csv"), "--hour".into(), "17".into(), "--target".into(), "10".into(), "--n-max".into(), "20".into(), "--out-dir".into(), d("compare")]),
    ];
    let mut problems = Vec::new();
    let mut artifacts = 0;
    for (label, args) in &runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        if let Err(e) = drtarget(&args) {
            problems.push(format!("{label}: {e}"));
            continue;
        }
        let out_dir = Path::new(args[args.len() - 1]);
        let manifest = out_dir.join("manifest.json");
        let text = std::fs::read_to_string(&manifest).unwrap_or_default();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap_or_default();
        let names: Vec<String> = parsed["artifacts"]
            .as_array()
            .map(|a| a.iter().filter_map(|x| x["path"].as_str().map(String::from)).collect())
            .unwrap_or_default();
        if names.is_empty() {
            problems.push(format!("{label}: manifest lists no artifacts"));
            continue;
        }
        artifacts += names.len();
        let replay_dir = tmp.path().join(format!("replay_{label}"));
        let replay = drtarget(&[
            "--threads",
            "1",
            "replay",
            "--manifest",
            &manifest.display().to_string(),
            "--out-dir",
            &replay_dir.display().to_string(),
        ]);
        if let Err(e) = replay {
            problems.push(format!("{label} replay: {e}"));
            continue;
        }
        let differing = compare_dirs(out_dir, &replay_dir, &names);
        if !differing.is_empty() {
            problems.push(format!("{label}: {} differ", differing.join(", ")));
        }
    }
    Outcome {
        pass: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("{} runs, {artifacts} artifacts regenerated byte-identically on one thread", runs.len())
        } else {
            problems.join("; ")
        },
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("heuristic within the consecutive-sd ratio bound of the optimum", criterion_1),
        ("heuristic dominates greedy, exact dominates heuristic", criterion_2),
        ("greedy reliability above one half when the floor holds", criterion_3),
        ("bound against sweep size on the reference instance", criterion_4),
        ("breakpoint regression recovery and model selection", criterion_5),
        ("one million candidates", criterion_6),
        ("monotone reliability curves", criterion_7),
        ("normal CDF values", criterion_8),
        ("byte-identical CLI replay", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} {name}: {} [{:.1} s]",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
