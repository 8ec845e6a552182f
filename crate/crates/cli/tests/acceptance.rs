//! Acceptance criteria, one line per criterion.
//!
//! Run with `cargo test -p sectorcoint --test acceptance`. Pass a criterion
//! number (e.g. `-- 4`) to run a subset. Criteria listed in
//! `KNOWN_DEVIATIONS` are reported but do not fail the run; `BLOCKED` means
//! an external input is missing.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use sectorcoint_cli::config::{Overrides, PipelineConfig};
use sectorcoint_cli::demo::{write_demo, DEMO_SEED};
use sectorcoint_cli::stages::{run_pipeline, run_stage, Stage};
use sectorcoint_core::cointegration::{
    embedded_critical_values, fit_break_regression, gh_minima, gh_test, phillips_stats, wald_test, GhModel, GhOptions,
    GhStatistic, LinearRestriction,
};
use sectorcoint_core::dynamics::{fit_var_diff, VarFit};
use sectorcoint_core::ingest::{fetch_fred, load_csv};
use sectorcoint_core::inference::Level;
use sectorcoint_core::linalg::{ols, CovarianceKind, Matrix};
use sectorcoint_core::montecarlo::{
    generate, replication_seed, simulate_critical_values, simulate_gh_null, DgpKind, DgpSpec,
};
use sectorcoint_core::rng::seeded;
use sectorcoint_core::series::{cumsum, diff, yoy_growth, MonthIndex, TimeSeries};
use sectorcoint_core::stability::{cusum, cusum_sq, recursive_residuals};
use sectorcoint_core::ucsv::{estimate_ucsv, simulate_ucsv, UcsvConfig};
use sectorcoint_core::unitroot::{adf_test_with, pp_test, LagRule, TrendSpec};

const KNOWN_DEVIATIONS: &[u32] = &[1];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Blocked,
}

struct Outcome {
    status: Status,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        Self {
            status: if ok { Status::Pass } else { Status::Fail },
            detail,
        }
    }
}

type Criterion = fn() -> Outcome;

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(u32, &str, Criterion); 9] = [
        (1, "GH critical values match the published tables", c1_critical_values),
        (2, "test size under random-walk nulls", c2_size),
        (3, "Z_t break localization", c3_break_localization),
        (4, "break-regression coefficient recovery and Wald size", c4_recovery),
        (5, "UC-SV trend fidelity", c5_ucsv),
        (6, "CPI inflation unit-root band", c6_cpi),
        (7, "CUSUM size and power", c7_cusum),
        (8, "pipeline determinism and staged composability", c8_pipeline),
        (9, "property checks", c9_properties),
    ];
    let mut unexpected = Vec::new();
    for (id, title, run) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let started = Instant::now();
        let out = run();
        let secs = started.elapsed().as_secs_f64();
        let tag = match out.status {
            Status::Pass => "PASS",
            Status::Fail if KNOWN_DEVIATIONS.contains(&id) => "FAIL (known deviation)",
            Status::Fail => "FAIL",
            Status::Blocked => "BLOCKED",
        };
        println!("criterion {id} [{tag}] {title}: {} ({secs:.1}s)", out.detail);
        if out.status == Status::Fail && !KNOWN_DEVIATIONS.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}

fn rate(hits: usize, reps: usize) -> f64 {
    hits as f64 / reps as f64
}

fn c1_critical_values() -> Outcome {
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut slowest = 0.0f64;
    let mut parts = Vec::new();
    for (k, model) in [GhModel::LS, GhModel::LST, GhModel::RS].into_iter().enumerate() {
        let started = Instant::now();
        let table = match simulate_critical_values(model, 2, 160, 5000, 1_000 + k as u64) {
            Ok(t) => t,
            Err(e) => return Outcome::check(false, format!("{model}: {e}")),
        };
        slowest = slowest.max(started.elapsed().as_secs_f64());
        for stat in [GhStatistic::Adf, GhStatistic::Zt] {
            let sim = table.get(stat);
            let Some(publ) = embedded_critical_values(model, 2, stat) else {
                return Outcome::check(false, format!("no published values for {model} {stat}"));
            };
            let d = [sim.one - publ.one, sim.five - publ.five, sim.ten - publ.ten];
            ok &= d[0].abs() <= 0.15 && d[1].abs() <= 0.10 && d[2].abs() <= 0.15;
            worst = worst.max(d[1].abs());
            parts.push(format!("{model} {stat} 5% {:.2} vs {:.2}", sim.five, publ.five));
        }
    }
    ok &= slowest < 300.0;
    Outcome::check(
        ok,
        format!("{}; worst 5% gap {worst:.3}; slowest model {slowest:.1}s", parts.join(", ")),
    )
}

fn c2_size() -> Outcome {
    let opts = GhOptions::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, model) in GhModel::ALL.into_iter().enumerate() {
        let k = k as u64;
        let cvs = simulate_critical_values(model, 2, 160, 2000, 2_100 + k);
        let null = simulate_gh_null(model, 2, 160, 2000, 2_200 + k, &opts);
        let (cvs, null) = match (cvs, null) {
            (Ok(c), Ok(n)) => (c, n),
            (Err(e), _) | (_, Err(e)) => return Outcome::check(false, format!("{model}: {e}")),
        };
        for stat in [GhStatistic::Adf, GhStatistic::Zt, GhStatistic::Zalpha] {
            let cv = cvs.get(stat).five;
            let draws = null.get(stat);
            let r = rate(draws.iter().filter(|s| **s < cv).count(), draws.len());
            ok &= (r - 0.05).abs() <= 0.02;
            parts.push(format!("{model} {stat} {r:.3}"));
        }
    }
    let reps = 2000;
    let rejections: Vec<(bool, bool)> = (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = seeded(replication_seed(2_300, i));
            let mut x = 0.0;
            let v: Vec<f64> = (0..160)
                .map(|_| {
                    x += r.sample::<f64, _>(StandardNormal);
                    x
                })
                .collect();
            let s = TimeSeries::new("rw", MonthIndex::from_parts(2002, 7), v).unwrap();
            let adf = adf_test_with(&s, TrendSpec::Constant, LagRule::Bic, None).unwrap();
            let pp = pp_test(&s, TrendSpec::Constant, None).unwrap();
            (
                adf.statistic < adf.critical_values.five,
                pp.statistic < pp.critical_values.five,
            )
        })
        .collect();
    let adf = rate(rejections.iter().filter(|r| r.0).count(), reps);
    let pp = rate(rejections.iter().filter(|r| r.1).count(), reps);
    ok &= (adf - 0.05).abs() <= 0.02 && (pp - 0.05).abs() <= 0.02;
    parts.push(format!("ADF {adf:.3}"));
    parts.push(format!("PP {pp:.3}"));
    Outcome::check(ok, parts.join(", "))
}

fn c3_break_localization() -> Outcome {
    // noise is AR(0.3) with unit innovations: stationary sd 1/sqrt(0.91)
    let noise_sd = 1.0 / (1.0f64 - 0.09).sqrt();
    let shift = 3.0 * noise_sd + 0.05;
    let theta = vec![1.0, 0.5, 1.0, 1.0, shift, 0.0];
    let spec = DgpSpec::cointegrated_with_break(GhModel::RS, 2, 160, 0.5, theta, 0);
    let truth = spec.break_position().unwrap() as i64;
    let reps = 200;
    let opts = GhOptions::default();
    let hits: Vec<bool> = (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let set = generate(&spec.with_seed(replication_seed(3_000, i))).unwrap();
            let xs: Vec<&[f64]> = set[1..].iter().map(|s| s.values()).collect();
            let m = gh_minima(set[0].values(), &xs, GhModel::RS, &opts).unwrap();
            (m.z_t.1 as i64 - truth).abs() <= 5
        })
        .collect();
    let r = rate(hits.iter().filter(|h| **h).count(), reps);
    Outcome::check(
        r >= 0.80,
        format!("slope change {shift:.2}, Z_t break within 5 months in {r:.3} of {reps}"),
    )
}

fn c4_recovery() -> Outcome {
    // RST: [1, D, t, tD, x1, x2, x1 D, x2 D]; x1's post-break slope is zero
    let theta = vec![1.0, -0.8, 0.02, -0.01, -0.1, 0.6, 0.1, 0.3];
    let names = ["C", "Dum x C", "Trend", "Dum x Trend", "x1", "x2", "Dum x x1", "Dum x x2"];
    let spec = DgpSpec {
        kind: DgpKind::CointegratedWithBreak {
            model: GhModel::RST,
            m: 2,
            tau: 0.5,
            theta: theta.clone(),
            ar: 0.0,
            noise_sd: 1.0,
        },
        n: 160,
        seed: 0,
    };
    let position = spec.break_position().unwrap();
    let reps = 200;
    let draws: Vec<(Vec<bool>, bool)> = (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let set = generate(&spec.with_seed(replication_seed(4_000, i))).unwrap();
            let brk = set[0].date_at(position - 1);
            let fit = fit_break_regression(&set[0], &set[1..], GhModel::RST, brk, CovarianceKind::Conventional).unwrap();
            let covered = names
                .iter()
                .zip(&theta)
                .map(|(n, t)| {
                    let c = &fit.coefficients[fit.index_of(n).unwrap()];
                    (c.estimate - t).abs() <= 2.0 * c.std_error
                })
                .collect();
            let r = LinearRestriction::sum_of(&fit, &["x1", "Dum x x1"], 0.0).unwrap();
            (covered, wald_test(&fit, &r).unwrap().p_value < 0.05)
        })
        .collect();
    let mut coverage = BTreeMap::new();
    for (j, n) in names.iter().enumerate() {
        coverage.insert(*n, rate(draws.iter().filter(|d| d.0[j]).count(), reps));
    }
    let (weakest, min_cov) = coverage
        .iter()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(n, c)| (*n, *c))
        .unwrap();
    let joint = rate(draws.iter().filter(|d| d.0.iter().all(|c| *c)).count(), reps);
    let wald = rate(draws.iter().filter(|d| d.1).count(), reps);
    Outcome::check(
        min_cov >= 0.90 && wald <= 0.10,
        format!(
            "lowest per-coefficient 2-SE coverage {min_cov:.3} ({weakest}), all jointly {joint:.3}; Wald rejection {wald:.3}"
        ),
    )
}

fn rmse(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64).sqrt()
}

fn c5_ucsv() -> Outcome {
    let reps = 100;
    let cfg = |seed| UcsvConfig {
        seed,
        ..UcsvConfig::default()
    };
    let runs: Vec<(bool, f64)> = (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let paths = simulate_ucsv(&cfg(0), 160, replication_seed(5_000, i)).unwrap();
            let post = estimate_ucsv(&paths.pi, &cfg(replication_seed(5_100, i))).unwrap();
            let tau = paths.tau.values();
            let better = rmse(post.trend.values(), tau) < rmse(paths.pi.values(), tau);
            let identity = post
                .trend
                .values()
                .iter()
                .zip(post.gap.values())
                .zip(paths.pi.values())
                .map(|((t, g), p)| (t + g - p).abs())
                .fold(0.0, f64::max);
            (better, identity)
        })
        .collect();
    let r = rate(runs.iter().filter(|r| r.0).count(), reps);
    let identity = runs.iter().map(|r| r.1).fold(0.0, f64::max);
    let paths = simulate_ucsv(&cfg(0), 160, 5).unwrap();
    let a = estimate_ucsv(&paths.pi, &cfg(9)).unwrap();
    let b = estimate_ucsv(&paths.pi, &cfg(9)).unwrap();
    let same = a.trend == b.trend && a.gap == b.gap && a.sigma_eta == b.sigma_eta && a.sigma_eps == b.sigma_eps;
    Outcome::check(
        r >= 0.95 && identity <= 1e-10 && same,
        format!("trend beats raw inflation in {r:.2}; max |trend + gap - pi| {identity:.1e}; repeat run identical: {same}"),
    )
}

/// Raw CPI levels from `SECTORCOINT_CPI_CSV`, the local FRED cache, or FRED
/// itself when `FRED_API_KEY` is set.
fn cpi_levels(window: (MonthIndex, MonthIndex)) -> Option<Result<TimeSeries, String>> {
    if let Ok(path) = std::env::var("SECTORCOINT_CPI_CSV") {
        return Some(load_csv(Path::new(&path), "date", "value").map_err(|e| format!("{path}: {e}")));
    }
    let cache = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/fred/cache");
    let key = std::env::var("FRED_API_KEY").ok();
    let cached = fs::read_dir(&cache)
        .map(|d| d.flatten().any(|e| e.file_name().to_string_lossy().starts_with("CPIAUCSL")))
        .unwrap_or(false);
    if key.is_none() && !cached {
        return None;
    }
    Some(fetch_fred("CPIAUCSL", key.as_deref().unwrap_or(""), window, Some(&cache)).map_err(|e| e.to_string()))
}

fn c6_cpi() -> Outcome {
    let start = MonthIndex::from_parts(2002, 7);
    let end = MonthIndex::from_parts(2015, 10);
    let Some(levels) = cpi_levels((start.plus(-12), end)) else {
        return Outcome {
            status: Status::Blocked,
            detail: "no CPI data: set SECTORCOINT_CPI_CSV to a date,value CSV of CPIAUCSL or FRED_API_KEY".into(),
        };
    };
    let run = || -> Result<(f64, Option<Level>, usize), String> {
        let levels = levels?;
        let infl = yoy_growth(&levels)
            .and_then(|s| s.window(start, end))
            .map_err(|e| e.to_string())?;
        if infl.len() != 160 {
            return Err(format!("expected 160 inflation observations, got {}", infl.len()));
        }
        let level = adf_test_with(&infl, TrendSpec::Constant, LagRule::Bic, None).map_err(|e| e.to_string())?;
        let d = diff(&infl).map_err(|e| e.to_string())?;
        let first = adf_test_with(&d, TrendSpec::Constant, LagRule::Bic, None).map_err(|e| e.to_string())?;
        Ok((level.statistic, first.reject_at, infl.len()))
    };
    match run() {
        Ok((level, first, n)) => Outcome::check(
            (-2.6..=-1.5).contains(&level) && first == Some(Level::One),
            format!("n = {n}, level ADF {level:.2}, first difference rejects at {first:?}"),
        ),
        Err(e) => Outcome::check(false, e),
    }
}

fn c7_cusum() -> Outcome {
    let n = 160;
    let reps = 500;
    let spec = |shift: Option<Vec<f64>>, seed| DgpSpec {
        kind: DgpKind::StableRegression {
            beta: vec![1.0, 0.5],
            noise_sd: 1.0,
            tau: 0.5,
            coefficient_shift: shift,
            noise_factor: None,
        },
        n,
        seed,
    };
    let run = |shift: Option<Vec<f64>>, master: u64| -> Vec<(bool, bool, bool)> {
        (0..reps as u64)
            .into_par_iter()
            .map(|i| {
                let set = generate(&spec(shift.clone(), replication_seed(master, i))).unwrap();
                let x = Matrix::from_columns(&[vec![1.0; n], set[1].values().to_vec()]).unwrap();
                let w = recursive_residuals(set[0].values(), &x).unwrap();
                let c = cusum(&w, 2, n, Level::Five).unwrap();
                let sq = cusum_sq(&w, 2, n, Level::Five).unwrap();
                (c.breached, sq.breached, *sq.statistics.last().unwrap() == 1.0)
            })
            .collect()
    };
    let stable = run(None, 7_000);
    let shifted = run(Some(vec![5.0, 0.0]), 7_100);
    let size = rate(stable.iter().filter(|r| r.0).count(), reps);
    let size_sq = rate(stable.iter().filter(|r| r.1).count(), reps);
    let power = rate(shifted.iter().filter(|r| r.0).count(), reps);
    let ends = stable.iter().chain(&shifted).all(|r| r.2);
    Outcome::check(
        size <= 0.07 && size_sq <= 0.07 && power >= 0.80 && ends,
        format!("stable breach CUSUM {size:.3}, CUSUM-SQ {size_sq:.3}; shift breach {power:.3}; CUSUM-SQ ends at 1: {ends}"),
    )
}

fn listing(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .flatten()
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect();
    out.sort();
    out
}

fn c8_pipeline() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("demo");
    if let Err(e) = write_demo(&data, DEMO_SEED) {
        return Outcome::check(false, e.to_string());
    }
    let cfg = |out: PathBuf| {
        PipelineConfig::load(
            &data.join("pipeline.toml"),
            &Overrides {
                out: Some(out),
                ..Overrides::default()
            },
        )
        .unwrap()
    };
    let (a, b, staged) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("staged"));
    let run = || -> Result<(), String> {
        run_pipeline(&cfg(a.clone())).map_err(|e| e.to_string())?;
        run_pipeline(&cfg(b.clone())).map_err(|e| e.to_string())?;
        let c = cfg(staged.clone());
        for stage in Stage::PIPELINE {
            run_stage(&c, stage).map_err(|e| e.to_string())?;
        }
        Ok(())
    };
    if let Err(e) = run() {
        return Outcome::check(false, e);
    }
    let first = listing(&a);
    let repeat = first == listing(&b);
    let composed = first == listing(&staged);
    Outcome::check(
        repeat && composed && !first.is_empty(),
        format!(
            "{} artifacts; repeat run identical: {repeat}; staged run identical: {composed}",
            first.len()
        ),
    )
}

fn normal_vec(r: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.sample(StandardNormal)).collect()
}

/// Solves `(X'X) b = X'y` by Gaussian elimination with partial pivoting.
fn normal_equations(cols: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let k = cols.len();
    let mut a: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut row: Vec<f64> = (0..k).map(|j| cols[i].iter().zip(&cols[j]).map(|(p, q)| p * q).sum()).collect();
            row.push(cols[i].iter().zip(y).map(|(p, q)| p * q).sum());
            row
        })
        .collect();
    for c in 0..k {
        let p = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        for i in c + 1..k {
            let f = a[i][c] / a[c][c];
            for j in c..=k {
                a[i][j] -= f * a[c][j];
            }
        }
    }
    let mut b = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| a[i][j] * b[j]).sum();
        b[i] = (a[i][k] - s) / a[i][i];
    }
    b
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn c9_properties() -> Outcome {
    let mut failures = Vec::new();
    let start = MonthIndex::from_parts(2002, 7);

    let mut worst = 0.0f64;
    for case in 0..50 {
        let mut r = seeded(9_000 + case);
        let n = 40 + (case as usize % 30);
        let mut cols = vec![vec![1.0; n]];
        for _ in 0..3 {
            cols.push(normal_vec(&mut r, n));
        }
        let y = normal_vec(&mut r, n);
        let fit = ols(&Matrix::from_columns(&cols).unwrap(), &y).unwrap();
        for (a, b) in fit.coefficients.iter().zip(normal_equations(&cols, &y)) {
            worst = worst.max(rel_gap(*a, b));
        }
    }
    if worst > 1e-8 {
        failures.push(format!("OLS vs normal equations {worst:.1e}"));
    }

    let mut worst = 0.0f64;
    for case in 0..50 {
        let mut r = seeded(9_100 + case);
        let s = TimeSeries::new("s", start, normal_vec(&mut r, 30).iter().map(|v| 100.0 * v).collect()).unwrap();
        let back = cumsum(&diff(&s).unwrap());
        if back.start() != s.start().succ() {
            failures.push("cumsum of diff starts at the wrong month".into());
        }
        for (i, v) in back.values().iter().enumerate() {
            worst = worst.max((s.values()[0] + v - s.values()[i + 1]).abs());
        }
    }
    if worst > 1e-9 {
        failures.push(format!("diff/cumsum round trip {worst:.1e}"));
    }

    let mut worst = 0.0f64;
    for case in 0..50 {
        let mut r = seeded(9_200 + case);
        let mut e = 0.0;
        let eps: Vec<f64> = (0..160)
            .map(|_| {
                e = 0.6 * e + r.sample::<f64, _>(StandardNormal);
                e
            })
            .collect();
        let bw = 4;
        let ph = phillips_stats(&eps, bw).unwrap();
        let n = eps.len();
        let cross: f64 = (0..n - 1).map(|t| eps[t] * eps[t + 1]).sum();
        let sum_sq: f64 = (0..n - 1).map(|t| eps[t] * eps[t]).sum();
        let rho = cross / sum_sq;
        let v: Vec<f64> = (1..n).map(|t| eps[t] - rho * eps[t - 1]).collect();
        let m = v.len() as f64;
        let lambda: f64 = (1..=bw)
            .map(|j| (1.0 - j as f64 / (bw as f64 + 1.0)) * (j..v.len()).map(|t| v[t] * v[t - j]).sum::<f64>() / m)
            .sum();
        let rho_star = (cross - n as f64 * lambda) / sum_sq;
        worst = worst
            .max((ph.rho_star - rho_star).abs())
            .max(rel_gap(ph.z_alpha, n as f64 * (rho_star - 1.0)));
    }
    if worst > 1e-10 {
        failures.push(format!("bias-corrected rho identity {worst:.1e}"));
    }

    let mut worst = 0.0f64;
    let opts = GhOptions::default();
    for (case, model) in GhModel::ALL.into_iter().enumerate() {
        let spec = DgpSpec::random_walks(2, 160, 9_300 + case as u64);
        let set = generate(&spec).unwrap();
        let scaled: Vec<TimeSeries> = set
            .iter()
            .zip([37.5, -0.2, 4.0])
            .map(|(s, a)| s.map_values(s.values().iter().map(|v| a * v + 3.0).collect()).unwrap())
            .collect();
        let a = gh_test(&set[0], &set[1..], model, &opts).unwrap();
        let b = gh_test(&scaled[0], &scaled[1..], model, &opts).unwrap();
        worst = worst
            .max(rel_gap(a.adf.statistic, b.adf.statistic))
            .max(rel_gap(a.z_t.statistic, b.z_t.statistic))
            .max(rel_gap(a.z_alpha.statistic, b.z_alpha.statistic));
        if a.z_t.position != b.z_t.position {
            failures.push(format!("{model} break moved under rescaling"));
        }
    }
    if worst > 1e-8 {
        failures.push(format!("GH scale invariance {worst:.1e}"));
    }

    let half = VarFit::from_coefficients(vec![vec![vec![0.5, 0.0], vec![0.0, 0.5]]]).unwrap();
    let unit = VarFit::from_coefficients(vec![vec![vec![1.0, 0.0], vec![0.0, 0.2]]]).unwrap();
    if !(half.stable && (half.spectral_radius - 0.5).abs() < 1e-10) {
        failures.push(format!("VAR(1) 0.5 I radius {}", half.spectral_radius));
    }
    if unit.stable {
        failures.push("unit-root VAR reported stable".into());
    }
    let truth = vec![vec![vec![0.5, 0.1], vec![0.0, 0.3]]];
    let spec = DgpSpec {
        kind: DgpKind::VarDiff {
            coefficients: truth,
            noise_sd: 1.0,
        },
        n: 2000,
        seed: 9_400,
    };
    let set = generate(&spec).unwrap();
    let fit = fit_var_diff(&set, 1).unwrap();
    if !(fit.stable && (fit.spectral_radius - 0.5).abs() < 0.1) {
        failures.push(format!("estimated VAR radius {}", fit.spectral_radius));
    }

    Outcome::check(
        failures.is_empty(),
        if failures.is_empty() {
            "OLS, diff/cumsum, rho identity, GH scale invariance, VAR stability all hold".into()
        } else {
            failures.join("; ")
        },
    )
}
