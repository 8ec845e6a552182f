//! Data-generating processes and a seeded, parallel replication engine.
//!
//! Replication `i` under master seed `s` always draws from
//! [`substream`]`(s, i)`, so results do not depend on thread count or
//! scheduling.

use std::time::{Duration, Instant};

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cointegration::{design_columns, gh_minima, GhModel, GhOptions, GhStatistic};
use crate::error::{Error, Result};
use crate::inference::{CriticalValues, Level};
use crate::rng::{seeded, substream, Rng as ChainRng};
use crate::series::{MonthIndex, TimeSeries};
use crate::ucsv::{simulate_ucsv_with, SimulationParams};

/// First month of every generated series (the paper's sample start).
pub const DEFAULT_START: MonthIndex = MonthIndex::from_parts(2002, 7);

/// Default AR(1) coefficient of the equilibrium error.
pub const DEFAULT_AR: f64 = 0.3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DgpKind {
    /// `m + 1` independent Gaussian random walks: `y, x1..xm`.
    RandomWalksNull { m: usize },
    /// `y = D(model, tau) theta + u`, `u` AR(1), regressors independent
    /// random walks. `theta` follows the design column order.
    CointegratedWithBreak {
        model: GhModel,
        m: usize,
        tau: f64,
        theta: Vec<f64>,
        ar: f64,
        noise_sd: f64,
    },
    /// Forward simulation of the UC-SV model: `pi, tau, sigma_eta, sigma_eps`.
    UcsvDgp { gamma: f64, params: SimulationParams },
    /// `y = [1, x] beta + e` with iid standard normal regressors. Optional
    /// step in the coefficients and multiplicative step in the noise
    /// standard deviation, both at fraction `tau` of the sample.
    StableRegression {
        beta: Vec<f64>,
        noise_sd: f64,
        tau: f64,
        coefficient_shift: Option<Vec<f64>>,
        noise_factor: Option<f64>,
    },
    /// Levels whose first differences follow a zero-mean VAR(p);
    /// `coefficients[l][i][j]` is lag `l + 1`, equation `i`, variable `j`.
    VarDiff {
        coefficients: Vec<Vec<Vec<f64>>>,
        noise_sd: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub kind: DgpKind,
    pub n: usize,
    pub seed: u64,
}

impl DgpSpec {
    pub fn random_walks(m: usize, n: usize, seed: u64) -> Self {
        Self {
            kind: DgpKind::RandomWalksNull { m },
            n,
            seed,
        }
    }

    /// Break alternative with unit-variance AR(0.3) error.
    pub fn cointegrated_with_break(model: GhModel, m: usize, n: usize, tau: f64, theta: Vec<f64>, seed: u64) -> Self {
        Self {
            kind: DgpKind::CointegratedWithBreak {
                model,
                m,
                tau,
                theta,
                ar: DEFAULT_AR,
                noise_sd: 1.0,
            },
            n,
            seed,
        }
    }

    pub fn stable_regression(beta: Vec<f64>, noise_sd: f64, n: usize, seed: u64) -> Self {
        Self {
            kind: DgpKind::StableRegression {
                beta,
                noise_sd,
                tau: 0.5,
                coefficient_shift: None,
                noise_factor: None,
            },
            n,
            seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            kind: self.kind.clone(),
            n: self.n,
            seed,
        }
    }

    /// 1-based position of the last pre-break observation, if the kind has one.
    pub fn break_position(&self) -> Option<usize> {
        match &self.kind {
            DgpKind::CointegratedWithBreak { tau, .. } | DgpKind::StableRegression { tau, .. } => {
                Some((self.n as f64 * tau).floor() as usize)
            }
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 30 {
            return Err(Error::InvalidInput(format!("n must be at least 30, got {}", self.n)));
        }
        let tau_ok = |tau: f64| {
            if tau > 0.0 && tau < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("break fraction {tau} outside (0, 1)")))
            }
        };
        let sd_ok = |sd: f64| {
            if sd >= 0.0 && sd.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("noise scale {sd} must be non-negative")))
            }
        };
        match &self.kind {
            DgpKind::RandomWalksNull { m } => {
                if *m == 0 {
                    return Err(Error::InvalidInput("m must be positive".into()));
                }
            }
            DgpKind::CointegratedWithBreak {
                model,
                m,
                tau,
                theta,
                ar,
                noise_sd,
            } => {
                tau_ok(*tau)?;
                sd_ok(*noise_sd)?;
                if *m == 0 || theta.len() != model.column_count(*m) {
                    return Err(Error::InvalidInput(format!(
                        "{model} with m = {m} needs {} coefficients, got {}",
                        model.column_count(*m),
                        theta.len()
                    )));
                }
                if !(ar.abs() < 1.0) {
                    return Err(Error::InvalidInput(format!("AR coefficient {ar} is not stationary")));
                }
            }
            DgpKind::UcsvDgp { gamma, params } => {
                if !(*gamma >= 0.0) || !(params.sigma_eta0 > 0.0) || !(params.sigma_eps0 > 0.0) {
                    return Err(Error::InvalidInput("UC-SV scales must be positive".into()));
                }
            }
            DgpKind::StableRegression {
                beta,
                noise_sd,
                tau,
                coefficient_shift,
                noise_factor,
            } => {
                tau_ok(*tau)?;
                sd_ok(*noise_sd)?;
                if beta.is_empty() {
                    return Err(Error::InvalidInput("beta must hold at least the intercept".into()));
                }
                if coefficient_shift.as_ref().is_some_and(|s| s.len() != beta.len()) {
                    return Err(Error::InvalidInput("coefficient shift must match beta".into()));
                }
                if noise_factor.is_some_and(|f| !(f > 0.0)) {
                    return Err(Error::InvalidInput("noise factor must be positive".into()));
                }
            }
            DgpKind::VarDiff { coefficients, noise_sd } => {
                sd_ok(*noise_sd)?;
                let k = coefficients.first().map_or(0, |a| a.len());
                if k == 0 || coefficients.iter().any(|a| a.len() != k || a.iter().any(|r| r.len() != k)) {
                    return Err(Error::InvalidInput("VAR coefficient matrices must be square and equal-sized".into()));
                }
            }
        }
        Ok(())
    }
}

fn normal(rng: &mut ChainRng) -> f64 {
    rng.sample(StandardNormal)
}

fn random_walk(rng: &mut ChainRng, n: usize) -> Vec<f64> {
    let mut level = 0.0;
    (0..n)
        .map(|_| {
            level += normal(rng);
            level
        })
        .collect()
}

fn series(id: impl Into<String>, values: Vec<f64>) -> Result<TimeSeries> {
    TimeSeries::new(id, DEFAULT_START, values)
}

/// Draws one data set. Identical specs give identical output.
pub fn generate(spec: &DgpSpec) -> Result<Vec<TimeSeries>> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = seeded(spec.seed);
    match &spec.kind {
        DgpKind::RandomWalksNull { m } => {
            let mut out = vec![series("y", random_walk(&mut rng, n))?];
            for j in 1..=*m {
                out.push(series(format!("x{j}"), random_walk(&mut rng, n))?);
            }
            Ok(out)
        }
        DgpKind::CointegratedWithBreak {
            model,
            m,
            theta,
            ar,
            noise_sd,
            ..
        } => {
            let xs: Vec<Vec<f64>> = (0..*m).map(|_| random_walk(&mut rng, n)).collect();
            let slices: Vec<&[f64]> = xs.iter().map(|x| x.as_slice()).collect();
            let design = design_columns(&slices, n, *model, spec.break_position());
            let mut y = design.mul_vec(theta);
            // stationary start for the AR(1) error
            let mut u = noise_sd * normal(&mut rng) / (1.0 - ar * ar).sqrt();
            for v in y.iter_mut() {
                *v += u;
                u = ar * u + noise_sd * normal(&mut rng);
            }
            let mut out = vec![series("y", y)?];
            for (j, x) in xs.into_iter().enumerate() {
                out.push(series(format!("x{}", j + 1), x)?);
            }
            Ok(out)
        }
        DgpKind::UcsvDgp { gamma, params } => {
            let paths = simulate_ucsv_with(params, *gamma, n, rng.next_u64())?;
            Ok(vec![paths.pi, paths.tau, paths.sigma_eta, paths.sigma_eps])
        }
        DgpKind::StableRegression {
            beta,
            noise_sd,
            coefficient_shift,
            noise_factor,
            ..
        } => {
            let m = beta.len() - 1;
            let pos = spec.break_position().unwrap_or(n);
            let xs: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| normal(&mut rng)).collect()).collect();
            let y: Vec<f64> = (0..n)
                .map(|t| {
                    let after = t + 1 > pos;
                    let coef = |j: usize| {
                        beta[j]
                            + match coefficient_shift {
                                Some(s) if after => s[j],
                                _ => 0.0,
                            }
                    };
                    let sd = match noise_factor {
                        Some(f) if after => noise_sd * f,
                        _ => *noise_sd,
                    };
                    let mean = coef(0) + (0..m).map(|j| coef(j + 1) * xs[j][t]).sum::<f64>();
                    mean + sd * normal(&mut rng)
                })
                .collect();
            let mut out = vec![series("y", y)?];
            for (j, x) in xs.into_iter().enumerate() {
                out.push(series(format!("x{}", j + 1), x)?);
            }
            Ok(out)
        }
        DgpKind::VarDiff { coefficients, noise_sd } => {
            let k = coefficients[0].len();
            let p = coefficients.len();
            let burn = 100;
            let mut d: Vec<Vec<f64>> = Vec::with_capacity(n + burn);
            for t in 0..n + burn {
                let mut row = vec![0.0; k];
                for (i, r) in row.iter_mut().enumerate() {
                    let mut v = noise_sd * normal(&mut rng);
                    for (l, a) in coefficients.iter().enumerate() {
                        if t > l {
                            v += (0..k).map(|j| a[i][j] * d[t - l - 1][j]).sum::<f64>();
                        }
                    }
                    *r = v;
                }
                d.push(row);
            }
            let _ = p;
            (0..k)
                .map(|j| {
                    let mut level = 0.0;
                    let values = d[burn..]
                        .iter()
                        .map(|row| {
                            level += row[j];
                            level
                        })
                        .collect();
                    series(format!("v{}", j + 1), values)
                })
                .collect()
        }
    }
}

/// Sample quantile with linear interpolation between order statistics.
/// `sorted` must be ascending.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

fn critical_from(values: &[f64]) -> CriticalValues {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    CriticalValues::new(
        quantile_sorted(&v, 0.01),
        quantile_sorted(&v, 0.05),
        quantile_sorted(&v, 0.10),
    )
}

/// Per-replication minima of the three break statistics under the null, in
/// replication order.
#[derive(Clone, Debug, PartialEq)]
pub struct GhNullSamples {
    pub adf: Vec<f64>,
    pub z_t: Vec<f64>,
    pub z_alpha: Vec<f64>,
}

impl GhNullSamples {
    pub fn get(&self, stat: GhStatistic) -> &[f64] {
        match stat {
            GhStatistic::Adf => &self.adf,
            GhStatistic::Zt => &self.z_t,
            GhStatistic::Zalpha => &self.z_alpha,
        }
    }

    pub fn quantile(&self, stat: GhStatistic, p: f64) -> f64 {
        quantile(self.get(stat), p)
    }

    pub fn critical_values(&self, stat: GhStatistic) -> CriticalValues {
        critical_from(self.get(stat))
    }
}

/// One null replication: minima of ADF, Z_t, Z_alpha.
pub fn gh_null_replication(model: GhModel, m: usize, n: usize, master: u64, index: u64, opts: &GhOptions) -> Result<[f64; 3]> {
    let mut rng = substream(master, index);
    let y = random_walk(&mut rng, n);
    let xs: Vec<Vec<f64>> = (0..m).map(|_| random_walk(&mut rng, n)).collect();
    let slices: Vec<&[f64]> = xs.iter().map(|x| x.as_slice()).collect();
    let mins = gh_minima(&y, &slices, model, opts)?;
    Ok([mins.adf.0, mins.z_t.0, mins.z_alpha.0])
}

/// Null distribution of the break statistics over `reps` replications.
pub fn simulate_gh_null(model: GhModel, m: usize, n: usize, reps: usize, seed: u64, opts: &GhOptions) -> Result<GhNullSamples> {
    if m == 0 {
        return Err(Error::InvalidInput("m must be positive".into()));
    }
    let draws: Vec<[f64; 3]> = (0..reps as u64)
        .into_par_iter()
        .map(|i| gh_null_replication(model, m, n, seed, i, opts))
        .collect::<Result<_>>()?;
    Ok(GhNullSamples {
        adf: draws.iter().map(|d| d[0]).collect(),
        z_t: draws.iter().map(|d| d[1]).collect(),
        z_alpha: draws.iter().map(|d| d[2]).collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalValueTable {
    pub model: GhModel,
    pub m: usize,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub adf: CriticalValues,
    pub z_t: CriticalValues,
    pub z_alpha: CriticalValues,
    pub samples: GhNullSamples,
}

impl CriticalValueTable {
    pub fn get(&self, stat: GhStatistic) -> CriticalValues {
        match stat {
            GhStatistic::Adf => self.adf,
            GhStatistic::Zt => self.z_t,
            GhStatistic::Zalpha => self.z_alpha,
        }
    }
}

/// Empirical 1/5/10% quantiles of each statistic under independent random
/// walks, with default test options.
pub fn simulate_critical_values(model: GhModel, m: usize, n: usize, reps: usize, seed: u64) -> Result<CriticalValueTable> {
    simulate_critical_values_with(model, m, n, reps, seed, &GhOptions::default())
}

pub fn simulate_critical_values_with(
    model: GhModel,
    m: usize,
    n: usize,
    reps: usize,
    seed: u64,
    opts: &GhOptions,
) -> Result<CriticalValueTable> {
    if reps < 1000 {
        return Err(Error::InvalidInput(format!("at least 1000 replications required, got {reps}")));
    }
    let samples = simulate_gh_null(model, m, n, reps, seed, opts)?;
    Ok(CriticalValueTable {
        model,
        m,
        n,
        reps,
        seed,
        adf: samples.critical_values(GhStatistic::Adf),
        z_t: samples.critical_values(GhStatistic::Zt),
        z_alpha: samples.critical_values(GhStatistic::Zalpha),
        samples,
    })
}

/// Bootstrap standard error of the `p` quantile of `samples`.
pub fn bootstrap_quantile_se(samples: &[f64], p: f64, boot_reps: usize, seed: u64) -> f64 {
    let n = samples.len();
    if n == 0 || boot_reps < 2 {
        return f64::NAN;
    }
    let estimates: Vec<f64> = (0..boot_reps as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, b);
            let mut draw: Vec<f64> = (0..n).map(|_| samples[rng.random_range(0..n)]).collect();
            draw.sort_by(f64::total_cmp);
            quantile_sorted(&draw, p)
        })
        .collect();
    let mean = estimates.iter().sum::<f64>() / boot_reps as f64;
    (estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (boot_reps - 1) as f64).sqrt()
}

/// Quantiles and left-tail rejection rates of one statistic under one DGP.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateBlock {
    /// Empirical 1/5/10% quantiles.
    pub quantiles: [f64; 3],
    /// Share of replications below the supplied critical value at 1/5/10%.
    pub rates: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatisticSummary {
    pub name: String,
    pub null: RateBlock,
    pub alternative: RateBlock,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub replications: usize,
    pub statistics: Vec<StatisticSummary>,
    pub elapsed: Duration,
}

impl PartialEq for ReplicationSummary {
    /// Timing is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.replications == other.replications && self.statistics == other.statistics
    }
}

impl ReplicationSummary {
    pub fn statistic(&self, name: &str) -> Option<&StatisticSummary> {
        self.statistics.iter().find(|s| s.name == name)
    }
}

/// A named left-tailed statistic with its critical values.
#[derive(Clone, Debug, PartialEq)]
pub struct TestStatistic {
    pub name: String,
    pub critical_values: CriticalValues,
}

const ALT_SALT: u64 = 0xA17E_57A7_0000_0001;

/// Seed of replication `index` under `master`.
pub fn replication_seed(master: u64, index: u64) -> u64 {
    substream(master, index).next_u64()
}

fn run_replications<F>(spec: &DgpSpec, master: u64, reps: usize, width: usize, test: &F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[TimeSeries]) -> Result<Vec<f64>> + Sync,
{
    (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let data = generate(&spec.with_seed(replication_seed(master, i)))?;
            let stats = test(&data)?;
            if stats.len() != width {
                return Err(Error::InvalidInput(format!(
                    "test returned {} statistics, expected {width}",
                    stats.len()
                )));
            }
            Ok(stats)
        })
        .collect()
}

fn rate_block(draws: &[Vec<f64>], j: usize, cv: &CriticalValues) -> RateBlock {
    let mut v: Vec<f64> = draws.iter().map(|d| d[j]).collect();
    v.sort_by(f64::total_cmp);
    let reps = v.len() as f64;
    let mut rates = [0.0; 3];
    for (r, level) in rates.iter_mut().zip(Level::ALL) {
        *r = v.iter().filter(|s| **s < cv.get(level)).count() as f64 / reps;
    }
    RateBlock {
        quantiles: [
            quantile_sorted(&v, 0.01),
            quantile_sorted(&v, 0.05),
            quantile_sorted(&v, 0.10),
        ],
        rates,
    }
}

/// Rejection rates of `test` under `null` and `alternative`. Replication
/// seeds derive from each spec's own seed; the alternative stream is salted
/// so identical specs still draw independent samples.
pub fn size_power_study<F>(
    null: &DgpSpec,
    alternative: &DgpSpec,
    statistics: &[TestStatistic],
    reps: usize,
    test: F,
) -> Result<ReplicationSummary>
where
    F: Fn(&[TimeSeries]) -> Result<Vec<f64>> + Sync,
{
    if reps < 200 {
        return Err(Error::InvalidInput(format!("at least 200 replications required, got {reps}")));
    }
    null.validate()?;
    alternative.validate()?;
    let started = Instant::now();
    let width = statistics.len();
    let null_draws = run_replications(null, null.seed, reps, width, &test)?;
    let alt_draws = run_replications(alternative, alternative.seed ^ ALT_SALT, reps, width, &test)?;
    let summaries = statistics
        .iter()
        .enumerate()
        .map(|(j, s)| StatisticSummary {
            name: s.name.clone(),
            null: rate_block(&null_draws, j, &s.critical_values),
            alternative: rate_block(&alt_draws, j, &s.critical_values),
        })
        .collect();
    Ok(ReplicationSummary {
        replications: reps,
        statistics: summaries,
        elapsed: started.elapsed(),
    })
}
