//! Unobserved-components model with stochastic volatility for inflation.
//!
//! ```text
//! pi_t  = tau_t + eta_t,      eta_t = sigma_eta,t * z_eta,t
//! tau_t = tau_{t-1} + eps_t,  eps_t = sigma_eps,t * z_eps,t
//! ln sigma^2_eta,t = ln sigma^2_eta,t-1 + v_eta,t     v ~ N(0, gamma)
//! ln sigma^2_eps,t = ln sigma^2_eps,t-1 + v_eps,t
//! ```
//!
//! Estimation is by Gibbs sampling. The trend path is drawn with a scalar
//! forward-filter backward-sampler given the volatilities; each log-variance
//! path is drawn the same way after mapping the squared shocks through
//! `ln(x^2 + c)` and approximating the `ln chi^2_1` error with the
//! seven-component normal mixture of Kim, Shephard and Chib (1998).

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{seeded, Rng as ChainRng};
use crate::series::{MonthIndex, TimeSeries};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcsvConfig {
    /// Variance of the log-volatility innovations.
    pub gamma: f64,
    /// Total sweeps, burn-in included.
    pub n_draws: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl Default for UcsvConfig {
    fn default() -> Self {
        Self {
            gamma: 0.04,
            n_draws: 5000,
            burn_in: 1000,
            seed: 0,
        }
    }
}

impl UcsvConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.n_draws < 500 {
            return Err(Error::Config(format!("n_draws must be at least 500, got {}", self.n_draws)));
        }
        if self.burn_in < 100 {
            return Err(Error::Config(format!("burn_in must be at least 100, got {}", self.burn_in)));
        }
        if self.n_draws <= self.burn_in {
            return Err(Error::Config("n_draws must exceed burn_in".into()));
        }
        Ok(())
    }
}

/// Posterior means over the retained sweeps.
#[derive(Clone, Debug, PartialEq)]
pub struct UcsvPosterior {
    pub pi: TimeSeries,
    pub trend: TimeSeries,
    /// Mean of `pi_t - tau_t`; equals `pi - trend` up to rounding.
    pub gap: TimeSeries,
    /// Mean of `|pi_t - tau_t|`.
    pub abs_gap: TimeSeries,
    pub sigma_eta: TimeSeries,
    pub sigma_eps: TimeSeries,
    pub config_echo: UcsvConfig,
}

// Kim-Shephard-Chib mixture for ln chi^2_1: weights, means (before the
// -1.2704 shift) and variances.
const MIX_P: [f64; 7] = [0.00730, 0.10556, 0.00002, 0.04395, 0.34001, 0.24566, 0.25750];
const MIX_M: [f64; 7] = [-10.12999, -3.97281, -8.56686, 2.77786, 0.61942, 1.79518, -1.08819];
const MIX_V: [f64; 7] = [5.79596, 2.61369, 5.17950, 0.16735, 0.64009, 0.34023, 1.26261];
const MIX_SHIFT: f64 = -1.2704;

/// Added to squared shocks before taking logs.
pub const LOG_OFFSET: f64 = 1e-6;

const H0_VAR: f64 = 5.0;
const MIN_SCALE_VAR: f64 = 1e-8;

fn normal(rng: &mut ChainRng) -> f64 {
    rng.sample(StandardNormal)
}

/// Forward filter, backward sample for `x_t = x_{t-1} + w_t`, `y_t = x_t + e_t`.
///
/// `state_var[t]` is the variance of `w_t` entering state `t`, `obs_var[t]`
/// the observation variance; `obs[t] = None` skips the update. State 0 has
/// prior `N(m0, p0)`.
fn ffbs(
    obs: &[Option<f64>],
    obs_var: &[f64],
    state_var: &[f64],
    m0: f64,
    p0: f64,
    rng: &mut ChainRng,
    out: &mut [f64],
) {
    let n = obs.len();
    let mut m = vec![0.0; n];
    let mut p = vec![0.0; n];
    let (mut mp, mut pp) = (m0, p0);
    for t in 0..n {
        let (a, r) = if t == 0 { (mp, pp) } else { (mp, pp + state_var[t]) };
        match obs[t] {
            Some(y) => {
                let k = r / (r + obs_var[t]);
                mp = a + k * (y - a);
                pp = r * obs_var[t] / (r + obs_var[t]);
            }
            None => {
                mp = a;
                pp = r;
            }
        }
        m[t] = mp;
        p[t] = pp;
    }
    out[n - 1] = m[n - 1] + p[n - 1].sqrt() * normal(rng);
    for t in (0..n - 1).rev() {
        let q = state_var[t + 1];
        let g = p[t] / (p[t] + q);
        let mean = m[t] + g * (out[t + 1] - m[t]);
        let var = p[t] * q / (p[t] + q);
        out[t] = mean + var.sqrt() * normal(rng);
    }
}

/// Draws a log-variance path given shocks `x` (one per period).
fn draw_log_variance(x: &[f64], h: &mut [f64], h_init: f64, gamma: f64, rng: &mut ChainRng) {
    let n = x.len();
    let mut obs = Vec::with_capacity(n);
    let mut obs_var = Vec::with_capacity(n);
    for t in 0..n {
        let ystar = (x[t] * x[t] + LOG_OFFSET).ln();
        // mixture indicator
        let mut w = [0.0; 7];
        let mut total = 0.0;
        for j in 0..7 {
            let d = ystar - h[t] - MIX_M[j] - MIX_SHIFT;
            w[j] = MIX_P[j] / MIX_V[j].sqrt() * (-0.5 * d * d / MIX_V[j]).exp();
            total += w[j];
        }
        let mut u = rng.random::<f64>() * total;
        let mut s = 6;
        for (j, wj) in w.iter().enumerate() {
            if u < *wj {
                s = j;
                break;
            }
            u -= wj;
        }
        if !(total > 0.0) {
            s = 6;
        }
        obs.push(Some(ystar - MIX_M[s] - MIX_SHIFT));
        obs_var.push(MIX_V[s]);
    }
    let state_var = vec![gamma; n];
    ffbs(&obs, &obs_var, &state_var, h_init, H0_VAR + gamma, rng, h);
}

fn centered_ma12(v: &[f64]) -> Vec<f64> {
    let n = v.len() as isize;
    (0..n)
        .map(|t| {
            // 2x12 centred average, truncated at the edges
            let mut sum = 0.0;
            let mut wsum = 0.0;
            for k in -6..=6isize {
                let i = t + k;
                if i < 0 || i >= n {
                    continue;
                }
                let w = if k.abs() == 6 { 0.5 } else { 1.0 };
                sum += w * v[i as usize];
                wsum += w;
            }
            sum / wsum
        })
        .collect()
}

fn sample_variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

/// Runs the sampler on inflation `pi` and returns posterior means.
pub fn estimate_ucsv(pi: &TimeSeries, cfg: &UcsvConfig) -> Result<UcsvPosterior> {
    cfg.validate()?;
    let n = pi.len();
    if n < 24 {
        return Err(Error::Length { needed: 24, got: n });
    }
    if let Some(i) = pi.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain {
            date: pi.date_at(i),
            reason: "non-finite inflation value".into(),
        });
    }
    let y = pi.values();
    let mut rng = seeded(cfg.seed);

    let dpi: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let h_init = (0.5 * sample_variance(&dpi)).max(MIN_SCALE_VAR).ln();
    let tau_prior_var = 100.0 * (sample_variance(y) + 1.0);

    // tau[0] is the pre-sample state, tau[t] pairs with y[t-1]
    let ma = centered_ma12(y);
    let mut tau = Vec::with_capacity(n + 1);
    tau.push(ma[0]);
    tau.extend_from_slice(&ma);
    let mut h_eta = vec![h_init; n];
    let mut h_eps = vec![h_init; n];

    let mut obs: Vec<Option<f64>> = Vec::with_capacity(n + 1);
    obs.push(None);
    obs.extend(y.iter().map(|v| Some(*v)));

    let kept = (cfg.n_draws - cfg.burn_in) as f64;
    let mut acc_tau = vec![0.0; n];
    let mut acc_gap = vec![0.0; n];
    let mut acc_abs = vec![0.0; n];
    let mut acc_se = vec![0.0; n];
    let mut acc_sp = vec![0.0; n];
    let mut eta = vec![0.0; n];
    let mut eps = vec![0.0; n];
    let mut obs_var = vec![0.0; n + 1];
    let mut state_var = vec![0.0; n + 1];

    for sweep in 0..cfg.n_draws {
        for t in 0..n {
            eta[t] = y[t] - tau[t + 1];
            eps[t] = tau[t + 1] - tau[t];
        }
        draw_log_variance(&eta, &mut h_eta, h_init, cfg.gamma, &mut rng);
        draw_log_variance(&eps, &mut h_eps, h_init, cfg.gamma, &mut rng);

        for t in 0..n {
            obs_var[t + 1] = h_eta[t].exp();
            state_var[t + 1] = h_eps[t].exp();
        }
        ffbs(&obs, &obs_var, &state_var, y[0], tau_prior_var, &mut rng, &mut tau);

        if sweep >= cfg.burn_in {
            for t in 0..n {
                let g = y[t] - tau[t + 1];
                acc_tau[t] += tau[t + 1];
                acc_gap[t] += g;
                acc_abs[t] += g.abs();
                acc_se[t] += (0.5 * h_eta[t]).exp();
                acc_sp[t] += (0.5 * h_eps[t]).exp();
            }
        }
    }
    let mean = |acc: Vec<f64>, id: &str| -> Result<TimeSeries> {
        TimeSeries::new(id, pi.start(), acc.into_iter().map(|v| v / kept).collect())
    };
    Ok(UcsvPosterior {
        pi: pi.clone(),
        trend: mean(acc_tau, "trend")?,
        gap: mean(acc_gap, "gap")?,
        abs_gap: mean(acc_abs, "abs_gap")?,
        sigma_eta: mean(acc_se, "sigma_eta")?,
        sigma_eps: mean(acc_sp, "sigma_eps")?,
        config_echo: *cfg,
    })
}

/// Inflation uncertainty: posterior mean of the transitory-shock volatility.
pub fn uncertainty_series(post: &UcsvPosterior) -> TimeSeries {
    post.sigma_eta.clone().with_id("U")
}

/// Starting point for forward simulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationParams {
    pub tau0: f64,
    pub sigma_eta0: f64,
    pub sigma_eps0: f64,
    pub start: MonthIndex,
}

impl Default for SimulationParams {
    fn default() -> Self {
        Self {
            tau0: 2.0,
            sigma_eta0: 0.5,
            sigma_eps0: 0.2,
            start: crate::montecarlo::DEFAULT_START,
        }
    }
}

/// Simulated inflation with its latent components.
#[derive(Clone, Debug, PartialEq)]
pub struct UcsvPaths {
    pub pi: TimeSeries,
    pub tau: TimeSeries,
    pub sigma_eta: TimeSeries,
    pub sigma_eps: TimeSeries,
}

pub fn simulate_ucsv(cfg: &UcsvConfig, n: usize, seed: u64) -> Result<UcsvPaths> {
    simulate_ucsv_with(&SimulationParams::default(), cfg.gamma, n, seed)
}

pub fn simulate_ucsv_with(params: &SimulationParams, gamma: f64, n: usize, seed: u64) -> Result<UcsvPaths> {
    if n < 2 {
        return Err(Error::Length { needed: 2, got: n });
    }
    if !(gamma >= 0.0) || !(params.sigma_eta0 > 0.0) || !(params.sigma_eps0 > 0.0) {
        return Err(Error::InvalidInput("volatilities and gamma must be positive".into()));
    }
    let mut rng = seeded(seed);
    let sd_v = gamma.sqrt();
    let mut h_eta = 2.0 * params.sigma_eta0.ln();
    let mut h_eps = 2.0 * params.sigma_eps0.ln();
    let mut tau = params.tau0;
    let (mut pi_v, mut tau_v, mut se_v, mut sp_v) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for _ in 0..n {
        let z_eta = normal(&mut rng);
        let z_eps = normal(&mut rng);
        h_eta += sd_v * normal(&mut rng);
        h_eps += sd_v * normal(&mut rng);
        let s_eta = (0.5 * h_eta).exp();
        let s_eps = (0.5 * h_eps).exp();
        tau += s_eps * z_eps;
        pi_v.push(tau + s_eta * z_eta);
        tau_v.push(tau);
        se_v.push(s_eta);
        sp_v.push(s_eps);
    }
    Ok(UcsvPaths {
        pi: TimeSeries::new("pi", params.start, pi_v)?,
        tau: TimeSeries::new("tau", params.start, tau_v)?,
        sigma_eta: TimeSeries::new("sigma_eta", params.start, se_v)?,
        sigma_eps: TimeSeries::new("sigma_eps", params.start, sp_v)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn quick(seed: u64) -> UcsvConfig {
        UcsvConfig {
            gamma: 0.04,
            n_draws: 1500,
            burn_in: 500,
            seed,
        }
    }

    fn rmse(a: &[f64], b: &[f64]) -> f64 {
        (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64).sqrt()
    }

    fn jarque_bera_p(x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
        let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
        let skew = m3 / m2.powf(1.5);
        let kurt = m4 / (m2 * m2);
        let jb = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0).powi(2));
        1.0 - ChiSquared::new(2.0).unwrap().cdf(jb)
    }

    #[test]
    fn config_validation() {
        assert!(UcsvConfig::default().validate().is_ok());
        for bad in [
            UcsvConfig { gamma: 0.0, ..UcsvConfig::default() },
            UcsvConfig { n_draws: 499, ..UcsvConfig::default() },
            UcsvConfig { burn_in: 99, ..UcsvConfig::default() },
            UcsvConfig { n_draws: 600, burn_in: 600, ..UcsvConfig::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn constant_inflation_gives_flat_trend() {
        let pi = TimeSeries::new("pi", crate::montecarlo::DEFAULT_START, vec![3.0; 60]).unwrap();
        let post = estimate_ucsv(&pi, &quick(1)).unwrap();
        for t in post.trend.values() {
            assert!((t - 3.0).abs() < 0.2, "{t}");
        }
        for g in post.gap.values() {
            assert!(g.abs() < 0.2);
        }
    }

    #[test]
    fn decomposition_is_exact_and_volatilities_positive() {
        let paths = simulate_ucsv(&quick(0), 100, 3).unwrap();
        let post = estimate_ucsv(&paths.pi, &quick(4)).unwrap();
        for t in 0..100 {
            let sum = post.trend.values()[t] + post.gap.values()[t];
            assert!((sum - paths.pi.values()[t]).abs() < 1e-10);
            assert!(post.sigma_eta.values()[t] > 0.0);
            assert!(post.sigma_eps.values()[t] > 0.0);
        }
        assert_eq!(post.trend.start(), paths.pi.start());
        assert_eq!(uncertainty_series(&post).dates().collect::<Vec<_>>(), paths.pi.dates().collect::<Vec<_>>());
    }

    #[test]
    fn trend_beats_raw_inflation() {
        let paths = simulate_ucsv(&quick(0), 160, 7).unwrap();
        let post = estimate_ucsv(&paths.pi, &quick(8)).unwrap();
        let est = rmse(post.trend.values(), paths.tau.values());
        let raw = rmse(paths.pi.values(), paths.tau.values());
        assert!(est < raw, "{est} vs {raw}");
    }

    #[test]
    fn same_seed_same_posterior() {
        let paths = simulate_ucsv(&quick(0), 60, 9).unwrap();
        let a = estimate_ucsv(&paths.pi, &quick(10)).unwrap();
        let b = estimate_ucsv(&paths.pi, &quick(10)).unwrap();
        assert_eq!(a, b);
        let c = estimate_ucsv(&paths.pi, &quick(11)).unwrap();
        assert_ne!(a.trend, c.trend);
    }

    #[test]
    fn random_walk_inflation_is_tracked_by_trend() {
        let params = SimulationParams {
            sigma_eta0: 1e-4,
            sigma_eps0: 0.3,
            ..SimulationParams::default()
        };
        let paths = simulate_ucsv_with(&params, 1e-12, 160, 12).unwrap();
        let post = estimate_ucsv(&paths.pi, &quick(13)).unwrap();
        let mad = post
            .trend
            .values()
            .iter()
            .zip(paths.pi.values())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / 160.0;
        assert!(mad < 0.05, "{mad}");
    }

    #[test]
    fn uncertainty_picks_up_volatility_step() {
        // transitory volatility doubles half-way through
        let mut rng = seeded(14);
        let n = 160;
        let mut tau = 2.0;
        let pi: Vec<f64> = (0..n)
            .map(|t| {
                let s_eta = if t < n / 2 { 0.4 } else { 0.8 };
                tau += 0.1 * normal(&mut rng);
                tau + s_eta * normal(&mut rng)
            })
            .collect();
        let pi = TimeSeries::new("pi", crate::montecarlo::DEFAULT_START, pi).unwrap();
        let post = estimate_ucsv(&pi, &quick(15)).unwrap();
        let u = uncertainty_series(&post);
        let first: f64 = u.values()[..n / 2].iter().sum::<f64>() / (n / 2) as f64;
        let second: f64 = u.values()[n / 2..].iter().sum::<f64>() / (n / 2) as f64;
        assert!(second > first, "{first} {second}");
    }

    #[test]
    fn uncertainty_is_projection_of_sigma_eta() {
        let start = crate::montecarlo::DEFAULT_START;
        let c = TimeSeries::new("sigma_eta", start, vec![0.7; 30]).unwrap();
        let post = UcsvPosterior {
            pi: c.clone(),
            trend: c.clone(),
            gap: c.clone(),
            abs_gap: c.clone(),
            sigma_eta: c.clone(),
            sigma_eps: c,
            config_echo: UcsvConfig::default(),
        };
        assert!(uncertainty_series(&post).values().iter().all(|v| *v == 0.7));
    }

    #[test]
    fn simulation_contracts() {
        let frozen = simulate_ucsv_with(&SimulationParams::default(), 1e-12, 500, 1).unwrap();
        for s in [&frozen.sigma_eta, &frozen.sigma_eps] {
            let v0 = s.values()[0];
            assert!(s.values().iter().all(|v| ((v - v0) / v0).abs() < 1e-4));
        }
        let a = simulate_ucsv(&quick(0), 5000, 2).unwrap();
        let b = simulate_ucsv(&quick(0), 5000, 2).unwrap();
        assert_eq!(a, b);
        let z: Vec<f64> = (0..5000)
            .map(|t| (a.pi.values()[t] - a.tau.values()[t]) / a.sigma_eta.values()[t])
            .collect();
        assert!(jarque_bera_p(&z) > 0.01);
        assert!(simulate_ucsv(&quick(0), 1, 2).is_err());
    }

    #[test]
    fn rejects_short_or_non_finite_input() {
        let start = crate::montecarlo::DEFAULT_START;
        let short = TimeSeries::new("pi", start, vec![1.0; 23]).unwrap();
        assert!(matches!(estimate_ucsv(&short, &quick(0)), Err(Error::Length { .. })));
        let mut v = vec![1.0; 40];
        v[5] = f64::NAN;
        let bad = TimeSeries::new("pi", start, v).unwrap();
        assert!(matches!(estimate_ucsv(&bad, &quick(0)), Err(Error::Domain { .. })));
    }
}
