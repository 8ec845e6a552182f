//! Bartlett long-run variance and the Phillips Z_alpha / Z_t residual statistics.

use crate::error::{Error, Result};

/// Components of a kernel long-run variance estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LongRunVariance {
    /// Mean of `v^2`.
    pub gamma0: f64,
    /// Bartlett-weighted sum of autocovariances at lags `1..=bandwidth`.
    pub lambda: f64,
    /// `gamma0 + 2 lambda`, floored at `1e-12`.
    pub sigma2: f64,
}

pub const LRV_FLOOR: f64 = 1e-12;

/// Bartlett-kernel long-run variance with weights `1 - j/(bandwidth+1)`.
/// Autocovariances are uncentred and normalised by the series length.
pub fn long_run_variance(v: &[f64], bandwidth: usize) -> Result<LongRunVariance> {
    let n = v.len();
    if n < bandwidth + 2 {
        return Err(Error::Length {
            needed: bandwidth + 2,
            got: n,
        });
    }
    let nf = n as f64;
    let gamma0 = v.iter().map(|x| x * x).sum::<f64>() / nf;
    let mut lambda = 0.0;
    for j in 1..=bandwidth {
        let w = 1.0 - j as f64 / (bandwidth as f64 + 1.0);
        let acov: f64 = v[j..].iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / nf;
        lambda += w * acov;
    }
    Ok(LongRunVariance {
        gamma0,
        lambda,
        sigma2: (gamma0 + 2.0 * lambda).max(LRV_FLOOR),
    })
}

/// Default Bartlett bandwidth, `floor(4 (n/100)^{2/9})`.
pub fn default_bandwidth(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Phillips-type statistics on a residual series together with the parts
/// they are assembled from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhillipsStats {
    /// First-order serial correlation, `sum e_t e_{t+1} / sum e_t^2`.
    pub rho: f64,
    /// Bias-corrected coefficient.
    pub rho_star: f64,
    pub z_alpha: f64,
    pub z_t: f64,
    /// Long-run variance parts of the second-stage residuals `e_t - rho e_{t-1}`.
    pub lrv: LongRunVariance,
    /// `sum_{t=1}^{n-1} e_t e_{t+1}`.
    pub cross: f64,
    /// `sum_{t=1}^{n-1} e_t^2`.
    pub sum_sq: f64,
    /// Number of residuals.
    pub n: usize,
}

/// Z_alpha and Z_t from residuals `eps`.
///
/// The serial-correlation correction subtracts `n * lambda` once from the
/// cross-product sum (standard Phillips form). Applying the correction
/// inside every summand instead would subtract `(n-1) * lambda`; the two
/// differ by a single `lambda / sum_sq`.
pub fn phillips_stats(eps: &[f64], bandwidth: usize) -> Result<PhillipsStats> {
    let n = eps.len();
    if n < 20 {
        return Err(Error::Length { needed: 20, got: n });
    }
    let sum_sq: f64 = eps[..n - 1].iter().map(|e| e * e).sum();
    if !(sum_sq > 0.0) {
        return Err(Error::Degenerate("residuals have zero variance".into()));
    }
    let cross: f64 = eps.windows(2).map(|w| w[0] * w[1]).sum();
    let rho = cross / sum_sq;
    let v: Vec<f64> = eps.windows(2).map(|w| w[1] - rho * w[0]).collect();
    let lrv = long_run_variance(&v, bandwidth)?;
    let nf = n as f64;
    let rho_star = (cross - nf * lrv.lambda) / sum_sq;
    let s = (lrv.sigma2 / sum_sq).sqrt();
    Ok(PhillipsStats {
        rho,
        rho_star,
        z_alpha: nf * (rho_star - 1.0),
        z_t: (rho_star - 1.0) / s,
        lrv,
        cross,
        sum_sq,
        n,
    })
}
