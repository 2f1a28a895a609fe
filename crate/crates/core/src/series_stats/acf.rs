use serde::{Deserialize, Serialize};

use super::{mean, Series, Z_95};
use crate::error::{Error, Result};

/// Autocorrelation (first_lag = 0) or partial autocorrelation (first_lag = 1) values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfResult {
    pub max_lag: usize,
    pub first_lag: usize,
    pub values: Vec<f64>,
    /// Approximate 95% white-noise bound, `1.96 / sqrt(n)`.
    pub conf_bound: f64,
}

impl AcfResult {
    pub fn at(&self, lag: usize) -> Option<f64> {
        lag.checked_sub(self.first_lag).and_then(|i| self.values.get(i).copied())
    }

    pub fn lags(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (i + self.first_lag, v))
    }

    /// Lags (≥ 1) whose coefficient falls outside the confidence bound.
    pub fn significant_lags(&self) -> Vec<usize> {
        self.lags()
            .filter(|&(lag, v)| lag >= 1 && v.abs() > self.conf_bound)
            .map(|(lag, _)| lag)
            .collect()
    }
}

fn check_lag(s: &Series, max_lag: usize) -> Result<()> {
    if max_lag >= s.len() {
        return Err(Error::DegenerateInput(format!(
            "max_lag {max_lag} must be below series length {}",
            s.len()
        )));
    }
    Ok(())
}

fn autocorrelations(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let m = mean(x);
    let dev: Vec<f64> = x.iter().map(|v| v - m).collect();
    let c0: f64 = dev.iter().map(|d| d * d).sum();
    if c0 <= f64::EPSILON * x.iter().map(|v| v * v).sum::<f64>() {
        return Err(Error::ZeroVariance);
    }
    Ok((0..=max_lag)
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                dev.iter().zip(&dev[k..]).map(|(a, b)| a * b).sum::<f64>() / c0
            }
        })
        .collect())
}

/// Biased-estimator sample ACF for lags `0..=max_lag`.
pub fn acf(s: &Series, max_lag: usize) -> Result<AcfResult> {
    check_lag(s, max_lag)?;
    Ok(AcfResult {
        max_lag,
        first_lag: 0,
        values: autocorrelations(s.values(), max_lag)?,
        conf_bound: Z_95 / (s.len() as f64).sqrt(),
    })
}

/// Sample PACF for lags `1..=max_lag` via the Durbin-Levinson recursion.
pub fn pacf(s: &Series, max_lag: usize) -> Result<AcfResult> {
    check_lag(s, max_lag)?;
    let rho = autocorrelations(s.values(), max_lag)?;
    Ok(AcfResult {
        max_lag,
        first_lag: 1,
        values: durbin_levinson(&rho),
        conf_bound: Z_95 / (s.len() as f64).sqrt(),
    })
}

/// Partial autocorrelations from autocorrelations `rho[0..=K]` (rho[0] = 1).
pub(crate) fn durbin_levinson(rho: &[f64]) -> Vec<f64> {
    let max_lag = rho.len() - 1;
    let mut out = Vec::with_capacity(max_lag);
    let mut phi: Vec<f64> = Vec::new();
    let mut v = 1.0;
    for k in 1..=max_lag {
        let num = rho[k] - phi.iter().enumerate().map(|(j, p)| p * rho[k - 1 - j]).sum::<f64>();
        let kappa = if v > 0.0 { (num / v).clamp(-1.0, 1.0) } else { 0.0 };
        let prev = phi.clone();
        for j in 0..phi.len() {
            phi[j] = prev[j] - kappa * prev[prev.len() - 1 - j];
        }
        phi.push(kappa);
        v *= 1.0 - kappa * kappa;
        out.push(kappa);
    }
    out
}
