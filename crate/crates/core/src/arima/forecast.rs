use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::ArimaFit;
use crate::error::{Error, Result};
use crate::series_stats::Z_95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    pub horizon: usize,
    pub points: Vec<f64>,
    pub se: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub level: f64,
    /// Calendar year of the first forecast, when the input was anchored.
    pub first_year: Option<i32>,
}

/// Coefficients `φ*` of `φ(B)(1-B)^d = 1 - Σ φ*_i B^i`.
fn composite_ar(ar: &[f64], d: usize) -> Vec<f64> {
    let mut poly = vec![1.0];
    poly.extend(ar.iter().map(|v| -v));
    for _ in 0..d {
        let mut next = vec![0.0; poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c;
        }
        poly = next;
    }
    poly[1..].iter().map(|c| -c).collect()
}

/// `ψ_0 … ψ_{horizon-1}` of the MA(∞) form of an ARIMA model.
pub fn psi_weights_for(ar: &[f64], ma: &[f64], d: usize, horizon: usize) -> Vec<f64> {
    let phi_star = composite_ar(ar, d);
    let mut psi = Vec::with_capacity(horizon);
    for j in 0..horizon {
        if j == 0 {
            psi.push(1.0);
            continue;
        }
        let mut v = if j <= ma.len() { ma[j - 1] } else { 0.0 };
        for (i, phi) in phi_star.iter().enumerate().take(j) {
            v += phi * psi[j - 1 - i];
        }
        psi.push(v);
    }
    psi
}

pub fn psi_weights(fit: &ArimaFit, horizon: usize) -> Vec<f64> {
    psi_weights_for(&fit.ar, &fit.ma, fit.spec.d, horizon)
}

fn interval_quantile(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::DomainError(format!("confidence level {level} outside (0, 1)")));
    }
    if (level - 0.95).abs() < 1e-12 {
        return Ok(Z_95);
    }
    Ok(Normal::new(0.0, 1.0).expect("unit normal").inverse_cdf(0.5 + level / 2.0))
}

/// Point forecasts and symmetric prediction intervals for `horizon` steps ahead.
///
/// The ARMA recursion runs on the differenced scale with future innovations at zero
/// and is integrated back `d` times. Standard errors are `σ sqrt(Σ_{j<h} ψ_j²)`.
pub fn forecast(fit: &ArimaFit, horizon: usize, level: f64) -> Result<ForecastResult> {
    if horizon == 0 {
        return Err(Error::DegenerateInput("forecast horizon must be at least 1".into()));
    }
    let z = interval_quantile(level)?;
    let mu = fit.drift.unwrap_or(0.0);
    let mut x: Vec<f64> = fit.working_series();
    let mut e: Vec<f64> = fit.residuals.values().to_vec();
    let m = x.len();
    for t in m..m + horizon {
        let mut v = 0.0;
        for (i, phi) in fit.ar.iter().enumerate() {
            v += phi * x[t - 1 - i];
        }
        for (j, theta) in fit.ma.iter().enumerate() {
            v += theta * e[t - 1 - j];
        }
        x.push(v);
        e.push(0.0);
    }
    let mut path: Vec<f64> = x[m..].to_vec();

    // Integrate the ARMA deviations: level k holds the k-times differenced history.
    let history = fit.history();
    let mut levels = vec![history.to_vec()];
    for k in 1..fit.spec.d {
        let prev: &Vec<f64> = &levels[k - 1];
        levels.push(prev.windows(2).map(|w| w[1] - w[0]).collect());
    }
    for k in (0..fit.spec.d).rev() {
        let mut last = *levels[k].last().expect("non-empty history");
        for v in path.iter_mut() {
            last += *v;
            *v = last;
        }
    }
    // Drift integrated d times contributes μ·C(h + d - 1, d) at step h.
    if mu != 0.0 {
        let d = fit.spec.d;
        for (i, v) in path.iter_mut().enumerate() {
            let h = (i + 1) as f64;
            let weight = (0..d).fold(1.0, |acc, j| acc * (h + j as f64) / (j + 1) as f64);
            *v += mu * weight;
        }
    }

    let psi = psi_weights(fit, horizon);
    let mut acc = 0.0;
    let se: Vec<f64> = psi
        .iter()
        .map(|p| {
            acc += p * p;
            (fit.sigma2 * acc).sqrt()
        })
        .collect();
    let lower = path.iter().zip(&se).map(|(p, s)| p - z * s).collect();
    let upper = path.iter().zip(&se).map(|(p, s)| p + z * s).collect();
    let first_year = fit
        .residuals
        .origin_year()
        .map(|y| y + fit.residuals.len() as i32);

    Ok(ForecastResult {
        horizon,
        points: path,
        se,
        lower,
        upper,
        level,
        first_year,
    })
}

/// Root mean squared error between observations and predictions.
pub fn holdout_rmse(observed: &[f64], predicted: &[f64]) -> Result<f64> {
    if observed.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: observed.len(),
            right: predicted.len(),
        });
    }
    if observed.is_empty() {
        return Err(Error::DegenerateInput("RMSE of empty vectors".into()));
    }
    let mse = observed
        .iter()
        .zip(predicted)
        .map(|(o, p)| (o - p).powi(2))
        .sum::<f64>()
        / observed.len() as f64;
    Ok(mse.sqrt())
}
