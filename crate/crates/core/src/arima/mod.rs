//! Non-seasonal ARIMA(p, d, q) with optional drift.
//!
//! Fitting runs in two stages. The conditional sum of squares is minimized first,
//! starting from zero coefficients. That estimate then seeds maximization of the
//! exact Gaussian likelihood, evaluated with a Kalman-filter innovations
//! recursion with σ² profiled out. Both stages search over partial-autocorrelation
//! parameters, so every candidate is stationary and invertible. A short Newton
//! polish on the natural coefficients follows. Standard errors come from the
//! inverse finite-difference Hessian of the negative log-likelihood.

mod forecast;
mod likelihood;
mod transform;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Mode};
use crate::linalg::{invert, solve, Matrix};
use crate::optim::{self, Tolerance};
use crate::series_stats::{difference, mean, Series, Z_95};

pub use forecast::{forecast, holdout_rmse, psi_weights, psi_weights_for, ForecastResult};
pub use likelihood::exact_neg_loglik;
pub use transform::{is_invertible, is_stationary};

/// Model orders. Displayed and parsed as `p,d,q` or `p,d,q,drift`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArimaSpec {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub include_drift: bool,
}

impl ArimaSpec {
    pub const fn new(p: usize, d: usize, q: usize) -> Self {
        Self { p, d, q, include_drift: false }
    }

    pub const fn with_drift(mut self) -> Self {
        self.include_drift = true;
        self
    }

    /// Estimated parameters, σ² included.
    pub fn parameter_count(&self) -> usize {
        self.p + self.q + usize::from(self.include_drift) + 1
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.p + self.q == 0 && !self.include_drift && self.d == 0 {
            return Err(Error::Config(format!("ARIMA({self}) has nothing to estimate")));
        }
        if self.p + self.d + self.q + 3 > n {
            return Err(Error::DegenerateInput(format!(
                "ARIMA({self}) needs at least {} observations, got {n}",
                self.p + self.d + self.q + 3
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ArimaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.p, self.d, self.q)?;
        if self.include_drift {
            f.write_str(",drift")?;
        }
        Ok(())
    }
}

impl FromStr for ArimaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::Config(format!("bad ARIMA spec {s:?}, expected p,d,q[,drift]"));
        if !(3..=4).contains(&parts.len()) {
            return Err(bad());
        }
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        let include_drift = match parts.get(3) {
            None => false,
            Some(&"drift") | Some(&"1") | Some(&"true") => true,
            Some(&"nodrift") | Some(&"0") | Some(&"false") => false,
            Some(_) => return Err(bad()),
        };
        Ok(ArimaSpec {
            p: num(parts[0])?,
            d: num(parts[1])?,
            q: num(parts[2])?,
            include_drift,
        })
    }
}

/// Likelihood used in the refinement stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LikelihoodMode {
    #[default]
    Exact,
    /// Stop after the conditional-sum-of-squares stage.
    Conditional,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FitOptions {
    pub likelihood: LikelihoodMode,
    pub tolerance: Tolerance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaFit {
    pub spec: ArimaSpec,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub drift: Option<f64>,
    pub sigma2: f64,
    /// Standard errors in the order ar…, ma…, drift.
    pub coeff_se: Vec<f64>,
    pub z_stats: Vec<f64>,
    pub loglik: f64,
    /// Log-likelihood of the conditional-sum-of-squares estimate under the same criterion.
    pub css_loglik: f64,
    pub aicc: f64,
    /// Conditional residuals on the differenced scale, length `n - d`; the first `p` are zero.
    pub residuals: Series,
    /// `differenced - residuals`.
    pub fitted: Series,
    pub likelihood: LikelihoodMode,
    pub iterations: usize,
    differenced: Vec<f64>,
    history: Vec<f64>,
}

impl ArimaFit {
    /// The `d`-times differenced input, drift included.
    pub fn differenced(&self) -> &[f64] {
        &self.differenced
    }

    /// Differenced input minus the drift: the zero-mean ARMA data the likelihood sees.
    pub fn working_series(&self) -> Vec<f64> {
        let mu = self.drift.unwrap_or(0.0);
        self.differenced.iter().map(|w| w - mu).collect()
    }

    /// Undifferenced observations the model was fitted on.
    pub fn history(&self) -> &[f64] {
        &self.history
    }

    /// Residuals after the `p` conditioning zeros, for diagnostics.
    pub fn diagnostic_residuals(&self) -> &[f64] {
        &self.residuals.values()[self.spec.p..]
    }

    /// Coefficient estimates in the order ar…, ma…, drift.
    pub fn coefficients(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = Vec::new();
        out.extend(self.ar.iter().enumerate().map(|(i, v)| (format!("ar{}", i + 1), *v)));
        out.extend(self.ma.iter().enumerate().map(|(i, v)| (format!("ma{}", i + 1), *v)));
        if let Some(mu) = self.drift {
            out.push(("drift".to_string(), mu));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSignificance {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
    pub significant: bool,
}

/// `estimate / se`; a zero standard error gives an infinite ratio.
pub fn z_statistic(estimate: f64, se: f64) -> f64 {
    if se == 0.0 {
        if estimate == 0.0 { 0.0 } else { f64::INFINITY.copysign(estimate) }
    } else {
        estimate / se
    }
}

/// Significant when `|z| > 1.96`.
pub fn is_significant(z: f64) -> bool {
    z.abs() > Z_95
}

pub fn coefficient_significance(fit: &ArimaFit) -> Vec<CoefficientSignificance> {
    fit.coefficients()
        .into_iter()
        .zip(&fit.coeff_se)
        .map(|((name, estimate), &se)| {
            let z = z_statistic(estimate, se);
            CoefficientSignificance {
                name,
                estimate,
                se,
                z,
                significant: is_significant(z),
            }
        })
        .collect()
}

pub fn fit(s: &Series, spec: ArimaSpec) -> Result<ArimaFit> {
    fit_with(s, spec, &FitOptions::default())
}

/// Fit several specifications to the same series.
pub fn fit_many(s: &Series, specs: &[ArimaSpec], opts: &FitOptions, mode: Mode) -> Vec<Result<ArimaFit>> {
    exec::map_slice(mode, specs, |spec| fit_with(s, *spec, opts))
}

fn split(params: &[f64], p: usize) -> (&[f64], &[f64]) {
    params.split_at(p)
}

fn natural_from_raw(raw: &[f64], p: usize) -> Vec<f64> {
    let mut ar = transform::to_coefficients(&raw[..p]);
    let ma: Vec<f64> = transform::to_coefficients(&raw[p..]).iter().map(|v| -v).collect();
    ar.extend(ma);
    ar
}

#[cfg(test)]
fn raw_from_natural(params: &[f64], p: usize) -> Option<Vec<f64>> {
    let mut raw = transform::to_raw(&params[..p])?;
    let neg_ma: Vec<f64> = params[p..].iter().map(|v| -v).collect();
    raw.extend(transform::to_raw(&neg_ma)?);
    Some(raw)
}

fn minimize<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], tol: Tolerance) -> optim::Minimum {
    let first = optim::bfgs(&f, x0, tol);
    if first.converged && first.value.is_finite() {
        return first;
    }
    let second = optim::nelder_mead(&f, &first.x, tol);
    let polished = optim::bfgs(&f, &second.x, tol);
    let best = if polished.value <= second.value { polished } else { second };
    optim::Minimum {
        iterations: first.iterations + best.iterations,
        converged: best.converged,
        ..best
    }
}

/// Newton iterations on the natural coefficients to drive the gradient of the
/// negative log-likelihood to zero. Never returns a worse point than `start`.
fn newton_polish<F: Fn(&[f64]) -> f64>(f: &F, start: &[f64]) -> (Vec<f64>, bool) {
    let k = start.len();
    let mut x = start.to_vec();
    let mut fx = f(&x);
    for _ in 0..30 {
        let g = optim::gradient(f, &x);
        if g.iter().all(|v| v.abs() < 1e-7) {
            return (x, true);
        }
        let h = Matrix { n: k, data: optim::hessian(f, &x) };
        let Some(step) = solve(&h, &g) else { break };
        // Only accept Newton directions that descend.
        if step.iter().zip(&g).map(|(s, gi)| s * gi).sum::<f64>() <= 0.0 {
            break;
        }
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let xn: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a - t * s).collect();
            let fxn = f(&xn);
            if fxn.is_finite() && fxn <= fx {
                x = xn;
                fx = fxn;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let g = optim::gradient(f, &x);
    let ok = g.iter().all(|v| v.abs() < 1e-4);
    (x, ok)
}

pub fn fit_with(s: &Series, spec: ArimaSpec, opts: &FitOptions) -> Result<ArimaFit> {
    spec.validate(s.len())?;
    let w = difference(s, spec.d)?.into_values();
    let m = w.len();
    let mu = if spec.include_drift { mean(&w) } else { 0.0 };
    let x: Vec<f64> = w.iter().map(|v| v - mu).collect();
    if x.iter().all(|v| (v - x[0]).abs() <= 1e-12 * (1.0 + x[0].abs())) && spec.p + spec.q > 0 {
        return Err(Error::DegenerateInput("series is constant after differencing".into()));
    }
    let (p, q) = (spec.p, spec.q);
    let k = p + q;
    let tol = opts.tolerance;

    // Stage 1: conditional sum of squares from zero coefficients.
    let css_dof = (m - p) as f64;
    let css_objective = |raw: &[f64]| {
        let params = natural_from_raw(raw, p);
        let (ar, ma) = split(&params, p);
        0.5 * (likelihood::css_sum_of_squares(&x, ar, ma) / css_dof).ln()
    };
    let css = if k > 0 {
        minimize(css_objective, &vec![0.0; k], tol)
    } else {
        optim::Minimum { x: vec![], value: 0.0, iterations: 0, converged: true }
    };
    if !css.value.is_finite() {
        return Err(Error::NonConvergence {
            iterations: css.iterations,
            best_objective: css.value,
            best_params: natural_from_raw(&css.x, p),
        });
    }
    let css_params = natural_from_raw(&css.x, p);

    let nll = |params: &[f64]| {
        let (ar, ma) = split(params, p);
        exact_neg_loglik(&x, ar, ma)
    };
    let css_exact_loglik = likelihood::innovations(&x, &css_params[..p], &css_params[p..]).map(|i| i.loglik());

    let (params, iterations, converged) = match opts.likelihood {
        LikelihoodMode::Conditional => (css_params.clone(), css.iterations, css.converged),
        LikelihoodMode::Exact if k == 0 => (vec![], 0, true),
        LikelihoodMode::Exact => {
            // Stage 2: exact likelihood, normalized per observation for the search.
            let ml_objective = |raw: &[f64]| nll(&natural_from_raw(raw, p)) / m as f64;
            let start_value = ml_objective(&css.x);
            let ml = minimize(ml_objective, &css.x, tol);
            let (raw, value) = if ml.value <= start_value || !start_value.is_finite() {
                (ml.x.clone(), ml.value)
            } else {
                (css.x.clone(), start_value)
            };
            if !value.is_finite() {
                return Err(Error::NonConvergence {
                    iterations: css.iterations + ml.iterations,
                    best_objective: value,
                    best_params: natural_from_raw(&raw, p),
                });
            }
            let (polished, grad_ok) = newton_polish(&nll, &natural_from_raw(&raw, p));
            (polished, css.iterations + ml.iterations, ml.converged || grad_ok)
        }
    };
    if !converged {
        let best_objective = match opts.likelihood {
            LikelihoodMode::Exact => nll(&params),
            LikelihoodMode::Conditional => css.value,
        };
        return Err(Error::NonConvergence { iterations, best_objective, best_params: params });
    }

    let (ar, ma) = split(&params, p);
    if !is_stationary(ar) {
        return Err(Error::NonInvertible(format!("AR coefficients {ar:?} are not stationary")));
    }
    if !is_invertible(ma, 1e-6) {
        return Err(Error::NonInvertible(format!("MA coefficients {ma:?} are not invertible")));
    }

    let residuals = likelihood::css_residuals(&x, ar, ma);
    let (sigma2, loglik, css_loglik, n_eff) = match opts.likelihood {
        LikelihoodMode::Exact => {
            let inn = likelihood::innovations(&x, ar, ma)
                .ok_or_else(|| Error::NonInvertible("likelihood undefined at estimate".into()))?;
            let css_ll = css_exact_loglik.unwrap_or(f64::NEG_INFINITY);
            (inn.sigma2(), inn.loglik(), css_ll, m)
        }
        LikelihoodMode::Conditional => {
            let ssq: f64 = residuals[p..].iter().map(|e| e * e).sum();
            let n = m - p;
            let s2 = ssq / n as f64;
            let ll = -0.5 * n as f64 * ((2.0 * std::f64::consts::PI).ln() + 1.0 + s2.ln());
            (s2, ll, ll, n)
        }
    };

    let mut coeff_se = if k > 0 {
        let objective = |params: &[f64]| match opts.likelihood {
            LikelihoodMode::Exact => nll(params),
            LikelihoodMode::Conditional => {
                let (a, b) = split(params, p);
                0.5 * n_eff as f64 * (likelihood::css_sum_of_squares(&x, a, b) / n_eff as f64).ln()
            }
        };
        let h = Matrix { n: k, data: optim::hessian(&objective, &params) };
        match invert(&h) {
            Some(inv) => (0..k)
                .map(|i| if inv[(i, i)] > 0.0 { inv[(i, i)].sqrt() } else { f64::NAN })
                .collect(),
            None => vec![f64::NAN; k],
        }
    } else {
        vec![]
    };
    let drift = spec.include_drift.then_some(mu);
    if spec.include_drift {
        // Long-run variance of the ARMA noise: σ² (θ(1) / φ(1))².
        let theta1 = 1.0 + ma.iter().sum::<f64>();
        let phi1 = 1.0 - ar.iter().sum::<f64>();
        coeff_se.push((sigma2 * (theta1 / phi1).powi(2) / m as f64).sqrt());
    }
    let estimates: Vec<f64> = params.iter().copied().chain(drift).collect();
    let z_stats = estimates.iter().zip(&coeff_se).map(|(&c, &se)| z_statistic(c, se)).collect();

    let kk = spec.parameter_count() as f64;
    let nf = n_eff as f64;
    let aicc = if nf - kk - 1.0 > 0.0 {
        -2.0 * loglik + 2.0 * kk + 2.0 * kk * (kk + 1.0) / (nf - kk - 1.0)
    } else {
        f64::INFINITY
    };

    let fitted: Vec<f64> = w.iter().zip(&residuals).map(|(wi, e)| wi - e).collect();
    let origin = s.origin_year().map(|y| y + spec.d as i32);
    let make = |v: Vec<f64>| -> Result<Series> {
        match origin {
            Some(y) => Series::with_origin(v, y),
            None => Series::new(v),
        }
    };

    Ok(ArimaFit {
        spec,
        ar: ar.to_vec(),
        ma: ma.to_vec(),
        drift,
        sigma2,
        coeff_se,
        z_stats,
        loglik,
        css_loglik,
        aicc,
        residuals: make(residuals)?,
        fitted: make(fitted)?,
        likelihood: opts.likelihood,
        iterations,
        differenced: w,
        history: s.values().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parsing() {
        assert_eq!("1,1,2".parse::<ArimaSpec>().unwrap(), ArimaSpec::new(1, 1, 2));
        assert_eq!("0, 1, 0, drift".parse::<ArimaSpec>().unwrap(), ArimaSpec::new(0, 1, 0).with_drift());
        assert!("1,1".parse::<ArimaSpec>().is_err());
        assert!("1,x,1".parse::<ArimaSpec>().is_err());
        assert_eq!(ArimaSpec::new(2, 1, 3).with_drift().to_string(), "2,1,3,drift");
    }

    #[test]
    fn spec_validation() {
        assert!(ArimaSpec::new(0, 0, 0).validate(20).is_err());
        assert!(ArimaSpec::new(2, 1, 3).validate(8).is_err());
        assert!(ArimaSpec::new(2, 1, 3).validate(9).is_ok());
    }

    #[test]
    fn white_noise_with_drift_is_analytic() {
        let v = vec![1.2, -0.3, 0.8, 2.1, -1.0, 0.4, 0.9, -0.6, 1.5, 0.2];
        let s = Series::new(v.clone()).unwrap();
        let f = fit(&s, ArimaSpec::new(0, 0, 0).with_drift()).unwrap();
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64;
        assert!((f.drift.unwrap() - m).abs() < 1e-12);
        assert!((f.sigma2 - var).abs() < 1e-12);
        assert_eq!(f.residuals.len(), v.len());
    }

    #[test]
    fn significance_rules() {
        assert!((z_statistic(0.96, 0.07) - 13.714).abs() < 1e-3);
        assert!(is_significant(z_statistic(0.96, 0.07)));
        let z = z_statistic(0.099, 0.388);
        assert!((z - 0.25).abs() < 0.02);
        assert!(!is_significant(z));
        assert!(z_statistic(0.5, 0.0).is_infinite());
        assert!(is_significant(z_statistic(0.5, 0.0)));
    }

    #[test]
    fn constant_after_differencing() {
        let s = Series::new((0..12).map(|t| 2.0 * t as f64).collect()).unwrap();
        assert!(matches!(fit(&s, ArimaSpec::new(1, 1, 0)), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn raw_natural_round_trip() {
        let params = [0.5, -0.2, 0.3];
        let raw = raw_from_natural(&params, 2).unwrap();
        let back = natural_from_raw(&raw, 2);
        for (a, b) in params.iter().zip(back) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
