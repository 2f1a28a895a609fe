//! Conditional sum of squares and exact Gaussian likelihood for zero-mean ARMA data.

use super::transform::{is_invertible, is_stationary};
use crate::linalg::{solve, Matrix};

/// Conditional innovations: the first `p` are zero, later ones follow the ARMA recursion.
pub(crate) fn css_residuals(x: &[f64], ar: &[f64], ma: &[f64]) -> Vec<f64> {
    let p = ar.len();
    let mut e = vec![0.0; x.len()];
    for t in p..x.len() {
        let mut v = x[t];
        for (i, phi) in ar.iter().enumerate() {
            v -= phi * x[t - 1 - i];
        }
        for (j, theta) in ma.iter().enumerate() {
            if t > j {
                v -= theta * e[t - 1 - j];
            }
        }
        e[t] = v;
    }
    e
}

/// Residual sum of squares over the conditional residuals.
pub(crate) fn css_sum_of_squares(x: &[f64], ar: &[f64], ma: &[f64]) -> f64 {
    css_residuals(x, ar, ma)[ar.len()..].iter().map(|v| v * v).sum()
}

/// Outputs of the innovations (Kalman) recursion with unit innovation variance.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Innovations {
    /// Σ v_t² / F_t
    pub ssq: f64,
    /// Σ ln F_t
    pub sumlog: f64,
    pub n: usize,
}

impl Innovations {
    pub fn sigma2(&self) -> f64 {
        self.ssq / self.n as f64
    }

    /// Exact Gaussian log-likelihood with σ² at its profile maximum.
    pub fn loglik(&self) -> f64 {
        let n = self.n as f64;
        -0.5 * n * ((2.0 * std::f64::consts::PI).ln() + 1.0 + self.sigma2().ln()) - 0.5 * self.sumlog
    }
}

/// Stationary state covariance (per unit σ²) of the ARMA state vector:
/// solves `P = T P T' + R R'`.
fn initial_covariance(phi: &[f64], rvec: &[f64]) -> Option<Matrix> {
    let r = rvec.len();
    let dim = r * r;
    // vec(P) = (I - T⊗T)^{-1} vec(RR'), T has φ in its first column and ones above the diagonal.
    let t_entry = |i: usize, j: usize| -> f64 {
        let mut v = 0.0;
        if j == 0 {
            v += phi[i];
        }
        if j == i + 1 {
            v += 1.0;
        }
        v
    };
    let mut a = Matrix::identity(dim);
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                for l in 0..r {
                    let tik = t_entry(i, k);
                    let tjl = t_entry(j, l);
                    if tik != 0.0 && tjl != 0.0 {
                        a[(i * r + j, k * r + l)] -= tik * tjl;
                    }
                }
            }
        }
    }
    let b: Vec<f64> = (0..dim).map(|idx| rvec[idx / r] * rvec[idx % r]).collect();
    let sol = solve(&a, &b)?;
    Some(Matrix { n: r, data: sol })
}

/// Kalman-filter innovations for a zero-mean stationary ARMA model.
/// `None` if the model is not stationary or the recursion breaks down.
pub(crate) fn innovations(x: &[f64], ar: &[f64], ma: &[f64]) -> Option<Innovations> {
    if !is_stationary(ar) || !is_invertible(ma, 1e-8) {
        return None;
    }
    let r = ar.len().max(ma.len() + 1);
    let mut phi = vec![0.0; r];
    phi[..ar.len()].copy_from_slice(ar);
    let mut rvec = vec![0.0; r];
    rvec[0] = 1.0;
    rvec[1..=ma.len()].copy_from_slice(ma);

    let mut p = initial_covariance(&phi, &rvec)?;
    let mut a = vec![0.0; r];
    let mut ssq = 0.0;
    let mut sumlog = 0.0;
    let mut au = vec![0.0; r];
    let mut pu = Matrix::zeros(r);
    let mut tp = Matrix::zeros(r);

    for &obs in x {
        let f = p[(0, 0)];
        if !(f > 1e-300) || !f.is_finite() {
            return None;
        }
        let v = obs - a[0];
        ssq += v * v / f;
        sumlog += f.ln();

        for i in 0..r {
            au[i] = a[i] + p[(i, 0)] * v / f;
            for j in 0..r {
                pu[(i, j)] = p[(i, j)] - p[(i, 0)] * p[(0, j)] / f;
            }
        }
        for i in 0..r {
            a[i] = phi[i] * au[0] + if i + 1 < r { au[i + 1] } else { 0.0 };
        }
        for i in 0..r {
            for j in 0..r {
                tp[(i, j)] = phi[i] * pu[(0, j)] + if i + 1 < r { pu[(i + 1, j)] } else { 0.0 };
            }
        }
        for i in 0..r {
            for j in 0..r {
                p[(i, j)] = tp[(i, 0)] * phi[j]
                    + if j + 1 < r { tp[(i, j + 1)] } else { 0.0 }
                    + rvec[i] * rvec[j];
            }
        }
    }
    Some(Innovations { ssq, sumlog, n: x.len() })
}

/// Negative exact log-likelihood of zero-mean ARMA data with σ² profiled out,
/// up to an additive constant: `n/2 · ln(σ̂²) + ½ Σ ln F_t`.
/// Returns `+∞` outside the stationary/invertible region.
pub fn exact_neg_loglik(x: &[f64], ar: &[f64], ma: &[f64]) -> f64 {
    match innovations(x, ar, ma) {
        Some(inn) => 0.5 * inn.n as f64 * inn.sigma2().ln() + 0.5 * inn.sumlog,
        None => f64::INFINITY,
    }
}
