//! Partial-autocorrelation reparameterization keeping AR polynomials stationary
//! (and, applied to `-θ`, MA polynomials invertible).

/// Unconstrained values → coefficients `φ` with all roots of `1 - Σ φ_i z^i` outside the unit circle.
pub(crate) fn to_coefficients(raw: &[f64]) -> Vec<f64> {
    let p = raw.len();
    let mut new: Vec<f64> = raw.iter().map(|v| v.tanh()).collect();
    let mut work = new.clone();
    for j in 1..p {
        let a = new[j];
        for k in 0..j {
            work[k] -= a * new[j - k - 1];
        }
        new[..j].copy_from_slice(&work[..j]);
    }
    new
}

/// Partial autocorrelations of an AR coefficient vector (Levinson step-down).
/// `None` when some partial has magnitude ≥ 1.
pub(crate) fn partials(phi: &[f64]) -> Option<Vec<f64>> {
    let p = phi.len();
    let mut new = phi.to_vec();
    let mut work = new.clone();
    for j in (1..p).rev() {
        let a = new[j];
        if a.abs() >= 1.0 {
            return None;
        }
        for k in 0..j {
            work[k] = (new[k] + a * new[j - k - 1]) / (1.0 - a * a);
        }
        new[..j].copy_from_slice(&work[..j]);
    }
    if new.iter().any(|v| v.abs() >= 1.0 || !v.is_finite()) {
        return None;
    }
    Some(new)
}

#[cfg(test)]
pub(crate) fn to_raw(phi: &[f64]) -> Option<Vec<f64>> {
    partials(phi).map(|pa| pa.iter().map(|v| v.atanh()).collect())
}

/// Roots of `1 - Σ φ_i z^i` strictly outside the unit circle.
pub fn is_stationary(phi: &[f64]) -> bool {
    phi.is_empty() || partials(phi).is_some()
}

/// Roots of `1 + Σ θ_j z^j` outside (or, within `slack`, on) the unit circle.
pub fn is_invertible(theta: &[f64], slack: f64) -> bool {
    if theta.is_empty() {
        return true;
    }
    let neg: Vec<f64> = theta.iter().map(|v| -v).collect();
    if partials(&neg).is_some() {
        return true;
    }
    // Boundary: shrink slightly and retest.
    let shrunk: Vec<f64> = neg
        .iter()
        .enumerate()
        .map(|(i, v)| v * (1.0 - slack).powi(i as i32 + 1))
        .collect();
    partials(&shrunk).is_some()
}
