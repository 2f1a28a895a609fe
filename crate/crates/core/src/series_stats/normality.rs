use statrs::distribution::{ContinuousCDF, Normal};

use super::{mean, PValue, Series, StatTestResult, ALPHA};
use crate::error::{Error, Result};

fn exact(statistic: f64, p: f64) -> StatTestResult {
    StatTestResult {
        statistic,
        p_value: PValue::Exact { value: p },
        reject_null: p < ALPHA,
        critical_value: None,
    }
}

/// Jarque-Bera normality test, `n/6 (S^2 + (K-3)^2/4)`, with a chi-squared(2) p-value.
pub fn jarque_bera(s: &Series) -> Result<StatTestResult> {
    let x = s.values();
    let n = x.len() as f64;
    if x.len() < 8 {
        return Err(Error::DegenerateInput(format!("Jarque-Bera needs at least 8 values, got {}", x.len())));
    }
    let m = mean(x);
    let moment = |k: i32| x.iter().map(|v| (v - m).powi(k)).sum::<f64>() / n;
    let m2 = moment(2);
    if m2 <= f64::EPSILON * m * m || m2 == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let skew = moment(3) / m2.powf(1.5);
    let kurt = moment(4) / (m2 * m2);
    let jb = n / 6.0 * (skew * skew + (kurt - 3.0).powi(2) / 4.0);
    // Survival function of chi-squared with 2 degrees of freedom.
    Ok(exact(jb, (-jb / 2.0).exp()))
}

/// Shapiro-Wilk W test with Royston's AS R94 coefficients and p-value approximation,
/// valid for 3 ≤ n ≤ 5000.
pub fn shapiro_wilk(s: &Series) -> Result<StatTestResult> {
    let n = s.len();
    if !(3..=5000).contains(&n) {
        return Err(Error::DegenerateInput(format!("Shapiro-Wilk supports 3..=5000 values, got {n}")));
    }
    let mut x = s.values().to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if range <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let a = coefficients(n);
    let w = w_statistic(&x, &a, range);
    Ok(exact(w, p_value(w, n)))
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Antisymmetric weights a[0..n/2] for the lower half of the order statistics
/// (the upper half uses the negated mirror).
fn coefficients(n: usize) -> Vec<f64> {
    let half = n / 2;
    if n == 3 {
        return vec![std::f64::consts::FRAC_1_SQRT_2];
    }
    const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
    const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
    let norm = std_normal();
    let an = n as f64;
    let mut m: Vec<f64> = (1..=half)
        .map(|i| norm.inverse_cdf((i as f64 - 0.375) / (an + 0.25)))
        .collect();
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / an.sqrt();
    let a1 = poly(&C1, rsn) - m[0] / ssumm2;

    let (first_scaled, fac) = if n > 5 {
        let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
        let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
            / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
            .sqrt();
        m[1] = a2;
        (2, fac)
    } else {
        let fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        (1, fac)
    };
    m[0] = a1;
    for v in &mut m[first_scaled..] {
        *v /= -fac;
    }
    m
}

fn w_statistic(x: &[f64], a: &[f64], range: f64) -> f64 {
    let n = x.len();
    // Full weight vector: negative on the lower half, mirrored positive on the upper half.
    let weight = |i: usize| -> f64 {
        let j = n - 1 - i;
        if i == j {
            0.0
        } else if i < j {
            -a[i]
        } else {
            a[j]
        }
    };
    let xs: Vec<f64> = x.iter().map(|v| v / range).collect();
    let xm = mean(&xs);
    let wm = (0..n).map(weight).sum::<f64>() / n as f64;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (i, xi) in xs.iter().enumerate() {
        let da = weight(i) - wm;
        let dx = xi - xm;
        ssa += da * da;
        ssx += dx * dx;
        sax += da * dx;
    }
    let root = (ssa * ssx).sqrt();
    let w1 = (root - sax) * (root + sax) / (ssa * ssx);
    (1.0 - w1).clamp(0.0, 1.0)
}

fn p_value(w: f64, n: usize) -> f64 {
    if n == 3 {
        const SIX_OVER_PI: f64 = 1.909_859_317_102_744;
        const ASIN_SQRT_3_4: f64 = std::f64::consts::FRAC_PI_3;
        return (SIX_OVER_PI * (w.sqrt().asin() - ASIN_SQRT_3_4)).clamp(0.0, 1.0);
    }
    const G: [f64; 2] = [-2.273, 0.459];
    const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
    const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
    const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
    const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];

    let an = n as f64;
    let mut y = (1.0 - w).ln();
    let (m, s) = if n <= 11 {
        let gamma = poly(&G, an);
        if y >= gamma {
            return 1e-99;
        }
        y = -(gamma - y).ln();
        (poly(&C3, an), poly(&C4, an).exp())
    } else {
        let xx = an.ln();
        (poly(&C5, xx), poly(&C6, xx).exp())
    };
    1.0 - std_normal().cdf((y - m) / s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jb_zero_for_symmetric_mesokurtic() {
        // Symmetric two-point-plus-centre mixtures have S = 0; choose weights so K = 3:
        // values ±1 with mass p each and 0 with mass 1-2p give K = 1/(2p), so p = 1/6.
        let mut v = vec![0.0; 8];
        v.extend([1.0, -1.0, 1.0, -1.0]);
        let r = jarque_bera(&Series::new(v).unwrap()).unwrap();
        assert!(r.statistic.abs() < 1e-12);
        assert!((r.p_value.conservative() - 1.0).abs() < 1e-12);
        assert!(!r.reject_null);
    }

    #[test]
    fn errors() {
        let flat = Series::new(vec![2.0; 10]).unwrap();
        assert!(matches!(jarque_bera(&flat), Err(Error::ZeroVariance)));
        assert!(matches!(shapiro_wilk(&flat), Err(Error::ZeroVariance)));
        let two = Series::new(vec![1.0, 2.0]).unwrap();
        assert!(matches!(shapiro_wilk(&two), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn three_points() {
        // Equally spaced triple is as normal as three points get: W = 1, p = 1.
        let r = shapiro_wilk(&Series::new(vec![1.0, 2.0, 3.0]).unwrap()).unwrap();
        assert!((r.statistic - 1.0).abs() < 1e-12);
        assert!((r.p_value.conservative() - 1.0).abs() < 1e-9);
    }
}
