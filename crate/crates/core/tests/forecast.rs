use asgrowth_core::arima::{fit, forecast, psi_weights, psi_weights_for, ArimaSpec};
use asgrowth_core::sim::{rng_for, ArimaProcess};
use asgrowth_core::Series;
use proptest::prelude::*;

/// Power series of `num / den` by long division, `terms` coefficients.
fn long_division(num: &[f64], den: &[f64], terms: usize) -> Vec<f64> {
    let mut rem: Vec<f64> = (0..terms + den.len()).map(|i| num.get(i).copied().unwrap_or(0.0)).collect();
    let mut out = Vec::with_capacity(terms);
    for i in 0..terms {
        let c = rem[i] / den[0];
        out.push(c);
        for (j, d) in den.iter().enumerate() {
            rem[i + j] -= c * d;
        }
    }
    out
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn oracle(ar: &[f64], ma: &[f64], d: usize, terms: usize) -> Vec<f64> {
    let mut den: Vec<f64> = std::iter::once(1.0).chain(ar.iter().map(|v| -v)).collect();
    for _ in 0..d {
        den = poly_mul(&den, &[1.0, -1.0]);
    }
    let num: Vec<f64> = std::iter::once(1.0).chain(ma.iter().copied()).collect();
    long_division(&num, &den, terms)
}

#[test]
fn arma11_closed_form() {
    for (phi, theta) in [(0.7, 0.4), (-0.5, 0.9), (0.95, -0.3)] {
        let psi = psi_weights_for(&[phi], &[theta], 0, 30);
        assert_eq!(psi[0], 1.0);
        assert!((psi[1] - (phi + theta)).abs() < 1e-12);
        for j in 2..30 {
            assert!((psi[j] - phi * psi[j - 1]).abs() < 1e-12);
        }
    }
    assert!(psi_weights_for(&[], &[], 1, 10).iter().all(|&v| v == 1.0));
}

proptest! {
    #[test]
    fn psi_matches_long_division(ar in prop::collection::vec(-0.6f64..0.6, 0..3),
                                 ma in prop::collection::vec(-0.9f64..0.9, 0..4),
                                 d in 0usize..3) {
        let got = psi_weights_for(&ar, &ma, d, 25);
        let want = oracle(&ar, &ma, d, 25);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-10 * (1.0 + w.abs()), "{g} vs {w}");
        }
    }
}

fn simulated(seed: u64, proc_: &ArimaProcess, n: usize) -> Series {
    let mut rng = rng_for(seed, 0);
    Series::new(proc_.simulate(&mut rng, n, 50)).unwrap()
}

#[test]
fn drift_walk_forecast_is_linear() {
    let proc_ = ArimaProcess { ar: vec![], ma: vec![], d: 1, drift: 3.0, sigma: 2.0 };
    let s = simulated(11, &proc_, 60);
    let f = fit(&s, ArimaSpec::new(0, 1, 0).with_drift()).unwrap();
    let c = f.drift.unwrap();
    let y_n = *s.values().last().unwrap();
    let fc = forecast(&f, 8, 0.95).unwrap();
    for (h, p) in fc.points.iter().enumerate() {
        assert_eq!(*p, y_n + (h + 1) as f64 * c);
    }
    assert_eq!(fc.se[0], f.sigma2.sqrt());
}

#[test]
fn interval_shape() {
    let proc_ = ArimaProcess { ar: vec![0.6], ma: vec![0.3], d: 1, drift: 0.0, sigma: 1.0 };
    let s = simulated(12, &proc_, 120);
    let f = fit(&s, ArimaSpec::new(1, 1, 1)).unwrap();
    let psi = psi_weights(&f, 10);
    assert_eq!(psi, psi_weights_for(&f.ar, &f.ma, 1, 10));
    let fc = forecast(&f, 10, 0.95).unwrap();
    assert_eq!(fc.se[0], f.sigma2.sqrt());
    for h in 0..10 {
        assert!(fc.lower[h] <= fc.points[h] && fc.points[h] <= fc.upper[h]);
        assert!(((fc.upper[h] - fc.points[h]) - 1.96 * fc.se[h]).abs() < 1e-9);
        if h > 0 {
            assert!(fc.se[h] >= fc.se[h - 1]);
        }
    }
    let fc90 = forecast(&f, 3, 0.90).unwrap();
    assert!(((fc90.upper[0] - fc90.points[0]) / fc90.se[0] - 1.6448536).abs() < 1e-6);
    assert!(forecast(&f, 3, 1.0).is_err());
}

#[test]
fn fitted_plus_residuals_is_differenced() {
    let proc_ = ArimaProcess { ar: vec![0.5], ma: vec![-0.3, 0.2], d: 1, drift: 1.0, sigma: 1.0 };
    let s = simulated(13, &proc_, 150);
    let f = fit(&s, ArimaSpec::new(1, 1, 2).with_drift()).unwrap();
    assert_eq!(f.residuals.len(), s.len() - 1);
    for ((w, e), fv) in f.differenced().iter().zip(f.residuals.values()).zip(f.fitted.values()) {
        assert!((fv + e - w).abs() < 1e-9);
    }
    assert!(f.loglik >= f.css_loglik - 1e-9);
}

#[test]
fn one_step_forecast_extends_recursion() {
    // For AR(1) on differences the one-step forecast is y_n + μ + φ (w_n - μ).
    let proc_ = ArimaProcess { ar: vec![0.5], ma: vec![], d: 1, drift: 2.0, sigma: 1.0 };
    let s = simulated(14, &proc_, 80);
    let f = fit(&s, ArimaSpec::new(1, 1, 0).with_drift()).unwrap();
    let mu = f.drift.unwrap();
    let w_n = *f.differenced().last().unwrap();
    let y_n = *s.values().last().unwrap();
    let fc = forecast(&f, 1, 0.95).unwrap();
    assert!((fc.points[0] - (y_n + mu + f.ar[0] * (w_n - mu))).abs() < 1e-9);
}
