//! Long-term trend estimates and Fisher-z comparison of trend correlations.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::linalg::ols;
use crate::series_stats::{difference, mean, Series, Z_95};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendMethod {
    /// ARIMA(0,1,0) with drift.
    RwDrift,
    Linear,
}

impl TrendMethod {
    pub fn label(self) -> &'static str {
        match self {
            TrendMethod::RwDrift => "ARIMA(0,1,0)",
            TrendMethod::Linear => "Linear Model",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendEstimate {
    pub method: TrendMethod,
    /// Counts per year.
    pub annual_growth: f64,
    pub se: f64,
    /// Value of the fitted line at the first observation (linear only).
    pub intercept: Option<f64>,
    pub fitted: Series,
}

fn require_len(s: &Series, n: usize) -> Result<()> {
    if s.len() < n {
        return Err(Error::DegenerateInput(format!("trend needs at least {n} values, got {}", s.len())));
    }
    Ok(())
}

fn anchored(values: Vec<f64>, like: &Series) -> Result<Series> {
    match like.origin_year() {
        Some(y) => Series::with_origin(values, y),
        None => Series::new(values),
    }
}

/// Random walk with drift: growth is the mean first difference, its standard
/// error the sample standard deviation of the differences over `sqrt(n - 1)`.
/// Fitted values are the one-step predictions `y[t-1] + drift`, with `y[0]` itself first.
pub fn rw_drift_trend(s: &Series) -> Result<TrendEstimate> {
    require_len(s, 3)?;
    let diffs = difference(s, 1)?.into_values();
    let k = diffs.len() as f64;
    let drift = mean(&diffs);
    let var = diffs.iter().map(|v| (v - drift).powi(2)).sum::<f64>() / (k - 1.0);
    let y = s.values();
    let fitted = std::iter::once(y[0]).chain(y[..y.len() - 1].iter().map(|v| v + drift)).collect();
    Ok(TrendEstimate {
        method: TrendMethod::RwDrift,
        annual_growth: drift,
        se: var.sqrt() / k.sqrt(),
        intercept: None,
        fitted: anchored(fitted, s)?,
    })
}

/// Ordinary least squares of the values on the year index.
pub fn linear_trend(s: &Series) -> Result<TrendEstimate> {
    require_len(s, 3)?;
    let n = s.len();
    let t: Vec<f64> = (0..n).map(|k| k as f64).collect();
    let fit = ols(&[vec![1.0; n], t.clone()], s.values())?;
    let (a, b) = (fit.coef[0], fit.coef[1]);
    Ok(TrendEstimate {
        method: TrendMethod::Linear,
        annual_growth: b,
        se: fit.se[1],
        intercept: Some(a),
        fitted: anchored(t.iter().map(|k| a + b * k).collect(), s)?,
    })
}

/// Country growth as a percentage of the region's growth.
pub fn relative_growth_pct(country: &TrendEstimate, region: &TrendEstimate) -> Result<f64> {
    relative_pct(country.annual_growth, region.annual_growth)
}

pub fn relative_pct(country_growth: f64, region_growth: f64) -> Result<f64> {
    if !(region_growth > 0.0) {
        return Err(Error::DivisionByZero(format!("region growth {region_growth} is not positive")));
    }
    Ok(100.0 * country_growth / region_growth)
}

/// Fisher's variance-stabilizing transform `½ ln((1 + r) / (1 - r))`.
pub fn fisher_z(r: f64) -> Result<f64> {
    if !(r.abs() < 1.0) {
        return Err(Error::DomainError(format!("correlation {r} outside (-1, 1)")));
    }
    Ok(r.atanh())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationComparison {
    pub r1: f64,
    pub r2: f64,
    pub n1: usize,
    pub n2: usize,
    pub z1: f64,
    pub z2: f64,
    pub zd: f64,
    pub p_value: f64,
    pub reject_equal: bool,
}

/// Two-sided test of equal correlations from independent samples.
pub fn compare_correlations(r1: f64, n1: usize, r2: f64, n2: usize) -> Result<CorrelationComparison> {
    let z1 = fisher_z(r1)?;
    let z2 = fisher_z(r2)?;
    compare_fisher_z(z1, n1, z2, n2)
}

/// As [`compare_correlations`] but with already transformed `z` values.
pub fn compare_fisher_z(z1: f64, n1: usize, z2: f64, n2: usize) -> Result<CorrelationComparison> {
    if n1 <= 3 || n2 <= 3 {
        return Err(Error::DomainError(format!("sample sizes must exceed 3, got {n1} and {n2}")));
    }
    if !z1.is_finite() || !z2.is_finite() {
        return Err(Error::DomainError("non-finite Fisher z".into()));
    }
    let zd = (z1 - z2) / (1.0 / (n1 - 3) as f64 + 1.0 / (n2 - 3) as f64).sqrt();
    // 2 (1 - Φ(|zd|)) via erfc for accuracy in the tail.
    let p_value = erfc(zd.abs() / std::f64::consts::SQRT_2);
    Ok(CorrelationComparison {
        r1: z1.tanh(),
        r2: z2.tanh(),
        n1,
        n2,
        z1,
        z2,
        zd,
        p_value,
        reject_equal: zd.abs() > Z_95,
    })
}

pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.len() < 2 {
        return Err(Error::DegenerateInput("correlation needs at least 2 pairs".into()));
    }
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Overlapping fitted-trend windows of two estimates: aligned by calendar year when
/// both are anchored, otherwise they must have equal length.
pub fn aligned_fitted<'a>(a: &'a TrendEstimate, b: &'a TrendEstimate) -> Result<(&'a [f64], &'a [f64])> {
    let (fa, fb) = (&a.fitted, &b.fitted);
    match (fa.origin_year(), fb.origin_year()) {
        (Some(ya), Some(yb)) => {
            let start = ya.max(yb);
            let end = (ya + fa.len() as i32).min(yb + fb.len() as i32);
            if end - start < 3 {
                return Err(Error::LengthMismatch { left: fa.len(), right: fb.len() });
            }
            let (sa, sb) = ((start - ya) as usize, (start - yb) as usize);
            let len = (end - start) as usize;
            Ok((&fa.values()[sa..sa + len], &fb.values()[sb..sb + len]))
        }
        _ if fa.len() == fb.len() => Ok((fa.values(), fb.values())),
        _ => Err(Error::LengthMismatch { left: fa.len(), right: fb.len() }),
    }
}

/// Pearson correlation of two fitted trends over their common years.
pub fn trend_correlation(a: &TrendEstimate, b: &TrendEstimate) -> Result<f64> {
    let (x, y) = aligned_fitted(a, b)?;
    pearson(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(v: &[f64]) -> Series {
        Series::new(v.to_vec()).unwrap()
    }

    #[test]
    fn linear_series_trends() {
        let v: Vec<f64> = (0..10).map(|t| 5.0 + 3.0 * t as f64).collect();
        let rw = rw_drift_trend(&s(&v)).unwrap();
        assert_eq!(rw.annual_growth, 3.0);
        assert_eq!(rw.se, 0.0);
        let lin = linear_trend(&s(&v)).unwrap();
        assert!((lin.annual_growth - 3.0).abs() < 1e-12);
        assert!(lin.se < 1e-12);
        assert!((lin.intercept.unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn rw_drift_small_example() {
        // Differences (10, 4): mean 7, sd sqrt(18) = 4.243, se = 4.243 / sqrt(2) = 3.
        let rw = rw_drift_trend(&s(&[0.0, 10.0, 14.0])).unwrap();
        assert_eq!(rw.annual_growth, 7.0);
        assert!((rw.se - 3.0).abs() < 1e-12);
        assert_eq!(rw.fitted.values(), &[0.0, 7.0, 17.0]);
    }

    #[test]
    fn reversal_negates_slope() {
        let v = [3.0, 7.0, 4.0, 11.0, 9.0, 15.0];
        let mut r = v.to_vec();
        r.reverse();
        let a = linear_trend(&s(&v)).unwrap().annual_growth;
        let b = linear_trend(&s(&r)).unwrap().annual_growth;
        assert!((a + b).abs() < 1e-12);
    }

    #[test]
    fn relative_growth() {
        assert!((relative_pct(38.0, 464.0).unwrap() - 8.19).abs() < 0.15);
        assert!((relative_pct(18.0, 464.0).unwrap() - 3.88).abs() < 0.15);
        assert_eq!(relative_pct(5.0, 5.0).unwrap(), 100.0);
        assert!(matches!(relative_pct(5.0, 0.0), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn fisher_values() {
        assert_eq!(fisher_z(0.0).unwrap(), 0.0);
        assert!((fisher_z(0.90).unwrap() - 1.472).abs() < 1e-3);
        assert!((fisher_z(0.86).unwrap() - 1.293).abs() < 1e-3);
        assert!(fisher_z(1.0).is_err());
        assert!(fisher_z(-1.5).is_err());
    }

    #[test]
    fn comparison_examples() {
        let same = compare_correlations(0.7, 20, 0.7, 20).unwrap();
        assert_eq!(same.zd, 0.0);
        assert!((same.p_value - 1.0).abs() < 1e-15);
        assert!(!same.reject_equal);

        let japan = compare_fisher_z(2.1, 17, 1.3, 17).unwrap();
        assert!((japan.zd - 2.12).abs() < 0.02);
        assert!((japan.p_value - 0.034).abs() < 0.005);
        assert!(japan.reject_equal);

        // Recomputed from the inputs; 1.66 is not reachable with n1 = n2 = 17.
        let taiwan = compare_fisher_z(2.1, 17, 1.5, 17).unwrap();
        assert!((taiwan.zd - 1.587).abs() < 0.005);
        assert!((taiwan.p_value - 0.1125).abs() < 0.002);
        assert!(!taiwan.reject_equal);

        assert!(compare_fisher_z(1.0, 3, 0.5, 10).is_err());
    }

    #[test]
    fn trend_correlations() {
        let a = rw_drift_trend(&s(&[1.0, 4.0, 6.0, 9.0, 12.0])).unwrap();
        assert!((trend_correlation(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let neg = TrendEstimate {
            fitted: s(&a.fitted.values().iter().map(|v| -v).collect::<Vec<_>>()),
            ..a.clone()
        };
        assert!((trend_correlation(&a, &neg).unwrap() + 1.0).abs() < 1e-12);
        let short = rw_drift_trend(&s(&[1.0, 2.0, 4.0])).unwrap();
        assert!(matches!(trend_correlation(&a, &short), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn year_alignment() {
        let a = rw_drift_trend(&Series::with_origin(vec![1.0, 2.0, 4.0, 7.0, 8.0, 12.0], 1994).unwrap()).unwrap();
        let b = rw_drift_trend(&Series::with_origin(vec![3.0, 1.0, 6.0, 8.0], 1996).unwrap()).unwrap();
        let (x, y) = aligned_fitted(&a, &b).unwrap();
        assert_eq!(x.len(), 4);
        assert_eq!(x[0], a.fitted.values()[2]);
        assert_eq!(y[0], b.fitted.values()[0]);
    }

    proptest! {
        #[test]
        fn fisher_is_odd(r in -0.999f64..0.999) {
            prop_assert!((fisher_z(-r).unwrap() + fisher_z(r).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn comparison_antisymmetric(r1 in -0.99f64..0.99, r2 in -0.99f64..0.99, n1 in 4usize..60, n2 in 4usize..60) {
            let ab = compare_correlations(r1, n1, r2, n2).unwrap();
            let ba = compare_correlations(r2, n2, r1, n1).unwrap();
            prop_assert!((ab.zd + ba.zd).abs() < 1e-12);
            prop_assert!((ab.p_value - ba.p_value).abs() < 1e-12);
            prop_assert_eq!(ab.reject_equal, ab.zd.abs() > 1.96);
        }

        #[test]
        fn p_decreases_with_gap(base in -1.0f64..1.0, g1 in 0.0f64..2.0, extra in 0.001f64..1.0, n in 4usize..50) {
            let a = compare_fisher_z(base + g1, n, base, n).unwrap();
            let b = compare_fisher_z(base + g1 + extra, n, base, n).unwrap();
            prop_assert!(b.p_value <= a.p_value);
        }
    }
}
