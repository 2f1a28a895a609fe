use serde::{Deserialize, Serialize};

use super::{PValue, Series, StatTestResult};
use crate::error::{Error, Result};
use crate::linalg::ols;

/// Deterministic terms in the Dickey-Fuller regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendMode {
    None,
    #[default]
    Constant,
    ConstantTrend,
}

// MacKinnon (2010) response surfaces, one unit-root variable:
// crit(T) = b0 + b1/T + b2/T^2 + b3/T^3, rows for the 1%, 5% and 10% levels.
const SURFACE_NONE: [[f64; 4]; 3] = [
    [-2.56574, -2.2358, -3.627, 0.0],
    [-1.94100, -0.2686, -3.365, 31.223],
    [-1.61682, 0.2656, -2.714, 25.364],
];
const SURFACE_CONSTANT: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];
const SURFACE_TREND: [[f64; 4]; 3] = [
    [-3.95877, -9.0531, -28.428, -134.155],
    [-3.41049, -4.3904, -9.036, -45.374],
    [-3.12705, -2.5856, -3.925, -22.380],
];

/// Finite-sample critical values `[1%, 5%, 10%]` for `nobs` regression observations.
pub fn dickey_fuller_critical_values(mode: TrendMode, nobs: usize) -> [f64; 3] {
    let table = match mode {
        TrendMode::None => &SURFACE_NONE,
        TrendMode::Constant => &SURFACE_CONSTANT,
        TrendMode::ConstantTrend => &SURFACE_TREND,
    };
    let t = nobs as f64;
    table.map(|b| b[0] + b[1] / t + b[2] / (t * t) + b[3] / (t * t * t))
}

/// Non-augmented Dickey-Fuller test; null hypothesis is a unit root.
///
/// Regresses `Δy_t` on `y_{t-1}` plus the deterministic terms of `mode` and returns the
/// t-ratio of the `y_{t-1}` coefficient. The p-value is bracketed by the tabulated
/// 1/5/10% critical values.
pub fn dickey_fuller(s: &Series, mode: TrendMode) -> Result<StatTestResult> {
    let y = s.values();
    let n = y.len();
    if n < 8 {
        return Err(Error::DegenerateInput(format!("Dickey-Fuller needs at least 8 values, got {n}")));
    }
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let lagged = y[..n - 1].to_vec();
    let nobs = dy.len();
    let mut columns = vec![lagged];
    if mode != TrendMode::None {
        columns.push(vec![1.0; nobs]);
    }
    if mode == TrendMode::ConstantTrend {
        columns.push((1..=nobs).map(|t| t as f64).collect());
    }
    let fit = ols(&columns, &dy)?;
    if !(fit.se[0] > 0.0) {
        return Err(Error::SingularRegression);
    }
    let statistic = fit.coef[0] / fit.se[0];
    let [c1, c5, c10] = dickey_fuller_critical_values(mode, nobs);
    let (lower, upper) = if statistic < c1 {
        (0.0, 0.01)
    } else if statistic < c5 {
        (0.01, 0.05)
    } else if statistic < c10 {
        (0.05, 0.10)
    } else {
        (0.10, 1.0)
    };
    Ok(StatTestResult {
        statistic,
        p_value: PValue::TabulatedBracket { lower, upper },
        reject_null: statistic < c5,
        critical_value: Some(c5),
    })
}
