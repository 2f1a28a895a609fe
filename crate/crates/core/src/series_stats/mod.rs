//! Time-series characterization: differencing, IAAV, autocorrelation, and the
//! stationarity / normality tests used to validate models.

mod acf;
mod dickey_fuller;
mod normality;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use acf::{acf, pacf, AcfResult};
pub use dickey_fuller::{dickey_fuller, dickey_fuller_critical_values, TrendMode};
pub use normality::{jarque_bera, shapiro_wilk};

/// Significance level used by every test in the crate.
pub const ALPHA: f64 = 0.05;
/// Two-sided normal quantile at [`ALPHA`].
pub const Z_95: f64 = 1.96;

/// Finite real-valued series of length ≥ 2, optionally anchored to a calendar year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    values: Vec<f64>,
    origin_year: Option<i32>,
}

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::DegenerateInput(format!(
                "series needs at least 2 values, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput(format!("non-finite value at index {i}")));
        }
        Ok(Self { values, origin_year: None })
    }

    pub fn with_origin(values: Vec<f64>, origin_year: i32) -> Result<Self> {
        let mut s = Self::new(values)?;
        s.origin_year = Some(origin_year);
        Ok(s)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn origin_year(&self) -> Option<i32> {
        self.origin_year
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    /// Year of element `k`, when the series is anchored.
    pub fn year_of(&self, k: usize) -> Option<i32> {
        self.origin_year.map(|y| y + k as i32)
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// p-value of a test: exact, or bracketed by tabulated critical values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PValue {
    Exact { value: f64 },
    TabulatedBracket { lower: f64, upper: f64 },
}

impl PValue {
    /// Point value for exact p-values, the upper bracket end otherwise.
    pub fn conservative(self) -> f64 {
        match self {
            PValue::Exact { value } => value,
            PValue::TabulatedBracket { upper, .. } => upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatTestResult {
    pub statistic: f64,
    pub p_value: PValue,
    /// Null hypothesis rejected at [`ALPHA`].
    pub reject_null: bool,
    /// 5% critical value for tabulated tests.
    pub critical_value: Option<f64>,
}

/// `d`-times first difference; length `n - d`.
pub fn difference(s: &Series, d: usize) -> Result<Series> {
    if d >= s.len() || s.len() - d < 2 {
        return Err(Error::DegenerateInput(format!(
            "differencing {} values {d} times leaves fewer than 2",
            s.len()
        )));
    }
    let mut v = s.values.clone();
    for _ in 0..d {
        v = v.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(Series {
        values: v,
        origin_year: s.origin_year.map(|y| y + d as i32),
    })
}

/// Inter-annual absolute variation: `|y_t - y_{t-1}|`.
pub fn iaav(s: &Series) -> Result<Series> {
    if s.len() < 3 {
        return Err(Error::DegenerateInput("IAAV needs at least 3 values".into()));
    }
    let mut d = difference(s, 1)?;
    d.values.iter_mut().for_each(|v| *v = v.abs());
    Ok(d)
}
