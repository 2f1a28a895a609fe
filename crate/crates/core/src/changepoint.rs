//! Variance changepoints in inter-annual absolute variation series.
//!
//! Segments are scored with twice the negative Gaussian log-likelihood of a
//! zero-mean-shift model: every segment shares the global series mean and has its
//! own variance. Binary segmentation searches greedily; segment neighbourhood
//! solves the penalized problem exactly by dynamic programming.
//!
//! Changepoint `t` means the left segment is `y[..t]`, i.e. `t` is the 1-based
//! index of the last observation before the change.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Mode};
use crate::linalg::ols;
use crate::series_stats::{mean, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyKind {
    Aic,
    Sic,
    Manual,
}

/// Per-changepoint penalty `β`: AIC `2p`, SIC `p ln n`, or a fixed value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub kind: PenaltyKind,
    /// Parameters added by one changepoint (location plus new variance).
    pub params_per_cp: usize,
    pub manual_value: Option<f64>,
}

impl PenaltySpec {
    pub const fn aic() -> Self {
        Self { kind: PenaltyKind::Aic, params_per_cp: 2, manual_value: None }
    }

    pub const fn sic() -> Self {
        Self { kind: PenaltyKind::Sic, params_per_cp: 2, manual_value: None }
    }

    pub fn manual(value: f64) -> Result<Self> {
        if !(value >= 0.0) {
            return Err(Error::Config(format!("manual penalty must be ≥ 0, got {value}")));
        }
        Ok(Self { kind: PenaltyKind::Manual, params_per_cp: 2, manual_value: Some(value) })
    }

    pub fn value(&self, n: usize) -> f64 {
        let p = self.params_per_cp as f64;
        match self.kind {
            PenaltyKind::Aic => 2.0 * p,
            PenaltyKind::Sic => p * (n as f64).ln(),
            PenaltyKind::Manual => self.manual_value.unwrap_or(0.0),
        }
    }
}

impl fmt::Display for PenaltySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PenaltyKind::Aic => f.write_str("aic"),
            PenaltyKind::Sic => f.write_str("sic"),
            PenaltyKind::Manual => write!(f, "manual={}", self.manual_value.unwrap_or(0.0)),
        }
    }
}

impl FromStr for PenaltySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "aic" => Ok(Self::aic()),
            "sic" | "bic" => Ok(Self::sic()),
            other => match other.strip_prefix("manual=") {
                Some(v) => Self::manual(v.parse().map_err(|_| Error::Config(format!("bad penalty {s:?}")))?),
                None => Err(Error::Config(format!("unknown penalty {s:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    Binseg,
    Segneigh,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub min_seg: usize,
    /// Segment variances are floored at this multiple of the series variance.
    pub variance_floor_ratio: f64,
    pub mode: Mode,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { min_seg: 2, variance_floor_ratio: 1e-8, mode: Mode::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePointResult {
    pub method: SearchMethod,
    pub penalty: PenaltySpec,
    pub penalty_value: f64,
    pub changepoints: Vec<usize>,
    pub segment_variances: Vec<f64>,
    /// Sum of segment costs plus `β · m`.
    pub total_cost: f64,
}

impl ChangePointResult {
    pub fn unpenalized_cost(&self) -> f64 {
        self.total_cost - self.penalty_value * self.changepoints.len() as f64
    }
}

/// Running sum of deviations from the series mean; the last element is zero up to rounding.
pub fn cusum(s: &Series) -> Result<Series> {
    let m = s.mean();
    let mut acc = 0.0;
    let values = s
        .values()
        .iter()
        .map(|v| {
            acc += v - m;
            acc
        })
        .collect();
    match s.origin_year() {
        Some(y) => Series::with_origin(values, y),
        None => Series::new(values),
    }
}

/// O(1) segment costs from prefix sums of squared deviations about the global mean.
#[derive(Debug, Clone)]
pub struct VarianceCost {
    prefix: Vec<f64>,
    floor: f64,
}

const LN_2PI: f64 = 1.837_877_066_409_345_5;

impl VarianceCost {
    pub fn new(values: &[f64], floor_ratio: f64) -> Self {
        let m = mean(values);
        let mut prefix = Vec::with_capacity(values.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for v in values {
            acc += (v - m).powi(2);
            prefix.push(acc);
        }
        let var = acc / values.len() as f64;
        let floor = (floor_ratio * var).max(f64::MIN_POSITIVE);
        Self { prefix, floor }
    }

    pub fn len(&self) -> usize {
        self.prefix.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Variance estimate of `y[start..end]` about the global mean, floored.
    pub fn variance(&self, start: usize, end: usize) -> f64 {
        let len = (end - start) as f64;
        ((self.prefix[end] - self.prefix[start]) / len).max(self.floor)
    }

    /// Cost of `y[start..end]`: `len · (ln 2π + ln σ̂² + 1)`.
    pub fn cost(&self, start: usize, end: usize) -> f64 {
        let len = (end - start) as f64;
        len * (LN_2PI + self.variance(start, end).ln() + 1.0)
    }
}

/// Cost of the inclusive index range `from..=to` using the default minimum segment length.
pub fn segment_cost(s: &Series, from: usize, to: usize) -> Result<f64> {
    let opts = SearchOptions::default();
    if to >= s.len() || to < from || to - from + 1 < opts.min_seg {
        return Err(Error::DegenerateSegment(format!(
            "segment {from}..={to} of a length-{} series is shorter than {}",
            s.len(),
            opts.min_seg
        )));
    }
    Ok(VarianceCost::new(s.values(), opts.variance_floor_ratio).cost(from, to + 1))
}

fn finish(
    method: SearchMethod,
    penalty: PenaltySpec,
    beta: f64,
    cost: &VarianceCost,
    mut cps: Vec<usize>,
) -> ChangePointResult {
    cps.sort_unstable();
    let n = cost.len();
    let bounds: Vec<usize> = std::iter::once(0).chain(cps.iter().copied()).chain(std::iter::once(n)).collect();
    let segment_variances = bounds.windows(2).map(|w| cost.variance(w[0], w[1])).collect();
    let total_cost = bounds.windows(2).map(|w| cost.cost(w[0], w[1])).sum::<f64>() + beta * cps.len() as f64;
    ChangePointResult { method, penalty, penalty_value: beta, changepoints: cps, segment_variances, total_cost }
}

/// Series shorter than `2 · min_seg` admit no split and yield an empty result.
fn check_options(opts: &SearchOptions) -> Result<()> {
    if opts.min_seg == 0 {
        return Err(Error::Config("min_seg must be at least 1".into()));
    }
    Ok(())
}

/// Best split of `[start, end)`: `(t, gain)` with the smallest `t` among ties.
fn best_split(cost: &VarianceCost, start: usize, end: usize, min_seg: usize) -> Option<(usize, f64)> {
    if end - start < 2 * min_seg {
        return None;
    }
    let whole = cost.cost(start, end);
    let mut best: Option<(usize, f64)> = None;
    for t in start + min_seg..=end - min_seg {
        let gain = whole - cost.cost(start, t) - cost.cost(t, end);
        if best.is_none_or(|(_, g)| gain > g) {
            best = Some((t, gain));
        }
    }
    best
}

pub fn binseg(s: &Series, penalty: PenaltySpec, max_cps: usize) -> Result<ChangePointResult> {
    binseg_with(s, penalty, max_cps, &SearchOptions::default())
}

/// Binary segmentation: repeatedly split the segment whose best split gains the most,
/// while `C(left) + C(right) + β < C(whole)` and fewer than `max_cps` changepoints exist.
pub fn binseg_with(s: &Series, penalty: PenaltySpec, max_cps: usize, opts: &SearchOptions) -> Result<ChangePointResult> {
    check_options(opts)?;
    let cost = VarianceCost::new(s.values(), opts.variance_floor_ratio);
    let n = s.len();
    let beta = penalty.value(n);
    let mut segments = vec![(0usize, n)];
    let mut cps = Vec::new();
    while cps.len() < max_cps {
        let mut choice: Option<(usize, usize, f64)> = None;
        for (idx, &(a, b)) in segments.iter().enumerate() {
            if let Some((t, gain)) = best_split(&cost, a, b, opts.min_seg) {
                let better = match choice {
                    None => true,
                    Some((_, ct, cg)) => gain > cg || (gain == cg && t < ct),
                };
                if better {
                    choice = Some((idx, t, gain));
                }
            }
        }
        match choice {
            Some((idx, t, gain)) if gain > beta => {
                let (a, b) = segments.swap_remove(idx);
                segments.push((a, t));
                segments.push((t, b));
                cps.push(t);
            }
            _ => break,
        }
    }
    Ok(finish(SearchMethod::Binseg, penalty, beta, &cost, cps))
}

pub fn segneigh(s: &Series, penalty: PenaltySpec, max_cps: usize) -> Result<ChangePointResult> {
    segneigh_with(s, penalty, max_cps, &SearchOptions::default())
}

/// Segment neighbourhood: exact minimum of `Σ C(segment) + β m` over `m ≤ max_cps`
/// changepoints, by dynamic programming over (changepoints used, segment end).
pub fn segneigh_with(s: &Series, penalty: PenaltySpec, max_cps: usize, opts: &SearchOptions) -> Result<ChangePointResult> {
    check_options(opts)?;
    let cost = VarianceCost::new(s.values(), opts.variance_floor_ratio);
    let n = s.len();
    let ms = opts.min_seg;
    let beta = penalty.value(n);
    let max_m = max_cps.min((n / ms).saturating_sub(1));

    // best[m][t]: minimum cost of y[..t] split into m + 1 segments.
    let mut best: Vec<Vec<f64>> = vec![(0..=n).map(|t| if t >= ms.min(n) { cost.cost(0, t) } else { f64::INFINITY }).collect()];
    let mut arg: Vec<Vec<usize>> = vec![vec![0; n + 1]];
    for m in 1..=max_m {
        let prev = &best[m - 1];
        let row: Vec<(f64, usize)> = exec::map_range(opts.mode, n + 1, |t| {
            let mut out = (f64::INFINITY, 0);
            if t < (m + 1) * ms {
                return out;
            }
            for split in m * ms..=t - ms {
                let c = prev[split] + cost.cost(split, t);
                if c < out.0 {
                    out = (c, split);
                }
            }
            out
        });
        best.push(row.iter().map(|r| r.0).collect());
        arg.push(row.iter().map(|r| r.1).collect());
    }

    let (m_best, _) = (0..=max_m)
        .map(|m| (m, best[m][n] + beta * m as f64))
        .fold((0, f64::INFINITY), |acc, (m, v)| if v < acc.1 { (m, v) } else { acc });
    let mut cps = Vec::with_capacity(m_best);
    let mut t = n;
    for m in (1..=m_best).rev() {
        t = arg[m][t];
        cps.push(t);
    }
    Ok(finish(SearchMethod::Segneigh, penalty, beta, &cost, cps))
}

/// Changepoints found by segment neighbourhood that binary segmentation also finds
/// within one index; the segment-neighbourhood index is reported.
pub fn consensus_of(binseg: &ChangePointResult, segneigh: &ChangePointResult) -> Vec<usize> {
    segneigh
        .changepoints
        .iter()
        .copied()
        .filter(|&c| binseg.changepoints.iter().any(|&b| b.abs_diff(c) <= 1))
        .collect()
}

/// Default bound on changepoints for both searches.
pub const DEFAULT_MAX_CPS: usize = 5;

/// Consensus of both searches under SIC with default options.
pub fn consensus_changepoints(s: &Series) -> Result<Vec<usize>> {
    let bs = binseg(s, PenaltySpec::sic(), DEFAULT_MAX_CPS)?;
    let sn = segneigh(s, PenaltySpec::sic(), DEFAULT_MAX_CPS)?;
    Ok(consensus_of(&bs, &sn))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRates {
    pub before_pct: f64,
    pub after_pct: f64,
    pub before_slope: f64,
    pub after_slope: f64,
}

/// Per-year growth of a segment: OLS slope on the year index over the segment mean, in percent.
pub fn segment_growth(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 3 {
        return Err(Error::DegenerateSegment(format!("growth rate needs 3 values, got {}", values.len())));
    }
    let t: Vec<f64> = (0..values.len()).map(|k| k as f64).collect();
    let slope = ols(&[vec![1.0; values.len()], t], values)?.coef[1];
    let m = mean(values);
    let pct = if slope.abs() < 1e-12 * (1.0 + m.abs()) {
        0.0
    } else if m == 0.0 {
        return Err(Error::DivisionByZero("segment mean is zero".into()));
    } else {
        100.0 * slope / m
    };
    Ok((pct, slope))
}

/// Growth rates of the IAAV before (`y[..cp]`) and after (`y[cp..]`) a changepoint.
pub fn iaav_growth_rates(s: &Series, cp: usize) -> Result<GrowthRates> {
    if cp > s.len() {
        return Err(Error::DegenerateSegment(format!("changepoint {cp} beyond series length {}", s.len())));
    }
    let (left, right) = s.values().split_at(cp);
    let (before_pct, before_slope) = segment_growth(left)?;
    let (after_pct, after_slope) = segment_growth(right)?;
    Ok(GrowthRates { before_pct, after_pct, before_slope, after_slope })
}
