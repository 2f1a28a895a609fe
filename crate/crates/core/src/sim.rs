//! Seeded simulation and Monte Carlo helpers.
//!
//! Each run draws from its own ChaCha stream, so results do not depend on how
//! runs are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::exec::{self, Mode};

/// Generator for run `stream` of an experiment seeded with `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Run `f(run, rng)` for `runs` independent seeded replications, in run order.
pub fn monte_carlo<T, F>(mode: Mode, runs: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync + Send,
{
    exec::map_range(mode, runs, |run| {
        let mut rng = rng_for(seed, run as u64);
        f(run, &mut rng)
    })
}

/// Parameters of a simulated ARIMA process.
#[derive(Debug, Clone, PartialEq)]
pub struct ArimaProcess {
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub d: usize,
    /// Mean of the `d`-times differenced process.
    pub drift: f64,
    pub sigma: f64,
}

impl ArimaProcess {
    /// `n` observations after discarding `burn_in` ARMA steps; integrated series start at 0.
    pub fn simulate<R: Rng + ?Sized>(&self, rng: &mut R, n: usize, burn_in: usize) -> Vec<f64> {
        let len = n.saturating_sub(self.d) + burn_in;
        let e: Vec<f64> = (0..len)
            .map(|_| self.sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut x = vec![0.0; len];
        for t in 0..len {
            let mut v = e[t];
            for (i, phi) in self.ar.iter().enumerate() {
                if t > i {
                    v += phi * x[t - 1 - i];
                }
            }
            for (j, theta) in self.ma.iter().enumerate() {
                if t > j {
                    v += theta * e[t - 1 - j];
                }
            }
            x[t] = v;
        }
        let mut series: Vec<f64> = x[burn_in..].iter().map(|v| v + self.drift).collect();
        for _ in 0..self.d {
            let mut acc = 0.0;
            let mut integrated = Vec::with_capacity(series.len() + 1);
            integrated.push(0.0);
            for v in &series {
                acc += v;
                integrated.push(acc);
            }
            series = integrated;
        }
        series
    }
}
