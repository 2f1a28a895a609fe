//! Small unconstrained minimizers with finite-difference derivatives.

/// Stopping rules shared by the minimizers.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    /// Stop when the objective improves by less than this between iterations.
    pub objective: f64,
    pub max_iterations: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { objective: 1e-8, max_iterations: 500 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn step_size(x: f64) -> f64 {
    1e-5 * x.abs().max(1.0)
}

/// Central-difference gradient.
pub fn gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = step_size(x[i]);
            xp[i] = x[i] + h;
            let up = f(&xp);
            xp[i] = x[i] - h;
            let down = f(&xp);
            xp[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Hessian, row-major `k × k`.
pub fn hessian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> Vec<f64> {
    let k = x.len();
    let f0 = f(x);
    let mut h = vec![0.0; k * k];
    let mut xp = x.to_vec();
    let steps: Vec<f64> = x.iter().map(|&v| 1e-4 * v.abs().max(1.0)).collect();
    for i in 0..k {
        let hi = steps[i];
        xp[i] = x[i] + hi;
        let up = f(&xp);
        xp[i] = x[i] - hi;
        let down = f(&xp);
        xp[i] = x[i];
        h[i * k + i] = (up - 2.0 * f0 + down) / (hi * hi);
        for j in 0..i {
            let hj = steps[j];
            let mut eval = |si: f64, sj: f64| {
                xp[i] = x[i] + si * hi;
                xp[j] = x[j] + sj * hj;
                let v = f(&xp);
                xp[i] = x[i];
                xp[j] = x[j];
                v
            };
            let v = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0)) / (4.0 * hi * hj);
            h[i * k + j] = v;
            h[j * k + i] = v;
        }
    }
    h
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Quasi-Newton BFGS with a backtracking Armijo line search and numerical gradients.
/// Non-finite objective values are treated as infeasible and backtracked from.
pub fn bfgs<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], tol: Tolerance) -> Minimum {
    let k = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if k == 0 {
        return Minimum { x, value: fx, iterations: 0, converged: true };
    }
    let mut g = gradient(&f, &x);
    let mut inv_h = identity(k);
    let mut stalls = 0;

    for iter in 1..=tol.max_iterations {
        let mut dir: Vec<f64> = (0..k).map(|i| -dot(&inv_h[i * k..(i + 1) * k], &g)).collect();
        let mut slope = dot(&dir, &g);
        if slope >= 0.0 {
            inv_h = identity(k);
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&dir, &g);
        }
        if slope.abs() < 1e-20 {
            return Minimum { x, value: fx, iterations: iter, converged: true };
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            let fxn = f(&xn);
            if fxn.is_finite() && fxn <= fx + 1e-4 * t * slope {
                accepted = Some((xn, fxn));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fxn)) = accepted else {
            // No descent along a fresh steepest-descent direction means we are at a
            // numerical minimum.
            let restarted = inv_h.iter().enumerate().all(|(i, &v)| v == if i % (k + 1) == 0 { 1.0 } else { 0.0 });
            if restarted {
                return Minimum { x, value: fx, iterations: iter, converged: true };
            }
            inv_h = identity(k);
            continue;
        };

        let gn = gradient(&f, &xn);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            let hy: Vec<f64> = (0..k).map(|i| dot(&inv_h[i * k..(i + 1) * k], &y)).collect();
            let yhy = dot(&y, &hy);
            for i in 0..k {
                for j in 0..k {
                    inv_h[i * k + j] += (sy + yhy) * s[i] * s[j] / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        let improvement = fx - fxn;
        x = xn;
        fx = fxn;
        g = gn;
        if improvement < tol.objective {
            stalls += 1;
            if stalls >= 2 {
                return Minimum { x, value: fx, iterations: iter, converged: true };
            }
        } else {
            stalls = 0;
        }
    }
    Minimum { x, value: fx, iterations: tol.max_iterations, converged: false }
}

fn identity(k: usize) -> Vec<f64> {
    let mut m = vec![0.0; k * k];
    for i in 0..k {
        m[i * k + i] = 1.0;
    }
    m
}

/// Nelder-Mead simplex search; used when gradient-based search fails.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], tol: Tolerance) -> Minimum {
    let k = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() { v } else { f64::INFINITY }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(k + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..k {
        let mut x = x0.to_vec();
        x[i] += if x[i] == 0.0 { 0.1 } else { 0.1 * x[i].abs().max(0.5) };
        let v = eval(&x);
        simplex.push((x, v));
    }
    for iter in 1..=tol.max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[k].1 - simplex[0].1;
        if spread.is_finite() && spread.abs() < tol.objective {
            let (x, value) = simplex.swap_remove(0);
            return Minimum { x, value, iterations: iter, converged: true };
        }
        let centroid: Vec<f64> = (0..k)
            .map(|j| simplex[..k].iter().map(|p| p.0[j]).sum::<f64>() / k as f64)
            .collect();
        let along = |coef: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[k].0).map(|(c, w)| c + coef * (w - c)).collect()
        };
        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = eval(&xe);
            simplex[k] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[k - 1].1 {
            simplex[k] = (xr, fr);
        } else {
            let xc = if fr < simplex[k].1 { along(-0.5) } else { along(0.5) };
            let fc = eval(&xc);
            if fc < simplex[k].1.min(fr) {
                simplex[k] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    p.0 = best.iter().zip(&p.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
                    p.1 = eval(&p.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, iterations: tol.max_iterations, converged: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn bfgs_rosenbrock() {
        let m = bfgs(rosenbrock, &[-1.2, 1.0], Tolerance { objective: 1e-14, max_iterations: 2000 });
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-3 && (m.x[1] - 1.0).abs() < 1e-3, "{:?}", m.x);
    }

    #[test]
    fn nelder_mead_quadratic() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.0).powi(2);
        let m = nelder_mead(f, &[0.0, 0.0], Tolerance { objective: 1e-12, max_iterations: 2000 });
        assert!((m.x[0] - 3.0).abs() < 1e-3 && (m.x[1] + 1.0).abs() < 1e-3);
    }

    #[test]
    fn derivatives_of_quadratic() {
        let f = |x: &[f64]| 3.0 * x[0] * x[0] + x[0] * x[1] + 2.0 * x[1] * x[1];
        let g = gradient(&f, &[1.0, -2.0]);
        assert!((g[0] - 4.0).abs() < 1e-6 && (g[1] + 7.0).abs() < 1e-6);
        let h = hessian(&f, &[1.0, -2.0]);
        let expected = [6.0, 1.0, 1.0, 4.0];
        for (a, b) in h.iter().zip(expected) {
            assert!((a - b).abs() < 1e-5);
        }
    }
}
