//! Damped Gauss–Newton (Levenberg–Marquardt) least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Converged once the largest scaled parameter step falls below this.
    pub step_tol: f64,
    /// Central-difference step, relative to each parameter's scale.
    pub diff_step: f64,
    pub initial_damping: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 200, step_tol: 1e-10, diff_step: 1e-6, initial_damping: 1e-3 }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// Residual sum of squares at the optimum.
    pub rss: f64,
    pub residual_count: usize,
    pub iterations: usize,
    /// s²(JᵀJ)⁻¹ with s² = RSS/(m − n); `None` when JᵀJ is singular or m ≤ n.
    pub covariance: Option<DMatrix<f64>>,
}

impl LmOutcome {
    /// One-standard-deviation uncertainties; infinite where undetermined.
    pub fn sigmas(&self) -> Vec<f64> {
        match &self.covariance {
            Some(c) => (0..self.params.len()).map(|k| c[(k, k)].max(0.0).sqrt()).collect(),
            None => vec![f64::INFINITY; self.params.len()],
        }
    }

    /// Standard deviation of a linear combination gᵀp of the parameters.
    pub fn sigma_of(&self, gradient: &[f64]) -> f64 {
        match &self.covariance {
            Some(c) => {
                let g = DVector::from_column_slice(gradient);
                (g.transpose() * c * &g)[(0, 0)].max(0.0).sqrt()
            }
            None => f64::INFINITY,
        }
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn jacobian<F>(f: &F, x: &[f64], h: &[f64], m: usize) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = x.len();
    let mut j = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    for k in 0..n {
        xp[k] = x[k] + h[k];
        let up = f(&xp);
        xp[k] = x[k] - h[k];
        let dn = f(&xp);
        xp[k] = x[k];
        if up.len() != m || dn.len() != m {
            return Err(Error::NonConvergence("residual length changed between evaluations".into()));
        }
        for i in 0..m {
            j[(i, k)] = (up[i] - dn[i]) / (2.0 * h[k]);
        }
    }
    if j.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence("non-finite Jacobian".into()));
    }
    Ok(j)
}

/// Minimizes Σ r_i(x)² starting from `x0`.
///
/// `scale` gives the typical magnitude of each parameter; it sets the
/// finite-difference step and the yardstick for the step-size test, so it
/// matters when a parameter starts at or passes through zero.
pub fn minimize<F>(f: F, x0: &[f64], scale: &[f64], opts: &LmOptions) -> Result<LmOutcome>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    assert_eq!(scale.len(), n, "one scale per parameter");
    let mut x = x0.to_vec();
    let mut r = f(&x);
    let m = r.len();
    if m < n {
        return Err(Error::NonConvergence(format!("{m} residuals for {n} parameters")));
    }
    let mut rss = sum_sq(&r);
    if !rss.is_finite() {
        return Err(Error::NonConvergence("model is not finite at the starting point".into()));
    }
    let yard = |x: &[f64]| -> Vec<f64> { x.iter().zip(scale).map(|(v, s)| v.abs().max(s.abs())).collect() };
    let mut lambda = opts.initial_damping;
    let mut iterations = 0;
    let mut converged = rss == 0.0;

    while !converged {
        if iterations >= opts.max_iterations {
            return Err(Error::NonConvergence(format!(
                "no convergence after {} iterations (rss {rss:e})",
                opts.max_iterations
            )));
        }
        iterations += 1;
        let y = yard(&x);
        let h: Vec<f64> = y.iter().map(|v| opts.diff_step * v).collect();
        let j = jacobian(&f, &x, &h, m)?;
        let jt = j.transpose();
        let a = &jt * &j;
        let g = &jt * DVector::from_column_slice(&r);
        let diag: Vec<f64> = (0..n).map(|k| a[(k, k)].max(1e-300)).collect();

        // inner loop: raise the damping until the step reduces the cost
        loop {
            let mut damped = a.clone();
            for k in 0..n {
                damped[(k, k)] += lambda * diag[k];
            }
            let step = match damped.clone().cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => match damped.lu().solve(&(-&g)) {
                    Some(s) => s,
                    None => {
                        lambda *= 10.0;
                        if lambda > 1e30 {
                            return Err(Error::NonConvergence("normal equations are singular".into()));
                        }
                        continue;
                    }
                },
            };
            let rel = step.iter().zip(&y).map(|(s, v)| (s / v).abs()).fold(0.0, f64::max);
            if !rel.is_finite() {
                return Err(Error::NonConvergence("non-finite parameter step".into()));
            }
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rt = f(&trial);
            let rss_t = sum_sq(&rt);
            if rss_t.is_finite() && rss_t <= rss {
                x = trial;
                r = rt;
                rss = rss_t;
                lambda = (lambda / 10.0).max(1e-12);
                if rel < opts.step_tol || rss == 0.0 {
                    converged = true;
                }
                break;
            }
            if rel < opts.step_tol {
                // no further decrease possible at this resolution
                converged = true;
                break;
            }
            lambda *= 10.0;
            if lambda > 1e30 {
                converged = true;
                break;
            }
        }
    }

    let y = yard(&x);
    let h: Vec<f64> = y.iter().map(|v| opts.diff_step * v).collect();
    let j = jacobian(&f, &x, &h, m)?;
    let covariance = if m > n {
        let s2 = rss / (m - n) as f64;
        let gram = j.transpose() * &j;
        let sv = gram.clone().singular_values();
        let (lo, hi) = (sv.min(), sv.max());
        if hi > 0.0 && lo > 1e-14 * hi {
            gram.try_inverse().filter(|c| c.iter().all(|v| v.is_finite())).map(|c| c * s2)
        } else {
            None
        }
    } else {
        None
    };
    Ok(LmOutcome { params: x, rss, residual_count: m, iterations, covariance })
}
