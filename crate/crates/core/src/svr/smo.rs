//! Sequential minimal optimization for epsilon-SVR.
//!
//! The dual is solved over 2n variables `beta = (alpha, alpha*)` with
//! signs `s = (+1.., -1..)`:
//!
//! ```text
//! min  1/2 beta' Q beta + p' beta   s.t.  s' beta = 0,  0 <= beta <= C
//! Q_ij = s_i s_j K(x_i mod n, x_j mod n)
//! p_i  = eps - y_i  (i < n),   eps + y_{i-n}  (i >= n)
//! ```
//!
//! Each iteration updates the maximal violating pair analytically and keeps
//! the gradient `G = Q beta + p` current.

use crate::error::{Error, Result};

use super::kernel::KernelCache;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainParams {
    pub c: f64,
    pub gamma: f64,
    pub epsilon: f64,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    pub max_iterations: usize,
    /// Memory budget for cached kernel rows.
    pub cache_bytes: usize,
    /// Assert that the dual objective never decreases (O(n) per iteration).
    pub check_objective: bool,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            c: 1.0,
            gamma: 1e-3,
            epsilon: 0.1,
            tol: 1e-3,
            max_iterations: 1_000_000,
            cache_bytes: 256 << 20,
            check_objective: false,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.c.is_finite() && self.c > 0.0) {
            return bad(format!("C must be positive, got {}", self.c));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return bad(format!("epsilon must be nonnegative, got {}", self.epsilon));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        Ok(())
    }
}

pub(crate) struct Solution {
    /// `alpha_i - alpha*_i` per training sample.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    /// Dual objective in maximization form.
    pub objective: f64,
}

pub(crate) fn solve(x: &[Vec<f64>], y: &[f64], params: &TrainParams) -> Result<Solution> {
    let n = x.len();
    let l = 2 * n;
    let c = params.c;
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
    let p: Vec<f64> = (0..l)
        .map(|t| {
            if t < n {
                params.epsilon - y[t]
            } else {
                params.epsilon + y[t - n]
            }
        })
        .collect();
    let mut beta = vec![0.0; l];
    let mut grad = p.clone();
    let mut cache = KernelCache::new(x, params.gamma, params.cache_bytes);
    let mut last_objective = 0.0_f64;

    let mut iterations = 0;
    loop {
        // Maximal violating pair.
        let (mut i, mut gmax) = (usize::MAX, f64::NEG_INFINITY);
        let (mut j, mut gmin) = (usize::MAX, f64::INFINITY);
        for t in 0..l {
            let s = sign(t);
            let v = -s * grad[t];
            let up = if s > 0.0 { beta[t] < c } else { beta[t] > 0.0 };
            let low = if s > 0.0 { beta[t] > 0.0 } else { beta[t] < c };
            if up && v > gmax {
                gmax = v;
                i = t;
            }
            if low && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < params.tol {
            break;
        }
        if iterations >= params.max_iterations {
            return Err(Error::NonConvergence(params.max_iterations));
        }
        iterations += 1;

        let ki = cache.row(i % n);
        let kj = cache.row(j % n);
        let (si, sj) = (sign(i), sign(j));
        let q_ij = si * sj * ki[j % n];
        let (q_ii, q_jj) = (ki[i % n], kj[j % n]);
        let (old_i, old_j) = (beta[i], beta[j]);

        if si != sj {
            let quad = (q_ii + q_jj + 2.0 * q_ij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = beta[i] - beta[j];
            beta[i] += delta;
            beta[j] += delta;
            if diff > 0.0 {
                if beta[j] < 0.0 {
                    beta[j] = 0.0;
                    beta[i] = diff;
                }
            } else if beta[i] < 0.0 {
                beta[i] = 0.0;
                beta[j] = -diff;
            }
            if diff > 0.0 {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = c - diff;
                }
            } else if beta[j] > c {
                beta[j] = c;
                beta[i] = c + diff;
            }
        } else {
            let quad = (q_ii + q_jj - 2.0 * q_ij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = beta[i] + beta[j];
            beta[i] -= delta;
            beta[j] += delta;
            if sum > c {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = sum - c;
                }
                if beta[j] > c {
                    beta[j] = c;
                    beta[i] = sum - c;
                }
            } else {
                if beta[j] < 0.0 {
                    beta[j] = 0.0;
                    beta[i] = sum;
                }
                if beta[i] < 0.0 {
                    beta[i] = 0.0;
                    beta[j] = sum;
                }
            }
        }

        let (di, dj) = (beta[i] - old_i, beta[j] - old_j);
        for t in 0..l {
            let st = sign(t);
            grad[t] += st * (si * ki[t % n] * di + sj * kj[t % n] * dj);
        }

        if params.check_objective {
            let obj = dual_objective(&beta, &grad, &p);
            assert!(
                obj >= last_objective - 1e-9 * (1.0 + last_objective.abs()),
                "dual objective decreased from {last_objective} to {obj} at iteration {iterations}"
            );
            last_objective = obj;
        }
    }

    let coefficients = (0..n).map(|t| beta[t] - beta[t + n]).collect();
    let rho = compute_rho(&beta, &grad, c, n);
    Ok(Solution {
        coefficients,
        bias: -rho,
        iterations,
        objective: dual_objective(&beta, &grad, &p),
    })
}

/// `-(1/2 beta' Q beta + p' beta)`, evaluated from the gradient.
fn dual_objective(beta: &[f64], grad: &[f64], p: &[f64]) -> f64 {
    let primal: f64 = beta.iter().zip(grad).zip(p).map(|((b, g), p)| b * (g + p)).sum();
    -0.5 * primal
}

/// Offset from free variables, or the midpoint of the feasible interval
/// when every variable is at a bound.
fn compute_rho(beta: &[f64], grad: &[f64], c: f64, n: usize) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free) = (0.0, 0usize);
    for t in 0..beta.len() {
        let s = if t < n { 1.0 } else { -1.0 };
        let yg = s * grad[t];
        if beta[t] >= c {
            if s < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if beta[t] <= 0.0 {
            if s > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}
