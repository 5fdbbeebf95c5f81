//! Soft-margin SVM with an RBF kernel, trained by sequential minimal
//! optimization on the dual problem
//!
//! ```text
//! max  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
//! s.t. 0 <= a_i <= C,  sum_i a_i y_i = 0
//! ```
//!
//! Each step picks the maximal violating pair by a deterministic index
//! sweep (lowest index wins ties) and solves the two-variable subproblem
//! analytically.

use crate::error::{Error, Result};
use crate::features::{FeatureVector, FEATURE_DIM};

use super::check_both_classes;

/// Curvature floor for pairs whose kernel rows coincide.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaRule {
    /// `1 / (d * var)` with the population variance of every training
    /// feature entry pooled together.
    Scale,
    Fixed(f64),
}

impl GammaRule {
    pub fn resolve(self, features: &[FeatureVector]) -> f64 {
        match self {
            GammaRule::Fixed(g) => g,
            GammaRule::Scale => {
                let values: Vec<f64> = features.iter().flat_map(|f| f.0).collect();
                if values.is_empty() {
                    return 1.0;
                }
                let n = values.len() as f64;
                let mean = values.iter().sum::<f64>() / n;
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    1.0 / (FEATURE_DIM as f64 * var)
                } else {
                    1.0
                }
            }
        }
    }
}

pub fn rbf_kernel(x: &FeatureVector, y: &FeatureVector, gamma: f64) -> f64 {
    (-gamma * x.squared_distance(y)).exp()
}

/// Raw result of the dual solver.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Solves the dual for a precomputed kernel matrix and labels in {-1, +1}.
/// Stops once the maximal KKT violation `m(a) - M(a)` drops below `tol`,
/// or after `max_passes * n` pair updates with `converged = false`.
pub fn smo_solve(kernel: &[Vec<f64>], y: &[f64], c: f64, tol: f64, max_passes: usize) -> DualSolution {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[i][j];
    let mut alpha = vec![0.0; n];
    // gradient of the minimization form 1/2 a'Qa - e'a
    let mut grad = vec![-1.0; n];
    let budget = max_passes.saturating_mul(n);
    let mut iterations = 0;
    let mut converged = false;

    loop {
        let (mut i, mut g_max) = (None, f64::NEG_INFINITY);
        let (mut j, mut g_min) = (None, f64::INFINITY);
        for t in 0..n {
            let v = -y[t] * grad[t];
            let up = (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0);
            let low = (y[t] < 0.0 && alpha[t] < c) || (y[t] > 0.0 && alpha[t] > 0.0);
            if up && v > g_max {
                g_max = v;
                i = Some(t);
            }
            if low && v < g_min {
                g_min = v;
                j = Some(t);
            }
        }
        let (Some(i), Some(j)) = (i, j) else {
            converged = true;
            break;
        };
        if g_max - g_min < tol {
            converged = true;
            break;
        }
        if iterations >= budget {
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (q(i, i) + q(j, j) + 2.0 * q(i, j)).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (q(i, i) + q(j, j) - 2.0 * q(i, j)).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        if di == 0.0 && dj == 0.0 {
            // no representable progress on the worst pair
            break;
        }
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
    }

    DualSolution {
        bias: bias(&alpha, &grad, y, c),
        alpha,
        converged,
        iterations,
    }
}

/// Average over free multipliers; midpoint of the feasible interval when
/// every multiplier sits at a bound.
fn bias(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum, mut free) = (0.0, 0usize);
    for t in 0..y.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else {
            sum += yg;
            free += 1;
        }
    }
    let rho = if free > 0 { sum / free as f64 } else { (ub + lb) / 2.0 };
    -rho
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub support_vectors: Vec<FeatureVector>,
    /// `alpha_i * y_i` for each support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
    pub converged: bool,
}

impl SvmModel {
    /// Signed distance proxy `sum_i alpha_i y_i K(x_i, x) + b`.
    pub fn decision_value(&self, x: &FeatureVector) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coef)
            .map(|(sv, coef)| coef * rbf_kernel(sv, x, self.gamma))
            .sum::<f64>()
            + self.bias
    }

    /// Dual objective `sum a - 1/2 a'Qa` evaluated on the support set.
    pub fn dual_objective(&self) -> f64 {
        let linear: f64 = self.dual_coef.iter().map(|c| c.abs()).sum();
        let mut quad = 0.0;
        for (a, xa) in self.dual_coef.iter().zip(&self.support_vectors) {
            for (b, xb) in self.dual_coef.iter().zip(&self.support_vectors) {
                quad += a * b * rbf_kernel(xa, xb, self.gamma);
            }
        }
        linear - 0.5 * quad
    }
}

pub fn smo_train(
    features: &[FeatureVector],
    labels: &[bool],
    c: f64,
    gamma: f64,
    tol: f64,
    max_passes: usize,
) -> Result<SvmModel> {
    assert_eq!(features.len(), labels.len());
    check_both_classes(labels.iter().copied())?;
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be > 0, got {gamma}")));
    }
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let kernel: Vec<Vec<f64>> = features
        .iter()
        .map(|a| features.iter().map(|b| rbf_kernel(a, b, gamma)).collect())
        .collect();
    let sol = smo_solve(&kernel, &y, c, tol, max_passes);

    let (support_vectors, dual_coef) = sol
        .alpha
        .iter()
        .zip(&y)
        .zip(features)
        .filter(|((a, _), _)| **a > 0.0)
        .map(|((a, yi), x)| (*x, a * yi))
        .unzip();
    Ok(SvmModel {
        support_vectors,
        dual_coef,
        bias: sol.bias,
        gamma,
        c,
        converged: sol.converged,
    })
}
