//! Logistic regression trained by plain stochastic gradient descent on the
//! L2-regularized log-loss
//! `l(w, b; x, y) = -[y ln p + (1 - y) ln(1 - p)] + (l2 / 2) |w|^2`,
//! `p = sigmoid(w.x + b)`. The bias is not regularized.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::features::{FeatureVector, FEATURE_DIM};
use crate::seed;

use super::check_both_classes;

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn linear(w: &[f64], b: f64, x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b
}

/// Per-example regularized log-loss.
pub fn log_loss(w: &[f64], b: f64, x: &[f64], y: bool, l2: f64) -> f64 {
    let z = linear(w, b, x);
    let target = if y { 1.0 } else { 0.0 };
    softplus(z) - target * z + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
}

/// Analytic gradient of [`log_loss`] with respect to `(w, b)`.
pub fn log_loss_gradient(w: &[f64], b: f64, x: &[f64], y: bool, l2: f64) -> (Vec<f64>, f64) {
    let residual = sigmoid(linear(w, b, x)) - if y { 1.0 } else { 0.0 };
    let gw = w.iter().zip(x).map(|(wi, xi)| residual * xi + l2 * wi).collect();
    (gw, residual)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    pub weights: [f64; FEATURE_DIM],
    pub bias: f64,
}

impl LogRegModel {
    pub fn probability(&self, x: &FeatureVector) -> f64 {
        sigmoid(linear(&self.weights, self.bias, &x.0))
    }

    /// Mean regularized log-loss over a dataset.
    pub fn mean_loss(&self, features: &[FeatureVector], labels: &[bool], l2: f64) -> f64 {
        features
            .iter()
            .zip(labels)
            .map(|(x, &y)| log_loss(&self.weights, self.bias, &x.0, y, l2))
            .sum::<f64>()
            / features.len() as f64
    }
}

/// One epoch: seeded shuffle, then one update per example.
fn run_epoch<R: rand::Rng>(
    model: &mut LogRegModel,
    order: &mut [usize],
    rng: &mut R,
    features: &[FeatureVector],
    labels: &[bool],
    learning_rate: f64,
    l2: f64,
) {
    order.shuffle(rng);
    for &i in order.iter() {
        let (gw, gb) = log_loss_gradient(&model.weights, model.bias, &features[i].0, labels[i], l2);
        for (w, g) in model.weights.iter_mut().zip(gw) {
            *w -= learning_rate * g;
        }
        model.bias -= learning_rate * gb;
    }
}

pub fn sgd_logreg_train(
    features: &[FeatureVector],
    labels: &[bool],
    learning_rate: f64,
    epochs: usize,
    l2: f64,
    seed: u64,
) -> Result<LogRegModel> {
    sgd_logreg_trace(features, labels, learning_rate, epochs, l2, seed, |_| {})
}

/// Same as [`sgd_logreg_train`], calling `observe` after every epoch.
pub fn sgd_logreg_trace(
    features: &[FeatureVector],
    labels: &[bool],
    learning_rate: f64,
    epochs: usize,
    l2: f64,
    seed: u64,
    mut observe: impl FnMut(&LogRegModel),
) -> Result<LogRegModel> {
    assert_eq!(features.len(), labels.len());
    check_both_classes(labels.iter().copied())?;
    if !(learning_rate > 0.0) || !(l2 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "learning_rate {learning_rate} must be > 0 and l2 {l2} >= 0"
        )));
    }
    let mut model = LogRegModel {
        weights: [0.0; FEATURE_DIM],
        bias: 0.0,
    };
    let mut rng = seed::rng(seed);
    let mut order: Vec<usize> = (0..features.len()).collect();
    for _ in 0..epochs {
        run_epoch(&mut model, &mut order, &mut rng, features, labels, learning_rate, l2);
        observe(&model);
    }
    Ok(model)
}
