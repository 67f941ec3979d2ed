//! One-vs-all linear SVM trained with seeded, epoch-shuffled subgradient
//! descent on the L2-regularized hinge loss.

use crate::exec;
use crate::matrix::FeatureMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("training set contains a single class")]
    SingleClass,
    #[error("feature dimension {got} does not match model dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("prediction and truth lengths differ: {predictions} vs {truth}")]
    LengthMismatch { predictions: usize, truth: usize },
    #[error("empty input")]
    Empty,
    #[error("feature matrix contains a non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Inverse regularization strength (larger = softer margin penalty).
    pub c_reg: f64,
    pub epochs: usize,
    /// Relative objective-improvement stopping tolerance.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            c_reg: 1.0,
            epochs: 200,
            tolerance: 1e-5,
            seed: 42,
        }
    }
}

/// Trained one-vs-all model: one (w, b) per class over standardized
/// features. Classes are kept sorted; argmax ties resolve to the earliest
/// entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub classes: Vec<String>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub feature_means: Vec<f64>,
    /// Per-dimension training stdev; zero-variance dimensions carry 1.
    pub feature_stdevs: Vec<f64>,
}

impl LinearSvmModel {
    pub fn dim(&self) -> usize {
        self.feature_means.len()
    }

    fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.feature_means.iter().zip(&self.feature_stdevs))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    /// Per-class decision values for a standardized input.
    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>, SvmError> {
        if x.len() != self.dim() {
            return Err(SvmError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let z = self.standardize(x);
        Ok(self
            .weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| dot(w, &z) + b)
            .collect())
    }
}

pub fn train_svm_ova(
    features: &FeatureMatrix,
    labels: &[String],
    cfg: &TrainConfig,
) -> Result<LinearSvmModel, SvmError> {
    let n = features.rows();
    if n == 0 || labels.is_empty() {
        return Err(SvmError::Empty);
    }
    if labels.len() != n {
        return Err(SvmError::LengthMismatch {
            predictions: n,
            truth: labels.len(),
        });
    }
    if features.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(SvmError::NonFinite);
    }
    let mut classes: Vec<String> = labels.to_vec();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(SvmError::SingleClass);
    }
    let d = features.dim();

    // Standardization statistics from the training set only.
    let mut means = vec![0.0f64; d];
    for row in features.iter_rows() {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let mut stdevs = vec![0.0f64; d];
    for row in features.iter_rows() {
        for (s, (v, m)) in stdevs.iter_mut().zip(row.iter().zip(&means)) {
            let diff = v - m;
            *s += diff * diff;
        }
    }
    for s in &mut stdevs {
        *s = (*s / n as f64).sqrt();
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    let standardized: Vec<Vec<f64>> = features
        .iter_rows()
        .map(|row| {
            row.iter()
                .zip(means.iter().zip(&stdevs))
                .map(|(v, (m, s))| (v - m) / s)
                .collect()
        })
        .collect();

    // Independent binary problems; each derives its own seed.
    let trained: Vec<(Vec<f64>, f64)> = exec::map_indexed(classes.len(), |class_idx| {
        let targets: Vec<f64> = labels
            .iter()
            .map(|l| if *l == classes[class_idx] { 1.0 } else { -1.0 })
            .collect();
        train_binary(
            &standardized,
            &targets,
            cfg,
            cfg.seed.wrapping_add(class_idx as u64),
        )
    });

    let (weights, biases) = trained.into_iter().unzip();
    Ok(LinearSvmModel {
        classes,
        weights,
        biases,
        feature_means: means,
        feature_stdevs: stdevs,
    })
}

/// Pegasos-style primal subgradient descent. The objective tracked for the
/// stopping rule is `lambda/2 |w|^2 + mean hinge`, lambda = 1/(c_reg * N).
fn train_binary(
    rows: &[Vec<f64>],
    targets: &[f64],
    cfg: &TrainConfig,
    seed: u64,
) -> (Vec<f64>, f64) {
    let n = rows.len();
    let d = rows[0].len();
    let lambda = 1.0 / (cfg.c_reg * n as f64);
    let mut w = vec![0.0f64; d];
    let mut b = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut step = 0usize;
    let mut previous = objective(rows, targets, &w, b, lambda);
    for _ in 0..cfg.epochs.max(1) {
        order.shuffle(&mut rng);
        for &i in &order {
            step += 1;
            let eta = 1.0 / (lambda * step as f64);
            let margin = targets[i] * (dot(&w, &rows[i]) + b);
            let shrink = 1.0 - eta * lambda;
            for wj in w.iter_mut() {
                *wj *= shrink;
            }
            if margin < 1.0 {
                let scale = eta * targets[i];
                for (wj, xj) in w.iter_mut().zip(&rows[i]) {
                    *wj += scale * xj;
                }
                b += eta * targets[i];
            }
        }
        let current = objective(rows, targets, &w, b, lambda);
        let scale = previous.abs().max(1.0);
        if ((previous - current) / scale).abs() < cfg.tolerance {
            break;
        }
        previous = current;
    }
    (w, b)
}

fn objective(rows: &[Vec<f64>], targets: &[f64], w: &[f64], b: f64, lambda: f64) -> f64 {
    let hinge: f64 = rows
        .iter()
        .zip(targets)
        .map(|(x, y)| (1.0 - y * (dot(w, x) + b)).max(0.0))
        .sum();
    0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>() + hinge / rows.len() as f64
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Argmax over per-class decision values; ties go to the class listed
/// first.
pub fn predict<'m>(model: &'m LinearSvmModel, x: &[f64]) -> Result<&'m str, SvmError> {
    let scores = model.decision_values(x)?;
    let mut best = 0usize;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    Ok(&model.classes[best])
}

/// Percentage of matching labels, rounded half-up to two decimals.
pub fn accuracy(predictions: &[String], truth: &[String]) -> Result<f64, SvmError> {
    if predictions.len() != truth.len() {
        return Err(SvmError::LengthMismatch {
            predictions: predictions.len(),
            truth: truth.len(),
        });
    }
    if predictions.is_empty() {
        return Err(SvmError::Empty);
    }
    let matches = predictions
        .iter()
        .zip(truth)
        .filter(|(p, t)| p == t)
        .count();
    let percent = 100.0 * matches as f64 / predictions.len() as f64;
    Ok((percent * 100.0).round() / 100.0)
}
