//! Diagonal-covariance Gaussian mixture fit by EM, initialized from
//! k-means. Responsibilities are computed in log space.

use super::kmeans::{fit_kmeans, nearest_center};
use super::EncodeError;
use crate::matrix::FeatureMatrix;
use serde::{Deserialize, Serialize};

const MAX_ITERATIONS: usize = 200;
const RELATIVE_TOLERANCE: f64 = 1e-7;
pub(crate) const VARIANCE_FLOOR: f64 = 1e-6;
const WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmmCodebook {
    pub k: usize,
    pub dim: usize,
    /// Mixture weights, on the simplex with a 1e-12 floor.
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Per-component diagonal variances, floored at 1e-6.
    pub variances: Vec<Vec<f64>>,
}

/// Fit result: the codebook plus the mean log-likelihood after every EM
/// iteration (monotonically non-decreasing up to rounding).
#[derive(Debug, Clone)]
pub struct GmmFit {
    pub codebook: GmmCodebook,
    pub log_likelihood: Vec<f64>,
}

pub fn fit_gmm(descriptors: &FeatureMatrix, k: usize, seed: u64) -> Result<GmmFit, EncodeError> {
    let n = descriptors.rows();
    if k == 0 || n < k {
        return Err(EncodeError::TooFewSamples {
            needed: k.max(1),
            got: n,
        });
    }
    let dim = descriptors.dim();

    // k-means initialization: means from centers, variances and weights
    // from the hard clusters.
    let km = fit_kmeans(descriptors, k, seed)?;
    let mut means = km.codebook.centers;
    let mut variances = vec![vec![0.0f64; dim]; k];
    let mut counts = vec![0usize; k];
    let mut hard = vec![0usize; n];
    for i in 0..n {
        let (c, _) = nearest_center(descriptors.row(i), &means);
        hard[i] = c;
        counts[c] += 1;
    }
    for i in 0..n {
        let c = hard[i];
        for (v, (x, m)) in variances[c]
            .iter_mut()
            .zip(descriptors.row(i).iter().zip(&means[c]))
        {
            let d = x - m;
            *v += d * d;
        }
    }
    let mut weights = vec![0.0f64; k];
    for c in 0..k {
        let count = counts[c].max(1) as f64;
        for v in &mut variances[c] {
            *v = (*v / count).max(VARIANCE_FLOOR);
        }
        weights[c] = (counts[c] as f64 / n as f64).max(WEIGHT_FLOOR);
    }
    normalize_simplex(&mut weights);

    let mut log_likelihood = Vec::new();
    let mut responsibilities = vec![0.0f64; n * k];
    for _ in 0..MAX_ITERATIONS {
        // E-step.
        let mut total_ll = 0.0;
        for i in 0..n {
            let row = descriptors.row(i);
            let log_joint: Vec<f64> = (0..k)
                .map(|c| weights[c].ln() + log_gaussian_diag(row, &means[c], &variances[c]))
                .collect();
            let lse = log_sum_exp(&log_joint);
            total_ll += lse;
            for c in 0..k {
                responsibilities[i * k + c] = (log_joint[c] - lse).exp();
            }
        }
        let mean_ll = total_ll / n as f64;
        let converged = log_likelihood
            .last()
            .map(|&prev: &f64| {
                let scale = prev.abs().max(1.0);
                (mean_ll - prev).abs() / scale < RELATIVE_TOLERANCE
            })
            .unwrap_or(false);
        log_likelihood.push(mean_ll);
        if converged {
            break;
        }

        // M-step.
        for c in 0..k {
            let nk: f64 = (0..n).map(|i| responsibilities[i * k + c]).sum();
            let safe_nk = nk.max(f64::MIN_POSITIVE);
            let mut mean = vec![0.0f64; dim];
            for i in 0..n {
                let g = responsibilities[i * k + c];
                for (m, x) in mean.iter_mut().zip(descriptors.row(i)) {
                    *m += g * x;
                }
            }
            for m in &mut mean {
                *m /= safe_nk;
            }
            let mut var = vec![0.0f64; dim];
            for i in 0..n {
                let g = responsibilities[i * k + c];
                for (v, (x, m)) in var.iter_mut().zip(descriptors.row(i).iter().zip(&mean)) {
                    let d = x - m;
                    *v += g * d * d;
                }
            }
            for v in &mut var {
                *v = (*v / safe_nk).max(VARIANCE_FLOOR);
            }
            means[c] = mean;
            variances[c] = var;
            weights[c] = (nk / n as f64).max(WEIGHT_FLOOR);
        }
        normalize_simplex(&mut weights);
    }

    Ok(GmmFit {
        codebook: GmmCodebook {
            k,
            dim,
            weights,
            means,
            variances,
        },
        log_likelihood,
    })
}

pub(crate) fn log_gaussian_diag(x: &[f64], mean: &[f64], var: &[f64]) -> f64 {
    let mut log_det = 0.0;
    let mut maha = 0.0;
    for ((xv, m), v) in x.iter().zip(mean).zip(var) {
        log_det += v.ln();
        let d = xv - m;
        maha += d * d / v;
    }
    -0.5 * (x.len() as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + maha)
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

fn normalize_simplex(weights: &mut [f64]) {
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn single_component_matches_sample_moments() {
        let mut m = FeatureMatrix::new(2);
        m.push_row(&[1.0, 4.0]);
        m.push_row(&[3.0, 0.0]);
        m.push_row(&[5.0, 2.0]);
        m.push_row(&[7.0, 6.0]);
        let fit = fit_gmm(&m, 1, 0).unwrap();
        let cb = &fit.codebook;
        assert!((cb.weights[0] - 1.0).abs() < 1e-6);
        assert!((cb.means[0][0] - 4.0).abs() < 1e-6);
        assert!((cb.means[0][1] - 3.0).abs() < 1e-6);
        // Biased (divide by N) per-dimension variances.
        assert!((cb.variances[0][0] - 5.0).abs() < 1e-6);
        assert!((cb.variances[0][1] - 5.0).abs() < 1e-6);
    }

    #[test]
    fn recovers_two_well_separated_clusters() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut m = FeatureMatrix::new(2);
        for i in 0..2000 {
            let center = if i % 2 == 0 { 0.0 } else { 10.0 };
            let x: f64 = rng.sample::<f64, _>(StandardNormal) + center;
            let y: f64 = rng.sample::<f64, _>(StandardNormal) + center;
            m.push_row(&[x, y]);
        }
        let fit = fit_gmm(&m, 2, 7).unwrap();
        let mut means = fit.codebook.means.clone();
        means.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
        assert!((means[0][0]).abs() < 0.2 && (means[0][1]).abs() < 0.2);
        assert!((means[1][0] - 10.0).abs() < 0.2 && (means[1][1] - 10.0).abs() < 0.2);
    }

    #[test]
    fn log_likelihood_never_decreases() {
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        let mut m = FeatureMatrix::new(3);
        for _ in 0..400 {
            let row: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            m.push_row(&row);
        }
        let fit = fit_gmm(&m, 4, 1).unwrap();
        assert!(fit.log_likelihood.len() >= 2);
        for w in fit.log_likelihood.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "log-likelihood fell: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn too_few_samples_rejected() {
        let mut m = FeatureMatrix::new(1);
        m.push_row(&[0.0]);
        assert!(matches!(
            fit_gmm(&m, 2, 0),
            Err(EncodeError::TooFewSamples { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut m = FeatureMatrix::new(2);
        for _ in 0..120 {
            m.push_row(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        }
        let a = fit_gmm(&m, 3, 99).unwrap();
        let b = fit_gmm(&m, 3, 99).unwrap();
        assert_eq!(a.codebook.means, b.codebook.means);
        assert_eq!(a.codebook.variances, b.codebook.variances);
        assert_eq!(a.codebook.weights, b.codebook.weights);
    }
}
