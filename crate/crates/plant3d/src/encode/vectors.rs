//! Fisher-vector and VLAD aggregation of descriptor sets.

use super::gmm::{log_gaussian_diag, log_sum_exp, GmmCodebook};
use super::kmeans::{nearest_center, KMeansCodebook};
use super::EncodeError;
use crate::matrix::FeatureMatrix;

/// 2kD Fisher vector: gradients of the GMM log-likelihood with respect to
/// the component means and variances, signed-square-rooted and globally
/// L2-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherVector {
    pub values: Vec<f64>,
}

/// kD VLAD: per-center residual sums, intra-normalized per block and then
/// globally L2-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct VladVector {
    pub values: Vec<f64>,
}

/// Raw Fisher-vector blocks before signed-sqrt and L2 normalization.
/// Layout: k mean-gradient blocks of D values, then k variance-gradient
/// blocks of D values.
pub fn encode_fv_raw(
    codebook: &GmmCodebook,
    descriptors: &FeatureMatrix,
) -> Result<Vec<f64>, EncodeError> {
    if descriptors.rows() == 0 {
        return Err(EncodeError::EmptySet);
    }
    if descriptors.dim() != codebook.dim {
        return Err(EncodeError::DimensionMismatch {
            expected: codebook.dim,
            got: descriptors.dim(),
        });
    }
    let (n, d, k) = (descriptors.rows(), codebook.dim, codebook.k);
    let sigmas: Vec<Vec<f64>> = codebook
        .variances
        .iter()
        .map(|var| var.iter().map(|v| v.sqrt()).collect())
        .collect();

    let mut mean_grad = vec![0.0f64; k * d];
    let mut var_grad = vec![0.0f64; k * d];
    for i in 0..n {
        let row = descriptors.row(i);
        let log_joint: Vec<f64> = (0..k)
            .map(|c| {
                codebook.weights[c].ln()
                    + log_gaussian_diag(row, &codebook.means[c], &codebook.variances[c])
            })
            .collect();
        let lse = log_sum_exp(&log_joint);
        for c in 0..k {
            let gamma = (log_joint[c] - lse).exp();
            if gamma == 0.0 {
                continue;
            }
            let mg = &mut mean_grad[c * d..(c + 1) * d];
            let vg = &mut var_grad[c * d..(c + 1) * d];
            for j in 0..d {
                let u = (row[j] - codebook.means[c][j]) / sigmas[c][j];
                mg[j] += gamma * u;
                vg[j] += gamma * (u * u - 1.0);
            }
        }
    }
    let nf = n as f64;
    let mut out = Vec::with_capacity(2 * k * d);
    for c in 0..k {
        let scale = 1.0 / (nf * codebook.weights[c].sqrt());
        out.extend(mean_grad[c * d..(c + 1) * d].iter().map(|v| v * scale));
    }
    for c in 0..k {
        let scale = 1.0 / (nf * (2.0 * codebook.weights[c]).sqrt());
        out.extend(var_grad[c * d..(c + 1) * d].iter().map(|v| v * scale));
    }
    Ok(out)
}

pub fn encode_fv(
    codebook: &GmmCodebook,
    descriptors: &FeatureMatrix,
) -> Result<FisherVector, EncodeError> {
    let mut values = encode_fv_raw(codebook, descriptors)?;
    for v in &mut values {
        *v = v.signum() * v.abs().sqrt();
    }
    l2_normalize(&mut values);
    Ok(FisherVector { values })
}

pub fn encode_vlad(
    codebook: &KMeansCodebook,
    descriptors: &FeatureMatrix,
) -> Result<VladVector, EncodeError> {
    if descriptors.rows() == 0 {
        return Err(EncodeError::EmptySet);
    }
    if descriptors.dim() != codebook.dim {
        return Err(EncodeError::DimensionMismatch {
            expected: codebook.dim,
            got: descriptors.dim(),
        });
    }
    let (d, k) = (codebook.dim, codebook.k);
    let mut values = vec![0.0f64; k * d];
    for row in descriptors.iter_rows() {
        let (c, _) = nearest_center(row, &codebook.centers);
        let block = &mut values[c * d..(c + 1) * d];
        for (b, (x, center)) in block.iter_mut().zip(row.iter().zip(&codebook.centers[c])) {
            *b += x - center;
        }
    }
    // Intra-normalization per block, then global L2.
    for c in 0..k {
        let block = &mut values[c * d..(c + 1) * d];
        let norm = block.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in block.iter_mut() {
                *v /= norm;
            }
        }
    }
    l2_normalize(&mut values);
    Ok(VladVector { values })
}

fn l2_normalize(values: &mut [f64]) {
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in values.iter_mut() {
            *v /= norm;
        }
    }
}
