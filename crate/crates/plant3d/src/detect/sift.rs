//! SIFT3D: difference-of-Gaussians extrema of a point-density scale space.
//!
//! The scale space is a kernel density estimate: Gaussian contributions at
//! each scale are normalized by the kernel volume (sigma^3) as well as the
//! cloud size, with the resolution cubed folded in to keep the response
//! dimensionless. Without the per-scale normalization a smooth blob has no
//! centered space-scale extremum at all; its response mass drifts to the
//! coarsest scale.
//!
//! Densities are evaluated exactly (brute force over all pairs), which
//! keeps the detector bit-reproducible and directly comparable with the
//! oracle used in tests. Intended for clouds up to a few tens of
//! thousands of points.

use super::{DetectError, Keypoint, SiftDetectorParams};
use crate::cloud::{CloudResolution, KdTree, PointCloud};
use crate::exec;
use nalgebra::Matrix3;

pub fn detect_sift3d(
    cloud: &PointCloud,
    tree: &KdTree,
    params: &SiftDetectorParams,
    res: CloudResolution,
) -> Result<Vec<Keypoint>, DetectError> {
    if cloud.is_empty() {
        return Err(DetectError::EmptyCloud);
    }
    let sigmas = scale_ladder(params, res)?;
    if cloud.len() < 10 {
        return Ok(Vec::new());
    }

    let n = cloud.len();
    let inv_n = 1.0 / n as f64;
    let inv_two_sigma2: Vec<f64> = sigmas.iter().map(|s| 1.0 / (2.0 * s * s)).collect();
    // Kernel-volume normalization per scale, made dimensionless with the
    // cloud resolution so min_contrast is scale-free.
    let kernel_norm: Vec<f64> = sigmas
        .iter()
        .map(|s| (res.value() / s).powi(3) * inv_n)
        .collect();

    // densities[i][j] = (res/sigma_j)^3 / N * sum_k exp(-|p_i - p_k|^2 / (2 sigma_j^2))
    let per_point: Vec<Vec<f64>> = exec::map_indexed(n, |i| {
        let pi = cloud.point(i);
        let mut acc = vec![0.0; sigmas.len()];
        for k in 0..n {
            let d2 = (pi - cloud.point(k)).norm_squared();
            for (j, inv) in inv_two_sigma2.iter().enumerate() {
                let e = -d2 * inv;
                if e > -700.0 {
                    acc[j] += e.exp();
                }
            }
        }
        for (a, norm) in acc.iter_mut().zip(&kernel_norm) {
            *a *= norm;
        }
        acc
    });
    let dog: Vec<Vec<f64>> = (0..sigmas.len() - 1)
        .map(|j| (0..n).map(|i| per_point[i][j + 1] - per_point[i][j]).collect())
        .collect();

    // Interior DoG levels only: each extremum needs both adjacent levels.
    let mut keypoints = Vec::new();
    for j in 1..dog.len().saturating_sub(1) {
        let sigma = sigmas[j];
        let level_keypoints = exec::map_indexed(n, |i| {
            let val = dog[j][i];
            if val.abs() < params.min_contrast {
                return None;
            }
            let neighbors = tree
                .radius_search(cloud.point(i), 2.0 * sigma)
                .expect("radius > 0");
            if neighbors.len() < 2 {
                // An isolated point has nothing to be an extremum against.
                return None;
            }
            let mut is_max = true;
            let mut is_min = true;
            for level in [j - 1, j + 1] {
                let other = dog[level][i];
                is_max &= val > other;
                is_min &= val < other;
                if !is_max && !is_min {
                    return None;
                }
            }
            for nb in &neighbors {
                if nb.index == i {
                    continue;
                }
                for level in [j - 1, j, j + 1] {
                    let other = dog[level][nb.index];
                    is_max &= val > other;
                    is_min &= val < other;
                }
                if !is_max && !is_min {
                    return None;
                }
            }
            if !passes_curvature_test(cloud, i, sigma, inv_n, params) {
                return None;
            }
            Some(Keypoint {
                position: *cloud.point(i),
                scale: sigma,
                saliency: val,
                source_index: i as i64,
            })
        });
        keypoints.extend(level_keypoints.into_iter().flatten());
    }
    Ok(keypoints)
}

/// Geometric sigma ladder `min_scale_mult * res * 2^(o + s/S)`.
fn scale_ladder(
    params: &SiftDetectorParams,
    res: CloudResolution,
) -> Result<Vec<f64>, DetectError> {
    if params.n_octaves < 1 || params.scales_per_octave < 2 {
        return Err(DetectError::BadScaleLadder {
            reason: format!(
                "need n_octaves >= 1 and scales_per_octave >= 2, got {} and {}",
                params.n_octaves, params.scales_per_octave
            ),
        });
    }
    let base = params.min_scale_mult * res.value();
    if !(base > 0.0) || !base.is_finite() {
        return Err(DetectError::BadScaleLadder {
            reason: format!("base sigma {base} is not positive"),
        });
    }
    let mut sigmas = Vec::with_capacity(params.n_octaves * params.scales_per_octave);
    for octave in 0..params.n_octaves {
        for step in 0..params.scales_per_octave {
            let exponent = octave as f64 + step as f64 / params.scales_per_octave as f64;
            sigmas.push(base * exponent.exp2());
        }
    }
    for pair in sigmas.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(DetectError::BadScaleLadder {
                reason: format!("sigma {} does not increase past {}", pair[1], pair[0]),
            });
        }
    }
    Ok(sigmas)
}

/// Ratio test on the spatial Hessian of the smoothed density at the
/// extremum's scale: strongly anisotropic curvature (sheet- or edge-like
/// structure) is rejected, blob-like structure kept.
///
/// The Hessian of the DoG itself is useless here: at an extremum's
/// characteristic scale the two DoG terms cancel to sampling noise, so
/// the density Hessian carries the curvature signal.
fn passes_curvature_test(
    cloud: &PointCloud,
    index: usize,
    sigma: f64,
    inv_n: f64,
    params: &SiftDetectorParams,
) -> bool {
    let p = cloud.point(index);
    let mut hessian = Matrix3::zeros();
    let s2 = sigma * sigma;
    for k in 0..cloud.len() {
        let d = p - cloud.point(k);
        let d2 = d.norm_squared();
        let e = -d2 / (2.0 * s2);
        if e <= -700.0 {
            continue;
        }
        let g = e.exp();
        hessian += g * (d * d.transpose() / (s2 * s2) - Matrix3::identity() / s2);
    }
    hessian *= inv_n;
    let raw = hessian.symmetric_eigen().eigenvalues;
    let mut mags = [raw[0].abs(), raw[1].abs(), raw[2].abs()];
    mags.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    let (amin, amax) = (mags[0], mags[2]);
    if amin <= 0.0 {
        return false;
    }
    amax / amin <= params.curvature_reject_ratio
}
