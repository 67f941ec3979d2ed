//! Harris3D: corner response from the spread of surface normals.

use super::{non_max_suppression, DetectError, HarrisParams, Keypoint};
use crate::cloud::{CloudResolution, KdTree, NormalField, PointCloud};
use crate::exec;
use crate::linalg::det3;
use nalgebra::Matrix3;

/// Response per point: accumulate Gaussian-weighted outer products of the
/// unit normals found within `radius_mult * resolution`, then score
/// `det(C) - k * trace(C)^2`. Flat regions have rank-deficient C and never
/// score positive; only positive responses can become keypoints.
pub fn detect_harris3d(
    cloud: &PointCloud,
    tree: &KdTree,
    normals: &NormalField,
    params: &HarrisParams,
    res: CloudResolution,
) -> Result<Vec<Keypoint>, DetectError> {
    if cloud.is_empty() {
        return Err(DetectError::EmptyCloud);
    }
    if normals.len() != cloud.len() || normals.defined_count() == 0 {
        return Err(DetectError::NoNormals);
    }
    let radius = params.radius_mult * res.value();
    let sigma = radius / 2.0;
    let responses = exec::map_indexed(cloud.len(), |i| {
        let neighbors = tree
            .radius_search(cloud.point(i), radius)
            .expect("radius > 0");
        let mut c = Matrix3::zeros();
        for nb in &neighbors {
            let Some(pn) = normals.get(nb.index) else {
                continue;
            };
            let w = (-nb.distance * nb.distance / (2.0 * sigma * sigma)).exp();
            c += w * pn.direction * pn.direction.transpose();
        }
        det3(&c) - params.k * c.trace() * c.trace()
    });

    let max_response = responses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max_response > 0.0) {
        return Ok(Vec::new());
    }
    let threshold = params.threshold_rel * max_response;
    let candidates: Vec<Keypoint> = responses
        .iter()
        .enumerate()
        .filter(|(_, &r)| r >= threshold)
        .map(|(i, &r)| Keypoint {
            position: *cloud.point(i),
            scale: radius,
            saliency: r,
            source_index: i as i64,
        })
        .collect();
    non_max_suppression(&candidates, params.nms_radius_mult * res.value())
}
