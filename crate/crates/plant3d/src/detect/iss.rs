//! ISS: eigenvalue-ratio saliency of local neighborhood scatter.

use super::{non_max_suppression, DetectError, IssParams, Keypoint};
use crate::cloud::{CloudResolution, KdTree, PointCloud, Vec3};
use crate::exec;
use crate::linalg::eigen_sym3_sorted;
use nalgebra::Matrix3;

/// A point is a candidate when its neighborhood scatter eigenvalues
/// (lambda1 >= lambda2 >= lambda3) satisfy both
/// `lambda2/lambda1 < gamma_21` and `lambda3/lambda2 < gamma_32`;
/// saliency is lambda3. Candidates then pass greedy non-maximum
/// suppression over `nms_radius_mult * resolution`.
pub fn detect_iss(
    cloud: &PointCloud,
    tree: &KdTree,
    params: &IssParams,
    res: CloudResolution,
) -> Result<Vec<Keypoint>, DetectError> {
    if cloud.is_empty() {
        return Err(DetectError::EmptyCloud);
    }
    let radius = params.salient_radius_mult * res.value();
    let saliencies = exec::map_indexed(cloud.len(), |i| {
        let neighbors = tree
            .radius_search(cloud.point(i), radius)
            .expect("radius > 0");
        // The query point itself is always returned; require min_neighbors
        // others.
        if neighbors.len() < params.min_neighbors + 1 {
            return None;
        }
        let mut mean = Vec3::zeros();
        for nb in &neighbors {
            mean += cloud.point(nb.index).coords;
        }
        mean /= neighbors.len() as f64;
        let mut scatter = Matrix3::zeros();
        for nb in &neighbors {
            let d = cloud.point(nb.index).coords - mean;
            scatter += d * d.transpose();
        }
        scatter /= neighbors.len() as f64;
        let (vals, _) = eigen_sym3_sorted(&scatter);
        let [l1, l2, l3] = vals;
        // A vanishing third eigenvalue means the support is coplanar (or
        // worse) and carries no saliency; this also keeps boundary strips
        // of flat regions from becoming zero-saliency keypoints.
        if l1 <= 0.0 || l2 <= 0.0 || l3 <= l1 * 1e-12 {
            return None;
        }
        (l2 / l1 < params.gamma_21 && l3 / l2 < params.gamma_32).then_some(l3)
    });

    let candidates: Vec<Keypoint> = saliencies
        .iter()
        .enumerate()
        .filter_map(|(i, s)| {
            s.map(|saliency| Keypoint {
                position: *cloud.point(i),
                scale: radius,
                saliency,
                source_index: i as i64,
            })
        })
        .collect();
    non_max_suppression(&candidates, params.nms_radius_mult * res.value())
}
