//! Rotation-invariant 3D SIFT descriptor.
//!
//! Neighbors are expressed relative to the keypoint's dominant orientation
//! and binned over (azimuth, elevation, normal angle) into a 8 x 4 x 4 =
//! 128-bin histogram using 45-degree bins, weighted by distance-decayed
//! magnitude, then L2-normalized.

use super::{
    azimuth_deg, bin_index, delta_angle, elevation_deg, rotation_to_frame, DescribeError,
    Orientation, SupportRegion, MIN_SUPPORT_NEIGHBORS, SIFT_DIM,
};
use crate::cloud::{KdTree, NormalField, PointCloud};
use crate::detect::Keypoint;

const THETA_BINS: usize = 8;
const PHI_BINS: usize = 4;
const DELTA_BINS: usize = 4;
const ORIENT_THETA_BINS: usize = 36;
const ORIENT_PHI_BINS: usize = 18;

/// 128-dimensional unit-norm descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct SiftDescriptor {
    values: Vec<f64>,
}

impl SiftDescriptor {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Peak of the 10-degree (azimuth x elevation) histogram of neighbor
/// directions, each neighbor weighted by `exp(-2 d / r_max)`. Ties go to
/// the lower azimuth bin, then the lower elevation bin; the returned
/// angles are the winning bin's centers.
pub fn dominant_orientation(
    keypoint: &Keypoint,
    support: &SupportRegion,
    cloud: &PointCloud,
) -> Result<Orientation, DescribeError> {
    let mut histogram = [[0.0f64; ORIENT_PHI_BINS]; ORIENT_THETA_BINS];
    let mut used = 0usize;
    for member in &support.members {
        if member.distance <= 0.0 {
            continue; // coincident duplicate, no direction
        }
        let v = cloud.point(member.index) - keypoint.position;
        let tb = bin_index(azimuth_deg(&v), 0.0, 10.0, ORIENT_THETA_BINS);
        let pb = bin_index(elevation_deg(&v), -90.0, 10.0, ORIENT_PHI_BINS);
        histogram[tb][pb] += (-2.0 * member.distance / support.r_max).exp();
        used += 1;
    }
    if used < MIN_SUPPORT_NEIGHBORS {
        return Err(DescribeError::TooFewNeighbors {
            got: used,
            needed: MIN_SUPPORT_NEIGHBORS,
        });
    }
    let mut best = (0usize, 0usize);
    let mut best_weight = f64::NEG_INFINITY;
    for tb in 0..ORIENT_THETA_BINS {
        for pb in 0..ORIENT_PHI_BINS {
            if histogram[tb][pb] > best_weight {
                best_weight = histogram[tb][pb];
                best = (tb, pb);
            }
        }
    }
    Ok(Orientation {
        alpha_deg: 10.0 * best.0 as f64 + 5.0,
        beta_deg: -90.0 + 10.0 * best.1 as f64 + 5.0,
    })
}

pub fn describe_sift3d(
    cloud: &PointCloud,
    tree: &KdTree,
    normals: &NormalField,
    keypoint: &Keypoint,
    radius: f64,
) -> Result<SiftDescriptor, DescribeError> {
    let normal = (keypoint.source_index >= 0)
        .then(|| normals.get(keypoint.source_index as usize))
        .flatten()
        .ok_or(DescribeError::UndefinedNormal {
            index: keypoint.source_index,
        })?;
    let support = SupportRegion::gather(tree, keypoint, radius)?;
    let orientation = dominant_orientation(keypoint, &support, cloud)?;
    // The frame's first column is the dominant direction, so its transpose
    // maps that direction onto +x, making the binned angles relative to
    // the local orientation.
    let to_local = rotation_to_frame(&orientation).transpose();

    let mut histogram = vec![0.0f64; SIFT_DIM];
    for member in &support.members {
        if member.distance <= 0.0 {
            continue;
        }
        let v_world = cloud.point(member.index) - keypoint.position;
        let v = to_local * v_world;
        let magnitude = v.norm();
        let tb = bin_index(azimuth_deg(&v), 0.0, 45.0, THETA_BINS);
        let pb = bin_index(elevation_deg(&v), -90.0, 45.0, PHI_BINS);
        // The normal angle is frame-independent; compute it in world
        // coordinates where both vectors live.
        let delta = delta_angle(&v_world, &normal.direction)?;
        let db = bin_index(delta, 0.0, 45.0, DELTA_BINS);
        let weight = magnitude * (-2.0 * member.distance / support.r_max).exp();
        histogram[(tb * PHI_BINS + pb) * DELTA_BINS + db] += weight;
    }

    let norm = histogram.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(DescribeError::TooFewNeighbors {
            got: 0,
            needed: MIN_SUPPORT_NEIGHBORS,
        });
    }
    for v in &mut histogram {
        *v /= norm;
    }
    Ok(SiftDescriptor { values: histogram })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::{
        cloud_resolution, estimate_normals, KdTree, NormalField, Point3, PointNormal, Vec3,
    };
    use crate::cloud::PointCloud;
    use crate::synth::{synth_cloud, SynthKind, SynthSpec};
    use approx::assert_relative_eq;

    fn keypoint_at(cloud: &PointCloud, index: usize) -> Keypoint {
        Keypoint {
            position: *cloud.point(index),
            scale: 1.0,
            saliency: 1.0,
            source_index: index as i64,
        }
    }

    fn ray_cloud(direction: Vec3, count: usize) -> PointCloud {
        let mut pts = vec![Point3::origin()];
        for i in 1..=count {
            pts.push(Point3::from(direction * i as f64));
        }
        PointCloud::new(pts, "ray").unwrap()
    }

    #[test]
    fn orientation_of_x_ray_is_first_bin_center() {
        let cloud = ray_cloud(Vec3::x(), 6);
        let tree = KdTree::build(&cloud);
        let kp = keypoint_at(&cloud, 0);
        let support = SupportRegion::gather(&tree, &kp, 10.0).unwrap();
        let o = dominant_orientation(&kp, &support, &cloud).unwrap();
        assert_relative_eq!(o.alpha_deg, 5.0);
        assert_relative_eq!(o.beta_deg, 5.0);
    }

    #[test]
    fn orientation_of_z_ray_hits_top_elevation_bin() {
        let cloud = ray_cloud(Vec3::z(), 6);
        let tree = KdTree::build(&cloud);
        let kp = keypoint_at(&cloud, 0);
        let support = SupportRegion::gather(&tree, &kp, 10.0).unwrap();
        let o = dominant_orientation(&kp, &support, &cloud).unwrap();
        assert_relative_eq!(o.beta_deg, 85.0);
    }

    #[test]
    fn two_neighbors_are_not_enough() {
        let cloud = ray_cloud(Vec3::x(), 2);
        let tree = KdTree::build(&cloud);
        let kp = keypoint_at(&cloud, 0);
        let support = SupportRegion::gather(&tree, &kp, 10.0).unwrap();
        assert!(matches!(
            dominant_orientation(&kp, &support, &cloud),
            Err(DescribeError::TooFewNeighbors { got: 2, needed: 5 })
        ));
    }

    #[test]
    fn single_bin_support_gives_one_hot_descriptor() {
        // All neighbors on the +x ray, keypoint normal +z: the rotated
        // neighbors share one (theta, phi) bin and delta is 90 degrees for
        // all of them.
        let cloud = ray_cloud(Vec3::x(), 6);
        let tree = KdTree::build(&cloud);
        let kp = keypoint_at(&cloud, 0);
        let entries = (0..cloud.len())
            .map(|_| {
                Some(PointNormal {
                    direction: Vec3::z(),
                    curvature: 0.0,
                })
            })
            .collect();
        let normals = NormalField::from_entries(entries);
        let d = describe_sift3d(&cloud, &tree, &normals, &kp, 10.0).unwrap();
        assert_eq!(d.values().len(), SIFT_DIM);
        let nonzero: Vec<(usize, f64)> = d
            .values()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i, v))
            .collect();
        assert_eq!(nonzero.len(), 1, "expected one-hot, got {nonzero:?}");
        assert_relative_eq!(nonzero[0].1, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn descriptor_is_unit_norm_on_real_support() {
        let spec = SynthSpec {
            kind: SynthKind::Plantlike,
            n_points: 1200,
            size: 1.0,
            noise: 0.002,
            seed: 8,
            ..Default::default()
        };
        let cloud = synth_cloud(&spec).unwrap();
        let tree = KdTree::build(&cloud);
        let res = cloud_resolution(&cloud, &tree).unwrap();
        let normals = estimate_normals(&cloud, &tree, 10, &cloud.default_viewpoint()).unwrap();
        let mut described = 0;
        for index in (0..cloud.len()).step_by(37) {
            let kp = keypoint_at(&cloud, index);
            if let Ok(d) = describe_sift3d(&cloud, &tree, &normals, &kp, 8.0 * res.value()) {
                let norm: f64 = d.values().iter().map(|v| v * v).sum::<f64>().sqrt();
                assert_relative_eq!(norm, 1.0, epsilon = 1e-6);
                assert!(d.values().iter().all(|&v| v >= 0.0));
                described += 1;
            }
        }
        assert!(described > 10);
    }

    #[test]
    fn translation_leaves_descriptor_unchanged() {
        let spec = SynthSpec {
            kind: SynthKind::Plantlike,
            n_points: 900,
            size: 1.0,
            noise: 0.002,
            seed: 14,
            ..Default::default()
        };
        let cloud = synth_cloud(&spec).unwrap();
        let shift = Vec3::new(12.0, -7.0, 3.0);
        let moved = cloud.transformed(&nalgebra::Rotation3::identity(), &shift);
        let (tree, moved_tree) = (KdTree::build(&cloud), KdTree::build(&moved));
        let res = cloud_resolution(&cloud, &tree).unwrap();
        let vp = cloud.default_viewpoint();
        let normals = estimate_normals(&cloud, &tree, 10, &vp).unwrap();
        let moved_vp = Point3::from(vp.coords + shift);
        let moved_normals = estimate_normals(&moved, &moved_tree, 10, &moved_vp).unwrap();
        let r = 8.0 * res.value();

        let mut compared = 0;
        for index in (0..cloud.len()).step_by(53) {
            let a = describe_sift3d(&cloud, &tree, &normals, &keypoint_at(&cloud, index), r);
            let b = describe_sift3d(
                &moved,
                &moved_tree,
                &moved_normals,
                &keypoint_at(&moved, index),
                r,
            );
            if let (Ok(a), Ok(b)) = (a, b) {
                for (x, y) in a.values().iter().zip(b.values()) {
                    assert!((x - y).abs() < 1e-9);
                }
                compared += 1;
            }
        }
        assert!(compared > 5);
    }

    #[test]
    fn uniform_scaling_leaves_descriptor_unchanged() {
        let spec = SynthSpec {
            kind: SynthKind::Plantlike,
            n_points: 900,
            size: 1.0,
            noise: 0.002,
            seed: 15,
            ..Default::default()
        };
        let cloud = synth_cloud(&spec).unwrap();
        let scaled = PointCloud::new(
            cloud.points().iter().map(|p| Point3::from(p.coords * 3.5)).collect(),
            "scaled",
        )
        .unwrap();
        let (tree, scaled_tree) = (KdTree::build(&cloud), KdTree::build(&scaled));
        let res = cloud_resolution(&cloud, &tree).unwrap();
        let scaled_res = cloud_resolution(&scaled, &scaled_tree).unwrap();
        let normals = estimate_normals(&cloud, &tree, 10, &cloud.default_viewpoint()).unwrap();
        let scaled_normals =
            estimate_normals(&scaled, &scaled_tree, 10, &scaled.default_viewpoint()).unwrap();

        let mut compared = 0;
        for index in (0..cloud.len()).step_by(61) {
            let a = describe_sift3d(
                &cloud,
                &tree,
                &normals,
                &keypoint_at(&cloud, index),
                8.0 * res.value(),
            );
            let b = describe_sift3d(
                &scaled,
                &scaled_tree,
                &scaled_normals,
                &keypoint_at(&scaled, index),
                8.0 * scaled_res.value(),
            );
            if let (Ok(a), Ok(b)) = (a, b) {
                for (x, y) in a.values().iter().zip(b.values()) {
                    assert!((x - y).abs() < 1e-6);
                }
                compared += 1;
            }
        }
        assert!(compared > 5);
    }
}
