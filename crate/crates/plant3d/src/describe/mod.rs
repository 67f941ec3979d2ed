//! Local surface descriptors: rotation-invariant 3D SIFT and SHOT.

mod sift;
mod shot;

pub use sift::{describe_sift3d, dominant_orientation, SiftDescriptor};
pub use shot::{compute_shot_lrf, describe_shot, LocalReferenceFrame, ShotDescriptor, WeightedCovariance};

use crate::cloud::{KdTree, Neighbor, NormalField, PointCloud, Vec3};
use crate::detect::Keypoint;
use crate::exec;
use crate::matrix::FeatureMatrix;
use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SIFT_DIM: usize = 128;
pub const SHOT_DIM: usize = 352;

/// Minimum support members (excluding the keypoint itself) either
/// descriptor needs.
pub const MIN_SUPPORT_NEIGHBORS: usize = 5;

#[derive(Debug, Error)]
pub enum DescribeError {
    #[error("support region has {got} usable neighbors, needs {needed}")]
    TooFewNeighbors { got: usize, needed: usize },
    #[error("keypoint at cloud index {index} has no defined normal")]
    UndefinedNormal { index: i64 },
    #[error("support region is degenerate, no stable reference frame")]
    DegenerateNeighborhood,
    #[error("angle between vectors is undefined for a zero vector")]
    ZeroVector,
    #[error("invalid support radius {radius}")]
    InvalidRadius { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DescriptorKind {
    Sift,
    Shot,
}

impl DescriptorKind {
    pub fn name(&self) -> &'static str {
        match self {
            DescriptorKind::Sift => "sift",
            DescriptorKind::Shot => "shot",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DescriptorKind::Sift => SIFT_DIM,
            DescriptorKind::Shot => SHOT_DIM,
        }
    }
}

impl std::str::FromStr for DescriptorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sift" => Ok(DescriptorKind::Sift),
            "shot" => Ok(DescriptorKind::Shot),
            other => Err(format!("unknown descriptor: {other}")),
        }
    }
}

/// Dominant direction at a keypoint, degrees. Azimuth in [0, 360),
/// elevation in [-90, 90].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    pub alpha_deg: f64,
    pub beta_deg: f64,
}

/// All cloud points within `radius` of a keypoint, the keypoint's own
/// point excluded. `r_max` is the distance of the farthest member.
#[derive(Debug, Clone)]
pub struct SupportRegion {
    pub radius: f64,
    pub r_max: f64,
    pub members: Vec<Neighbor>,
}

impl SupportRegion {
    pub fn gather(
        tree: &KdTree,
        keypoint: &Keypoint,
        radius: f64,
    ) -> Result<Self, DescribeError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(DescribeError::InvalidRadius { radius });
        }
        let members: Vec<Neighbor> = tree
            .radius_search(&keypoint.position, radius)
            .map_err(|_| DescribeError::InvalidRadius { radius })?
            .into_iter()
            .filter(|n| n.index as i64 != keypoint.source_index)
            .collect();
        let r_max = members.iter().map(|n| n.distance).fold(0.0, f64::max);
        if members.is_empty() || r_max <= 0.0 {
            return Err(DescribeError::TooFewNeighbors {
                got: members.len(),
                needed: MIN_SUPPORT_NEIGHBORS,
            });
        }
        Ok(Self {
            radius,
            r_max,
            members,
        })
    }
}

/// Rotation matrix of a dominant orientation (azimuth alpha, elevation
/// beta, both degrees):
///
/// ```text
/// [ cos(a)cos(b)   -sin(a)   -cos(a)sin(b) ]
/// [ sin(a)cos(b)    cos(a)   -sin(a)sin(b) ]
/// [ sin(b)          0         cos(b)       ]
/// ```
///
/// Always a proper rotation; its first column is the unit vector at
/// (alpha, beta), so the transpose maps that direction onto +x.
pub fn rotation_to_frame(orientation: &Orientation) -> Matrix3<f64> {
    let a = orientation.alpha_deg.to_radians();
    let b = orientation.beta_deg.to_radians();
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    Matrix3::new(
        ca * cb, -sa, -ca * sb, //
        sa * cb, ca, -sa * sb, //
        sb, 0.0, cb,
    )
}

/// Angle in degrees, range [0, 180], between a neighbor offset and a
/// surface normal. The cosine is clamped before acos so antipodal inputs
/// cannot produce NaN.
pub fn delta_angle(v: &Vec3, n: &Vec3) -> Result<f64, DescribeError> {
    let nv = v.norm();
    let nn = n.norm();
    if nv == 0.0 || nn == 0.0 {
        return Err(DescribeError::ZeroVector);
    }
    let cos = (v.dot(n) / (nv * nn)).clamp(-1.0, 1.0);
    Ok(cos.acos().to_degrees())
}

/// Azimuth of `v` in degrees, wrapped into [0, 360).
pub(crate) fn azimuth_deg(v: &Vec3) -> f64 {
    let mut t = v.y.atan2(v.x).to_degrees();
    if t < 0.0 {
        t += 360.0;
    }
    if t >= 360.0 {
        t = 0.0;
    }
    t
}

/// Elevation of `v` in degrees, range [-90, 90].
pub(crate) fn elevation_deg(v: &Vec3) -> f64 {
    let norm = v.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (v.z / norm).clamp(-1.0, 1.0).asin().to_degrees()
}

/// Half-open binning with the top boundary value clamped into the last bin.
pub(crate) fn bin_index(value: f64, lo: f64, width: f64, bins: usize) -> usize {
    let raw = ((value - lo) / width).floor();
    (raw.max(0.0) as usize).min(bins - 1)
}

/// Describes every keypoint in order, skipping those whose support is too
/// thin or degenerate; returns the descriptor matrix and the skip count.
pub fn describe_all(
    cloud: &PointCloud,
    tree: &KdTree,
    normals: &NormalField,
    keypoints: &[Keypoint],
    radius: f64,
    kind: DescriptorKind,
) -> (FeatureMatrix, usize) {
    let rows: Vec<Option<Vec<f64>>> = exec::map_slice(keypoints, |kp| match kind {
        DescriptorKind::Sift => {
            describe_sift3d(cloud, tree, normals, kp, radius).ok().map(|d| d.into_values())
        }
        DescriptorKind::Shot => {
            describe_shot(cloud, tree, normals, kp, radius).ok().map(|d| d.into_values())
        }
    });
    let mut matrix = FeatureMatrix::new(kind.dim());
    let mut skipped = 0;
    for row in rows {
        match row {
            Some(r) => matrix.push_row(&r),
            None => skipped += 1,
        }
    }
    (matrix, skipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frame_at_zero_is_identity() {
        let m = rotation_to_frame(&Orientation {
            alpha_deg: 0.0,
            beta_deg: 0.0,
        });
        assert_relative_eq!(m, Matrix3::identity(), epsilon = 1e-15);
    }

    #[test]
    fn frame_at_quarter_turn_matches_hand_value() {
        let m = rotation_to_frame(&Orientation {
            alpha_deg: 90.0,
            beta_deg: 0.0,
        });
        let expected = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert_relative_eq!(m, expected, epsilon = 1e-12);
    }

    #[test]
    fn frame_is_always_a_proper_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let o = Orientation {
                alpha_deg: rng.gen_range(0.0..360.0),
                beta_deg: rng.gen_range(-90.0..90.0),
            };
            let m = rotation_to_frame(&o);
            assert_relative_eq!(m.transpose() * m, Matrix3::identity(), epsilon = 1e-12);
            assert_relative_eq!(m.determinant(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn delta_angle_cardinal_cases() {
        let n = Vec3::z();
        assert_relative_eq!(delta_angle(&Vec3::new(0.0, 0.0, 2.0), &n).unwrap(), 0.0, epsilon = 1e-9);
        assert_relative_eq!(delta_angle(&Vec3::new(3.0, 0.0, 0.0), &n).unwrap(), 90.0, epsilon = 1e-9);
        assert_relative_eq!(delta_angle(&Vec3::new(0.0, 0.0, -1.0), &n).unwrap(), 180.0, epsilon = 1e-9);
        assert!(matches!(
            delta_angle(&Vec3::zeros(), &n),
            Err(DescribeError::ZeroVector)
        ));
    }

    #[test]
    fn delta_angle_scale_free_and_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let v = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let n = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if v.norm() == 0.0 || n.norm() == 0.0 {
                continue;
            }
            let d = delta_angle(&v, &n).unwrap();
            assert!((0.0..=180.0).contains(&d));
            let c = rng.gen_range(0.001..1000.0);
            assert_relative_eq!(delta_angle(&(v * c), &n).unwrap(), d, epsilon = 1e-9);
        }
    }

    #[test]
    fn azimuth_wraps_into_range() {
        assert_eq!(azimuth_deg(&Vec3::new(1.0, 0.0, 0.0)), 0.0);
        assert!((azimuth_deg(&Vec3::new(0.0, 1.0, 0.0)) - 90.0).abs() < 1e-12);
        assert!((azimuth_deg(&Vec3::new(-1.0, 0.0, 0.0)) - 180.0).abs() < 1e-12);
        let wrapped = azimuth_deg(&Vec3::new(1.0, -1e-18, 0.0));
        assert!((0.0..360.0).contains(&wrapped));
    }

    #[test]
    fn bin_index_clamps_top_boundary() {
        assert_eq!(bin_index(90.0, -90.0, 45.0, 4), 3);
        assert_eq!(bin_index(180.0, 0.0, 45.0, 4), 3);
        assert_eq!(bin_index(0.0, 0.0, 45.0, 8), 0);
        assert_eq!(bin_index(44.999, 0.0, 45.0, 8), 0);
        assert_eq!(bin_index(45.0, 0.0, 45.0, 8), 1);
    }
}
