//! SHOT descriptor: signatures of histograms of normal orientations over a
//! spherical grid anchored to a repeatable local reference frame.

use super::{azimuth_deg, bin_index, DescribeError, SupportRegion, MIN_SUPPORT_NEIGHBORS, SHOT_DIM};
use crate::cloud::{KdTree, NormalField, Point3, PointCloud, Vec3};
use crate::detect::Keypoint;
use crate::linalg::eigen_sym3_sorted;
use nalgebra::Matrix3;

const AZIMUTH_SECTORS: usize = 8;
const COS_BINS: usize = 11;
// 8 azimuth x 2 elevation x 2 radial shells = 32 sectors, 11 cosine bins
// each: 352 entries.

const EIGEN_GAP_TOLERANCE: f64 = 1e-9;

/// 352-dimensional unit-norm descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotDescriptor {
    values: Vec<f64>,
}

impl ShotDescriptor {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Distance-weighted neighborhood covariance about a center point:
/// `C = sum_i (r - d_i) (q_i - q)(q_i - q)^T / sum_i (r - d_i)`.
#[derive(Debug, Clone)]
pub struct WeightedCovariance {
    pub matrix: Matrix3<f64>,
    pub radius: f64,
}

impl WeightedCovariance {
    pub fn compute(
        cloud: &PointCloud,
        center: &Point3,
        members: &[crate::cloud::Neighbor],
        radius: f64,
    ) -> Self {
        let mut matrix = Matrix3::zeros();
        let mut total = 0.0;
        for m in members {
            let w = radius - m.distance;
            if w <= 0.0 {
                continue;
            }
            let d = cloud.point(m.index) - center;
            matrix += w * d * d.transpose();
            total += w;
        }
        if total > 0.0 {
            matrix /= total;
        }
        Self { matrix, radius }
    }
}

/// Orthonormal right-handed frame attached to a keypoint.
#[derive(Debug, Clone, Copy)]
pub struct LocalReferenceFrame {
    pub x_axis: Vec3,
    pub y_axis: Vec3,
    pub z_axis: Vec3,
}

/// Reference frame from the weighted covariance eigenvectors: x along the
/// largest eigenvalue, z along the smallest, each sign-flipped toward the
/// half-space holding the bulk of the support (sum of projections >= 0;
/// exact ties keep the unflipped eigenvector), and y = z cross x.
pub fn compute_shot_lrf(
    cloud: &PointCloud,
    tree: &KdTree,
    keypoint: &Keypoint,
    radius: f64,
) -> Result<LocalReferenceFrame, DescribeError> {
    let support = SupportRegion::gather(tree, keypoint, radius)?;
    if support.members.len() < 4 {
        return Err(DescribeError::DegenerateNeighborhood);
    }
    lrf_from_support(cloud, &keypoint.position, &support)
}

fn lrf_from_support(
    cloud: &PointCloud,
    center: &Point3,
    support: &SupportRegion,
) -> Result<LocalReferenceFrame, DescribeError> {
    let cov = WeightedCovariance::compute(cloud, center, &support.members, support.radius);
    let (vals, vecs) = eigen_sym3_sorted(&cov.matrix);
    let [l1, l2, l3] = vals;
    if l1 <= 0.0
        || l2 / l1 < EIGEN_GAP_TOLERANCE
        || (l1 - l2) / l1 < EIGEN_GAP_TOLERANCE
        || (l2 - l3) / l1 < EIGEN_GAP_TOLERANCE
    {
        return Err(DescribeError::DegenerateNeighborhood);
    }

    let orient = |axis: Vec3| -> Vec3 {
        let mut plus = 0.0;
        for m in &support.members {
            plus += axis.dot(&(cloud.point(m.index) - center));
        }
        if plus < 0.0 {
            -axis
        } else {
            axis
        }
    };
    let x_axis = orient(vecs[0]);
    let z_axis = orient(vecs[2]);
    let y_axis = z_axis.cross(&x_axis);
    Ok(LocalReferenceFrame {
        x_axis,
        y_axis,
        z_axis,
    })
}

pub fn describe_shot(
    cloud: &PointCloud,
    tree: &KdTree,
    normals: &NormalField,
    keypoint: &Keypoint,
    radius: f64,
) -> Result<ShotDescriptor, DescribeError> {
    let support = SupportRegion::gather(tree, keypoint, radius)?;
    if support.members.len() < 4 {
        return Err(DescribeError::DegenerateNeighborhood);
    }
    let frame = lrf_from_support(cloud, &keypoint.position, &support)?;

    let mut histogram = vec![0.0f64; SHOT_DIM];
    let mut used = 0usize;
    for member in &support.members {
        let Some(normal) = normals.get(member.index) else {
            continue;
        };
        let v = cloud.point(member.index) - keypoint.position;
        let local = Vec3::new(
            frame.x_axis.dot(&v),
            frame.y_axis.dot(&v),
            frame.z_axis.dot(&v),
        );
        if local.norm() == 0.0 {
            continue; // coincident duplicate carries no sector information
        }
        let az = bin_index(azimuth_deg(&local), 0.0, 45.0, AZIMUTH_SECTORS);
        let elev = if local.z >= 0.0 { 0 } else { 1 };
        let shell = if member.distance < radius / 2.0 { 0 } else { 1 };
        let sector = (az * 2 + elev) * 2 + shell;
        let cos = normal.direction.dot(&frame.z_axis).clamp(-1.0, 1.0);
        let cb = bin_index(cos, -1.0, 2.0 / COS_BINS as f64, COS_BINS);
        histogram[sector * COS_BINS + cb] += 1.0;
        used += 1;
    }
    if used < MIN_SUPPORT_NEIGHBORS {
        return Err(DescribeError::TooFewNeighbors {
            got: used,
            needed: MIN_SUPPORT_NEIGHBORS,
        });
    }
    let norm = histogram.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut histogram {
        *v /= norm;
    }
    Ok(ShotDescriptor { values: histogram })
}
