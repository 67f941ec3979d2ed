//! PCA surface normals and curvature over k-nearest neighborhoods.

use super::{CloudError, KdTree, Point3, PointCloud, Vec3};
use crate::exec;
use crate::linalg::eigen_sym3_sorted;
use nalgebra::Matrix3;

// Neighborhoods whose second PCA eigenvalue is below this fraction of the
// first have no stable plane fit and get no normal.
const RANK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct PointNormal {
    /// Unit normal, sign-flipped toward the viewpoint.
    pub direction: Vec3,
    /// lambda3 / (lambda1 + lambda2 + lambda3) of the local PCA, in [0, 1/3].
    pub curvature: f64,
}

/// Per-point surface normals; entries are `None` where the local
/// neighborhood was too degenerate to orient a plane.
#[derive(Debug, Clone)]
pub struct NormalField {
    entries: Vec<Option<PointNormal>>,
}

impl NormalField {
    pub fn from_entries(entries: Vec<Option<PointNormal>>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&PointNormal> {
        self.entries.get(index).and_then(|e| e.as_ref())
    }

    pub fn defined_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = Option<&PointNormal>> {
        self.entries.iter().map(|e| e.as_ref())
    }
}

/// Estimates a unit normal and curvature at every point from the PCA of
/// its `k` nearest neighbors (the point itself included). Normal signs are
/// flipped so that `normal . (viewpoint - p) >= 0`.
pub fn estimate_normals(
    cloud: &PointCloud,
    tree: &KdTree,
    k: usize,
    viewpoint: &Point3,
) -> Result<NormalField, CloudError> {
    if k < 3 || k > cloud.len() {
        return Err(CloudError::InvalidK { k, len: cloud.len() });
    }
    let entries = exec::map_indexed(cloud.len(), |i| {
        let p = cloud.point(i);
        let nn = tree.knn(p, k).expect("validated k");
        let mut mean = Vec3::zeros();
        for n in &nn {
            mean += cloud.point(n.index).coords;
        }
        mean /= k as f64;
        let mut cov = Matrix3::zeros();
        for n in &nn {
            let d = cloud.point(n.index).coords - mean;
            cov += d * d.transpose();
        }
        cov /= k as f64;

        let (vals, vecs) = eigen_sym3_sorted(&cov);
        let total = vals[0] + vals[1] + vals[2];
        if vals[0] <= 0.0 || total <= 0.0 || vals[1] / vals[0] < RANK_TOLERANCE {
            return None;
        }
        let mut direction = vecs[2];
        let norm = direction.norm();
        if norm == 0.0 {
            return None;
        }
        direction /= norm;
        if direction.dot(&(viewpoint - p)) < 0.0 {
            direction = -direction;
        }
        Some(PointNormal {
            direction,
            curvature: vals[2] / total,
        })
    });
    Ok(NormalField { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synth_cloud, SynthKind, SynthSpec};

    #[test]
    fn plane_normals_point_up() {
        let spec = SynthSpec {
            kind: SynthKind::Plane,
            n_points: 200,
            size: 1.0,
            noise: 0.0,
            seed: 3,
            ..Default::default()
        };
        let cloud = synth_cloud(&spec).unwrap();
        let tree = KdTree::build(&cloud);
        let normals = estimate_normals(&cloud, &tree, 8, &Point3::new(0.0, 0.0, 10.0)).unwrap();
        assert_eq!(normals.defined_count(), cloud.len());
        for (entry, _) in normals.iter().zip(cloud.points()) {
            let n = entry.expect("planar neighborhoods are well-conditioned");
            assert!((n.direction.norm() - 1.0).abs() < 1e-6);
            assert!((n.direction - Vec3::z()).norm() < 1e-3);
            assert!(n.curvature <= 1e-6);
        }
    }

    #[test]
    fn sphere_normals_face_the_interior_viewpoint() {
        let cloud = crate::detect::test_fixtures::fibonacci_sphere(1200, 1.0);
        let tree = KdTree::build(&cloud);
        let normals = estimate_normals(&cloud, &tree, 10, &Point3::origin()).unwrap();
        for (i, entry) in normals.iter().enumerate() {
            let n = entry.expect("sphere neighborhoods are well-conditioned");
            let radial = cloud.point(i).coords.normalize();
            // Interior viewpoint flips every normal inward.
            assert!(n.direction.dot(&radial) <= -0.99, "point {i} not inward");
            assert!(n.curvature >= 0.0 && n.curvature <= 1.0 / 3.0 + 1e-9);
        }
    }

    #[test]
    fn k_below_three_rejected() {
        let cloud = PointCloud::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            "t",
        )
        .unwrap();
        let tree = KdTree::build(&cloud);
        assert!(matches!(
            estimate_normals(&cloud, &tree, 2, &Point3::origin()),
            Err(CloudError::InvalidK { k: 2, .. })
        ));
        assert!(matches!(
            estimate_normals(&cloud, &tree, 4, &Point3::origin()),
            Err(CloudError::InvalidK { k: 4, .. })
        ));
    }

    #[test]
    fn collinear_neighborhoods_left_undefined() {
        let pts: Vec<Point3> = (0..20).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        let cloud = PointCloud::new(pts, "line").unwrap();
        let tree = KdTree::build(&cloud);
        let normals = estimate_normals(&cloud, &tree, 5, &Point3::new(0.0, 0.0, 10.0)).unwrap();
        assert_eq!(normals.defined_count(), 0);
    }
}
