//! Point-cloud data model, exact spatial queries and surface normals.

mod kdtree;
mod normals;

pub use kdtree::{KdTree, Neighbor};
pub use normals::{estimate_normals, NormalField, PointNormal};

use thiserror::Error;

pub type Point3 = nalgebra::Point3<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;

#[derive(Debug, Error)]
pub enum CloudError {
    #[error("cloud has no points")]
    EmptyCloud,
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("operation needs at least {needed} points, cloud has {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("invalid neighbor count k={k} for cloud of {len} points")]
    InvalidK { k: usize, len: usize },
    #[error("invalid search radius {radius}")]
    InvalidRadius { radius: f64 },
    #[error("cloud is degenerate: every point coincides with its nearest neighbor")]
    DegenerateCloud,
}

/// An ordered set of 3D points plus an identifier for the source file or
/// generator it came from. Immutable after construction.
#[derive(Debug, Clone)]
pub struct PointCloud {
    points: Vec<Point3>,
    source_id: String,
}

impl PointCloud {
    /// Rejects empty inputs and non-finite coordinates; point order is
    /// preserved exactly as given.
    pub fn new(points: Vec<Point3>, source_id: impl Into<String>) -> Result<Self, CloudError> {
        if points.is_empty() {
            return Err(CloudError::EmptyCloud);
        }
        for (index, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(CloudError::NonFinite { index });
            }
        }
        Ok(Self {
            points,
            source_id: source_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn point(&self, index: usize) -> &Point3 {
        &self.points[index]
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn centroid(&self) -> Point3 {
        let mut sum = Vec3::zeros();
        for p in &self.points {
            sum += p.coords;
        }
        Point3::from(sum / self.points.len() as f64)
    }

    /// Axis-aligned bounding box as (min corner, max corner).
    pub fn bounding_box(&self) -> (Point3, Point3) {
        let mut lo = self.points[0];
        let mut hi = self.points[0];
        for p in &self.points {
            for axis in 0..3 {
                lo[axis] = lo[axis].min(p[axis]);
                hi[axis] = hi[axis].max(p[axis]);
            }
        }
        (lo, hi)
    }

    /// Default viewpoint for normal-sign disambiguation: the centroid
    /// raised along +z by ten bounding-box diagonals.
    pub fn default_viewpoint(&self) -> Point3 {
        let (lo, hi) = self.bounding_box();
        let diag = (hi - lo).norm().max(f64::MIN_POSITIVE);
        let c = self.centroid();
        Point3::new(c.x, c.y, c.z + 10.0 * diag)
    }

    /// Rigidly transformed copy (rotation followed by translation).
    pub fn transformed(&self, rotation: &nalgebra::Rotation3<f64>, translation: &Vec3) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| Point3::from(rotation * p.coords + translation))
            .collect();
        Self {
            points,
            source_id: self.source_id.clone(),
        }
    }
}

/// Mean nearest-neighbor spacing of a cloud. All detector and descriptor
/// radii are multiples of this, making parameters unit-free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudResolution(f64);

impl CloudResolution {
    pub fn new(value: f64) -> Option<Self> {
        (value.is_finite() && value > 0.0).then_some(Self(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Mean over all points of the distance to each point's nearest distinct
/// neighbor (distinct index; coincident duplicates count at distance 0).
pub fn cloud_resolution(cloud: &PointCloud, tree: &KdTree) -> Result<CloudResolution, CloudError> {
    if cloud.len() < 2 {
        return Err(CloudError::TooFewPoints {
            needed: 2,
            got: cloud.len(),
        });
    }
    let sum: f64 = (0..cloud.len())
        .map(|i| {
            let nn = tree
                .knn(cloud.point(i), 2)
                .expect("k=2 is valid for >=2 points");
            // The query point itself always shows up at distance 0; take
            // the closest entry with a different index.
            nn.iter()
                .find(|n| n.index != i)
                .map(|n| n.distance)
                .unwrap_or(0.0)
        })
        .sum();
    let mean = sum / cloud.len() as f64;
    CloudResolution::new(mean).ok_or(CloudError::DegenerateCloud)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;

    fn cloud_from(coords: &[(f64, f64, f64)]) -> PointCloud {
        let pts = coords
            .iter()
            .map(|&(x, y, z)| Point3::new(x, y, z))
            .collect();
        PointCloud::new(pts, "test").unwrap()
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(matches!(
            PointCloud::new(vec![], "x"),
            Err(CloudError::EmptyCloud)
        ));
        let bad = vec![Point3::new(0.0, f64::NAN, 0.0)];
        assert!(matches!(
            PointCloud::new(bad, "x"),
            Err(CloudError::NonFinite { index: 0 })
        ));
    }

    #[test]
    fn resolution_collinear_unit_spacing() {
        let cloud = cloud_from(&[(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (2.0, 0.0, 0.0), (3.0, 0.0, 0.0)]);
        let tree = KdTree::build(&cloud);
        let res = cloud_resolution(&cloud, &tree).unwrap();
        assert!((res.value() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resolution_two_points() {
        let cloud = cloud_from(&[(0.0, 0.0, 0.0), (0.5, 0.0, 0.0)]);
        let tree = KdTree::build(&cloud);
        assert!((cloud_resolution(&cloud, &tree).unwrap().value() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn resolution_single_point_errors() {
        let cloud = cloud_from(&[(0.0, 0.0, 0.0)]);
        let tree = KdTree::build(&cloud);
        assert!(matches!(
            cloud_resolution(&cloud, &tree),
            Err(CloudError::TooFewPoints { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn resolution_rigid_motion_invariant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<Point3> = (0..200)
            .map(|_| Point3::new(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()))
            .collect();
        let cloud = PointCloud::new(pts, "res").unwrap();
        let tree = KdTree::build(&cloud);
        let base = cloud_resolution(&cloud, &tree).unwrap().value();

        let rot = Rotation3::from_euler_angles(0.3, -1.1, 2.4);
        let moved = cloud.transformed(&rot, &Vec3::new(5.0, -2.0, 9.0));
        let moved_tree = KdTree::build(&moved);
        let rotated = cloud_resolution(&moved, &moved_tree).unwrap().value();
        assert!(((rotated - base) / base).abs() < 1e-9);
    }
}
