//! Keypoint detectors: Harris3D, ISS and SIFT3D, plus the shared greedy
//! non-maximum suppression they all feed into.

mod harris;
mod iss;
mod sift;

pub use harris::detect_harris3d;
pub use iss::detect_iss;
pub use sift::detect_sift3d;

use crate::cloud::Point3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("cloud has no points")]
    EmptyCloud,
    #[error("normal field is missing or empty for this cloud")]
    NoNormals,
    #[error("invalid suppression radius {radius}")]
    InvalidRadius { radius: f64 },
    #[error("scale ladder is not strictly increasing: {reason}")]
    BadScaleLadder { reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Harris,
    Iss,
    Sift,
}

impl DetectorKind {
    pub fn name(&self) -> &'static str {
        match self {
            DetectorKind::Harris => "harris",
            DetectorKind::Iss => "iss",
            DetectorKind::Sift => "sift",
        }
    }
}

impl std::str::FromStr for DetectorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "harris" => Ok(DetectorKind::Harris),
            "iss" => Ok(DetectorKind::Iss),
            "sift" => Ok(DetectorKind::Sift),
            other => Err(format!("unknown detector: {other}")),
        }
    }
}

/// A detected interest point. `scale` is the detector's own radius or DoG
/// sigma; `saliency` its raw response; `source_index` the cloud index the
/// keypoint snaps to (-1 would mean an interpolated position, which no
/// current detector emits).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub position: Point3,
    pub scale: f64,
    pub saliency: f64,
    pub source_index: i64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct HarrisParams {
    /// Support radius as a multiple of cloud resolution.
    pub radius_mult: f64,
    /// Harris response constant.
    pub k: f64,
    /// Keep responses >= this fraction of the maximum response.
    pub threshold_rel: f64,
    pub nms_radius_mult: f64,
}

impl Default for HarrisParams {
    fn default() -> Self {
        Self {
            radius_mult: 3.0,
            k: 0.04,
            threshold_rel: 0.01,
            nms_radius_mult: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct IssParams {
    pub salient_radius_mult: f64,
    pub nms_radius_mult: f64,
    /// Upper bound on lambda2/lambda1.
    pub gamma_21: f64,
    /// Upper bound on lambda3/lambda2.
    pub gamma_32: f64,
    pub min_neighbors: usize,
}

impl Default for IssParams {
    fn default() -> Self {
        Self {
            salient_radius_mult: 6.0,
            nms_radius_mult: 4.0,
            gamma_21: 0.975,
            gamma_32: 0.975,
            min_neighbors: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct SiftDetectorParams {
    /// Smallest sigma as a multiple of cloud resolution.
    pub min_scale_mult: f64,
    pub n_octaves: usize,
    pub scales_per_octave: usize,
    /// Minimum |DoG| (density normalized by cloud size) at an extremum.
    pub min_contrast: f64,
    /// Reject extrema whose DoG Hessian eigenvalue magnitudes differ by
    /// more than this ratio.
    pub curvature_reject_ratio: f64,
}

impl Default for SiftDetectorParams {
    fn default() -> Self {
        Self {
            min_scale_mult: 2.0,
            n_octaves: 4,
            scales_per_octave: 4,
            min_contrast: 1e-4,
            curvature_reject_ratio: 10.0,
        }
    }
}

/// Greedy non-maximum suppression: scan candidates by descending saliency
/// (ties by lower source index) and keep each one only if every already
/// kept keypoint is strictly farther than `radius`.
pub fn non_max_suppression(
    candidates: &[Keypoint],
    radius: f64,
) -> Result<Vec<Keypoint>, DetectError> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(DetectError::InvalidRadius { radius });
    }
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        candidates[b]
            .saliency
            .partial_cmp(&candidates[a].saliency)
            .expect("finite saliency")
            .then(candidates[a].source_index.cmp(&candidates[b].source_index))
    });
    let r2 = radius * radius;
    let mut kept: Vec<Keypoint> = Vec::new();
    for idx in order {
        let c = &candidates[idx];
        let suppressed = kept
            .iter()
            .any(|k| (k.position - c.position).norm_squared() <= r2);
        if !suppressed {
            kept.push(*c);
        }
    }
    Ok(kept)
}

// Evenly sampled fixtures; detector predicates are eigenvalue-ratio tests
// whose expected behavior holds for regular sampling, while random
// sampling scatters neighborhood eigenvalues too much.
#[cfg(test)]
pub(crate) mod test_fixtures {
    use crate::cloud::{Point3, PointCloud};

    pub fn grid_plane(side: usize, extent: f64) -> PointCloud {
        let h = extent / 2.0;
        let mut pts = Vec::with_capacity(side * side);
        for i in 0..side {
            for j in 0..side {
                let u = h * (2.0 * i as f64 / (side - 1) as f64 - 1.0);
                let v = h * (2.0 * j as f64 / (side - 1) as f64 - 1.0);
                pts.push(Point3::new(u, v, 0.0));
            }
        }
        PointCloud::new(pts, "grid-plane").unwrap()
    }

    /// Regular grid over all six faces of an axis-aligned cube; shared
    /// edge and corner samples are deduplicated.
    pub fn grid_cube(side: usize, edge: f64) -> PointCloud {
        let h = edge / 2.0;
        let mut pts: Vec<Point3> = Vec::with_capacity(6 * side * side);
        let coord = |i: usize| h * (2.0 * i as f64 / (side - 1) as f64 - 1.0);
        for i in 0..side {
            for j in 0..side {
                let (u, v) = (coord(i), coord(j));
                pts.push(Point3::new(h, u, v));
                pts.push(Point3::new(-h, u, v));
                pts.push(Point3::new(u, h, v));
                pts.push(Point3::new(u, -h, v));
                pts.push(Point3::new(u, v, h));
                pts.push(Point3::new(u, v, -h));
            }
        }
        pts.sort_by(|a, b| {
            (a.x, a.y, a.z)
                .partial_cmp(&(b.x, b.y, b.z))
                .expect("finite coordinates")
        });
        pts.dedup();
        PointCloud::new(pts, "grid-cube").unwrap()
    }

    /// Fibonacci-lattice sphere: near-uniform point spacing everywhere.
    pub fn fibonacci_sphere(n: usize, radius: f64) -> PointCloud {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let pts = (0..n)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let t = golden * i as f64;
                Point3::new(radius * r * t.cos(), radius * r * t.sin(), radius * z)
            })
            .collect();
        PointCloud::new(pts, "fibonacci-sphere").unwrap()
    }
}
