//! Seeded synthetic point-cloud generators used as test fixtures and as
//! the dataset-free benchmark suite.

use crate::cloud::{Point3, PointCloud, Vec3};
use nalgebra::Rotation3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {reason}")]
    InvalidSpec { reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    Sphere,
    Plane,
    Box,
    Blob,
    Plantlike,
}

impl SynthKind {
    pub fn name(&self) -> &'static str {
        match self {
            SynthKind::Sphere => "sphere",
            SynthKind::Plane => "plane",
            SynthKind::Box => "box",
            SynthKind::Blob => "blob",
            SynthKind::Plantlike => "plantlike",
        }
    }
}

impl std::str::FromStr for SynthKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sphere" => Ok(SynthKind::Sphere),
            "plane" => Ok(SynthKind::Plane),
            "box" => Ok(SynthKind::Box),
            "blob" => Ok(SynthKind::Blob),
            "plantlike" => Ok(SynthKind::Plantlike),
            other => Err(format!("unknown synthetic kind: {other}")),
        }
    }
}

/// Recipe for one synthetic cloud. `size` is the characteristic scale:
/// sphere radius, plane disc radius, box edge, blob standard deviation or
/// plant height. Identical specs produce identical clouds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub n_points: usize,
    pub size: f64,
    /// Standard deviation of isotropic Gaussian jitter added to every point.
    pub noise: f64,
    pub seed: u64,
    /// Leaf count, plantlike only.
    pub leaves: usize,
    /// Leaf tilt above the horizontal plane, degrees, plantlike only.
    pub leaf_angle_deg: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            kind: SynthKind::Sphere,
            n_points: 1000,
            size: 1.0,
            noise: 0.0,
            seed: 0,
            leaves: 4,
            leaf_angle_deg: 35.0,
        }
    }
}

pub fn synth_cloud(spec: &SynthSpec) -> Result<PointCloud, SynthError> {
    if spec.n_points < 10 {
        return Err(SynthError::InvalidSpec {
            reason: format!("n_points must be >= 10, got {}", spec.n_points),
        });
    }
    if !(spec.size > 0.0) || !spec.size.is_finite() {
        return Err(SynthError::InvalidSpec {
            reason: format!("size must be positive, got {}", spec.size),
        });
    }
    if !(spec.noise >= 0.0) || !spec.noise.is_finite() {
        return Err(SynthError::InvalidSpec {
            reason: format!("noise must be >= 0, got {}", spec.noise),
        });
    }
    if spec.kind == SynthKind::Plantlike && spec.leaves == 0 {
        return Err(SynthError::InvalidSpec {
            reason: "plantlike clouds need at least one leaf".into(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut points = match spec.kind {
        SynthKind::Sphere => sphere(spec.n_points, spec.size, &mut rng),
        SynthKind::Plane => plane(spec.n_points, spec.size, &mut rng),
        SynthKind::Box => cube_surface(spec.n_points, spec.size, &mut rng),
        SynthKind::Blob => blob(spec.n_points, spec.size, &mut rng),
        SynthKind::Plantlike => plantlike(spec, &mut rng),
    };
    if spec.noise > 0.0 {
        for p in &mut points {
            *p += gaussian3(&mut rng) * spec.noise;
        }
    }
    let id = format!("synth:{}:{}", spec.kind.name(), spec.seed);
    PointCloud::new(points.into_iter().map(Point3::from).collect(), id).map_err(|e| {
        SynthError::InvalidSpec {
            reason: e.to_string(),
        }
    })
}

fn gaussian3(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    )
}

fn unit_dir(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = gaussian3(rng);
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

fn sphere(n: usize, radius: f64, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    (0..n).map(|_| unit_dir(rng) * radius).collect()
}

fn plane(n: usize, radius: f64, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    (0..n)
        .map(|_| {
            let r = radius * rng.gen::<f64>().sqrt();
            let t = rng.gen::<f64>() * std::f64::consts::TAU;
            Vec3::new(r * t.cos(), r * t.sin(), 0.0)
        })
        .collect()
}

fn cube_surface(n: usize, edge: f64, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    let h = edge / 2.0;
    (0..n)
        .map(|_| {
            let face = rng.gen_range(0..6u8);
            let u = rng.gen_range(-h..=h);
            let v = rng.gen_range(-h..=h);
            match face {
                0 => Vec3::new(h, u, v),
                1 => Vec3::new(-h, u, v),
                2 => Vec3::new(u, h, v),
                3 => Vec3::new(u, -h, v),
                4 => Vec3::new(u, v, h),
                _ => Vec3::new(u, v, -h),
            }
        })
        .collect()
}

fn blob(n: usize, stdev: f64, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    (0..n).map(|_| gaussian3(rng) * stdev).collect()
}

/// Vertical stem (cylinder shell) plus `leaves` spheroid blades attached at
/// increasing heights. Blades are axially symmetric, so their local
/// geometry has no preferred roll about the blade normal.
fn plantlike(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    let n = spec.n_points;
    let height = spec.size;
    let stem_radius = 0.04 * height;
    let leaf_a = 0.26 * height; // blade in-plane semi-axis
    let leaf_c = 0.07 * height; // blade thickness semi-axis
    let tilt = spec.leaf_angle_deg.to_radians();

    let n_stem = (n as f64 * 0.35).round() as usize;
    let mut pts = Vec::with_capacity(n);
    for _ in 0..n_stem {
        let t = rng.gen::<f64>() * std::f64::consts::TAU;
        let z = rng.gen::<f64>() * height;
        pts.push(Vec3::new(stem_radius * t.cos(), stem_radius * t.sin(), z));
    }

    // Leaf placement: azimuths spread by the golden angle, attachment
    // heights climbing the stem.
    let golden = std::f64::consts::TAU * (1.0 - 1.0 / 1.618_033_988_749_895);
    let remaining = n - n_stem;
    for leaf in 0..spec.leaves {
        let count = remaining / spec.leaves
            + if leaf < remaining % spec.leaves { 1 } else { 0 };
        let azimuth = golden * leaf as f64;
        let frac = (leaf as f64 + 1.0) / (spec.leaves as f64 + 1.0);
        let attach = Vec3::new(0.0, 0.0, 0.3 * height + 0.6 * height * frac);
        let out = Vec3::new(azimuth.cos(), azimuth.sin(), 0.0);
        let center = attach + out * (leaf_a + stem_radius);
        // Tilt the blade plane up from horizontal around the axis
        // perpendicular to its outward direction.
        let tilt_axis = Vec3::new(-azimuth.sin(), azimuth.cos(), 0.0);
        let rot = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(tilt_axis), tilt);
        for _ in 0..count {
            let d = unit_dir(rng);
            let local = Vec3::new(d.x * leaf_a, d.y * leaf_a, d.z * leaf_c);
            pts.push(center + rot * local);
        }
    }
    pts
}
