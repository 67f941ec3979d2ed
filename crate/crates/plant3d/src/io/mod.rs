//! File formats: PLY and XYZ clouds, keypoint JSON, codebook and model
//! JSON, and the P3DF binary descriptor container.

mod json;
mod p3df;
mod ply;
mod xyz;

pub use json::{
    load_codebook, load_keypoints, load_model, save_codebook, save_keypoints, save_model,
    CodebookFile, KeypointRecord,
};
pub use p3df::{descriptors_to_csv, read_descriptors, write_descriptors};

use crate::cloud::PointCloud;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("file not found: {path}")]
    NotFound { path: String },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: cloud has no points")]
    EmptyCloud { path: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl IoError {
    pub(crate) fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        IoError::Parse {
            path: path.display().to_string(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        if source.kind() == std::io::ErrorKind::NotFound {
            IoError::NotFound {
                path: path.display().to_string(),
            }
        } else {
            IoError::Io {
                path: path.display().to_string(),
                source,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    Ply,
    Xyz,
    Auto,
}

impl std::str::FromStr for CloudFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ply" => Ok(CloudFormat::Ply),
            "xyz" => Ok(CloudFormat::Xyz),
            "auto" => Ok(CloudFormat::Auto),
            other => Err(format!("unknown cloud format: {other}")),
        }
    }
}

/// Loads vertex positions in file order; non-positional properties are
/// ignored. `Auto` picks by extension, falling back to content sniffing.
pub fn load_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud, IoError> {
    let bytes = std::fs::read(path).map_err(|e| IoError::io(path, e))?;
    let format = match format {
        CloudFormat::Auto => sniff_format(path, &bytes),
        other => other,
    };
    let points = match format {
        CloudFormat::Ply => ply::parse(path, &bytes)?,
        CloudFormat::Xyz => xyz::parse(path, &bytes)?,
        CloudFormat::Auto => unreachable!("resolved above"),
    };
    if points.is_empty() {
        return Err(IoError::EmptyCloud {
            path: path.display().to_string(),
        });
    }
    PointCloud::new(points, path.display().to_string()).map_err(|e| IoError::Parse {
        path: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })
}

fn sniff_format(path: &Path, bytes: &[u8]) -> CloudFormat {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .as_deref()
    {
        Some("ply") => CloudFormat::Ply,
        Some("xyz") | Some("txt") => CloudFormat::Xyz,
        _ => {
            if bytes.starts_with(b"ply") {
                CloudFormat::Ply
            } else {
                CloudFormat::Xyz
            }
        }
    }
}

/// ASCII PLY writer (x, y, z as double).
pub fn save_cloud_ply(cloud: &PointCloud, path: &Path) -> Result<(), IoError> {
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    out.push_str(&format!("element vertex {}\n", cloud.len()));
    out.push_str("property double x\nproperty double y\nproperty double z\nend_header\n");
    for p in cloud.points() {
        out.push_str(&format!("{} {} {}\n", p.x, p.y, p.z));
    }
    std::fs::write(path, out).map_err(|e| IoError::io(path, e))
}

pub fn save_cloud_xyz(cloud: &PointCloud, path: &Path) -> Result<(), IoError> {
    let mut out = String::new();
    for p in cloud.points() {
        out.push_str(&format!("{} {} {}\n", p.x, p.y, p.z));
    }
    std::fs::write(path, out).map_err(|e| IoError::io(path, e))
}
