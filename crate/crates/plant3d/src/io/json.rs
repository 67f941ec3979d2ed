//! JSON serial forms: keypoint arrays, codebooks and SVM models.

use super::IoError;
use crate::cloud::Point3;
use crate::detect::Keypoint;
use crate::encode::{GmmCodebook, KMeansCodebook};
use crate::svm::LinearSvmModel;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Wire form of a keypoint: `{x, y, z, scale, saliency, index}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KeypointRecord {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub scale: f64,
    pub saliency: f64,
    pub index: i64,
}

impl From<&Keypoint> for KeypointRecord {
    fn from(kp: &Keypoint) -> Self {
        Self {
            x: kp.position.x,
            y: kp.position.y,
            z: kp.position.z,
            scale: kp.scale,
            saliency: kp.saliency,
            index: kp.source_index,
        }
    }
}

impl From<&KeypointRecord> for Keypoint {
    fn from(r: &KeypointRecord) -> Self {
        Self {
            position: Point3::new(r.x, r.y, r.z),
            scale: r.scale,
            saliency: r.saliency,
            source_index: r.index,
        }
    }
}

pub fn save_keypoints(keypoints: &[Keypoint], path: &Path) -> Result<(), IoError> {
    let records: Vec<KeypointRecord> = keypoints.iter().map(KeypointRecord::from).collect();
    let json = serde_json::to_string_pretty(&records).expect("keypoints serialize");
    std::fs::write(path, json).map_err(|e| IoError::io(path, e))
}

pub fn load_keypoints(path: &Path) -> Result<Vec<Keypoint>, IoError> {
    let bytes = std::fs::read(path).map_err(|e| IoError::io(path, e))?;
    let records: Vec<KeypointRecord> = serde_json::from_slice(&bytes)
        .map_err(|e| IoError::parse(path, e.line(), e.to_string()))?;
    Ok(records.iter().map(Keypoint::from).collect())
}

/// On-disk codebook, tagged by fitting method.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CodebookFile {
    Gmm(GmmCodebook),
    Kmeans(KMeansCodebook),
}

pub fn save_codebook(codebook: &CodebookFile, path: &Path) -> Result<(), IoError> {
    let json = serde_json::to_string_pretty(codebook).expect("codebook serialize");
    std::fs::write(path, json).map_err(|e| IoError::io(path, e))
}

pub fn load_codebook(path: &Path) -> Result<CodebookFile, IoError> {
    let bytes = std::fs::read(path).map_err(|e| IoError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| IoError::parse(path, e.line(), e.to_string()))
}

pub fn save_model(model: &LinearSvmModel, path: &Path) -> Result<(), IoError> {
    let json = serde_json::to_string_pretty(model).expect("model serialize");
    std::fs::write(path, json).map_err(|e| IoError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<LinearSvmModel, IoError> {
    let bytes = std::fs::read(path).map_err(|e| IoError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| IoError::parse(path, e.line(), e.to_string()))
}
