//! Cloud-level encodings: variable-size descriptor sets become fixed-length
//! vectors through a GMM Fisher vector or a k-means VLAD.

mod gmm;
mod kmeans;
mod vectors;

pub use gmm::{fit_gmm, GmmCodebook, GmmFit};
pub use kmeans::{fit_kmeans, KMeansCodebook, KMeansFit};
pub use vectors::{encode_fv, encode_fv_raw, encode_vlad, FisherVector, VladVector};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("descriptor dimension {got} does not match codebook dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("descriptor set is empty")]
    EmptySet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    Fv,
    Vlad,
}

impl EncoderKind {
    pub fn name(&self) -> &'static str {
        match self {
            EncoderKind::Fv => "fv",
            EncoderKind::Vlad => "vlad",
        }
    }
}

impl std::str::FromStr for EncoderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fv" => Ok(EncoderKind::Fv),
            "vlad" => Ok(EncoderKind::Vlad),
            other => Err(format!("unknown encoder: {other}")),
        }
    }
}
