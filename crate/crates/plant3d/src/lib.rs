//! Local-feature toolkit for 3D point clouds.
//!
//! The crate covers the full feature pipeline used for cloud-level
//! classification:
//!
//! 1. [`cloud`] — point-cloud data model, exact neighbor search,
//!    resolution estimation and PCA surface normals;
//! 2. [`detect`] — Harris3D, ISS and SIFT3D keypoint detectors;
//! 3. [`describe`] — rotation-invariant 3D SIFT (128-D) and SHOT (352-D)
//!    local descriptors;
//! 4. [`encode`] — Fisher-vector (GMM) and VLAD (k-means) aggregation of
//!    descriptor sets into fixed-length vectors;
//! 5. [`svm`] — one-vs-all linear SVM training, prediction and accuracy.
//!
//! All radius parameters are expressed as multiples of the cloud
//! resolution (mean nearest-neighbor spacing) so the same settings work
//! across clouds of different physical scale.
//!
//! Everything is deterministic: seeded RNGs, index-ordered reductions and
//! tie-break rules make results identical run to run, with or without the
//! `parallel` feature (enabled by default; disable for a sequential
//! build).

pub mod cloud;
pub mod describe;
pub mod detect;
pub mod encode;
pub mod io;
pub mod matrix;
pub mod svm;
pub mod synth;

mod exec;
mod linalg;

pub use cloud::{
    cloud_resolution, estimate_normals, CloudError, CloudResolution, KdTree, Neighbor,
    NormalField, Point3, PointCloud, PointNormal, Vec3,
};
pub use describe::{
    compute_shot_lrf, delta_angle, describe_all, describe_shot, describe_sift3d,
    dominant_orientation, rotation_to_frame, DescribeError, DescriptorKind, LocalReferenceFrame,
    Orientation, ShotDescriptor, SiftDescriptor, SupportRegion, WeightedCovariance,
    MIN_SUPPORT_NEIGHBORS, SHOT_DIM, SIFT_DIM,
};
pub use detect::{
    detect_harris3d, detect_iss, detect_sift3d, non_max_suppression, DetectError, DetectorKind,
    HarrisParams, IssParams, Keypoint, SiftDetectorParams,
};
pub use encode::{
    encode_fv, encode_fv_raw, encode_vlad, fit_gmm, fit_kmeans, EncodeError, EncoderKind,
    FisherVector, GmmCodebook, GmmFit, KMeansCodebook, KMeansFit, VladVector,
};
pub use matrix::FeatureMatrix;
pub use svm::{accuracy, predict, train_svm_ova, LinearSvmModel, SvmError, TrainConfig};
pub use synth::{synth_cloud, SynthError, SynthKind, SynthSpec};
