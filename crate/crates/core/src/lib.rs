//! Vocal depression-risk screening toolkit: random-splicing anonymization,
//! acoustic feature extraction, splice-robustness checks and the statistical
//! chain (covariance analysis, discriminant analysis, stepwise selection,
//! linear SVM) that ties acoustic features to questionnaire risk groups.
//!
//! Numeric code is generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases below fix it to `f64`.

pub mod audio;
pub mod config;
pub mod error;
pub mod features;
pub mod pipeline;
pub mod robustness;
pub mod scalar;
pub mod splice;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};

pub type AudioBuffer = audio::AudioBuffer<f64>;
pub type Spectrum = audio::Spectrum<f64>;
pub type FrameSequence = audio::FrameSequence<f64>;
pub type F0Contour = features::F0Contour<f64>;
pub type FeatureVector = features::FeatureVector<f64>;
pub type Matrix = stats::Matrix<f64>;
pub type DesignMatrix = stats::DesignMatrix<f64>;
pub type AncovaResult = stats::AncovaResult<f64>;
pub type DiscriminantResult = stats::DiscriminantResult<f64>;
pub type StepwiseTrace = stats::StepwiseTrace<f64>;
pub type LinearSvmModel = stats::LinearSvmModel<f64>;
