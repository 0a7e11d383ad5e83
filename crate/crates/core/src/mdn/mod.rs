//! Mixture density network: a feedforward network whose output
//! parameterizes a diagonal Gaussian mixture over the damage location.

mod artifact;
mod gmm;
mod network;
mod train;

use thiserror::Error;

pub use artifact::{ModelArtifact, MODEL_FORMAT};
pub use gmm::{activate, nll, nll_with_gradient, raw_len, GmmPrediction, DIM};
pub use network::{Activation, ForwardCache, ForwardMode, Network, NetworkSpec, TensorInfo};
pub use train::{
    batch_loss_and_gradient, design_matrix, fit, predictions, train, train_cv3, EpochLog, FoldLog, MultiDamageLoss, TrainConfig,
    TrainingLog,
};

#[derive(Debug, Error)]
pub enum MdnError {
    #[error("raw output has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("input dimension {found} does not match the network's {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite activation in layer {layer}")]
    NonFiniteActivation { layer: usize },
    #[error("non-finite gradient")]
    NonFiniteGradient,
    #[error("training diverged at epoch {epoch}")]
    DivergedTraining { epoch: usize },
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("training split is empty")]
    EmptyDataset,
    #[error("model format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
