//! Trained model files.
//!
//! `model.json` carries the network spec, training config, standardization
//! and training log, plus the name and shape of every parameter tensor.
//! `params.f64` holds the tensors as little-endian doubles in that order.

use std::fs;
use std::path::Path;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::gmm::GmmPrediction;
use super::network::{Network, NetworkSpec, TensorInfo};
use super::train::{predictions, TrainConfig, TrainingLog};
use super::MdnError;
use crate::wavefield::Standardization;

pub const MODEL_FORMAT: &str = "wavelocate-model/1";

#[derive(Clone, Debug, PartialEq)]
pub struct ModelArtifact {
    pub network: Network,
    pub config: TrainConfig,
    pub standardization: Standardization,
    pub log: TrainingLog,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelJson {
    format: String,
    spec: NetworkSpec,
    train_config: TrainConfig,
    standardization: Standardization,
    log: TrainingLog,
    tensors: Vec<TensorInfo>,
}

impl ModelArtifact {
    pub fn new(network: Network, config: TrainConfig, standardization: Standardization, log: TrainingLog) -> Self {
        Self { network, config, standardization, log }
    }

    pub fn spec(&self) -> &NetworkSpec {
        self.network.spec()
    }

    /// Mixture prediction for one raw (unstandardized) signal vector.
    pub fn predict(&self, raw: &[f64]) -> Result<GmmPrediction, MdnError> {
        let dim = self.spec().input_dim;
        if raw.len() != dim {
            return Err(MdnError::DimensionMismatch { expected: dim, found: raw.len() });
        }
        let mut x = raw.to_vec();
        self.standardization.apply(&mut x);
        let row = ArrayView2::from_shape((1, dim), &x).expect("row shape");
        Ok(predictions(&self.network, row)?.remove(0))
    }

    /// Predictions for rows that are already standardized.
    pub fn predict_standardized(&self, rows: ArrayView2<'_, f64>) -> Result<Vec<GmmPrediction>, MdnError> {
        predictions(&self.network, rows)
    }

    pub fn save(&self, dir: &Path) -> Result<(), MdnError> {
        fs::create_dir_all(dir)?;
        let json = ModelJson {
            format: MODEL_FORMAT.to_string(),
            spec: self.spec().clone(),
            train_config: self.config.clone(),
            standardization: self.standardization.clone(),
            log: self.log.clone(),
            tensors: self.spec().tensors(),
        };
        fs::write(dir.join("model.json"), serde_json::to_vec_pretty(&json)?)?;
        let bytes: Vec<u8> = self.network.params().iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(dir.join("params.f64"), bytes)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, MdnError> {
        let json: ModelJson = serde_json::from_slice(&fs::read(dir.join("model.json"))?)?;
        if json.format != MODEL_FORMAT {
            return Err(MdnError::Format(format!("unsupported model format {:?}, expected {MODEL_FORMAT:?}", json.format)));
        }
        if json.tensors != json.spec.tensors() {
            return Err(MdnError::Format("tensor list does not match the network spec".into()));
        }
        if json.standardization.dim() != json.spec.input_dim {
            return Err(MdnError::Format(format!(
                "standardization has {} features, network expects {}",
                json.standardization.dim(),
                json.spec.input_dim
            )));
        }
        let bytes = fs::read(dir.join("params.f64"))?;
        if bytes.len() != 8 * json.spec.num_params() {
            return Err(MdnError::Format(format!("params.f64 holds {} bytes, expected {}", bytes.len(), 8 * json.spec.num_params())));
        }
        let params = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        let network = Network::from_params(json.spec, params)?;
        Ok(Self { network, config: json.train_config, standardization: json.standardization, log: json.log })
    }
}
