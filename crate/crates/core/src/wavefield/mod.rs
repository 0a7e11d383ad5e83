//! Multistatic scatter-signal synthesis under wavenumber distortion and
//! sensor noise, and packaging into standardized datasets.

mod dataset;
mod geometry;
mod io;
mod noise;
mod synth;

use thiserror::Error;

pub use dataset::{
    draw_damages, generate_dataset, random_sensors, synthesize, DamagePolicy, Dataset, Sample, Scenario, Split, SplitCounts,
    Standardization,
};
pub use geometry::{scatter_path, DamageSet, Plate, Point, Quadrant, SensorArray};
pub use io::{manifest, read_dataset, read_manifest, write_dataset, Manifest, SampleMeta, DATASET_FORMAT};
pub use noise::{add_awgn, mean_power, realized_snr_db, sample_alpha, Snr, UncertaintySpec};
pub use synth::{check_conjugate_symmetry, to_time_domain, Excitation, SpectralTransform, WaveModel, R_FLOOR};

use crate::dispersion::DispersionError;

#[derive(Debug, Error)]
pub enum WavefieldError {
    #[error("scatter path of {length} m is at or below the 1 mm floor")]
    PathTooShort { length: f64 },
    #[error("zero wavenumber on nonzero frequency bin {bin}")]
    ZeroWavenumber { bin: usize },
    #[error("signal power is zero; cannot add noise at a finite SNR")]
    ZeroSignal,
    #[error("spectrum is not conjugate-symmetric (relative deviation {deviation:.3e})")]
    NotConjugateSymmetric { deviation: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("dataset format: {0}")]
    Format(String),
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
