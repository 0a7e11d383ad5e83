//! Localization metrics and MFP-versus-MDN comparison sweeps.

mod metrics;
mod report;
mod sweep;

use thiserror::Error;

pub use metrics::{
    ale, assign, assign_components, ci95_coverage, density_raster, mahalanobis2, sample_error, uncertainty_summaries, AleSummary,
    Assignment, Estimate, UncertaintySummary, CHI2_2DOF_95,
};
pub use report::{MetricReport, MetricRow, REPORT_NOTES};
pub use sweep::{evaluate_mdn, evaluate_mfp, predict_split, run_sweep, Method, MethodEval, SweepSpec, SweepTemplate};

use crate::mdn::MdnError;
use crate::mfp::MfpError;
use crate::wavefield::WavefieldError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction has no components")]
    EmptyPrediction,
    #[error("sample has no true damage")]
    EmptyTruth,
    #[error("{estimates} estimates for {truths} truths")]
    LengthMismatch { estimates: usize, truths: usize },
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error(transparent)]
    Wavefield(#[from] WavefieldError),
    #[error(transparent)]
    Mfp(#[from] MfpError),
    #[error(transparent)]
    Mdn(#[from] MdnError),
}
