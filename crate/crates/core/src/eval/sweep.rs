//! Method evaluation on a dataset split, and comparison sweeps over noise,
//! distortion and damage count.

use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{ale, ci95_coverage, uncertainty_summaries, AleSummary, Estimate, UncertaintySummary};
use super::report::{MetricReport, MetricRow};
use super::EvalError;
use crate::mdn::{self, GmmPrediction, ModelArtifact, NetworkSpec, TrainConfig};
use crate::mfp::{localize, AmbiguitySurface, ModelBank, QueryGrid};
use crate::wavefield::{generate_dataset, DamagePolicy, DamageSet, Dataset, Sample, Scenario, Snr, SpectralTransform, Split, SplitCounts};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mdn,
    Mfp,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Mdn => "mdn",
            Method::Mfp => "mfp",
        }
    }
}

/// Metrics of one method on one split.
#[derive(Clone, Debug, PartialEq)]
pub struct MethodEval {
    pub method: Method,
    pub ale: AleSummary,
    pub errors: Vec<f64>,
    /// Mixture methods only.
    pub ci95: Option<f64>,
    pub uncertainty: Option<UncertaintySummary>,
    pub wall_time_s: f64,
}

fn truths(samples: &[Sample]) -> Vec<DamageSet> {
    samples.iter().map(|s| s.truth.clone()).collect()
}

/// MFP on every sample of a split. The locator is told the true damage
/// count and, for several damages, which quadrants hold them. The first
/// `keep_surfaces` ambiguity surfaces are returned.
pub fn evaluate_mfp(dataset: &Dataset, split: Split, bank: &ModelBank, keep_surfaces: usize) -> Result<(MethodEval, Vec<AmbiguitySurface>), EvalError> {
    let start = Instant::now();
    let samples = dataset.split(split);
    let transform = SpectralTransform::new(dataset.scenario.num_bins());
    let plate = dataset.scenario.plate;
    let mut estimates = Vec::with_capacity(samples.len());
    let mut surfaces = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        let surface = bank.ambiguity(&dataset.spectra(s, &transform))?;
        estimates.push(Estimate::Points(localize(&surface, s.truth.len(), &s.truth.quadrants(&plate))?));
        if i < keep_surfaces {
            surfaces.push(surface);
        }
    }
    let (summary, errors) = ale(&estimates, &truths(samples))?;
    let eval = MethodEval { method: Method::Mfp, ale: summary, errors, ci95: None, uncertainty: None, wall_time_s: start.elapsed().as_secs_f64() };
    Ok((eval, surfaces))
}

/// Mixture predictions for a split, standardized with the model's own
/// statistics.
pub fn predict_split(dataset: &Dataset, split: Split, model: &ModelArtifact) -> Result<Vec<GmmPrediction>, EvalError> {
    let samples = dataset.split(split);
    let dim = model.spec().input_dim;
    if dataset.scenario.signal_len() != dim {
        return Err(mdn::MdnError::DimensionMismatch { expected: dim, found: dataset.scenario.signal_len() }.into());
    }
    let same = model.standardization == dataset.standardization;
    let rows: Vec<Vec<f64>> = samples
        .par_iter()
        .map(|s| {
            if same {
                s.signals.clone()
            } else {
                let mut x = dataset.raw_signals(s);
                model.standardization.apply(&mut x);
                x
            }
        })
        .collect();
    let x = Array2::from_shape_vec((rows.len(), dim), rows.concat()).expect("row-major design matrix");
    Ok(model.predict_standardized(x.view())?)
}

/// MDN metrics: ALE, coverage and maximum variance on `split`; mean
/// log-likelihood on the validation split when it is non-empty, else on
/// `split`.
pub fn evaluate_mdn(dataset: &Dataset, split: Split, model: &ModelArtifact) -> Result<(MethodEval, Vec<GmmPrediction>), EvalError> {
    let start = Instant::now();
    let preds = predict_split(dataset, split, model)?;
    let t = truths(dataset.split(split));
    let estimates: Vec<Estimate> = preds.iter().cloned().map(Estimate::Mixture).collect();
    let (summary, errors) = ale(&estimates, &t)?;
    let ci95 = ci95_coverage(&preds, &t)?;
    let mut unc = uncertainty_summaries(&preds, &t)?;
    if split != Split::Val && !dataset.val.is_empty() {
        let vp = predict_split(dataset, Split::Val, model)?;
        unc.mean_loglik = uncertainty_summaries(&vp, &truths(&dataset.val))?.mean_loglik;
    }
    let eval = MethodEval {
        method: Method::Mdn,
        ale: summary,
        errors,
        ci95: Some(ci95),
        uncertainty: Some(unc),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok((eval, preds))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub snr_db: Vec<Snr>,
    pub w_distort: Vec<f64>,
    pub num_damages: Vec<usize>,
    pub methods: Vec<Method>,
    pub counts: SplitCounts,
    /// Give the network one more component than the cell's damage count
    /// instead of the configured component count.
    pub components_from_damages: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            snr_db: vec![Snr::Db(5.0)],
            w_distort: vec![0.15],
            num_damages: vec![2],
            methods: vec![Method::Mdn, Method::Mfp],
            counts: SplitCounts { train: 1000, val: 200, test: 100 },
            components_from_damages: false,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: &str| Err(EvalError::InvalidSweep(m.to_string()));
        if self.snr_db.is_empty() || self.w_distort.is_empty() || self.num_damages.is_empty() {
            return bad("snr_db, w_distort and num_damages must each list at least one value");
        }
        if self.methods.is_empty() {
            return bad("methods must name at least one of mdn, mfp");
        }
        if self.num_damages.iter().any(|k| !(1..=4).contains(k)) {
            return bad("num_damages entries must lie in 1..=4");
        }
        if self.methods.contains(&Method::Mdn) && self.counts.train == 0 {
            return bad("training the network needs a non-empty training split");
        }
        Ok(())
    }

    pub fn num_cells(&self) -> usize {
        self.snr_db.len() * self.w_distort.len() * self.num_damages.len()
    }
}

/// Everything a sweep cell shares: the scenario (its uncertainty and damage
/// policy are overridden per cell), network, training and MFP settings.
#[derive(Clone, Debug)]
pub struct SweepTemplate {
    pub scenario: Scenario,
    pub network: NetworkSpec,
    pub training: TrainConfig,
    pub query_grid: QueryGrid,
    pub cache_limit_bytes: usize,
}

/// Run every cell of the sweep. All cells share the dataset seed so that
/// cells differ only in the swept settings; the network is trained with the
/// template's training seed.
pub fn run_sweep(template: &SweepTemplate, sweep: &SweepSpec, seed: u64) -> Result<MetricReport, EvalError> {
    sweep.validate()?;
    let bank = if sweep.methods.contains(&Method::Mfp) {
        Some(ModelBank::new(template.scenario.wave_model()?, template.scenario.sensors.clone(), template.query_grid, template.cache_limit_bytes)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for &snr in &sweep.snr_db {
        for &w in &sweep.w_distort {
            for &k in &sweep.num_damages {
                let mut scenario = template.scenario.clone();
                scenario.uncertainty.snr = snr;
                scenario.uncertainty.w_distort = w;
                scenario.damage_policy = DamagePolicy::Fixed { count: k };
                log::info!("sweep cell snr {snr} dB, w_distort {w}, {k} damage(s)");
                let dataset = generate_dataset(&scenario, sweep.counts, seed)?;
                let row = |e: &MethodEval| MetricRow::from_eval(snr, w, k, e);
                for &method in &sweep.methods {
                    match method {
                        Method::Mfp => {
                            let (e, _) = evaluate_mfp(&dataset, Split::Test, bank.as_ref().expect("bank built for mfp"), 0)?;
                            rows.push(row(&e));
                        }
                        Method::Mdn => {
                            let start = Instant::now();
                            let mut spec = NetworkSpec { input_dim: scenario.signal_len(), ..template.network.clone() };
                            if sweep.components_from_damages {
                                spec.num_components = k + 1;
                            }
                            let model = mdn::train(&dataset, &spec, &template.training)?;
                            let (mut e, _) = evaluate_mdn(&dataset, Split::Test, &model)?;
                            e.wall_time_s = start.elapsed().as_secs_f64();
                            rows.push(row(&e));
                        }
                    }
                }
            }
        }
    }
    Ok(MetricReport::new(rows))
}
