//! Monte Carlo dataset generation.
//!
//! Each sample draws damage locations, one distortion factor `α` shared by
//! all pairs and modes, superposes the per-damage scatter spectra on every
//! sensor pair, converts to the time domain and adds sensor noise. Samples
//! own independent RNG streams keyed by `(seed, split, index)`, so generation
//! runs in parallel and is reproducible bit for bit. Features are finally
//! standardized with statistics of the training split only.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geometry::{scatter_path, DamageSet, Plate, Point, Quadrant, SensorArray};
use super::noise::{add_awgn, mean_power, realized_snr_db, sample_alpha, UncertaintySpec};
use super::synth::{Excitation, SpectralTransform, WaveModel, R_FLOOR};
use super::WavefieldError;
use crate::dispersion::{solve_rayleigh_lamb, FrequencyGrid, Mode, PlateMaterial};
use crate::rng::{self, tag};

/// How many damages each sample carries. Multiple damages always occupy
/// distinct plate quadrants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DamagePolicy {
    Fixed { count: usize },
    /// Uniform over `1..=max`.
    UpTo { max: usize },
}

impl Default for DamagePolicy {
    fn default() -> Self {
        DamagePolicy::Fixed { count: 1 }
    }
}

impl DamagePolicy {
    pub fn max_damages(&self) -> usize {
        match *self {
            DamagePolicy::Fixed { count } => count,
            DamagePolicy::UpTo { max } => max,
        }
    }

    fn validate(&self) -> Result<(), WavefieldError> {
        let n = self.max_damages();
        if !(1..=4).contains(&n) {
            return Err(WavefieldError::InvalidScenario(format!("damage count must lie in 1..=4, got {n}")));
        }
        Ok(())
    }

    fn draw_count<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match *self {
            DamagePolicy::Fixed { count } => count,
            DamagePolicy::UpTo { max } => rng.random_range(1..=max),
        }
    }
}

/// Everything needed to synthesize data for one plate and sensor layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub plate: Plate,
    pub material: PlateMaterial,
    pub grid: FrequencyGrid,
    pub modes: Vec<Mode>,
    pub excitation: Excitation,
    pub sensors: SensorArray,
    pub uncertainty: UncertaintySpec,
    pub damage_policy: DamagePolicy,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), WavefieldError> {
        self.plate.validate()?;
        self.material.validate()?;
        self.grid.validate()?;
        if !self.grid.is_symmetric() {
            return Err(WavefieldError::InvalidScenario(
                "time-domain synthesis needs an even, zero-centred frequency grid".into(),
            ));
        }
        if self.modes.is_empty() {
            return Err(WavefieldError::InvalidScenario("at least one Lamb mode is required".into()));
        }
        self.excitation.validate()?;
        self.uncertainty.validate()?;
        self.damage_policy.validate()?;
        // Re-validate sensors against the plate.
        SensorArray::new(self.sensors.positions.clone(), &self.plate)?;
        Ok(())
    }

    pub fn wave_model(&self) -> Result<WaveModel, WavefieldError> {
        let table = solve_rayleigh_lamb(&self.material, self.grid, &self.modes)?;
        WaveModel::new(table, self.excitation)
    }

    pub fn num_pairs(&self) -> usize {
        self.sensors.num_pairs()
    }

    pub fn num_bins(&self) -> usize {
        self.grid.num_points
    }

    /// Flattened input length `M·Q_t`.
    pub fn signal_len(&self) -> usize {
        self.num_pairs() * self.num_bins()
    }

    pub fn max_damages(&self) -> usize {
        self.damage_policy.max_damages()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitCounts {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            Split::Train => tag::TRAIN,
            Split::Val => tag::VAL,
            Split::Test => tag::TEST,
        }
    }
}

/// One multistatic measurement: `M × Q_t` signals stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub signals: Vec<f64>,
    pub truth: DamageSet,
    pub alpha: f64,
    /// Realized SNR; `+∞` for noiseless samples.
    pub snr_db: f64,
}

/// Per-feature affine map to zero mean and unit standard deviation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardization {
    /// Population statistics of `rows`. Constant features keep unit scale.
    pub fn fit<'a>(rows: impl Iterator<Item = &'a [f64]> + Clone, dim: usize) -> Self {
        let n = rows.clone().count();
        if n == 0 {
            return Self::identity(dim);
        }
        let mut mean = vec![0.0; dim];
        for r in rows.clone() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n as f64).sqrt();
                if sd > 1e-300 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mean: vec![0.0; dim], std: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &mut [f64]) {
        for ((v, m), s) in x.iter_mut().zip(&self.mean).zip(&self.std) {
            *v = (*v - m) / s;
        }
    }

    pub fn invert(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).zip(&self.std).map(|((v, m), s)| v * s + m).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub scenario: Scenario,
    pub seed: u64,
    pub train: Vec<Sample>,
    pub val: Vec<Sample>,
    pub test: Vec<Sample>,
    /// Fitted on `train`, already applied to every split.
    pub standardization: Standardization,
}

impl Dataset {
    pub fn split(&self, split: Split) -> &[Sample] {
        match split {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }

    pub fn counts(&self) -> SplitCounts {
        SplitCounts { train: self.train.len(), val: self.val.len(), test: self.test.len() }
    }

    /// Signals of a sample before standardization.
    pub fn raw_signals(&self, sample: &Sample) -> Vec<f64> {
        self.standardization.invert(&sample.signals)
    }

    /// Per-pair spectra of a sample's (noisy) raw signals, centred layout.
    pub fn spectra(&self, sample: &Sample, transform: &SpectralTransform) -> Vec<Vec<Complex64>> {
        let raw = self.raw_signals(sample);
        raw.chunks(self.scenario.num_bins()).map(|row| transform.to_frequency_domain(row)).collect()
    }

    /// Mean realized SNR over finite-SNR samples of a split.
    pub fn mean_snr_db(&self, split: Split) -> Option<f64> {
        let v: Vec<f64> = self.split(split).iter().map(|s| s.snr_db).filter(|s| s.is_finite()).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Draws damage locations in distinct quadrants, rejecting draws that come
/// within `R_FLOOR` of any scatter path singularity.
pub fn draw_damages<R: Rng + ?Sized>(
    plate: &Plate,
    sensors: &SensorArray,
    policy: DamagePolicy,
    rng: &mut R,
) -> DamageSet {
    let count = policy.draw_count(rng);
    let mut quads = Quadrant::ALL;
    quads.shuffle(rng);
    let locations = quads[..count]
        .iter()
        .map(|&q| loop {
            let p = plate.sample_in_quadrant(q, rng);
            let ok = (0..sensors.num_pairs()).all(|m| {
                let (tx, rx) = sensors.pair_positions(m);
                scatter_path(&tx, &rx, &p) > R_FLOOR
            });
            if ok {
                break p;
            }
        })
        .collect();
    DamageSet::new(locations)
}

/// Noisy, unstandardized time-domain signals for the given damages and `α`.
pub fn synthesize(
    model: &WaveModel,
    transform: &SpectralTransform,
    sensors: &SensorArray,
    damages: &[Point],
    alpha: f64,
) -> Result<Vec<f64>, WavefieldError> {
    let spectra = model.pair_spectra(sensors, damages, alpha)?;
    let mut out = Vec::with_capacity(spectra.len() * model.num_bins());
    for s in &spectra {
        out.extend(transform.to_time_domain(s)?);
    }
    Ok(out)
}

fn generate_raw(
    scenario: &Scenario,
    model: &WaveModel,
    transform: &SpectralTransform,
    seed: u64,
    split: Split,
    index: usize,
) -> Result<Sample, WavefieldError> {
    let mut r = rng::stream(seed, split.tag(), index as u64);
    let truth = draw_damages(&scenario.plate, &scenario.sensors, scenario.damage_policy, &mut r);
    let alpha = sample_alpha(scenario.uncertainty.w_distort, &mut r);
    let clean = synthesize(model, transform, &scenario.sensors, &truth.locations, alpha)?;
    let (signals, snr_db) = if scenario.uncertainty.snr.is_finite() {
        let noisy = add_awgn(&clean, scenario.uncertainty.snr, &mut r)?;
        let snr = realized_snr_db(&clean, &noisy);
        (noisy, snr)
    } else {
        debug_assert!(mean_power(&clean) > 0.0);
        (clean, f64::INFINITY)
    };
    Ok(Sample { signals, truth, alpha, snr_db })
}

/// Generates train/val/test splits and standardizes them on the train split.
pub fn generate_dataset(scenario: &Scenario, counts: SplitCounts, seed: u64) -> Result<Dataset, WavefieldError> {
    scenario.validate()?;
    let model = scenario.wave_model()?;
    let transform = SpectralTransform::new(scenario.num_bins());
    let gen = |split: Split, n: usize| -> Result<Vec<Sample>, WavefieldError> {
        (0..n).into_par_iter().map(|i| generate_raw(scenario, &model, &transform, seed, split, i)).collect()
    };
    let mut train = gen(Split::Train, counts.train)?;
    let mut val = gen(Split::Val, counts.val)?;
    let mut test = gen(Split::Test, counts.test)?;
    let standardization = Standardization::fit(train.iter().map(|s| s.signals.as_slice()), scenario.signal_len());
    for s in train.iter_mut().chain(val.iter_mut()).chain(test.iter_mut()) {
        standardization.apply(&mut s.signals);
    }
    Ok(Dataset { scenario: scenario.clone(), seed, train, val, test, standardization })
}

/// Sensors drawn uniformly at random from the scenario seed.
pub fn random_sensors(count: usize, plate: &Plate, seed: u64) -> Result<SensorArray, WavefieldError> {
    SensorArray::random(count, plate, &mut rng::stream(seed, tag::SENSORS, 0))
}
