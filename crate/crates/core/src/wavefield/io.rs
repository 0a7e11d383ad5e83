//! Dataset directory format.
//!
//! `manifest.json` holds the scenario, split sizes, standardization vectors
//! and per-sample metadata. `{train,val,test}.f64` are raw little-endian
//! doubles, sample-major: the `M × Q_t` signal rows, then `2·K_max` truth
//! coordinates (`x, y` per damage, NaN in unused slots), then `K_true`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Sample, Scenario, Split, SplitCounts, Standardization};
use super::geometry::{DamageSet, Point};
use super::WavefieldError;

pub const DATASET_FORMAT: &str = "wavelocate-ds/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleMeta {
    pub alpha: f64,
    /// `None` when no noise was added.
    pub snr_db: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitMeta {
    pub train: Vec<SampleMeta>,
    pub val: Vec<SampleMeta>,
    pub test: Vec<SampleMeta>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: String,
    pub seed: u64,
    pub scenario: Scenario,
    /// Truncation interval of the distortion factor.
    pub alpha_bounds: [f64; 2],
    pub counts: SplitCounts,
    pub signal_rows: usize,
    pub signal_cols: usize,
    pub max_damages: usize,
    pub standardization: Standardization,
    pub samples: SplitMeta,
}

impl Manifest {
    pub fn record_len(&self) -> usize {
        self.signal_rows * self.signal_cols + 2 * self.max_damages + 1
    }
}

fn meta(samples: &[Sample]) -> Vec<SampleMeta> {
    samples
        .iter()
        .map(|s| SampleMeta { alpha: s.alpha, snr_db: s.snr_db.is_finite().then_some(s.snr_db) })
        .collect()
}

pub fn manifest(dataset: &Dataset) -> Manifest {
    let (lo, hi) = dataset.scenario.uncertainty.alpha_bounds();
    Manifest {
        format: DATASET_FORMAT.to_string(),
        seed: dataset.seed,
        scenario: dataset.scenario.clone(),
        alpha_bounds: [lo, hi],
        counts: dataset.counts(),
        signal_rows: dataset.scenario.num_pairs(),
        signal_cols: dataset.scenario.num_bins(),
        max_damages: dataset.scenario.max_damages(),
        standardization: dataset.standardization.clone(),
        samples: SplitMeta { train: meta(&dataset.train), val: meta(&dataset.val), test: meta(&dataset.test) },
    }
}

fn encode(samples: &[Sample], max_damages: usize) -> Vec<u8> {
    let mut out = Vec::new();
    for s in samples {
        for v in &s.signals {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for j in 0..max_damages {
            let (x, y) = s.truth.locations.get(j).map_or((f64::NAN, f64::NAN), |p| (p.x, p.y));
            out.extend_from_slice(&x.to_le_bytes());
            out.extend_from_slice(&y.to_le_bytes());
        }
        out.extend_from_slice(&(s.truth.len() as f64).to_le_bytes());
    }
    out
}

fn decode(bytes: &[u8], manifest: &Manifest, metas: &[SampleMeta], name: &str) -> Result<Vec<Sample>, WavefieldError> {
    let rec = manifest.record_len();
    if bytes.len() != rec * 8 * metas.len() {
        return Err(WavefieldError::Format(format!(
            "{name}.f64 holds {} bytes, expected {} ({} samples x {rec} doubles)",
            bytes.len(),
            rec * 8 * metas.len(),
            metas.len()
        )));
    }
    let values: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    let sig = manifest.signal_rows * manifest.signal_cols;
    values
        .chunks_exact(rec)
        .zip(metas)
        .map(|(r, m)| {
            let k = r[rec - 1];
            if !(k >= 0.0 && k <= manifest.max_damages as f64 && k.fract() == 0.0) {
                return Err(WavefieldError::Format(format!("{name}.f64: invalid damage count {k}")));
            }
            let locations = (0..k as usize).map(|j| Point::new(r[sig + 2 * j], r[sig + 2 * j + 1])).collect();
            Ok(Sample {
                signals: r[..sig].to_vec(),
                truth: DamageSet::new(locations),
                alpha: m.alpha,
                snr_db: m.snr_db.unwrap_or(f64::INFINITY),
            })
        })
        .collect()
}

pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<(), WavefieldError> {
    fs::create_dir_all(dir)?;
    let m = manifest(dataset);
    fs::write(dir.join("manifest.json"), serde_json::to_vec_pretty(&m)?)?;
    for split in Split::ALL {
        fs::write(dir.join(format!("{}.f64", split.name())), encode(dataset.split(split), m.max_damages))?;
    }
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, WavefieldError> {
    let m: Manifest = serde_json::from_slice(&fs::read(dir.join("manifest.json"))?)?;
    if m.format != DATASET_FORMAT {
        return Err(WavefieldError::Format(format!("unsupported dataset format {:?}, expected {DATASET_FORMAT:?}", m.format)));
    }
    Ok(m)
}

pub fn read_dataset(dir: &Path) -> Result<Dataset, WavefieldError> {
    let m = read_manifest(dir)?;
    let load = |split: Split, metas: &[SampleMeta]| -> Result<Vec<Sample>, WavefieldError> {
        let bytes = fs::read(dir.join(format!("{}.f64", split.name())))?;
        decode(&bytes, &m, metas, split.name())
    };
    let train = load(Split::Train, &m.samples.train)?;
    let val = load(Split::Val, &m.samples.val)?;
    let test = load(Split::Test, &m.samples.test)?;
    Ok(Dataset { scenario: m.scenario, seed: m.seed, train, val, test, standardization: m.standardization })
}
