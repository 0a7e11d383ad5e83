//! Run configuration file (TOML).
//!
//! Every field has a default, so an empty file describes the desk-scale
//! scenario. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wavelocate::dispersion::{FrequencyGrid, Mode, PlateMaterial};
use wavelocate::eval::{Method, SweepSpec, SweepTemplate};
use wavelocate::mdn::{Activation, MultiDamageLoss, NetworkSpec, TrainConfig};
use wavelocate::mfp::QueryGrid;
use wavelocate::wavefield::{random_sensors, DamagePolicy, Excitation, Plate, Point, Scenario, SensorArray, Snr, SplitCounts, UncertaintySpec};

use crate::error::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; `--seed` overrides it.
    pub seed: Option<u64>,
    pub plate: PlateSection,
    pub sensors: SensorSection,
    pub frequencies: FrequencySection,
    pub uncertainty: UncertaintySection,
    pub network: NetworkSection,
    pub training: TrainingSection,
    pub mfp: MfpSection,
    pub sweep: SweepSection,
    pub io: IoSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlateSection {
    pub length: f64,
    pub width: f64,
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    pub density: f64,
    pub thickness: f64,
    pub damages: DamagePolicy,
}

impl Default for PlateSection {
    fn default() -> Self {
        let m = PlateMaterial::default();
        let p = Plate::default();
        Self {
            length: p.length,
            width: p.width,
            youngs_modulus: m.youngs_modulus,
            poisson_ratio: m.poisson_ratio,
            density: m.density,
            thickness: m.thickness,
            damages: DamagePolicy::Fixed { count: 2 },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorSection {
    /// Number of sensors drawn uniformly on the plate from the master seed.
    pub count: usize,
    /// Explicit positions; overrides `count` when present.
    pub positions: Option<Vec<[f64; 2]>>,
}

impl Default for SensorSection {
    fn default() -> Self {
        Self { count: 8, positions: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrequencySection {
    pub num_points: usize,
    pub f_min: f64,
    pub f_max: f64,
    pub modes: Vec<Mode>,
    pub excitation: Excitation,
}

impl Default for FrequencySection {
    fn default() -> Self {
        Self {
            num_points: 256,
            f_min: -500e3,
            f_max: 500e3,
            modes: vec![Mode::S0, Mode::A0],
            excitation: Excitation::Impulse,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UncertaintySection {
    pub w_distort: f64,
    pub snr_db: Snr,
}

impl Default for UncertaintySection {
    fn default() -> Self {
        Self { w_distort: 0.15, snr_db: Snr::Db(5.0) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub hidden: Vec<usize>,
    pub num_components: usize,
    pub activation: Activation,
    pub dropout_prob: f64,
    pub variance_floor: f64,
}

impl Default for NetworkSection {
    fn default() -> Self {
        let s = NetworkSpec::desk(1);
        Self {
            hidden: s.hidden,
            num_components: s.num_components,
            activation: s.activation,
            dropout_prob: s.dropout_prob,
            variance_floor: s.variance_floor,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub train_samples: usize,
    pub val_samples: usize,
    pub test_samples: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Defaults to the master seed.
    pub seed: Option<u64>,
    pub clip_norm: f64,
    pub weight_decay: f64,
    pub init_variance: f64,
    pub multi_damage: MultiDamageLoss,
    pub keep_best: bool,
    pub cv_dropouts: Vec<f64>,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            train_samples: 1000,
            val_samples: 200,
            test_samples: 100,
            learning_rate: t.learning_rate,
            beta1: t.beta1,
            beta2: t.beta2,
            epsilon: t.epsilon,
            batch_size: t.batch_size,
            epochs: t.epochs,
            seed: None,
            clip_norm: t.clip_norm,
            weight_decay: t.weight_decay,
            init_variance: t.init_variance,
            multi_damage: t.multi_damage,
            keep_best: t.keep_best,
            cv_dropouts: t.cv_dropouts,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MfpSection {
    pub nx: usize,
    pub ny: usize,
    /// Above this size the model spectra are recomputed instead of cached.
    pub cache_limit_mb: usize,
}

impl Default for MfpSection {
    fn default() -> Self {
        Self { nx: 50, ny: 50, cache_limit_mb: 512 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub snr_db: Vec<Snr>,
    pub w_distort: Vec<f64>,
    pub num_damages: Vec<usize>,
    pub methods: Vec<Method>,
    pub components_from_damages: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        let s = SweepSpec::default();
        Self {
            snr_db: s.snr_db,
            w_distort: s.w_distort,
            num_damages: s.num_damages,
            methods: s.methods,
            components_from_damages: s.components_from_damages,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoSection {
    /// Dataset directory read by `train` and `eval` when `--dataset` is absent.
    pub dataset: Option<PathBuf>,
    /// Model directory read by `eval` when `--model` is absent.
    pub model: Option<PathBuf>,
    /// Output location used when `--out` is absent.
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Config("a master seed is required: set `seed` or pass --seed".into()))
    }

    pub fn material(&self) -> PlateMaterial {
        PlateMaterial {
            youngs_modulus: self.plate.youngs_modulus,
            poisson_ratio: self.plate.poisson_ratio,
            density: self.plate.density,
            thickness: self.plate.thickness,
        }
    }

    pub fn plate(&self) -> Plate {
        Plate { length: self.plate.length, width: self.plate.width }
    }

    pub fn frequency_grid(&self) -> Result<FrequencyGrid, CliError> {
        let f = &self.frequencies;
        Ok(FrequencyGrid::new(f.num_points, f.f_min, f.f_max)?)
    }

    pub fn sensors(&self, seed: u64) -> Result<SensorArray, CliError> {
        let plate = self.plate();
        Ok(match &self.sensors.positions {
            Some(p) => SensorArray::new(p.iter().map(|&[x, y]| Point::new(x, y)).collect(), &plate)?,
            None => random_sensors(self.sensors.count, &plate, seed)?,
        })
    }

    pub fn scenario(&self, seed: u64) -> Result<Scenario, CliError> {
        self.material().validate()?;
        let s = Scenario {
            plate: self.plate(),
            material: self.material(),
            grid: self.frequency_grid()?,
            modes: self.frequencies.modes.clone(),
            excitation: self.frequencies.excitation,
            sensors: self.sensors(seed)?,
            uncertainty: UncertaintySpec { w_distort: self.uncertainty.w_distort, snr: self.uncertainty.snr_db },
            damage_policy: self.plate.damages,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn counts(&self) -> SplitCounts {
        SplitCounts { train: self.training.train_samples, val: self.training.val_samples, test: self.training.test_samples }
    }

    pub fn network_spec(&self, input_dim: usize) -> Result<NetworkSpec, CliError> {
        let n = &self.network;
        let spec = NetworkSpec {
            input_dim,
            hidden: n.hidden.clone(),
            num_components: n.num_components,
            activation: n.activation,
            dropout_prob: n.dropout_prob,
            variance_floor: n.variance_floor,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn train_config(&self, master_seed: u64) -> Result<TrainConfig, CliError> {
        let t = &self.training;
        let c = TrainConfig {
            learning_rate: t.learning_rate,
            beta1: t.beta1,
            beta2: t.beta2,
            epsilon: t.epsilon,
            batch_size: t.batch_size,
            epochs: t.epochs,
            seed: t.seed.unwrap_or(master_seed),
            clip_norm: t.clip_norm,
            weight_decay: t.weight_decay,
            init_variance: t.init_variance,
            multi_damage: t.multi_damage,
            keep_best: t.keep_best,
            cv_dropouts: t.cv_dropouts.clone(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn query_grid(&self) -> Result<QueryGrid, CliError> {
        Ok(QueryGrid::new(self.plate.length, self.plate.width, self.mfp.nx, self.mfp.ny)?)
    }

    pub fn cache_limit_bytes(&self) -> usize {
        self.mfp.cache_limit_mb.saturating_mul(1 << 20)
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec, CliError> {
        let s = &self.sweep;
        let spec = SweepSpec {
            snr_db: s.snr_db.clone(),
            w_distort: s.w_distort.clone(),
            num_damages: s.num_damages.clone(),
            methods: s.methods.clone(),
            counts: self.counts(),
            components_from_damages: s.components_from_damages,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn sweep_template(&self, seed: u64) -> Result<SweepTemplate, CliError> {
        let scenario = self.scenario(seed)?;
        Ok(SweepTemplate {
            network: self.network_spec(scenario.signal_len())?,
            scenario,
            training: self.train_config(seed)?,
            query_grid: self.query_grid()?,
            cache_limit_bytes: self.cache_limit_bytes(),
        })
    }
}
