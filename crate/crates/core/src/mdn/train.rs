//! Mini-batch Adam on the mean mixture negative log-likelihood.

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::artifact::ModelArtifact;
use super::gmm::{activate, nll, nll_with_gradient, GmmPrediction};
use super::network::{ForwardMode, Network, NetworkSpec};
use super::MdnError;
use crate::rng::{stream, tag, StreamRng};
use crate::wavefield::{Dataset, Point, Sample};

/// Training target for samples with several damages.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiDamageLoss {
    /// Mixture NLL averaged over every true location of the sample.
    #[default]
    Average,
    /// Only the first listed damage is scored.
    First,
}

impl MultiDamageLoss {
    pub fn targets<'a>(&self, sample: &'a Sample) -> &'a [Point] {
        let all = &sample.truth.locations[..];
        match self {
            MultiDamageLoss::Average => all,
            MultiDamageLoss::First => &all[..all.len().min(1)],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Global gradient-norm clip; 0 disables clipping.
    pub clip_norm: f64,
    /// L2 penalty added to the gradient of every parameter before the Adam
    /// update.
    pub weight_decay: f64,
    /// Variance every component starts from, m².
    pub init_variance: f64,
    pub multi_damage: MultiDamageLoss,
    /// Return the parameters of the epoch with the lowest validation NLL
    /// instead of the last epoch.
    pub keep_best: bool,
    /// Dropout probabilities compared by 3-fold cross-validation. Empty means
    /// only the network's own dropout probability.
    pub cv_dropouts: Vec<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 32,
            epochs: 200,
            seed: 0,
            clip_norm: 10.0,
            weight_decay: 0.0,
            init_variance: 0.05,
            multi_damage: MultiDamageLoss::Average,
            keep_best: false,
            cv_dropouts: Vec::new(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), MdnError> {
        let bad = |m: String| Err(MdnError::InvalidConfig(m));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be non-negative, got {}", self.learning_rate));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return bad(format!("{name} must lie in [0, 1), got {b}"));
            }
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if !(self.clip_norm >= 0.0) || !(self.weight_decay >= 0.0) {
            return bad("clip_norm and weight_decay must be non-negative".into());
        }
        if !(self.init_variance > 0.0) {
            return bad(format!("init_variance must be positive, got {}", self.init_variance));
        }
        if let Some(p) = self.cv_dropouts.iter().find(|p| !(0.0..1.0).contains(*p)) {
            return bad(format!("cv_dropouts entries must lie in [0, 1), got {p}"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    /// 0 is the untrained network.
    pub epoch: usize,
    /// Mean dropout-mode batch loss over the epoch (full inference pass at epoch 0).
    pub train_nll: f64,
    pub val_nll: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldLog {
    pub dropout_prob: f64,
    pub fold: usize,
    pub val_nll: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochLog>,
    pub folds: Vec<FoldLog>,
    /// Epoch whose parameters were kept.
    pub selected_epoch: usize,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], cfg: &TrainConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        for ((p, &g), (m, v)) in params.iter_mut().zip(grad).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            let g = g + cfg.weight_decay * *p;
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            *p -= cfg.learning_rate * (*m / c1) / ((*v / c2).sqrt() + cfg.epsilon);
        }
    }
}

/// Rows of standardized signals.
pub fn design_matrix(samples: &[&Sample], dim: usize) -> Result<Array2<f64>, MdnError> {
    let mut x = Array2::zeros((samples.len(), dim));
    for (mut row, s) in x.axis_iter_mut(Axis(0)).zip(samples) {
        if s.signals.len() != dim {
            return Err(MdnError::DimensionMismatch { expected: dim, found: s.signals.len() });
        }
        row.assign(&ndarray::ArrayView1::from(&s.signals[..]));
    }
    Ok(x)
}

/// Mean loss over the batch and its parameter gradient.
pub fn batch_loss_and_gradient(
    net: &Network,
    input: ArrayView2<'_, f64>,
    targets: &[&[Point]],
    mode: ForwardMode<'_, StreamRng>,
) -> Result<(f64, Vec<f64>), MdnError> {
    let (z, cache) = net.forward(input, mode)?;
    let spec = net.spec();
    let n = targets.len() as f64;
    let mut dz = Array2::zeros(z.raw_dim());
    let mut loss = 0.0;
    for ((zr, mut dr), t) in z.axis_iter(Axis(0)).zip(dz.axis_iter_mut(Axis(0))).zip(targets) {
        let d = dr.as_slice_mut().expect("standard layout");
        loss += nll_with_gradient(zr.as_slice().expect("standard layout"), spec.num_components, spec.variance_floor, t, d)?;
        d.iter_mut().for_each(|g| *g /= n);
    }
    let grad = net.backward(&cache, dz.view())?;
    Ok((loss / n, grad))
}

pub fn predictions(net: &Network, input: ArrayView2<'_, f64>) -> Result<Vec<GmmPrediction>, MdnError> {
    let spec = net.spec();
    let z = net.infer(input)?;
    z.axis_iter(Axis(0))
        .map(|r| activate(r.as_slice().expect("standard layout"), spec.num_components, spec.variance_floor))
        .collect()
}

fn mean_nll(net: &Network, x: &Array2<f64>, samples: &[&Sample], loss: MultiDamageLoss) -> Result<f64, MdnError> {
    let preds = predictions(net, x.view())?;
    Ok(preds.iter().zip(samples).map(|(g, s)| nll(g, loss.targets(s))).sum::<f64>() / samples.len().max(1) as f64)
}

fn plate_centre(dataset: &Dataset) -> [f64; 2] {
    [dataset.scenario.plate.length / 2.0, dataset.scenario.plate.width / 2.0]
}

/// Train on `train`, monitoring `val`. Returns the network and per-epoch log.
pub fn fit(
    spec: &NetworkSpec,
    config: &TrainConfig,
    train: &[&Sample],
    val: &[&Sample],
    mean_bias: [f64; 2],
) -> Result<(Network, TrainingLog), MdnError> {
    spec.validate()?;
    config.validate()?;
    if train.is_empty() {
        return Err(MdnError::EmptyDataset);
    }
    let x = design_matrix(train, spec.input_dim)?;
    let xv = design_matrix(val, spec.input_dim)?;
    let targets: Vec<&[Point]> = train.iter().map(|s| config.multi_damage.targets(s)).collect();
    let mut net = Network::init(spec.clone(), &mut stream(config.seed, tag::INIT, 0), mean_bias, config.init_variance)?;
    let mut adam = Adam::new(spec.num_params());
    let mut log = TrainingLog::default();
    let mut best: Option<(f64, Vec<f64>)> = None;

    // epoch 0 scores the initial network; later epochs report the running
    // train-mode batch loss of that epoch
    let mut record = |net: &Network, epoch: usize, running: Option<f64>, log: &mut TrainingLog| -> Result<(), MdnError> {
        let train_nll = match running {
            Some(v) => v,
            None => mean_nll(net, &x, train, config.multi_damage)?,
        };
        let val_nll = if val.is_empty() { None } else { Some(mean_nll(net, &xv, val, config.multi_damage)?) };
        if !train_nll.is_finite() || val_nll.is_some_and(|v| !v.is_finite()) {
            return Err(MdnError::DivergedTraining { epoch });
        }
        log::debug!("epoch {epoch}: train nll {train_nll:.4}, val nll {val_nll:?}");
        log.epochs.push(EpochLog { epoch, train_nll, val_nll });
        if let Some(v) = val_nll.filter(|_| config.keep_best) {
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, net.params().to_vec()));
                log.selected_epoch = epoch;
            }
        }
        Ok(())
    };

    record(&net, 0, None, &mut log)?;
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=config.epochs {
        order.shuffle(&mut stream(config.seed, tag::SHUFFLE, epoch as u64));
        let mut drop_rng = stream(config.seed, tag::DROPOUT, epoch as u64);
        let mut running = 0.0;
        for batch in order.chunks(config.batch_size) {
            let xb = x.select(Axis(0), batch);
            let tb: Vec<&[Point]> = batch.iter().map(|&i| targets[i]).collect();
            let (loss, mut grad) = batch_loss_and_gradient(&net, xb.view(), &tb, ForwardMode::Train(&mut drop_rng))
                .map_err(|e| match e {
                    MdnError::NonFiniteActivation { .. } | MdnError::NonFiniteGradient => MdnError::DivergedTraining { epoch },
                    e => e,
                })?;
            if !loss.is_finite() {
                return Err(MdnError::DivergedTraining { epoch });
            }
            running += loss * batch.len() as f64;
            if config.clip_norm > 0.0 {
                let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
                if norm > config.clip_norm {
                    let s = config.clip_norm / norm;
                    grad.iter_mut().for_each(|g| *g *= s);
                }
            }
            adam.step(net.params_mut(), &grad, config);
        }
        record(&net, epoch, Some(running / train.len() as f64), &mut log)?;
    }
    if let Some((_, params)) = best {
        net.params_mut().copy_from_slice(&params);
    } else {
        log.selected_epoch = config.epochs;
    }
    Ok((net, log))
}

fn check_dims(dataset: &Dataset, spec: &NetworkSpec) -> Result<(), MdnError> {
    let dim = dataset.scenario.signal_len();
    if spec.input_dim != dim {
        return Err(MdnError::DimensionMismatch { expected: spec.input_dim, found: dim });
    }
    Ok(())
}

/// Train on the dataset's training split, validating on its validation split.
pub fn train(dataset: &Dataset, spec: &NetworkSpec, config: &TrainConfig) -> Result<ModelArtifact, MdnError> {
    check_dims(dataset, spec)?;
    let tr: Vec<&Sample> = dataset.train.iter().collect();
    let va: Vec<&Sample> = dataset.val.iter().collect();
    let (net, log) = fit(spec, config, &tr, &va, plate_centre(dataset))?;
    Ok(ModelArtifact::new(net, config.clone(), dataset.standardization.clone(), log))
}

/// 3-fold cross-validation over the candidate dropout probabilities on the
/// training split, then a final fit on the whole training split with the
/// candidate of lowest mean held-out NLL.
pub fn train_cv3(dataset: &Dataset, spec: &NetworkSpec, config: &TrainConfig) -> Result<ModelArtifact, MdnError> {
    check_dims(dataset, spec)?;
    let candidates = if config.cv_dropouts.is_empty() { vec![spec.dropout_prob] } else { config.cv_dropouts.clone() };
    let mut order: Vec<usize> = (0..dataset.train.len()).collect();
    order.shuffle(&mut stream(config.seed, tag::FOLDS, 0));
    let fold_of = |j: usize| j % 3;
    let mut folds = Vec::new();
    let mut best = (f64::INFINITY, spec.dropout_prob);
    for &p in &candidates {
        let s = NetworkSpec { dropout_prob: p, ..spec.clone() };
        let mut total = 0.0;
        for fold in 0..3 {
            let (held, kept): (Vec<_>, Vec<_>) = order.iter().enumerate().partition(|(j, _)| fold_of(*j) == fold);
            let tr: Vec<&Sample> = kept.iter().map(|(_, &i)| &dataset.train[i]).collect();
            let va: Vec<&Sample> = held.iter().map(|(_, &i)| &dataset.train[i]).collect();
            let (net, log) = fit(&s, config, &tr, &va, plate_centre(dataset))?;
            let val_nll = log.epochs.iter().find(|e| e.epoch == log.selected_epoch).and_then(|e| e.val_nll).unwrap_or(f64::NAN);
            drop(net);
            log::info!("cv3 dropout {p}: fold {fold} held-out nll {val_nll:.4}");
            folds.push(FoldLog { dropout_prob: p, fold, val_nll });
            total += val_nll;
        }
        if total / 3.0 < best.0 {
            best = (total / 3.0, p);
        }
    }
    let chosen = NetworkSpec { dropout_prob: best.1, ..spec.clone() };
    let mut artifact = train(dataset, &chosen, config)?;
    artifact.log.folds = folds;
    Ok(artifact)
}
