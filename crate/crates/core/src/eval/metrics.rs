//! Localization and uncertainty metrics.

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::mdn::GmmPrediction;
use crate::mfp::{GridField, QueryGrid};
use crate::wavefield::{DamageSet, Point};

/// 0.95 quantile of the chi-square distribution with 2 degrees of freedom.
pub const CHI2_2DOF_95: f64 = 5.991_464_547_107_979;

/// A method's output for one sample: a mixture, or bare location estimates
/// (treated as equally weighted point components).
#[derive(Clone, Debug, PartialEq)]
pub enum Estimate {
    Mixture(GmmPrediction),
    Points(Vec<Point>),
}

impl Estimate {
    fn means(&self) -> Vec<Point> {
        match self {
            Estimate::Mixture(g) => (0..g.num_components()).map(|i| g.mean_point(i)).collect(),
            Estimate::Points(p) => p.clone(),
        }
    }

    fn weight(&self, i: usize) -> f64 {
        match self {
            Estimate::Mixture(g) => g.weights[i],
            Estimate::Points(_) => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    /// Nearest true damage of every predicted component.
    pub component_damage: Vec<usize>,
    /// Selected component of every true damage.
    pub selected: Vec<usize>,
}

fn nearest(from: &Point, to: &[Point]) -> usize {
    let mut best = 0;
    for (j, p) in to.iter().enumerate() {
        if from.distance(p) < from.distance(&to[best]) {
            best = j;
        }
    }
    best
}

/// Assign every predicted mean to its nearest true damage, then select per
/// damage the heaviest assigned component. A damage with no assigned
/// component takes the predicted mean nearest to it. Ties go to the lower
/// index.
pub fn assign(estimate: &Estimate, truth: &DamageSet) -> Result<Assignment, EvalError> {
    let means = estimate.means();
    if means.is_empty() {
        return Err(EvalError::EmptyPrediction);
    }
    if truth.is_empty() {
        return Err(EvalError::EmptyTruth);
    }
    let component_damage: Vec<usize> = means.iter().map(|m| nearest(m, &truth.locations)).collect();
    let selected = truth
        .locations
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let mut pick: Option<usize> = None;
            for (i, &d) in component_damage.iter().enumerate() {
                if d == j && pick.is_none_or(|p| estimate.weight(i) > estimate.weight(p)) {
                    pick = Some(i);
                }
            }
            pick.unwrap_or_else(|| nearest(t, &means))
        })
        .collect();
    Ok(Assignment { component_damage, selected })
}

pub fn assign_components(prediction: &GmmPrediction, truth: &DamageSet) -> Result<Assignment, EvalError> {
    assign(&Estimate::Mixture(prediction.clone()), truth)
}

/// Mean over damages of the distance to the selected estimate.
pub fn sample_error(estimate: &Estimate, truth: &DamageSet) -> Result<f64, EvalError> {
    let a = assign(estimate, truth)?;
    let means = estimate.means();
    let total: f64 = truth.locations.iter().zip(&a.selected).map(|(t, &i)| t.distance(&means[i])).sum();
    Ok(total / truth.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AleSummary {
    pub ale: f64,
    /// Population standard deviation of the per-sample errors.
    pub ale_std: f64,
}

/// Average localization error and the per-sample errors.
pub fn ale(estimates: &[Estimate], truths: &[DamageSet]) -> Result<(AleSummary, Vec<f64>), EvalError> {
    if estimates.len() != truths.len() {
        return Err(EvalError::LengthMismatch { estimates: estimates.len(), truths: truths.len() });
    }
    let errors = estimates.iter().zip(truths).map(|(e, t)| sample_error(e, t)).collect::<Result<Vec<_>, _>>()?;
    let n = errors.len().max(1) as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    Ok((AleSummary { ale: mean, ale_std: var.sqrt() }, errors))
}

/// Squared Mahalanobis distance of `y` from component `i`.
pub fn mahalanobis2(prediction: &GmmPrediction, i: usize, y: &Point) -> f64 {
    let (m, v) = (prediction.means[i], prediction.variances[i]);
    (y.x - m[0]).powi(2) / v[0] + (y.y - m[1]).powi(2) / v[1]
}

/// Fraction of true damages inside the 95% ellipse of their selected
/// component.
pub fn ci95_coverage(predictions: &[GmmPrediction], truths: &[DamageSet]) -> Result<f64, EvalError> {
    if predictions.len() != truths.len() {
        return Err(EvalError::LengthMismatch { estimates: predictions.len(), truths: truths.len() });
    }
    let (mut hit, mut total) = (0usize, 0usize);
    for (g, t) in predictions.iter().zip(truths) {
        let a = assign_components(g, t)?;
        for (y, &i) in t.locations.iter().zip(&a.selected) {
            total += 1;
            if mahalanobis2(g, i, y) <= CHI2_2DOF_95 {
                hit += 1;
            }
        }
    }
    Ok(if total == 0 { 0.0 } else { hit as f64 / total as f64 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncertaintySummary {
    /// Largest variance over samples, components and axes, m².
    pub max_component_variance: f64,
    /// Mean over samples of the mixture log-density, averaged over each
    /// sample's damages.
    pub mean_loglik: f64,
}

pub fn uncertainty_summaries(predictions: &[GmmPrediction], truths: &[DamageSet]) -> Result<UncertaintySummary, EvalError> {
    if predictions.len() != truths.len() {
        return Err(EvalError::LengthMismatch { estimates: predictions.len(), truths: truths.len() });
    }
    let max_component_variance = predictions.iter().map(GmmPrediction::max_variance).fold(f64::NEG_INFINITY, f64::max);
    let n = predictions.len().max(1) as f64;
    let mean_loglik = predictions.iter().zip(truths).map(|(g, t)| -crate::mdn::nll(g, &t.locations)).sum::<f64>() / n;
    Ok(UncertaintySummary { max_component_variance, mean_loglik })
}

/// Mixture density sampled on the query grid.
pub fn density_raster(prediction: &GmmPrediction, grid: QueryGrid) -> GridField {
    GridField { grid, values: (0..grid.len()).map(|p| prediction.density(&grid.point(p))).collect() }
}
