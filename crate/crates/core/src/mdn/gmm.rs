//! Mixture output layer: mapping from the raw output vector to a diagonal
//! Gaussian mixture over plate coordinates, its likelihood, and the
//! gradient of the negative log-likelihood with respect to the raw output.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::MdnError;
use crate::wavefield::Point;

/// Spatial dimension of the target.
pub const DIM: usize = 2;

/// Raw output length for `k` components: `k·d` means, `k·d` log-variances,
/// `k` weight logits.
pub fn raw_len(k: usize) -> usize {
    (2 * DIM + 1) * k
}

/// Diagonal-covariance Gaussian mixture over `(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmmPrediction {
    pub means: Vec<[f64; DIM]>,
    pub variances: Vec<[f64; DIM]>,
    pub weights: Vec<f64>,
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

impl GmmPrediction {
    pub fn num_components(&self) -> usize {
        self.weights.len()
    }

    /// `log N(y; μ_i, Σ_i)` for component `i`.
    pub fn component_log_density(&self, i: usize, y: &Point) -> f64 {
        let (m, v) = (self.means[i], self.variances[i]);
        let q = (y.x - m[0]).powi(2) / v[0] + (y.y - m[1]).powi(2) / v[1];
        -0.5 * q - 0.5 * (v[0].ln() + v[1].ln()) - (2.0 * PI).ln()
    }

    pub fn log_density(&self, y: &Point) -> f64 {
        let terms: Vec<f64> =
            (0..self.num_components()).map(|i| self.weights[i].ln() + self.component_log_density(i, y)).collect();
        log_sum_exp(&terms)
    }

    pub fn density(&self, y: &Point) -> f64 {
        self.log_density(y).exp()
    }

    pub fn max_variance(&self) -> f64 {
        self.variances.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the heaviest component, lowest index on ties.
    pub fn dominant(&self) -> usize {
        let mut best = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w > self.weights[best] {
                best = i;
            }
        }
        best
    }

    pub fn mean_point(&self, i: usize) -> Point {
        Point::new(self.means[i][0], self.means[i][1])
    }
}

/// Map a raw output vector `z = [z^μ; z^σ; z^π]` to mixture parameters.
/// Variances are `exp(z^σ)` clamped below at `variance_floor`; weights are
/// the softmax of `z^π`.
pub fn activate(z: &[f64], k: usize, variance_floor: f64) -> Result<GmmPrediction, MdnError> {
    if k == 0 || z.len() != raw_len(k) {
        return Err(MdnError::LengthMismatch { expected: raw_len(k), found: z.len() });
    }
    let (zm, rest) = z.split_at(DIM * k);
    let (zs, zp) = rest.split_at(DIM * k);
    let means = zm.chunks_exact(DIM).map(|c| [c[0], c[1]]).collect();
    let variances = zs.chunks_exact(DIM).map(|c| [c[0].exp().max(variance_floor), c[1].exp().max(variance_floor)]).collect();
    let m = zp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = zp.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    let weights = e.into_iter().map(|v| v / s).collect();
    Ok(GmmPrediction { means, variances, weights })
}

/// Negative log-likelihood of the mixture, averaged over the target
/// locations. An empty target set scores zero.
pub fn nll(prediction: &GmmPrediction, targets: &[Point]) -> f64 {
    if targets.is_empty() {
        return 0.0;
    }
    -targets.iter().map(|y| prediction.log_density(y)).sum::<f64>() / targets.len() as f64
}

/// Loss of one sample and its gradient with respect to the raw output,
/// written to `dz` (overwritten). The gradient is taken through the clamp,
/// so floored variances receive zero gradient.
pub fn nll_with_gradient(z: &[f64], k: usize, variance_floor: f64, targets: &[Point], dz: &mut [f64]) -> Result<f64, MdnError> {
    let g = activate(z, k, variance_floor)?;
    dz.iter_mut().for_each(|v| *v = 0.0);
    if targets.is_empty() {
        return Ok(0.0);
    }
    let scale = 1.0 / targets.len() as f64;
    let mut loss = 0.0;
    let mut logp = vec![0.0; k];
    for y in targets {
        for (i, lp) in logp.iter_mut().enumerate() {
            *lp = g.weights[i].ln() + g.component_log_density(i, y);
        }
        let lse = log_sum_exp(&logp);
        loss -= lse * scale;
        for i in 0..k {
            let r = (logp[i] - lse).exp();
            let yv = [y.x, y.y];
            for d in 0..DIM {
                let diff = yv[d] - g.means[i][d];
                let v = g.variances[i][d];
                dz[DIM * i + d] -= scale * r * diff / v;
                if z[DIM * k + DIM * i + d].exp() >= variance_floor {
                    dz[DIM * k + DIM * i + d] += scale * r * 0.5 * (1.0 - diff * diff / v);
                }
            }
            dz[2 * DIM * k + i] += scale * (g.weights[i] - r);
        }
    }
    Ok(loss)
}
