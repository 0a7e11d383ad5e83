//! Matched field processing.
//!
//! The ambiguity value at query point `p` is
//!
//! ```text
//! b_p = |Σ_m Σ_q X(ω_q, r_m) Z(ω_q, r_m, p)*|² / Σ_m Σ_q |Z(ω_q, r_m, p)|²
//! ```
//!
//! where `Z` is the undistorted (`α = 1`) scatter model for a point damage at
//! `p`. By Cauchy–Schwarz, noiseless undistorted data generated at a grid
//! point attains the maximum there.

use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::wavefield::{scatter_path, Plate, Point, Quadrant, SensorArray, WavefieldError, WaveModel};

#[derive(Debug, Error)]
pub enum MfpError {
    #[error("invalid query grid: {0}")]
    InvalidGrid(String),
    #[error("model spectra vanish at grid point {point}")]
    EmptyModel { point: usize },
    #[error("data has {found_pairs} pairs x {found_bins} bins, expected {pairs} x {bins}")]
    DataShape { pairs: usize, bins: usize, found_pairs: usize, found_bins: usize },
    #[error("invalid damage count {count}: {reason}")]
    InvalidDamageCount { count: usize, reason: String },
    #[error(transparent)]
    Wavefield(#[from] WavefieldError),
}

/// `N_x × N_y` equally spaced points covering `[0, L] × [0, W]`, row-major
/// (`p = iy·N_x + ix`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryGrid {
    pub length: f64,
    pub width: f64,
    pub nx: usize,
    pub ny: usize,
}

impl QueryGrid {
    pub fn new(length: f64, width: f64, nx: usize, ny: usize) -> Result<Self, MfpError> {
        let g = Self { length, width, nx, ny };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), MfpError> {
        if self.nx < 2 || self.ny < 2 {
            return Err(MfpError::InvalidGrid(format!("need at least 2 points per axis, got {} x {}", self.nx, self.ny)));
        }
        if !(self.length > 0.0 && self.width > 0.0) {
            return Err(MfpError::InvalidGrid(format!("extent must be positive, got {} x {}", self.length, self.width)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        self.length / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        self.width / (self.ny - 1) as f64
    }

    pub fn point(&self, p: usize) -> Point {
        let (ix, iy) = (p % self.nx, p / self.nx);
        // clamp: (n - 1) * dx can round past the edge
        Point::new((ix as f64 * self.dx()).min(self.length), (iy as f64 * self.dy()).min(self.width))
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.len()).map(|p| self.point(p)).collect()
    }

    /// Index of the grid point nearest to `pt`.
    pub fn nearest(&self, pt: &Point) -> usize {
        let ix = ((pt.x / self.dx()).round().max(0.0) as usize).min(self.nx - 1);
        let iy = ((pt.y / self.dy()).round().max(0.0) as usize).min(self.ny - 1);
        iy * self.nx + ix
    }

    pub fn plate(&self) -> Plate {
        Plate { length: self.length, width: self.width }
    }

    /// Length of the cell diagonal, the worst-case quantization distance
    /// for exact-grid estimators.
    pub fn diagonal(&self) -> f64 {
        self.dx().hypot(self.dy())
    }
}

/// Scalar field sampled on a query grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub grid: QueryGrid,
    pub values: Vec<f64>,
}

/// MFP correlation values `b_p`.
pub type AmbiguitySurface = GridField;

impl GridField {
    /// Row-major index of the maximum, ties to the lowest index.
    pub fn argmax(&self) -> usize {
        self.argmax_where(|_| true).expect("non-empty grid")
    }

    fn argmax_where(&self, keep: impl Fn(usize) -> bool) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (p, &v) in self.values.iter().enumerate() {
            if keep(p) && best.is_none_or(|b| v > self.values[b]) {
                best = Some(p);
            }
        }
        best
    }

    pub fn argmax_in(&self, quadrant: Quadrant) -> Option<usize> {
        let plate = self.grid.plate();
        self.argmax_where(|p| plate.quadrant(&self.grid.point(p)) == quadrant)
    }

    /// `x,y,b` rows in grid order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,y,b")?;
        for (p, v) in self.values.iter().enumerate() {
            let pt = self.grid.point(p);
            writeln!(out, "{:.16e},{:.16e},{:.16e}", pt.x, pt.y, v)?;
        }
        Ok(())
    }

    /// Binary 16-bit PGM, values min-max scaled to `0..=65535`; image row
    /// `iy` holds grid row `iy`.
    pub fn write_pgm<W: Write>(&self, mut out: W) -> io::Result<()> {
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        write!(out, "P5\n{} {}\n65535\n", self.grid.nx, self.grid.ny)?;
        let mut bytes = Vec::with_capacity(2 * self.values.len());
        for &v in &self.values {
            let level = if span > 0.0 { ((v - lo) / span * 65535.0).round() as u16 } else { 0 };
            bytes.extend_from_slice(&level.to_be_bytes());
        }
        out.write_all(&bytes)
    }
}

/// `Z(ω, r_m, p)`: the undistorted scatter model for a damage at `p`.
pub fn model_spectrum(model: &WaveModel, tx: &Point, rx: &Point, p: &Point) -> Result<Vec<Complex64>, MfpError> {
    Ok(model.scatter_spectrum(tx, rx, p, 1.0)?)
}

/// Model spectra for every grid point and pair.
///
/// Only positive-frequency bins are kept: the model is conjugate-symmetric
/// and vanishes at DC and Nyquist, so the mirrored bins follow by
/// conjugation. The full cache holds `N_x·N_y·M·Q/2` complex values; above
/// `cache_limit_bytes` spectra are recomputed per evaluation instead.
#[derive(Debug)]
pub struct ModelBank {
    model: WaveModel,
    sensors: SensorArray,
    grid: QueryGrid,
    /// Positive-frequency bins with nonzero model weight.
    bins: Vec<usize>,
    mirrors: Vec<usize>,
    cache: Option<Vec<Complex64>>,
    /// `Σ_m Σ_q |Z|²` per grid point.
    energy: Vec<f64>,
}

pub const DEFAULT_CACHE_LIMIT_BYTES: usize = 512 << 20;

impl ModelBank {
    pub fn new(model: WaveModel, sensors: SensorArray, grid: QueryGrid, cache_limit_bytes: usize) -> Result<Self, MfpError> {
        grid.validate()?;
        let g = model.grid();
        if !g.is_symmetric() {
            return Err(WavefieldError::InvalidParameter("MFP needs a zero-centred frequency grid".into()).into());
        }
        let zero = g.num_points / 2;
        let bins: Vec<usize> = (zero + 1..g.num_points).collect();
        let mirrors = bins.iter().map(|&q| g.mirror_bin(q).expect("symmetric grid")).collect();
        let mut bank = Self { model, sensors, grid, bins, mirrors, cache: None, energy: Vec::new() };
        let per_point = bank.sensors.num_pairs() * bank.bins.len();
        let bytes = grid.len() * per_point * std::mem::size_of::<Complex64>();
        let spectra: Vec<Result<Vec<Complex64>, MfpError>> =
            (0..grid.len()).into_par_iter().map(|p| bank.point_spectra(p)).collect();
        let mut energy = Vec::with_capacity(grid.len());
        let mut cache = (bytes <= cache_limit_bytes).then(|| Vec::with_capacity(grid.len() * per_point));
        for (p, s) in spectra.into_iter().enumerate() {
            let s = s?;
            let e = 2.0 * s.iter().map(|z| z.norm_sqr()).sum::<f64>();
            if e == 0.0 {
                return Err(MfpError::EmptyModel { point: p });
            }
            energy.push(e);
            if let Some(c) = cache.as_mut() {
                c.extend(s);
            }
        }
        if cache.is_none() {
            log::info!("MFP model cache would need {} MiB; streaming spectra instead", bytes >> 20);
        }
        bank.cache = cache;
        bank.energy = energy;
        Ok(bank)
    }

    pub fn grid(&self) -> QueryGrid {
        self.grid
    }

    pub fn model(&self) -> &WaveModel {
        &self.model
    }

    pub fn sensors(&self) -> &SensorArray {
        &self.sensors
    }

    pub fn is_cached(&self) -> bool {
        self.cache.is_some()
    }

    /// Positive-bin model spectra of grid point `p`, pair-major.
    fn point_spectra(&self, p: usize) -> Result<Vec<Complex64>, MfpError> {
        let pt = self.grid.point(p);
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.model.num_bins()];
        let mut out = Vec::with_capacity(self.sensors.num_pairs() * self.bins.len());
        for m in 0..self.sensors.num_pairs() {
            let (tx, rx) = self.sensors.pair_positions(m);
            scratch.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            self.model.accumulate_path(scatter_path(&tx, &rx, &pt), 1.0, &mut scratch)?;
            out.extend(self.bins.iter().map(|&q| scratch[q]));
        }
        Ok(out)
    }

    fn correlate(&self, data: &[Vec<Complex64>], z: &[Complex64]) -> Complex64 {
        let nb = self.bins.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, x) in data.iter().enumerate() {
            let zm = &z[m * nb..(m + 1) * nb];
            for ((&q, &qm), &zq) in self.bins.iter().zip(&self.mirrors).zip(zm) {
                // Z(−ω)* = Z(ω)
                acc += x[q] * zq.conj() + x[qm] * zq;
            }
        }
        acc
    }

    /// Ambiguity surface for per-pair data spectra in the centred layout.
    pub fn ambiguity(&self, data: &[Vec<Complex64>]) -> Result<AmbiguitySurface, MfpError> {
        let (pairs, bins) = (self.sensors.num_pairs(), self.model.num_bins());
        if data.len() != pairs || data.iter().any(|x| x.len() != bins) {
            return Err(MfpError::DataShape {
                pairs,
                bins,
                found_pairs: data.len(),
                found_bins: data.first().map_or(0, Vec::len),
            });
        }
        let per_point = pairs * self.bins.len();
        let values = (0..self.grid.len())
            .into_par_iter()
            .map(|p| {
                let corr = match &self.cache {
                    Some(c) => self.correlate(data, &c[p * per_point..(p + 1) * per_point]),
                    None => self.correlate(data, &self.point_spectra(p)?),
                };
                Ok(corr.norm_sqr() / self.energy[p])
            })
            .collect::<Result<Vec<f64>, MfpError>>()?;
        Ok(GridField { grid: self.grid, values })
    }
}

/// One-shot ambiguity surface (builds a throwaway model bank).
pub fn ambiguity(data: &[Vec<Complex64>], model: &WaveModel, sensors: &SensorArray, grid: QueryGrid) -> Result<AmbiguitySurface, MfpError> {
    ModelBank::new(model.clone(), sensors.clone(), grid, DEFAULT_CACHE_LIMIT_BYTES)?.ambiguity(data)
}

/// Damage location estimates from an ambiguity surface.
///
/// A single damage takes the global maximum. Several damages take the
/// maximum within each supplied quadrant (the quadrants known to contain a
/// damage), in the order given.
pub fn localize(surface: &AmbiguitySurface, num_damages: usize, quadrants: &[Quadrant]) -> Result<Vec<Point>, MfpError> {
    if !(1..=4).contains(&num_damages) {
        return Err(MfpError::InvalidDamageCount { count: num_damages, reason: "must lie in 1..=4".into() });
    }
    if num_damages == 1 {
        return Ok(vec![surface.grid.point(surface.argmax())]);
    }
    if quadrants.len() != num_damages {
        return Err(MfpError::InvalidDamageCount {
            count: num_damages,
            reason: format!("{} quadrants supplied", quadrants.len()),
        });
    }
    quadrants
        .iter()
        .map(|&q| {
            surface
                .argmax_in(q)
                .map(|p| surface.grid.point(p))
                .ok_or_else(|| MfpError::InvalidDamageCount { count: num_damages, reason: format!("quadrant {} is empty", q.0) })
        })
        .collect()
}
