//! Lamb-wave dispersion: wavenumbers of the fundamental symmetric (S0) and
//! antisymmetric (A0) modes of a free isotropic plate.
//!
//! Roots of the Rayleigh-Lamb characteristic equations are bracketed in phase
//! velocity and refined by bisection. Each branch is traced upward in
//! frequency, warm-starting every bin from the previous root, so the returned
//! curves are continuous. Negative frequencies receive the odd extension
//! `κ(−ω) = −κ(ω)` and the zero bin is pinned to `κ = 0`.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DispersionError {
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no {mode} root bracketed at {frequency_hz:.3} Hz")]
    NoRootFound { mode: Mode, frequency_hz: f64 },
    #[error("{mode} branch jumped at {frequency_hz:.3} Hz (step {step:.4e} rad/m vs limit {limit:.4e})")]
    BranchJump { mode: Mode, frequency_hz: f64, step: f64, limit: f64 },
    #[error("degenerate table: wavenumber is locally constant at bin {bin}")]
    DegenerateTable { bin: usize },
    #[error("mode index {0} out of range")]
    UnknownMode(usize),
}

/// Elastic constants and thickness of an isotropic plate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateMaterial {
    /// Pa
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    /// kg/m³
    pub density: f64,
    /// m
    pub thickness: f64,
}

impl Default for PlateMaterial {
    /// 3 mm aluminium.
    fn default() -> Self {
        Self { youngs_modulus: 69e9, poisson_ratio: 0.33, density: 2700.0, thickness: 3e-3 }
    }
}

impl PlateMaterial {
    pub fn validate(&self) -> Result<(), DispersionError> {
        let positive = [
            ("youngs_modulus", self.youngs_modulus),
            ("density", self.density),
            ("thickness", self.thickness),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(DispersionError::InvalidMaterial(format!("{name} must be positive, got {v}")));
            }
        }
        let nu = self.poisson_ratio;
        if !(nu.is_finite() && nu > 0.0 && nu < 0.5) {
            return Err(DispersionError::InvalidMaterial(format!(
                "poisson_ratio must lie in (0, 0.5), got {nu}"
            )));
        }
        Ok(())
    }

    /// Bulk longitudinal speed.
    pub fn longitudinal_speed(&self) -> f64 {
        let (e, nu, rho) = (self.youngs_modulus, self.poisson_ratio, self.density);
        (e * (1.0 - nu) / ((1.0 + nu) * (1.0 - 2.0 * nu) * rho)).sqrt()
    }

    /// Bulk shear speed.
    pub fn shear_speed(&self) -> f64 {
        (self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio) * self.density)).sqrt()
    }

    /// Low-frequency limit of the S0 phase velocity, `sqrt(E / (ρ(1−ν²)))`.
    pub fn plate_speed(&self) -> f64 {
        let nu = self.poisson_ratio;
        (self.youngs_modulus / (self.density * (1.0 - nu * nu))).sqrt()
    }

    /// Viktorov's approximation of the Rayleigh wave speed.
    pub fn rayleigh_speed(&self) -> f64 {
        let nu = self.poisson_ratio;
        self.shear_speed() * (0.87 + 1.12 * nu) / (1.0 + nu)
    }

    fn flexural_rigidity(&self) -> f64 {
        let nu = self.poisson_ratio;
        self.youngs_modulus * self.thickness.powi(3) / (12.0 * (1.0 - nu * nu))
    }
}

/// Equally spaced frequency bins `f_q = f_min + q·Δf`, `Δf = (f_max − f_min)/Q`.
///
/// `f_max` is excluded, matching the periodic layout of a length-`Q` DFT. A
/// grid with `f_min = −f_max` and even `Q` is symmetric: bin `Q/2` is DC,
/// bins `Q/2 ± j` pair up and bin 0 is the unpaired Nyquist bin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyGrid {
    pub num_points: usize,
    /// Hz
    pub f_min: f64,
    /// Hz
    pub f_max: f64,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        Self { num_points: 1000, f_min: -500e3, f_max: 500e3 }
    }
}

impl FrequencyGrid {
    pub fn new(num_points: usize, f_min: f64, f_max: f64) -> Result<Self, DispersionError> {
        let grid = Self { num_points, f_min, f_max };
        grid.validate()?;
        Ok(grid)
    }

    /// Symmetric grid over `[−f_max, f_max)`.
    pub fn symmetric(num_points: usize, f_max: f64) -> Result<Self, DispersionError> {
        Self::new(num_points, -f_max, f_max)
    }

    pub fn validate(&self) -> Result<(), DispersionError> {
        if self.num_points < 2 {
            return Err(DispersionError::InvalidGrid(format!("need at least 2 points, got {}", self.num_points)));
        }
        if !(self.f_min.is_finite() && self.f_max.is_finite() && self.f_max > self.f_min) {
            return Err(DispersionError::InvalidGrid(format!(
                "need finite f_min < f_max, got [{}, {}]",
                self.f_min, self.f_max
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.num_points
    }

    pub fn is_empty(&self) -> bool {
        self.num_points == 0
    }

    /// Bin spacing in Hz.
    pub fn spacing(&self) -> f64 {
        (self.f_max - self.f_min) / self.num_points as f64
    }

    pub fn is_symmetric(&self) -> bool {
        self.num_points % 2 == 0 && self.f_min == -self.f_max
    }

    /// Index of the DC bin of a symmetric grid.
    pub fn zero_bin(&self) -> Option<usize> {
        self.is_symmetric().then_some(self.num_points / 2)
    }

    /// Bin holding `−f_q`, if it exists on the grid.
    pub fn mirror_bin(&self, q: usize) -> Option<usize> {
        if !self.is_symmetric() || q == 0 {
            return None;
        }
        Some(self.num_points - q)
    }

    pub fn frequency(&self, q: usize) -> f64 {
        if self.is_symmetric() {
            // Integer offsets keep f(−q) == −f(q) bit-exactly.
            (q as i64 - (self.num_points / 2) as i64) as f64 * self.spacing()
        } else {
            self.f_min + q as f64 * self.spacing()
        }
    }

    /// Angular frequency of bin `q`, rad/s.
    pub fn omega(&self, q: usize) -> f64 {
        2.0 * PI * self.frequency(q)
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.num_points).map(|q| self.omega(q)).collect()
    }

    /// Sample interval of the matching time-domain signal.
    pub fn time_step(&self) -> f64 {
        1.0 / (self.f_max - self.f_min)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    S0,
    A0,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::S0 => f.write_str("S0"),
            Mode::A0 => f.write_str("A0"),
        }
    }
}

/// One wavenumber branch sampled on the table's grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeBranch {
    pub name: String,
    /// rad/m, one value per frequency bin
    pub kappa: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionTable {
    pub grid: FrequencyGrid,
    pub modes: Vec<ModeBranch>,
}

impl DispersionTable {
    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn num_bins(&self) -> usize {
        self.grid.num_points
    }

    pub fn kappa(&self, mode: usize) -> &[f64] {
        &self.modes[mode].kappa
    }

    /// Copy with every wavenumber multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            grid: self.grid,
            modes: self
                .modes
                .iter()
                .map(|m| ModeBranch { name: m.name.clone(), kappa: m.kappa.iter().map(|k| k * alpha).collect() })
                .collect(),
        }
    }

    /// CSV with header `omega_rad_s,kappa_<mode>,...` and one row per bin.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "omega_rad_s")?;
        for m in &self.modes {
            write!(out, ",kappa_{}", m.name)?;
        }
        writeln!(out)?;
        for q in 0..self.num_bins() {
            write!(out, "{:.16e}", self.grid.omega(q))?;
            for m in &self.modes {
                write!(out, ",{:.16e}", m.kappa[q])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Closed-form dispersion laws used as test doubles for the solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticModel {
    /// `κ = ω / c`
    Nondispersive { speed: f64 },
    /// `κ = a·sign(ω)·|ω|^b`
    PowerLaw { a: f64, b: f64 },
}

pub fn analytic_dispersion(model: AnalyticModel, grid: FrequencyGrid) -> Result<DispersionTable, DispersionError> {
    grid.validate()?;
    let (name, f): (&str, Box<dyn Fn(f64) -> f64>) = match model {
        AnalyticModel::Nondispersive { speed } => {
            if !(speed.is_finite() && speed > 0.0) {
                return Err(DispersionError::InvalidParameter(format!("speed must be positive, got {speed}")));
            }
            ("nondispersive", Box::new(move |w: f64| w / speed))
        }
        AnalyticModel::PowerLaw { a, b } => {
            if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
                return Err(DispersionError::InvalidParameter(format!(
                    "power law needs a > 0 and b > 0, got a = {a}, b = {b}"
                )));
            }
            ("power_law", Box::new(move |w: f64| if w == 0.0 { 0.0 } else { a * w.signum() * w.abs().powf(b) }))
        }
    };
    let kappa = grid.omegas().into_iter().map(f).collect();
    Ok(DispersionTable { grid, modes: vec![ModeBranch { name: name.to_string(), kappa }] })
}

// cos(√x·h), continued to cosh for x < 0
fn cos_branch(x2: f64, h: f64) -> f64 {
    if x2 >= 0.0 {
        (x2.sqrt() * h).cos()
    } else {
        ((-x2).sqrt() * h).cosh()
    }
}

// sin(√x·h)/√x, continued to sinh(√−x·h)/√−x for x < 0
fn sinc_branch(x2: f64, h: f64) -> f64 {
    if x2 > 0.0 {
        let s = x2.sqrt();
        (s * h).sin() / s
    } else if x2 < 0.0 {
        let s = (-x2).sqrt();
        (s * h).sinh() / s
    } else {
        h
    }
}

/// The two terms of the real-valued characteristic function for `mode`.
///
/// Symmetric:     (q²−k²)² cos(ph) sin(qh)/q + 4k²p² [sin(ph)/p] cos(qh)
/// Antisymmetric: (q²−k²)² [sin(ph)/p] cos(qh) + 4k²q² cos(ph) [sin(qh)/q]
///
/// with `p² = ω²/c_L² − k²`, `q² = ω²/c_T² − k²` and `h` the half thickness.
/// Dividing out the trivial `p = 0` / `q = 0` factors keeps both forms real
/// and entire for any sign of `p²` and `q²`.
fn characteristic_terms(material: &PlateMaterial, mode: Mode, omega: f64, kappa: f64) -> (f64, f64) {
    let h = 0.5 * material.thickness;
    let k2 = kappa * kappa;
    let p2 = (omega / material.longitudinal_speed()).powi(2) - k2;
    let q2 = (omega / material.shear_speed()).powi(2) - k2;
    let a = (q2 - k2).powi(2);
    match mode {
        Mode::S0 => (a * cos_branch(p2, h) * sinc_branch(q2, h), 4.0 * k2 * p2 * sinc_branch(p2, h) * cos_branch(q2, h)),
        Mode::A0 => (a * sinc_branch(p2, h) * cos_branch(q2, h), 4.0 * k2 * q2 * cos_branch(p2, h) * sinc_branch(q2, h)),
    }
}

/// Characteristic function normalized by the magnitude of its two terms, so
/// it lies in `[−1, 1]` and vanishes exactly on a dispersion branch.
pub fn normalized_residual(material: &PlateMaterial, mode: Mode, omega: f64, kappa: f64) -> f64 {
    let (t1, t2) = characteristic_terms(material, mode, omega, kappa);
    let scale = t1.abs() + t2.abs();
    if scale == 0.0 {
        0.0
    } else {
        (t1 + t2) / scale
    }
}

const BISECTION_RTOL: f64 = 1e-13;
const MAX_STEP_RATIO: f64 = 3.0;

/// Bisection on phase velocity inside a sign-change bracket.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= BISECTION_RTOL * mid {
            break;
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if (fmid < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Widens a bracket around `guess` until the residual changes sign.
fn bracket(f: &impl Fn(f64) -> f64, guess: f64, c_max: f64) -> Option<(f64, f64)> {
    let mut delta = 1e-4;
    while delta < 1.0 {
        let lo = guess * (1.0 - delta);
        let hi = (guess * (1.0 + delta)).min(c_max);
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            return Some((lo, lo));
        }
        if fhi == 0.0 {
            return Some((hi, hi));
        }
        if (flo < 0.0) != (fhi < 0.0) {
            // Pick the sign change nearest the guess so a neighbouring branch
            // entering the window is not preferred.
            return Some(nearest_sign_change(f, lo, hi, guess));
        }
        delta *= 2.0;
    }
    None
}

fn nearest_sign_change(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, guess: f64) -> (f64, f64) {
    const N: usize = 64;
    let xs: Vec<f64> = (0..=N).map(|i| lo + (hi - lo) * i as f64 / N as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = (lo, hi);
    let mut best_dist = f64::INFINITY;
    for i in 0..N {
        if (vals[i] < 0.0) != (vals[i + 1] < 0.0) || vals[i] == 0.0 {
            let centre = 0.5 * (xs[i] + xs[i + 1]);
            let dist = (centre - guess).abs();
            if dist < best_dist {
                best_dist = dist;
                best = (xs[i], xs[i + 1]);
            }
        }
    }
    best
}

fn initial_phase_velocity(material: &PlateMaterial, mode: Mode, omega: f64) -> f64 {
    match mode {
        Mode::S0 => material.plate_speed(),
        Mode::A0 => {
            // Flexural (Kirchhoff) plate limit.
            let c = omega.sqrt() * (material.flexural_rigidity() / (material.density * material.thickness)).powf(0.25);
            c.min(0.99 * material.rayleigh_speed())
        }
    }
}

fn trace_branch(material: &PlateMaterial, mode: Mode, omegas: &[f64]) -> Result<Vec<f64>, DispersionError> {
    let c_max = 1.5 * material.longitudinal_speed();
    let mut kappas = Vec::with_capacity(omegas.len());
    let mut steps: Vec<f64> = Vec::new();
    let mut guess = None;
    for &omega in omegas {
        let g = guess.unwrap_or_else(|| initial_phase_velocity(material, mode, omega));
        let f = |c: f64| normalized_residual(material, mode, omega, omega / c);
        let (lo, hi) = bracket(&f, g, c_max)
            .ok_or(DispersionError::NoRootFound { mode, frequency_hz: omega / (2.0 * PI) })?;
        let c = if lo == hi { lo } else { bisect(f, lo, hi) };
        let kappa = omega / c;
        if let Some(&prev) = kappas.last() {
            let step: f64 = kappa - prev;
            if steps.len() >= 4 {
                let limit = MAX_STEP_RATIO * median(&steps[steps.len() - 4..]);
                if step.abs() > limit {
                    return Err(DispersionError::BranchJump { mode, frequency_hz: omega / (2.0 * PI), step, limit });
                }
            }
            steps.push(step.abs());
        }
        kappas.push(kappa);
        guess = Some(c);
    }
    Ok(kappas)
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Solves the Rayleigh-Lamb equations for the requested modes on every bin.
pub fn solve_rayleigh_lamb(
    material: &PlateMaterial,
    grid: FrequencyGrid,
    modes: &[Mode],
) -> Result<DispersionTable, DispersionError> {
    material.validate()?;
    grid.validate()?;
    // Distinct positive |ω|, ascending, so each branch is traced once.
    let mut magnitudes: Vec<f64> = grid.omegas().into_iter().map(f64::abs).filter(|w| *w > 0.0).collect();
    magnitudes.sort_by(f64::total_cmp);
    magnitudes.dedup();

    let mut branches = Vec::with_capacity(modes.len());
    for &mode in modes {
        let positive = trace_branch(material, mode, &magnitudes)?;
        let kappa = grid
            .omegas()
            .into_iter()
            .map(|w| {
                if w == 0.0 {
                    return 0.0;
                }
                let i = magnitudes.binary_search_by(|m| m.total_cmp(&w.abs())).expect("magnitude present");
                w.signum() * positive[i]
            })
            .collect();
        branches.push(ModeBranch { name: mode.to_string(), kappa });
    }
    Ok(DispersionTable { grid, modes: branches })
}

/// Group velocity `∂ω/∂κ` by central differences (one-sided at the ends).
pub fn group_velocity(table: &DispersionTable, mode: usize) -> Result<Vec<f64>, DispersionError> {
    let branch = table.modes.get(mode).ok_or(DispersionError::UnknownMode(mode))?;
    let n = table.num_bins();
    if n < 3 {
        return Err(DispersionError::InvalidGrid(format!("group velocity needs at least 3 bins, got {n}")));
    }
    let omega = table.grid.omegas();
    let k = &branch.kappa;
    (0..n)
        .map(|q| {
            let (a, b) = match q {
                0 => (0, 1),
                _ if q == n - 1 => (n - 2, n - 1),
                _ => (q - 1, q + 1),
            };
            let dk = k[b] - k[a];
            if dk == 0.0 {
                Err(DispersionError::DegenerateTable { bin: q })
            } else {
                Ok((omega[b] - omega[a]) / dk)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk_grid() -> FrequencyGrid {
        FrequencyGrid::symmetric(256, 500e3).unwrap()
    }

    #[test]
    fn aluminium_bulk_speeds() {
        let m = PlateMaterial::default();
        assert!((m.shear_speed() - 3099.57).abs() < 0.1);
        assert!((m.longitudinal_speed() - 6153.39).abs() < 0.1);
        assert!((m.plate_speed() - 5355.25).abs() < 0.1);
    }

    #[test]
    fn rejects_bad_material() {
        let m = PlateMaterial { poisson_ratio: 0.7, ..Default::default() };
        let err = solve_rayleigh_lamb(&m, desk_grid(), &[Mode::S0]).unwrap_err();
        assert!(matches!(err, DispersionError::InvalidMaterial(ref s) if s.contains("poisson_ratio")));
        let m = PlateMaterial { thickness: 0.0, ..Default::default() };
        assert!(matches!(m.validate(), Err(DispersionError::InvalidMaterial(_))));
    }

    #[test]
    fn grid_layout() {
        let g = desk_grid();
        assert_eq!(g.zero_bin(), Some(128));
        assert_eq!(g.frequency(128), 0.0);
        assert_eq!(g.frequency(0), -500e3);
        assert_eq!(g.frequency(129), 3906.25);
        assert_eq!(g.mirror_bin(100), Some(156));
        assert_eq!(g.mirror_bin(0), None);
        assert!((g.time_step() - 1e-6).abs() < 1e-18);
        assert!(FrequencyGrid::new(1, -1.0, 1.0).is_err());
        assert!(FrequencyGrid::new(8, 1.0, 1.0).is_err());
    }

    #[test]
    fn nondispersive_values() {
        let g = FrequencyGrid::symmetric(256, 500e3).unwrap();
        let t = analytic_dispersion(AnalyticModel::Nondispersive { speed: 1000.0 }, g).unwrap();
        // bin with f = 100 kHz exactly: 100e3 / 3906.25 = 25.6, pick a grid with an exact bin instead
        let g2 = FrequencyGrid::symmetric(10, 500e3).unwrap();
        let t2 = analytic_dispersion(AnalyticModel::Nondispersive { speed: 1000.0 }, g2).unwrap();
        assert_eq!(g2.frequency(6), 100e3);
        assert!((t2.kappa(0)[6] - 628.3185307179587).abs() < 1e-9);
        assert_eq!(t.kappa(0)[128], 0.0);
        assert_eq!(t2.kappa(0)[5], 0.0);
    }

    #[test]
    fn power_law_identity() {
        let g = desk_grid();
        let a = analytic_dispersion(AnalyticModel::PowerLaw { a: 1.0, b: 1.0 }, g).unwrap();
        let b = analytic_dispersion(AnalyticModel::Nondispersive { speed: 1.0 }, g).unwrap();
        assert_eq!(a.kappa(0), b.kappa(0));
    }

    #[test]
    fn analytic_rejects_nonpositive() {
        let g = desk_grid();
        assert!(analytic_dispersion(AnalyticModel::Nondispersive { speed: 0.0 }, g).is_err());
        assert!(analytic_dispersion(AnalyticModel::PowerLaw { a: 1.0, b: -1.0 }, g).is_err());
        assert!(analytic_dispersion(AnalyticModel::PowerLaw { a: -1.0, b: 1.0 }, g).is_err());
    }

    #[test]
    fn group_velocity_nondispersive_is_constant() {
        let t = analytic_dispersion(AnalyticModel::Nondispersive { speed: 2500.0 }, desk_grid()).unwrap();
        for v in group_velocity(&t, 0).unwrap() {
            assert!((v - 2500.0).abs() < 2500.0 * 1e-9, "{v}");
        }
    }

    #[test]
    fn group_velocity_power_law_half() {
        let g = desk_grid();
        let t = analytic_dispersion(AnalyticModel::PowerLaw { a: 1.0, b: 0.5 }, g).unwrap();
        let vg = group_velocity(&t, 0).unwrap();
        for q in 138..255 {
            let expected = 2.0 * g.omega(q).sqrt();
            assert!((vg[q] - expected).abs() < 1e-2 * expected, "bin {q}: {} vs {expected}", vg[q]);
        }
    }

    #[test]
    fn group_velocity_degenerate() {
        let g = desk_grid();
        let t = DispersionTable { grid: g, modes: vec![ModeBranch { name: "flat".into(), kappa: vec![1.0; 256] }] };
        assert!(matches!(group_velocity(&t, 0), Err(DispersionError::DegenerateTable { bin: 0 })));
        assert!(matches!(group_velocity(&t, 3), Err(DispersionError::UnknownMode(3))));
    }

    #[test]
    fn solver_odd_symmetry_and_zero_bin() {
        let g = desk_grid();
        let t = solve_rayleigh_lamb(&PlateMaterial::default(), g, &[Mode::S0, Mode::A0]).unwrap();
        for m in 0..2 {
            let k = t.kappa(m);
            assert_eq!(k[128], 0.0);
            for q in 1..256 {
                assert_eq!(k[g.mirror_bin(q).unwrap()], -k[q]);
            }
            // Nyquist bin carries the negative branch value.
            assert!(k[0] < 0.0);
        }
    }

    #[test]
    fn solver_orders_modes() {
        let t = solve_rayleigh_lamb(&PlateMaterial::default(), desk_grid(), &[Mode::S0, Mode::A0]).unwrap();
        // A0 is slower than S0 so its wavenumber is larger at every positive bin.
        for q in 129..256 {
            assert!(t.kappa(1)[q] > t.kappa(0)[q]);
        }
    }

    #[test]
    fn csv_layout() {
        let t = solve_rayleigh_lamb(&PlateMaterial::default(), FrequencyGrid::symmetric(16, 500e3).unwrap(), &[Mode::S0, Mode::A0])
            .unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "omega_rad_s,kappa_S0,kappa_A0");
        assert_eq!(lines.len(), 17);
        let row: Vec<f64> = lines[9].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(row[0], t.grid.omega(8));
        assert_eq!(row[1], t.kappa(0)[8]);
    }
}
