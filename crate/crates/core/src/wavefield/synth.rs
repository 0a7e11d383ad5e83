//! Frequency-domain scatter synthesis and conversion to the time domain.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::geometry::{scatter_path, Point, SensorArray};
use super::WavefieldError;
use crate::dispersion::{DispersionTable, FrequencyGrid};

/// Paths shorter than this are rejected (the amplitude has a `1/√r` pole).
pub const R_FLOOR: f64 = 1e-3;

/// Spectral shaping applied on top of the propagation model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Excitation {
    /// Raw band-limited impulse response.
    #[default]
    Impulse,
    /// Gaussian window in |f| centred on `center_hz` with standard deviation `width_hz`.
    Gaussian { center_hz: f64, width_hz: f64 },
}

impl Excitation {
    pub fn validate(&self) -> Result<(), WavefieldError> {
        if let Excitation::Gaussian { center_hz, width_hz } = *self {
            if !(center_hz.is_finite() && center_hz >= 0.0 && width_hz.is_finite() && width_hz > 0.0) {
                return Err(WavefieldError::InvalidScenario(format!(
                    "gaussian excitation needs center >= 0 and width > 0, got {center_hz}, {width_hz}"
                )));
            }
        }
        Ok(())
    }

    pub fn weight(&self, frequency: f64) -> f64 {
        match *self {
            Excitation::Impulse => 1.0,
            Excitation::Gaussian { center_hz, width_hz } => {
                let z = (frequency.abs() - center_hz) / width_hz;
                (-0.5 * z * z).exp()
            }
        }
    }
}

/// Baseline-subtracted scatter model: a dispersion table plus excitation.
///
/// `X(ω) = W(ω) Σ_n (α|κ_n(ω)| r)^{-1/2} exp(−j α κ_n(ω) r)` on every bin
/// except DC and the unpaired Nyquist bin, which are zero. The odd symmetry
/// of `κ` makes the spectrum conjugate-symmetric, so its inverse DFT is real.
#[derive(Clone, Debug)]
pub struct WaveModel {
    table: DispersionTable,
    excitation: Excitation,
    window: Vec<f64>,
}

impl WaveModel {
    pub fn new(table: DispersionTable, excitation: Excitation) -> Result<Self, WavefieldError> {
        excitation.validate()?;
        let grid = table.grid;
        let nyquist = grid.is_symmetric().then_some(0);
        let window = (0..grid.num_points)
            .map(|q| {
                if grid.frequency(q) == 0.0 || Some(q) == nyquist {
                    0.0
                } else {
                    excitation.weight(grid.frequency(q))
                }
            })
            .collect();
        Ok(Self { table, excitation, window })
    }

    pub fn table(&self) -> &DispersionTable {
        &self.table
    }

    pub fn grid(&self) -> FrequencyGrid {
        self.table.grid
    }

    pub fn excitation(&self) -> Excitation {
        self.excitation
    }

    pub fn num_bins(&self) -> usize {
        self.table.num_bins()
    }

    /// Spectrum of a single scatter path of length `r`, accumulated into `out`.
    pub fn accumulate_path(&self, r: f64, alpha: f64, out: &mut [Complex64]) -> Result<(), WavefieldError> {
        if !(r > R_FLOOR) {
            return Err(WavefieldError::PathTooShort { length: r });
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(WavefieldError::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        for (q, (acc, &w)) in out.iter_mut().zip(&self.window).enumerate() {
            if w == 0.0 {
                continue;
            }
            let mut sum = Complex64::new(0.0, 0.0);
            for branch in &self.table.modes {
                let k = alpha * branch.kappa[q];
                if k == 0.0 {
                    return Err(WavefieldError::ZeroWavenumber { bin: q });
                }
                let amp = (k.abs() * r).sqrt().recip();
                sum += Complex64::from_polar(amp, -k * r);
            }
            *acc += w * sum;
        }
        Ok(())
    }

    /// Scatter spectrum for one transmitter/receiver pair and one point damage.
    pub fn scatter_spectrum(&self, tx: &Point, rx: &Point, damage: &Point, alpha: f64) -> Result<Vec<Complex64>, WavefieldError> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.num_bins()];
        self.accumulate_path(scatter_path(tx, rx, damage), alpha, &mut out)?;
        Ok(out)
    }

    /// Superposed spectra of all damages for every sensor pair, pair-major.
    pub fn pair_spectra(&self, sensors: &SensorArray, damages: &[Point], alpha: f64) -> Result<Vec<Vec<Complex64>>, WavefieldError> {
        (0..sensors.num_pairs())
            .map(|m| {
                let (tx, rx) = sensors.pair_positions(m);
                let mut out = vec![Complex64::new(0.0, 0.0); self.num_bins()];
                for d in damages {
                    self.accumulate_path(scatter_path(&tx, &rx, d), alpha, &mut out)?;
                }
                Ok(out)
            })
            .collect()
    }
}

/// Forward/inverse DFT between the centred grid layout and time samples.
///
/// Grid bin `q` holds frequency `(q − Q/2)Δf`; it maps to DFT index
/// `(q − Q/2) mod Q`. The inverse carries the `1/Q` factor.
#[derive(Clone)]
pub struct SpectralTransform {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralTransform").field("len", &self.len).finish()
    }
}

const SYMMETRY_TOL: f64 = 1e-9;

impl SpectralTransform {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { len, forward: planner.plan_fft_forward(len), inverse: planner.plan_fft_inverse(len) }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn half(&self) -> usize {
        self.len / 2
    }

    /// Inverse DFT of a conjugate-symmetric centred spectrum.
    pub fn to_time_domain(&self, spectrum: &[Complex64]) -> Result<Vec<f64>, WavefieldError> {
        let n = self.len;
        if spectrum.len() != n || n % 2 != 0 {
            return Err(WavefieldError::InvalidParameter(format!(
                "spectrum length {} does not match an even transform of length {n}",
                spectrum.len()
            )));
        }
        check_conjugate_symmetry(spectrum)?;
        let h = self.half();
        let mut buf: Vec<Complex64> = (0..n).map(|k| spectrum[(k + h) % n]).collect();
        self.inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        let norm: f64 = buf.iter().map(|c| c.re * c.re).sum::<f64>().sqrt();
        let residue: f64 = buf.iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
        if residue > SYMMETRY_TOL * norm.max(f64::MIN_POSITIVE) && residue > 1e-300 {
            return Err(WavefieldError::NotConjugateSymmetric { deviation: residue / norm });
        }
        Ok(buf.into_iter().map(|c| c.re * scale).collect())
    }

    /// DFT of a real signal, returned in the centred grid layout.
    pub fn to_frequency_domain(&self, signal: &[f64]) -> Vec<Complex64> {
        let n = self.len;
        assert_eq!(signal.len(), n, "signal length must match the transform");
        let mut buf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        let h = self.half();
        (0..n).map(|q| buf[(q + n - h) % n]).collect()
    }

    /// Analytic-signal magnitude (envelope) of the time response of `spectrum`.
    pub fn envelope(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let n = self.len;
        let h = self.half();
        // Keep positive frequencies doubled, drop negative ones.
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (q, &x) in spectrum.iter().enumerate() {
            let k = (q + h) % n;
            if q > h {
                buf[k] = 2.0 * x;
            } else if q == h {
                buf[k] = x;
            }
        }
        self.inverse.process(&mut buf);
        buf.iter().map(|c| c.norm() / n as f64).collect()
    }
}

/// `X(−f) = conj(X(f))` on paired bins and real DC/Nyquist bins, within
/// `1e−9` of the spectrum's peak magnitude.
pub fn check_conjugate_symmetry(spectrum: &[Complex64]) -> Result<(), WavefieldError> {
    let n = spectrum.len();
    let h = n / 2;
    let peak = spectrum.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let tol = SYMMETRY_TOL * peak;
    let mut worst: f64 = spectrum[0].im.abs().max(spectrum[h].im.abs());
    for j in 1..h {
        worst = worst.max((spectrum[h + j] - spectrum[h - j].conj()).norm());
    }
    if worst > tol {
        return Err(WavefieldError::NotConjugateSymmetric { deviation: worst / peak.max(f64::MIN_POSITIVE) });
    }
    Ok(())
}

/// One-shot inverse transform.
pub fn to_time_domain(spectrum: &[Complex64]) -> Result<Vec<f64>, WavefieldError> {
    SpectralTransform::new(spectrum.len()).to_time_domain(spectrum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{analytic_dispersion, AnalyticModel, ModeBranch};
    use crate::rng;
    use rand::Rng;

    fn nondispersive(c: f64, q: usize) -> WaveModel {
        let g = FrequencyGrid::symmetric(q, 500e3).unwrap();
        WaveModel::new(analytic_dispersion(AnalyticModel::Nondispersive { speed: c }, g).unwrap(), Excitation::Impulse).unwrap()
    }

    #[test]
    fn single_mode_substitution() {
        // κ = 100 rad/m on one bin, α = 1, r = 1 m.
        let g = FrequencyGrid::symmetric(8, 500e3).unwrap();
        let mut kappa: Vec<f64> = g.omegas().iter().map(|w| w / 1e4).collect();
        kappa[5] = 100.0;
        kappa[3] = -100.0;
        let model = WaveModel::new(
            DispersionTable { grid: g, modes: vec![ModeBranch { name: "m".into(), kappa }] },
            Excitation::Impulse,
        )
        .unwrap();
        let mut out = vec![Complex64::new(0.0, 0.0); 8];
        model.accumulate_path(1.0, 1.0, &mut out).unwrap();
        assert!((out[5].norm() - 0.1).abs() < 1e-15);
        let expected = Complex64::from_polar(0.1, -100.0);
        assert!((out[5] - expected).norm() < 1e-14);
        assert_eq!(out[4], Complex64::new(0.0, 0.0));
        assert_eq!(out[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn alpha_equals_prescaled_table() {
        let base = nondispersive(3000.0, 64);
        let scaled = WaveModel::new(base.table().scaled(1.1), Excitation::Impulse).unwrap();
        let (tx, rx, d) = (Point::new(0.1, 0.2), Point::new(0.9, 0.4), Point::new(0.5, 0.7));
        let a = base.scatter_spectrum(&tx, &rx, &d, 1.1).unwrap();
        let b = scaled.scatter_spectrum(&tx, &rx, &d, 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn path_floor_and_zero_wavenumber() {
        let m = nondispersive(3000.0, 16);
        let p = Point::new(0.5, 0.5);
        assert!(matches!(m.scatter_spectrum(&p, &p, &p, 1.0), Err(WavefieldError::PathTooShort { .. })));
        let g = FrequencyGrid::symmetric(16, 500e3).unwrap();
        let zero = WaveModel::new(
            DispersionTable { grid: g, modes: vec![ModeBranch { name: "z".into(), kappa: vec![0.0; 16] }] },
            Excitation::Impulse,
        )
        .unwrap();
        let err = zero.scatter_spectrum(&Point::new(0.0, 0.0), &Point::new(1.0, 0.0), &p, 1.0).unwrap_err();
        assert!(matches!(err, WavefieldError::ZeroWavenumber { .. }));
    }

    #[test]
    fn delta_spectrum_is_impulse() {
        let t = SpectralTransform::new(32);
        let x = t.to_time_domain(&vec![Complex64::new(1.0, 0.0); 32]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        for v in &x[1..] {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn forward_inverse_round_trip() {
        let t = SpectralTransform::new(256);
        let mut r = rng::stream(11, 0, 0);
        let x: Vec<f64> = (0..256).map(|_| r.random::<f64>() - 0.5).collect();
        let back = t.to_time_domain(&t.to_frequency_domain(&x)).unwrap();
        let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let err: f64 = x.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(err < 1e-10 * norm);
    }

    #[test]
    fn rejects_asymmetric_spectrum() {
        let mut s = vec![Complex64::new(0.0, 0.0); 16];
        s[9] = Complex64::new(1.0, 0.0);
        assert!(matches!(to_time_domain(&s), Err(WavefieldError::NotConjugateSymmetric { .. })));
    }

    #[test]
    fn nondispersive_delay_peak() {
        // Peak lands at t = r/c.
        let c = 5000.0;
        let m = nondispersive(c, 256);
        let r = 0.6;
        let mut s = vec![Complex64::new(0.0, 0.0); 256];
        m.accumulate_path(r, 1.0, &mut s).unwrap();
        let x = to_time_domain(&s).unwrap();
        let peak = x.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        let expected = r / c / m.grid().time_step();
        assert!((peak as f64 - expected).abs() <= 1.0, "peak {peak} vs {expected}");
    }

    #[test]
    fn gaussian_window_weights() {
        let e = Excitation::Gaussian { center_hz: 100e3, width_hz: 10e3 };
        assert_eq!(e.weight(100e3), 1.0);
        assert_eq!(e.weight(-100e3), 1.0);
        assert!((e.weight(110e3) - (-0.5f64).exp()).abs() < 1e-15);
        assert!(Excitation::Gaussian { center_hz: 0.0, width_hz: 0.0 }.validate().is_err());
    }
}
