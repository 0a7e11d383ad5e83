//! Environmental and sensor uncertainty: wavenumber distortion and AWGN.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::WavefieldError;

/// Signal-to-noise ratio of the additive sensor noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Snr {
    Infinite,
    Db(f64),
}

impl Snr {
    pub fn db(&self) -> f64 {
        match *self {
            Snr::Infinite => f64::INFINITY,
            Snr::Db(v) => v,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Snr::Db(_))
    }
}

impl fmt::Display for Snr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Snr::Infinite => f.write_str("infinite"),
            Snr::Db(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Snr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Snr::Infinite => s.serialize_str("infinite"),
            Snr::Db(v) => s.serialize_f64(v),
        }
    }
}

impl<'de> Deserialize<'de> for Snr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v.is_finite() => Ok(Snr::Db(v)),
            Raw::Text(s) if s.eq_ignore_ascii_case("infinite") || s.eq_ignore_ascii_case("inf") => Ok(Snr::Infinite),
            Raw::Num(v) => Err(serde::de::Error::custom(format!("snr must be finite or \"infinite\", got {v}"))),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("snr must be a number or \"infinite\", got {s:?}"))),
        }
    }
}

/// Wavenumber distortion and noise level for a scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertaintySpec {
    pub w_distort: f64,
    pub snr: Snr,
}

impl Default for UncertaintySpec {
    fn default() -> Self {
        Self { w_distort: 0.0, snr: Snr::Infinite }
    }
}

impl UncertaintySpec {
    pub fn validate(&self) -> Result<(), WavefieldError> {
        if !(self.w_distort.is_finite() && (0.0..1.0).contains(&self.w_distort)) {
            return Err(WavefieldError::InvalidScenario(format!("w_distort must lie in [0, 1), got {}", self.w_distort)));
        }
        Ok(())
    }

    /// Support `[1 − w, 1 + w]` of the distortion factor.
    pub fn alpha_bounds(&self) -> (f64, f64) {
        (1.0 - self.w_distort, 1.0 + self.w_distort)
    }
}

/// Draws the multiplicative wavenumber distortion `α`: a unit Gaussian
/// centred on 1, truncated to `[1 − w, 1 + w]` by rejection.
pub fn sample_alpha<R: Rng + ?Sized>(w_distort: f64, rng: &mut R) -> f64 {
    if w_distort == 0.0 {
        return 1.0;
    }
    let (lo, hi) = (1.0 - w_distort, 1.0 + w_distort);
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let a = 1.0 + z;
        if (lo..=hi).contains(&a) {
            return a;
        }
    }
}

pub fn mean_power(signal: &[f64]) -> f64 {
    if signal.is_empty() {
        return 0.0;
    }
    signal.iter().map(|v| v * v).sum::<f64>() / signal.len() as f64
}

/// Adds white Gaussian noise whose variance sits `snr` below the mean
/// per-element power of the whole signal matrix.
pub fn add_awgn<R: Rng + ?Sized>(signal: &[f64], snr: Snr, rng: &mut R) -> Result<Vec<f64>, WavefieldError> {
    let Snr::Db(db) = snr else {
        return Ok(signal.to_vec());
    };
    let power = mean_power(signal);
    if power == 0.0 {
        return Err(WavefieldError::ZeroSignal);
    }
    let sigma = (power / 10f64.powf(db / 10.0)).sqrt();
    Ok(signal
        .iter()
        .map(|&v| {
            let n: f64 = rng.sample(StandardNormal);
            v + sigma * n
        })
        .collect())
}

/// SNR in dB realized by `noisy` relative to `clean`.
pub fn realized_snr_db(clean: &[f64], noisy: &[f64]) -> f64 {
    let noise: Vec<f64> = clean.iter().zip(noisy).map(|(c, n)| n - c).collect();
    let pn = mean_power(&noise);
    if pn == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (mean_power(clean) / pn).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn alpha_degenerate_and_bounded() {
        let mut r = rng::stream(1, 0, 0);
        assert_eq!(sample_alpha(0.0, &mut r), 1.0);
        for _ in 0..10_000 {
            let a = sample_alpha(0.15, &mut r);
            assert!((0.85..=1.15).contains(&a));
        }
    }

    #[test]
    fn infinite_snr_is_identity() {
        let x = vec![1.0, -2.0, 3.0];
        assert_eq!(add_awgn(&x, Snr::Infinite, &mut rng::stream(1, 0, 0)).unwrap(), x);
    }

    #[test]
    fn zero_signal_rejected() {
        let err = add_awgn(&[0.0; 4], Snr::Db(5.0), &mut rng::stream(1, 0, 0)).unwrap_err();
        assert!(matches!(err, WavefieldError::ZeroSignal));
    }

    #[test]
    fn minus_fifty_db_ratio() {
        let mut r = rng::stream(2, 0, 0);
        let x: Vec<f64> = (0..4096).map(|i| (i as f64 * 0.1).sin()).collect();
        let ps = mean_power(&x);
        let mut ratio = 0.0;
        let trials = 20;
        for _ in 0..trials {
            let y = add_awgn(&x, Snr::Db(-50.0), &mut r).unwrap();
            let noise: Vec<f64> = x.iter().zip(&y).map(|(a, b)| b - a).collect();
            ratio += mean_power(&noise) / ps;
        }
        ratio /= trials as f64;
        assert!((ratio / 1e5 - 1.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn snr_serde() {
        let v: Snr = serde_json::from_str("\"infinite\"").unwrap();
        assert_eq!(v, Snr::Infinite);
        let v: Snr = serde_json::from_str("5.0").unwrap();
        assert_eq!(v, Snr::Db(5.0));
        assert_eq!(serde_json::to_string(&Snr::Infinite).unwrap(), "\"infinite\"");
        assert!(serde_json::from_str::<Snr>("\"loud\"").is_err());
    }
}
