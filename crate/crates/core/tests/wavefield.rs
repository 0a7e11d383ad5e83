use num_complex::Complex64;
use statrs::distribution::{ContinuousCDF, Normal};
use wavelocate::dispersion::*;
use wavelocate::rng::{stream, tag};
use wavelocate::wavefield::*;

fn scenario(q: usize, w: f64, snr: Snr, policy: DamagePolicy) -> Scenario {
    let plate = Plate::default();
    Scenario {
        plate,
        material: PlateMaterial::default(),
        grid: FrequencyGrid::symmetric(q, 500e3).unwrap(),
        modes: vec![Mode::S0, Mode::A0],
        excitation: Excitation::Impulse,
        sensors: random_sensors(5, &plate, 3).unwrap(),
        uncertainty: UncertaintySpec { w_distort: w, snr },
        damage_policy: policy,
    }
}

fn model(q: usize) -> WaveModel {
    let grid = FrequencyGrid::symmetric(q, 500e3).unwrap();
    WaveModel::new(solve_rayleigh_lamb(&PlateMaterial::default(), grid, &[Mode::S0, Mode::A0]).unwrap(), Excitation::Impulse).unwrap()
}

#[test]
fn spectrum_matches_direct_formula() {
    let m = model(64);
    let (tx, rx, d) = (Point::new(0.1, 0.2), Point::new(0.8, 0.7), Point::new(0.4, 0.9));
    let r = tx.distance(&d) + d.distance(&rx);
    let alpha = 1.07;
    let x = m.scatter_spectrum(&tx, &rx, &d, alpha).unwrap();
    for (q, v) in x.iter().enumerate() {
        if q == 0 || q == 32 {
            assert_eq!(*v, Complex64::new(0.0, 0.0));
            continue;
        }
        let want: Complex64 = (0..2)
            .map(|j| {
                let k = m.table().kappa(j)[q];
                Complex64::new(0.0, -alpha * k * r).exp() / (alpha * k.abs() * r).sqrt()
            })
            .sum();
        assert!((v - want).norm() <= 1e-12 * want.norm(), "bin {q}");
    }
}

#[test]
fn inverse_transform_matches_naive_dft() {
    let m = model(32);
    let x = m.scatter_spectrum(&Point::new(0.0, 0.0), &Point::new(1.0, 0.0), &Point::new(0.5, 0.5), 1.0).unwrap();
    let t = SpectralTransform::new(32).to_time_domain(&x).unwrap();
    let scale = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for (n, &v) in t.iter().enumerate() {
        let s: Complex64 = x
            .iter()
            .enumerate()
            .map(|(q, c)| c * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (q as f64 - 16.0) * n as f64 / 32.0))
            .sum::<Complex64>()
            / 32.0;
        assert!(s.im.abs() < 1e-12 * scale);
        assert!((s.re - v).abs() < 1e-12 * scale, "sample {n}");
    }
    let back = SpectralTransform::new(32).to_frequency_domain(&t);
    for (a, b) in back.iter().zip(&x) {
        assert!((a - b).norm() < 1e-12 * scale);
    }
}

#[test]
fn superposition_is_exact() {
    let m = model(64);
    let s = random_sensors(4, &Plate::default(), 9).unwrap();
    let (a, b) = (Point::new(0.2, 0.3), Point::new(0.7, 0.8));
    let both = m.pair_spectra(&s, &[a, b], 0.95).unwrap();
    let sa = m.pair_spectra(&s, &[a], 0.95).unwrap();
    let sb = m.pair_spectra(&s, &[b], 0.95).unwrap();
    for p in 0..s.num_pairs() {
        for q in 0..64 {
            assert_eq!(both[p][q], sa[p][q] + sb[p][q]);
        }
    }
}

#[test]
fn alpha_equals_scaled_table() {
    let m = model(64);
    let alpha = 0.88;
    let scaled = WaveModel::new(m.table().scaled(alpha), Excitation::Impulse).unwrap();
    let (tx, rx, d) = (Point::new(0.0, 0.5), Point::new(1.0, 0.4), Point::new(0.3, 0.2));
    let a = m.scatter_spectrum(&tx, &rx, &d, alpha).unwrap();
    let b = scaled.scatter_spectrum(&tx, &rx, &d, 1.0).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).norm() <= 1e-12 * x.norm().max(1e-300));
    }
}

#[test]
fn nondispersive_pulse_arrives_at_path_delay() {
    let grid = FrequencyGrid::symmetric(256, 500e3).unwrap();
    let m = WaveModel::new(analytic_dispersion(AnalyticModel::Nondispersive { speed: 5000.0 }, grid).unwrap(), Excitation::Impulse).unwrap();
    let (tx, rx, d) = (Point::new(0.0, 0.0), Point::new(0.3, 0.0), Point::new(0.15, 0.2));
    let r = tx.distance(&d) + d.distance(&rx);
    let t = SpectralTransform::new(256).to_time_domain(&m.scatter_spectrum(&tx, &rx, &d, 1.0).unwrap()).unwrap();
    let peak = (0..256).max_by(|&i, &j| t[i].abs().total_cmp(&t[j].abs())).unwrap();
    let expected = r / 5000.0 / grid.time_step();
    assert!((peak as f64 - expected).abs() <= 1.0, "peak {peak}, expected {expected}");
}

#[test]
fn alpha_follows_truncated_normal() {
    let w = 0.15;
    let mut r = stream(1, tag::SWEEP, 0);
    let n = 20_000;
    let mut draws: Vec<f64> = (0..n).map(|_| sample_alpha(w, &mut r)).collect();
    assert!(draws.iter().all(|a| (1.0 - w..=1.0 + w).contains(a)));
    let mean = draws.iter().sum::<f64>() / n as f64;
    assert!((mean - 1.0).abs() < 0.005, "{mean}");
    draws.sort_by(f64::total_cmp);
    let unit = Normal::new(1.0, 1.0).unwrap();
    let (lo, hi) = (unit.cdf(1.0 - w), unit.cdf(1.0 + w));
    let ks = draws
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let f = (unit.cdf(a) - lo) / (hi - lo);
            (f - i as f64 / n as f64).abs().max((f - (i + 1) as f64 / n as f64).abs())
        })
        .fold(0.0, f64::max);
    // 1% critical value of the Kolmogorov-Smirnov statistic
    assert!(ks < 1.63 / (n as f64).sqrt(), "KS {ks}");
}

#[test]
fn realized_snr_is_calibrated() {
    // desk-sized signals: 28 pairs x 256 bins
    let mut sc = scenario(256, 0.1, Snr::Db(5.0), DamagePolicy::UpTo { max: 2 });
    sc.sensors = random_sensors(8, &sc.plate, 3).unwrap();
    let ds = generate_dataset(&sc, SplitCounts { train: 40, val: 0, test: 60 }, 21).unwrap();
    let m = sc.wave_model().unwrap();
    let tr = SpectralTransform::new(256);
    for s in ds.train.iter().chain(&ds.test) {
        let clean = synthesize(&m, &tr, &sc.sensors, &s.truth.locations, s.alpha).unwrap();
        let noisy = ds.raw_signals(s);
        let ps = clean.iter().map(|v| v * v).sum::<f64>();
        let pn = clean.iter().zip(&noisy).map(|(c, n)| (n - c).powi(2)).sum::<f64>();
        let snr = 10.0 * (ps / pn).log10();
        assert!((snr - 5.0).abs() < 0.5, "{snr}");
        assert!((snr - s.snr_db).abs() < 1e-6);
    }
}

#[test]
fn very_low_snr_is_noise_dominated() {
    let sc = scenario(64, 0.0, Snr::Db(-50.0), DamagePolicy::Fixed { count: 1 });
    let ds = generate_dataset(&sc, SplitCounts { train: 3, val: 0, test: 0 }, 2).unwrap();
    for s in &ds.train {
        assert!((s.snr_db + 50.0).abs() < 0.5);
    }
}

#[test]
fn generation_is_deterministic_and_round_trips() {
    let sc = scenario(32, 0.15, Snr::Db(10.0), DamagePolicy::UpTo { max: 3 });
    let counts = SplitCounts { train: 10, val: 2, test: 2 };
    let a = generate_dataset(&sc, counts, 99).unwrap();
    let b = generate_dataset(&sc, counts, 99).unwrap();
    assert_eq!(a, b);
    let c = generate_dataset(&sc, counts, 100).unwrap();
    assert_ne!(a.train, c.train);
    let dir = tempfile::tempdir().unwrap();
    write_dataset(&a, dir.path()).unwrap();
    assert_eq!(read_dataset(dir.path()).unwrap(), a);
    for s in a.train.iter().chain(&a.val).chain(&a.test) {
        assert!((0.85..=1.15).contains(&s.alpha));
        let q = s.truth.quadrants(&sc.plate);
        let mut u = q.clone();
        u.sort();
        u.dedup();
        assert_eq!(u.len(), q.len());
        assert!((1..=3).contains(&s.truth.len()));
    }
}

#[test]
fn training_features_are_standardized() {
    let sc = scenario(32, 0.0, Snr::Db(5.0), DamagePolicy::Fixed { count: 2 });
    let ds = generate_dataset(&sc, SplitCounts { train: 30, val: 0, test: 1 }, 4).unwrap();
    let dim = sc.signal_len();
    for f in 0..dim {
        let col: Vec<f64> = ds.train.iter().map(|s| s.signals[f]).collect();
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / col.len() as f64;
        assert!(mean.abs() < 1e-9);
        assert!((var - 1.0).abs() < 1e-9);
    }
    let raw = ds.raw_signals(&ds.test[0]);
    let mut again = raw.clone();
    ds.standardization.apply(&mut again);
    for (a, b) in again.iter().zip(&ds.test[0].signals) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn empty_splits_are_allowed() {
    let sc = scenario(32, 0.0, Snr::Infinite, DamagePolicy::Fixed { count: 1 });
    let ds = generate_dataset(&sc, SplitCounts { train: 5, val: 0, test: 0 }, 1).unwrap();
    assert_eq!(ds.counts(), SplitCounts { train: 5, val: 0, test: 0 });
    assert!(ds.train.iter().all(|s| s.snr_db.is_infinite() && s.alpha == 1.0));
}
