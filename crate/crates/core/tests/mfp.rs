use num_complex::Complex64;
use rand::Rng;
use wavelocate::dispersion::*;
use wavelocate::mfp::*;
use wavelocate::rng::{stream, tag};
use wavelocate::wavefield::*;

fn model(q: usize) -> WaveModel {
    let grid = FrequencyGrid::symmetric(q, 500e3).unwrap();
    WaveModel::new(solve_rayleigh_lamb(&PlateMaterial::default(), grid, &[Mode::S0, Mode::A0]).unwrap(), Excitation::Impulse).unwrap()
}

fn sensors(n: usize, seed: u64) -> SensorArray {
    random_sensors(n, &Plate::default(), seed).unwrap()
}

/// Direct double sum over every pair and bin.
fn brute_force(data: &[Vec<Complex64>], m: &WaveModel, s: &SensorArray, grid: QueryGrid) -> Vec<f64> {
    (0..grid.len())
        .map(|p| {
            let pt = grid.point(p);
            let mut num = Complex64::new(0.0, 0.0);
            let mut den = 0.0;
            for (pair, x) in data.iter().enumerate() {
                let (tx, rx) = s.pair_positions(pair);
                let z = m.scatter_spectrum(&tx, &rx, &pt, 1.0).unwrap();
                for q in 0..z.len() {
                    num += x[q] * z[q].conj();
                    den += z[q].norm_sqr();
                }
            }
            num.norm_sqr() / den
        })
        .collect()
}

#[test]
fn surface_matches_direct_evaluation() {
    let m = model(64);
    let s = sensors(4, 2);
    let grid = QueryGrid::new(1.0, 1.0, 11, 11).unwrap();
    let mut r = stream(3, tag::SWEEP, 0);
    // arbitrary complex data, not even conjugate-symmetric
    let data: Vec<Vec<Complex64>> =
        (0..s.num_pairs()).map(|_| (0..64).map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect()).collect();
    let got = ambiguity(&data, &m, &s, grid).unwrap();
    let want = brute_force(&data, &m, &s, grid);
    for (a, b) in got.values.iter().zip(&want) {
        assert!((a - b).abs() <= 1e-12 * b.abs(), "{a} vs {b}");
    }
}

#[test]
fn matched_grid_point_maximizes_the_surface() {
    let m = model(64);
    let s = sensors(6, 5);
    let grid = QueryGrid::new(1.0, 1.0, 21, 21).unwrap();
    let bank = ModelBank::new(m.clone(), s.clone(), grid, DEFAULT_CACHE_LIMIT_BYTES).unwrap();
    for p0 in [0, 37, 220, 440] {
        let data = m.pair_spectra(&s, &[grid.point(p0)], 1.0).unwrap();
        let surf = bank.ambiguity(&data).unwrap();
        assert_eq!(surf.argmax(), p0);
        assert_eq!(localize(&surf, 1, &[]).unwrap(), vec![grid.point(p0)]);
        let top = surf.values[p0];
        assert!(surf.values.iter().all(|&v| v <= top));
    }
}

#[test]
fn two_damages_in_opposite_quadrants() {
    let m = model(128);
    let s = sensors(8, 1);
    let grid = QueryGrid::new(1.0, 1.0, 20, 20).unwrap();
    let plate = Plate::default();
    let (a, b) = (grid.point(grid.nearest(&Point::new(0.2, 0.25))), grid.point(grid.nearest(&Point::new(0.75, 0.8))));
    let data = m.pair_spectra(&s, &[a, b], 1.0).unwrap();
    let surf = ambiguity(&data, &m, &s, grid).unwrap();
    let found = localize(&surf, 2, &[plate.quadrant(&a), plate.quadrant(&b)]).unwrap();
    assert_eq!(found, vec![a, b]);
}

#[test]
fn complex_scaling_scales_every_value() {
    let m = model(64);
    let s = sensors(4, 8);
    let grid = QueryGrid::new(1.0, 1.0, 9, 9).unwrap();
    let data = m.pair_spectra(&s, &[Point::new(0.3, 0.6)], 1.1).unwrap();
    let c = Complex64::new(-2.0, 0.7);
    let scaled: Vec<Vec<Complex64>> = data.iter().map(|x| x.iter().map(|v| v * c).collect()).collect();
    let a = ambiguity(&data, &m, &s, grid).unwrap();
    let b = ambiguity(&scaled, &m, &s, grid).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((y - c.norm_sqr() * x).abs() <= 1e-12 * y.abs());
    }
    assert_eq!(a.argmax(), b.argmax());
}

#[test]
fn pair_order_does_not_matter() {
    let m = model(64);
    let plate = Plate::default();
    let s = sensors(4, 8);
    let grid = QueryGrid::new(1.0, 1.0, 9, 9).unwrap();
    let dmg = [Point::new(0.7, 0.2)];
    let a = ambiguity(&m.pair_spectra(&s, &dmg, 1.0).unwrap(), &m, &s, grid).unwrap();
    let mut pos: Vec<Point> = (0..s.num_sensors()).map(|i| s.positions[i]).collect();
    pos.reverse();
    let rev = SensorArray::new(pos, &plate).unwrap();
    let b = ambiguity(&m.pair_spectra(&rev, &dmg, 1.0).unwrap(), &m, &rev, grid).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() <= 1e-12 * x.abs());
    }
}

#[test]
fn streaming_equals_cached() {
    let m = model(64);
    let s = sensors(4, 4);
    let grid = QueryGrid::new(1.0, 1.0, 12, 10).unwrap();
    let cached = ModelBank::new(m.clone(), s.clone(), grid, DEFAULT_CACHE_LIMIT_BYTES).unwrap();
    let streamed = ModelBank::new(m.clone(), s.clone(), grid, 0).unwrap();
    assert!(cached.is_cached() && !streamed.is_cached());
    let data = m.pair_spectra(&s, &[Point::new(0.45, 0.55)], 0.9).unwrap();
    assert_eq!(cached.ambiguity(&data).unwrap(), streamed.ambiguity(&data).unwrap());
}

#[test]
fn shape_and_count_errors() {
    let m = model(32);
    let s = sensors(3, 4);
    let grid = QueryGrid::new(1.0, 1.0, 4, 4).unwrap();
    let bank = ModelBank::new(m, s, grid, DEFAULT_CACHE_LIMIT_BYTES).unwrap();
    assert!(matches!(bank.ambiguity(&[vec![Complex64::new(0.0, 0.0); 32]]), Err(MfpError::DataShape { .. })));
    let surf = GridField { grid, values: vec![0.0; 16] };
    assert!(matches!(localize(&surf, 0, &[]), Err(MfpError::InvalidDamageCount { .. })));
    assert!(matches!(localize(&surf, 5, &[]), Err(MfpError::InvalidDamageCount { .. })));
    assert!(matches!(localize(&surf, 2, &[Quadrant(0)]), Err(MfpError::InvalidDamageCount { .. })));
    assert!(QueryGrid::new(1.0, 1.0, 1, 4).is_err());
}
