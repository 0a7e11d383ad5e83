use num_complex::Complex64;
use wavelocate::dispersion::*;

fn aluminium() -> PlateMaterial {
    PlateMaterial::default()
}

/// Rayleigh-Lamb characteristic function in the classical product form with
/// complex through-thickness wavenumbers, normalized by its term magnitudes.
fn residual_oracle(m: &PlateMaterial, mode: Mode, omega: f64, k: f64) -> f64 {
    let cl = (m.youngs_modulus * (1.0 - m.poisson_ratio) / (m.density * (1.0 + m.poisson_ratio) * (1.0 - 2.0 * m.poisson_ratio))).sqrt();
    let ct = (m.youngs_modulus / (2.0 * m.density * (1.0 + m.poisson_ratio))).sqrt();
    let h = m.thickness / 2.0;
    let p = Complex64::new((omega / cl).powi(2) - k * k, 0.0).sqrt();
    let q = Complex64::new((omega / ct).powi(2) - k * k, 0.0).sqrt();
    let a = (q * q - k * k).powi(2);
    let b = 4.0 * k * k * p * q;
    let (t1, t2) = match mode {
        Mode::S0 => (a * (p * h).cos() * (q * h).sin(), b * (p * h).sin() * (q * h).cos()),
        Mode::A0 => (a * (p * h).sin() * (q * h).cos(), b * (p * h).cos() * (q * h).sin()),
    };
    (t1 + t2).norm() / (t1.norm() + t2.norm())
}

#[test]
fn closed_form_speeds() {
    let m = aluminium();
    let (e, nu, rho) = (69e9_f64, 0.33_f64, 2700.0_f64);
    assert!((m.plate_speed() - (e / (rho * (1.0 - nu * nu))).sqrt()).abs() < 1e-9);
    assert!((m.shear_speed() - 3099.57).abs() < 0.01);
    assert!((m.longitudinal_speed() - 6153.39).abs() < 0.01);
}

#[test]
fn every_root_satisfies_the_characteristic_equation() {
    let m = aluminium();
    for (q, fmax) in [(256, 500e3), (64, 1.2e6)] {
        let grid = FrequencyGrid::symmetric(q, fmax).unwrap();
        let table = solve_rayleigh_lamb(&m, grid, &[Mode::S0, Mode::A0]).unwrap();
        for (j, mode) in [Mode::S0, Mode::A0].into_iter().enumerate() {
            for b in 0..q {
                let w = grid.omega(b);
                if w <= 0.0 {
                    continue;
                }
                let r = residual_oracle(&m, mode, w, table.kappa(j)[b]);
                assert!(r < 1e-6, "{mode} bin {b}: residual {r:e}");
            }
        }
    }
}

#[test]
fn branches_are_odd_in_frequency() {
    let grid = FrequencyGrid::symmetric(128, 500e3).unwrap();
    let table = solve_rayleigh_lamb(&aluminium(), grid, &[Mode::S0, Mode::A0]).unwrap();
    for j in 0..2 {
        for b in 0..128 {
            if let Some(mb) = grid.mirror_bin(b) {
                assert_eq!(table.kappa(j)[b], -table.kappa(j)[mb]);
            }
        }
        assert_eq!(table.kappa(j)[grid.zero_bin().unwrap()], 0.0);
    }
}

#[test]
fn low_frequency_limits() {
    let m = aluminium();
    let grid = FrequencyGrid::new(64, 0.0, 64e3).unwrap();
    let table = solve_rayleigh_lamb(&m, grid, &[Mode::S0, Mode::A0]).unwrap();
    let b = 1;
    let w = grid.omega(b);
    let c_s0 = w / table.kappa(0)[b];
    assert!((c_s0 / m.plate_speed() - 1.0).abs() < 0.01, "S0 phase speed {c_s0}");
    let rigidity = m.youngs_modulus * m.thickness.powi(3) / (12.0 * (1.0 - m.poisson_ratio.powi(2)));
    let c_flex = w.sqrt() * (rigidity / (m.density * m.thickness)).powf(0.25);
    let c_a0 = w / table.kappa(1)[b];
    assert!((c_a0 / c_flex - 1.0).abs() < 0.02, "A0 phase speed {c_a0} vs {c_flex}");
    let cg = group_velocity(&table, 0).unwrap();
    assert!((cg[b] / m.plate_speed() - 1.0).abs() < 0.01, "S0 group speed {}", cg[b]);
    // flexural group speed is twice the phase speed
    let cg = group_velocity(&table, 1).unwrap();
    assert!((cg[4] / (2.0 * grid.omega(4) / table.kappa(1)[4]) - 1.0).abs() < 0.05);
}

#[test]
fn analytic_models_follow_their_formulas() {
    let grid = FrequencyGrid::symmetric(32, 100e3).unwrap();
    let t = analytic_dispersion(AnalyticModel::Nondispersive { speed: 2000.0 }, grid).unwrap();
    for b in 0..32 {
        assert!((t.kappa(0)[b] - grid.omega(b) / 2000.0).abs() <= 1e-12 * t.kappa(0)[b].abs().max(1.0));
    }
    let cg = group_velocity(&t, 0).unwrap();
    assert!(cg.iter().all(|c| (c - 2000.0).abs() < 1e-6));
}

#[test]
fn csv_layout() {
    let grid = FrequencyGrid::symmetric(16, 500e3).unwrap();
    let table = solve_rayleigh_lamb(&aluminium(), grid, &[Mode::S0, Mode::A0]).unwrap();
    let mut buf = Vec::new();
    table.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "omega_rad_s,kappa_S0,kappa_A0");
    assert_eq!(lines.len(), 17);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 3));
}

#[test]
fn invalid_inputs_are_rejected() {
    let bad = PlateMaterial { poisson_ratio: 0.7, ..aluminium() };
    assert!(matches!(bad.validate(), Err(DispersionError::InvalidMaterial(s)) if s.contains("poisson_ratio")));
    assert!(FrequencyGrid::new(0, 0.0, 1.0).is_err());
    assert!(FrequencyGrid::new(8, 2.0, 1.0).is_err());
}
