use std::sync::OnceLock;

use selfsim_core::quadrature::QuadConfig;
use selfsim_core::shooting::solve_family;
use selfsim_core::stability::{
    default_gauge_grid, eigen_hessian_identity, eigen_mismatch, eigenfunction, find_spectrum, gauge_mode,
    gauge_residual, hessian_form, EigenShotConfig, SpectrumResult,
};
use selfsim_core::{ConnectingOrbit, EquationParams, IntegratorConfig, PhaseState, ShooterConfig};

// Eigenvalues from an independent solver: the equation in rho, launched
// from both ends and matched by the Wronskian at rho = 1/2.
const ORACLE_N1: f64 = 28.447_559_114_1;
const ORACLE_N2: [f64; 2] = [28.133_715_350_9, 3_372.139_96];

struct Spectra {
    orbits: Vec<ConnectingOrbit>,
    spectra: Vec<SpectrumResult>,
}

fn spectra() -> &'static Spectra {
    static CELL: OnceLock<Spectra> = OnceLock::new();
    CELL.get_or_init(|| {
        let orbits = solve_family(
            &EquationParams::wave_map_3d(),
            &ShooterConfig::default(),
            &IntegratorConfig::default(),
        )
        .expect("family converges");
        let cfg = EigenShotConfig::default();
        let spectra = orbits.iter().map(|o| find_spectrum(o, &cfg).expect("spectrum")).collect();
        Spectra { orbits, spectra }
    })
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs()
}

#[test]
fn published_eigenvalues() {
    let s = &spectra().spectra;
    assert!(s[0].eigenvalues.is_empty());
    assert_eq!(s[1].eigenvalues.len(), 1);
    assert!(rel(s[1].eigenvalues[0], 28.448) < 1e-3);
    assert_eq!(s[2].eigenvalues.len(), 2);
    assert!(rel(s[2].eigenvalues[0], 28.132) < 5e-3);
    assert!(rel(s[2].eigenvalues[1], 3372.12) < 5e-3);
}

#[test]
fn eigenvalues_match_reference_solver() {
    let s = &spectra().spectra;
    assert!(rel(s[1].eigenvalues[0], ORACLE_N1) < 1e-8, "{}", s[1].eigenvalues[0]);
    for (got, want) in s[2].eigenvalues.iter().zip(ORACLE_N2) {
        assert!(rel(*got, want) < 1e-8, "{got} vs {want}");
    }
}

#[test]
fn mode_count_equals_index() {
    for s in &spectra().spectra {
        assert_eq!(s.eigenvalues.len(), s.n);
        assert_eq!(s.gauge_zero_count, s.n);
        assert!(s.gauge_residual <= 1e-6, "n = {}: {:e}", s.n, s.gauge_residual);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] < w[1]));
    }
    // The lowest mode settles as n grows.
    let lowest: Vec<f64> = spectra().spectra[1..].iter().map(|s| s.eigenvalues[0]).collect();
    assert!(lowest.windows(2).all(|w| w[1] < w[0]), "{lowest:?}");
}

#[test]
fn gauge_mode_vanishes_at_the_light_cone() {
    for o in &spectra().orbits {
        let g = gauge_mode(o, &[0.99, 0.999_9, 0.999_999]).unwrap();
        let c: Vec<f64> = g.samples.iter().map(|&(rho, v)| v / (1.0 - rho).sqrt()).collect();
        // v / sqrt(1 - rho) tends to a constant.
        assert!(rel(c[2], c[1]) < 1e-3, "n = {}: {c:?}", o.n);
        assert!(g.samples[2].1.abs() < 1e-2);
    }
    let residual = gauge_residual(&spectra().orbits[3], &default_gauge_grid()).unwrap();
    assert!(residual < 1e-6);
}

#[test]
fn log_derivatives_match_at_eigenvalues() {
    let cfg = EigenShotConfig::default();
    let o = &spectra().orbits[1];
    let l2 = spectra().spectra[1].eigenvalues[0];
    let at_root = eigen_mismatch(o, l2, &cfg).unwrap();
    assert!(!at_root.node_collision);
    let off_root = eigen_mismatch(o, 1.01 * l2, &cfg).unwrap();
    assert!(at_root.value.abs() < 1e-6 * off_root.value.abs(), "{at_root:?} {off_root:?}");
    assert!(eigen_mismatch(o, 0.0, &cfg).is_err());
}

#[test]
fn unstable_direction_lowers_the_energy() {
    let quad = QuadConfig::default();
    let o = &spectra().orbits[1];
    let ef = eigenfunction(o, spectra().spectra[1].eigenvalues[0], &EigenShotConfig::default()).unwrap();
    let direct = hessian_form(o, |rho| ef.state_rho(rho), &quad).unwrap();
    let identity = eigen_hessian_identity(&ef, &quad).unwrap();
    assert!(direct < 0.0, "{direct}");
    assert!(rel(direct, identity) < 1e-6, "{direct} vs {identity}");
}

#[test]
fn ground_state_hessian_is_non_negative() {
    let quad = QuadConfig::default();
    let f0 = &spectra().orbits[0];
    // Bumps supported on [c - w, c + w].
    for (c, w) in [(0.3, 0.2), (0.5, 0.45), (0.8, 0.15), (0.95, 0.04)] {
        let bump = |rho: f64| {
            let t = (rho - c) / w;
            if t.abs() >= 1.0 {
                PhaseState::ZERO
            } else {
                let s = 1.0 - t * t;
                PhaseState::new(s * s, -4.0 * t * s / w)
            }
        };
        let q = hessian_form(f0, bump, &quad).unwrap();
        assert!(q > 0.0, "bump ({c}, {w}): {q}");
    }
    assert_eq!(hessian_form(f0, |_| PhaseState::ZERO, &quad).unwrap(), 0.0);
}

#[test]
fn light_cone_exponent_of_eigenfunctions() {
    let cfg = EigenShotConfig::default();
    for (o, s) in spectra().orbits[1..3].iter().zip(&spectra().spectra[1..3]) {
        for &l2 in &s.eigenvalues {
            let ef = eigenfunction(o, l2, &cfg).unwrap();
            let expected = (1.0 + l2.sqrt()) / 2.0;
            let fitted = ef.lightcone_exponent(2.0 * cfg.cone_offset).unwrap();
            assert!(rel(fitted, expected) < 1e-2, "lambda^2 = {l2}: {fitted} vs {expected}");
        }
    }
}

#[test]
fn matching_point_does_not_move_eigenvalues() {
    let base = EigenShotConfig::default();
    let o = &spectra().orbits[2];
    let at = |match_point| find_spectrum(o, &EigenShotConfig { match_point, ..base }).unwrap().eigenvalues;
    let (lo, hi) = (at(0.4), at(0.6));
    for (a, b) in lo.iter().zip(&hi) {
        assert!(rel(*a, *b) < 10.0 * base.secant_tol, "{a} vs {b}");
    }
}
