use proptest::prelude::*;

use selfsim_core::equations::{series_lightcone, w_value};
use selfsim_core::observables::{condition_threshold, is_admissible};
use selfsim_core::quadrature::{self, QuadConfig};
use selfsim_core::shooting::{beta_from_b, beta_orbit, convert_parameters};
use selfsim_core::trajectory::{integrate_with, Equation, EventKind, IntegrateOptions};
use selfsim_core::{EquationParams, IntegratorConfig};

fn params() -> impl Strategy<Value = EquationParams> {
    prop_oneof![Just((3, 1)), Just((3, 2)), Just((5, 1)), Just((5, 2)), Just((7, 2))]
        .prop_map(|(m, l)| EquationParams::new(m, l).unwrap())
}

fn log_beta() -> impl Strategy<Value = f64> {
    (-6.0f64..0.5).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reflection_symmetry(p in params(), beta in log_beta()) {
        let cfg = IntegratorConfig::default();
        let up = beta_orbit(&p, beta, &cfg).unwrap();
        let down = beta_orbit(&p, -beta, &cfg).unwrap();
        prop_assert_eq!(up.nodes.len(), down.nodes.len());
        for (a, b) in up.nodes.iter().zip(&down.nodes) {
            prop_assert_eq!(a.t, b.t);
            prop_assert_eq!(a.state.u, -b.state.u);
            prop_assert_eq!(a.state.du, -b.state.du);
        }
    }

    #[test]
    fn w_never_decreases(p in params(), beta in log_beta()) {
        let cfg = IntegratorConfig::default();
        let traj = beta_orbit(&p, beta, &cfg).unwrap();
        for w in traj.nodes.windows(2) {
            let (w0, w1) = (w_value(&p, w[0].state), w_value(&p, w[1].state));
            prop_assert!(w1 >= w0 - 1e-9 * p.k(), "x = {}: {} -> {}", w[1].t, w0, w1);
        }
    }

    #[test]
    fn escape_is_final(p in params(), beta in log_beta()) {
        let cfg = IntegratorConfig { x_max: 25.0, ..Default::default() };
        let x0 = cfg.launch_eps;
        let s0 = series_lightcone(&p, beta, x0).unwrap();
        let opts = IntegrateOptions { stop_on_escape: false };
        let traj = integrate_with(&p, Equation::ProfileX, (x0, s0), cfg.x_max, &cfg.resolving(s0.u), opts).unwrap();
        let escape = traj.events_of(EventKind::Escape).next().cloned();
        if let Some(esc) = escape {
            let sign = esc.state.du.signum();
            for node in traj.nodes.iter().filter(|n| n.t > esc.at) {
                prop_assert_eq!(node.state.du.signum(), sign);
                prop_assert!(node.state.u.abs() > std::f64::consts::FRAC_PI_2);
            }
            prop_assert_eq!(traj.crossing_count(), traj.events_of(EventKind::EquatorCrossing)
                .filter(|e| e.at < esc.at).count());
        }
    }

    #[test]
    fn admissibility_matches_threshold(m in (1u32..50).prop_map(|j| 2 * j + 1), l in 1u32..60) {
        let p = EquationParams::new(m, l).unwrap();
        prop_assert_eq!(is_admissible(&p), f64::from(l) > condition_threshold(m));
    }

    #[test]
    fn parameter_conversion_round_trip(p in params(), beta in -1.0f64..1.0) {
        let b = convert_parameters(&p, beta);
        prop_assert!((beta_from_b(&p, b) - beta).abs() <= 1e-15 * beta.abs());
        prop_assert!(b * beta <= 0.0);
    }

    #[test]
    fn quadrature_is_exact_for_polynomials(c in prop::collection::vec(-1.0f64..1.0, 1..20), a in -2.0f64..0.0, b in 0.0f64..2.0) {
        let f = |x: f64| c.iter().rev().fold(0.0, |acc, ci| acc * x + ci);
        let exact: f64 = c.iter().enumerate().map(|(i, ci)| {
            let e = i as i32 + 1;
            ci * (b.powi(e) - a.powi(e)) / f64::from(e)
        }).sum();
        let r = quadrature::integrate(f, &[a, b], &QuadConfig::default()).unwrap();
        let scale: f64 = c.iter().map(|x| x.abs()).sum::<f64>() * 2f64.powi(c.len() as i32) * (b - a);
        prop_assert!((r.value - exact).abs() <= 1e-13 * scale.max(1.0), "{} vs {}", r.value, exact);
    }
}
