//! Energies, the energy-ratio law, the limiting linear solution and the
//! admissibility condition on `(m, l)`.

use serde::{Deserialize, Serialize};

use crate::equations::{self, series_lightcone, x_of_rho};
use crate::error::{Error, Result};
use crate::params::{EquationParams, PhaseState};
use crate::quadrature::{self, QuadConfig};
use crate::shooting::ConnectingOrbit;
use crate::trajectory::{integrate, Equation, EventKind, IntegratorConfig, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub n: usize,
    pub energy: f64,
    pub quadrature_error: f64,
}

/// Energy density in `rho`, `(rho^2 f'^2 - 2k cos^2 f / (1 - rho^2)) / 2`.
fn density_rho(k: f64, rho: f64, s: PhaseState) -> f64 {
    let c = s.u.cos();
    0.5 * (rho * rho * s.du * s.du - 2.0 * k * c * c / ((1.0 - rho) * (1.0 + rho)))
}

/// The same density after `rho = sech x`, including `|d rho / dx|`:
/// `(h'^2 - 2k sin^2 h) / (2 sinh x)`.
fn density_x(k: f64, x: f64, s: PhaseState) -> f64 {
    let sh = s.u.sin();
    0.5 * (s.du * s.du - 2.0 * k * sh * sh) / x.sinh()
}

fn ensure_energy_defined(params: &EquationParams) -> Result<()> {
    if params.m() != 3 {
        return Err(Error::EnergyUnavailable(params.m()));
    }
    Ok(())
}

fn breakpoints(traj: &Trajectory, lo: f64, hi: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = traj.nodes.iter().map(|n| n.t).filter(|&t| t > lo && t < hi).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Energy of a converged profile.
///
/// The origin leg is integrated in `rho`, the light-cone leg in `x`, where the
/// integrand stays regular; the endpoint expansions cover the launch gaps.
pub fn energy(orbit: &ConnectingOrbit, quad: &QuadConfig) -> Result<EnergyReport> {
    let params = &orbit.params;
    ensure_energy_defined(params)?;
    let k = params.k();

    let rho_pts = breakpoints(&orbit.left, orbit.rho_min, orbit.fit_point);
    let left = quadrature::integrate(
        |rho| {
            let s = orbit.left.eval(rho).expect("rho inside the origin leg");
            density_rho(k, rho, s)
        },
        &rho_pts,
        quad,
    )?;
    let origin_gap = quadrature::integrate(
        |rho| {
            let s = equations::series_origin(params, orbit.a, rho).expect("rho > 0");
            density_rho(k, rho, s)
        },
        &[0.0, orbit.rho_min],
        quad,
    )?;

    let x_fit = x_of_rho(orbit.fit_point);
    let x_pts = breakpoints(&orbit.right, orbit.x_min, x_fit);
    let right = quadrature::integrate(
        |x| {
            let s = orbit.right.eval(x).expect("x inside the light-cone leg");
            density_x(k, x, s)
        },
        &x_pts,
        quad,
    )?;
    let cone_gap = quadrature::integrate(
        |x| {
            let s = series_lightcone(params, orbit.beta_x, x).expect("x > 0");
            density_x(k, x, s)
        },
        &[0.0, orbit.x_min],
        quad,
    )?;

    let parts = [left, origin_gap, right, cone_gap];
    Ok(EnergyReport {
        n: orbit.n,
        energy: parts.iter().map(|p| p.value).sum(),
        quadrature_error: parts.iter().map(|p| p.error).sum(),
    })
}

/// Energy of a profile given in closed form in the light-cone variable,
/// integrated over `x in (0, 60]`.
pub fn energy_of_x_profile<F: Fn(f64) -> PhaseState>(
    params: &EquationParams,
    h: F,
    quad: &QuadConfig,
) -> Result<EnergyReport> {
    ensure_energy_defined(params)?;
    let k = params.k();
    let pts: Vec<f64> = (0..=60).map(f64::from).collect();
    let r = quadrature::integrate(|x| density_x(k, x, h(x)), &pts, quad)?;
    Ok(EnergyReport { n: 0, energy: r.value, quadrature_error: r.error })
}

/// `E_n / E_{n+1}` for consecutive reports.
pub fn energy_ratios(reports: &[EnergyReport]) -> Result<Vec<f64>> {
    if reports.len() < 2 {
        return Err(Error::InvalidParams("energy ratios need at least two reports".into()));
    }
    reports
        .windows(2)
        .map(|w| {
            if w[1].n != w[0].n + 1 {
                return Err(Error::InvalidParams(format!(
                    "energy reports must be consecutive in n (got {} then {})",
                    w[0].n, w[1].n
                )));
            }
            Ok(w[0].energy / w[1].energy)
        })
        .collect()
}

/// Limit of `E_n / E_{n+1}` for `m = 3`, `l = 1`.
pub fn asymptotic_energy_ratio() -> f64 {
    (2.0 * std::f64::consts::PI / 7f64.sqrt()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub m: u32,
    pub l: u32,
    /// `(sqrt 2 - 1)(m - 2) / 2`.
    pub threshold: f64,
    pub admissible: bool,
    /// Zeros of the limiting solution on `(0, 30]` and `(0, 60]`.
    pub zeros_short: usize,
    pub zeros_long: usize,
    /// The zero count grows with the interval.
    pub oscillation_check: bool,
}

/// Exact integer form of `l > (sqrt 2 - 1)(m - 2) / 2`:
/// `(2l + m - 2)^2 > 2 (m - 2)^2`.
pub fn is_admissible(params: &EquationParams) -> bool {
    let (m, l) = (u64::from(params.m()), u64::from(params.l()));
    let lhs = 2 * l + m - 2;
    lhs * lhs > 2 * (m - 2) * (m - 2)
}

pub fn condition_threshold(m: u32) -> f64 {
    (std::f64::consts::SQRT_2 - 1.0) * f64::from(m - 2) / 2.0
}

pub fn check_condition(m: u32, l: u32) -> Result<ConditionReport> {
    let params = EquationParams::new(m, l)?;
    let h = limiting_h(&params, 60.0, &IntegratorConfig::default())?;
    let zeros_short = h.zeros.iter().filter(|&&z| z <= 30.0).count();
    let zeros_long = h.zeros.len();
    Ok(ConditionReport {
        m,
        l,
        threshold: condition_threshold(m),
        admissible: is_admissible(&params),
        zeros_short,
        zeros_long,
        oscillation_check: zeros_long > zeros_short,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitingSample {
    pub x: f64,
    pub value: f64,
    pub slope: f64,
    /// The solution is `(value, slope) * exp(ln_scale)`.
    pub ln_scale: f64,
}

impl LimitingSample {
    /// `ln |H(x)|`.
    pub fn ln_abs(&self) -> f64 {
        self.value.abs().ln() + self.ln_scale
    }
}

/// Solution of the limiting linear equation with `H ~ x^(m-1)` at the light
/// cone, stored with a running logarithmic scale so it can be followed far
/// past the overflow of its exponential envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitingH {
    pub x_end: f64,
    pub zeros: Vec<f64>,
    pub samples: Vec<LimitingSample>,
}

const RESCALE_ABOVE: f64 = 1e100;
const CHUNK: f64 = 2.5;

pub fn limiting_h(params: &EquationParams, x_end: f64, cfg: &IntegratorConfig) -> Result<LimitingH> {
    let x0 = cfg.launch_eps;
    if !(x_end > x0) {
        return Err(Error::InvalidParams(format!("x_end = {x_end} must exceed the launch point {x0}")));
    }
    let mut state = series_lightcone(params, 1.0, x0)?;
    let mut ln_scale = 0.0;
    let mut x = x0;
    let mut zeros = Vec::new();
    let mut samples = vec![LimitingSample { x, value: state.u, slope: state.du, ln_scale }];
    while x < x_end {
        let next = (x + CHUNK).min(x_end);
        let chunk_cfg = cfg.resolving(state.u.abs().max(x * state.du.abs()));
        let traj = integrate(params, Equation::LimitingX, (x, state), next, &chunk_cfg)?;
        zeros.extend(traj.events_of(EventKind::EquatorCrossing).map(|e| e.at));
        samples.extend(traj.nodes.iter().skip(1).map(|n| LimitingSample {
            x: n.t,
            value: n.state.u,
            slope: n.state.du,
            ln_scale,
        }));
        state = traj.last_state();
        x = next;
        let amp = state.u.abs().max(state.du.abs());
        if amp > RESCALE_ABOVE {
            state = PhaseState::new(state.u / amp, state.du / amp);
            ln_scale += amp.ln();
        }
    }
    Ok(LimitingH { x_end, zeros, samples })
}

impl LimitingH {
    /// Mean spacing of the last `count` zeros from a least-squares line
    /// through (index, position).
    pub fn zero_spacing(&self, count: usize) -> Option<f64> {
        if count < 2 || self.zeros.len() < count {
            return None;
        }
        let zs = &self.zeros[self.zeros.len() - count..];
        let nf = count as f64;
        let mean_i = (nf - 1.0) / 2.0;
        let mean_z = zs.iter().sum::<f64>() / nf;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (i, z) in zs.iter().enumerate() {
            let di = i as f64 - mean_i;
            sxy += di * (z - mean_z);
            sxx += di * di;
        }
        Some(sxy / sxx)
    }

    /// First sample abscissa where `amplitude * |H|` reaches `level`.
    pub fn reach(&self, amplitude: f64, level: f64) -> Option<f64> {
        let target = (level / amplitude).ln();
        self.samples.iter().find(|s| s.ln_abs() >= target).map(|s| s.x)
    }

    /// Predicted zero count of the `beta`-orbit for small `beta`: zeros of
    /// `H` before `beta |H|` first reaches one.
    pub fn predicted_zero_count(&self, beta: f64) -> usize {
        let limit = self.reach(beta, 1.0).unwrap_or(self.x_end);
        self.zeros.iter().filter(|&&z| z < limit).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn closed_form_ground_state_energy() {
        let p = EquationParams::wave_map_3d();
        let h0 = |x: f64| {
            let rho = 1.0 / x.cosh();
            // h = 2 arctan(sech x) - pi/2, h' = -2 sech x tanh x / (1 + sech^2 x)
            PhaseState::new(2.0 * rho.atan() - FRAC_PI_2, -2.0 * rho * x.tanh() / (1.0 + rho * rho))
        };
        let r = energy_of_x_profile(&p, h0, &QuadConfig::default()).unwrap();
        assert!((r.energy - (PI / 4.0 - 1.0)).abs() < 1e-12, "{}", r.energy);
    }

    #[test]
    fn equator_map_has_zero_energy() {
        let p = EquationParams::wave_map_3d();
        let r = energy_of_x_profile(&p, |_| PhaseState::ZERO, &QuadConfig::default()).unwrap();
        assert_eq!(r.energy, 0.0);
    }

    #[test]
    fn energy_unavailable_for_higher_m() {
        let p = EquationParams::new(5, 1).unwrap();
        assert!(matches!(
            energy_of_x_profile(&p, |_| PhaseState::ZERO, &QuadConfig::default()),
            Err(Error::EnergyUnavailable(5))
        ));
    }

    #[test]
    fn ratios_need_consecutive_reports() {
        let r = |n, energy| EnergyReport { n, energy, quadrature_error: 0.0 };
        let v = energy_ratios(&[r(0, -2.0), r(1, -0.5)]).unwrap();
        assert_eq!(v, vec![4.0]);
        assert!(energy_ratios(&[r(0, -2.0), r(2, -0.5)]).is_err());
        assert!(energy_ratios(&[r(0, -2.0)]).is_err());
    }

    #[test]
    fn asymptotic_ratio_constant() {
        assert!((asymptotic_energy_ratio() - 10.749_087_029).abs() < 1e-8);
    }

    #[test]
    fn admissibility_arithmetic() {
        let adm = |m, l| is_admissible(&EquationParams::new(m, l).unwrap());
        assert!(adm(3, 1));
        assert!(adm(5, 1));
        assert!(!adm(7, 1));
        assert!(adm(9, 2));
        assert!(!adm(9, 1));
        assert!((condition_threshold(9) - 1.449_747_468_3).abs() < 1e-9);
        assert!((condition_threshold(7) - 1.035_533_905_9).abs() < 1e-9);
        for m in (3..=21).step_by(2) {
            for l in 1..=6 {
                let float = f64::from(l) > condition_threshold(m);
                assert_eq!(adm(m, l), float, "m={m} l={l}");
            }
        }
    }

    #[test]
    fn limiting_solution_normalization_and_spacing() {
        let p = EquationParams::wave_map_3d();
        let h = limiting_h(&p, 60.0, &IntegratorConfig::default()).unwrap();
        let s = h.samples.iter().find(|s| s.x > 1e-3).unwrap();
        assert!((s.value * s.ln_scale.exp() / (s.x * s.x) - 1.0).abs() < 1e-5);
        let spacing = h.zero_spacing(10).unwrap();
        assert!((spacing - 2.0 * PI / 7f64.sqrt()).abs() < 1e-3, "{spacing}");
    }

    #[test]
    fn limiting_solution_survives_overflow() {
        // Growth like exp(5.56 x) passes 1e100 near x = 41.
        let p = EquationParams::new(9, 1).unwrap();
        let h = limiting_h(&p, 60.0, &IntegratorConfig::default()).unwrap();
        let last = h.samples.last().unwrap();
        assert!(last.value.is_finite() && last.ln_scale > 100.0);
        assert!(h.zeros.is_empty());
        let growth = (last.ln_abs() - h.samples.iter().find(|s| s.x >= 40.0).unwrap().ln_abs()) / (last.x - 40.0);
        let r_plus = (7.0 + 17f64.sqrt()) / 2.0;
        assert!((growth - r_plus).abs() < 1e-2, "{growth}");
        let p = EquationParams::new(9, 3).unwrap();
        assert!(limiting_h(&p, 60.0, &IntegratorConfig::default()).unwrap().zeros.len() > 20);
    }

    #[test]
    fn condition_reports() {
        let r = check_condition(3, 1).unwrap();
        assert!(r.admissible && r.oscillation_check);
        let r = check_condition(7, 1).unwrap();
        assert!(!r.admissible && !r.oscillation_check);
        assert!(matches!(check_condition(4, 1), Err(Error::EvenDimension(4))));
    }
}
