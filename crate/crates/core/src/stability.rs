//! Linear stability of `f_n` for `m = 3`, `l = 1`.
//!
//! The eigenvalue problem is solved in the light-cone variable, where with
//! `u(x) = v(sech x)` it reads
//!
//! ```text
//! u'' - coth(x) u' + (2 cos 2h + (1 - lambda^2) / sinh^2 x) u = 0.
//! ```
//!
//! Both endpoint branches are followed in a Prüfer angle `theta`,
//! `tan theta = u / u'`, from which eigenvalues are counted and polished.

use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equations::{self, rho_of_x, x_of_rho};
use crate::error::{Error, Result};
use crate::integrator::{self, StepControl};
use crate::params::PhaseState;
use crate::quadrature::{self, QuadConfig};
use crate::shooting::ConnectingOrbit;
use crate::trajectory::{Coordinate, Node, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigenShotConfig {
    pub lambda2_min: f64,
    pub lambda2_max: f64,
    pub grid_points: usize,
    /// The scan is extended by decades up to this bound until every
    /// eigenvalue is enclosed.
    pub lambda2_ceiling: f64,
    /// Matching abscissa in `rho`.
    pub match_point: f64,
    /// Relative tolerance of the eigenvalue polish.
    pub secant_tol: f64,
    /// Launch offset from the light cone, in `x`.
    pub cone_offset: f64,
    /// Launch offset from the origin, in `rho` (further reduced for large `a`).
    pub origin_offset: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for EigenShotConfig {
    fn default() -> Self {
        Self {
            lambda2_min: 1e-4,
            lambda2_max: 1e5,
            grid_points: 400,
            lambda2_ceiling: 1e12,
            match_point: 0.5,
            secant_tol: 1e-9,
            cone_offset: 1e-4,
            origin_offset: 1e-6,
            rel_tol: 1e-11,
            abs_tol: 1e-13,
        }
    }
}

impl EigenShotConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.match_point > 0.0
            && self.match_point < 1.0
            && self.lambda2_min > 0.0
            && self.lambda2_max > self.lambda2_min
            && self.grid_points >= 2
            && self.secant_tol > 0.0
            && self.cone_offset > 0.0
            && self.origin_offset > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams("invalid eigenvalue shooting config".into()))
        }
    }

    fn step_control(&self) -> StepControl {
        StepControl { rel_tol: self.rel_tol, abs_tol: self.abs_tol, ..StepControl::default() }
    }
}

fn ensure_supported(orbit: &ConnectingOrbit) -> Result<()> {
    if orbit.params.m() != 3 || orbit.params.l() != 1 {
        return Err(Error::StabilityUnsupported);
    }
    Ok(())
}

/// First-order system of the eigenvalue equation in `rho`:
/// `v'' + (2/rho) v' + [(1 - lambda^2)/(1 - rho^2)^2 - 2 cos(2f)/(rho^2 (1 - rho^2))] v = 0`.
pub fn eigen_rhs(orbit: &ConnectingOrbit, lambda2: f64, rho: f64, s: PhaseState) -> Result<PhaseState> {
    ensure_supported(orbit)?;
    let f = orbit.state_rho(rho)?.u;
    Ok(eigen_rhs_with(f, lambda2, rho, s))
}

fn eigen_rhs_with(f: f64, lambda2: f64, rho: f64, s: PhaseState) -> PhaseState {
    let w = (1.0 - rho) * (1.0 + rho);
    let q = (1.0 - lambda2) / (w * w) - 2.0 * (2.0 * f).cos() / (rho * rho * w);
    PhaseState::new(s.du, -2.0 * s.du / rho - q * s.u)
}

/// Potential `Q` of the `x`-form equation.
fn potential(orbit: &ConnectingOrbit, lambda2: f64, x: f64) -> f64 {
    let h = orbit.state_x(x).map_or(-std::f64::consts::FRAC_PI_2, |s| s.u);
    let sh = x.sinh();
    2.0 * (2.0 * h).cos() + (1.0 - lambda2) / (sh * sh)
}

fn prufer_rhs(orbit: &ConnectingOrbit, lambda2: f64, x: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let q = potential(orbit, lambda2, x);
    c * c + q * s * s - s * c / x.tanh()
}

/// Launch data at the light cone, `u = x^(1+lambda) (1 + e x^2)`, as `u'/u`.
fn cone_log_derivative(lambda2: f64, x: f64) -> f64 {
    let lam = lambda2.sqrt();
    let e = (lam - lambda2 - 4.0) / (12.0 * (lam + 1.0));
    (1.0 + lam) / x + 2.0 * e * x / (1.0 + e * x * x)
}

/// Launch point and `(v, dv/drho)` at the origin for `v = rho (1 + g rho^2)`.
fn origin_launch(orbit: &ConnectingOrbit, lambda2: f64, cfg: &EigenShotConfig) -> (f64, PhaseState) {
    let rho = cfg.origin_offset.min(1e-4 / orbit.a);
    let a = orbit.a;
    let g = (1.0 + lambda2 - 4.0 * a * a) / 10.0;
    (rho, PhaseState::new(rho * (1.0 + g * rho * rho), 1.0 + 3.0 * g * rho * rho))
}

/// `(u, du/dx)` from `(v, dv/drho)`.
fn v_to_u(rho: f64, s: PhaseState) -> PhaseState {
    let x = x_of_rho(rho);
    PhaseState::new(s.u, -s.du * rho * x.tanh())
}

/// Prüfer angle at the matching point from both sides: `(theta_cone, theta_origin)`.
fn prufer_angles(orbit: &ConnectingOrbit, lambda2: f64, cfg: &EigenShotConfig) -> Result<(f64, f64)> {
    let x_m = x_of_rho(cfg.match_point);
    let ctl = cfg.step_control();
    let rhs = |x: f64, y: &[f64; 1]| [prufer_rhs(orbit, lambda2, x, y[0])];

    let x_r = cfg.cone_offset;
    let theta_r0 = 1f64.atan2(cone_log_derivative(lambda2, x_r));
    let mut theta_r = theta_r0;
    let (res, _) = integrator::solve(rhs, x_r, [theta_r0], x_m, &ctl, |st| {
        theta_r = st.y1[0];
        ControlFlow::Continue(())
    });
    res.map_err(|u| Error::RootNotConverged { lo: x_r, hi: u.t })?;

    let (rho_l, v0) = origin_launch(orbit, lambda2, cfg);
    let x_l = x_of_rho(rho_l);
    let u0 = v_to_u(rho_l, v0);
    let theta_l0 = u0.u.atan2(u0.du);
    let mut theta_l = theta_l0;
    let (res, _) = integrator::solve(rhs, x_l, [theta_l0], x_m, &ctl, |st| {
        theta_l = st.y1[0];
        ControlFlow::Continue(())
    });
    res.map_err(|u| Error::RootNotConverged { lo: x_m, hi: u.t })?;
    Ok((theta_r, theta_l))
}

/// Angle mismatch `theta_cone - theta_origin` at the matching point. It is
/// a multiple of `pi` exactly at eigenvalues and decreases with `lambda^2`.
pub fn angle_mismatch(orbit: &ConnectingOrbit, lambda2: f64, cfg: &EigenShotConfig) -> Result<f64> {
    ensure_supported(orbit)?;
    let (r, l) = prufer_angles(orbit, lambda2, cfg)?;
    Ok(r - l)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogDerivativeMismatch {
    /// `(v'/v)_origin - (v'/v)_cone` at the matching point, in `rho`.
    pub value: f64,
    /// `v` vanishes at the matching point on one of the branches; `value`
    /// is meaningless and the angle mismatch should be used instead.
    pub node_collision: bool,
}

/// Difference of logarithmic derivatives of the two branches at the matching point.
pub fn eigen_mismatch(
    orbit: &ConnectingOrbit,
    lambda2: f64,
    cfg: &EigenShotConfig,
) -> Result<LogDerivativeMismatch> {
    ensure_supported(orbit)?;
    if !(lambda2 > 0.0) {
        return Err(Error::InvalidParams("eigenvalues require lambda^2 > 0".into()));
    }
    let (tr, tl) = prufer_angles(orbit, lambda2, cfg)?;
    let rho = cfg.match_point;
    let jac = rho * x_of_rho(rho).tanh();
    // v'/v = (u'/u) / (d rho/dx) = -cot(theta) / (rho tanh x)
    let logd = |t: f64| -t.cos() / t.sin() / jac;
    let collision = tr.sin().abs() < 1e-8 || tl.sin().abs() < 1e-8;
    Ok(LogDerivativeMismatch { value: logd(tl) - logd(tr), node_collision: collision })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub n: usize,
    /// Positive `lambda^2`, ascending.
    pub eigenvalues: Vec<f64>,
    pub gauge_residual: f64,
    pub gauge_zero_count: usize,
    /// Upper end of the scan actually used.
    pub scan_max: f64,
}

/// Grid points added per round when the scan is extended upward.
const EXTENSION_BLOCK: usize = 12;

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

/// Illinois iteration on `g` over a sign-changing bracket.
fn polish<G: Fn(f64) -> Result<f64>>(g: G, mut lo: f64, mut hi: f64, mut g_lo: f64, mut g_hi: f64, tol: f64) -> Result<f64> {
    let mut side = 0i8;
    for _ in 0..200 {
        // Regula falsi in log lambda^2 keeps steps balanced across decades.
        let (la, lb) = (lo.ln(), hi.ln());
        let lc = (la * g_hi - lb * g_lo) / (g_hi - g_lo);
        let c = lc.exp();
        if (hi - lo) <= tol * c {
            return Ok(c);
        }
        let gc = g(c)?;
        if gc == 0.0 {
            return Ok(c);
        }
        if gc.signum() == g_hi.signum() {
            hi = c;
            g_hi = gc;
            if side == -1 {
                g_lo *= 0.5;
            }
            side = -1;
        } else {
            lo = c;
            g_lo = gc;
            if side == 1 {
                g_hi *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::RootNotConverged { lo, hi })
}

/// Positive eigenvalues of the linearization around `orbit`.
pub fn find_spectrum(orbit: &ConnectingOrbit, cfg: &EigenShotConfig) -> Result<SpectrumResult> {
    ensure_supported(orbit)?;
    cfg.validate()?;
    let d = |l2: f64| angle_mismatch(orbit, l2, cfg);
    let pi = std::f64::consts::PI;

    let grid = log_grid(cfg.lambda2_min, cfg.lambda2_max, cfg.grid_points);
    let mut values: Vec<f64> = grid.par_iter().map(|&l2| d(l2)).collect::<Result<_>>()?;
    let mut grid = grid;
    // Every eigenvalue is enclosed once the mismatch falls below zero.
    let step = (grid[1] / grid[0]).ln();
    while *values.last().expect("non-empty grid") >= 0.0 {
        let top = *grid.last().expect("non-empty grid");
        if top >= cfg.lambda2_ceiling {
            break;
        }
        let extra: Vec<f64> = (1..=EXTENSION_BLOCK)
            .map(|i| top * (step * i as f64).exp())
            .take_while(|&l2| l2 <= cfg.lambda2_ceiling * (1.0 + 1e-12))
            .collect();
        if extra.is_empty() {
            break;
        }
        let more: Vec<f64> = extra.par_iter().map(|&l2| d(l2)).collect::<Result<_>>()?;
        grid.extend(extra);
        values.extend(more);
    }

    let mut eigenvalues = Vec::new();
    for i in 0..grid.len() - 1 {
        let (d0, d1) = (values[i], values[i + 1]);
        // Multiples of pi crossed on the way down, d1 < j pi <= d0.
        let first = (d1 / pi).floor() as i64 + 1;
        let last = (d0 / pi).floor() as i64;
        for j in (first..=last).rev() {
            let target = j as f64 * pi;
            let root = polish(
                |l2| Ok(d(l2)? - target),
                grid[i],
                grid[i + 1],
                d0 - target,
                d1 - target,
                cfg.secant_tol,
            )?;
            eigenvalues.push(root);
        }
    }
    eigenvalues.sort_by(f64::total_cmp);

    let gauge = gauge_mode(orbit, &default_gauge_grid())?;
    let result = SpectrumResult {
        n: orbit.n,
        eigenvalues,
        gauge_residual: gauge_residual(orbit, &default_gauge_grid())?,
        gauge_zero_count: gauge.zero_count,
        scan_max: *grid.last().expect("non-empty grid"),
    };
    if result.eigenvalues.len() != orbit.n {
        return Err(Error::CountMismatch {
            expected: orbit.n,
            found: result.eigenvalues.len(),
            eigenvalues: result.eigenvalues,
        });
    }
    Ok(result)
}

/// Eigenfunction normalized to `u = 1` at the matching point (up to the
/// sign of the cone branch), stored in `x` with quintic dense output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenfunction {
    pub lambda2: f64,
    /// `(u, du/dx)` on `[cone_offset, arcsech(origin launch)]`.
    pub profile: Trajectory,
}

impl Eigenfunction {
    /// `(v, dv/drho)`; zero outside the computed span.
    pub fn state_rho(&self, rho: f64) -> PhaseState {
        let x = x_of_rho(rho);
        match self.profile.eval(x) {
            Some(s) => PhaseState::new(s.u, -s.du / (rho * x.tanh())),
            None => PhaseState::ZERO,
        }
    }

    /// Local exponent `d ln v / d ln(1 - rho)` near the light cone.
    pub fn lightcone_exponent(&self, x: f64) -> Option<f64> {
        let s = self.profile.eval(x)?;
        // ln(1 - rho) ~ 2 ln x near x = 0, with the exact map for the Jacobian.
        let rho = rho_of_x(x);
        let dlog1m = rho * x.tanh() / (1.0 - rho);
        Some((s.du / s.u) / dlog1m)
    }
}

/// Integrates the amplitude and angle of one branch, returning nodes of
/// `(x, theta, ln R)`.
fn branch(
    orbit: &ConnectingOrbit,
    lambda2: f64,
    x0: f64,
    theta0: f64,
    x_end: f64,
    ctl: &StepControl,
) -> Result<Vec<(f64, f64, f64)>> {
    let rhs = |x: f64, y: &[f64; 2]| {
        let (s, c) = y[0].sin_cos();
        let q = potential(orbit, lambda2, x);
        let coth = 1.0 / x.tanh();
        [c * c + q * s * s - s * c * coth, s * c * (1.0 - q) + coth * c * c]
    };
    let mut out = vec![(x0, theta0, 0.0)];
    let (res, _) = integrator::solve(rhs, x0, [theta0, 0.0], x_end, ctl, |st| {
        out.push((st.t1, st.y1[0], st.y1[1]));
        ControlFlow::Continue(())
    });
    res.map_err(|u| Error::RootNotConverged { lo: x0, hi: u.t })?;
    Ok(out)
}

pub fn eigenfunction(orbit: &ConnectingOrbit, lambda2: f64, cfg: &EigenShotConfig) -> Result<Eigenfunction> {
    ensure_supported(orbit)?;
    let x_m = x_of_rho(cfg.match_point);
    let ctl = cfg.step_control();
    let x_r = cfg.cone_offset;
    let right = branch(orbit, lambda2, x_r, 1f64.atan2(cone_log_derivative(lambda2, x_r)), x_m, &ctl)?;
    let (rho_l, v0) = origin_launch(orbit, lambda2, cfg);
    let u0 = v_to_u(rho_l, v0);
    let left = branch(orbit, lambda2, x_of_rho(rho_l), u0.u.atan2(u0.du), x_m, &ctl)?;

    let &(_, th_r, ln_r) = right.last().expect("branch has nodes");
    let &(_, th_l, ln_l) = left.last().expect("branch has nodes");
    // Branches agree up to sign at an eigenvalue.
    let sign = (th_r - th_l).cos().signum();
    let node = |x: f64, th: f64, ln: f64, scale: f64| {
        let amp = scale * ln.exp();
        let (s, c) = th.sin_cos();
        let (u, du) = (amp * s, amp * c);
        let d2u = du / x.tanh() - potential(orbit, lambda2, x) * u;
        Node { t: x, state: PhaseState::new(u, du), slope: PhaseState::new(du, d2u) }
    };
    let mut nodes: Vec<Node> = right.iter().map(|&(x, th, ln)| node(x, th, ln - ln_r, 1.0)).collect();
    nodes.extend(left.iter().rev().skip(1).map(|&(x, th, ln)| node(x, th, ln - ln_l, sign)));
    Ok(Eigenfunction { lambda2, profile: Trajectory::from_nodes(Coordinate::X, nodes) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeMode {
    /// `(rho, v)` with `v = rho sqrt(1 - rho^2) f'(rho)`.
    pub samples: Vec<(f64, f64)>,
    /// Sign changes of `v` on `(0, 1)`.
    pub zero_count: usize,
}

/// Uniform grid on `[0.01, 0.99]`.
pub fn default_gauge_grid() -> Vec<f64> {
    (0..=980).map(|i| 0.01 + 0.001 * f64::from(i)).collect()
}

pub fn gauge_mode(orbit: &ConnectingOrbit, grid: &[f64]) -> Result<GaugeMode> {
    let samples = grid
        .iter()
        .map(|&rho| {
            let s = orbit.state_rho(rho)?;
            Ok((rho, rho * ((1.0 - rho) * (1.0 + rho)).sqrt() * s.du))
        })
        .collect::<Result<Vec<_>>>()?;
    // Zeros of v are the extrema of f; they are counted on the dense profile
    // so that none between grid points is missed.
    let zero_count = orbit
        .profile
        .events_of(crate::trajectory::EventKind::Extremum)
        .filter(|e| e.at > 0.0 && e.at < 1.0)
        .count();
    Ok(GaugeMode { samples, zero_count })
}

/// `(f, f', f'', f''')` with the higher derivatives taken from the profile equation.
fn profile_jet(orbit: &ConnectingOrbit, rho: f64) -> Result<[f64; 4]> {
    let params = &orbit.params;
    let s = orbit.state_rho(rho)?;
    let (f, f1) = (s.u, s.du);
    let f2 = equations::rhs_rho(params, rho, s)?.du;
    let m = f64::from(params.m());
    let k = params.k();
    let w = (1.0 - rho) * (1.0 + rho);
    let p = (m - 1.0) / rho + (m - 3.0) * rho / w;
    let dp = -(m - 1.0) / (rho * rho) + (m - 3.0) * (1.0 + rho * rho) / (w * w);
    let sden = rho * rho * w;
    let ds = -(2.0 * rho - 4.0 * rho.powi(3)) / (sden * sden);
    let f3 = -dp * f1 - p * f2 + 2.0 * k * (2.0 * f).cos() * f1 / sden + k * (2.0 * f).sin() * ds;
    Ok([f, f1, f2, f3])
}

/// Residual of the eigenvalue equation at `lambda = 0` applied to the
/// gauge mode, relative to `max |v''|` on the grid.
pub fn gauge_residual(orbit: &ConnectingOrbit, grid: &[f64]) -> Result<f64> {
    ensure_supported(orbit)?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &rho in grid {
        let [f, f1, f2, f3] = profile_jet(orbit, rho)?;
        let w = ((1.0 - rho) * (1.0 + rho)).sqrt();
        let g = rho * w;
        let g1 = (1.0 - 2.0 * rho * rho) / w;
        let g2 = rho * (2.0 * rho * rho - 3.0) / (w * w * w);
        let v = g * f1;
        let dv = g1 * f1 + g * f2;
        let d2v = g2 * f1 + 2.0 * g1 * f2 + g * f3;
        let expected = eigen_rhs_with(f, 0.0, rho, PhaseState::new(v, dv)).du;
        worst = worst.max((d2v - expected).abs());
        scale = scale.max(d2v.abs());
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// Second variation `1/2 int_0^1 (rho^2 v'^2 + 2 cos(2 f) v^2 / (1 - rho^2)) drho`
/// for a perturbation given as `(v, dv/drho)`.
pub fn hessian_form<V: Fn(f64) -> PhaseState>(orbit: &ConnectingOrbit, v: V, quad: &QuadConfig) -> Result<f64> {
    ensure_supported(orbit)?;
    let density = |rho: f64| {
        let s = v(rho);
        if s.u == 0.0 && s.du == 0.0 {
            return 0.0;
        }
        let f = orbit.state_rho(rho).map_or(0.0, |p| p.u);
        0.5 * (rho * rho * s.du * s.du + 2.0 * (2.0 * f).cos() * s.u * s.u / ((1.0 - rho) * (1.0 + rho)))
    };
    let mut pts: Vec<f64> = (0..=100).map(|i| f64::from(i) / 100.0).collect();
    // Refine towards the origin, where profiles with large `a` vary fastest.
    pts.extend((1..=12).map(|j| 10f64.powi(-j - 2)));
    pts.sort_by(f64::total_cmp);
    Ok(quadrature::integrate(density, &pts, quad)?.value)
}

/// `1/2 (1 - lambda^2) int rho^2 v^2 / (1 - rho^2)^2 drho`, the value the
/// second variation takes on an eigenfunction after integration by parts.
pub fn eigen_hessian_identity(ef: &Eigenfunction, quad: &QuadConfig) -> Result<f64> {
    let integrand = |rho: f64| {
        let v = ef.state_rho(rho).u;
        let w = (1.0 - rho) * (1.0 + rho);
        rho * rho * v * v / (w * w)
    };
    let mut pts: Vec<f64> = (0..=100).map(|i| f64::from(i) / 100.0).collect();
    pts.extend((1..=12).map(|j| 10f64.powi(-j - 2)));
    pts.sort_by(f64::total_cmp);
    Ok(0.5 * (1.0 - ef.lambda2) * quadrature::integrate(integrand, &pts, quad)?.value)
}

/// `lambda^2` at which the angle mismatch crosses `target` inside `[lo, hi]`,
/// bracketed by the caller. Exposed for diagnostics.
pub fn solve_angle(orbit: &ConnectingOrbit, target: f64, lo: f64, hi: f64, cfg: &EigenShotConfig) -> Result<f64> {
    let g = |l2: f64| Ok(angle_mismatch(orbit, l2, cfg)? - target);
    let (g_lo, g_hi) = (g(lo)?, g(hi)?);
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::RootNotConverged { lo, hi });
    }
    polish(g, lo, hi, g_lo, g_hi, cfg.secant_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shooting::{solve_family, ShooterConfig};
    use crate::{EquationParams, IntegratorConfig};

    fn ground_state() -> ConnectingOrbit {
        let sh = ShooterConfig { n_max: 0, ..Default::default() };
        solve_family(&EquationParams::wave_map_3d(), &sh, &IntegratorConfig::default())
            .unwrap()
            .remove(0)
    }

    #[test]
    fn rhs_against_closed_form_substitution() {
        // cos(2 f0) = (1 - 6 rho^2 + rho^4) / (1 + rho^2)^2 = -0.28 at rho = 1/2.
        let f0 = 2.0 * 0.5f64.atan();
        let d = eigen_rhs_with(f0, 1.0, 0.5, PhaseState::new(1.0, 0.0));
        assert_eq!(d.u, 0.0);
        assert!((d.du + 224.0 / 75.0).abs() < 1e-13, "{}", d.du);

        let orbit = ground_state();
        let d = eigen_rhs(&orbit, 1.0, 0.5, PhaseState::new(1.0, 0.0)).unwrap();
        assert!((d.du + 224.0 / 75.0).abs() < 1e-9, "{}", d.du);
        let zero = eigen_rhs(&orbit, 7.0, 0.3, PhaseState::ZERO).unwrap();
        assert_eq!(zero, PhaseState::ZERO);
    }

    #[test]
    fn prufer_angle_matches_linear_equation() {
        let orbit = ground_state();
        let (x, l2): (f64, f64) = (0.7, 3.0);
        let (u, du): (f64, f64) = (0.4, -1.3);
        let d2u = du / x.tanh() - potential(&orbit, l2, x) * u;
        let theta = u.atan2(du);
        // theta' = (u' u' - u u'') / (u^2 + u'^2)
        let expected = (du * du - u * d2u) / (u * u + du * du);
        assert!((prufer_rhs(&orbit, l2, x, theta) - expected).abs() < 1e-13);
    }

    #[test]
    fn ground_state_gauge_mode_closed_form() {
        let orbit = ground_state();
        let grid = default_gauge_grid();
        let g = gauge_mode(&orbit, &grid).unwrap();
        assert_eq!(g.zero_count, 0);
        for &(rho, v) in &g.samples {
            let exact = 2.0 * rho * (1.0 - rho * rho).sqrt() / (1.0 + rho * rho);
            assert!((v - exact).abs() < 1e-9, "rho = {rho}: {v} vs {exact}");
        }
        assert!(gauge_residual(&orbit, &grid).unwrap() < 1e-9);
    }

    #[test]
    fn ground_state_has_no_unstable_mode() {
        let orbit = ground_state();
        let cfg = EigenShotConfig::default();
        let spec = find_spectrum(&orbit, &cfg).unwrap();
        assert!(spec.eigenvalues.is_empty());
        assert!((spec.scan_max / cfg.lambda2_max - 1.0).abs() < 1e-12);
        // The mismatch starts just below zero and never reaches -pi.
        let pi = std::f64::consts::PI;
        let lo = angle_mismatch(&orbit, cfg.lambda2_min, &cfg).unwrap();
        let hi = angle_mismatch(&orbit, cfg.lambda2_max, &cfg).unwrap();
        assert!(lo < 0.0 && lo > -0.1 * pi, "{lo}");
        assert!(hi < lo && hi > -pi, "{hi}");
    }

    #[test]
    fn other_dimensions_are_rejected() {
        let sh = ShooterConfig { n_max: 0, ..Default::default() };
        let orbit = solve_family(&EquationParams::new(5, 1).unwrap(), &sh, &IntegratorConfig::default())
            .unwrap()
            .remove(0);
        assert!(matches!(
            find_spectrum(&orbit, &EigenShotConfig::default()),
            Err(Error::StabilityUnsupported)
        ));
    }

    #[test]
    fn config_validation() {
        let bad = EigenShotConfig { match_point: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(EigenShotConfig::default().validate().is_ok());
    }
}
