//! Shooting for the connecting orbits `f_n`.
//!
//! The search runs in two stages. First the light-cone parameter `beta` is
//! bracketed and bisected on the escape index of the `beta`-orbit. Then each
//! profile is polished by shooting from both singular endpoints to a fitting
//! point with a Newton iteration on `(a, b_rho)`.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equations::{
    self, rho_of_x, series_lightcone, series_origin, x_of_rho, x_state_to_rho,
};
use crate::error::{Error, Result};
use crate::params::{EquationParams, PhaseState};
use crate::trajectory::{
    integrate, Coordinate, Equation, IntegratorConfig, Node, Termination, Trajectory,
};

/// Largest excitation index the solver accepts.
pub const MAX_INDEX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fate {
    EscapedPlus,
    EscapedMinus,
    Trapped,
}

/// Fate of a single `beta`-orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitClass {
    pub fate: Fate,
    /// Zeros of `h` before escape (or before `x_max` when trapped).
    pub zero_count: usize,
    pub escape_x: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShooterConfig {
    pub n_max: usize,
    pub bracket_growth: f64,
    /// Smallest `beta` of the initial scan.
    pub scan_start: f64,
    pub bisect_tol: f64,
    pub newton_tol: f64,
    pub max_newton_iter: usize,
    /// Fitting point `rho_mid` of the two-sided shooting.
    pub fit_point: f64,
    /// Size of `a rho^l` at the left launch point.
    pub origin_amplitude: f64,
}

impl Default for ShooterConfig {
    fn default() -> Self {
        Self {
            n_max: 4,
            bracket_growth: 1.3,
            scan_start: 1e-6,
            bisect_tol: 1e-12,
            newton_tol: 1e-10,
            max_newton_iter: 40,
            fit_point: 0.5,
            origin_amplitude: 1e-7,
        }
    }
}

impl ShooterConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidParams(format!("shooter config: {what}")));
        if self.n_max > MAX_INDEX {
            return bad(format!("n_max = {} exceeds the cap {MAX_INDEX}", self.n_max));
        }
        if !(self.fit_point > 0.0 && self.fit_point < 1.0) {
            return bad("fit_point must lie in (0, 1)".into());
        }
        if !(self.bracket_growth > 1.0) {
            return bad("bracket_growth must exceed 1".into());
        }
        if !(self.bisect_tol > 0.0 && self.newton_tol > 0.0 && self.scan_start > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if !(self.origin_amplitude > 0.0 && self.origin_amplitude < 1e-2) {
            return bad("origin_amplitude must lie in (0, 1e-2)".into());
        }
        Ok(())
    }
}

/// Integrates the `beta`-orbit from the light cone with escape detection.
pub fn beta_orbit(params: &EquationParams, beta: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let x0 = cfg.launch_eps;
    let s0 = series_lightcone(params, beta, x0)?;
    integrate(params, Equation::ProfileX, (x0, s0), cfg.x_max, &cfg.resolving(s0.u))
}

pub fn classify_orbit(params: &EquationParams, beta: f64, cfg: &IntegratorConfig) -> Result<OrbitClass> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParams(format!("beta = {beta} must be positive")));
    }
    let traj = beta_orbit(params, beta, cfg)?;
    let fate = match traj.termination {
        Termination::EscapedPlus => Fate::EscapedPlus,
        Termination::EscapedMinus => Fate::EscapedMinus,
        _ => Fate::Trapped,
    };
    Ok(OrbitClass {
        fate,
        zero_count: traj.crossing_count(),
        escape_x: traj.escape().map(|e| e.at),
    })
}

/// `beta_n` together with the final bisection bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaBracket {
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
    pub beta: f64,
}

/// One point of the geometric `beta` scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub beta: f64,
    pub class: OrbitClass,
}

/// Classifies a geometric grid of `beta` values, extending it upward until
/// an orbit escapes with no zeros and downward until one has more than
/// `n_max` zeros. Returned in increasing `beta`.
pub fn scan(
    params: &EquationParams,
    n_max: usize,
    shooter: &ShooterConfig,
    cfg: &IntegratorConfig,
) -> Result<Vec<ScanPoint>> {
    let g = shooter.bracket_growth;
    let classify = |betas: &[f64]| -> Result<Vec<ScanPoint>> {
        betas
            .par_iter()
            .map(|&beta| classify_orbit(params, beta, cfg).map(|class| ScanPoint { beta, class }))
            .collect()
    };

    let mut betas = Vec::new();
    let mut b = shooter.scan_start;
    while b < 1.0 {
        betas.push(b);
        b *= g;
    }
    let mut points = classify(&betas)?;

    let mut top = *points.last().expect("scan grid is non-empty");
    while !(top.class.zero_count == 0 && top.class.fate != Fate::Trapped) {
        if top.beta > 1e6 {
            return Err(Error::BracketNotFound {
                n: 0,
                reason: "large-beta orbits never escape without zeros".into(),
            });
        }
        let beta = top.beta * g;
        top = ScanPoint { beta, class: classify_orbit(params, beta, cfg)? };
        points.push(top);
    }

    let mut bottom = points[0];
    while bottom.class.zero_count <= n_max {
        let beta = bottom.beta / g;
        if beta < 1e-14 {
            return Err(Error::BracketNotFound {
                n: bottom.class.zero_count + 1,
                reason: format!(
                    "orbits with beta down to {:e} have at most {} zeros; the linearized \
                     equation may not oscillate for (m, l) = ({}, {})",
                    bottom.beta,
                    bottom.class.zero_count,
                    params.m(),
                    params.l()
                ),
            });
        }
        bottom = ScanPoint { beta, class: classify_orbit(params, beta, cfg)? };
        points.insert(0, bottom);
    }
    Ok(points)
}

/// Escape index: zeros of `h` before the orbit leaves the strip.
fn escape_index(params: &EquationParams, beta: f64, cfg: &IntegratorConfig) -> Result<usize> {
    Ok(classify_orbit(params, beta, cfg)?.zero_count)
}

/// Brackets `beta_n` from scan data: the topmost adjacent pair whose lower
/// point has more than `n` zeros and whose upper point has at most `n`.
fn bracket_from_scan(points: &[ScanPoint], n: usize) -> Result<(f64, f64)> {
    points
        .windows(2)
        .rev()
        .find(|w| w[0].class.zero_count > n && w[1].class.zero_count <= n)
        .map(|w| (w[0].beta, w[1].beta))
        .ok_or_else(|| Error::BracketNotFound {
            n,
            reason: "no zero-count transition in the scan".into(),
        })
}

fn bisect(
    params: &EquationParams,
    n: usize,
    (mut lo, mut hi): (f64, f64),
    shooter: &ShooterConfig,
    cfg: &IntegratorConfig,
) -> Result<BetaBracket> {
    while hi - lo > shooter.bisect_tol * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if escape_index(params, mid, cfg)? > n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(BetaBracket { n, lo, hi, beta: 0.5 * (lo + hi) })
}

/// Locates `beta_n`, the boundary between orbits escaping after `n + 1`
/// zeros (below) and after `n` zeros (above).
pub fn find_beta_n(
    params: &EquationParams,
    n: usize,
    shooter: &ShooterConfig,
    cfg: &IntegratorConfig,
) -> Result<BetaBracket> {
    let points = scan(params, n, shooter, cfg)?;
    bisect(params, n, bracket_from_scan(&points, n)?, shooter, cfg)
}

/// `beta_0 > ... > beta_{n_max}` from one shared scan, bisected in parallel.
pub fn find_betas(
    params: &EquationParams,
    shooter: &ShooterConfig,
    cfg: &IntegratorConfig,
) -> Result<Vec<BetaBracket>> {
    shooter.validate()?;
    cfg.validate()?;
    let points = scan(params, shooter.n_max, shooter, cfg)?;
    let brackets: Vec<BetaBracket> = (0..=shooter.n_max)
        .into_par_iter()
        .map(|n| bisect(params, n, bracket_from_scan(&points, n)?, shooter, cfg))
        .collect::<Result<_>>()?;
    if let Some(w) = brackets.windows(2).find(|w| !(w[1].beta < w[0].beta)) {
        return Err(Error::BracketNotFound {
            n: w[1].n,
            reason: format!("beta_{} = {} is not below beta_{} = {}", w[1].n, w[1].beta, w[0].n, w[0].beta),
        });
    }
    Ok(brackets)
}

/// Sign of the light-cone coefficient of the normalized profile with `f(0) = 0`.
///
/// The raw orbit with `beta > 0` starts above the equator and, after `n`
/// crossings, tends to `(-1)^n pi/2`; reflecting when that limit is `+pi/2`
/// moves the origin value from `pi` to `0`.
pub fn normalized_beta(n: usize, beta_n: f64) -> f64 {
    if n % 2 == 0 {
        -beta_n
    } else {
        beta_n
    }
}

/// Light-cone coefficient in `rho`: `f ~ pi/2 - b_rho (1 - rho)^((m-1)/2)`.
///
/// Uses `1 - rho = x^2/2 + O(x^4)`, so `b_rho = -beta_x 2^((m-1)/2)`. For
/// `m = 3` this is the familiar `f ~ pi/2 + b_rho (rho - 1)`.
pub fn convert_parameters(params: &EquationParams, beta_x: f64) -> f64 {
    -beta_x * f64::from(1u32 << params.lightcone_exponent())
}

/// Inverse of [`convert_parameters`].
pub fn beta_from_b(params: &EquationParams, b_rho: f64) -> f64 {
    -b_rho / f64::from(1u32 << params.lightcone_exponent())
}

/// A converged profile `f_n` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectingOrbit {
    pub params: EquationParams,
    pub n: usize,
    /// Bisected `beta_n` (positive, unnormalized).
    pub beta_n: f64,
    /// Normalized light-cone coefficient, `h ~ beta_x x^(m-1)`.
    pub beta_x: f64,
    /// `f ~ a rho^l` at the origin.
    pub a: f64,
    pub b_rho: f64,
    /// Left launch point in `rho`.
    pub rho_min: f64,
    /// Right launch point in `x`.
    pub x_min: f64,
    pub fit_point: f64,
    /// Final matching residual `|(df, df')|` at the fitting point.
    pub mismatch: f64,
    pub newton_iterations: usize,
    pub energy: Option<f64>,
    /// Assembled profile in `rho` on `[rho_min, sech x_min]`.
    pub profile: Trajectory,
    /// Leg from the origin in `rho`, up to `fit_point`.
    pub left: Trajectory,
    /// Leg from the light cone in `x`, up to `arcsech fit_point`.
    pub right: Trajectory,
}

impl ConnectingOrbit {
    pub fn x_fit(&self) -> f64 {
        x_of_rho(self.fit_point)
    }

    /// `(f, df/drho)` anywhere in `(0, 1)`, using the endpoint expansions
    /// beyond the launch points.
    pub fn state_rho(&self, rho: f64) -> Result<PhaseState> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::Domain { coordinate: "rho", at: rho });
        }
        if rho <= self.rho_min {
            return series_origin(&self.params, self.a, rho);
        }
        if rho <= self.fit_point {
            return self.left.eval(rho).ok_or(Error::Domain { coordinate: "rho", at: rho });
        }
        let x = x_of_rho(rho);
        Ok(x_state_to_rho(x, self.state_x(x)?).1)
    }

    /// `(h, dh/dx)` anywhere in `(0, inf)`.
    pub fn state_x(&self, x: f64) -> Result<PhaseState> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Domain { coordinate: "x", at: x });
        }
        if x <= self.x_min {
            return series_lightcone(&self.params, self.beta_x, x);
        }
        if x <= self.x_fit() {
            return self.right.eval(x).ok_or(Error::Domain { coordinate: "x", at: x });
        }
        let rho = rho_of_x(x);
        if rho <= 0.0 {
            return Ok(PhaseState::new(-FRAC_PI_2, 0.0));
        }
        Ok(equations::rho_state_to_x(rho, self.state_rho(rho)?).1)
    }

    /// Relative deviation of each leg from the two-term endpoint expansion a
    /// decade inside its launch point: `(origin, light cone)`.
    pub fn boundary_residuals(&self) -> (f64, f64) {
        let l = self.params.l() as i32;
        let rho = 10.0 * self.rho_min;
        let origin = match (self.left.eval(rho), series_origin(&self.params, self.a, rho)) {
            (Some(s), Ok(series)) => (s.u - series.u).abs() / (self.a * rho.powi(l)),
            _ => f64::INFINITY,
        };
        let x = 10.0 * self.x_min;
        let p = (self.params.m() - 1) as i32;
        let cone = match (self.right.eval(x), series_lightcone(&self.params, self.beta_x, x)) {
            (Some(s), Ok(series)) => (s.u - series.u).abs() / (self.beta_x.abs() * x.powi(p)),
            _ => f64::INFINITY,
        };
        (origin, cone)
    }

    /// Equator crossings of the assembled profile.
    pub fn crossing_count(&self) -> usize {
        self.profile.crossing_count()
    }
}

/// Converts a node of the `x` leg to `rho`, including the second derivative.
fn x_node_to_rho(node: &Node) -> Node {
    let x = node.t;
    let rho = rho_of_x(x);
    let tanh = x.tanh();
    // f' = -h' / F with F = rho tanh x and dF/dx = rho (rho^2 - tanh^2).
    let big_f = rho * tanh;
    let dbig_f = rho * (rho * rho - tanh * tanh);
    let h1 = node.state.du;
    let h2 = node.slope.du;
    let df = -h1 / big_f;
    let d2f = (h2 * big_f - h1 * dbig_f) / (big_f * big_f * big_f);
    Node {
        t: rho,
        state: PhaseState::new(node.state.u + FRAC_PI_2, df),
        slope: PhaseState::new(df, d2f),
    }
}

struct Legs {
    left: Trajectory,
    right: Trajectory,
    /// Left minus right in `(f, df/drho)` at the fitting point.
    mismatch: [f64; 2],
}

struct TwoSided<'a> {
    params: &'a EquationParams,
    cfg: &'a IntegratorConfig,
    rho_min: f64,
    rho_mid: f64,
    x_min: f64,
    x_mid: f64,
}

impl TwoSided<'_> {
    fn left_leg(&self, a: f64) -> Result<Trajectory> {
        let s0 = series_origin(self.params, a, self.rho_min)?;
        let cfg = self.cfg.resolving(s0.u);
        integrate(self.params, Equation::ProfileRho, (self.rho_min, s0), self.rho_mid, &cfg)
    }

    fn right_leg(&self, b_rho: f64) -> Result<Trajectory> {
        let beta = beta_from_b(self.params, b_rho);
        let s0 = series_lightcone(self.params, beta, self.x_min)?;
        let cfg = self.cfg.resolving(s0.u);
        let opts = crate::trajectory::IntegrateOptions { stop_on_escape: false };
        crate::trajectory::integrate_with(
            self.params,
            Equation::ProfileX,
            (self.x_min, s0),
            self.x_mid,
            &cfg,
            opts,
        )
    }

    fn legs(&self, a: f64, b_rho: f64) -> Result<Legs> {
        let left = self.left_leg(a)?;
        let right = self.right_leg(b_rho)?;
        let l = left.last_state();
        let (_, r) = x_state_to_rho(self.x_mid, right.last_state());
        Ok(Legs { left, right, mismatch: [l.u - r.u, l.du - r.du] })
    }

    fn residual(&self, a: f64, b_rho: f64) -> Result<[f64; 2]> {
        Ok(self.legs(a, b_rho)?.mismatch)
    }
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Origin coefficient guess: follow the bisection orbit past its last zero
/// to where `f = 1/2`, then match the origin leg there by a secant iteration.
fn guess_origin_coefficient(
    params: &EquationParams,
    n: usize,
    beta_x: f64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    const TARGET: f64 = 0.5;
    let s0 = series_lightcone(params, beta_x, cfg.launch_eps)?;
    let traj =
        integrate(params, Equation::ProfileX, (cfg.launch_eps, s0), cfg.x_max, &cfg.resolving(s0.u))?;
    let after = match n {
        0 => traj.start(),
        _ => traj
            .events_of(crate::trajectory::EventKind::EquatorCrossing)
            .nth(n - 1)
            .map_or(traj.start(), |e| e.at),
    };
    let level = TARGET - FRAC_PI_2;
    let x_star = traj
        .nodes
        .windows(2)
        .filter(|w| w[0].t >= after)
        .find(|w| (w[0].state.u - level) * (w[1].state.u - level) <= 0.0)
        .map(|w| {
            crate::trajectory::locate_root(w[0].t, w[1].t, |t| {
                crate::trajectory::quintic(&w[0], &w[1], t).u - level
            })
        })
        .ok_or_else(|| Error::BracketNotFound {
            n,
            reason: "bisection orbit never reaches f = 1/2 after its last crossing".into(),
        })?;
    let rho_star = rho_of_x(x_star);
    let l = params.l() as i32;

    let f_at = |a: f64| -> Result<f64> {
        let rho0 = (1e-7 / a).powf(1.0 / f64::from(params.l()));
        let s = series_origin(params, a, rho0)?;
        let t = integrate(params, Equation::ProfileRho, (rho0, s), rho_star, &cfg.resolving(s.u))?;
        Ok(t.last_state().u - TARGET)
    };
    let mut a0 = TARGET / rho_star.powi(l);
    let mut a1 = 1.05 * a0;
    let (mut g0, mut g1) = (f_at(a0)?, f_at(a1)?);
    for _ in 0..50 {
        if g1 == g0 || (a1 - a0).abs() <= 1e-8 * a1.abs() {
            break;
        }
        let mut a2 = a1 - g1 * (a1 - a0) / (g1 - g0);
        a2 = a2.clamp(0.5 * a1, 2.0 * a1);
        a0 = a1;
        g0 = g1;
        a1 = a2;
        g1 = f_at(a1)?;
    }
    Ok(a1)
}

/// Polishes `beta_n` into a converged profile by two-sided shooting.
pub fn refine_two_sided(
    params: &EquationParams,
    bracket: &BetaBracket,
    shooter: &ShooterConfig,
    cfg: &IntegratorConfig,
) -> Result<ConnectingOrbit> {
    let n = bracket.n;
    let beta_x0 = normalized_beta(n, bracket.beta);
    let mut b = convert_parameters(params, beta_x0);
    let mut a = guess_origin_coefficient(params, n, beta_x0, cfg)?;

    let rho_mid = shooter.fit_point;
    let problem = TwoSided {
        params,
        cfg,
        rho_min: (shooter.origin_amplitude / a).powf(1.0 / f64::from(params.l())),
        rho_mid,
        x_min: cfg.launch_eps,
        x_mid: x_of_rho(rho_mid),
    };

    let mut res = problem.residual(a, b)?;
    let mut iterations = 0;
    while norm(res) > shooter.newton_tol {
        if iterations >= shooter.max_newton_iter {
            return Err(Error::NewtonDivergence { iterations, residual: norm(res) });
        }
        iterations += 1;
        let da = 1e-6 * a.abs();
        let db = 1e-6 * b.abs().max(1e-12);
        let (ra_p, ra_m) = (problem.residual(a + da, b)?, problem.residual(a - da, b)?);
        let (rb_p, rb_m) = (problem.residual(a, b + db)?, problem.residual(a, b - db)?);
        let j = [
            [(ra_p[0] - ra_m[0]) / (2.0 * da), (rb_p[0] - rb_m[0]) / (2.0 * db)],
            [(ra_p[1] - ra_m[1]) / (2.0 * da), (rb_p[1] - rb_m[1]) / (2.0 * db)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NewtonDivergence { iterations, residual: norm(res) });
        }
        let step_a = (j[1][1] * res[0] - j[0][1] * res[1]) / det;
        let step_b = (j[0][0] * res[1] - j[1][0] * res[0]) / det;

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let (a_new, b_new) = (a - lambda * step_a, b - lambda * step_b);
            if a_new > 0.0 {
                if let Ok(r) = problem.residual(a_new, b_new) {
                    if norm(r) < norm(res) {
                        accepted = Some((a_new, b_new, r));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((a_new, b_new, r)) => {
                a = a_new;
                b = b_new;
                res = r;
            }
            // No descent left: the residual sits at the integration noise floor.
            None if norm(res) <= 1e2 * shooter.newton_tol => break,
            None => return Err(Error::NewtonDivergence { iterations, residual: norm(res) }),
        }
    }

    let legs = problem.legs(a, b)?;
    let mut nodes = legs.left.nodes.clone();
    nodes.extend(legs.right.nodes.iter().rev().skip(1).map(x_node_to_rho));
    let profile = Trajectory::from_nodes(Coordinate::Rho, nodes);

    Ok(ConnectingOrbit {
        params: *params,
        n,
        beta_n: bracket.beta,
        beta_x: beta_from_b(params, b),
        a,
        b_rho: b,
        rho_min: problem.rho_min,
        x_min: problem.x_min,
        fit_point: rho_mid,
        mismatch: norm(legs.mismatch),
        newton_iterations: iterations,
        energy: None,
        profile,
        left: legs.left,
        right: legs.right,
    })
}

/// Finds and refines `f_0, ..., f_{n_max}`.
pub fn solve_family(
    params: &EquationParams,
    shooter: &ShooterConfig,
    cfg: &IntegratorConfig,
) -> Result<Vec<ConnectingOrbit>> {
    let brackets = find_betas(params, shooter, cfg)?;
    brackets
        .par_iter()
        .map(|b| refine_two_sided(params, b, shooter, cfg))
        .collect()
}
