//! Dense trajectories of the profile equations with event logging.

use std::f64::consts::FRAC_PI_2;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::equations::{self, w_value};
use crate::error::{Error, Result};
use crate::integrator::{self, Outcome, StepControl};
use crate::params::{EquationParams, PhaseState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coordinate {
    /// Similarity variable `rho in [0, 1]`; the state is `(f, df/drho)`.
    Rho,
    /// Light-cone variable `x in [0, inf)`; the state is `(h, dh/dx)`.
    X,
}

impl Coordinate {
    /// Value of the state component that marks the target equator.
    pub fn equator(self) -> f64 {
        match self {
            Coordinate::Rho => FRAC_PI_2,
            Coordinate::X => 0.0,
        }
    }
}

/// Which right-hand side to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    /// Nonlinear profile equation in `x`.
    ProfileX,
    /// Nonlinear profile equation in `rho`.
    ProfileRho,
    /// Linear small-amplitude limit in `x`.
    LimitingX,
}

impl Equation {
    pub fn coordinate(self) -> Coordinate {
        match self {
            Equation::ProfileRho => Coordinate::Rho,
            Equation::ProfileX | Equation::LimitingX => Coordinate::X,
        }
    }

    fn check_domain(self, t: f64) -> Result<()> {
        let ok = match self.coordinate() {
            Coordinate::Rho => t > 0.0 && t < 1.0,
            Coordinate::X => t > 0.0 && t.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            let coordinate = match self.coordinate() {
                Coordinate::Rho => "rho",
                Coordinate::X => "x",
            };
            Err(Error::Domain { coordinate, at: t })
        }
    }

    #[inline]
    pub(crate) fn eval(self, params: &EquationParams, t: f64, s: PhaseState) -> PhaseState {
        match self {
            Equation::ProfileX => equations::rhs_x_unchecked(params, t, s),
            Equation::ProfileRho => equations::rhs_rho_unchecked(params, t, s),
            Equation::LimitingX => equations::rhs_limiting_unchecked(params, t, s),
        }
    }
}

/// Integration and launch settings shared by every solver in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_init: Option<f64>,
    /// Step-size floor relative to the current abscissa.
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// Truncation abscissa for runs in `x`.
    pub x_max: f64,
    /// Launch offset from the light cone, in `x`.
    pub launch_eps: f64,
    /// An orbit past `|h| = pi/2` escapes once `W > (1 + margin) k`.
    pub w_escape_margin: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            h_init: None,
            h_min: 1e-14,
            h_max: 0.5,
            max_steps: 2_000_000,
            x_max: 40.0,
            launch_eps: 1e-4,
            w_escape_margin: 0.01,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParams(format!("integrator config: {what}")));
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.launch_eps > 0.0 && self.launch_eps < 1e-2) {
            return bad("launch_eps must lie in (0, 1e-2)");
        }
        if !(self.x_max.is_finite() && self.x_max > 1.0) {
            return bad("x_max must be finite and > 1");
        }
        if !(self.h_max > 0.0 && self.h_min > 0.0) {
            return bad("step bounds must be positive");
        }
        if !(self.w_escape_margin >= 0.0) {
            return bad("w_escape_margin must be non-negative");
        }
        Ok(())
    }

    pub fn w_escape(&self, params: &EquationParams) -> f64 {
        (1.0 + self.w_escape_margin) * params.k()
    }

    /// Copy of this configuration whose absolute tolerance resolves values of
    /// size `amplitude` to the relative tolerance. Launches from a series
    /// start far below the default absolute tolerance.
    pub fn resolving(&self, amplitude: f64) -> Self {
        let abs_tol = self.abs_tol.min(self.rel_tol * amplitude.abs()).max(f64::MIN_POSITIVE);
        Self { abs_tol, ..*self }
    }

    pub(crate) fn step_control(&self) -> StepControl {
        StepControl {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            h_init: self.h_init,
            h_min: self.h_min,
            h_max: self.h_max,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub t: f64,
    pub state: PhaseState,
    /// Derivative of `state` with respect to `t`.
    pub slope: PhaseState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    /// The profile crosses the equator (`h = 0`, i.e. `f = pi/2`).
    EquatorCrossing,
    /// `du` changes sign.
    Extremum,
    /// First passage of `W` above the escape level with `|h| > pi/2`.
    Escape,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub at: f64,
    pub state: PhaseState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    ReachedEnd,
    EscapedPlus,
    EscapedMinus,
    StepFailure,
}

/// Sampled solution with cubic Hermite dense output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub coordinate: Coordinate,
    pub nodes: Vec<Node>,
    pub events: Vec<Event>,
    pub termination: Termination,
}

impl Trajectory {
    /// Builds a trajectory from precomputed nodes and recomputes crossings
    /// and extrema on the interpolant.
    pub fn from_nodes(coordinate: Coordinate, nodes: Vec<Node>) -> Self {
        let mut detector = EventDetector::new(coordinate.equator());
        if let Some(first) = nodes.first() {
            detector.prime(first.state);
        }
        let mut events = Vec::new();
        for w in nodes.windows(2) {
            detector.scan(&w[0], &w[1], &mut events);
        }
        Self { coordinate, nodes, events, termination: Termination::ReachedEnd }
    }

    pub fn start(&self) -> f64 {
        self.nodes.first().map_or(f64::NAN, |n| n.t)
    }

    pub fn end(&self) -> f64 {
        self.nodes.last().map_or(f64::NAN, |n| n.t)
    }

    pub fn last_state(&self) -> PhaseState {
        self.nodes.last().map_or(PhaseState::ZERO, |n| n.state)
    }

    fn ascending(&self) -> bool {
        self.nodes.len() < 2 || self.nodes[1].t > self.nodes[0].t
    }

    /// Index `i` with `t` between nodes `i` and `i + 1`.
    fn bracket(&self, t: f64) -> Option<usize> {
        let n = self.nodes.len();
        if n < 2 {
            return None;
        }
        let asc = self.ascending();
        let (lo, hi) = if asc { (self.start(), self.end()) } else { (self.end(), self.start()) };
        if !(t >= lo && t <= hi) {
            return None;
        }
        let idx = self.nodes.partition_point(|node| if asc { node.t <= t } else { node.t >= t });
        Some(idx.clamp(1, n - 1) - 1)
    }

    /// Interpolated state, `None` outside the node span.
    pub fn eval(&self, t: f64) -> Option<PhaseState> {
        if self.nodes.len() == 1 && self.nodes[0].t == t {
            return Some(self.nodes[0].state);
        }
        let i = self.bracket(t)?;
        Some(quintic(&self.nodes[i], &self.nodes[i + 1], t))
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn crossing_count(&self) -> usize {
        self.events_of(EventKind::EquatorCrossing).count()
    }

    pub fn escape(&self) -> Option<&Event> {
        self.events_of(EventKind::Escape).next()
    }
}

/// Tracks sign changes of `u - level` and of `du` across steps.
struct EventDetector {
    level: f64,
    value_sign: f64,
    slope_sign: f64,
}

impl EventDetector {
    fn new(level: f64) -> Self {
        Self { level, value_sign: 0.0, slope_sign: 0.0 }
    }

    fn prime(&mut self, s: PhaseState) {
        self.value_sign = sign(s.u - self.level);
        self.slope_sign = sign(s.du);
    }

    fn scan(&mut self, a: &Node, b: &Node, events: &mut Vec<Event>) {
        let interp = |t: f64| quintic(a, b, t);
        let level = self.level;
        let mut found = Vec::with_capacity(2);
        let sv = sign(b.state.u - level);
        if sv != 0.0 {
            if self.value_sign != 0.0 && sv != self.value_sign {
                let at = locate_root(a.t, b.t, |t| interp(t).u - level);
                found.push(Event { kind: EventKind::EquatorCrossing, at, state: interp(at) });
            }
            self.value_sign = sv;
        }
        let sd = sign(b.state.du);
        if sd != 0.0 {
            if self.slope_sign != 0.0 && sd != self.slope_sign {
                let at = locate_root(a.t, b.t, |t| interp(t).du);
                found.push(Event { kind: EventKind::Extremum, at, state: interp(at) });
            }
            self.slope_sign = sd;
        }
        if found.len() == 2 && (found[1].at - found[0].at) * (b.t - a.t) < 0.0 {
            found.swap(0, 1);
        }
        events.extend(found);
    }
}

/// Quintic Hermite interpolant of `u` through `(u, u', u'')` at both nodes,
/// with `du` taken from its derivative. Every state in this crate is a
/// second-order pair, so `slope.u == state.du` and `slope.du` is `u''`.
pub(crate) fn quintic(a: &Node, b: &Node, t: f64) -> PhaseState {
    let h = b.t - a.t;
    let s = (t - a.t) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
    let g0 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    let g1 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let g2 = 0.5 * (s3 - 2.0 * s4 + s5);
    let u = h0 * a.state.u
        + g0 * b.state.u
        + h * (h1 * a.state.du + g1 * b.state.du)
        + h * h * (h2 * a.slope.du + g2 * b.slope.du);
    let d0 = 30.0 * (-s2 + 2.0 * s3 - s4);
    let d1 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
    let d2 = s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4;
    let e1 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
    let e2 = 1.5 * s2 - 4.0 * s3 + 2.5 * s4;
    let du = d0 * (a.state.u - b.state.u) / h
        + d1 * a.state.du
        + e1 * b.state.du
        + h * (d2 * a.slope.du + e2 * b.slope.du);
    PhaseState::new(u, du)
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Root of `g` on `[t0, t1]` by Illinois regula falsi; falls back to the
/// endpoint of smaller `|g|` when `g` does not change sign on the interpolant.
pub(crate) fn locate_root<G: Fn(f64) -> f64>(t0: f64, t1: f64, g: G) -> f64 {
    let (mut a, mut b) = (t0, t1);
    let (mut ga, mut gb) = (g(a), g(b));
    if ga == 0.0 {
        return a;
    }
    if gb == 0.0 {
        return b;
    }
    if ga.signum() == gb.signum() {
        return if ga.abs() < gb.abs() { a } else { b };
    }
    let mut side = 0i8;
    for _ in 0..100 {
        let c = (a * gb - b * ga) / (gb - ga);
        let gc = g(c);
        if gc == 0.0 || (b - a).abs() <= 4.0 * f64::EPSILON * c.abs().max(f64::MIN_POSITIVE) {
            return c;
        }
        if gc.signum() == gb.signum() {
            b = c;
            gb = gc;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            ga = gc;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

/// Options for [`integrate_with`].
#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    /// Stop at the escape event instead of running to `end`.
    pub stop_on_escape: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { stop_on_escape: true }
    }
}

/// Integrates one of the profile equations from `start` to `end`.
///
/// Direction follows the sign of `end - start.0`. For [`Equation::ProfileX`]
/// the run is watched for escape: `|h| > pi/2` together with
/// `W > (1 + margin) k`, after which `|h|` grows monotonically.
pub fn integrate(
    params: &EquationParams,
    equation: Equation,
    start: (f64, PhaseState),
    end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate_with(params, equation, start, end, cfg, IntegrateOptions::default())
}

pub fn integrate_with(
    params: &EquationParams,
    equation: Equation,
    start: (f64, PhaseState),
    end: f64,
    cfg: &IntegratorConfig,
    opts: IntegrateOptions,
) -> Result<Trajectory> {
    let (t0, s0) = start;
    equation.check_domain(t0)?;
    if end != t0 {
        let probe = t0 + 0.999_999 * (end - t0);
        equation.check_domain(probe)?;
        if equation.coordinate() == Coordinate::Rho && !(end > 0.0 && end < 1.0) {
            return Err(Error::Domain { coordinate: "rho", at: end });
        }
    }
    if !s0.is_finite() {
        return Err(Error::InvalidParams("non-finite initial state".into()));
    }

    let coordinate = equation.coordinate();
    let watch_escape = equation == Equation::ProfileX;
    let w_escape = cfg.w_escape(params);
    let rhs = |t: f64, y: &[f64; 2]| equation.eval(params, t, PhaseState::from_array(*y)).to_array();

    let first = Node { t: t0, state: s0, slope: equation.eval(params, t0, s0) };
    let mut nodes = vec![first];
    let mut events = Vec::new();
    let mut termination = Termination::ReachedEnd;
    let mut detector = EventDetector::new(coordinate.equator());
    detector.prime(s0);
    let escaped = |s: PhaseState| s.u.abs() > FRAC_PI_2 && w_value(params, s) > w_escape;
    let mut escape_seen = watch_escape && escaped(s0);

    let (result, _stats) = integrator::solve(rhs, t0, s0.to_array(), end, &cfg.step_control(), |step| {
        let a = *nodes.last().expect("trajectory has a first node");
        let b = Node {
            t: step.t1,
            state: PhaseState::from_array(step.y1),
            slope: PhaseState::from_array(step.f1),
        };
        detector.scan(&a, &b, &mut events);
        nodes.push(b);
        if watch_escape && !escape_seen && escaped(b.state) {
            escape_seen = true;
            let interp = |t: f64| quintic(&a, &b, t);
            let at = first_true(a.t, b.t, |t| escaped(interp(t)));
            let state = interp(at);
            events.push(Event { kind: EventKind::Escape, at, state });
            termination = if state.u > 0.0 { Termination::EscapedPlus } else { Termination::EscapedMinus };
            if opts.stop_on_escape {
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    });

    let mut traj = Trajectory { coordinate, nodes, events, termination };
    match result {
        Ok(Outcome::Finished) | Ok(Outcome::Stopped { .. }) => Ok(traj),
        Err(under) => {
            traj.termination = Termination::StepFailure;
            Err(Error::StepFailure { at: under.t, partial: Box::new(traj) })
        }
    }
}

/// Earliest point of `[t0, t1]` where a predicate that holds at `t1` becomes
/// true, assuming a single switch.
fn first_true<P: Fn(f64) -> bool>(t0: f64, t1: f64, pred: P) -> f64 {
    let (mut a, mut b) = (t0, t1);
    for _ in 0..80 {
        let c = 0.5 * (a + b);
        if pred(c) {
            b = c;
        } else {
            a = c;
        }
    }
    b
}
