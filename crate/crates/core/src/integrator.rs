//! Dormand–Prince 5(4) with proportional-integral step control.
//!
//! The driver is generic over a fixed-size state `[f64; N]` and hands every
//! accepted step (both endpoints with their slopes) to an observer, which is
//! enough for cubic Hermite dense output and event location.

use std::ops::ControlFlow;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const PI_BETA: f64 = 0.04;
const MIN_SHRINK: f64 = 0.2;
const MAX_GROW: f64 = 10.0;

/// Step-size policy for [`solve`].
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// First trial step; `None` picks one from the local scales.
    pub h_init: Option<f64>,
    /// Smallest admissible step, relative to `|t|`.
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            h_init: None,
            h_min: 1e-15,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

/// One accepted step `t0 -> t1`.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub y0: [f64; N],
    pub f0: [f64; N],
    pub t1: f64,
    pub y1: [f64; N],
    pub f1: [f64; N],
}

impl<const N: usize> Step<N> {
    /// Cubic Hermite interpolant on the step.
    pub fn hermite(&self, t: f64) -> [f64; N] {
        hermite(self.t0, &self.y0, &self.f0, self.t1, &self.y1, &self.f1, t)
    }
}

/// Cubic Hermite interpolation between two nodes carrying values and slopes.
pub fn hermite<const N: usize>(
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    t1: f64,
    y1: &[f64; N],
    f1: &[f64; N],
    t: f64,
) -> [f64; N] {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    std::array::from_fn(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
}

/// Derivative of [`hermite`] with respect to `t`.
pub fn hermite_slope<const N: usize>(
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    t1: f64,
    y1: &[f64; N],
    f1: &[f64; N],
    t: f64,
) -> [f64; N] {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let d00 = (6.0 * s2 - 6.0 * s) / h;
    let d10 = 3.0 * s2 - 4.0 * s + 1.0;
    let d01 = (-6.0 * s2 + 6.0 * s) / h;
    let d11 = 3.0 * s2 - 2.0 * s;
    std::array::from_fn(|i| d00 * y0[i] + d10 * f0[i] + d01 * y1[i] + d11 * f1[i])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    /// Reached `t_end`.
    Finished,
    /// The observer asked to stop after the step ending at `t`.
    Stopped { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Underflow {
    pub t: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

fn finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        y[i] + h * acc
    })
}

fn weighted_rms<const N: usize>(v: &[f64; N], scale: &[f64; N]) -> f64 {
    let sum: f64 = v.iter().zip(scale).map(|(a, s)| (a / s).powi(2)).sum();
    (sum / N as f64).sqrt()
}

fn initial_step<const N: usize, F>(
    rhs: &mut F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    ctl: &StepControl,
    span: f64,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let scale: [f64; N] = std::array::from_fn(|i| ctl.abs_tol + ctl.rel_tol * y0[i].abs());
    let d0 = weighted_rms(y0, &scale);
    let d1 = weighted_rms(f0, &scale);
    let mut h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(ctl.h_max).min(span);
    let y1 = axpy(y0, dir * h0, &[(1.0, f0)]);
    let f1 = rhs(t0 + dir * h0, &y1);
    let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = weighted_rms(&diff, &scale) / h0;
    let der = d1.max(d2);
    let h1 = if der <= 1e-15 || !der.is_finite() {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / der).powf(0.2)
    };
    (100.0 * h0).min(h1).min(ctl.h_max).min(span)
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end` (either direction).
///
/// Non-finite stage values count as a failed step and shrink the step size.
pub fn solve<const N: usize, F, O>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    ctl: &StepControl,
    mut observe: O,
) -> (Result<Outcome, Underflow>, Stats)
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    O: FnMut(&Step<N>) -> ControlFlow<()>,
{
    let mut stats = Stats::default();
    if t_end == t0 {
        return (Ok(Outcome::Finished), stats);
    }
    let dir = (t_end - t0).signum();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    stats.evaluations += 1;
    let span = (t_end - t0).abs();
    let mut h = match ctl.h_init {
        Some(h) => h.abs().min(span),
        None => {
            stats.evaluations += 1;
            initial_step(&mut rhs, t, &y, &k1, dir, ctl, span)
        }
    };
    let mut fac_old = 1e-4_f64;
    let mut last_rejected = false;

    while stats.accepted + stats.rejected < ctl.max_steps {
        let h_floor = ctl.h_min * t.abs().max(f64::MIN_POSITIVE);
        let remaining = (t_end - t).abs();
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        if h < h_floor && !last {
            return (Err(Underflow { t, h }), stats);
        }
        let hs = dir * h;

        let k2 = rhs(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(t + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(
            t + C5 * hs,
            &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let t_new = if last { t_end } else { t + hs };
        let k6 = rhs(
            t_new,
            &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = rhs(t_new, &y_new);
        stats.evaluations += 6;

        let err_vec = axpy(
            &[0.0; N],
            hs,
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );
        let scale: [f64; N] =
            std::array::from_fn(|i| ctl.abs_tol + ctl.rel_tol * y[i].abs().max(y_new[i].abs()));
        let err = weighted_rms(&err_vec, &scale);

        if !err.is_finite() || !finite(&y_new) || !finite(&k7) {
            stats.rejected += 1;
            last_rejected = true;
            h *= MIN_SHRINK;
            continue;
        }

        let fac11 = err.powf(0.2 - PI_BETA * 0.75);
        if err <= 1.0 {
            stats.accepted += 1;
            let step = Step { t0: t, y0: y, f0: k1, t1: t_new, y1: y_new, f1: k7 };
            let fac = (fac11 / fac_old.powf(PI_BETA) / SAFETY).clamp(1.0 / MAX_GROW, 1.0 / MIN_SHRINK);
            fac_old = err.max(1e-4);
            t = t_new;
            y = y_new;
            k1 = k7;
            if let ControlFlow::Break(()) = observe(&step) {
                return (Ok(Outcome::Stopped { t }), stats);
            }
            if last {
                return (Ok(Outcome::Finished), stats);
            }
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new.min(ctl.h_max);
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h /= (fac11 / SAFETY).min(1.0 / MIN_SHRINK);
        }
    }
    (Err(Underflow { t, h }), stats)
}
