//! Profile equations, endpoint expansions and the functional `W`.
//!
//! Two coordinate systems are used. In `rho in (0, 1)` the profile obeys
//!
//! ```text
//! f'' + ((m-1)/rho + (m-3) rho/(1-rho^2)) f' - k sin(2f) / (rho^2 (1-rho^2)) = 0
//! ```
//!
//! and with `rho = sech x`, `h = f - pi/2` it becomes the autonomous-at-infinity
//! equation
//!
//! ```text
//! h'' - (m-2) coth(x) h' + k sin(2h) = 0,    x in (0, inf).
//! ```
//!
//! `x = 0` is the light cone `rho = 1`, `x -> inf` is the origin `rho = 0`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::params::{EquationParams, PhaseState};

/// Right-hand side of the first-order system for `h(x)`.
pub fn rhs_x(params: &EquationParams, x: f64, s: PhaseState) -> Result<PhaseState> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain { coordinate: "x", at: x });
    }
    Ok(rhs_x_unchecked(params, x, s))
}

#[inline]
pub(crate) fn rhs_x_unchecked(params: &EquationParams, x: f64, s: PhaseState) -> PhaseState {
    let coth = 1.0 / x.tanh();
    PhaseState::new(
        s.du,
        params.drift() * coth * s.du - params.k() * (2.0 * s.u).sin(),
    )
}

/// Right-hand side of the first-order system for `f(rho)`.
pub fn rhs_rho(params: &EquationParams, rho: f64, s: PhaseState) -> Result<PhaseState> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain { coordinate: "rho", at: rho });
    }
    Ok(rhs_rho_unchecked(params, rho, s))
}

#[inline]
pub(crate) fn rhs_rho_unchecked(params: &EquationParams, rho: f64, s: PhaseState) -> PhaseState {
    let m = f64::from(params.m());
    let one_minus_sq = (1.0 - rho) * (1.0 + rho);
    let friction = (m - 1.0) / rho + (m - 3.0) * rho / one_minus_sq;
    let force = params.k() * (2.0 * s.u).sin() / (rho * rho * one_minus_sq);
    PhaseState::new(s.du, -friction * s.du + force)
}

/// Linearization of [`rhs_x`] about `h = 0`: `H'' - (m-2) coth(x) H' + 2k H = 0`.
///
/// Governs orbits with a small shooting parameter.
pub fn rhs_limiting(params: &EquationParams, x: f64, s: PhaseState) -> Result<PhaseState> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain { coordinate: "x", at: x });
    }
    Ok(rhs_limiting_unchecked(params, x, s))
}

#[inline]
pub(crate) fn rhs_limiting_unchecked(params: &EquationParams, x: f64, s: PhaseState) -> PhaseState {
    let coth = 1.0 / x.tanh();
    PhaseState::new(
        s.du,
        params.drift() * coth * s.du - 2.0 * params.k() * s.u,
    )
}

/// Second-order coefficient `A` in `f = a rho^l + A rho^(l+2) + O(rho^(l+4))`.
///
/// The cubic term of `sin(2f)` enters at this order only for `l = 1`.
pub fn origin_correction(params: &EquationParams, a: f64) -> f64 {
    let m = f64::from(params.m());
    let l = f64::from(params.l());
    let k = params.k();
    let mut numer = 2.0 * k - (m - 3.0) * l;
    if params.l() == 1 {
        numer -= 4.0 / 3.0 * k * a * a;
    }
    numer * a / (4.0 * l + 2.0 * m)
}

/// Frobenius launch data `(f, f')` near the origin for the branch `f ~ a rho^l`.
///
/// Two terms are kept, so the truncation error is `O(rho^(l+4))`.
pub fn series_origin(params: &EquationParams, a: f64, rho: f64) -> Result<PhaseState> {
    if !(rho > 0.0) {
        return Err(Error::Domain { coordinate: "rho", at: rho });
    }
    let l = params.l() as i32;
    let corr = origin_correction(params, a);
    let lead = rho.powi(l);
    let f = a * lead + corr * lead * rho * rho;
    let df = f64::from(params.l()) * a * lead / rho + f64::from(params.l() + 2) * corr * lead * rho;
    Ok(PhaseState::new(f, df))
}

/// Ratio `d1` in `h = beta x^(m-1) (1 + d1 x^2 + O(x^4))`.
pub fn lightcone_correction(params: &EquationParams) -> f64 {
    let m = f64::from(params.m());
    ((m - 2.0) * (m - 1.0) / 3.0 - 2.0 * params.k()) / (2.0 * (m + 1.0))
}

/// Launch data `(h, h')` near the light cone `x = 0` for the `beta`-orbit.
///
/// The same expansion launches the linear limiting equation, whose
/// coefficients agree through this order.
pub fn series_lightcone(params: &EquationParams, beta: f64, x: f64) -> Result<PhaseState> {
    if !(x > 0.0) {
        return Err(Error::Domain { coordinate: "x", at: x });
    }
    let p = (params.m() - 1) as i32;
    let d1 = lightcone_correction(params);
    let lead = x.powi(p);
    let x2 = x * x;
    let h = beta * lead * (1.0 + d1 * x2);
    let dh = beta * lead / x * (f64::from(p as u32) + f64::from(p as u32 + 2) * d1 * x2);
    Ok(PhaseState::new(h, dh))
}

/// `W = h'^2 / 2 + k sin^2 h`, nondecreasing along every orbit of [`rhs_x`].
///
/// The saddles `h = +-pi/2, h' = 0` sit at the level `W = k`.
pub fn w_value(params: &EquationParams, s: PhaseState) -> f64 {
    let sh = s.u.sin();
    0.5 * s.du * s.du + params.k() * sh * sh
}

/// `rho = sech x`.
pub fn rho_of_x(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// Inverse of [`rho_of_x`], accurate up to `rho -> 1`.
pub fn x_of_rho(rho: f64) -> f64 {
    let s = ((1.0 - rho) * (1.0 + rho)).sqrt();
    ((1.0 + s) / rho).ln()
}

/// `d rho / d x = -sech x tanh x`.
pub fn drho_dx(x: f64) -> f64 {
    -x.tanh() / x.cosh()
}

/// Maps `(h, dh/dx)` at `x` to `(f, df/drho)` at `rho = sech x`.
pub fn x_state_to_rho(x: f64, s: PhaseState) -> (f64, PhaseState) {
    (rho_of_x(x), PhaseState::new(s.u + FRAC_PI_2, s.du / drho_dx(x)))
}

/// Maps `(f, df/drho)` at `rho` to `(h, dh/dx)` at `x = arcsech rho`.
pub fn rho_state_to_x(rho: f64, s: PhaseState) -> (f64, PhaseState) {
    let x = x_of_rho(rho);
    let t = ((1.0 - rho) * (1.0 + rho)).sqrt();
    (x, PhaseState::new(s.u - FRAC_PI_2, -s.du * rho * t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p31() -> EquationParams {
        EquationParams::wave_map_3d()
    }

    #[test]
    fn rhs_x_fixed_points() {
        let d = rhs_x(&p31(), 1.0, PhaseState::ZERO).unwrap();
        assert_eq!(d, PhaseState::ZERO);
        let d = rhs_x(&p31(), 1.0, PhaseState::new(FRAC_PI_2, 0.0)).unwrap();
        assert_eq!(d.u, 0.0);
        assert!(d.du.abs() < 1e-15);
    }

    #[test]
    fn rhs_x_direct_formula() {
        // coth(ln 3) = (3 + 1/3)/(3 - 1/3) = 5/4 exactly.
        let d = rhs_x(&p31(), 3f64.ln(), PhaseState::new(0.1, 0.2)).unwrap();
        assert_eq!(d.u, 0.2);
        let expected = 1.25 * 0.2 - 0.2f64.sin();
        assert!((d.du - expected).abs() < 1e-15, "{} vs {}", d.du, expected);
        assert!((d.du - 0.051_330_669_204_938_785).abs() < 1e-15);
    }

    #[test]
    fn rhs_domain_errors() {
        assert!(rhs_x(&p31(), 0.0, PhaseState::ZERO).is_err());
        assert!(rhs_x(&p31(), -1.0, PhaseState::ZERO).is_err());
        assert!(rhs_rho(&p31(), 0.0, PhaseState::ZERO).is_err());
        assert!(rhs_rho(&p31(), 1.0, PhaseState::ZERO).is_err());
        assert!(rhs_rho(&p31(), 1.5, PhaseState::ZERO).is_err());
    }

    #[test]
    fn rhs_rho_closed_form_ground_state() {
        // f0 = 2 arctan rho solves the m = 3 equation.
        let rho: f64 = 0.5;
        let f = 2.0 * rho.atan();
        let df = 2.0 / (1.0 + rho * rho);
        let d2f = -4.0 * rho / (1.0 + rho * rho).powi(2);
        let d = rhs_rho(&p31(), rho, PhaseState::new(f, df)).unwrap();
        assert!((d.du - d2f).abs() < 1e-14, "{} vs {}", d.du, d2f);
    }

    #[test]
    fn rhs_rho_equator_is_fixed() {
        for (m, l) in [(3, 1), (5, 1), (7, 2)] {
            let p = EquationParams::new(m, l).unwrap();
            let d = rhs_rho(&p, 0.5, PhaseState::new(FRAC_PI_2, 0.0)).unwrap();
            assert_eq!(d.u, 0.0);
            assert!(d.du.abs() < 1e-14);
        }
    }

    #[test]
    fn rhs_rho_m5_direct_formula() {
        // f'' = -(4/0.3 + 2*0.3/0.91) * 0.5 + 2 sin(0.4)/(0.09*0.91), evaluated
        // independently with 30-digit arithmetic.
        let p = EquationParams::new(5, 1).unwrap();
        let d = rhs_rho(&p, 0.3, PhaseState::new(0.2, 0.5)).unwrap();
        assert_eq!(d.u, 0.5);
        assert!((d.du - 2.513_268_432_445_677_5).abs() < 1e-12, "{}", d.du);
    }

    #[test]
    fn origin_series_matches_ground_state_expansion() {
        // 2 arctan rho = 2 rho - 2 rho^3 / 3 + ...
        let c = origin_correction(&p31(), 2.0);
        assert!((c + 2.0 / 3.0).abs() < 1e-15);
        for rho in [1e-2, 1e-3, 1e-4] {
            let s = series_origin(&p31(), 2.0, rho).unwrap();
            let exact = 2.0 * rho.atan();
            assert!((s.u - exact).abs() < rho.powi(5), "rho {rho}");
            assert!((s.u / rho - 2.0).abs() < 2.0 * rho * rho);
        }
        assert_eq!(series_origin(&p31(), 0.0, 1e-3).unwrap(), PhaseState::ZERO);
    }

    #[test]
    fn lightcone_series_matches_ground_state_expansion() {
        // 2 arctan(sech x) - pi/2 = -x^2/2 + x^4/12 + O(x^6)
        assert!((lightcone_correction(&p31()) * -0.5 - 1.0 / 12.0).abs() < 1e-15);
        for x in [1e-2, 1e-3] {
            let s = series_lightcone(&p31(), -0.5, x).unwrap();
            let exact = 2.0 * (1.0 / f64::cosh(x)).atan() - FRAC_PI_2;
            assert!((s.u - exact).abs() < x.powi(6) + 1e-16, "x {x}");
        }
        assert_eq!(series_lightcone(&p31(), 0.0, 1e-3).unwrap(), PhaseState::ZERO);
    }

    /// Residual of the rho equation evaluated on the two-term expansion.
    fn origin_residual(params: &EquationParams, a: f64, rho: f64) -> f64 {
        let l = f64::from(params.l());
        let c = origin_correction(params, a);
        let f = a * rho.powf(l) + c * rho.powf(l + 2.0);
        let df = l * a * rho.powf(l - 1.0) + (l + 2.0) * c * rho.powf(l + 1.0);
        let d2f = l * (l - 1.0) * a * rho.powf(l - 2.0) + (l + 2.0) * (l + 1.0) * c * rho.powf(l);
        d2f - rhs_rho(params, rho, PhaseState::new(f, df)).unwrap().du
    }

    fn lightcone_residual(params: &EquationParams, beta: f64, x: f64) -> f64 {
        let n = f64::from(params.m() - 1);
        let d1 = lightcone_correction(params);
        let h = beta * x.powf(n) * (1.0 + d1 * x * x);
        let dh = beta * (n * x.powf(n - 1.0) + (n + 2.0) * d1 * x.powf(n + 1.0));
        let d2h = beta * (n * (n - 1.0) * x.powf(n - 2.0) + (n + 2.0) * (n + 1.0) * d1 * x.powf(n));
        d2h - rhs_x(params, x, PhaseState::new(h, dh)).unwrap().du
    }

    #[test]
    fn origin_correction_residual_converges_at_next_order() {
        // Leading residual of a two-term expansion is O(rho^(l+2)); a wrong
        // correction leaves O(rho^l).
        for (m, l) in [(3, 1), (3, 2), (5, 1), (5, 2), (7, 3)] {
            let p = EquationParams::new(m, l).unwrap();
            let r1 = origin_residual(&p, 1.3, 2e-2);
            let r2 = origin_residual(&p, 1.3, 1e-2);
            let order = (r1 / r2).abs().log2();
            assert!((order - f64::from(l + 2)).abs() < 0.15, "m={m} l={l} order={order}");
        }
    }

    #[test]
    fn lightcone_correction_residual_converges_at_next_order() {
        for (m, l) in [(3, 1), (5, 1), (5, 2), (7, 2), (9, 3)] {
            let p = EquationParams::new(m, l).unwrap();
            let r1 = lightcone_residual(&p, 1.0, 4e-2);
            let r2 = lightcone_residual(&p, 1.0, 2e-2);
            let r3 = lightcone_residual(&p, 1.0, 1e-2);
            // Richardson: successive ratios settle at 2^(m+1).
            let o1 = (r1 / r2).abs().log2();
            let o2 = (r2 / r3).abs().log2();
            assert!((o2 - f64::from(m + 1)).abs() < 0.1, "m={m} l={l} orders {o1} {o2}");
        }
    }

    #[test]
    fn w_values() {
        assert_eq!(w_value(&p31(), PhaseState::ZERO), 0.0);
        assert!((w_value(&p31(), PhaseState::new(FRAC_PI_2, 0.0)) - 1.0).abs() < 1e-15);
        assert!((w_value(&p31(), PhaseState::new(PI / 4.0, 1.0)) - 1.0).abs() < 1e-15);
        let p = EquationParams::new(5, 1).unwrap();
        assert!((w_value(&p, PhaseState::new(FRAC_PI_2, 0.0)) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn coordinate_maps_roundtrip() {
        for rho in [1e-9, 0.1, 0.5, 0.9, 1.0 - 1e-9] {
            let x = x_of_rho(rho);
            assert!((rho_of_x(x) - rho).abs() < 1e-15 * rho.max(1e-3), "rho {rho}");
        }
        let s = PhaseState::new(0.3, -0.7);
        let (rho, fs) = x_state_to_rho(0.8, s);
        let (x, back) = rho_state_to_x(rho, fs);
        assert!((x - 0.8).abs() < 1e-14);
        assert!((back.u - s.u).abs() < 1e-15 && (back.du - s.du).abs() < 1e-14);
    }
}
