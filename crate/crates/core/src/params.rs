use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension `m` of the spatial slice and equivariance degree `l`.
///
/// The coupling `k = l (l + m - 2) / 2` is derived, never stored separately,
/// so the two can not drift apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct EquationParams {
    m: u32,
    l: u32,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    m: u32,
    l: u32,
}

impl TryFrom<RawParams> for EquationParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        EquationParams::new(raw.m, raw.l)
    }
}

impl From<EquationParams> for RawParams {
    fn from(p: EquationParams) -> Self {
        RawParams { m: p.m, l: p.l }
    }
}

impl EquationParams {
    pub fn new(m: u32, l: u32) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidParams(format!("dimension m = {m} must be at least 3")));
        }
        if m % 2 == 0 {
            return Err(Error::EvenDimension(m));
        }
        if l < 1 {
            return Err(Error::InvalidParams("degree l must be at least 1".into()));
        }
        Ok(Self { m, l })
    }

    /// The original problem: `R^{3+1} -> S^3`, `l = 1`.
    pub fn wave_map_3d() -> Self {
        Self { m: 3, l: 1 }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    /// `2k = l (l + m - 2)`, exact.
    pub fn two_k(&self) -> u32 {
        self.l * (self.l + self.m - 2)
    }

    pub fn k(&self) -> f64 {
        0.5 * f64::from(self.two_k())
    }

    /// Coefficient `m - 2` of the friction term in the light-cone coordinate.
    pub fn drift(&self) -> f64 {
        f64::from(self.m - 2)
    }

    /// Exponent `(m - 1) / 2` of the profile near the light cone `rho = 1`.
    pub fn lightcone_exponent(&self) -> u32 {
        (self.m - 1) / 2
    }
}

/// Value and first derivative of a profile at one abscissa.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseState {
    pub u: f64,
    pub du: f64,
}

impl PhaseState {
    pub const ZERO: PhaseState = PhaseState { u: 0.0, du: 0.0 };

    pub fn new(u: f64, du: f64) -> Self {
        Self { u, du }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.du.is_finite()
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.u, self.du]
    }

    pub fn from_array(a: [f64; 2]) -> Self {
        Self { u: a[0], du: a[1] }
    }
}

impl std::ops::Neg for PhaseState {
    type Output = PhaseState;

    fn neg(self) -> PhaseState {
        PhaseState::new(-self.u, -self.du)
    }
}
