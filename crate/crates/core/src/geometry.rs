//! Per-edge laws of the generalized hyperbolic triangles.
//!
//! Each edge `e` shared by faces `f1`, `f2` carries a triangle with two
//! sides of generalized length `r1`, `r2` meeting at the primal vertex with
//! generalized angle `theta`. Everything here is expressed in the
//! coordinates `u_i = -2 exp(-r_i)`, where the admissible set is the open
//! negative quadrant. `beta1` is the generalized angle at the centre of
//! `f1` (opposite `r2`), `beta2` the one at the centre of `f2`.

use core::f64::consts::PI;
use core::fmt;

use libm::{atan2, cos, log, log1p, sin, sinh, sqrt, tanh};

use crate::error::{Error, Result};

/// Vertex type at the primal vertex: cone point, cusp, or flare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Delta {
    Cone,
    Cusp,
    Flare,
}

impl Delta {
    pub fn value(self) -> i8 {
        match self {
            Delta::Cone => 1,
            Delta::Cusp => 0,
            Delta::Flare => -1,
        }
    }

    pub fn from_value(delta: i8) -> Option<Self> {
        match delta {
            1 => Some(Delta::Cone),
            0 => Some(Delta::Cusp),
            -1 => Some(Delta::Flare),
            _ => None,
        }
    }

    /// Open interval of admissible theta, for messages.
    pub fn interval(self) -> &'static str {
        match self {
            Delta::Cone => "(0, π)",
            Delta::Cusp | Delta::Flare => "(0, ∞)",
        }
    }

    pub fn admits(self, theta: f64) -> bool {
        let upper_ok = match self {
            Delta::Cone => theta < PI,
            Delta::Cusp | Delta::Flare => theta.is_finite(),
        };
        theta > 0.0 && upper_ok
    }

    pub(crate) fn check(self, theta: f64) -> Result<()> {
        if self.admits(theta) {
            Ok(())
        } else {
            Err(Error::ThetaDomain {
                edge: None,
                theta,
                delta: self.value(),
                interval: self.interval(),
            })
        }
    }
}

/// Supported pattern types `(epsilon, epsilon, delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternType {
    /// `(1, 1, 0)`: circle centres are interior points, primal vertices are cusps.
    OneOneZero,
    /// `(0, 0, delta)`: circle centres are ideal points.
    ZeroZero(Delta),
}

impl PatternType {
    pub fn from_epsilon_delta(epsilon: i8, delta: i8) -> Result<Self> {
        match (epsilon, Delta::from_value(delta)) {
            (1, Some(Delta::Cusp)) => Ok(PatternType::OneOneZero),
            (0, Some(d)) => Ok(PatternType::ZeroZero(d)),
            _ => Err(Error::UnsupportedType { epsilon, delta }),
        }
    }

    pub fn epsilon(self) -> i8 {
        match self {
            PatternType::OneOneZero => 1,
            PatternType::ZeroZero(_) => 0,
        }
    }

    pub fn delta(self) -> Delta {
        match self {
            PatternType::OneOneZero => Delta::Cusp,
            PatternType::ZeroZero(d) => d,
        }
    }

    pub fn check_theta(self, edge: usize, theta: f64) -> Result<()> {
        self.delta().check(theta).map_err(|e| match e {
            Error::ThetaDomain {
                theta,
                delta,
                interval,
                ..
            } => Error::ThetaDomain {
                edge: Some(edge),
                theta,
                delta,
                interval,
            },
            other => other,
        })
    }
}

impl fmt::Display for PatternType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.epsilon();
        write!(f, "({e}, {e}, {})", self.delta().value())
    }
}

/// The two coordinates of an edge's faces, both strictly negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UPair {
    pub u1: f64,
    pub u2: f64,
}

impl UPair {
    pub fn new(u1: f64, u2: f64) -> Result<Self> {
        for (face, value) in [(0, u1), (1, u2)] {
            if !(value < 0.0 && value.is_finite()) {
                return Err(Error::Inadmissible { face, value });
            }
        }
        Ok(Self { u1, u2 })
    }

    pub fn swapped(self) -> Self {
        Self {
            u1: self.u2,
            u2: self.u1,
        }
    }
}

/// Generalized radius from the coordinate: `r = -ln(-u / 2)`.
pub fn radius_from_u(u: f64) -> f64 {
    -log(-u / 2.0)
}

pub fn u_from_radius(r: f64) -> f64 {
    -2.0 * libm::exp(-r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeGeometry {
    pub beta1: f64,
    pub beta2: f64,
    /// Generalized length of the side opposite theta; may be negative.
    pub length: f64,
    /// `d(beta1, beta2) / d(u1, u2)`, row-major.
    pub partials: [[f64; 2]; 2],
}

/// `s(theta)` with `beta_i = -s(theta) u_i / 2` for `(0, 0, delta)` triangles.
pub fn s_factor(delta: Delta, theta: f64) -> Result<f64> {
    delta.check(theta)?;
    Ok(s_factor_unchecked(delta, theta))
}

pub(crate) fn s_factor_unchecked(delta: Delta, theta: f64) -> f64 {
    let half = 0.5 * theta;
    match delta {
        Delta::Cone => cos(half) / sin(half),
        Delta::Flare => 1.0 / tanh(half),
        Delta::Cusp => 1.0 / theta,
    }
}

pub fn angles_110(theta: f64, u: UPair) -> Result<(f64, f64)> {
    Delta::Cusp.check(theta)?;
    let u = UPair::new(u.u1, u.u2)?;
    Ok(angles_110_unchecked(theta, u.u1, u.u2))
}

/// `cot beta1 = (u1^2 - u2^2 - 4 theta^2) / (4 theta u1)`, evaluated as an
/// `atan2` on rescaled arguments so the branch stays in `(0, pi)`.
pub(crate) fn angles_110_unchecked(theta: f64, u1: f64, u2: f64) -> (f64, f64) {
    let t = 2.0 * theta;
    let scale = u1.abs().max(u2.abs()).max(t);
    let (a, b, c) = (u1 / scale, u2 / scale, t / scale);
    // (b - a)(b + a) keeps c^2 from being absorbed when |a| ~ |b| >> c
    let beta1 = atan2(-2.0 * c * a, (b - a) * (b + a) + c * c);
    let beta2 = atan2(-2.0 * c * b, (a - b) * (a + b) + c * c);
    (beta1, beta2)
}

pub fn angles_00d(delta: Delta, theta: f64, u: UPair) -> Result<(f64, f64)> {
    let s = s_factor(delta, theta)?;
    let u = UPair::new(u.u1, u.u2)?;
    Ok((-0.5 * s * u.u1, -0.5 * s * u.u2))
}

/// `cosh l - 1 = (4 theta^2 + (u1 - u2)^2) / (2 u1 u2)`, which is the
/// cosine law `cosh l = theta^2 e^(r1 + r2) / 2 + cosh(r1 - r2)` in `u`.
fn cosh_l_minus_one_110(theta: f64, u1: f64, u2: f64) -> f64 {
    let d = u1 - u2;
    (4.0 * theta * theta + d * d) / (2.0 * u1 * u2)
}

pub fn edge_length_110(theta: f64, u: UPair) -> Result<f64> {
    Delta::Cusp.check(theta)?;
    let u = UPair::new(u.u1, u.u2)?;
    Ok(edge_length_110_unchecked(theta, u.u1, u.u2))
}

pub(crate) fn edge_length_110_unchecked(theta: f64, u1: f64, u2: f64) -> f64 {
    let x = cosh_l_minus_one_110(theta, u1, u2);
    log1p(x + sqrt(x * (x + 2.0)))
}

pub fn edge_length_00d(delta: Delta, theta: f64, u: UPair) -> Result<f64> {
    delta.check(theta)?;
    let u = UPair::new(u.u1, u.u2)?;
    Ok(edge_length_00d_unchecked(delta, theta, u.u1, u.u2))
}

pub(crate) fn edge_length_00d_unchecked(delta: Delta, theta: f64, u1: f64, u2: f64) -> f64 {
    let radii = radius_from_u(u1) + radius_from_u(u2);
    let half = 0.5 * theta;
    radii
        + 2.0
            * match delta {
                Delta::Cone => log(sin(half)),
                Delta::Flare => log(sinh(half)),
                Delta::Cusp => log(theta),
            }
}

pub fn partials_110(theta: f64, u: UPair) -> Result<[[f64; 2]; 2]> {
    Delta::Cusp.check(theta)?;
    let u = UPair::new(u.u1, u.u2)?;
    Ok(partials_110_unchecked(theta, u.u1, u.u2))
}

/// Off-diagonal `theta e^(r1 + r2) / (2 sinh^2 l)` with `e^(r1 + r2) =
/// 4 / (u1 u2)`; diagonal entries are `-cosh l` times the off-diagonal.
pub(crate) fn partials_110_unchecked(theta: f64, u1: f64, u2: f64) -> [[f64; 2]; 2] {
    let x = cosh_l_minus_one_110(theta, u1, u2);
    let sinh_sq = x * (x + 2.0);
    let off = 2.0 * theta / (u1 * u2 * sinh_sq);
    let diag = -(1.0 + x) * off;
    [[diag, off], [off, diag]]
}

pub fn partials_00d(delta: Delta, theta: f64) -> Result<[[f64; 2]; 2]> {
    let d = -0.5 * s_factor(delta, theta)?;
    Ok([[d, 0.0], [0.0, d]])
}

/// Angles, length and partials of one edge triangle.
pub fn edge_geometry(kind: PatternType, theta: f64, u: UPair) -> Result<EdgeGeometry> {
    kind.delta().check(theta)?;
    let u = UPair::new(u.u1, u.u2)?;
    Ok(edge_geometry_unchecked(kind, theta, u.u1, u.u2))
}

pub(crate) fn edge_geometry_unchecked(
    kind: PatternType,
    theta: f64,
    u1: f64,
    u2: f64,
) -> EdgeGeometry {
    match kind {
        PatternType::OneOneZero => {
            let (beta1, beta2) = angles_110_unchecked(theta, u1, u2);
            EdgeGeometry {
                beta1,
                beta2,
                length: edge_length_110_unchecked(theta, u1, u2),
                partials: partials_110_unchecked(theta, u1, u2),
            }
        }
        PatternType::ZeroZero(delta) => {
            let s = s_factor_unchecked(delta, theta);
            EdgeGeometry {
                beta1: -0.5 * s * u1,
                beta2: -0.5 * s * u2,
                length: edge_length_00d_unchecked(delta, theta, u1, u2),
                partials: [[-0.5 * s, 0.0], [0.0, -0.5 * s]],
            }
        }
    }
}
