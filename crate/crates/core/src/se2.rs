//! The roto-translation group SE(2) acting on position-orientation space.
//!
//! A [`CorticalPoint`] `(x, y, theta)` is both a point of the lifted feature
//! space R² × S¹ and a group element. Composition follows
//! `(x', y', t') · (x, y, t) = (R_t'(x, y) + (x', y'), t' + t)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Wraps an angle into `[0, period)`.
#[inline]
pub fn wrap_angle(theta: f64, period: f64) -> f64 {
    let t = theta.rem_euclid(period);
    // rem_euclid can round up to exactly `period` for tiny negative inputs
    if t >= period {
        0.0
    } else {
        t
    }
}

/// Whether orientations are directed (period 2π) or undirected (period π).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AngleMode {
    #[default]
    #[serde(rename = "full")]
    FullCircle,
    #[serde(rename = "half")]
    HalfCircle,
}

impl AngleMode {
    pub fn period(self) -> f64 {
        match self {
            AngleMode::FullCircle => TAU,
            AngleMode::HalfCircle => PI,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AngleMode::FullCircle => "full",
            AngleMode::HalfCircle => "half",
        }
    }
}

impl std::str::FromStr for AngleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(AngleMode::FullCircle),
            "half" => Ok(AngleMode::HalfCircle),
            other => Err(format!("unknown angle mode '{other}' (expected full|half)")),
        }
    }
}

/// Shortest angular distance between two angles under the mode's period.
/// The result lies in `[0, period / 2]`.
pub fn angle_distance(theta1: f64, theta2: f64, mode: AngleMode) -> f64 {
    let period = mode.period();
    let d = wrap_angle(theta1 - theta2, period);
    d.min(period - d)
}

/// A point `(x, y, theta)` of R² × S¹, with `theta` kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorticalPoint {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Default for CorticalPoint {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl CorticalPoint {
    pub const IDENTITY: CorticalPoint = CorticalPoint {
        x: 0.0,
        y: 0.0,
        theta: 0.0,
    };

    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        debug_assert!(x.is_finite() && y.is_finite(), "non-finite position");
        Self {
            x,
            y,
            theta: wrap_angle(theta, TAU),
        }
    }

    /// Group product `self · other`.
    pub fn compose(&self, other: &CorticalPoint) -> CorticalPoint {
        let (x, y) = rotate(other.x, other.y, self.theta);
        CorticalPoint::new(x + self.x, y + self.y, self.theta + other.theta)
    }

    /// Group inverse `(-R_{-theta}(x, y), -theta)`.
    pub fn inverse(&self) -> CorticalPoint {
        let (x, y) = rotate(self.x, self.y, -self.theta);
        CorticalPoint::new(-x, -y, -self.theta)
    }

    /// The reflection `(x, y, theta) -> (x, -y, -theta)`.
    pub fn reflect(&self) -> CorticalPoint {
        CorticalPoint::new(self.x, -self.y, -self.theta)
    }

    /// Same position, orientation turned by π.
    pub fn flipped(&self) -> CorticalPoint {
        CorticalPoint::new(self.x, self.y, self.theta + PI)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

/// `compose(g, h) = g · h`.
pub fn compose(g: &CorticalPoint, h: &CorticalPoint) -> CorticalPoint {
    g.compose(h)
}

pub fn inverse(g: &CorticalPoint) -> CorticalPoint {
    g.inverse()
}

pub fn reflect(p: &CorticalPoint) -> CorticalPoint {
    p.reflect()
}

/// Position of `to` expressed in the frame of `from`: `from⁻¹ · to`.
///
/// Left-invariant kernels depend on a pair of points only through this value.
pub fn relative_displacement(from: &CorticalPoint, to: &CorticalPoint) -> CorticalPoint {
    let (x, y) = rotate(to.x - from.x, to.y - from.y, -from.theta);
    CorticalPoint::new(x, y, to.theta - from.theta)
}

/// Rotates `(x, y)` counter-clockwise by `angle`.
#[inline]
pub fn rotate(x: f64, y: f64, angle: f64) -> (f64, f64) {
    let (s, c) = angle.sin_cos();
    (c * x - s * y, s * x + c * y)
}
