use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{ArithError, Moebius};

/// A point `x + iy` of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperHalfPoint {
    pub x: f64,
    pub y: f64,
}

impl UpperHalfPoint {
    pub fn new(x: f64, y: f64) -> Result<UpperHalfPoint, ArithError> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(ArithError::Malformed(format!("({x}, {y}) is not in the upper half-plane")));
        }
        Ok(UpperHalfPoint { x, y })
    }

    pub fn i() -> UpperHalfPoint {
        UpperHalfPoint { x: 0.0, y: 1.0 }
    }

    /// Image under an integer Moebius map of determinant +1 (for -1 the
    /// conjugate is returned so the point stays in the upper half-plane).
    pub fn apply(&self, m: &Moebius) -> UpperHalfPoint {
        let [a, b, c, d] = m.entries().map(|v| v.to_f64().unwrap_or(f64::NAN));
        // (a z + b)/(c z + d) with z = x + iy
        let (nr, ni) = (a * self.x + b, a * self.y);
        let (dr, di) = (c * self.x + d, c * self.y);
        let den = dr * dr + di * di;
        let x = (nr * dr + ni * di) / den;
        let y = (ni * dr - nr * di) / den;
        UpperHalfPoint { x, y: y.abs() }
    }
}

/// `arccosh(1 + |z1 - z2|^2 / (2 y1 y2))`, evaluated through the stable
/// form `2 asinh(|z1 - z2| / (2 sqrt(y1 y2)))`.
pub fn hyperbolic_distance(z1: &UpperHalfPoint, z2: &UpperHalfPoint) -> f64 {
    let dx = z1.x - z2.x;
    let dy = z1.y - z2.y;
    let chord = dx.hypot(dy);
    2.0 * (chord / (2.0 * (z1.y * z2.y).sqrt())).asinh()
}
