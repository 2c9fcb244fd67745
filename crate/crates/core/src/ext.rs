//! `f64` mantissa with a 64-bit binary exponent.
//!
//! Logarithms of quotients of super-exponentially growing expansions overflow
//! `f64` after about a thousand terms; sums of them are kept in this form.

use serde::{Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtFloat {
    /// `0` or `0.5 <= |m| < 1`.
    m: f64,
    e: i64,
}

fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i64;
    if raw == 0 {
        // subnormal: scale into the normal range first
        let (m, e) = frexp(x * 2f64.powi(64));
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
    (m, raw - 1022)
}

fn ldexp(m: f64, e: i64) -> f64 {
    if e > 2000 {
        return m * f64::INFINITY;
    }
    if e < -2000 {
        return m * 0.0;
    }
    // two steps keep intermediate powers finite
    let h = e / 2;
    m * 2f64.powi(h as i32) * 2f64.powi((e - h) as i32)
}

impl ExtFloat {
    pub const ZERO: ExtFloat = ExtFloat { m: 0.0, e: 0 };

    pub fn new(x: f64) -> ExtFloat {
        assert!(x.is_finite(), "ExtFloat from non-finite {x}");
        let (m, e) = frexp(x);
        ExtFloat { m, e }
    }

    fn from_parts(m: f64, e: i64) -> ExtFloat {
        if m == 0.0 {
            return ExtFloat::ZERO;
        }
        let (mm, ee) = frexp(m);
        ExtFloat { m: mm, e: e + ee }
    }

    /// Saturates to `+-inf` or `0`.
    pub fn to_f64(self) -> f64 {
        ldexp(self.m, self.e)
    }

    pub fn is_zero(self) -> bool {
        self.m == 0.0
    }

    pub fn signum(self) -> f64 {
        if self.m == 0.0 {
            0.0
        } else {
            self.m.signum()
        }
    }

    pub fn abs(self) -> ExtFloat {
        ExtFloat { m: self.m.abs(), e: self.e }
    }

    /// Natural logarithm of a positive value.
    pub fn ln(self) -> f64 {
        assert!(self.m > 0.0, "ln of non-positive ExtFloat");
        self.m.ln() + self.e as f64 * std::f64::consts::LN_2
    }

    /// Binary exponent: `2^(e-1) <= |x| < 2^e`.
    pub fn exponent(self) -> i64 {
        self.e
    }

    pub fn mul_f64(self, k: f64) -> ExtFloat {
        ExtFloat::from_parts(self.m * k, self.e)
    }
}

impl Add for ExtFloat {
    type Output = ExtFloat;
    fn add(self, o: ExtFloat) -> ExtFloat {
        if self.m == 0.0 {
            return o;
        }
        if o.m == 0.0 {
            return self;
        }
        let (hi, lo) = if self.e >= o.e { (self, o) } else { (o, self) };
        let gap = hi.e - lo.e;
        if gap > 60 {
            return hi;
        }
        ExtFloat::from_parts(hi.m + ldexp(lo.m, -gap), hi.e)
    }
}

impl Add<f64> for ExtFloat {
    type Output = ExtFloat;
    fn add(self, o: f64) -> ExtFloat {
        self + ExtFloat::new(o)
    }
}

impl Neg for ExtFloat {
    type Output = ExtFloat;
    fn neg(self) -> ExtFloat {
        ExtFloat { m: -self.m, e: self.e }
    }
}

impl Sub for ExtFloat {
    type Output = ExtFloat;
    fn sub(self, o: ExtFloat) -> ExtFloat {
        self + (-o)
    }
}

impl Mul for ExtFloat {
    type Output = ExtFloat;
    fn mul(self, o: ExtFloat) -> ExtFloat {
        ExtFloat::from_parts(self.m * o.m, self.e + o.e)
    }
}

impl Div for ExtFloat {
    type Output = ExtFloat;
    fn div(self, o: ExtFloat) -> ExtFloat {
        assert!(o.m != 0.0, "ExtFloat division by zero");
        ExtFloat::from_parts(self.m / o.m, self.e - o.e)
    }
}

impl PartialOrd for ExtFloat {
    fn partial_cmp(&self, o: &ExtFloat) -> Option<Ordering> {
        let (s, t) = (self.signum(), o.signum());
        if s != t {
            return s.partial_cmp(&t);
        }
        if s == 0.0 {
            return Some(Ordering::Equal);
        }
        let mag = match self.e.cmp(&o.e) {
            Ordering::Equal => self.m.abs().partial_cmp(&o.m.abs())?,
            c => c,
        };
        Some(if s > 0.0 { mag } else { mag.reverse() })
    }
}

impl From<f64> for ExtFloat {
    fn from(x: f64) -> ExtFloat {
        ExtFloat::new(x)
    }
}

fn pow10(k: i64) -> ExtFloat {
    let mut base = ExtFloat::new(10.0);
    let mut acc = ExtFloat::new(1.0);
    let mut n = k.unsigned_abs();
    while n > 0 {
        if n & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        n >>= 1;
    }
    if k < 0 {
        ExtFloat::new(1.0) / acc
    } else {
        acc
    }
}

impl fmt::Display for ExtFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_f64();
        if self.is_zero() || (1e-4..1e16).contains(&v.abs()) {
            return write!(f, "{v}");
        }
        // m 2^e = mant 10^k
        let l10 = (self.m.abs().log10()) + self.e as f64 * std::f64::consts::LOG10_2;
        let mut k = l10.floor() as i64;
        let mut mant = (*self / pow10(k)).to_f64();
        if mant.abs() >= 10.0 {
            k += 1;
            mant /= 10.0;
        } else if mant.abs() < 1.0 {
            k -= 1;
            mant *= 10.0;
        }
        mant = (mant * 1e12).round() / 1e12;
        if mant.abs() >= 10.0 {
            k += 1;
            mant /= 10.0;
        }
        write!(f, "{mant:.12}e{k}")
    }
}

/// Plain numbers when they fit in `f64`, otherwise a decimal string.
impl Serialize for ExtFloat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.to_f64();
        if v.is_finite() && (self.is_zero() || v != 0.0) {
            s.serialize_f64(v)
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for x in [0.0, 1.0, -3.5, 1e-310, 1e300, -2.2e-16] {
            assert_eq!(ExtFloat::new(x).to_f64(), x);
        }
    }

    #[test]
    fn beyond_f64() {
        let big = ExtFloat::new(1e300) * ExtFloat::new(1e300);
        assert_eq!(big.to_f64(), f64::INFINITY);
        assert!((big.ln() - 600.0 * 10f64.ln()).abs() < 1e-9);
        let back = big / ExtFloat::new(1e300);
        assert!((back.to_f64() / 1e300 - 1.0).abs() < 1e-15);
        assert!(big > ExtFloat::new(1e308));
        assert!(-big < ExtFloat::new(-1e308));
        assert_eq!(big.to_string(), "1.000000000000e600");
    }

    #[test]
    fn addition() {
        let a = ExtFloat::new(1.5) + ExtFloat::new(2.25);
        assert_eq!(a.to_f64(), 3.75);
        let b = ExtFloat::new(1.0) - ExtFloat::new(1.0);
        assert!(b.is_zero());
        let huge = ExtFloat::new(1e300) * ExtFloat::new(1e300);
        assert_eq!(huge + ExtFloat::new(1.0), huge);
    }
}
