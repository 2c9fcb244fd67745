use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};
use std::fmt;

use super::number::{normalize_rational, normalize_surd, Number};
use super::ArithError;

/// Integer 2x2 matrix acting by `x -> (m11 x + m12) / (m21 x + m22)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Moebius {
    m11: BigInt,
    m12: BigInt,
    m21: BigInt,
    m22: BigInt,
}

fn b(v: i64) -> BigInt {
    BigInt::from(v)
}

impl Moebius {
    pub fn new(m11: BigInt, m12: BigInt, m21: BigInt, m22: BigInt) -> Result<Moebius, ArithError> {
        let m = Moebius { m11, m12, m21, m22 };
        let det = m.det();
        if det != BigInt::one() && det != -BigInt::one() {
            return Err(ArithError::Malformed(format!("determinant {det} not +-1")));
        }
        Ok(m)
    }

    pub(crate) fn new_unchecked(m11: BigInt, m12: BigInt, m21: BigInt, m22: BigInt) -> Moebius {
        Moebius { m11, m12, m21, m22 }
    }

    pub fn from_i64(m11: i64, m12: i64, m21: i64, m22: i64) -> Result<Moebius, ArithError> {
        Moebius::new(b(m11), b(m12), b(m21), b(m22))
    }

    pub fn identity() -> Moebius {
        Moebius::new_unchecked(b(1), b(0), b(0), b(1))
    }

    /// `S(x) = -1/x`.
    pub fn s() -> Moebius {
        Moebius::new_unchecked(b(0), b(-1), b(1), b(0))
    }

    /// `T(x) = x + 1`.
    pub fn t() -> Moebius {
        Moebius::new_unchecked(b(1), b(1), b(0), b(1))
    }

    /// `T^n(x) = x + n`.
    pub fn t_pow(n: &BigInt) -> Moebius {
        Moebius::new_unchecked(b(1), n.clone(), b(0), b(1))
    }

    /// `S T^{-a}`: the map `x -> -1/(x - a)`.
    pub fn shift_step(a: &BigInt) -> Moebius {
        Moebius::new_unchecked(b(0), b(-1), b(1), -a)
    }

    pub fn entries(&self) -> [&BigInt; 4] {
        [&self.m11, &self.m12, &self.m21, &self.m22]
    }

    pub fn det(&self) -> BigInt {
        &self.m11 * &self.m22 - &self.m12 * &self.m21
    }

    /// Matrix product `self * other`, i.e. apply `other` first.
    pub fn compose(&self, o: &Moebius) -> Moebius {
        Moebius {
            m11: &self.m11 * &o.m11 + &self.m12 * &o.m21,
            m12: &self.m11 * &o.m12 + &self.m12 * &o.m22,
            m21: &self.m21 * &o.m11 + &self.m22 * &o.m21,
            m22: &self.m21 * &o.m12 + &self.m22 * &o.m22,
        }
    }

    pub fn inverse(&self) -> Moebius {
        let det = self.det();
        Moebius {
            m11: &self.m22 * &det,
            m12: -&self.m12 * &det,
            m21: -&self.m21 * &det,
            m22: &self.m11 * &det,
        }
    }

    /// Equality in PSL(2,Z): same matrix up to an overall sign.
    pub fn projectively_eq(&self, o: &Moebius) -> bool {
        self == o
            || (self.m11 == -&o.m11 && self.m12 == -&o.m12 && self.m21 == -&o.m21 && self.m22 == -&o.m22)
    }

    pub fn apply(&self, x: &Number) -> Result<Number, ArithError> {
        let (a, bb, c, d) = (&self.m11, &self.m12, &self.m21, &self.m22);
        match x {
            Number::Infinity => {
                if c.is_zero() {
                    Ok(Number::Infinity)
                } else {
                    normalize_rational(a.clone(), c.clone())
                }
            }
            Number::Rational(r) => {
                let (n, m) = (r.numer(), r.denom());
                let num = a * n + bb * m;
                let den = c * n + d * m;
                if den.is_zero() {
                    Ok(Number::Infinity)
                } else {
                    normalize_rational(num, den)
                }
            }
            Number::Surd(s) => {
                let (p, q, dd, r) = (s.p(), s.q(), s.d(), s.r());
                let na = a * p + bb * r;
                let nb = a * q;
                let da = c * p + d * r;
                let db = c * q;
                // (na + nb v)/(da + db v), v = sqrt(dd); denominator is never 0
                let den = &da * &da - &db * &db * dd;
                normalize_surd(&na * &da - &nb * &db * dd, &nb * &da - &na * &db, dd.clone(), den)
            }
            Number::Tracked(_) => {
                if c.is_zero() {
                    let k = BigRational::new(a.clone(), d.clone());
                    let s = BigRational::new(bb.clone(), d.clone());
                    return Ok(x.mul_rational(&k).add_rational(&s));
                }
                // a/c - det / (c (c x + d))
                let y = x.mul_rational(&BigRational::from_integer(c.clone())).add_int(d);
                let Number::Tracked(t) = &y else { unreachable!() };
                let inv = Number::Tracked(t.recip()?);
                let k = BigRational::new(-self.det(), c.clone());
                Ok(inv.mul_rational(&k).add_rational(&BigRational::new(a.clone(), c.clone())))
            }
        }
    }
}

/// Written as `[[m11, m12], [m21, m22]]`.
impl Serialize for Moebius {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Row<'a>(#[serde(with = "crate::json::bigint")] &'a BigInt, #[serde(with = "crate::json::bigint")] &'a BigInt);
        [Row(&self.m11, &self.m12), Row(&self.m21, &self.m22)].serialize(s)
    }
}

impl fmt::Display for Moebius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.m11, self.m12, self.m21, self.m22)
    }
}
