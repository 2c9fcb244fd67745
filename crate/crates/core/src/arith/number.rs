//! The scalar type: exact rationals, exact quadratic surds, interval-tracked
//! reals and the projective point at infinity.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use super::ArithError;

/// `(p + q*sqrt(d)) / r` with `r > 0`, `d > 1` square-free, `q != 0`, `gcd(p,q,r) = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Surd {
    p: BigInt,
    q: BigInt,
    d: BigInt,
    r: BigInt,
}

/// A real known only to lie in `[center - radius, center + radius]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tracked {
    center: BigRational,
    radius: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Number {
    Rational(BigRational),
    Surd(Surd),
    Tracked(Tracked),
    Infinity,
}

// ---------------------------------------------------------------------------
// normalization

fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

/// Builds `num/den` in lowest terms with positive denominator.
pub fn normalize_rational(num: BigInt, den: BigInt) -> Result<Number, ArithError> {
    if den.is_zero() {
        return Err(ArithError::Malformed("zero denominator".into()));
    }
    Ok(Number::Rational(BigRational::new(num, den)))
}

/// Builds `(p + q*sqrt(d)) / r` in canonical form, collapsing to a rational
/// when `q = 0` or `d` is a perfect square.
pub fn normalize_surd(p: BigInt, q: BigInt, d: BigInt, r: BigInt) -> Result<Number, ArithError> {
    if r.is_zero() {
        return Err(ArithError::Malformed("zero surd denominator".into()));
    }
    if d.is_negative() {
        return Err(ArithError::Malformed("negative radicand".into()));
    }
    if q.is_zero() || d.is_zero() {
        return normalize_rational(p, r);
    }
    let (s, core) = square_part(&d);
    let q = q * s;
    if core.is_one() {
        return normalize_rational(p + q, r);
    }
    Ok(Number::Surd(Surd::reduced(p, q, core, r)))
}

const TRIAL_LIMIT: u64 = 1 << 20;

/// Splits `d = s^2 * core`. Trial division is exhaustive below 2^40; beyond
/// that a residual without small factors is only tested for being a square.
fn square_part(d: &BigInt) -> (BigInt, BigInt) {
    let mut n = d.clone();
    let mut s = BigInt::one();
    let mut core = BigInt::one();
    let mut p: u64 = 2;
    while p <= TRIAL_LIMIT {
        let bp = BigInt::from(p);
        if &bp * &bp > n {
            break;
        }
        let p2 = &bp * &bp;
        while (&n % &p2).is_zero() {
            n /= &p2;
            s *= &bp;
        }
        if (&n % &bp).is_zero() {
            n /= &bp;
            core *= &bp;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let root = n.sqrt();
    if &root * &root == n {
        s *= root;
    } else {
        core *= n;
    }
    (s, core)
}

impl Surd {
    fn reduced(mut p: BigInt, mut q: BigInt, d: BigInt, mut r: BigInt) -> Surd {
        if r.is_negative() {
            p = -p;
            q = -q;
            r = -r;
        }
        let g = p.gcd(&q).gcd(&r);
        if !g.is_one() {
            p /= &g;
            q /= &g;
            r /= &g;
        }
        Surd { p, q, d, r }
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }
    pub fn q(&self) -> &BigInt {
        &self.q
    }
    pub fn d(&self) -> &BigInt {
        &self.d
    }
    pub fn r(&self) -> &BigInt {
        &self.r
    }

    /// Galois conjugate `(p - q*sqrt(d)) / r`.
    pub fn conjugate(&self) -> Surd {
        Surd { p: self.p.clone(), q: -&self.q, d: self.d.clone(), r: self.r.clone() }
    }

    fn add_rational(&self, v: &BigRational) -> Surd {
        let (n, m) = (v.numer(), v.denom());
        Surd::reduced(&self.p * m + n * &self.r, &self.q * m, self.d.clone(), &self.r * m)
    }

    fn mul_rational(&self, v: &BigRational) -> Number {
        if v.is_zero() {
            return Number::zero();
        }
        let (n, m) = (v.numer(), v.denom());
        Number::Surd(Surd::reduced(&self.p * n, &self.q * n, self.d.clone(), &self.r * m))
    }

    /// floor of the surd, exact.
    fn floor(&self) -> BigInt {
        // q*sqrt(d) is irrational, strictly between consecutive integers.
        let s = (&self.q * &self.q * &self.d).sqrt();
        let k = if self.q.is_positive() { s } else { -s - 1 };
        (&self.p + k).div_floor(&self.r)
    }

    /// An enclosure of width at most `2^-bits / r`.
    fn enclose(&self, bits: u64) -> (BigRational, BigRational) {
        let scale = BigInt::one() << bits;
        let s = (&self.q * &self.q * &self.d * &scale * &scale).sqrt();
        let (lo, hi) = if self.q.is_positive() { (s.clone(), s + 1) } else { (-s.clone() - 1, -s) };
        let den = &self.r * &scale;
        let base = &self.p * &scale;
        (BigRational::new(&base + lo, den.clone()), BigRational::new(base + hi, den))
    }
}

/// Sign of `a + b*sqrt(d)` for square-free `d > 1`.
fn sign_quadratic(a: &BigInt, b: &BigInt, d: &BigInt) -> Ordering {
    let sa = a.sign();
    let sb = b.sign();
    match (sa, sb) {
        (_, Sign::NoSign) => sa_ord(sa),
        (Sign::NoSign, _) => sa_ord(sb),
        _ if sa == sb => sa_ord(sa),
        _ => {
            if a * a > b * b * d {
                sa_ord(sa)
            } else {
                sa_ord(sb)
            }
        }
    }
}

fn sa_ord(s: Sign) -> Ordering {
    match s {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}

// ---------------------------------------------------------------------------
// tracked reals

fn bit_len(v: &BigInt) -> i64 {
    v.bits() as i64
}

/// Roughly `-log2(x)` for positive rationals.
fn neg_log2(x: &BigRational) -> i64 {
    bit_len(x.denom()) - bit_len(x.numer())
}

fn round_to_bits(x: &BigRational, bits: u64) -> BigRational {
    let scale = BigInt::one() << bits;
    let scaled = x * BigRational::from_integer(scale.clone());
    let two = BigRational::from_integer(big(2));
    let half = BigRational::one() / two;
    BigRational::new((scaled + half).floor().to_integer(), scale)
}

fn round_up_to_bits(x: &BigRational, bits: u64) -> BigRational {
    let scale = BigInt::one() << bits;
    let scaled = x * BigRational::from_integer(scale.clone());
    BigRational::new(scaled.ceil().to_integer(), scale)
}

impl Tracked {
    pub fn new(center: BigRational, radius: BigRational) -> Result<Tracked, ArithError> {
        if radius.is_negative() {
            return Err(ArithError::Malformed("negative error radius".into()));
        }
        Ok(Tracked { center, radius })
    }

    pub fn center(&self) -> &BigRational {
        &self.center
    }
    pub fn radius(&self) -> &BigRational {
        &self.radius
    }
    pub fn lo(&self) -> BigRational {
        &self.center - &self.radius
    }
    pub fn hi(&self) -> BigRational {
        &self.center + &self.radius
    }

    /// Keeps the representation from growing: the center is rounded to a
    /// binary grid far finer than the radius, and the rounding is charged to
    /// the radius.
    fn tidy(mut self) -> Tracked {
        if self.radius.is_zero() {
            return self;
        }
        let bits = (neg_log2(&self.radius) + 64).max(64) as u64;
        if bit_len(self.center.denom()) as u64 > bits + 8 {
            let rounded = round_to_bits(&self.center, bits);
            let err = (&rounded - &self.center).abs();
            self.center = rounded;
            self.radius += err;
        }
        if bit_len(self.radius.denom()) as u64 > bits + 8 {
            self.radius = round_up_to_bits(&self.radius, bits);
        }
        self
    }

    fn shift(&self, s: &BigRational) -> Tracked {
        Tracked { center: &self.center + s, radius: self.radius.clone() }.tidy()
    }

    fn scale(&self, k: &BigRational) -> Tracked {
        Tracked { center: &self.center * k, radius: &self.radius * k.abs() }.tidy()
    }

    pub(super) fn recip(&self) -> Result<Tracked, ArithError> {
        let c = self.center.abs();
        if c <= self.radius {
            return Err(ArithError::PrecisionExhausted);
        }
        let radius = &self.radius / (&c * (&c - &self.radius));
        Ok(Tracked { center: self.center.recip(), radius }.tidy())
    }

    fn add(&self, o: &Tracked) -> Tracked {
        Tracked { center: &self.center + &o.center, radius: &self.radius + &o.radius }.tidy()
    }

    fn cmp_rational(&self, y: &BigRational) -> Result<Ordering, ArithError> {
        if y < &self.lo() {
            Ok(Ordering::Greater)
        } else if y > &self.hi() {
            Ok(Ordering::Less)
        } else if self.radius.is_zero() {
            Ok(self.center.cmp(y))
        } else {
            Err(ArithError::Undecidable)
        }
    }
}

// ---------------------------------------------------------------------------
// Number

impl Number {
    pub fn zero() -> Number {
        Number::Rational(BigRational::zero())
    }

    pub fn int(v: i64) -> Number {
        Number::Rational(BigRational::from_integer(big(v)))
    }

    pub fn from_bigint(v: BigInt) -> Number {
        Number::Rational(BigRational::from_integer(v))
    }

    /// `n/d`; panics on `d = 0`.
    pub fn ratio(n: i64, d: i64) -> Number {
        normalize_rational(big(n), big(d)).expect("nonzero denominator")
    }

    pub fn from_rational(r: BigRational) -> Number {
        Number::Rational(r)
    }

    pub fn surd(p: i64, q: i64, d: i64, r: i64) -> Result<Number, ArithError> {
        normalize_surd(big(p), big(q), big(d), big(r))
    }

    pub fn tracked(center: BigRational, radius: BigRational) -> Result<Number, ArithError> {
        Ok(Number::Tracked(Tracked::new(center, radius)?))
    }

    /// The golden ratio `(1 + sqrt 5) / 2`.
    pub fn golden() -> Number {
        Number::surd(1, 1, 5, 2).expect("valid surd")
    }

    /// Re-establishes canonical form. Values built through the public
    /// constructors are already canonical; this is idempotent.
    pub fn normalize(&self) -> Result<Number, ArithError> {
        match self {
            Number::Rational(r) => normalize_rational(r.numer().clone(), r.denom().clone()),
            Number::Surd(s) => normalize_surd(s.p.clone(), s.q.clone(), s.d.clone(), s.r.clone()),
            Number::Tracked(t) => Ok(Number::Tracked(Tracked::new(t.center.clone(), t.radius.clone())?)),
            Number::Infinity => Ok(Number::Infinity),
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Number::Infinity)
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Number::Rational(_))
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Number::Tracked(_))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Number::Rational(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_surd(&self) -> Option<&Surd> {
        match self {
            Number::Surd(s) => Some(s),
            _ => None,
        }
    }

    /// Galois conjugate for surds; identity on other variants.
    pub fn conjugate(&self) -> Number {
        match self {
            Number::Surd(s) => Number::Surd(s.conjugate()),
            other => other.clone(),
        }
    }

    pub fn neg(&self) -> Number {
        match self {
            Number::Rational(r) => Number::Rational(-r),
            Number::Surd(s) => Number::Surd(Surd::reduced(-&s.p, -&s.q, s.d.clone(), s.r.clone())),
            Number::Tracked(t) => Number::Tracked(Tracked { center: -&t.center, radius: t.radius.clone() }),
            Number::Infinity => Number::Infinity,
        }
    }

    pub fn add_rational(&self, v: &BigRational) -> Number {
        match self {
            Number::Rational(r) => Number::Rational(r + v),
            Number::Surd(s) => Number::Surd(s.add_rational(v)),
            Number::Tracked(t) => Number::Tracked(t.shift(v)),
            Number::Infinity => Number::Infinity,
        }
    }

    pub fn add_int(&self, v: &BigInt) -> Number {
        self.add_rational(&BigRational::from_integer(v.clone()))
    }

    pub fn mul_rational(&self, v: &BigRational) -> Number {
        match self {
            Number::Rational(r) => Number::Rational(r * v),
            Number::Surd(s) => s.mul_rational(v),
            Number::Tracked(t) => Number::Tracked(t.scale(v)),
            Number::Infinity => {
                if v.is_zero() {
                    Number::zero()
                } else {
                    Number::Infinity
                }
            }
        }
    }

    /// Sum of two finite numbers. Surds from different fields, or any
    /// tracked operand, fall back to interval arithmetic.
    pub fn add(&self, o: &Number) -> Result<Number, ArithError> {
        match (self, o) {
            (Number::Infinity, _) | (_, Number::Infinity) => {
                Err(ArithError::Malformed("sum with infinity".into()))
            }
            (x, Number::Rational(r)) => Ok(x.add_rational(r)),
            (Number::Rational(r), y) => Ok(y.add_rational(r)),
            (Number::Surd(s), Number::Surd(t)) if s.d == t.d => normalize_surd(
                &s.p * &t.r + &t.p * &s.r,
                &s.q * &t.r + &t.q * &s.r,
                s.d.clone(),
                &s.r * &t.r,
            ),
            (x, y) => {
                let tx = x.to_tracked(192)?;
                let ty = y.to_tracked(192)?;
                Ok(Number::Tracked(tx.add(&ty)))
            }
        }
    }

    pub fn sub(&self, o: &Number) -> Result<Number, ArithError> {
        self.add(&o.neg())
    }

    /// `1/x`, projectively (`1/0 = inf`, `1/inf = 0`).
    pub fn recip(&self) -> Result<Number, ArithError> {
        super::Moebius::new_unchecked(big(0), big(1), big(1), big(0)).apply(self)
    }

    /// An interval enclosure; surds are enclosed to roughly `bits` bits.
    pub fn to_tracked(&self, bits: u64) -> Result<Tracked, ArithError> {
        match self {
            Number::Rational(r) => Ok(Tracked { center: r.clone(), radius: BigRational::zero() }),
            Number::Surd(s) => {
                let (lo, hi) = s.enclose(bits + s.p.bits().max(s.q.bits()));
                let two = BigRational::from_integer(big(2));
                Ok(Tracked { center: (&lo + &hi) / &two, radius: (hi - lo) / two })
            }
            Number::Tracked(t) => Ok(t.clone()),
            Number::Infinity => Err(ArithError::Malformed("infinity has no enclosure".into())),
        }
    }

    /// Exact floor; for tracked reals only when the whole interval agrees.
    pub fn floor(&self) -> Result<BigInt, ArithError> {
        match self {
            Number::Rational(r) => Ok(r.floor().to_integer()),
            Number::Surd(s) => Ok(s.floor()),
            Number::Tracked(t) => {
                let lo = t.lo().floor().to_integer();
                let hi = t.hi().floor().to_integer();
                if lo == hi {
                    Ok(lo)
                } else {
                    Err(ArithError::Undecidable)
                }
            }
            Number::Infinity => Err(ArithError::Malformed("floor of infinity".into())),
        }
    }

    pub fn signum(&self) -> Result<Ordering, ArithError> {
        self.compare(&Number::zero())
    }

    /// Exact total order on rationals and surds; tracked reals only decide
    /// when their intervals separate.
    pub fn compare(&self, o: &Number) -> Result<Ordering, ArithError> {
        use Number::*;
        match (self, o) {
            (Infinity, Infinity) => Ok(Ordering::Equal),
            (Infinity, _) => Ok(Ordering::Greater),
            (_, Infinity) => Ok(Ordering::Less),
            (Rational(x), Rational(y)) => Ok(x.cmp(y)),
            (Surd(s), Rational(y)) => {
                let (n, m) = (y.numer(), y.denom());
                Ok(sign_quadratic(&(&s.p * m - n * &s.r), &(&s.q * m), &s.d))
            }
            (Rational(_), Surd(_)) => o.compare(self).map(Ordering::reverse),
            (Surd(s), Surd(t)) if s.d == t.d => Ok(sign_quadratic(
                &(&s.p * &t.r - &t.p * &s.r),
                &(&s.q * &t.r - &t.q * &s.r),
                &s.d,
            )),
            (Surd(_), Surd(_)) => {
                // distinct quadratic fields never share an irrational value
                let mut bits = 64;
                loop {
                    let a = self.to_tracked(bits)?;
                    let b = o.to_tracked(bits)?;
                    if a.hi() < b.lo() {
                        return Ok(Ordering::Less);
                    }
                    if b.hi() < a.lo() {
                        return Ok(Ordering::Greater);
                    }
                    bits *= 2;
                }
            }
            (Tracked(t), Rational(y)) => t.cmp_rational(y),
            (Tracked(t), Surd(_)) => {
                let lo = Rational(t.lo());
                let hi = Rational(t.hi());
                if o.compare(&lo)? == Ordering::Less {
                    Ok(Ordering::Greater)
                } else if o.compare(&hi)? == Ordering::Greater {
                    Ok(Ordering::Less)
                } else {
                    Err(ArithError::Undecidable)
                }
            }
            (Tracked(t), Tracked(u)) => {
                if t.hi() < u.lo() {
                    Ok(Ordering::Less)
                } else if u.hi() < t.lo() {
                    Ok(Ordering::Greater)
                } else if t.radius.is_zero() && u.radius.is_zero() {
                    Ok(t.center.cmp(&u.center))
                } else {
                    Err(ArithError::Undecidable)
                }
            }
            (_, Tracked(_)) => o.compare(self).map(Ordering::reverse),
        }
    }

    pub fn lt(&self, o: &Number) -> Result<bool, ArithError> {
        Ok(self.compare(o)? == Ordering::Less)
    }

    /// Nearest double. Infinity maps to `f64::INFINITY`.
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Rational(r) => rational_to_f64(r),
            Number::Surd(s) => {
                let mut bits = 96;
                loop {
                    let (lo, hi) = s.enclose(bits);
                    let mid = (&lo + &hi) / BigRational::from_integer(big(2));
                    let width = &hi - &lo;
                    // stop once the enclosure pins down 60+ significant bits
                    if mid.is_zero() || neg_log2(&width) - neg_log2(&mid.abs()) > 60 || bits > 1 << 16 {
                        return rational_to_f64(&mid);
                    }
                    bits *= 2;
                }
            }
            Number::Tracked(t) => rational_to_f64(&t.center),
            Number::Infinity => f64::INFINITY,
        }
    }

    /// `ln|x|` without overflow for huge magnitudes.
    pub fn ln_abs(&self) -> f64 {
        match self {
            Number::Rational(r) => ln_abs_rational(r),
            Number::Tracked(t) => ln_abs_rational(&t.center),
            Number::Surd(_) => {
                let v = self.to_f64();
                if v.is_finite() && v != 0.0 {
                    v.abs().ln()
                } else {
                    match self.to_tracked(64) {
                        Ok(t) => ln_abs_rational(&t.center),
                        Err(_) => f64::NAN,
                    }
                }
            }
            Number::Infinity => f64::INFINITY,
        }
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

fn ln_abs_rational(r: &BigRational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    let n = r.numer().abs();
    let d = r.denom();
    ln_big(&n) - ln_big(d)
}

/// Natural log of a positive big integer.
pub(crate) fn ln_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

impl From<i64> for Number {
    fn from(v: i64) -> Number {
        Number::int(v)
    }
}

// ---------------------------------------------------------------------------
// text form

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Number::Surd(s) => write!(f, "surd:{},{},{},{}", s.p, s.q, s.d, s.r),
            Number::Tracked(t) => {
                let exp = if t.radius.is_zero() {
                    -40
                } else {
                    // smallest e with 10^e >= radius
                    let mut e: i64 = (-(neg_log2(&t.radius)) as f64 * std::f64::consts::LOG10_2).floor() as i64 - 1;
                    while pow10(e) < t.radius {
                        e += 1;
                    }
                    e
                };
                let digits = (2 - exp).max(0) as usize;
                write!(f, "dec:{}@{}", decimal_string(&t.center, digits), exp)
            }
            Number::Infinity => write!(f, "inf"),
        }
    }
}

fn pow10(e: i64) -> BigRational {
    let ten = BigInt::from(10u8);
    if e >= 0 {
        BigRational::from_integer(num_traits::pow(ten, e as usize))
    } else {
        BigRational::new(BigInt::one(), num_traits::pow(ten, (-e) as usize))
    }
}

fn decimal_string(x: &BigRational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10u8), digits);
    let scaled = (x * BigRational::from_integer(scale.clone())).round().to_integer();
    let neg = scaled.is_negative();
    let mut s = scaled.abs().to_string();
    if digits > 0 {
        while s.len() <= digits {
            s.insert(0, '0');
        }
        s.insert(s.len() - digits, '.');
    }
    if neg {
        s.insert(0, '-');
    }
    s
}

fn parse_int(s: &str) -> Result<BigInt, ArithError> {
    BigInt::from_str(s.trim()).map_err(|_| ArithError::Malformed(format!("bad integer {s:?}")))
}

impl FromStr for Number {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Number, ArithError> {
        let s = s.trim();
        if s == "inf" || s == "∞" {
            return Ok(Number::Infinity);
        }
        if let Some(body) = s.strip_prefix("surd:") {
            let parts: Vec<&str> = body.split(',').collect();
            if parts.len() != 4 {
                return Err(ArithError::Malformed(format!("surd needs p,q,d,r: {s:?}")));
            }
            return normalize_surd(
                parse_int(parts[0])?,
                parse_int(parts[1])?,
                parse_int(parts[2])?,
                parse_int(parts[3])?,
            );
        }
        if let Some(body) = s.strip_prefix("dec:") {
            let (mant, err) = match body.split_once('@') {
                Some((m, e)) => (m, Some(e)),
                None => (body, None),
            };
            let (neg, mant) = match mant.strip_prefix('-') {
                Some(m) => (true, m),
                None => (false, mant.strip_prefix('+').unwrap_or(mant)),
            };
            let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
            if ip.is_empty() && fp.is_empty()
                || !ip.chars().all(|c| c.is_ascii_digit())
                || !fp.chars().all(|c| c.is_ascii_digit())
            {
                return Err(ArithError::Malformed(format!("bad decimal {s:?}")));
            }
            let digits = format!("{ip}{fp}");
            let mut num = parse_int(if digits.is_empty() { "0" } else { &digits })?;
            if neg {
                num = -num;
            }
            let center = BigRational::new(num, num_traits::pow(BigInt::from(10u8), fp.len()));
            let exp = match err {
                Some(e) => e.trim().parse::<i64>().map_err(|_| ArithError::Malformed(format!("bad error exponent {e:?}")))?,
                None => -(fp.len() as i64),
            };
            return Number::tracked(center, pow10(exp));
        }
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (parse_int(n)?, parse_int(d)?),
            None => (parse_int(s)?, BigInt::one()),
        };
        normalize_rational(n, d)
    }
}

impl Serialize for Number {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Number, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Number {
        s.parse().unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_surd(big(2), big(0), big(5), big(4)).unwrap(), Number::ratio(1, 2));
        assert_eq!(normalize_surd(big(0), big(2), big(4), big(2)).unwrap(), Number::int(2));
        assert_eq!(normalize_rational(big(6), big(-4)).unwrap(), Number::ratio(-3, 2));
        assert!(normalize_rational(big(1), big(0)).is_err());
        assert!(normalize_surd(big(1), big(1), big(2), big(0)).is_err());
    }

    #[test]
    fn square_free_extraction() {
        // sqrt(12) = 2 sqrt(3)
        let x = normalize_surd(big(0), big(1), big(12), big(1)).unwrap();
        let s = x.as_surd().unwrap();
        assert_eq!((s.q().clone(), s.d().clone()), (big(2), big(3)));
        // common factor removed
        let y = normalize_surd(big(2), big(2), big(5), big(4)).unwrap();
        assert_eq!(y, Number::golden());
        let z = normalize_surd(big(3), big(6), big(2), big(-3)).unwrap();
        assert_eq!(z.to_string(), "surd:-1,-2,2,1");
    }

    #[test]
    fn compare_examples() {
        assert_eq!(n("surd:0,1,2,1").compare(&n("3/2")).unwrap(), Ordering::Less);
        assert_eq!(n("1/2").compare(&n("1/2")).unwrap(), Ordering::Equal);
        assert_eq!(n("dec:1.00@-1").compare(&n("dec:1.05@-1")), Err(ArithError::Undecidable));
        assert_eq!(n("inf").compare(&n("1000000")).unwrap(), Ordering::Greater);
        assert_eq!(n("surd:0,1,2,1").compare(&n("surd:0,1,3,1")).unwrap(), Ordering::Less);
        assert_eq!(n("dec:1.5@-2").compare(&n("surd:0,1,2,1")).unwrap(), Ordering::Greater);
    }

    #[test]
    fn surd_floor() {
        assert_eq!(n("surd:0,1,2,1").floor().unwrap(), big(1));
        assert_eq!(n("surd:0,-1,2,1").floor().unwrap(), big(-2));
        assert_eq!(n("surd:1,1,5,2").floor().unwrap(), big(1));
        assert_eq!(n("surd:-7,3,5,4").floor().unwrap(), big(-1));
    }

    #[test]
    fn round_trip_text() {
        for s in ["2/5", "-3/2", "7", "surd:1,1,5,2", "surd:-3,-2,7,5", "inf"] {
            assert_eq!(n(s).to_string(), s);
        }
        assert_eq!(n("6/-4").to_string(), "-3/2");
    }

    #[test]
    fn decimal_input() {
        let x = n("dec:1.41@-2");
        let t = match &x {
            Number::Tracked(t) => t.clone(),
            _ => panic!(),
        };
        assert_eq!(t.center(), &BigRational::new(big(141), big(100)));
        assert_eq!(t.radius(), &BigRational::new(big(1), big(100)));
        assert!("dec:1.2.3".parse::<Number>().is_err());
        assert!("dec:abc".parse::<Number>().is_err());
    }

    #[test]
    fn to_f64_accuracy() {
        assert_eq!(Number::golden().to_f64(), (1.0 + 5f64.sqrt()) / 2.0);
        // heavy cancellation: (1393 - 985 sqrt 2) is about -3.6e-4
        let x = n("surd:1393,-985,2,1").to_f64();
        let expect = 1393.0 - 985.0 * 2f64.sqrt();
        assert!((x - expect).abs() < 1e-9 * expect.abs() + 1e-12);
        assert!((x + 0.000358938).abs() < 1e-8);
    }

    #[test]
    fn tracked_recip_blows_up_near_zero() {
        let x = n("dec:0.01@-2");
        assert_eq!(x.recip(), Err(ArithError::PrecisionExhausted));
    }
}
