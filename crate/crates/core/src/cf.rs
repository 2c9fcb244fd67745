//! Classical and (a,b)-continued fractions.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::arith::{ArithError, Moebius, Number};
use crate::json::bigint_seq;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CfError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("expansion has {have} quotients, {need} needed")]
    Insufficient { have: usize, need: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Classical,
    Ab,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfParams {
    pub flavor: Flavor,
    pub a: Number,
    pub b: Number,
}

impl CfParams {
    /// Parameters in `-1 <= a < 0 < b <= 1`, `b - a >= 1`.
    pub fn ab(a: Number, b: Number) -> Result<CfParams, CfError> {
        let one = Number::int(1);
        let ok = a.compare(&one.neg())? != Ordering::Less
            && a.signum()? == Ordering::Less
            && b.signum()? == Ordering::Greater
            && b.compare(&one)? != Ordering::Greater
            && b.sub(&a)?.compare(&one)? != Ordering::Less;
        if !ok || !a.is_exact() || !b.is_exact() {
            return Err(CfError::InvalidParams(format!("({a}, {b}) is outside the parameter set")));
        }
        Ok(CfParams { flavor: Flavor::Ab, a, b })
    }

    pub fn ab_ratio(an: i64, ad: i64, bn: i64, bd: i64) -> CfParams {
        CfParams::ab(Number::ratio(an, ad), Number::ratio(bn, bd)).expect("valid parameters")
    }

    /// The alternating case `(-1, 1)`.
    pub fn minus_one_one() -> CfParams {
        CfParams::ab_ratio(-1, 1, 1, 1)
    }

    /// The nearest-integer case `(-1/2, 1/2)`.
    pub fn nearest() -> CfParams {
        CfParams::ab_ratio(-1, 2, 1, 2)
    }

    pub fn classical() -> CfParams {
        CfParams { flavor: Flavor::Classical, a: Number::zero(), b: Number::int(1) }
    }

    pub fn is_minus_one_one(&self) -> bool {
        self.flavor == Flavor::Ab && self.a == Number::int(-1) && self.b == Number::int(1)
    }
}

/// Partial quotients of an expansion together with how it ended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfExpansion {
    pub flavor: Flavor,
    pub a: Number,
    pub b: Number,
    #[serde(with = "bigint_seq")]
    pub quotients: Vec<BigInt>,
    pub terminated: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub precision_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergent {
    #[serde(with = "crate::json::bigint")]
    pub p: BigInt,
    #[serde(with = "crate::json::bigint")]
    pub q: BigInt,
    pub index: usize,
}

impl Convergent {
    pub fn value(&self) -> Number {
        if self.q.is_zero() {
            Number::Infinity
        } else {
            Number::from_rational(BigRational::new(self.p.clone(), self.q.clone()))
        }
    }
}

impl CfExpansion {
    pub fn new(params: &CfParams, quotients: Vec<BigInt>, terminated: bool) -> CfExpansion {
        CfExpansion {
            flavor: params.flavor,
            a: params.a.clone(),
            b: params.b.clone(),
            quotients,
            terminated,
            precision_exhausted: false,
        }
    }

    pub fn params(&self) -> CfParams {
        CfParams { flavor: self.flavor, a: self.a.clone(), b: self.b.clone() }
    }

    pub fn len(&self) -> usize {
        self.quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotients.is_empty()
    }

    /// Folds the first `k` quotients back into a rational.
    pub fn fold(&self, k: usize) -> Result<Number, CfError> {
        if k == 0 || k > self.len() {
            return Err(CfError::Insufficient { have: self.len(), need: k.max(1) });
        }
        let mut v = Number::from_bigint(self.quotients[k - 1].clone());
        for a in self.quotients[..k - 1].iter().rev() {
            let r = v.recip()?;
            v = match self.flavor {
                Flavor::Classical => r.add_int(a),
                Flavor::Ab => r.neg().add_int(a),
            };
        }
        Ok(v)
    }
}

/// `[x]_{a,b}`: `[x-a]` below `a`, `0` on `[a,b)`, `[x-b]+1` from `b` on.
pub fn generalized_floor(x: &Number, params: &CfParams) -> Result<BigInt, CfError> {
    if x.is_infinite() {
        return Err(CfError::Arith(ArithError::Malformed("floor of infinity".into())));
    }
    if x.compare(&params.a)? == Ordering::Less {
        Ok(x.sub(&params.a)?.floor()?)
    } else if x.compare(&params.b)? == Ordering::Less {
        Ok(BigInt::zero())
    } else {
        Ok(x.sub(&params.b)?.floor()? + 1)
    }
}

/// One digit of a lazy expansion: the quotient and the remainder `x_j` it was read from.
#[derive(Debug, Clone)]
pub struct Digit {
    pub index: usize,
    pub quotient: BigInt,
    pub remainder: Number,
}

/// Streaming expansion state.
#[derive(Debug, Clone)]
pub struct Expander {
    params: CfParams,
    x: Option<Number>,
    index: usize,
    terminated: bool,
    exhausted: bool,
}

impl Expander {
    pub fn new(x: Number, params: &CfParams) -> Result<Expander, CfError> {
        if x.is_infinite() {
            return Err(CfError::Arith(ArithError::Malformed("cannot expand infinity".into())));
        }
        Ok(Expander { params: params.clone(), x: Some(x), index: 0, terminated: false, exhausted: false })
    }

    pub fn terminated(&self) -> bool {
        self.terminated
    }

    pub fn precision_exhausted(&self) -> bool {
        self.exhausted
    }

    fn digit(&self, x: &Number) -> Result<BigInt, CfError> {
        match self.params.flavor {
            Flavor::Ab => generalized_floor(x, &self.params),
            Flavor::Classical => Ok(x.floor()?),
        }
    }

    fn advance(&self, x: &Number, a: &BigInt) -> Result<Option<Number>, CfError> {
        if x.compare(&Number::from_bigint(a.clone()))? == Ordering::Equal {
            return Ok(None);
        }
        let next = match self.params.flavor {
            Flavor::Ab => Moebius::shift_step(a).apply(x)?,
            Flavor::Classical => x.add_int(&-a).recip()?,
        };
        Ok(Some(next))
    }
}

impl Iterator for Expander {
    type Item = Digit;

    fn next(&mut self) -> Option<Digit> {
        let x = self.x.take()?;
        let a = match self.digit(&x) {
            Ok(a) => a,
            Err(_) => {
                self.exhausted = true;
                return None;
            }
        };
        match self.advance(&x, &a) {
            Ok(None) => self.terminated = true,
            Ok(Some(n)) => self.x = Some(n),
            Err(_) => {
                // digit known, continuation lost
                self.exhausted = true;
            }
        }
        let d = Digit { index: self.index, quotient: a, remainder: x };
        self.index += 1;
        Some(d)
    }
}

fn collect(x: &Number, params: &CfParams, max_terms: usize) -> Result<CfExpansion, CfError> {
    if max_terms == 0 {
        return Err(CfError::InvalidParameter("max_terms must be at least 1".into()));
    }
    let mut it = Expander::new(x.clone(), params)?;
    let quotients: Vec<BigInt> = it.by_ref().take(max_terms).map(|d| d.quotient).collect();
    let mut e = CfExpansion::new(params, quotients, it.terminated());
    e.precision_exhausted = it.precision_exhausted();
    Ok(e)
}

/// `x_0 = x`, `a_j = [x_j]_{a,b}`, `x_{j+1} = -1/(x_j - a_j)`.
pub fn expand_ab(x: &Number, params: &CfParams, max_terms: usize) -> Result<CfExpansion, CfError> {
    if params.flavor != Flavor::Ab {
        return Err(CfError::InvalidParams("expand_ab needs ab parameters".into()));
    }
    collect(x, params, max_terms)
}

/// `a_j = [x_j]`, `x_{j+1} = 1/(x_j - a_j)`.
pub fn expand_classical(x: &Number, max_terms: usize) -> Result<CfExpansion, CfError> {
    collect(x, &CfParams::classical(), max_terms)
}

/// Three-term recursions: `p_j = a_j p_{j-1} + p_{j-2}` (classical) or
/// `p_j = a_j p_{j-1} - p_{j-2}` (ab); each fraction is reported with `q > 0`.
pub fn convergents(e: &CfExpansion, k: usize) -> Result<Vec<Convergent>, CfError> {
    if k > e.len() {
        return Err(CfError::Insufficient { have: e.len(), need: k });
    }
    let sign = match e.flavor {
        Flavor::Classical => BigInt::one(),
        Flavor::Ab => -BigInt::one(),
    };
    let (mut p2, mut p1) = (BigInt::zero(), BigInt::one());
    let (mut q2, mut q1) = (sign.clone(), BigInt::zero());
    let mut out = Vec::with_capacity(k);
    for (j, a) in e.quotients.iter().take(k).enumerate() {
        let p = a * &p1 + &sign * &p2;
        let q = a * &q1 + &sign * &q2;
        let (mut pn, mut qn) = (p.clone(), q.clone());
        if qn.is_negative() || (qn.is_zero() && pn.is_negative()) {
            pn = -pn;
            qn = -qn;
        }
        out.push(Convergent { p: pn, q: qn, index: j });
        p2 = std::mem::replace(&mut p1, p);
        q2 = std::mem::replace(&mut q1, q);
    }
    Ok(out)
}

/// Sign alternation of a classical expansion into the `(-1,1)` expansion of
/// the same number.
///
/// For `x >= 0` digit `j` becomes `(-1)^j c_j`; a terminated expansion whose
/// last index is odd first has `c_n` rewritten as `c_n - 1, 1`. For `x < 0`
/// the leading digit becomes `c_0 + 1` and the rest is the alternation of the
/// classical expansion of `1/(1 - (x - c_0))`.
pub fn classical_to_alternating(e: &CfExpansion) -> Result<CfExpansion, CfError> {
    if e.flavor != Flavor::Classical {
        return Err(CfError::InvalidParams("expected a classical expansion".into()));
    }
    let params = CfParams::minus_one_one();
    let c = &e.quotients;
    if c.is_empty() {
        let mut out = CfExpansion::new(&params, vec![], e.terminated);
        out.precision_exhausted = e.precision_exhausted;
        return Ok(out);
    }
    let mut out = Vec::with_capacity(c.len() + 1);
    let mut terminated = e.terminated;
    if !c[0].is_negative() {
        out.extend(alternate(c, e.terminated));
    } else {
        out.push(&c[0] + 1);
        let one = BigInt::one();
        let tail: Option<Vec<BigInt>> = if c.len() == 1 {
            e.terminated.then(|| vec![one.clone()])
        } else if c[1] > one {
            let mut t = vec![one.clone(), &c[1] - 1];
            t.extend(c[2..].iter().cloned());
            Some(t)
        } else if c.len() >= 3 {
            let mut t = vec![&c[2] + 1];
            t.extend(c[3..].iter().cloned());
            Some(t)
        } else {
            terminated = false;
            None
        };
        if let Some(mut t) = tail {
            if e.terminated && t.len() >= 2 && t.last() == Some(&one) {
                t.pop();
                *t.last_mut().expect("nonempty") += 1;
            }
            out.extend(alternate(&t, e.terminated));
        }
    }
    let mut res = CfExpansion::new(&params, out, terminated);
    res.precision_exhausted = e.precision_exhausted;
    Ok(res)
}

fn alternate(c: &[BigInt], terminated: bool) -> Vec<BigInt> {
    let mut digits = c.to_vec();
    let n = digits.len() - 1;
    if terminated && n % 2 == 1 {
        digits[n] -= 1;
        digits.push(BigInt::one());
    }
    digits
        .into_iter()
        .enumerate()
        .map(|(j, a)| if j % 2 == 1 { -a } else { a })
        .collect()
}

/// `a_j^xi = a_j` when it exceeds the threshold (in absolute value for the
/// ab flavor, plainly for classical), else `1`.
pub fn modified_quotients(e: &CfExpansion, xi: f64) -> Result<CfExpansion, CfError> {
    if !(xi > 1.0) {
        return Err(CfError::InvalidParameter(format!("xi = {xi} must exceed 1")));
    }
    let keep = |a: &BigInt| -> bool {
        let v = match e.flavor {
            Flavor::Classical => a.clone(),
            Flavor::Ab => a.abs(),
        };
        exceeds(&v, xi)
    };
    let quotients = e.quotients.iter().map(|a| if keep(a) { a.clone() } else { BigInt::one() }).collect();
    let mut out = e.clone();
    out.quotients = quotients;
    Ok(out)
}

/// `v > xi` for an integer `v`, exact for finite `xi`.
pub(crate) fn exceeds(v: &BigInt, xi: f64) -> bool {
    match v.to_f64() {
        Some(f) if f.abs() < 1e15 => f > xi,
        _ => v.is_positive(),
    }
}

/// Index from which `|q_j|` never decreases again, if any within the prefix.
pub fn q_monotone_from(conv: &[Convergent]) -> usize {
    let mut start = 0;
    for j in 1..conv.len() {
        if conv[j].q.abs() < conv[j - 1].q.abs() {
            start = j;
        }
    }
    start
}

/// gcd check used by the convergent invariants.
pub fn is_reduced_fraction(c: &Convergent) -> bool {
    c.p.gcd(&c.q).is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn n(s: &str) -> Number {
        s.parse().unwrap()
    }

    #[test]
    fn floor_examples() {
        let p = CfParams::nearest();
        assert_eq!(generalized_floor(&n("2/5"), &p).unwrap(), BigInt::zero());
        assert_eq!(generalized_floor(&n("2"), &p).unwrap(), BigInt::from(2));
        let m = CfParams::minus_one_one();
        assert_eq!(generalized_floor(&n("-5/2"), &m).unwrap(), BigInt::from(-2));
        // branch points
        assert_eq!(generalized_floor(&n("1/2"), &p).unwrap(), BigInt::one());
        assert_eq!(generalized_floor(&n("-1/2"), &p).unwrap(), BigInt::zero());
    }

    #[test]
    fn expand_examples() {
        let e = expand_ab(&n("2/5"), &CfParams::nearest(), 100).unwrap();
        assert_eq!(e.quotients, q(&[0, -2, 2]));
        assert!(e.terminated);
        let g = expand_ab(&Number::golden(), &CfParams::minus_one_one(), 8).unwrap();
        assert_eq!(g.quotients, q(&[1, -1, 1, -1, 1, -1, 1, -1]));
        assert!(!g.terminated);
        // the alternating value of 5/2, which ends in a 1
        let h = expand_ab(&n("5/2"), &CfParams::minus_one_one(), 100).unwrap();
        assert_eq!(h.quotients, q(&[2, -1, 1]));
        assert_eq!(h.fold(3).unwrap(), n("5/2"));
    }

    #[test]
    fn classical_examples() {
        assert_eq!(expand_classical(&n("5/2"), 10).unwrap().quotients, q(&[2, 2]));
        assert_eq!(expand_classical(&Number::golden(), 6).unwrap().quotients, q(&[1; 6]));
        assert_eq!(expand_classical(&n("surd:0,1,2,1"), 5).unwrap().quotients, q(&[1, 2, 2, 2, 2]));
        assert_eq!(expand_classical(&n("-7/3"), 10).unwrap().quotients, q(&[-3, 1, 2]));
    }

    #[test]
    fn convergent_examples() {
        let p = CfParams::classical();
        let e = CfExpansion::new(&p, q(&[2, 2]), true);
        let c = convergents(&e, 2).unwrap();
        assert_eq!((c[0].p.clone(), c[0].q.clone()), (BigInt::from(2), BigInt::one()));
        assert_eq!((c[1].p.clone(), c[1].q.clone()), (BigInt::from(5), BigInt::from(2)));
        let f = CfExpansion::new(&p, q(&[1; 5]), false);
        let c = convergents(&f, 5).unwrap();
        assert_eq!(c[4].value(), n("8/5"));
        let ab = expand_ab(&n("2/5"), &CfParams::nearest(), 10).unwrap();
        let c = convergents(&ab, 3).unwrap();
        assert_eq!(c[0].value(), n("0"));
        // 0 - 1/(-2) = 1/2
        assert_eq!(c[1].value(), n("1/2"));
        assert_eq!(c[2].value(), n("2/5"));
    }

    #[test]
    fn alternation_examples() {
        let p = CfParams::classical();
        let alt = |v: &[i64], t| classical_to_alternating(&CfExpansion::new(&p, q(v), t)).unwrap().quotients;
        assert_eq!(alt(&[2, 2], true), q(&[2, -1, 1]));
        assert_eq!(alt(&[1, 1, 1, 1], false), q(&[1, -1, 1, -1]));
        assert_eq!(alt(&[], true), q(&[]));
        assert_eq!(alt(&[-3, 1, 2], true), q(&[-2, 3]));
        assert_eq!(alt(&[-3], true), q(&[-2, 1]));
        assert_eq!(alt(&[-1, 2], true), q(&[0, 2]));
    }

    #[test]
    fn modified_examples() {
        let c = CfExpansion::new(&CfParams::classical(), q(&[1, 5, 2, 9]), false);
        assert_eq!(modified_quotients(&c, 3.0).unwrap().quotients, q(&[1, 5, 1, 9]));
        let ab = CfExpansion::new(&CfParams::nearest(), q(&[2, -7]), false);
        assert_eq!(modified_quotients(&ab, 10.0).unwrap().quotients, q(&[1, 1]));
        assert_eq!(modified_quotients(&ab, 6.5).unwrap().quotients, q(&[1, -7]));
        assert!(modified_quotients(&ab, 1.0).is_err());
    }

    #[test]
    fn tracked_expansion_runs_out() {
        let e = expand_ab(&n("dec:1.41@-2"), &CfParams::minus_one_one(), 100).unwrap();
        assert!(e.precision_exhausted);
        assert!(!e.terminated);
        assert!(e.len() >= 1 && e.len() < 10);
        assert_eq!(e.quotients[0], BigInt::one());
    }

    #[test]
    fn params_validation() {
        assert!(CfParams::ab(n("-1/2"), n("1/4")).is_err());
        assert!(CfParams::ab(n("-2"), n("1")).is_err());
        assert!(CfParams::ab(n("-2/5"), n("3/5")).is_ok());
    }
}
