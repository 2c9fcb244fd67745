//! Geodesics of the upper half-plane: (a,b)-reduction, returns to the unit
//! half-circle `C`, return times and cusp excursions.
//!
//! Geometry is computed in `f64` from exact endpoint data that is never fed
//! back into the coding. Per-return quantities are evaluated in the local
//! frame of the return: the repelling endpoint `u`, the remainder
//! `delta = w - a_j` and the quotient `a_j`, which only enters through
//! `ln|a_j|` and `1/a_j`. Arc lengths along a semicircle of radius `R` are
//! differences of `psi = ln tan(theta/2)`; a point at Euclidean distance `eps`
//! from the foot `u` has `psi = ln((2R - eps)/eps)/2`, and the height of the
//! point at `psi` is `R / cosh psi`.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::arith::{ln_big, ArithError, Moebius, Number, UpperHalfPoint};
use crate::cf::{generalized_floor, CfError, CfExpansion, CfParams, Flavor};
use crate::ext::ExtFloat;
use crate::natext::{BoundaryX, Staircase};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeoError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Cf(#[from] CfError),
    #[error("degenerate geodesic: {0}")]
    Degenerate(String),
    #[error("geodesic does not meet the unit half-circle")]
    NoIntersection,
    #[error("reduction failed after {0} steps")]
    ReductionFailed(usize),
    #[error("unavailable: {0}")]
    Unavailable(String),
    #[error("index {index} needs quotients {need}, expansion has {have}")]
    InsufficientNeighbors { index: usize, need: usize, have: usize },
    #[error("geodesic at return {0} is not reduced")]
    NotReduced(usize),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// Oriented geodesic from the repelling endpoint `u` to the attracting
/// endpoint `w`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Geodesic {
    pub u: Number,
    pub w: Number,
}

impl Geodesic {
    pub fn new(u: Number, w: Number) -> Result<Geodesic, GeoError> {
        if u.is_infinite() && w.is_infinite() {
            return Err(GeoError::Degenerate("both endpoints at infinity".into()));
        }
        if !u.is_infinite() && !w.is_infinite() && u.compare(&w)? == Ordering::Equal {
            return Err(GeoError::Degenerate("u = w".into()));
        }
        Ok(Geodesic { u, w })
    }

    /// `|w - u| / 2`; `None` for vertical geodesics.
    pub fn apex_height(&self) -> Option<f64> {
        if self.u.is_infinite() || self.w.is_infinite() {
            return None;
        }
        Some((self.w.to_f64() - self.u.to_f64()).abs() / 2.0)
    }

    pub fn center(&self) -> Option<f64> {
        if self.u.is_infinite() || self.w.is_infinite() {
            return None;
        }
        Some((self.w.to_f64() + self.u.to_f64()) / 2.0)
    }

    pub fn apply(&self, m: &Moebius) -> Result<Geodesic, GeoError> {
        Ok(Geodesic { u: m.apply(&self.u)?, w: m.apply(&self.w)? })
    }

    /// Image under `S T^{-a}`.
    pub fn shift(&self, a: &BigInt) -> Result<Geodesic, GeoError> {
        self.apply(&Moebius::shift_step(a))
    }
}

fn cmp(x: &Number, y: &Number) -> Option<Ordering> {
    x.compare(y).ok()
}

fn abs_is_one(x: &Number) -> bool {
    !x.is_infinite() && (cmp(x, &Number::int(1)) == Some(Ordering::Equal) || cmp(x, &Number::int(-1)) == Some(Ordering::Equal))
}

/// Intersection of `g` with `C = {|z| = 1}`.
pub fn cross_section_point(g: &Geodesic) -> Result<UpperHalfPoint, GeoError> {
    if abs_is_one(&g.u) || abs_is_one(&g.w) {
        return Err(GeoError::Degenerate("endpoint on C".into()));
    }
    let x = if g.w.is_infinite() || g.u.is_infinite() {
        let foot = if g.w.is_infinite() { &g.u } else { &g.w };
        foot.to_f64()
    } else {
        let (u, w) = (g.u.to_f64(), g.w.to_f64());
        let s = u + w;
        if s == 0.0 {
            return Err(GeoError::NoIntersection);
        }
        let x = u + (1.0 - u * u) / s;
        let (c, r) = ((u + w) / 2.0, (w - u).abs() / 2.0);
        if (x - c).abs() >= r {
            return Err(GeoError::NoIntersection);
        }
        x
    };
    if !(x.abs() < 1.0) {
        return Err(GeoError::NoIntersection);
    }
    Ok(UpperHalfPoint { x, y: ((1.0 - x) * (1.0 + x)).sqrt() })
}

// ---------------------------------------------------------------------------
// reduction

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reducedness {
    Reduced,
    NotReduced,
    /// Within the error bar of a rectangle side, or an undecidable comparison.
    Indeterminate,
}

#[derive(Clone, Copy, PartialEq)]
enum Tri {
    Yes,
    No,
    Maybe,
}

impl Tri {
    fn and(self, o: Tri) -> Tri {
        match (self, o) {
            (Tri::No, _) | (_, Tri::No) => Tri::No,
            (Tri::Yes, Tri::Yes) => Tri::Yes,
            _ => Tri::Maybe,
        }
    }

    fn from_cmp(c: Option<Ordering>, accept: &[Ordering]) -> Tri {
        match c {
            None => Tri::Maybe,
            Some(o) if accept.contains(&o) => Tri::Yes,
            _ => Tri::No,
        }
    }
}

fn exact_ge(x: &Number, bound: &Number) -> Tri {
    if bound.is_infinite() {
        return Tri::No;
    }
    Tri::from_cmp(cmp(x, bound), &[Ordering::Greater, Ordering::Equal])
}

/// `u` against `-1/x` where `x` is known to `+-err`: the side of `u` facing
/// zero counts as inside.
fn u_within(u: f64, x: f64, err: f64) -> Tri {
    let (b1, b2) = (-1.0 / (x - err), -1.0 / (x + err));
    let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
    let inside_is_above = x > 0.0;
    if inside_is_above {
        if u > hi {
            Tri::Yes
        } else if u < lo {
            Tri::No
        } else {
            Tri::Maybe
        }
    } else if u < lo {
        Tri::Yes
    } else if u > hi {
        Tri::No
    } else {
        Tri::Maybe
    }
}

/// Where reduced geodesics live.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Region {
    /// `|w| > 1` and `-1 < sgn(w) u < 0`.
    MinusOneOne,
    /// `Lambda_{a,b} = S(D /\ {a <= w < b})` from a boundary staircase of `D`.
    Staircase(Staircase),
}

impl Region {
    /// The A-reduced rule for (-1,1), otherwise the two-rectangle staircase
    /// of `bx`.
    pub fn for_params(params: &CfParams, bx: Option<&BoundaryX>) -> Result<Region, GeoError> {
        if params.flavor != Flavor::Ab {
            return Err(GeoError::Invalid("reduction needs (a,b) parameters".into()));
        }
        if params.is_minus_one_one() {
            return Ok(Region::MinusOneOne);
        }
        let bx = bx.ok_or_else(|| GeoError::Unavailable("boundary coordinates needed for reduction".into()))?;
        Staircase::from_boundary_x(params, bx).map(Region::Staircase).map_err(|e| GeoError::Invalid(e.to_string()))
    }

    pub fn boundary_x(&self) -> Option<&BoundaryX> {
        match self {
            Region::MinusOneOne => None,
            Region::Staircase(s) => Some(&s.boundary_x),
        }
    }
}

/// Membership of `(u, w)` in `Lambda_{a,b}`, in the union-of-rectangles form:
/// for `w > 0`
/// `[-1/x_a^-, 0) x [-1/a, inf)  or  (0, -1/x_b^-] x [-1/(b-1), inf)`,
/// for `w < 0`
/// `(0, -1/x_b^+] x (-inf, -1/b]  or  [-1/x_a^+, 0) x (-inf, -1/(a+1)]`.
/// For `(-1, 1)` the rule is `|w| > 1` and `-1 < sgn(w) u < 0`.
pub fn is_reduced(g: &Geodesic, params: &CfParams, bx: Option<&BoundaryX>) -> Result<Reducedness, GeoError> {
    is_reduced_in(g, &Region::for_params(params, bx)?)
}

/// Membership in a region. For a staircase, `(u, w)` is reduced when
/// `y = -1/w` lies on a step of the component selected by the sign of `u`
/// and `-1/u` lies beyond that step's position.
pub fn is_reduced_in(g: &Geodesic, region: &Region) -> Result<Reducedness, GeoError> {
    if g.u.is_infinite() || g.w.is_infinite() {
        return Ok(Reducedness::NotReduced);
    }
    let zero = Number::zero();
    let one = Number::int(1);
    let tri = match region {
        Region::MinusOneOne => {
            let sw = cmp(&g.w, &zero);
            let su = match sw {
                Some(Ordering::Less) => g.u.neg(),
                _ => g.u.clone(),
            };
            let big = match sw {
                Some(Ordering::Greater) => Tri::from_cmp(cmp(&g.w, &one), &[Ordering::Greater]),
                Some(Ordering::Less) => Tri::from_cmp(cmp(&g.w, &one.neg()), &[Ordering::Less]),
                Some(Ordering::Equal) => Tri::No,
                None => Tri::Maybe,
            };
            big.and(Tri::from_cmp(cmp(&su, &one.neg()), &[Ordering::Greater]))
                .and(Tri::from_cmp(cmp(&su, &zero), &[Ordering::Less]))
        }
        Region::Staircase(st) => match (cmp(&g.w, &zero), cmp(&g.u, &zero)) {
            (Some(Ordering::Equal), _) | (_, Some(Ordering::Equal)) => Tri::No,
            (None, _) | (_, None) => Tri::Maybe,
            (Some(_), Some(us)) => {
                let y = g.w.recip()?.neg();
                let steps = if us == Ordering::Less { &st.lower } else { &st.upper };
                let mut t = Tri::No;
                for s in steps {
                    let on = exact_ge(&y, &s.lo).and(Tri::from_cmp(cmp(&y, &s.hi), &[Ordering::Less]));
                    t = or(t, on.and(u_within(g.u.to_f64(), s.x, st.error)));
                }
                t
            }
        },
    };
    Ok(match tri {
        Tri::Yes => Reducedness::Reduced,
        Tri::No => Reducedness::NotReduced,
        Tri::Maybe => Reducedness::Indeterminate,
    })
}

fn or(x: Tri, y: Tri) -> Tri {
    match (x, y) {
        (Tri::Yes, _) | (_, Tri::Yes) => Tri::Yes,
        (Tri::No, Tri::No) => Tri::No,
        _ => Tri::Maybe,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reduction {
    pub geodesic: Geodesic,
    /// `S T^{-a_{n-1}} ... S T^{-a_0}`.
    pub word: Moebius,
    pub steps: usize,
    #[serde(with = "crate::json::bigint_seq")]
    pub quotients: Vec<BigInt>,
    pub verdict: Reducedness,
}

/// Applies `S T^{-a_j}` with the quotients of `w` until the geodesic is
/// reduced (an indeterminate verdict does not stop the loop).
pub fn reduce_geodesic(g: &Geodesic, params: &CfParams, bx: Option<&BoundaryX>, cap: usize) -> Result<Reduction, GeoError> {
    reduce_geodesic_in(g, params, &Region::for_params(params, bx)?, cap)
}

/// Steps to wait for a decisive verdict after the first indeterminate one.
pub const INDETERMINATE_LOOKAHEAD: usize = 64;

/// As `reduce_geodesic`. If no state is decisively reduced within
/// `INDETERMINATE_LOOKAHEAD` steps of the first indeterminate one (an orbit
/// running along the region's boundary, say), that first indeterminate state
/// is returned with `verdict` set accordingly.
pub fn reduce_geodesic_in(g: &Geodesic, params: &CfParams, region: &Region, cap: usize) -> Result<Reduction, GeoError> {
    let mut cur = g.clone();
    let mut word = Moebius::identity();
    let mut quotients = Vec::new();
    let mut pending: Option<Reduction> = None;
    for n in 0..=cap {
        match is_reduced_in(&cur, region)? {
            Reducedness::Reduced => {
                return Ok(Reduction { geodesic: cur, word, steps: n, quotients, verdict: Reducedness::Reduced });
            }
            Reducedness::Indeterminate if pending.is_none() => {
                pending = Some(Reduction {
                    geodesic: cur.clone(),
                    word: word.clone(),
                    steps: n,
                    quotients: quotients.clone(),
                    verdict: Reducedness::Indeterminate,
                });
            }
            _ => {}
        }
        if let Some(p) = &pending {
            if n >= p.steps + INDETERMINATE_LOOKAHEAD {
                break;
            }
        }
        if n == cap || cur.w.is_infinite() {
            break;
        }
        let a = generalized_floor(&cur.w, params)?;
        if cur.w.compare(&Number::from_bigint(a.clone()))? == Ordering::Equal {
            // the expansion of w ends here; the next lift is vertical
            break;
        }
        let m = Moebius::shift_step(&a);
        cur = cur.apply(&m)?;
        word = m.compose(&word);
        quotients.push(a);
    }
    pending.ok_or(GeoError::ReductionFailed(quotients.len() + 1))
}

/// The representative of `z` in `{|z| >= 1, |x| <= 1/2}` and the word that
/// takes `z` there.
pub fn reduce_point(z: &UpperHalfPoint) -> Result<(UpperHalfPoint, Moebius), GeoError> {
    if !(z.y > 0.0) || !z.x.is_finite() || !z.y.is_finite() {
        return Err(GeoError::Invalid(format!("({}, {}) is not in the upper half-plane", z.x, z.y)));
    }
    let (mut x, mut y) = (z.x, z.y);
    let mut word = Moebius::identity();
    for _ in 0..100_000 {
        let n = x.round();
        if n != 0.0 {
            x -= n;
            word = Moebius::t_pow(&BigInt::from(-(n as i64))).compose(&word);
        }
        let r2 = x * x + y * y;
        if r2 >= 1.0 {
            return Ok((UpperHalfPoint { x, y }, word));
        }
        x = -x / r2;
        y /= r2;
        word = Moebius::s().compose(&word);
    }
    Err(GeoError::Invalid("fundamental-domain reduction did not terminate".into()))
}

// ---------------------------------------------------------------------------
// local-frame return geometry

/// A quotient through `ln|a|` and `1/|a|`, so that quotients far outside the
/// `f64` range are still usable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Magnitude {
    pub negative: bool,
    pub ln_abs: ExtFloat,
    /// `1/|a|`, zero when it underflows.
    pub recip: f64,
}

impl Magnitude {
    pub fn from_bigint(a: &BigInt) -> Magnitude {
        if a.is_zero() {
            return Magnitude { negative: false, ln_abs: ExtFloat::ZERO, recip: f64::INFINITY };
        }
        let abs = a.abs();
        let f = abs.to_f64().unwrap_or(f64::INFINITY);
        Magnitude { negative: a.is_negative(), ln_abs: ExtFloat::new(ln_big(&abs)), recip: 1.0 / f }
    }

    pub fn from_ln(ln_abs: ExtFloat, negative: bool) -> Magnitude {
        let recip = (-ln_abs.to_f64()).exp();
        Magnitude { negative, ln_abs, recip }
    }

    pub fn is_zero(&self) -> bool {
        self.recip.is_infinite()
    }
}

/// One return in local coordinates: `w = a + delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub a: Magnitude,
    pub u: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeAbove {
    pub d: f64,
    /// Signed length of the part of the window with `y > d` in this lift.
    pub time: ExtFloat,
    /// Signed length of the part of the window in the cusp neighbourhood
    /// (height above `d` in the fundamental domain): `time` plus the time in
    /// the horoballs at the integer cusps next to `C` and `a + C`. Only
    /// differs from `time` when a crossing is low, as under (-1,1).
    pub cusp: ExtFloat,
    /// `elapsed - cusp`, computed without cancellation.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnGeometry {
    /// Signed arc length from the crossing with `C` to the crossing with
    /// `a_j + C`, positive in the direction of `w`.
    pub elapsed: ExtFloat,
    /// `t_j - 2 ln|a_j|` for the unsigned return time `t_j = |elapsed|`.
    pub deviation: f64,
    /// Cross-section point on `C`.
    pub point: UpperHalfPoint,
    /// `ln` of the Euclidean radius.
    pub ln_apex: ExtFloat,
    pub above: Vec<TimeAbove>,
}

impl ReturnGeometry {
    pub fn return_time(&self) -> ExtFloat {
        self.elapsed.abs()
    }

    pub fn apex(&self) -> f64 {
        self.ln_apex.to_f64().exp()
    }
}

fn positive(v: f64) -> Result<f64, GeoError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(GeoError::NoIntersection)
    }
}

/// Length of `[lo, hi] /\ [-m, m]`, zero when empty.
fn overlap(lo: f64, hi: f64, m: f64) -> f64 {
    (hi.min(m) - lo.max(-m)).max(0.0)
}

/// Horoball at an integer cusp `n` near one end of a window: the segment of
/// the geodesic inside `{height > d}` after `n` is sent to infinity is
/// `[q - h, q + h]` in `psi`, offset by `L` (`u_side`) or `-L`.
#[derive(Debug, Clone, Copy)]
struct FootCusp {
    q: f64,
    ln_r: f64,
    u_side: bool,
}

/// Cusps `-1, 0, 1` at `C` and `a - 1, a, a + 1` at `a + C`, in the oriented
/// frame. With `n` sent to infinity the geodesic has radius
/// `R_n = |w - u| / (2 |u - n| |w - n|)`, and the point deepest in the
/// horoball sits at `psi_n = ln|n - w| - ln|n - u|`.
fn foot_cusps(rho: f64, lf: f64, u: f64, delta: f64, side: f64) -> Vec<FootCusp> {
    let a_small = (lf < 2.0).then(|| (1.0 / rho).round() as i64);
    let mut out = Vec::with_capacity(6);
    for t in [-1.0f64, 0.0, 1.0] {
        let (du, dw) = ((t - u).abs(), (1.0 + rho * (delta - t)).abs());
        if du > 0.0 && dw > 0.0 {
            out.push(FootCusp { q: dw.ln() - du.ln(), ln_r: side.ln() - std::f64::consts::LN_2 - du.ln() - dw.ln(), u_side: true });
        }
    }
    for s in [-1i64, 0, 1] {
        if a_small.is_some_and(|a| a + s <= 1) {
            continue; // already one of the cusps at C
        }
        let (dw, du) = ((delta - s as f64).abs(), (1.0 + rho * (s as f64 - u)).abs());
        if du > 0.0 && dw > 0.0 {
            out.push(FootCusp { q: dw.ln() - du.ln(), ln_r: side.ln() - std::f64::consts::LN_2 - du.ln() - dw.ln(), u_side: false });
        }
    }
    out
}

/// Time inside the integer-cusp horoballs of height `d` over a window given
/// as `[lo, hi]` relative to `L` for cusps at `C`, `[lo_w, hi_w]` relative to
/// `-L` for cusps at `a + C`. For `d < 1` the horoballs overlap each other and
/// `y > d`, and only the lift's own height is counted.
fn cusp_overlap(cusps: &[FootCusp], d: f64, lo: f64, hi: f64, lo_w: f64, hi_w: f64) -> f64 {
    if d < 1.0 {
        return 0.0;
    }
    let ln_d = d.ln();
    let mut total = 0.0;
    for c in cusps {
        let x = c.ln_r - ln_d;
        if x <= 0.0 {
            continue;
        }
        let h = if x > 20.0 { x + std::f64::consts::LN_2 } else { x.exp().acosh() };
        let (wlo, whi) = if c.u_side { (lo, hi) } else { (lo_w, hi_w) };
        total += ((c.q + h).min(whi) - (c.q - h).max(wlo)).max(0.0);
    }
    total
}

/// Return geometry of one frame. With `s = rho (delta - u)`,
/// `v = rho (u + delta)`, `rho = 1/a`:
/// `eps_1 = (1 - u^2) rho / (1 + v)` (entry on `C`, from `u`),
/// `eps_2 = (1 - delta^2) rho / (1 - v)` (exit on `a + C`, from `w`),
/// `psi_1 = L + p_1`, `psi_2 = -(L + p_2)` with `L = ln a` and
/// `p_1 = (ln(1 + s - rho eps_1) - ln(1 - u^2) + ln(1 + v)) / 2`,
/// `p_2 = (ln(1 + s - rho eps_2) - ln(1 - delta^2) + ln(1 - v)) / 2`.
pub fn return_geometry(frame: &Frame, d_list: &[f64]) -> Result<ReturnGeometry, GeoError> {
    if frame.a.is_zero() {
        return Err(GeoError::Invalid("zero quotient".into()));
    }
    // orient so that w > u; then a > 0 is required
    let rho = frame.a.recip;
    let sig = if frame.a.negative { -1.0 } else { 1.0 };
    let (u, delta) = (sig * frame.u, sig * frame.delta);
    let l = frame.a.ln_abs;
    let s = rho * (delta - u);
    let v = rho * (u + delta);
    let one_u = positive((1.0 - u) * (1.0 + u))?;
    let one_d = positive((1.0 - delta) * (1.0 + delta))?;
    let plus_v = positive(1.0 + v)?;
    let minus_v = positive(1.0 - v)?;
    let side = positive(1.0 + s)?;
    let eps1 = one_u * rho / plus_v;
    let eps2 = one_d * rho / minus_v;
    let k1 = positive(1.0 + s - rho * eps1)?;
    let k2 = positive(1.0 + s - rho * eps2)?;
    let p1 = 0.5 * (k1.ln() - one_u.ln() + plus_v.ln());
    let p2 = 0.5 * (k2.ln() - one_d.ln() + minus_v.ln());

    let x1 = sig * (u + eps1);
    let y1 = (one_u * k1 / plus_v).sqrt();
    let ln_apex = l + (side.ln() - std::f64::consts::LN_2);

    let lf = l.to_f64();
    let small = lf.is_finite() && lf < 1e12;
    let elapsed = l.mul_f64(2.0) + (p1 + p2);
    let forward = !small || 2.0 * lf + p1 + p2 >= 0.0;
    let deviation = if forward { p1 + p2 } else { -(2.0 * lf + p1 + p2) - 2.0 * lf };

    let cusps = foot_cusps(rho, lf, u, delta, side);
    let mut above = Vec::with_capacity(d_list.len());
    for &d in d_list {
        if !(d > 0.0) {
            return Err(GeoError::Invalid(format!("height {d} must be positive")));
        }
        // 1/X with X = R/d
        let inv_x = 2.0 * d * rho / side;
        let pd = (inv_x < 1.0).then(|| side.ln() - d.ln() + ((1.0 + ((1.0 - inv_x) * (1.0 + inv_x)).sqrt()) / 2.0).ln());
        let item = if forward {
            let mut time = ExtFloat::ZERO;
            let mut gap = elapsed.to_f64();
            if let Some(pd) = pd {
                let (m1, m2) = (p1.min(pd), p2.min(pd));
                let t = l.mul_f64(2.0) + (m1 + m2);
                if t.signum() > 0.0 {
                    time = t;
                    gap = (p1 - m1) + (p2 - m2);
                }
            }
            let horo = cusp_overlap(&cusps, d, -(2.0 * lf + p2), p1, -p2, 2.0 * lf + p1);
            TimeAbove { d, time, cusp: time + ExtFloat::new(horo), gap: gap - horo }
        } else {
            let (psi1, psi2) = (lf + p1, -(lf + p2));
            let top = pd.map_or(0.0, |pd| overlap(psi1, psi2, lf + pd));
            let horo = cusp_overlap(&cusps, d, psi1 - lf, psi2 - lf, psi1 + lf, psi2 + lf);
            let t = -(top + horo);
            TimeAbove { d, time: ExtFloat::new(-top), cusp: ExtFloat::new(t), gap: elapsed.to_f64() - t }
        };
        above.push(item);
    }
    Ok(ReturnGeometry { elapsed, deviation, point: UpperHalfPoint { x: x1, y: y1 }, ln_apex, above })
}

/// Local frame of a geodesic with finite endpoints for the window `a + C`.
pub fn frame_of(g: &Geodesic, a: &BigInt) -> Result<Frame, GeoError> {
    if g.u.is_infinite() || g.w.is_infinite() {
        return Err(GeoError::Degenerate("vertical geodesic has no return window".into()));
    }
    let delta = g.w.add_int(&-a).to_f64();
    Ok(Frame { a: Magnitude::from_bigint(a), u: g.u.to_f64(), delta })
}

/// Which window `time_above` clips to.
#[derive(Debug, Clone, PartialEq)]
pub enum Window {
    Unclipped,
    /// The segment between `C` and `a + C`.
    Return(BigInt),
}

/// Hyperbolic length of the part of `g` above `y = d`. Unclipped this is
/// `2 acosh(R/d) = 2 ln((R/d)(1 + sqrt(1 - d^2/R^2)))`, zero for `R <= d`.
pub fn time_above(g: &Geodesic, d: f64, window: &Window) -> Result<f64, GeoError> {
    if !(d > 0.0) {
        return Err(GeoError::Invalid(format!("height {d} must be positive")));
    }
    match window {
        Window::Unclipped => {
            let r = g.apex_height().ok_or_else(|| GeoError::Degenerate("vertical geodesic".into()))?;
            Ok(if r <= d { 0.0 } else { 2.0 * (r / d).acosh() })
        }
        Window::Return(a) => {
            let geo = return_geometry(&frame_of(g, a)?, &[d])?;
            Ok(geo.above[0].time.to_f64().abs())
        }
    }
}

// ---------------------------------------------------------------------------
// reduced orbits

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnStep {
    pub index: usize,
    #[serde(with = "crate::json::bigint")]
    pub quotient: BigInt,
    pub geometry: ReturnGeometry,
    pub reducedness: Reducedness,
}

/// The lifts `g_{j+1} = S T^{-a_j} g_j` of a reduced geodesic, with one
/// `ReturnStep` per completed return.
#[derive(Debug, Clone)]
pub struct ReducedOrbit {
    params: CfParams,
    region: Region,
    d_list: Vec<f64>,
    current: Option<Geodesic>,
    pub steps: Vec<ReturnStep>,
}

impl ReducedOrbit {
    pub fn new(g: Geodesic, params: &CfParams, bx: Option<BoundaryX>, d_list: &[f64]) -> Result<ReducedOrbit, GeoError> {
        ReducedOrbit::in_region(g, params, Region::for_params(params, bx.as_ref())?, d_list)
    }

    pub fn in_region(g: Geodesic, params: &CfParams, region: Region, d_list: &[f64]) -> Result<ReducedOrbit, GeoError> {
        if is_reduced_in(&g, &region)? == Reducedness::NotReduced {
            return Err(GeoError::NotReduced(0));
        }
        Ok(ReducedOrbit { params: params.clone(), region, d_list: d_list.to_vec(), current: Some(g), steps: Vec::new() })
    }

    /// `None` once a rational endpoint has been reached.
    pub fn current(&self) -> Option<&Geodesic> {
        self.current.as_ref()
    }

    pub fn index(&self) -> usize {
        self.steps.len()
    }

    pub fn d_list(&self) -> &[f64] {
        &self.d_list
    }

    /// One return. `Ok(false)` when the lift has become vertical (rational
    /// attracting endpoint): the geodesic then runs into the cusp.
    pub fn advance(&mut self) -> Result<bool, GeoError> {
        let Some(g) = self.current.take() else {
            return Ok(false);
        };
        let j = self.steps.len();
        if g.w.is_infinite() {
            self.current = Some(g);
            return Ok(false);
        }
        let red = is_reduced_in(&g, &self.region)?;
        if red == Reducedness::NotReduced {
            self.current = Some(g);
            return Err(GeoError::NotReduced(j));
        }
        let a = generalized_floor(&g.w, &self.params)?;
        if abs_is_one(&g.w.add_int(&-&a)) {
            // w is the foot of a + C, a rational cusp: the geodesic runs into
            // it without crossing a + C, so this is the final excursion
            self.current = Some(g);
            return Ok(false);
        }
        let geometry = return_geometry(&frame_of(&g, &a)?, &self.d_list)?;
        let next = g.shift(&a)?;
        self.steps.push(ReturnStep { index: j, quotient: a, geometry, reducedness: red });
        self.current = Some(next);
        Ok(true)
    }
}

pub fn next_reduced(mut state: ReducedOrbit) -> Result<ReducedOrbit, GeoError> {
    state.advance()?;
    Ok(state)
}

// ---------------------------------------------------------------------------
// excursion thresholds

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcursionThresholds {
    pub d: f64,
    /// `2d - b - 1/x_a^-`
    pub lower_pos: f64,
    /// `2d - a - 1/x_b^-`
    pub upper_pos: f64,
    /// `2d + a + 1/x_b^+`
    pub lower_neg: f64,
    /// `2d + b + 1/x_a^+`
    pub upper_neg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdVerdict {
    BelowLower,
    AboveUpper,
    IndeterminateBand,
}

fn check_compact(params: &CfParams) -> Result<(f64, f64), GeoError> {
    if params.flavor != Flavor::Ab {
        return Err(GeoError::Invalid("thresholds need (a,b) parameters".into()));
    }
    if params.is_minus_one_one() {
        return Err(GeoError::Unavailable("no thresholds for (-1,1)".into()));
    }
    Ok((params.a.to_f64(), params.b.to_f64()))
}

/// Point thresholds from the boundary estimates as given.
pub fn excursion_thresholds(d: f64, params: &CfParams, bx: &BoundaryX) -> Result<ExcursionThresholds, GeoError> {
    let (a, b) = check_compact(params)?;
    Ok(ExcursionThresholds {
        d,
        lower_pos: 2.0 * d - b - 1.0 / bx.x_a_minus,
        upper_pos: 2.0 * d - a - 1.0 / bx.x_b_minus,
        lower_neg: 2.0 * d + a + 1.0 / bx.x_b_plus,
        upper_neg: 2.0 * d + b + 1.0 / bx.x_a_plus,
    })
}

/// Thresholds with each boundary value moved by its error bar in the
/// direction that narrows the claims: lower thresholds drop, upper ones rise.
pub fn conservative_thresholds(d: f64, params: &CfParams, bx: &BoundaryX) -> Result<ExcursionThresholds, GeoError> {
    let e = bx.error;
    let moved = BoundaryX {
        x_a_minus: bx.x_a_minus - e,
        x_a_plus: bx.x_a_plus - e,
        x_b_minus: bx.x_b_minus + e,
        x_b_plus: bx.x_b_plus + e,
        error: 0.0,
    };
    if moved.x_a_minus <= 0.0 || moved.x_a_plus <= 0.0 || moved.x_b_minus >= 0.0 || moved.x_b_plus >= 0.0 {
        return Err(GeoError::Unavailable("boundary error bar too wide".into()));
    }
    excursion_thresholds(d, params, &moved)
}

impl ExcursionThresholds {
    pub fn verdict(&self, a: &Magnitude) -> ThresholdVerdict {
        let x = a.ln_abs.to_f64().exp();
        let (lo, hi) = if a.negative { (self.lower_neg, self.upper_neg) } else { (self.lower_pos, self.upper_pos) };
        if x < lo {
            ThresholdVerdict::BelowLower
        } else if x > hi {
            ThresholdVerdict::AboveUpper
        } else {
            ThresholdVerdict::IndeterminateBand
        }
    }
}

// ---------------------------------------------------------------------------
// (-1,1) bounds

/// `c' = (1/2) ln 3`: length of the arc of `C` from `i` to `1/2 + (sqrt 3/2) i`.
pub fn c_prime() -> f64 {
    0.5 * 3f64.ln()
}

/// `lower = 2 ln|a_j| - c'`, and
/// `upper = 2 ln|a_j| + 2 max{ln|a_{j+1}| + ln|a_{j-1}| + ln|a_{j+2}| + ln|a_{j-2}|} + c`
/// with the maximum taken literally over the single displayed sum.
pub fn return_time_bounds_minus11(e: &CfExpansion, j: usize, c: f64, c_prime: f64) -> Result<(f64, f64), GeoError> {
    if !e.params().is_minus_one_one() {
        return Err(GeoError::Invalid("bounds are for the (-1,1) expansion".into()));
    }
    if j < 2 || j + 2 >= e.len() {
        return Err(GeoError::InsufficientNeighbors { index: j, need: j + 3, have: e.len() });
    }
    let la = |k: usize| -> f64 { ln_big(&e.quotients[k].abs()) };
    let lead = 2.0 * la(j);
    let neighbours = la(j + 1) + la(j - 1) + la(j + 2) + la(j - 2);
    Ok((lead - c_prime, lead + 2.0 * neighbours + c))
}

// ---------------------------------------------------------------------------
// numeric oracle

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub fraction: f64,
    /// `step (crossings + 2) / T`: each crossing of `y = d` misplaces at most
    /// one sampling interval.
    pub error_bound: f64,
    pub samples: usize,
    pub crossings: usize,
}

#[derive(Debug, Clone, Copy)]
enum Shape {
    /// `x = c + sig R tanh q`, `y = R / cosh q`.
    Circle { c: f64, r: f64, sig: f64 },
    /// `x = x0`, `y = e^{dir q}`.
    Vertical { x0: f64, dir: f64 },
}

/// Arc-length chart on a geodesic; `q` increases towards `w`.
#[derive(Debug, Clone)]
struct Chart {
    g: Geodesic,
    shape: Shape,
}

impl Chart {
    fn new(g: Geodesic) -> Chart {
        let shape = if g.w.is_infinite() {
            Shape::Vertical { x0: g.u.to_f64(), dir: 1.0 }
        } else if g.u.is_infinite() {
            Shape::Vertical { x0: g.w.to_f64(), dir: -1.0 }
        } else {
            let (u, w) = (g.u.to_f64(), g.w.to_f64());
            Shape::Circle { c: (u + w) / 2.0, r: (w - u).abs() / 2.0, sig: (w - u).signum() }
        };
        Chart { g, shape }
    }

    fn point(&self, q: f64) -> UpperHalfPoint {
        match self.shape {
            Shape::Circle { c, r, sig } => UpperHalfPoint { x: c + sig * r * q.tanh(), y: r / q.cosh() },
            Shape::Vertical { x0, dir } => UpperHalfPoint { x: x0, y: (dir * q).exp() },
        }
    }

    /// Parameter of the point of the geodesic nearest to `z` along the
    /// orthogonal direction.
    fn project(&self, z: &UpperHalfPoint) -> f64 {
        match self.shape {
            Shape::Circle { c, sig, .. } => (sig * (z.x - c) / z.y).asinh(),
            Shape::Vertical { dir, .. } => dir * z.y.ln(),
        }
    }
}

/// Starting point: the crossing with `C` if there is one, else the apex.
pub fn oracle_start(g: &Geodesic) -> UpperHalfPoint {
    if let Ok(p) = cross_section_point(g) {
        return p;
    }
    let ch = Chart::new(g.clone());
    match ch.shape {
        Shape::Circle { .. } => ch.point(0.0),
        Shape::Vertical { x0, .. } => UpperHalfPoint { x: x0, y: 1.0 },
    }
}

/// Fraction of the first `T` units of arc length of `g`, sampled at
/// midpoints of steps of length `step` from `oracle_start(g)`, whose
/// representative in the standard fundamental domain lies above `y = d`.
///
/// The walk keeps exact endpoints: whenever a sample leaves the fundamental
/// domain, the geodesic is replaced by its exact image under the reducing
/// word and the walk continues from the reduced sample.
pub fn cusp_time_numeric(g: &Geodesic, t: f64, d: f64, step: f64) -> Result<OracleEstimate, GeoError> {
    cusp_time_numeric_from(g, &oracle_start(g), t, d, step)
}

pub fn cusp_time_numeric_from(g: &Geodesic, start: &UpperHalfPoint, t: f64, d: f64, step: f64) -> Result<OracleEstimate, GeoError> {
    if !(d > 0.0) {
        return Err(GeoError::Invalid("d must be positive".into()));
    }
    let heights = oracle_heights(g, start, t, step)?;
    Ok(summarize_heights(&heights, d, t))
}

/// Reduced heights at the midpoints of `ceil(T/step)` equal steps over
/// `[0, T]` from `start`.
pub fn oracle_heights(g: &Geodesic, start: &UpperHalfPoint, t: f64, step: f64) -> Result<Vec<f64>, GeoError> {
    if !(t > 0.0) || !(step > 0.0) || !t.is_finite() {
        return Err(GeoError::Invalid("T and step must be positive".into()));
    }
    let n = (t / step).ceil() as usize;
    let h = t / n as f64;
    let mut chart = Chart::new(g.clone());
    let mut q0 = chart.project(start);
    let mut s0 = 0.0;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let s = (k as f64 + 0.5) * h;
        let z = chart.point(q0 + (s - s0));
        let (zr, word) = reduce_point(&z)?;
        if word != Moebius::identity() {
            chart = Chart::new(chart.g.apply(&word)?);
            q0 = chart.project(&zr);
            s0 = s;
        }
        out.push(zr.y);
    }
    Ok(out)
}

/// Oracle estimate from equally spaced midpoint samples covering length `t`.
pub fn summarize_heights(heights: &[f64], d: f64, t: f64) -> OracleEstimate {
    let n = heights.len();
    let h = t / n as f64;
    let mut count = 0usize;
    let mut crossings = 0usize;
    let mut prev: Option<bool> = None;
    for &y in heights {
        let inside = y > d;
        if inside {
            count += 1;
        }
        if prev.is_some_and(|p| p != inside) {
            crossings += 1;
        }
        prev = Some(inside);
    }
    OracleEstimate { fraction: count as f64 / n as f64, error_bound: h * (crossings as f64 + 2.0) / t, samples: n, crossings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::expand_ab;

    fn geo(u: &str, w: &str) -> Geodesic {
        Geodesic::new(u.parse().unwrap(), w.parse().unwrap()).unwrap()
    }

    fn phi() -> f64 {
        (1.0 + 5f64.sqrt()) / 2.0
    }

    #[test]
    fn cross_section_examples() {
        let p = cross_section_point(&geo("-1/2", "2")).unwrap();
        assert!(p.x.abs() < 1e-15 && (p.y - 1.0).abs() < 1e-15);
        assert!(matches!(cross_section_point(&geo("-1", "1")), Err(GeoError::Degenerate(_))));
        let v = cross_section_point(&geo("0", "inf")).unwrap();
        assert_eq!((v.x, v.y), (0.0, 1.0));
        assert_eq!(cross_section_point(&geo("2", "3")), Err(GeoError::NoIntersection));
    }

    #[test]
    fn minus_one_one_reducedness() {
        let p = CfParams::minus_one_one();
        assert_eq!(is_reduced(&geo("-1/2", "2"), &p, None).unwrap(), Reducedness::Reduced);
        assert_eq!(is_reduced(&geo("-1/2", "1/2"), &p, None).unwrap(), Reducedness::NotReduced);
        assert_eq!(is_reduced(&geo("1/2", "-3"), &p, None).unwrap(), Reducedness::Reduced);
        assert_eq!(is_reduced(&geo("-1/2", "-3"), &p, None).unwrap(), Reducedness::NotReduced);
    }

    #[test]
    fn nearest_reducedness_uses_boundary() {
        let p = CfParams::nearest();
        let f = phi();
        let bx = BoundaryX { x_a_minus: f, x_a_plus: f * f, x_b_minus: -f * f, x_b_plus: -f, error: 1e-3 };
        // -1/x_a^- = -0.618
        assert_eq!(is_reduced(&geo("-1/2", "3"), &p, Some(&bx)).unwrap(), Reducedness::Reduced);
        assert_eq!(is_reduced(&geo("-7/10", "3"), &p, Some(&bx)).unwrap(), Reducedness::NotReduced);
        assert_eq!(is_reduced(&geo("-1/2", "3/2"), &p, Some(&bx)).unwrap(), Reducedness::NotReduced);
        assert_eq!(is_reduced(&geo("-309/500", "3"), &p, Some(&bx)).unwrap(), Reducedness::Indeterminate);
        assert!(matches!(is_reduced(&geo("-1/2", "3"), &p, None), Err(GeoError::Unavailable(_))));
    }

    #[test]
    fn reduction_examples() {
        let p = CfParams::minus_one_one();
        let g = Geodesic::new(Number::golden().recip().unwrap().neg(), Number::golden()).unwrap();
        let r = reduce_geodesic(&g, &p, None, 10).unwrap();
        assert_eq!(r.steps, 0);
        assert_eq!(r.word, Moebius::identity());
        let g2 = Geodesic::new(g.u.clone(), Number::golden().add_int(&BigInt::from(-1))).unwrap();
        let r2 = reduce_geodesic(&g2, &p, None, 10).unwrap();
        assert!(r2.steps >= 1);
        assert_eq!(r2.geodesic, g2.apply(&r2.word).unwrap());
        // 2/5 = [0, -2, 2]: with u = 1/3 the expansion runs out first
        assert_eq!(reduce_geodesic(&geo("-13/5", "2/5"), &p, None, 10).unwrap().steps, 1);
        let g3 = geo("1/3", "2/5");
        assert!(matches!(reduce_geodesic(&g3, &p, None, 10), Err(GeoError::ReductionFailed(_))));
    }

    #[test]
    fn reduce_point_examples() {
        let (z, w) = reduce_point(&UpperHalfPoint { x: 5.0, y: 1.0 }).unwrap();
        assert_eq!((z.x, z.y), (0.0, 1.0));
        assert_eq!(w, Moebius::t_pow(&BigInt::from(-5)));
        let (z, _) = reduce_point(&UpperHalfPoint { x: 0.0, y: 0.3 }).unwrap();
        assert!(z.x.abs() < 1e-15 && (z.y - 10.0 / 3.0).abs() < 1e-14);
        let (z, w) = reduce_point(&UpperHalfPoint::i()).unwrap();
        assert_eq!((z.x, z.y), (0.0, 1.0));
        assert_eq!(w, Moebius::identity());
    }

    #[test]
    fn time_above_examples() {
        let g = geo("-1/2", "2");
        let t = time_above(&g, 1.0, &Window::Unclipped).unwrap();
        assert!((t - 2.0 * 2f64.ln()).abs() < 1e-14);
        assert_eq!(time_above(&geo("-1", "1"), 1.0, &Window::Unclipped).unwrap(), 0.0);
        assert_eq!(time_above(&geo("0", "1"), 1.0, &Window::Unclipped).unwrap(), 0.0);
    }

    #[test]
    fn golden_axis_return_time() {
        let p = CfParams::minus_one_one();
        let w = Number::golden();
        let g = Geodesic::new(w.conjugate(), w).unwrap();
        let mut orbit = ReducedOrbit::new(g, &p, None, &[2.0]).unwrap();
        for _ in 0..20 {
            orbit.advance().unwrap();
        }
        for s in &orbit.steps {
            assert!((s.geometry.elapsed.to_f64() - 2.0 * phi().ln()).abs() < 1e-12);
            assert!(s.quotient.abs() == BigInt::from(1));
            assert_eq!(s.geometry.above[0].time.to_f64(), 0.0);
        }
    }

    #[test]
    fn window_length_matches_point_distance() {
        // entry on C and exit on a + C, measured with the point formula
        let g = geo("-2/7", "19/4");
        let a = BigInt::from(5);
        let geo_ = return_geometry(&frame_of(&g, &a).unwrap(), &[]).unwrap();
        let z1 = cross_section_point(&g).unwrap();
        let shifted = Geodesic::new(g.u.add_int(&-&a), g.w.add_int(&-&a)).unwrap();
        let mut z2 = cross_section_point(&shifted).unwrap();
        z2.x += 5.0;
        let d = crate::arith::hyperbolic_distance(&z1, &z2);
        assert!((geo_.elapsed.to_f64() - d).abs() < 1e-12);
        assert!((geo_.point.x - z1.x).abs() < 1e-14 && (geo_.point.y - z1.y).abs() < 1e-14);
    }

    #[test]
    fn huge_quotient_frame() {
        let l = ExtFloat::new(1e300) * ExtFloat::new(1e300);
        let f = Frame { a: Magnitude::from_ln(l, false), u: -0.3, delta: 0.2 };
        let g = return_geometry(&f, &[2.0]).unwrap();
        let expect = -0.5 * ((1.0 - 0.09) * (1.0 - 0.04f64)).ln();
        assert!((g.deviation - expect).abs() < 1e-15);
        assert!((g.above[0].gap - (expect + 2.0 * 2f64.ln())).abs() < 1e-12);
        assert!(g.elapsed > l);
    }

    #[test]
    fn threshold_examples() {
        let p = CfParams::nearest();
        let bx = BoundaryX { x_a_minus: 1.5, x_a_plus: 2.0, x_b_minus: -1.5, x_b_plus: -2.0, error: 0.0 };
        let t = excursion_thresholds(3.0, &p, &bx).unwrap();
        assert!((t.lower_pos - 29.0 / 6.0).abs() < 1e-14);
        assert!((t.upper_pos - 43.0 / 6.0).abs() < 1e-14);
        let t4 = excursion_thresholds(4.0, &p, &bx).unwrap();
        assert!((t4.lower_pos - t.lower_pos - 2.0).abs() < 1e-14);
        assert!(excursion_thresholds(3.0, &CfParams::minus_one_one(), &bx).is_err());
    }

    #[test]
    fn c_prime_is_arc_length() {
        let z = UpperHalfPoint { x: 0.5, y: 3f64.sqrt() / 2.0 };
        let d = crate::arith::hyperbolic_distance(&UpperHalfPoint::i(), &z);
        assert!((d - c_prime()).abs() < 1e-12);
    }

    #[test]
    fn bounds_all_ones() {
        let e = expand_ab(&Number::golden(), &CfParams::minus_one_one(), 10).unwrap();
        let (lo, hi) = return_time_bounds_minus11(&e, 4, 0.7, c_prime()).unwrap();
        assert!((lo + c_prime()).abs() < 1e-15 && (hi - 0.7).abs() < 1e-15);
        assert!(return_time_bounds_minus11(&e, 1, 0.7, c_prime()).is_err());
    }

    #[test]
    fn oracle_golden_below_two() {
        let w = Number::golden();
        let g = Geodesic::new(w.conjugate(), w).unwrap();
        let est = cusp_time_numeric(&g, 100.0, 2.0, 0.01).unwrap();
        assert_eq!(est.fraction, 0.0);
    }
}
