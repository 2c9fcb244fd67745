//! Cesaro averages of `ln|a_j|`, cusp frequency profiles along reduced
//! orbits, classification, and constructed test numbers.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{ln_big, Number};
use crate::cf::{convergents, exceeds, CfError, CfExpansion, CfParams, Convergent, Expander, Flavor};
use crate::ext::ExtFloat;
use crate::geodesic::{
    cross_section_point, excursion_thresholds, oracle_heights, reduce_geodesic_in, return_geometry, Region,
    ExcursionThresholds, Frame, GeoError, Geodesic, Magnitude, OracleEstimate, ReducedOrbit, ReturnGeometry,
    ThresholdVerdict,
};
use crate::natext::BoundaryX;

// ---------------------------------------------------------------------------
// Cesaro averages

fn ln_abs_or_zero(a: &BigInt) -> f64 {
    if a.is_zero() {
        0.0
    } else {
        ln_big(&a.abs())
    }
}

/// Index range of the average: `0..N` for ab expansions, `1..=N` for
/// classical ones. A zero quotient (only possible at index 0) counts as 0.
fn window(e: &CfExpansion, n: usize) -> Result<&[BigInt], CfError> {
    if n == 0 {
        return Err(CfError::InvalidParameter("N must be at least 1".into()));
    }
    let (lo, hi) = match e.flavor {
        Flavor::Ab => (0, n),
        Flavor::Classical => (1, n + 1),
    };
    if e.len() < hi {
        return Err(CfError::Insufficient { have: e.len(), need: hi });
    }
    Ok(&e.quotients[lo..hi])
}

/// `A_N = (1/N) sum ln|a_j|`.
pub fn cesaro_log(e: &CfExpansion, n: usize) -> Result<f64, CfError> {
    Ok(window(e, n)?.iter().map(ln_abs_or_zero).sum::<f64>() / n as f64)
}

/// `A_N^xi`: the same average over the modified quotients, where only
/// `|a_j| > xi` keep their value.
pub fn cesaro_log_modified(e: &CfExpansion, xi: f64, n: usize) -> Result<f64, CfError> {
    if !(xi > 1.0) {
        return Err(CfError::InvalidParameter(format!("xi = {xi} must exceed 1")));
    }
    let s: f64 = window(e, n)?.iter().filter(|a| exceeds(&a.abs(), xi)).map(ln_abs_or_zero).sum();
    Ok(s / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Convergent,
    Diverging,
    Oscillating,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KhintchinEstimate {
    pub points: Vec<(usize, f64)>,
    pub estimate: f64,
    pub trend: Trend,
}

/// Trend of a checkpoint sequence: convergent when the last change is below
/// `tol`, diverging when every change is an increase, oscillating otherwise.
pub fn trend(values: &[f64], tol: f64) -> Trend {
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    match diffs.last() {
        None => Trend::Convergent,
        Some(l) if l.abs() <= tol => Trend::Convergent,
        _ if diffs.iter().all(|d| *d > 0.0) => Trend::Diverging,
        _ => Trend::Oscillating,
    }
}

pub const TREND_TOL: f64 = 0.05;

/// `A_N` of a classical expansion along a schedule of `N`.
pub fn khintchin_exponent(e: &CfExpansion, schedule: &[usize]) -> Result<KhintchinEstimate, CfError> {
    if e.flavor != Flavor::Classical {
        return Err(CfError::InvalidParams("Khintchin exponent needs a classical expansion".into()));
    }
    if schedule.is_empty() {
        return Err(CfError::InvalidParameter("empty schedule".into()));
    }
    let points = schedule.iter().map(|&n| Ok((n, cesaro_log(e, n)?))).collect::<Result<Vec<_>, CfError>>()?;
    let values: Vec<f64> = points.iter().map(|p| p.1).collect();
    Ok(KhintchinEstimate { estimate: *values.last().expect("nonempty"), trend: trend(&values, TREND_TOL), points })
}

/// `N = 10 2^k` up to `n`, with `n` itself appended when it is not of that form.
pub fn geometric_checkpoints(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..).map(|k| 10usize << k).take_while(|&c| c <= n).collect();
    if out.last() != Some(&n) {
        out.push(n);
    }
    out
}

// ---------------------------------------------------------------------------
// constructed numbers

/// `eps = num/den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Exponent {
    pub num: u32,
    pub den: u32,
}

impl Exponent {
    pub fn new(num: u32, den: u32) -> Result<Exponent, CfError> {
        if num == 0 || den == 0 {
            return Err(CfError::InvalidParameter("epsilon must be a positive fraction".into()));
        }
        Ok(Exponent { num, den })
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `[q^eps]`, exact.
    fn floor_pow(&self, q: &BigInt) -> BigInt {
        q.pow(self.num).nth_root(self.den)
    }
}

impl std::str::FromStr for Exponent {
    type Err = CfError;
    fn from_str(s: &str) -> Result<Exponent, CfError> {
        let bad = || CfError::InvalidParameter(format!("epsilon `{s}` is not a positive fraction"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?),
            None => (s.trim().parse().map_err(|_| bad())?, 1),
        };
        Exponent::new(n, d)
    }
}

/// Largest `q_j` bit length the exact construction will produce.
pub const VWA_EXACT_BITS: u64 = 1 << 22;

/// Classical expansion `[a0; a1, a2, ...]` with `a_{j+1} = [q_j^eps] + 1`.
pub fn construct_vwa(eps: Exponent, a0: i64, a1: i64, n: usize) -> Result<CfExpansion, CfError> {
    if n < 2 {
        return Err(CfError::InvalidParameter("need at least two quotients".into()));
    }
    if a1 < 1 {
        return Err(CfError::InvalidParameter("a1 must be positive".into()));
    }
    let mut quotients = vec![BigInt::from(a0), BigInt::from(a1)];
    let (mut q_prev, mut q) = (BigInt::one(), BigInt::from(a1));
    while quotients.len() < n {
        if q.bits() * eps.num as u64 > VWA_EXACT_BITS {
            return Err(CfError::InvalidParameter(format!(
                "quotient {} exceeds the exact construction limit; use the magnitude path",
                quotients.len()
            )));
        }
        let a = eps.floor_pow(&q) + 1;
        let next = &a * &q + &q_prev;
        quotients.push(a);
        q_prev = std::mem::replace(&mut q, next);
    }
    Ok(CfExpansion::new(&CfParams::classical(), quotients, false))
}

/// Per-index outcome of the exact check `q_j^(2+eps) |x - p_j/q_j| < 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VwaCheck {
    pub convergents: Vec<Convergent>,
    /// Index `j` holds when the rational bound on `|x - p_j/q_j|` clears
    /// `q_j^-(2+eps)`.
    pub holds: Vec<bool>,
}

/// The bound for index `j` brackets `x` between the last two convergents of
/// `e`, so `e` should carry two more quotients than the indices checked.
pub fn check_vwa(e: &CfExpansion, eps: Exponent, upto: usize) -> Result<VwaCheck, CfError> {
    if e.flavor != Flavor::Classical || upto + 2 > e.len() {
        return Err(CfError::Insufficient { have: e.len(), need: upto + 2 });
    }
    let conv = convergents(e, e.len())?;
    let (pk, qk) = (&conv[e.len() - 1].p, &conv[e.len() - 1].q);
    let (pk1, qk1) = (&conv[e.len() - 2].p, &conv[e.len() - 2].q);
    let mut holds = Vec::with_capacity(upto);
    let (m, n) = (eps.den, eps.num);
    for c in conv.iter().take(upto) {
        // |x - p/q| <= max(|pk/qk - p/q|, |pk1/qk1 - p/q|) = num/(q qq)
        let d1 = (pk * &c.q - &c.p * qk).abs();
        let d2 = (pk1 * &c.q - &c.p * qk1).abs();
        let (num, qq) = if &d1 * qk1 >= &d2 * qk { (d1, qk.clone()) } else { (d2, qk1.clone()) };
        // (num/(q qq))^m q^(2m+n) < 1  <=>  num^m q^(m+n) < qq^m
        let lhs = num.pow(m) * c.q.pow(m + n);
        holds.push(lhs < qq.pow(m));
    }
    Ok(VwaCheck { convergents: conv.into_iter().take(upto).collect(), holds })
}

/// Quotients of the constructed number by magnitude: exact while `q_j` has
/// at most 4096 bits, then through `ln q_{j+1} = ln a_{j+1} + ln q_j + ln(1 + q_{j-1}/(a_{j+1} q_j))`
/// and `ln a_{j+1} = eps ln q_j + ln(1 + q_j^-eps)`, where the floor no
/// longer matters at `f64` precision.
pub fn vwa_magnitudes(eps: Exponent, a0: i64, a1: i64, n: usize) -> Result<Vec<Quotient>, CfError> {
    let mut out: Vec<Quotient> = Vec::with_capacity(n);
    let mut k = 2;
    loop {
        let e = construct_vwa(eps, a0, a1, k.max(2))?;
        let conv = convergents(&e, e.len())?;
        if k >= n || conv.last().expect("nonempty").q.bits() > 4096 {
            out.extend(e.quotients.iter().take(n).cloned().map(Quotient::Exact));
            if out.len() >= n {
                return Ok(out);
            }
            let l = |v: &BigInt| ExtFloat::new(ln_big(v));
            let mut lq_prev = l(&conv[conv.len() - 2].q);
            let mut lq = l(&conv[conv.len() - 1].q);
            let ev = eps.value();
            while out.len() < n {
                let la = lq.mul_f64(ev) + (-(lq.mul_f64(ev)).to_f64()).exp().ln_1p();
                let tail = (lq_prev - lq - la).to_f64().exp().ln_1p();
                out.push(Quotient::Magnitude(Magnitude::from_ln(la, false)));
                let next = la + lq + tail;
                lq_prev = std::mem::replace(&mut lq, next);
            }
            return Ok(out);
        }
        k += 1;
    }
}

// ---------------------------------------------------------------------------
// profiles

/// A partial quotient, exact when available.
#[derive(Debug, Clone, PartialEq)]
pub enum Quotient {
    Exact(BigInt),
    Magnitude(Magnitude),
}

impl Quotient {
    pub fn magnitude(&self) -> Magnitude {
        match self {
            Quotient::Exact(a) => Magnitude::from_bigint(a),
            Quotient::Magnitude(m) => *m,
        }
    }

    /// `ln|a|`, `0` for `a = 0`.
    pub fn ln_abs(&self) -> ExtFloat {
        match self {
            Quotient::Exact(a) => ExtFloat::new(ln_abs_or_zero(a)),
            Quotient::Magnitude(m) => m.ln_abs,
        }
    }

    pub fn abs_exceeds(&self, xi: f64) -> bool {
        match self {
            Quotient::Exact(a) => exceeds(&a.abs(), xi),
            Quotient::Magnitude(m) => m.ln_abs.to_f64() > xi.ln(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Quotient::Exact(a) => match a.to_i64() {
                Some(v) => v.into(),
                None => a.to_string().into(),
            },
            Quotient::Magnitude(m) => {
                let sign = if m.negative { "-" } else { "" };
                format!("{sign}exp({})", m.ln_abs).into()
            }
        }
    }
}

impl Serialize for Quotient {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileConfig {
    pub returns: usize,
    pub d_list: Vec<f64>,
    pub xi_list: Vec<f64>,
    pub checkpoints: Vec<usize>,
    /// Also run the fundamental-domain oracle with this step.
    pub oracle_step: Option<f64>,
    pub tol: f64,
    pub reduction_cap: usize,
}

impl ProfileConfig {
    pub fn new(returns: usize, d_list: &[f64], xi_list: &[f64]) -> ProfileConfig {
        ProfileConfig {
            returns,
            d_list: d_list.to_vec(),
            xi_list: xi_list.to_vec(),
            checkpoints: geometric_checkpoints(returns),
            oracle_step: None,
            tol: TREND_TOL,
            reduction_cap: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checkpoint {
    pub n: usize,
    pub a_n: ExtFloat,
    pub a_n_xi: Vec<ExtFloat>,
    /// Total signed arc length over the first `n` returns.
    pub s_n: ExtFloat,
    pub i_n: Vec<f64>,
    /// `1 - I_N^d`, kept separately so it survives when `I_N^d` rounds to 1.
    pub i_n_complement: Vec<ExtFloat>,
    /// `#{j < n : a_j > lower_pos or a_j < -lower_neg}` per `d`.
    pub j_lower: Option<Vec<usize>>,
    pub j_upper: Option<Vec<usize>>,
    pub oracle: Option<Vec<OracleEstimate>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileStatus {
    Complete,
    /// The attracting endpoint is rational: the orbit ends in the cusp after
    /// `returns` returns.
    DegenerateRational { returns: usize },
    /// A domain error stopped the run; the checkpoints before it are kept.
    Partial { error: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Tag {
    #[serde(rename = "frequency-0")]
    Frequency0,
    #[serde(rename = "frequency-1")]
    Frequency1,
    #[serde(rename = "intermediate")]
    Intermediate,
    #[serde(rename = "undetermined")]
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub tag: Tag,
    pub witness_xi: Option<f64>,
    pub witness_d: Option<f64>,
    pub evidence: String,
    /// Frequency 1 is a statement about every `d`; only these were sampled.
    pub d_sampled: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyProfile {
    pub x: String,
    pub a: String,
    pub b: String,
    pub repelling: String,
    pub reduction_steps: usize,
    pub returns: usize,
    pub d_list: Vec<f64>,
    pub xi_list: Vec<f64>,
    pub thresholds: Option<Vec<ExcursionThresholds>>,
    pub checkpoints: Vec<Checkpoint>,
    pub status: ProfileStatus,
    pub min_cross_height: f64,
    pub max_cross_height: f64,
    pub max_deviation: f64,
    pub classification: Classification,
}

/// One completed return as seen by the profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnData {
    pub quotient: Quotient,
    pub geometry: ReturnGeometry,
}

/// Repelling endpoint paired with an attracting endpoint `w`: the conjugate
/// for quadratic surds, `w - 3` otherwise.
pub fn repelling_endpoint(w: &Number) -> Number {
    match w {
        Number::Surd(_) => w.conjugate(),
        _ => w.add_int(&BigInt::from(-3)),
    }
}

/// Reduced lift of the geodesic ending at `x` and its first `n` returns.
pub struct ExactRun {
    pub start: Geodesic,
    pub reduction_steps: usize,
    pub returns: Vec<ReturnData>,
    pub reducedness: Vec<crate::geodesic::Reducedness>,
    pub status: ProfileStatus,
}

pub fn run_exact(x: &Number, params: &CfParams, region: &Region, n: usize, d_list: &[f64], cap: usize) -> Result<ExactRun, GeoError> {
    let g = Geodesic::new(repelling_endpoint(x), x.clone())?;
    let red = match reduce_geodesic_in(&g, params, region, cap) {
        // the expansion of a rational can run out before any lift is reduced
        Err(GeoError::ReductionFailed(k)) if x.is_rational() && k <= cap => {
            return Ok(ExactRun {
                start: g,
                reduction_steps: k - 1,
                returns: vec![],
                reducedness: vec![],
                status: ProfileStatus::DegenerateRational { returns: 0 },
            });
        }
        r => r?,
    };
    let mut orbit = ReducedOrbit::in_region(red.geodesic.clone(), params, region.clone(), d_list)?;
    let mut status = ProfileStatus::Complete;
    while orbit.index() < n {
        match orbit.advance() {
            Ok(true) => {}
            Ok(false) => {
                status = ProfileStatus::DegenerateRational { returns: orbit.index() };
                break;
            }
            Err(e) => {
                status = ProfileStatus::Partial { error: e.to_string() };
                break;
            }
        }
    }
    let reducedness = orbit.steps.iter().map(|s| s.reducedness).collect();
    let returns = orbit
        .steps
        .into_iter()
        .map(|s| ReturnData { quotient: Quotient::Exact(s.quotient), geometry: s.geometry })
        .collect();
    Ok(ExactRun { start: red.geodesic, reduction_steps: red.steps, returns, reducedness, status })
}

fn frac(num: ExtFloat, den: ExtFloat) -> ExtFloat {
    if den.is_zero() {
        ExtFloat::ZERO
    } else {
        num / den
    }
}

/// Accumulates checkpoint quantities from expansion quotients (for `A_N`)
/// and returns (for everything else).
#[allow(clippy::too_many_arguments)]
fn assemble(
    x: String,
    params: &CfParams,
    repelling: String,
    reduction_steps: usize,
    expansion: &[Quotient],
    returns: &[ReturnData],
    status: ProfileStatus,
    cfg: &ProfileConfig,
    thresholds: Option<Vec<ExcursionThresholds>>,
    oracle: Option<Vec<Vec<OracleEstimate>>>,
) -> FrequencyProfile {
    let nd = cfg.d_list.len();
    let mut checkpoints = Vec::new();
    let mut sum_ln = ExtFloat::ZERO;
    let mut sum_xi = vec![ExtFloat::ZERO; cfg.xi_list.len()];
    let mut s = ExtFloat::ZERO;
    let mut h = vec![ExtFloat::ZERO; nd];
    let mut gap = vec![0.0f64; nd];
    let mut j_lo = vec![0usize; nd];
    let mut j_hi = vec![0usize; nd];
    let usable = returns.len().min(expansion.len());
    let mut marks = cfg.checkpoints.iter().filter(|&&c| c >= 1 && c <= usable).peekable();
    let mut ci = 0;
    for j in 0..usable {
        let q = &expansion[j];
        let ln = q.ln_abs();
        sum_ln = sum_ln + ln;
        for (k, &xi) in cfg.xi_list.iter().enumerate() {
            if q.abs_exceeds(xi) {
                sum_xi[k] = sum_xi[k] + ln;
            }
        }
        let r = &returns[j];
        s = s + r.geometry.elapsed;
        for k in 0..nd {
            h[k] = h[k] + r.geometry.above[k].cusp;
            gap[k] += r.geometry.above[k].gap;
        }
        if let Some(th) = &thresholds {
            let m = r.quotient.magnitude();
            for k in 0..nd {
                match th[k].verdict_counts(&m) {
                    (true, true) => {
                        j_lo[k] += 1;
                        j_hi[k] += 1;
                    }
                    (true, false) => j_lo[k] += 1,
                    _ => {}
                }
            }
        }
        if marks.peek() == Some(&&(j + 1)) {
            marks.next();
            let nn = ExtFloat::new((j + 1) as f64);
            checkpoints.push(Checkpoint {
                n: j + 1,
                a_n: sum_ln / nn,
                a_n_xi: sum_xi.iter().map(|v| *v / nn).collect(),
                s_n: s,
                i_n: h.iter().map(|v| frac(*v, s).to_f64()).collect(),
                i_n_complement: gap.iter().map(|g| frac(ExtFloat::new(*g), s)).collect(),
                j_lower: thresholds.as_ref().map(|_| j_lo.clone()),
                j_upper: thresholds.as_ref().map(|_| j_hi.clone()),
                oracle: oracle.as_ref().and_then(|o| o.get(ci).cloned()),
            });
            ci += 1;
        }
    }
    let heights = returns.iter().map(|r| r.geometry.point.y);
    let min_h = heights.clone().fold(f64::INFINITY, f64::min);
    let max_h = heights.fold(0.0, f64::max);
    let max_dev = returns.iter().map(|r| r.geometry.deviation.abs()).fold(0.0, f64::max);
    let mut p = FrequencyProfile {
        x,
        a: params.a.to_string(),
        b: params.b.to_string(),
        repelling,
        reduction_steps,
        returns: returns.len(),
        d_list: cfg.d_list.clone(),
        xi_list: cfg.xi_list.clone(),
        thresholds,
        checkpoints,
        status,
        min_cross_height: min_h,
        max_cross_height: max_h,
        max_deviation: max_dev,
        classification: Classification {
            tag: Tag::Undetermined,
            witness_xi: None,
            witness_d: None,
            evidence: String::new(),
            d_sampled: cfg.d_list.clone(),
        },
    };
    p.classification = classify(&p, cfg.tol);
    p
}

impl ExcursionThresholds {
    /// `(exceeds lower, exceeds upper)` for the counts: `a > lower_pos` or
    /// `a < -lower_neg`, and likewise for the upper pair.
    fn verdict_counts(&self, a: &Magnitude) -> (bool, bool) {
        let v = a.ln_abs.to_f64().exp();
        let (lo, hi) = if a.negative { (self.lower_neg, self.upper_neg) } else { (self.lower_pos, self.upper_pos) };
        (v > lo, v > hi)
    }
}

/// Profile of the geodesic ending at `x`. For `(a,b) != (-1,1)` the boundary
/// coordinates are required.
pub fn frequency_profile(x: &Number, params: &CfParams, bx: Option<&BoundaryX>, cfg: &ProfileConfig) -> Result<FrequencyProfile, GeoError> {
    frequency_profile_in(x, params, &Region::for_params(params, bx)?, cfg)
}

/// As `frequency_profile`, reducing against an explicit region.
pub fn frequency_profile_in(x: &Number, params: &CfParams, region: &Region, cfg: &ProfileConfig) -> Result<FrequencyProfile, GeoError> {
    if params.flavor != Flavor::Ab {
        return Err(GeoError::Invalid("profiles run on (a,b) parameters".into()));
    }
    let thresholds = match (params.is_minus_one_one(), region.boundary_x()) {
        (true, _) => None,
        (false, Some(bx)) => Some(cfg.d_list.iter().map(|&d| excursion_thresholds(d, params, bx)).collect::<Result<Vec<_>, _>>()?),
        (false, None) => return Err(GeoError::Unavailable("boundary coordinates needed for this parameter pair".into())),
    };
    let run = run_exact(x, params, region, cfg.returns, &cfg.d_list, cfg.reduction_cap)?;
    let expansion: Vec<Quotient> =
        Expander::new(x.clone(), params)?.take(run.returns.len()).map(|d| Quotient::Exact(d.quotient)).collect();
    let oracle = match cfg.oracle_step {
        Some(step) if !run.returns.is_empty() => Some(oracle_at_checkpoints(&run, &cfg.checkpoints, &cfg.d_list, step)?),
        _ => None,
    };
    Ok(assemble(
        x.to_string(),
        params,
        repelling_endpoint(x).to_string(),
        run.reduction_steps,
        &expansion,
        &run.returns,
        run.status.clone(),
        cfg,
        thresholds,
        oracle,
    ))
}

/// Oracle fractions over `[0, S_N]` for each checkpoint, from one walk.
pub fn oracle_at_checkpoints(run: &ExactRun, checkpoints: &[usize], d_list: &[f64], step: f64) -> Result<Vec<Vec<OracleEstimate>>, GeoError> {
    let mut marks = Vec::new();
    let mut s = ExtFloat::ZERO;
    let mut next = checkpoints.iter().filter(|&&c| c >= 1 && c <= run.returns.len()).peekable();
    for (j, r) in run.returns.iter().enumerate() {
        s = s + r.geometry.elapsed;
        if next.peek() == Some(&&(j + 1)) {
            next.next();
            marks.push(s.to_f64());
        }
    }
    let Some(&total) = marks.last() else {
        return Ok(vec![]);
    };
    if !(total > 0.0) || !total.is_finite() {
        return Err(GeoError::Invalid("oracle needs a positive finite elapsed time".into()));
    }
    let start = cross_section_point(&run.start)?;
    let heights = oracle_heights(&run.start, &start, total, step)?;
    let h = total / heights.len() as f64;
    Ok(marks
        .iter()
        .map(|&t| {
            let n = ((t / h).round() as usize).clamp(1, heights.len());
            d_list.iter().map(|&d| crate::geodesic::summarize_heights(&heights[..n], d, n as f64 * h)).collect()
        })
        .collect())
}

/// Profile of the (-1,1) coding of the constructed number `[a0; a1, ...]`
/// (`a0 >= 0`), computed from quotient magnitudes: the frames use `f64`
/// tails `X_j = c_j + 1/X_{j+1}` and `u_{j+1} = -1/(u_j - a_j)`, starting from
/// `u_0 = x - 3`.
pub fn frequency_profile_vwa(eps: Exponent, a0: i64, a1: i64, cfg: &ProfileConfig) -> Result<FrequencyProfile, GeoError> {
    if a0 < 0 {
        return Err(GeoError::Invalid("the magnitude path needs a0 >= 0".into()));
    }
    let total = cfg.returns + 64;
    let classical = vwa_magnitudes(eps, a0, a1, total)?;
    let cf: Vec<f64> = classical.iter().map(|q| q.magnitude().ln_abs.to_f64().exp()).collect();
    let cf: Vec<f64> = cf.iter().zip(&classical).map(|(v, q)| if matches!(q, Quotient::Exact(a) if a.is_zero()) { 0.0 } else { *v }).collect();
    // classical tails
    let mut tail = vec![f64::INFINITY; total + 1];
    for j in (0..total).rev() {
        tail[j] = cf[j] + 1.0 / tail[j + 1];
    }
    let sign = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
    let mut u = tail[0] - 3.0;
    let mut reduced_from = None;
    let mut returns = Vec::new();
    let p = CfParams::minus_one_one();
    let d_list = &cfg.d_list;
    for j in 0..total - 2 {
        let w = sign(j) * tail[j];
        let b = sign(j) * cf[j];
        if reduced_from.is_none() && w.abs() > 1.0 && -1.0 < w.signum() * u && w.signum() * u < 0.0 {
            reduced_from = Some(j);
        }
        if reduced_from.is_some() {
            if returns.len() >= cfg.returns {
                break;
            }
            let mut m = classical[j].magnitude();
            m.negative = j % 2 == 1;
            let frame = Frame { a: m, u, delta: sign(j) / tail[j + 1] };
            let geometry = return_geometry(&frame, d_list)?;
            let q = match &classical[j] {
                Quotient::Exact(a) => Quotient::Exact(if j % 2 == 1 { -a } else { a.clone() }),
                Quotient::Magnitude(_) => Quotient::Magnitude(m),
            };
            returns.push(ReturnData { quotient: q, geometry });
        }
        u = -1.0 / (u - b);
    }
    let start = reduced_from.ok_or(GeoError::ReductionFailed(total))?;
    // (-1,1) digits of x are the alternated classical ones; A_N runs over
    // the expansion from index 0
    let expansion: Vec<Quotient> = classical
        .iter()
        .enumerate()
        .map(|(j, q)| match q {
            Quotient::Exact(a) => Quotient::Exact(if j % 2 == 1 { -a } else { a.clone() }),
            Quotient::Magnitude(m) => Quotient::Magnitude(Magnitude { negative: j % 2 == 1, ..*m }),
        })
        .collect();
    let status = if returns.len() < cfg.returns {
        ProfileStatus::Partial { error: "magnitude tail exhausted".into() }
    } else {
        ProfileStatus::Complete
    };
    Ok(assemble(
        format!("vwa(eps={}/{}, a0={a0}, a1={a1})", eps.num, eps.den),
        &p,
        "x - 3".into(),
        start,
        &expansion,
        &returns,
        status,
        cfg,
        None,
        None,
    ))
}

/// One line of the per-return simulation output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcursionRecord {
    pub index: usize,
    pub quotient: Quotient,
    /// Euclidean radius of the lift; `None` when it overflows `f64`.
    pub apex: Option<f64>,
    pub ln_apex: ExtFloat,
    pub return_time: ExtFloat,
    pub elapsed: ExtFloat,
    pub cross_section: crate::arith::UpperHalfPoint,
    pub time_above: Vec<crate::geodesic::TimeAbove>,
    pub verdict: Option<Vec<ThresholdVerdict>>,
}

impl ExcursionRecord {
    pub fn new(index: usize, r: &ReturnData, thresholds: Option<&[ExcursionThresholds]>) -> ExcursionRecord {
        let apex = r.geometry.apex();
        let m = r.quotient.magnitude();
        ExcursionRecord {
            index,
            quotient: r.quotient.clone(),
            apex: apex.is_finite().then_some(apex),
            ln_apex: r.geometry.ln_apex,
            return_time: r.geometry.return_time(),
            elapsed: r.geometry.elapsed,
            cross_section: r.geometry.point,
            time_above: r.geometry.above.clone(),
            verdict: thresholds.map(|th| th.iter().map(|t| t.verdict(&m)).collect()),
        }
    }
}

/// Tag from classical quotient averages alone (indices `1..=N`): frequency-0
/// when some `A_N^xi` ends below `tol` without increasing, frequency-1 when
/// `A_N` increases at every checkpoint by at least `tol` at the end.
pub fn classify_classical(e: &CfExpansion, checkpoints: &[usize], xi_list: &[f64], tol: f64) -> Result<Classification, CfError> {
    let mut c = Classification { tag: Tag::Undetermined, witness_xi: None, witness_d: None, evidence: String::new(), d_sampled: vec![] };
    if checkpoints.len() < 3 {
        c.evidence = format!("{} checkpoints, at least 3 needed", checkpoints.len());
        return Ok(c);
    }
    let k = checkpoints.len();
    for &xi in xi_list {
        let (last, prev) = (cesaro_log_modified(e, xi, checkpoints[k - 1])?, cesaro_log_modified(e, xi, checkpoints[k - 2])?);
        if last < tol && last <= prev {
            c.tag = Tag::Frequency0;
            c.witness_xi = Some(xi);
            c.evidence = format!("A_N^xi = {last} at N = {} for xi = {xi}", checkpoints[k - 1]);
            return Ok(c);
        }
    }
    let a = checkpoints.iter().map(|&n| cesaro_log(e, n)).collect::<Result<Vec<_>, _>>()?;
    if a.windows(2).all(|w| w[1] > w[0]) && a[k - 1] - a[k - 2] >= tol {
        c.tag = Tag::Frequency1;
        c.evidence = format!("A_N increasing at every checkpoint, {} at N = {}", a[k - 1], checkpoints[k - 1]);
        return Ok(c);
    }
    c.evidence = "no trend test passed".into();
    Ok(c)
}

// ---------------------------------------------------------------------------
// classification

fn strictly_increasing(v: &[ExtFloat]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

/// Tags a profile from its checkpoints:
/// frequency-0 when some `A_N^xi` ends below `tol` without increasing at the
/// last checkpoint; frequency-1 when `A_N` increases at every checkpoint and
/// its last increase is at least `tol`; intermediate when some `I_N^d` has
/// settled (last change below `tol`) strictly inside `(tol, 1 - tol)`.
pub fn classify(p: &FrequencyProfile, tol: f64) -> Classification {
    let mut c = Classification { tag: Tag::Undetermined, witness_xi: None, witness_d: None, evidence: String::new(), d_sampled: p.d_list.clone() };
    let cp = &p.checkpoints;
    if cp.len() < 3 {
        c.evidence = format!("{} checkpoints, at least 3 needed", cp.len());
        return c;
    }
    let (last, prev) = (&cp[cp.len() - 1], &cp[cp.len() - 2]);
    let tol_e = ExtFloat::new(tol);
    for (k, &xi) in p.xi_list.iter().enumerate() {
        if last.a_n_xi[k] < tol_e && last.a_n_xi[k] <= prev.a_n_xi[k] {
            c.tag = Tag::Frequency0;
            c.witness_xi = Some(xi);
            c.evidence = format!("A_N^xi = {} at N = {} for xi = {xi}", last.a_n_xi[k], last.n);
            return c;
        }
    }
    let a: Vec<ExtFloat> = cp.iter().map(|x| x.a_n).collect();
    if strictly_increasing(&a) && last.a_n - prev.a_n >= tol_e {
        c.tag = Tag::Frequency1;
        c.evidence = format!("A_N increasing at every checkpoint, {} at N = {}", last.a_n, last.n);
        return c;
    }
    for (k, &d) in p.d_list.iter().enumerate() {
        let (x, y) = (last.i_n[k], prev.i_n[k]);
        if (x - y).abs() < tol && x > tol && x < 1.0 - tol {
            c.tag = Tag::Intermediate;
            c.witness_d = Some(d);
            c.evidence = format!("I_N^d settled at {x} for d = {d}");
            return c;
        }
    }
    c.evidence = "no trend test passed".into();
    c
}
