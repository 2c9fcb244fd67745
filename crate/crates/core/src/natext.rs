//! The interval map `f_{a,b}`, its planar natural extension `F_{a,b}`, seed-orbit
//! cycles, level sets, and a numeric picture of the attractor.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use crate::arith::{ArithError, Moebius, Number};
use crate::cf::{CfError, CfParams, Flavor};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NatError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Cf(#[from] CfError),
    #[error("point lies on the diagonal")]
    Diagonal,
    #[error("exact (rational or surd) parameters required")]
    InexactParams,
    #[error("finiteness verdict undetermined")]
    Undetermined,
    #[error("boundary extraction failed: {0}")]
    ExtractionFailed(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// Which generator `f_{a,b}` applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `x + 1`, taken for `x < a`.
    Plus,
    /// `-1/x`, taken on `[a, b)`.
    Invert,
    /// `x - 1`, taken for `x >= b`.
    Minus,
}

impl Branch {
    pub fn moebius(self) -> Moebius {
        match self {
            Branch::Plus => Moebius::t(),
            Branch::Invert => Moebius::s(),
            Branch::Minus => Moebius::t().inverse(),
        }
    }
}

fn check_ab(params: &CfParams) -> Result<(), NatError> {
    if params.flavor != Flavor::Ab {
        return Err(NatError::Invalid("ab parameters required".into()));
    }
    Ok(())
}

pub fn branch(x: &Number, params: &CfParams) -> Result<Branch, NatError> {
    if x.is_infinite() {
        return Ok(Branch::Minus);
    }
    Ok(if x.compare(&params.a)? == Ordering::Less {
        Branch::Plus
    } else if x.compare(&params.b)? == Ordering::Less {
        Branch::Invert
    } else {
        Branch::Minus
    })
}

/// One step of `f_{a,b}`. `f(0) = infinity`, and infinity is fixed.
pub fn f_ab_step(x: &Number, params: &CfParams) -> Result<Number, NatError> {
    check_ab(params)?;
    Ok(branch(x, params)?.moebius().apply(x)?)
}

/// One step of `F_{a,b}`: the branch is read off `x`, both coordinates move.
pub fn big_f_ab_step(pt: &(Number, Number), params: &CfParams) -> Result<(Number, Number), NatError> {
    check_ab(params)?;
    let (x, y) = pt;
    let same = match (x.is_infinite(), y.is_infinite()) {
        (true, true) => true,
        (false, false) => x.compare(y)? == Ordering::Equal,
        _ => false,
    };
    if same {
        return Err(NatError::Diagonal);
    }
    let g = branch(x, params)?.moebius();
    Ok((g.apply(x)?, g.apply(y)?))
}

/// Iterates `f_{a,b}` until the middle branch fires, returning the value right
/// after the inversion. This is the step `x_j -> x_{j+1}` of the expansion.
pub fn first_return(x: &Number, params: &CfParams) -> Result<Number, NatError> {
    check_ab(params)?;
    let mut y = x.clone();
    loop {
        if y.is_infinite() {
            return Ok(y);
        }
        let br = branch(&y, params)?;
        y = br.moebius().apply(&y)?;
        if br == Branch::Invert {
            return Ok(y);
        }
    }
}

// ---------------------------------------------------------------------------
// seed orbits and cycles

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeedLabel {
    #[serde(rename = "Sa")]
    Sa,
    #[serde(rename = "Ta")]
    Ta,
    #[serde(rename = "T^-1b")]
    TinvB,
    #[serde(rename = "Sb")]
    Sb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitOutcome {
    EventuallyPeriodic,
    CycleMet,
    CapReached,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub seed: SeedLabel,
    pub orbit: Vec<Number>,
    /// `branches[i]` takes `orbit[i]` to `orbit[i+1]`.
    pub branches: Vec<Branch>,
    pub outcome: OrbitOutcome,
    pub preperiod: Option<usize>,
    pub period: Option<usize>,
    pub meeting: Option<Number>,
}

impl OrbitReport {
    fn complete(&self) -> bool {
        self.period.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleProperty {
    None,
    Strong,
    Weak,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointCycle {
    pub property: CycleProperty,
    /// The cycle end `c`.
    pub end: Option<Number>,
    /// Steps taken along the upper orbit (`Sa`, resp. `T^-1 b`).
    pub m: Option<usize>,
    /// Steps taken along the lower orbit (`Ta`, resp. `Sb`).
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleReport {
    pub a: Number,
    pub b: Number,
    pub cap: usize,
    pub endpoint_a: EndpointCycle,
    pub endpoint_b: EndpointCycle,
    pub finiteness: Verdict,
    /// Orbits of `Sa`, `Ta`, `T^-1 b`, `Sb`, in that order.
    pub orbits: Vec<OrbitReport>,
}

fn seed_orbit(seed: SeedLabel, start: Number, params: &CfParams, cap: usize) -> Result<OrbitReport, NatError> {
    let mut orbit = vec![start.clone()];
    let mut branches = Vec::new();
    let mut seen: HashMap<Number, usize> = HashMap::new();
    seen.insert(start, 0);
    let (mut preperiod, mut period) = (None, None);
    while branches.len() < cap {
        let x = orbit.last().expect("nonempty");
        let br = branch(x, params)?;
        let y = br.moebius().apply(x)?;
        branches.push(br);
        if let Some(&i) = seen.get(&y) {
            preperiod = Some(i);
            period = Some(orbit.len() - i);
            break;
        }
        seen.insert(y.clone(), orbit.len());
        orbit.push(y);
    }
    let outcome = if period.is_some() { OrbitOutcome::EventuallyPeriodic } else { OrbitOutcome::CapReached };
    Ok(OrbitReport { seed, orbit, branches, outcome, preperiod, period, meeting: None })
}

/// Word `g_{n-1} ... g_0 * first`.
fn word(first: Moebius, branches: &[Branch]) -> Moebius {
    branches.iter().fold(first, |acc, br| br.moebius().compose(&acc))
}

fn meet(upper: &mut OrbitReport, lower: &mut OrbitReport, first_u: Moebius, first_l: Moebius, cap: usize) -> EndpointCycle {
    // once both orbits are fully known the search is cap-free; otherwise only
    // pairs whose index sum is within the cap count, so a larger cap cannot
    // change an answer that was already found
    let bound = if upper.complete() && lower.complete() { usize::MAX } else { cap };
    let index: HashMap<&Number, usize> = lower.orbit.iter().enumerate().map(|(k, v)| (v, k)).collect();
    let mut best: Option<(usize, usize)> = None;
    for (m, v) in upper.orbit.iter().enumerate() {
        if let Some(&k) = index.get(v) {
            let s = m + k;
            if s <= bound && best.map_or(true, |(bm, bk)| s < bm + bk) {
                best = Some((m, k));
            }
        }
    }
    match best {
        Some((m, k)) => {
            let c = upper.orbit[m].clone();
            let wu = word(first_u, &upper.branches[..m]);
            let wl = word(first_l, &lower.branches[..k]);
            let property = if wu.projectively_eq(&wl) { CycleProperty::Strong } else { CycleProperty::Weak };
            for o in [&mut *upper, &mut *lower] {
                o.outcome = OrbitOutcome::CycleMet;
                o.meeting = Some(c.clone());
            }
            EndpointCycle { property, end: Some(c), m: Some(m), k: Some(k) }
        }
        None => {
            let property =
                if upper.complete() && lower.complete() { CycleProperty::None } else { CycleProperty::Undetermined };
            EndpointCycle { property, end: None, m: None, k: None }
        }
    }
}

/// Runs the four seed orbits `Sa`, `Ta`, `T^-1 b`, `Sb` exactly for at most
/// `cap` steps each and classifies each endpoint.
pub fn detect_cycles(params: &CfParams, cap: usize) -> Result<CycleReport, NatError> {
    check_ab(params)?;
    if !params.a.is_exact() || !params.b.is_exact() {
        return Err(NatError::InexactParams);
    }
    if cap == 0 {
        return Err(NatError::Invalid("cap must be at least 1".into()));
    }
    let (a, b) = (&params.a, &params.b);
    let s = Moebius::s();
    let t = Moebius::t();
    let tinv = t.inverse();
    let mut sa = seed_orbit(SeedLabel::Sa, s.apply(a)?, params, cap)?;
    let mut ta = seed_orbit(SeedLabel::Ta, t.apply(a)?, params, cap)?;
    let mut tb = seed_orbit(SeedLabel::TinvB, tinv.apply(b)?, params, cap)?;
    let mut sb = seed_orbit(SeedLabel::Sb, s.apply(b)?, params, cap)?;
    let endpoint_a = meet(&mut sa, &mut ta, s.clone(), t, cap);
    let endpoint_b = meet(&mut tb, &mut sb, tinv, s, cap);
    let finiteness = if endpoint_a.property == CycleProperty::Undetermined
        || endpoint_b.property == CycleProperty::Undetermined
    {
        Verdict::Undetermined
    } else {
        Verdict::Holds
    };
    Ok(CycleReport {
        a: a.clone(),
        b: b.clone(),
        cap,
        endpoint_a,
        endpoint_b,
        finiteness,
        orbits: vec![sa, ta, tb, sb],
    })
}

// ---------------------------------------------------------------------------
// level sets

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSets {
    pub l_a: Vec<Number>,
    pub u_a: Vec<Number>,
    pub l_b: Vec<Number>,
    pub u_b: Vec<Number>,
    pub l_ab: Vec<Number>,
    pub u_ab: Vec<Number>,
}

fn sorted_set(vals: impl IntoIterator<Item = Number>) -> Vec<Number> {
    let set: HashSet<Number> = vals.into_iter().filter(|v| !v.is_infinite()).collect();
    let mut v: Vec<Number> = set.into_iter().collect();
    // exact values, so comparison is always decidable
    v.sort_by(|x, y| x.compare(y).expect("exact comparison"));
    v
}

fn sides(c: &EndpointCycle, upper: &OrbitReport, lower: &OrbitReport) -> (Vec<Number>, Vec<Number>) {
    match (c.property, c.m, c.k) {
        (CycleProperty::None, _, _) => (lower.orbit.clone(), upper.orbit.clone()),
        (p, Some(m), Some(k)) => {
            let mut l = lower.orbit[..k].to_vec();
            let mut u = upper.orbit[..m].to_vec();
            if p == CycleProperty::Weak {
                l.push(Number::zero());
                u.push(Number::zero());
            }
            (l, u)
        }
        _ => (Vec::new(), Vec::new()),
    }
}

/// `L_{a,b}` and `U_{a,b}` from the seed orbits: whole orbits when there is no
/// cycle, the lower/upper side of the cycle (end excluded) when there is one, with
/// `0` adjoined for a weak cycle.
pub fn boundary_sets(report: &CycleReport) -> Result<LevelSets, NatError> {
    if report.finiteness != Verdict::Holds {
        return Err(NatError::Undetermined);
    }
    let o = &report.orbits;
    let (la, ua) = sides(&report.endpoint_a, &o[0], &o[1]);
    let (lb, ub) = sides(&report.endpoint_b, &o[2], &o[3]);
    Ok(LevelSets {
        l_ab: sorted_set(la.iter().chain(lb.iter()).cloned()),
        u_ab: sorted_set(ua.iter().chain(ub.iter()).cloned()),
        l_a: sorted_set(la),
        u_a: sorted_set(ua),
        l_b: sorted_set(lb),
        u_b: sorted_set(ub),
    })
}

// ---------------------------------------------------------------------------
// numeric attractor
//
// Points are stored as F's own coordinates (x, y): x picks the branch and its
// values are the levels of the step functions; y is the position along a level.

/// Chart `R -> (-(W+1), W+1)`: identity on `[-W, W]`, `y -> sgn(y)(W+1-W/|y|)` beyond.
pub fn chart(v: f64, w: f64) -> f64 {
    if v.abs() <= w {
        v
    } else if v.is_infinite() {
        v.signum() * (w + 1.0)
    } else {
        v.signum() * (w + 1.0 - w / v.abs())
    }
}

pub fn chart_inv(c: f64, w: f64) -> f64 {
    if c.abs() <= w {
        c
    } else {
        c.signum() * w / (w + 1.0 - c.abs())
    }
}

#[inline]
pub fn big_f_f64(x: f64, y: f64, a: f64, b: f64) -> (f64, f64) {
    if x < a {
        (x + 1.0, y + 1.0)
    } else if x < b {
        (-1.0 / x, -1.0 / y)
    } else {
        (x - 1.0, y - 1.0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttractorConfig {
    /// Resolution: tolerance for stabilization and error bar of extracted values.
    pub grid: f64,
    pub iters: usize,
    /// Seeds per axis of the uniform grid on the charted window.
    pub seeds: usize,
    /// Window half-width `W`.
    pub window: f64,
    /// Points join the cloud once their orbit has passed this many inversions.
    pub min_returns: u32,
}

impl AttractorConfig {
    pub fn new(grid: f64, iters: usize) -> AttractorConfig {
        AttractorConfig { grid, iters, seeds: 1000, window: 20.0, min_returns: 8 }
    }
}

/// Boundary profile of the cloud in the band `|x| <= 1`: per height band the
/// smallest positive and largest negative position, plus the extreme heights of
/// the two sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub edges: Vec<f64>,
    pub right_min: Vec<f64>,
    pub left_max: Vec<f64>,
    pub right_top: f64,
    pub left_bottom: f64,
}

const BAND: f64 = 1.0;

/// Height bands for the profile: between consecutive levels when the level sets
/// are known, otherwise sixteen equal bins.
fn band_edges(params: &CfParams) -> Vec<f64> {
    let mut e: Vec<f64> = vec![-BAND, BAND];
    match detect_cycles(params, 1000).and_then(|r| boundary_sets(&r)) {
        Ok(l) => e.extend(l.l_ab.iter().chain(&l.u_ab).map(Number::to_f64).filter(|v| v.abs() < BAND)),
        Err(_) => e.extend((1..16).map(|i| -BAND + i as f64 * BAND / 8.0)),
    }
    e.sort_by(f64::total_cmp);
    e.dedup();
    e
}

fn profile(points: &[(f64, f64)], edges: &[f64]) -> Profile {
    let nb = edges.len() - 1;
    let mut p = Profile {
        edges: edges.to_vec(),
        right_min: vec![f64::INFINITY; nb],
        left_max: vec![f64::NEG_INFINITY; nb],
        right_top: f64::NEG_INFINITY,
        left_bottom: f64::INFINITY,
    };
    for &(x, y) in points {
        if x.abs() > BAND {
            continue;
        }
        let i = edges.partition_point(|&e| e <= x).clamp(1, nb) - 1;
        if y > 0.0 {
            p.right_min[i] = p.right_min[i].min(y);
            p.right_top = p.right_top.max(x);
        } else if y < 0.0 {
            p.left_max[i] = p.left_max[i].max(y);
            p.left_bottom = p.left_bottom.min(x);
        }
    }
    p
}

fn profile_change(p: &Profile, q: &Profile, w: f64) -> f64 {
    let d = |u: f64, v: f64| {
        if u == v {
            0.0
        } else {
            (chart(u, w) - chart(v, w)).abs()
        }
    };
    let mut m = d(p.right_top, q.right_top).max(d(p.left_bottom, q.left_bottom));
    for i in 0..p.right_min.len() {
        m = m.max(d(p.right_min[i], q.right_min[i])).max(d(p.left_max[i], q.left_max[i]));
    }
    m
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttractorApprox {
    pub a: f64,
    pub b: f64,
    pub config: AttractorConfig,
    pub stabilized: bool,
    /// Profile change between the last two iterates, in chart units.
    pub last_change: Option<f64>,
    /// Connected components in the band `|x| <= 1`.
    pub components: usize,
    /// Highest level reached by the positive-position component.
    pub lower_top: Option<f64>,
    /// Lowest level reached by the negative-position component.
    pub upper_bottom: Option<f64>,
    #[serde(skip)]
    pub points: Vec<(f64, f64)>,
    /// Settled band points (`|x| <= 1`) halfway through, used to bound the bias
    /// of the boundary estimates.
    #[serde(skip)]
    pub half_band: Vec<(f64, f64)>,
}

fn seed_grid(cfg: &AttractorConfig) -> Vec<(f64, f64)> {
    let n = cfg.seeds;
    let w = cfg.window;
    let span = 2.0 * (w + 1.0);
    // each cell is jittered by an irrational rotation in both coordinates: values
    // with small denominators would have short, terminating orbits, and a plain
    // product grid would only carry `n` distinct branch orbits
    const R1: f64 = 0.754_877_666_246_692_7;
    const R2: f64 = 0.569_840_290_998_053_3;
    let at = |i: usize, jit: f64| chart_inv(-(w + 1.0) + span * (i as f64 + jit) / n as f64, w);
    let mut pts = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let k = (i * n + j) as f64;
            let x = at(i, (0.5 + k * R1).fract());
            let y = at(j, (0.5 + k * R2).fract());
            if x != y {
                pts.push((x, y));
            }
        }
    }
    pts
}

/// Iterates `F_{a,b}` on a seeded grid. The window is charted so that seeds
/// reach out to infinity in both coordinates.
pub fn attractor_approx(params: &CfParams, cfg: &AttractorConfig) -> Result<AttractorApprox, NatError> {
    check_ab(params)?;
    if !(cfg.grid > 0.0) || cfg.seeds < 2 || !(cfg.window > 1.0) {
        return Err(NatError::Invalid("grid > 0, seeds >= 2 and window > 1 required".into()));
    }
    let (a, b) = (params.a.to_f64(), params.b.to_f64());
    let mut pts: Vec<(f64, f64, u32)> = seed_grid(cfg).into_iter().map(|(x, y)| (x, y, 0)).collect();
    let settled = |pts: &[(f64, f64, u32)]| -> Vec<(f64, f64)> {
        pts.iter().filter(|p| p.2 >= cfg.min_returns).map(|p| (p.0, p.1)).collect()
    };
    let edges = band_edges(params);
    let mut prev = profile(&settled(&pts), &edges);
    let mut last_change = None;
    let mut half_band = Vec::new();
    for it in 0..cfg.iters {
        if it == cfg.iters / 2 {
            half_band = settled(&pts).into_iter().filter(|p| p.0.abs() <= BAND).collect();
        }
        pts.par_iter_mut().for_each(|p| {
            let inv = p.0 >= a && p.0 < b;
            let (x, y) = big_f_f64(p.0, p.1, a, b);
            *p = (x, y, p.2 + inv as u32);
        });
        // a point whose branch coordinate hits infinity stays there
        pts.retain(|&(x, y, _)| x.is_finite() && x != y && !y.is_nan());
        let cur = profile(&settled(&pts), &edges);
        last_change = Some(profile_change(&prev, &cur, cfg.window));
        prev = cur;
    }
    let pts = settled(&pts);
    let stabilized = last_change.is_some_and(|c| c < cfg.grid);
    let finite = |v: f64| if v.is_finite() { Some(v) } else { None };
    Ok(AttractorApprox {
        a,
        b,
        stabilized,
        last_change,
        components: count_components(&pts),
        lower_top: finite(prev.right_top),
        upper_bottom: finite(prev.left_bottom),
        config: cfg.clone(),
        points: pts,
        half_band,
    })
}

/// Flood fill of occupied cells over `|x| <= 1` in `(x, atan y)` coordinates.
/// Specks holding under 0.5% of the band's points are not counted.
fn count_components(points: &[(f64, f64)]) -> usize {
    const HX: f64 = 0.05;
    const HY: f64 = 0.05;
    let mut cells: HashMap<(i64, i64), usize> = HashMap::new();
    let mut total = 0usize;
    for &(x, y) in points {
        if x.abs() > BAND {
            continue;
        }
        let key = ((x / HX).floor() as i64, (y.atan() / HY).floor() as i64);
        *cells.entry(key).or_default() += 1;
        total += 1;
    }
    let mut seen: HashSet<(i64, i64)> = HashSet::new();
    let mut count = 0;
    let mut keys: Vec<(i64, i64)> = cells.keys().copied().collect();
    keys.sort_unstable();
    for start in keys {
        if seen.contains(&start) {
            continue;
        }
        let mut stack = vec![start];
        seen.insert(start);
        let mut mass = 0;
        while let Some((i, j)) = stack.pop() {
            mass += cells[&(i, j)];
            for di in -1..=1 {
                for dj in -1..=1 {
                    let nb = (i + di, j + dj);
                    if cells.contains_key(&nb) && seen.insert(nb) {
                        stack.push(nb);
                    }
                }
            }
        }
        if mass * 200 >= total {
            count += 1;
        }
    }
    count
}

impl AttractorApprox {
    /// One representative per occupied grid cell of the charted plane.
    pub fn thinned(&self) -> Vec<(f64, f64)> {
        let h = self.config.grid;
        let w = self.config.window;
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for &(x, y) in &self.points {
            let key = ((chart(x, w) / h).floor() as i64, (chart(y, w) / h).floor() as i64);
            if seen.insert(key) {
                out.push((x, y));
            }
        }
        out
    }

    pub fn to_csv(&self, path: &std::path::Path) -> Result<(), csv::Error> {
        let mut wr = csv::Writer::from_path(path)?;
        wr.write_record(["x", "y"])?;
        for (x, y) in self.thinned() {
            wr.write_record([format!("{x}"), format!("{y}")])?;
        }
        wr.flush()?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// boundary coordinates

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryX {
    pub x_a_minus: f64,
    pub x_a_plus: f64,
    pub x_b_minus: f64,
    pub x_b_plus: f64,
    /// Half-width of the error bar on each value: the grid resolution or the
    /// drift since the halfway iterate, whichever is larger.
    pub error: f64,
}

impl BoundaryX {
    /// The sign pattern `x_a^-, x_a^+ > 1` and `x_b^-, x_b^+ < -1`, with the
    /// error bar clear of `+-1`.
    pub fn signs_ok(&self) -> bool {
        let e = self.error;
        self.x_a_minus - e > 1.0 && self.x_a_plus - e > 1.0 && self.x_b_minus + e < -1.0 && self.x_b_plus + e < -1.0
    }

    pub fn values(&self) -> [f64; 4] {
        [self.x_a_minus, self.x_a_plus, self.x_b_minus, self.x_b_plus]
    }
}

fn extreme(points: &[(f64, f64)], lo: f64, hi: f64, right: bool) -> Option<f64> {
    let sel = points.iter().filter(|p| p.0 >= lo && p.0 < hi);
    if right {
        sel.filter(|p| p.1 > 0.0).map(|p| p.1).reduce(f64::min)
    } else {
        sel.filter(|p| p.1 < 0.0).map(|p| p.1).reduce(f64::max)
    }
}

/// Positions of the vertical pieces of the two boundary step functions next to
/// the levels `a`, `0` (positive side) and `0`, `b` (negative side).
///
/// The cloud approaches the boundary from inside, so each value is biased
/// towards the interior; the drift from the halfway iterate bounds that bias
/// when convergence is geometric or slower than `1/n`.
pub fn extract_boundary_x(cloud: &AttractorApprox, levels: &LevelSets, params: &CfParams) -> Result<BoundaryX, NatError> {
    check_ab(params)?;
    let fail = |s: &str| NatError::ExtractionFailed(s.into());
    let l: Vec<f64> = levels.l_ab.iter().map(Number::to_f64).collect();
    let u: Vec<f64> = levels.u_ab.iter().map(Number::to_f64).collect();
    let (a, b) = (cloud.a, cloud.b);
    let above = |v: f64| l.iter().copied().filter(|&x| x > v).reduce(f64::min);
    let below = |v: f64| u.iter().copied().filter(|&x| x < v).reduce(f64::max);
    let ya = above(a).ok_or_else(|| fail("no level of L above a"))?;
    let y0 = above(0.0).ok_or_else(|| fail("no level of L above 0"))?;
    let z0 = below(0.0).ok_or_else(|| fail("no level of U below 0"))?;
    let zb = below(b).ok_or_else(|| fail("no level of U below b"))?;
    let bands = [(a, ya, true, "a"), (0.0, y0, true, "0+"), (z0, 0.0, false, "0-"), (zb, b, false, "b")];
    let mut vals = [0.0; 4];
    let mut error = cloud.config.grid;
    for (i, &(lo, hi, right, name)) in bands.iter().enumerate() {
        vals[i] = extreme(&cloud.points, lo, hi, right).ok_or_else(|| fail(&format!("no points in the band at {name}")))?;
        if let Some(h) = extreme(&cloud.half_band, lo, hi, right) {
            error = error.max((vals[i] - h).abs());
        }
    }
    Ok(BoundaryX { x_a_minus: vals[0], x_a_plus: vals[1], x_b_minus: vals[2], x_b_plus: vals[3], error })
}

/// One vertical piece of a component boundary: the component occupies
/// positions beyond `x` for levels in `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub lo: Number,
    pub hi: Number,
    pub x: f64,
}

/// The boundary of `D` over the branch levels: the lower component over
/// `[a, a+1)` (positions `x > 0`), the upper one over `[b-1, b)` (`x < 0`).
/// With one step on each side of `0` this is the rectangle description
/// carried by `BoundaryX`; with interior levels it has more steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Staircase {
    pub lower: Vec<Step>,
    pub upper: Vec<Step>,
    pub error: f64,
    pub boundary_x: BoundaryX,
}

fn steps_between(levels: &[Number], lo: &Number, hi: &Number) -> Result<Vec<(Number, Number)>, NatError> {
    let mut cuts = vec![lo.clone()];
    for v in levels {
        if v.compare(lo)? == Ordering::Greater && v.compare(hi)? == Ordering::Less {
            cuts.push(v.clone());
        }
    }
    cuts.push(hi.clone());
    Ok(cuts.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect())
}

pub fn extract_staircase(cloud: &AttractorApprox, levels: &LevelSets, params: &CfParams) -> Result<Staircase, NatError> {
    let bx = extract_boundary_x(cloud, levels, params)?;
    let one = Number::int(1);
    let (a, b) = (&params.a, &params.b);
    let mut error = bx.error;
    let mut side = |lv: &[Number], lo: Number, hi: Number, right: bool| -> Result<Vec<Step>, NatError> {
        let mut out = Vec::new();
        for (l, h) in steps_between(lv, &lo, &hi)? {
            let (lf, hf) = (l.to_f64(), h.to_f64());
            let x = extreme(&cloud.points, lf, hf, right)
                .ok_or_else(|| NatError::ExtractionFailed(format!("no points between levels {l} and {h}")))?;
            if let Some(hb) = extreme(&cloud.half_band, lf, hf, right) {
                error = error.max((x - hb).abs());
            }
            out.push(Step { lo: l, hi: h, x });
        }
        Ok(out)
    };
    let lower = side(&levels.l_ab, a.clone(), a.add(&one)?, true)?;
    let upper = side(&levels.u_ab, b.sub(&one)?, b.clone(), false)?;
    Ok(Staircase { lower, upper, error, boundary_x: bx })
}

impl Staircase {
    /// The two-rectangle staircase of a `BoundaryX`: steps `[a,0)`, `[0,a+1)`
    /// for the lower component and `[b-1,0)`, `[0,b)` for the upper one.
    pub fn from_boundary_x(params: &CfParams, bx: &BoundaryX) -> Result<Staircase, NatError> {
        check_ab(params)?;
        let one = Number::int(1);
        let z = Number::zero();
        let (a, b) = (&params.a, &params.b);
        let step = |lo: &Number, hi: &Number, x: f64| Step { lo: lo.clone(), hi: hi.clone(), x };
        Ok(Staircase {
            lower: vec![step(a, &z, bx.x_a_minus), step(&z, &a.add(&one)?, bx.x_a_plus)],
            upper: vec![step(&b.sub(&one)?, &z, bx.x_b_minus), step(&z, b, bx.x_b_plus)],
            error: bx.error,
            boundary_x: *bx,
        })
    }
}
