//! Calibrated run statistics: `kappa` in `|t_j - 2 ln|a_j|| <= kappa`, the
//! slack `c` of the (-1,1) upper bound, cross-section height floor and
//! ceiling, and boundary coordinates. Stored as versioned JSON fixtures.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::arith::Number;
use crate::cf::CfParams;
use crate::geodesic::{c_prime, reduce_geodesic_in, reduce_point, GeoError, Geodesic, ReducedOrbit, Reducedness, Region};
use crate::natext::{attractor_approx, boundary_sets, detect_cycles, extract_staircase, AttractorConfig, BoundaryX, NatError, Staircase};
use crate::sample::random_surds;

pub const FIXTURE_VERSION: u32 = 1;
pub const FIXTURE_ENV: &str = "ABCF_FIXTURE_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CalibrationError {
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Nat(#[from] NatError),
    #[error("fixture {path}: {msg}")]
    Fixture { path: String, msg: String },
}

/// Fixture directory: `$ABCF_FIXTURE_DIR` if set, else `fixtures/` at the
/// workspace root.
pub fn fixture_dir() -> PathBuf {
    match std::env::var_os(FIXTURE_ENV) {
        Some(d) => PathBuf::from(d),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"),
    }
}

/// File name for a parameter pair, e.g. `ab_m1_2_1_2.json` for (-1/2,1/2).
pub fn fixture_name(params: &CfParams) -> String {
    let part = |n: &Number| n.to_string().replace('-', "m").replace('/', "_");
    format!("ab_{}_{}.json", part(&params.a), part(&params.b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorSummary {
    pub grid: f64,
    pub iters: usize,
    pub stabilized: bool,
    pub components: usize,
    pub boundary_x: BoundaryX,
    pub staircase: Staircase,
}

/// Statistics of reduced orbits over a set of inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub inputs: usize,
    pub returns_per_input: usize,
    pub total_returns: usize,
    /// `max |t_j - 2 ln|a_j||` with `t_j` the unsigned return time.
    pub max_deviation: f64,
    /// The same maximum over the first `short_returns` returns of each input.
    pub max_deviation_short: f64,
    pub short_returns: usize,
    pub min_deviation: f64,
    /// Returns whose signed elapsed time is negative (the lift crosses
    /// `a_j + C` before `C`).
    pub reversed: usize,
    pub min_cross_height: f64,
    pub max_cross_height: f64,
    /// Largest height of a cross-section point after reduction to the
    /// standard fundamental domain.
    pub max_reduced_height: f64,
    pub indeterminate: usize,
    pub max_reduction_steps: usize,
    /// (-1,1) only: `max_j (t_j - 2 ln|a_j| - 2 (sum of the four neighbour logs))`
    /// over `2 <= j < len - 2`.
    pub slack_c: Option<f64>,
    /// (-1,1) only: `min_j (t_j - 2 ln|a_j| + c')`.
    pub lower_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub version: u32,
    pub a: String,
    pub b: String,
    pub seed: u64,
    pub attractor: Option<AttractorSummary>,
    /// Extraction at twice the grid, for the refinement check.
    pub attractor_coarse: Option<AttractorSummary>,
    pub stats: RunStats,
}

impl Calibration {
    pub fn kappa(&self) -> f64 {
        self.stats.max_deviation
    }

    pub fn boundary_x(&self) -> Option<BoundaryX> {
        self.attractor.as_ref().map(|a| a.boundary_x)
    }

    /// Reduction region: the extracted staircase, or the A-reduced rule.
    pub fn region(&self) -> Region {
        match &self.attractor {
            Some(a) => Region::Staircase(a.staircase.clone()),
            None => Region::MinusOneOne,
        }
    }

    pub fn params(&self) -> Result<CfParams, CalibrationError> {
        let bad = |m: String| CalibrationError::Fixture { path: fixture_name_raw(&self.a, &self.b), msg: m };
        let a: Number = self.a.parse().map_err(|e: crate::arith::ArithError| bad(e.to_string()))?;
        let b: Number = self.b.parse().map_err(|e: crate::arith::ArithError| bad(e.to_string()))?;
        CfParams::ab(a, b).map_err(|e| bad(e.to_string()))
    }
}

fn fixture_name_raw(a: &str, b: &str) -> String {
    format!("({a},{b})")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPlan {
    pub seed: u64,
    pub inputs: usize,
    pub returns: usize,
    pub short_returns: usize,
    pub grid: f64,
    pub iters: usize,
}

impl CalibrationPlan {
    pub fn default_for(params: &CfParams) -> CalibrationPlan {
        if params.is_minus_one_one() {
            CalibrationPlan { seed: 303, inputs: 100, returns: 2000, short_returns: 200, grid: 0.0, iters: 0 }
        } else {
            CalibrationPlan { seed: 101, inputs: 200, returns: 10_000, short_returns: 1000, grid: 1e-3, iters: 240 }
        }
    }
}

/// Attractor, levels and boundary coordinates at one resolution.
pub fn attractor_summary(params: &CfParams, grid: f64, iters: usize) -> Result<AttractorSummary, CalibrationError> {
    let levels = boundary_sets(&detect_cycles(params, 1000)?)?;
    let cloud = attractor_approx(params, &AttractorConfig::new(grid, iters))?;
    let st = extract_staircase(&cloud, &levels, params)?;
    Ok(AttractorSummary { grid, iters, stabilized: cloud.stabilized, components: cloud.components, boundary_x: st.boundary_x, staircase: st })
}

/// Reduced orbit of `(conjugate, x)` for a surd `x`.
pub fn surd_orbit(x: &Number, params: &CfParams, region: &Region, returns: usize) -> Result<(ReducedOrbit, usize), GeoError> {
    let g = Geodesic::new(x.conjugate(), x.clone())?;
    let red = reduce_geodesic_in(&g, params, region, 1000)?;
    let mut orbit = ReducedOrbit::in_region(red.geodesic, params, region.clone(), &[])?;
    while orbit.index() < returns {
        if !orbit.advance()? {
            break;
        }
    }
    Ok((orbit, red.steps))
}

pub fn run_stats(params: &CfParams, region: &Region, inputs: &[Number], returns: usize, short: usize) -> Result<RunStats, GeoError> {
    let m11 = params.is_minus_one_one();
    let mut s = RunStats {
        inputs: inputs.len(),
        returns_per_input: returns,
        total_returns: 0,
        max_deviation: 0.0,
        max_deviation_short: 0.0,
        short_returns: short,
        min_deviation: f64::INFINITY,
        reversed: 0,
        min_cross_height: f64::INFINITY,
        max_cross_height: 0.0,
        max_reduced_height: 0.0,
        indeterminate: 0,
        max_reduction_steps: 0,
        slack_c: m11.then_some(f64::NEG_INFINITY),
        lower_margin: m11.then_some(f64::INFINITY),
    };
    for x in inputs {
        let (orbit, steps) = surd_orbit(x, params, region, returns)?;
        s.max_reduction_steps = s.max_reduction_steps.max(steps);
        let la: Vec<f64> = orbit.steps.iter().map(|r| crate::arith::ln_big(&num_traits::Signed::abs(&r.quotient))).collect();
        for (j, r) in orbit.steps.iter().enumerate() {
            let g = &r.geometry;
            let dev = g.deviation;
            s.total_returns += 1;
            s.max_deviation = s.max_deviation.max(dev.abs());
            if j < short {
                s.max_deviation_short = s.max_deviation_short.max(dev.abs());
            }
            s.min_deviation = s.min_deviation.min(dev);
            if g.elapsed.signum() < 0.0 {
                s.reversed += 1;
            }
            s.min_cross_height = s.min_cross_height.min(g.point.y);
            s.max_cross_height = s.max_cross_height.max(g.point.y);
            s.max_reduced_height = s.max_reduced_height.max(reduce_point(&g.point)?.0.y);
            if r.reducedness == Reducedness::Indeterminate {
                s.indeterminate += 1;
            }
            if m11 {
                let t = g.return_time().to_f64();
                s.lower_margin = s.lower_margin.map(|m| m.min(t - 2.0 * la[j] + c_prime()));
                if j >= 2 && j + 2 < la.len() {
                    let nb = la[j - 1] + la[j + 1] + la[j - 2] + la[j + 2];
                    s.slack_c = s.slack_c.map(|c| c.max(t - 2.0 * la[j] - 2.0 * nb));
                }
            }
        }
    }
    Ok(s)
}

/// Full calibration of one parameter pair.
pub fn calibrate(params: &CfParams, plan: &CalibrationPlan) -> Result<Calibration, CalibrationError> {
    let (attractor, coarse) = if params.is_minus_one_one() {
        (None, None)
    } else {
        (Some(attractor_summary(params, plan.grid, plan.iters)?), Some(attractor_summary(params, 2.0 * plan.grid, plan.iters / 2)?))
    };
    let inputs = random_surds(plan.seed, plan.inputs);
    let region = match &attractor {
        Some(a) => Region::Staircase(a.staircase.clone()),
        None => Region::MinusOneOne,
    };
    let stats = run_stats(params, &region, &inputs, plan.returns, plan.short_returns)?;
    Ok(Calibration {
        version: FIXTURE_VERSION,
        a: params.a.to_string(),
        b: params.b.to_string(),
        seed: plan.seed,
        attractor,
        attractor_coarse: coarse,
        stats,
    })
}

pub fn save(cal: &Calibration, dir: &Path) -> Result<PathBuf, CalibrationError> {
    let params = cal.params()?;
    let path = dir.join(fixture_name(&params));
    let io = |e: String| CalibrationError::Fixture { path: path.display().to_string(), msg: e };
    std::fs::create_dir_all(dir).map_err(|e| io(e.to_string()))?;
    let text = serde_json::to_string_pretty(cal).map_err(|e| io(e.to_string()))?;
    std::fs::write(&path, text + "\n").map_err(|e| io(e.to_string()))?;
    Ok(path)
}

/// Loads the fixture for `params`, refusing other versions.
pub fn load(params: &CfParams, dir: &Path) -> Result<Calibration, CalibrationError> {
    let path = dir.join(fixture_name(params));
    let err = |m: String| CalibrationError::Fixture { path: path.display().to_string(), msg: m };
    let text = std::fs::read_to_string(&path).map_err(|e| err(format!("{e}; run `abcf calibrate` first")))?;
    let cal: Calibration = serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
    if cal.version != FIXTURE_VERSION {
        return Err(err(format!("version {} (expected {FIXTURE_VERSION})", cal.version)));
    }
    Ok(cal)
}

/// Parameter pairs with shipped fixtures.
pub fn standard_pairs() -> Vec<CfParams> {
    vec![
        CfParams::nearest(),
        CfParams::ab_ratio(-2, 5, 3, 5),
        CfParams::ab_ratio(-1, 3, 2, 3),
        CfParams::minus_one_one(),
    ]
}
