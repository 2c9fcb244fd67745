use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use abcf::arith::Number;
use abcf::calibrate::{self, attractor_summary, Calibration, CalibrationPlan};
use abcf::cf::{classical_to_alternating, expand_ab, expand_classical, CfExpansion, CfParams};
use abcf::excursion::{
    check_vwa, construct_vwa, frequency_profile_in, frequency_profile_vwa, geometric_checkpoints, oracle_at_checkpoints,
    repelling_endpoint, run_exact, Exponent, ExcursionRecord, FrequencyProfile, ProfileConfig, ProfileStatus, VwaCheck,
    TREND_TOL,
};
use abcf::geodesic::{excursion_thresholds, reduce_geodesic_in, ExcursionThresholds, Geodesic, OracleEstimate, Reduction, Region};
use abcf::natext::{attractor_approx, boundary_sets, detect_cycles, extract_staircase, AttractorConfig, BoundaryX, CycleReport, LevelSets, Staircase};

mod csvout;

#[derive(Parser, Debug)]
#[command(name = "abcf", version, about = "(a,b)-continued fractions and cusp excursions of modular geodesics")]
struct Cli {
    /// Output format; each subcommand supports a subset.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Fixture directory (overrides ABCF_FIXTURE_DIR).
    #[arg(long, global = true)]
    fixture_dir: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Jsonl,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Partial quotients of x.
    Expand {
        #[arg(long, value_parser = number, allow_hyphen_values = true)]
        x: Number,
        #[command(flatten)]
        ab: OptPair,
        /// Classical expansion instead of an (a,b) one.
        #[arg(long, conflicts_with_all = ["a", "b"])]
        classical: bool,
        #[arg(long, default_value_t = 10_000)]
        max_terms: usize,
    },
    /// Classical expansion rewritten as the (-1,1) expansion.
    Convert {
        #[arg(long, value_parser = number, allow_hyphen_values = true, required_unless_present = "quotients")]
        x: Option<Number>,
        /// Classical quotients, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "x")]
        quotients: Option<Vec<i64>>,
        #[arg(long, default_value_t = 10_000)]
        max_terms: usize,
    },
    /// Seed orbits, cycle properties and level sets.
    Orbit {
        #[command(flatten)]
        ab: Pair,
        #[arg(long, default_value_t = 1000)]
        cap: usize,
    },
    /// Iterated natural-extension cloud and boundary coordinates.
    Attractor {
        #[command(flatten)]
        ab: Pair,
        #[arg(long, default_value_t = 2e-3)]
        grid: f64,
        #[arg(long, default_value_t = 120)]
        iters: usize,
        #[arg(long)]
        seeds: Option<usize>,
        /// Also write the cloud as CSV to this file.
        #[arg(long)]
        cloud: Option<PathBuf>,
    },
    /// Reduce the geodesic from u to x.
    Reduce {
        #[arg(long, value_parser = number, allow_hyphen_values = true)]
        x: Number,
        /// Repelling endpoint; the conjugate for surds, x - 3 otherwise.
        #[arg(long, value_parser = number, allow_hyphen_values = true)]
        u: Option<Number>,
        #[command(flatten)]
        ab: Pair,
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long, default_value_t = 1000)]
        cap: usize,
    },
    /// One record per return of the reduced geodesic ending at x.
    Simulate {
        #[arg(long, value_parser = number, allow_hyphen_values = true)]
        x: Number,
        #[command(flatten)]
        ab: Pair,
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long, default_value_t = 100)]
        returns: usize,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        d: Vec<f64>,
        #[arg(long)]
        oracle_step: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        cap: usize,
    },
    /// Cesaro averages, cusp-time fractions and a frequency classification.
    Frequency(FrequencyArgs),
    /// Constructed numbers.
    Construct {
        /// The very well approximable family a_{j+1} = [q_j^eps] + 1.
        #[arg(long, required = true)]
        vwa: bool,
        #[arg(long, default_value = "1")]
        eps: String,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        a0: i64,
        #[arg(long, default_value_t = 1)]
        a1: i64,
        /// Check |x - p_j/q_j| < q_j^-(2+eps) exactly for j < n - 2.
        #[arg(long)]
        check: bool,
    },
    /// Compute and store calibration fixtures.
    Calibrate {
        #[command(flatten)]
        ab: OptPair,
        /// All shipped parameter pairs.
        #[arg(long, conflicts_with_all = ["a", "b"])]
        all: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        inputs: Option<usize>,
        #[arg(long)]
        returns: Option<usize>,
        #[arg(long)]
        short_returns: Option<usize>,
        #[arg(long)]
        grid: Option<f64>,
        #[arg(long)]
        iters: Option<usize>,
    },
}

#[derive(Args, Debug)]
struct Pair {
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    a: Number,
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    b: Number,
}

#[derive(Args, Debug)]
struct OptPair {
    #[arg(long, value_parser = number, allow_hyphen_values = true, requires = "b")]
    a: Option<Number>,
    #[arg(long, value_parser = number, allow_hyphen_values = true, requires = "a")]
    b: Option<Number>,
}

#[derive(Args, Debug)]
struct RegionArgs {
    /// Extract the reduced region from a fresh attractor run instead of the fixture.
    #[arg(long)]
    extract: bool,
}

#[derive(Args, Debug)]
struct FrequencyArgs {
    #[arg(long, value_parser = number, allow_hyphen_values = true, required_unless_present = "vwa")]
    x: Option<Number>,
    /// Profile the constructed number instead of x; needs (a,b) = (-1,1).
    #[arg(long, conflicts_with = "x")]
    vwa: bool,
    #[arg(long, default_value = "1")]
    eps: String,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    a0: i64,
    #[arg(long, default_value_t = 1)]
    a1: i64,
    #[command(flatten)]
    ab: Pair,
    #[command(flatten)]
    region: RegionArgs,
    #[arg(long = "N", default_value_t = 1000)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_value = "2,3,5")]
    d: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2,10")]
    xi: Vec<f64>,
    /// `geometric` (10 * 2^k and N) or a comma separated list.
    #[arg(long, default_value = "geometric")]
    checkpoints: String,
    #[arg(long)]
    oracle_step: Option<f64>,
    #[arg(long, default_value_t = TREND_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    cap: usize,
    /// Also write the checkpoint table as CSV to this file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn number(s: &str) -> Result<Number, String> {
    s.parse().map_err(|e: abcf::arith::ArithError| e.to_string())
}

/// Exit 1 for bad invocations, 2 for failures of the computation itself.
enum Failure {
    Usage(String),
    Domain(String),
}

fn domain<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Domain(e.to_string())
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        Failure::Domain(format!("i/o: {e}"))
    }
}

struct Out {
    w: BufWriter<io::Stdout>,
}

impl Out {
    fn json<T: Serialize>(&mut self, v: &T) -> Result<(), Failure> {
        serde_json::to_writer(&mut self.w, v).map_err(domain)?;
        writeln!(self.w)?;
        Ok(())
    }
}

fn params(ab: &Pair) -> Result<CfParams, Failure> {
    CfParams::ab(ab.a.clone(), ab.b.clone()).map_err(usage)
}

fn pick(format: Option<Format>, allowed: &[Format]) -> Result<Format, Failure> {
    match format {
        None => Ok(allowed[0]),
        Some(f) if allowed.contains(&f) => Ok(f),
        Some(f) => Err(Failure::Usage(format!("format {f:?} is not available here"))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut out = Out { w: BufWriter::new(io::stdout()) };
    let res = run(&cli, &mut out);
    let _ = out.w.flush();
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Domain(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn fixture_dir(cli: &Cli) -> PathBuf {
    cli.fixture_dir.clone().unwrap_or_else(calibrate::fixture_dir)
}

fn run(cli: &Cli, out: &mut Out) -> Result<(), Failure> {
    match &cli.cmd {
        Cmd::Expand { x, ab, classical, max_terms } => {
            let e = match (&ab.a, &ab.b, classical) {
                (_, _, true) => expand_classical(x, *max_terms),
                (Some(a), Some(b), false) => expand_ab(x, &CfParams::ab(a.clone(), b.clone()).map_err(usage)?, *max_terms),
                _ => return Err(Failure::Usage("give --a and --b, or --classical".into())),
            }
            .map_err(domain)?;
            emit_expansion(out, cli.format, &e)?;
            if e.precision_exhausted {
                return Err(Failure::Domain(format!("precision exhausted after {} quotients", e.len())));
            }
            Ok(())
        }
        Cmd::Convert { x, quotients, max_terms } => {
            let classical = match (x, quotients) {
                (Some(x), _) => expand_classical(x, *max_terms).map_err(domain)?,
                (None, Some(q)) => CfExpansion::new(&CfParams::classical(), q.iter().map(|&v| v.into()).collect(), true),
                _ => unreachable!("clap requires one of them"),
            };
            pick(cli.format, &[Format::Json])?;
            let alternating = classical_to_alternating(&classical).map_err(domain)?;
            out.json(&ConvertOut { classical: &classical, alternating: &alternating })?;
            if classical.precision_exhausted {
                return Err(Failure::Domain(format!("precision exhausted after {} quotients", classical.len())));
            }
            Ok(())
        }
        Cmd::Orbit { ab, cap } => {
            pick(cli.format, &[Format::Json])?;
            let p = params(ab)?;
            let report = detect_cycles(&p, *cap).map_err(domain)?;
            let levels = boundary_sets(&report).ok();
            out.json(&OrbitOut { report: &report, levels })
        }
        Cmd::Attractor { ab, grid, iters, seeds, cloud } => attractor(cli, out, ab, *grid, *iters, *seeds, cloud.as_deref()),
        Cmd::Reduce { x, u, ab, region, cap } => {
            pick(cli.format, &[Format::Json])?;
            let p = params(ab)?;
            let (region, _) = resolve_region(cli, &p, region)?;
            let u = u.clone().unwrap_or_else(|| repelling_endpoint(x));
            let g = Geodesic::new(u, x.clone()).map_err(domain)?;
            let red = reduce_geodesic_in(&g, &p, &region, *cap).map_err(domain)?;
            out.json(&ReduceOut { input: &g, region: region_kind(&region), reduction: &red })
        }
        Cmd::Simulate { x, ab, region, returns, d, oracle_step, cap } => {
            simulate(cli, out, x, ab, region, *returns, d, *oracle_step, *cap)
        }
        Cmd::Frequency(f) => frequency(cli, out, f),
        Cmd::Construct { vwa: _, eps, n, a0, a1, check } => {
            let eps: Exponent = eps.parse().map_err(usage)?;
            let e = construct_vwa(eps, *a0, *a1, *n).map_err(usage)?;
            let vwa_check = if *check { Some(check_vwa(&e, eps, n.saturating_sub(2)).map_err(usage)?) } else { None };
            match pick(cli.format, &[Format::Json, Format::Csv])? {
                Format::Csv => csvout::quotients(&mut out.w, &e),
                _ => out.json(&ConstructOut { eps: format!("{}/{}", eps.num, eps.den), a0: *a0, a1: *a1, expansion: &e, vwa_check }),
            }
        }
        Cmd::Calibrate { ab, all, seed, inputs, returns, short_returns, grid, iters } => {
            pick(cli.format, &[Format::Jsonl])?;
            let pairs = match (&ab.a, &ab.b, all) {
                (_, _, true) => calibrate::standard_pairs(),
                (Some(a), Some(b), false) => vec![CfParams::ab(a.clone(), b.clone()).map_err(usage)?],
                _ => return Err(Failure::Usage("give --a and --b, or --all".into())),
            };
            let dir = fixture_dir(cli);
            for p in pairs {
                let mut plan = CalibrationPlan::default_for(&p);
                plan.seed = seed.unwrap_or(plan.seed);
                plan.inputs = inputs.unwrap_or(plan.inputs);
                plan.returns = returns.unwrap_or(plan.returns);
                plan.short_returns = short_returns.unwrap_or(plan.short_returns).min(plan.returns);
                plan.grid = grid.unwrap_or(plan.grid);
                plan.iters = iters.unwrap_or(plan.iters);
                let cal = calibrate::calibrate(&p, &plan).map_err(domain)?;
                let path = calibrate::save(&cal, &dir).map_err(domain)?;
                out.json(&CalibrateOut { path: path.display().to_string(), plan: &plan, calibration: &cal })?;
                out.w.flush()?;
            }
            Ok(())
        }
    }
}

fn emit_expansion(out: &mut Out, format: Option<Format>, e: &CfExpansion) -> Result<(), Failure> {
    match pick(format, &[Format::Json, Format::Csv])? {
        Format::Csv => csvout::quotients(&mut out.w, e),
        _ => out.json(e),
    }
}

/// Region for reduction: the A-reduced rule for (-1,1), otherwise the
/// staircase from the fixture, or from a fresh extraction on request.
fn resolve_region(cli: &Cli, p: &CfParams, args: &RegionArgs) -> Result<(Region, Option<Calibration>), Failure> {
    let dir = fixture_dir(cli);
    if p.is_minus_one_one() {
        return Ok((Region::MinusOneOne, calibrate::load(p, &dir).ok()));
    }
    if args.extract {
        let s = attractor_summary(p, 2e-3, 120).map_err(domain)?;
        return Ok((Region::Staircase(s.staircase), None));
    }
    let cal = calibrate::load(p, &dir).map_err(domain)?;
    Ok((cal.region(), Some(cal)))
}

fn region_kind(r: &Region) -> &'static str {
    match r {
        Region::MinusOneOne => "minus-one-one",
        Region::Staircase(_) => "staircase",
    }
}

fn thresholds(p: &CfParams, region: &Region, d: &[f64]) -> Result<Option<Vec<ExcursionThresholds>>, Failure> {
    match region.boundary_x() {
        Some(bx) if !p.is_minus_one_one() => {
            Ok(Some(d.iter().map(|&d| excursion_thresholds(d, p, bx)).collect::<Result<Vec<_>, _>>().map_err(domain)?))
        }
        _ => Ok(None),
    }
}

fn attractor(
    cli: &Cli,
    out: &mut Out,
    ab: &Pair,
    grid: f64,
    iters: usize,
    seeds: Option<usize>,
    cloud_path: Option<&Path>,
) -> Result<(), Failure> {
    let format = pick(cli.format, &[Format::Json, Format::Csv])?;
    let p = params(ab)?;
    if !(grid > 0.0) || iters == 0 {
        return Err(Failure::Usage("grid must be positive and iters at least 1".into()));
    }
    let mut cfg = AttractorConfig::new(grid, iters);
    if let Some(s) = seeds {
        cfg.seeds = s;
    }
    let cloud = attractor_approx(&p, &cfg).map_err(domain)?;
    if let Some(path) = cloud_path {
        cloud.to_csv(path).map_err(domain)?;
    }
    if format == Format::Csv {
        return csvout::cloud(&mut out.w, &cloud.thinned());
    }
    let levels = detect_cycles(&p, 1000).and_then(|r| boundary_sets(&r));
    let (boundary_x, staircase, error) = match &levels {
        Ok(l) => match extract_staircase(&cloud, l, &p) {
            Ok(s) => (Some(s.boundary_x), Some(s), None),
            Err(e) => (None, None, Some(e.to_string())),
        },
        Err(e) => (None, None, Some(e.to_string())),
    };
    let summary = AttractorOut {
        a: p.a.to_string(),
        b: p.b.to_string(),
        grid,
        iters,
        stabilized: cloud.stabilized,
        last_change: cloud.last_change,
        components: cloud.components,
        lower_top: cloud.lower_top,
        upper_bottom: cloud.upper_bottom,
        levels: levels.ok(),
        boundary_x,
        signs_ok: boundary_x.map(|b| b.signs_ok()),
        staircase,
        extraction_error: error.clone(),
    };
    out.json(&summary)?;
    match error {
        Some(e) => Err(Failure::Domain(e)),
        None => Ok(()),
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    cli: &Cli,
    out: &mut Out,
    x: &Number,
    ab: &Pair,
    region: &RegionArgs,
    returns: usize,
    d: &[f64],
    oracle_step: Option<f64>,
    cap: usize,
) -> Result<(), Failure> {
    pick(cli.format, &[Format::Jsonl])?;
    let p = params(ab)?;
    let (region, cal) = resolve_region(cli, &p, region)?;
    let th = thresholds(&p, &region, d)?;
    let run = run_exact(x, &p, &region, returns, d, cap).map_err(domain)?;
    let mut max_dev: f64 = 0.0;
    for (j, r) in run.returns.iter().enumerate() {
        max_dev = max_dev.max(r.geometry.deviation.abs());
        out.json(&ExcursionRecord::new(j, r, th.as_deref()))?;
    }
    let oracle = match oracle_step {
        Some(s) if !run.returns.is_empty() => {
            oracle_at_checkpoints(&run, &[run.returns.len()], d, s).map_err(domain)?.pop()
        }
        _ => None,
    };
    let summary = SimulateSummary {
        x: x.to_string(),
        a: p.a.to_string(),
        b: p.b.to_string(),
        repelling: run.start.u.to_string(),
        region: region_kind(&region),
        reduction_steps: run.reduction_steps,
        returns: run.returns.len(),
        d_list: d.to_vec(),
        thresholds: th,
        max_deviation: max_dev,
        kappa: cal.as_ref().map(Calibration::kappa),
        oracle,
        status: &run.status,
    };
    out.json(&SummaryLine { summary })?;
    status_exit(&run.status)
}

fn status_exit(s: &ProfileStatus) -> Result<(), Failure> {
    match s {
        ProfileStatus::Partial { error } => Err(Failure::Domain(error.clone())),
        _ => Ok(()),
    }
}

fn frequency(cli: &Cli, out: &mut Out, f: &FrequencyArgs) -> Result<(), Failure> {
    let format = pick(cli.format, &[Format::Json, Format::Csv])?;
    let p = params(&f.ab)?;
    let mut cfg = ProfileConfig::new(f.n, &f.d, &f.xi);
    cfg.checkpoints = if f.checkpoints == "geometric" {
        geometric_checkpoints(f.n)
    } else {
        let mut c: Vec<usize> = f
            .checkpoints
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| Failure::Usage(format!("checkpoints: {e}")))?;
        c.sort_unstable();
        c.dedup();
        c
    };
    cfg.oracle_step = f.oracle_step;
    cfg.tol = f.tol;
    cfg.reduction_cap = f.cap;
    let profile: FrequencyProfile = if f.vwa {
        if !p.is_minus_one_one() {
            return Err(Failure::Usage("--vwa profiles use (a,b) = (-1,1)".into()));
        }
        let eps: Exponent = f.eps.parse().map_err(usage)?;
        frequency_profile_vwa(eps, f.a0, f.a1, &cfg).map_err(domain)?
    } else {
        let x = f.x.as_ref().expect("clap requires x");
        let (region, _) = resolve_region(cli, &p, &f.region)?;
        frequency_profile_in(x, &p, &region, &cfg).map_err(domain)?
    };
    if let Some(path) = &f.csv {
        let mut file = BufWriter::new(std::fs::File::create(path)?);
        csvout::checkpoints(&mut file, &profile)?;
        file.flush()?;
    }
    match format {
        Format::Csv => csvout::checkpoints(&mut out.w, &profile)?,
        _ => out.json(&profile)?,
    }
    status_exit(&profile.status)
}

#[derive(Serialize)]
struct ConvertOut<'a> {
    classical: &'a CfExpansion,
    alternating: &'a CfExpansion,
}

#[derive(Serialize)]
struct OrbitOut<'a> {
    report: &'a CycleReport,
    levels: Option<LevelSets>,
}

#[derive(Serialize)]
struct AttractorOut {
    a: String,
    b: String,
    grid: f64,
    iters: usize,
    stabilized: bool,
    last_change: Option<f64>,
    components: usize,
    lower_top: Option<f64>,
    upper_bottom: Option<f64>,
    levels: Option<LevelSets>,
    boundary_x: Option<BoundaryX>,
    signs_ok: Option<bool>,
    staircase: Option<Staircase>,
    extraction_error: Option<String>,
}

#[derive(Serialize)]
struct ReduceOut<'a> {
    input: &'a Geodesic,
    region: &'static str,
    reduction: &'a Reduction,
}

#[derive(Serialize)]
struct SummaryLine<'a> {
    summary: SimulateSummary<'a>,
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    x: String,
    a: String,
    b: String,
    repelling: String,
    region: &'static str,
    reduction_steps: usize,
    returns: usize,
    d_list: Vec<f64>,
    thresholds: Option<Vec<ExcursionThresholds>>,
    max_deviation: f64,
    /// Calibrated bound from the fixture, when one is present.
    kappa: Option<f64>,
    oracle: Option<Vec<OracleEstimate>>,
    status: &'a ProfileStatus,
}

#[derive(Serialize)]
struct ConstructOut<'a> {
    eps: String,
    a0: i64,
    a1: i64,
    #[serde(flatten)]
    expansion: &'a CfExpansion,
    vwa_check: Option<VwaCheck>,
}

#[derive(Serialize)]
struct CalibrateOut<'a> {
    path: String,
    plan: &'a CalibrationPlan,
    calibration: &'a Calibration,
}
