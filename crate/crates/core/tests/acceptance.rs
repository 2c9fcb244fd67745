//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are expected to fail; the run exits
//! non-zero when the set of failures differs from that list in either
//! direction.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use abcf::arith::{hyperbolic_distance, Number, UpperHalfPoint};
use abcf::calibrate::{self, attractor_summary, run_stats, surd_orbit, AttractorSummary, Calibration};
use abcf::cf::{classical_to_alternating, convergents, expand_ab, expand_classical, CfExpansion, CfParams};
use abcf::excursion::{
    check_vwa, construct_vwa, frequency_profile_in, frequency_profile_vwa, run_exact, vwa_magnitudes, Exponent,
    ExcursionRecord, ProfileConfig, ProfileStatus, Quotient, Tag,
};
use abcf::geodesic::{
    c_prime, conservative_thresholds, cusp_time_numeric, return_time_bounds_minus11, Geodesic, Region, ThresholdVerdict,
};
use abcf::natext::{attractor_approx, detect_cycles, AttractorConfig, CycleProperty, CycleReport};
use abcf::sample::{random_rational, random_surds, rng};

/// Criterion 6 fails on (-3/4,1/2) and (-1/2,3/4): the boundary
/// coordinate next to the far endpoint converges to -1 (resp. 1).
const KNOWN_FAILURES: &[usize] = &[6];

// ------------------------------------------------------------------------
// tolerances

const EXTENSION_GROWTH: f64 = 0.01;
const ORACLE_FACTOR: f64 = 2.0;
const ARC_TOL: f64 = 1e-12;
const LOWER_BOUND_TOL: f64 = 1e-9;
const ALTERNATION_SECONDS: f64 = 10.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn ln_big(a: &BigInt) -> f64 {
    let bits = a.bits();
    if bits < 1000 {
        return a.abs().to_f64().unwrap().ln();
    }
    let shift = bits - 60;
    let top: BigInt = a.abs() >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

fn fixture(p: &CfParams) -> Calibration {
    calibrate::load(p, &calibrate::fixture_dir()).expect("shipped fixture; run `abcf calibrate --all`")
}

fn s_prime_pairs() -> Vec<CfParams> {
    calibrate::standard_pairs().into_iter().filter(|p| !p.is_minus_one_one()).collect()
}

// ------------------------------------------------------------------------
// independent oracles

/// Nearest-integer continued fraction with plus signs, `b_j = floor(y + 1/2)`,
/// converted to the minus-sign convention.
fn hurwitz_as_ab(x: &BigRational) -> Vec<BigInt> {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut y = x.clone();
    let mut d = vec![];
    loop {
        let b = (&y + &half).floor().to_integer();
        d.push(if d.len() % 2 == 1 { -&b } else { b.clone() });
        let r = &y - BigRational::from_integer(b);
        if r.is_zero() {
            break;
        }
        y = r.recip();
    }
    let n = d.len();
    if n >= 2 && d[n - 1] == BigInt::from(-2) {
        d[n - 1] = BigInt::from(2);
        d[n - 2] += 1;
    }
    d
}

/// The interval map on rationals, `None` standing for infinity.
fn f_ab(x: &Option<BigRational>, a: &BigRational, b: &BigRational) -> Option<BigRational> {
    let x = x.as_ref()?;
    if x < a {
        Some(x + BigInt::one())
    } else if x < b {
        if x.is_zero() {
            None
        } else {
            Some(-x.recip())
        }
    } else {
        Some(x - BigInt::one())
    }
}

fn iterate(x: Option<BigRational>, n: usize, a: &BigRational, b: &BigRational) -> Option<BigRational> {
    (0..n).fold(x, |v, _| f_ab(&v, a, b))
}

/// `acosh(1 + |z - w|^2 / (2 y_z y_w))`.
fn distance(z: (f64, f64), w: (f64, f64)) -> f64 {
    let d2 = (z.0 - w.0).powi(2) + (z.1 - w.1).powi(2);
    (1.0 + d2 / (2.0 * z.1 * w.1)).acosh()
}

// ------------------------------------------------------------------------
// criteria

fn c1_alternation() -> Outcome {
    let t0 = Instant::now();
    let m = CfParams::minus_one_one();
    let mut r = rng(1);
    let mut bad = 0;
    for _ in 0..1000 {
        let x = random_rational(&mut r, 10, 100_000);
        let ab = expand_ab(&x, &m, 10_000).unwrap();
        let alt = classical_to_alternating(&expand_classical(&x, 10_000).unwrap()).unwrap();
        if !(ab.terminated && alt.terminated && ab.quotients == alt.quotients) {
            bad += 1;
        }
    }
    let mut short = 0;
    for x in random_surds(2, 100) {
        let ab = expand_ab(&x, &m, 300).unwrap();
        let alt = classical_to_alternating(&expand_classical(&x, 300).unwrap()).unwrap();
        let n = ab.len().min(alt.len());
        if n < 200 {
            short += 1;
        }
        if ab.quotients[..n] != alt.quotients[..n] {
            bad += 1;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        bad == 0 && short == 0 && secs < ALTERNATION_SECONDS,
        format!("1000 rationals + 100 surds, {bad} mismatches, {short} short prefixes, {secs:.2}s"),
    )
}

fn c2_hurwitz() -> Outcome {
    let p = CfParams::nearest();
    let mut r = rng(3);
    let mut bad = 0;
    for _ in 0..1000 {
        let x = random_rational(&mut r, 10, 1_000_000);
        let e = expand_ab(&x, &p, 10_000).unwrap();
        if !e.terminated || e.quotients != hurwitz_as_ab(x.as_rational().unwrap()) {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("1000 rationals, {bad} mismatches against the Hurwitz oracle"))
}

fn c3_convergents() -> Outcome {
    let params = [
        CfParams::classical(),
        CfParams::nearest(),
        CfParams::minus_one_one(),
        CfParams::ab_ratio(-2, 5, 3, 5),
        CfParams::ab_ratio(-1, 3, 2, 3),
        CfParams::ab_ratio(-3, 4, 1, 2),
    ];
    let mut r = rng(4);
    let (mut pairs, mut bad_det, mut bad_final) = (0usize, 0, 0);
    for p in &params {
        for _ in 0..200 {
            let x = random_rational(&mut r, 10, 100_000);
            let e = if p.flavor == abcf::cf::Flavor::Classical {
                expand_classical(&x, 10_000).unwrap()
            } else {
                expand_ab(&x, p, 10_000).unwrap()
            };
            let c = convergents(&e, e.len()).unwrap();
            for w in c.windows(2) {
                pairs += 1;
                let det = &w[1].p * &w[0].q - &w[0].p * &w[1].q;
                if det.abs() != BigInt::one() {
                    bad_det += 1;
                }
            }
            if !e.terminated || c.last().unwrap().value() != x {
                bad_final += 1;
            }
        }
    }
    outcome(
        bad_det == 0 && bad_final == 0,
        format!("{pairs} consecutive pairs over 6 parameter pairs, {bad_det} bad determinants, {bad_final} bad final convergents"),
    )
}

fn endpoint_ok(rep: &CycleReport, which: char) -> Result<String, String> {
    let (a, b) = (rep.a.as_rational().unwrap().clone(), rep.b.as_rational().unwrap().clone());
    let c = if which == 'a' { &rep.endpoint_a } else { &rep.endpoint_b };
    if !matches!(c.property, CycleProperty::Strong | CycleProperty::Weak) {
        return Err(format!("endpoint {which}: {:?}", c.property));
    }
    let end = c.end.as_ref().and_then(|v| v.as_rational().cloned()).ok_or("no exact meeting value")?;
    let (m, k) = (c.m.unwrap(), c.k.unwrap());
    // upper orbit starts at Sa (resp. T^-1 b), lower at Ta (resp. Sb)
    let (up, lo) = if which == 'a' {
        (Some(-a.recip()), Some(&a + BigInt::one()))
    } else {
        (Some(&b - BigInt::one()), Some(-b.recip()))
    };
    let (u, l) = (iterate(up, m, &a, &b), iterate(lo, k, &a, &b));
    if u.as_ref() != Some(&end) || l.as_ref() != Some(&end) {
        return Err(format!("endpoint {which}: recomputed orbits give {u:?}, {l:?}, report says {end}"));
    }
    Ok(format!("c_{which}={end} ({:?}, m={m}, k={k})", c.property))
}

fn c4_cycles() -> Outcome {
    let mut notes = vec![];
    let mut pass = true;
    for p in [CfParams::nearest(), CfParams::ab_ratio(-2, 5, 3, 5)] {
        let r3 = detect_cycles(&p, 1000).unwrap();
        let r4 = detect_cycles(&p, 10_000).unwrap();
        let same = r3.endpoint_a == r4.endpoint_a
            && r3.endpoint_b == r4.endpoint_b
            && r3.finiteness == r4.finiteness
            && r3.orbits == r4.orbits;
        pass &= same;
        let mut s = format!("({},{})", p.a, p.b);
        for w in ['a', 'b'] {
            match endpoint_ok(&r3, w) {
                Ok(m) => s += &format!(" {m}"),
                Err(e) => {
                    pass = false;
                    s += &format!(" {e}");
                }
            }
        }
        if !same {
            s += " cap 1e4 report differs";
        }
        notes.push(s);
    }
    outcome(pass, notes.join("; "))
}

fn c5_attractor() -> Outcome {
    let grid = 1e-3;
    let cloud = attractor_approx(&CfParams::nearest(), &AttractorConfig::new(grid, 240)).unwrap();
    let change = cloud.last_change.unwrap_or(f64::INFINITY);
    let top = cloud.lower_top.unwrap_or(f64::NAN);
    let bottom = cloud.upper_bottom.unwrap_or(f64::NAN);
    let pass = cloud.stabilized
        && change < grid
        && cloud.components == 2
        && (top - 0.5).abs() <= grid
        && (bottom + 0.5).abs() <= grid;
    outcome(
        pass,
        format!(
            "(-1/2,1/2) grid {grid}: change {change:.2e}, {} components, lower top {top:.5}, upper bottom {bottom:.5}",
            cloud.components
        ),
    )
}

fn c6_signs() -> Outcome {
    let mut rows: Vec<(String, AttractorSummary, AttractorSummary)> = vec![];
    for p in s_prime_pairs() {
        let cal = fixture(&p);
        rows.push((format!("({},{}) fixture", p.a, p.b), cal.attractor.unwrap(), cal.attractor_coarse.unwrap()));
    }
    for p in [CfParams::ab_ratio(-3, 4, 1, 2), CfParams::ab_ratio(-1, 2, 3, 4)] {
        let fine = attractor_summary(&p, 1e-3, 240).unwrap();
        let coarse = attractor_summary(&p, 2e-3, 120).unwrap();
        rows.push((format!("({},{}) live", p.a, p.b), fine, coarse));
    }
    let mut pass = true;
    let mut notes = vec![];
    for (name, fine, coarse) in rows {
        let bx = fine.boundary_x;
        let signs = bx.signs_ok();
        let moved = bx.values().iter().zip(coarse.boundary_x.values()).map(|(f, c)| (f - c).abs()).fold(0.0, f64::max);
        let stable = moved < coarse.grid;
        pass &= signs && stable;
        let v = bx.values();
        notes.push(format!(
            "{name}: x=[{:.4},{:.4},{:.4},{:.4}]+-{:.0e} signs {} refinement {:.1e} {}",
            v[0],
            v[1],
            v[2],
            v[3],
            bx.error,
            if signs { "ok" } else { "VIOLATED" },
            moved,
            if stable { "ok" } else { "UNSTABLE" }
        ));
    }
    outcome(pass, notes.join("; "))
}

fn c7_return_deviation() -> Outcome {
    let p = CfParams::nearest();
    let cal = fixture(&p);
    let kappa = cal.kappa();
    let region = cal.region();
    let inputs = random_surds(202, 100);
    let s = run_stats(&p, &region, &inputs, 200, 200).unwrap();
    let ext = run_stats(&p, &region, &inputs[..10], 2000, 200).unwrap();
    let same = run_stats(&p, &region, &inputs[..10], 200, 200).unwrap();
    let grown = s.max_deviation.max(ext.max_deviation);
    let pass = s.total_returns == 20_000 && s.max_deviation <= kappa && grown <= (1.0 + EXTENSION_GROWTH) * s.max_deviation;
    outcome(
        pass,
        format!(
            "kappa {kappa:.6}; 100x200 max {:.6}; 10x2000 max {:.6} (same 10 at 200: {:.6}, +{:.3}% overall)",
            s.max_deviation,
            ext.max_deviation,
            same.max_deviation,
            100.0 * (grown / s.max_deviation - 1.0)
        ),
    )
}

fn c8_thresholds() -> Outcome {
    let d_list = [1.5, 2.0, 3.0];
    let (mut below, mut above, mut bad) = (0usize, 0usize, 0usize);
    let mut notes = vec![];
    for p in s_prime_pairs() {
        let cal = fixture(&p);
        let region = cal.region();
        let bx = cal.boundary_x().unwrap();
        let th: Vec<_> = d_list.iter().map(|&d| conservative_thresholds(d, &p, &bx).unwrap()).collect();
        let mut local = 0;
        for x in random_surds(404, 40) {
            let run = run_exact(&x, &p, &region, 500, &d_list, 1000).unwrap();
            for (j, r) in run.returns.iter().enumerate() {
                let rec = ExcursionRecord::new(j, r, Some(&th));
                for (k, v) in rec.verdict.as_ref().unwrap().iter().enumerate() {
                    let t = rec.time_above[k].time.to_f64();
                    match v {
                        ThresholdVerdict::BelowLower => {
                            below += 1;
                            if t > 0.0 {
                                bad += 1;
                                local += 1;
                            }
                        }
                        ThresholdVerdict::AboveUpper => {
                            above += 1;
                            if !(t > 0.0) {
                                bad += 1;
                                local += 1;
                            }
                        }
                        ThresholdVerdict::IndeterminateBand => {}
                    }
                }
            }
        }
        notes.push(format!("({},{}) {local}", p.a, p.b));
    }
    outcome(
        bad == 0 && below > 0 && above > 0,
        format!("d in {d_list:?}: {below} below-lower and {above} above-upper verdicts, counterexamples: {}", notes.join(", ")),
    )
}

fn c9_oracle() -> Outcome {
    let d_list = [2.0, 3.0];
    let mut cases: Vec<(CfParams, Region, Number)> = vec![];
    for (i, p) in s_prime_pairs().into_iter().enumerate() {
        let region = fixture(&p).region();
        for x in random_surds(500 + i as u64, 12) {
            cases.push((p.clone(), region.clone(), x));
        }
    }
    for x in random_surds(510, 14) {
        cases.push((CfParams::minus_one_one(), Region::MinusOneOne, x));
    }
    let (mut compared, mut bad, mut m11) = (0usize, 0usize, 0usize);
    let mut worst: f64 = 0.0;
    for (p, region, x) in &cases {
        let mut cfg = ProfileConfig::new(200, &d_list, &[3.0]);
        cfg.oracle_step = Some(0.01);
        let prof = frequency_profile_in(x, p, region, &cfg).unwrap();
        for c in &prof.checkpoints {
            for (k, est) in c.oracle.as_ref().unwrap().iter().enumerate() {
                compared += 1;
                if p.is_minus_one_one() {
                    m11 += 1;
                }
                let diff = (c.i_n[k] - est.fraction).abs();
                let allowed = ORACLE_FACTOR * est.error_bound;
                worst = worst.max(if allowed > 0.0 { diff / allowed } else if diff > 0.0 { f64::INFINITY } else { 0.0 });
                if diff > allowed {
                    bad += 1;
                }
            }
        }
    }
    outcome(
        bad == 0 && cases.len() == 50,
        format!(
            "{} geodesics, {compared} checkpoint comparisons ({m11} under (-1,1)), {bad} outside {ORACLE_FACTOR}x bound, worst ratio {worst:.3}",
            cases.len()
        ),
    )
}

fn c10_frequency0() -> Outcome {
    let p = CfParams::nearest();
    let region = fixture(&p).region();
    let mut pass = true;
    let mut notes = vec![];
    for (name, x) in [("phi", Number::golden()), ("sqrt2", Number::surd(0, 1, 2, 1).unwrap())] {
        let cfg = ProfileConfig::new(10_000, &[2.0], &[3.0]);
        let prof = frequency_profile_in(&x, &p, &region, &cfg).unwrap();
        let a_zero = prof.checkpoints.iter().all(|c| c.a_n_xi[0].is_zero());
        let i_zero = prof.checkpoints.iter().all(|c| c.i_n[0] == 0.0);
        let tag_ok = prof.classification.tag == Tag::Frequency0 && prof.classification.witness_xi == Some(3.0);
        // every partial sum, not only the checkpoints
        let run = run_exact(&x, &p, &region, 10_000, &[2.0], 1000).unwrap();
        let each = run.returns.len() == 10_000 && run.returns.iter().all(|r| r.geometry.above[0].time.is_zero() && r.geometry.above[0].cusp.is_zero());
        let ok = a_zero && tag_ok && (name != "phi" || (i_zero && each));
        pass &= ok;
        notes.push(format!(
            "{name}: {:?} witness {:?}, A^3 zero {a_zero}, I^2 zero at checkpoints {i_zero}, every return {each}",
            prof.classification.tag, prof.classification.witness_xi
        ));
    }
    outcome(pass, notes.join("; "))
}

fn c11_frequency1() -> Outcome {
    let eps = Exponent::new(1, 1).unwrap();
    let mut cfg = ProfileConfig::new(2560, &[2.0], &[2.0]);
    cfg.checkpoints = (0..=8).map(|k| 10 << k).collect();
    let prof = frequency_profile_vwa(eps, 0, 1, &cfg).unwrap();
    let cps = &prof.checkpoints;
    let a_inc = cps.len() == 9 && cps.windows(2).all(|w| w[1].a_n > w[0].a_n);
    let i_inc = cps.windows(2).all(|w| w[1].i_n_complement[0] < w[0].i_n_complement[0] && w[1].i_n[0] >= w[0].i_n[0]);
    let complete = prof.status == ProfileStatus::Complete;

    // exact inequality over the whole exactly constructible prefix
    let mut n = 24;
    let e = loop {
        match construct_vwa(eps, 0, 1, n) {
            Ok(e) => break e,
            Err(_) => n -= 1,
        }
    };
    let check = check_vwa(&e, eps, n - 2).unwrap();
    let holds = check.holds.iter().all(|&h| h);
    // the magnitude path starts from the same quotients
    let mags = vwa_magnitudes(eps, 0, 1, n).unwrap();
    let prefix = mags.iter().zip(&e.quotients).filter(|(m, _)| matches!(m, Quotient::Exact(_))).count();
    let agree = mags.iter().zip(&e.quotients).all(|(m, q)| match m {
        Quotient::Exact(a) => a == q,
        Quotient::Magnitude(mg) => (mg.ln_abs.to_f64() - ln_big(q)).abs() < 1e-9 * ln_big(q),
    });
    let last = cps.last().unwrap();
    outcome(
        a_inc && i_inc && complete && holds && agree,
        format!(
            "checkpoints {:?}; A_N strictly increasing {a_inc} (A_2560 = {}); I_N^2 strictly increasing {i_inc} (1-I = {}); \
             |x-p/q|<q^-3 exact at {} of {} indices ({prefix} exact quotients agree {agree})",
            cps.iter().map(|c| c.n).collect::<Vec<_>>(),
            last.a_n,
            last.i_n_complement[0],
            check.holds.iter().filter(|&&h| h).count(),
            check.holds.len()
        ),
    )
}

fn c12_minus11() -> Outcome {
    let p = CfParams::minus_one_one();
    let cal = fixture(&p);
    let c = cal.stats.slack_c.unwrap();
    let cp = c_prime();
    let region = Region::MinusOneOne;
    let (mut total, mut low_bad, mut high_bad, mut high_checked) = (0usize, 0usize, 0usize, 0usize);
    let mut min_margin = f64::INFINITY;
    for x in random_surds(cal.seed, cal.stats.inputs) {
        let (orbit, _) = surd_orbit(&x, &p, &region, cal.stats.returns_per_input).unwrap();
        let q: Vec<BigInt> = orbit.steps.iter().map(|s| s.quotient.clone()).collect();
        let e = CfExpansion::new(&p, q, false);
        for (j, s) in orbit.steps.iter().enumerate() {
            total += 1;
            let t = s.geometry.return_time().to_f64();
            let lower = 2.0 * ln_big(&s.quotient) - cp;
            min_margin = min_margin.min(t - lower);
            if t < lower - LOWER_BOUND_TOL {
                low_bad += 1;
            }
            if let Ok((_, upper)) = return_time_bounds_minus11(&e, j, c, cp) {
                high_checked += 1;
                if t > upper {
                    high_bad += 1;
                }
            }
        }
    }
    // c' against the arc of C from i to e^{i pi/3}
    let z = UpperHalfPoint::new(0.0, 1.0).unwrap();
    let w = UpperHalfPoint::new(0.5, 3f64.sqrt() / 2.0).unwrap();
    let arc = distance((0.0, 1.0), (0.5, 3f64.sqrt() / 2.0));
    let arc_lib = hyperbolic_distance(&z, &w);
    let arc_ok = (arc - cp).abs() < ARC_TOL && (arc_lib - cp).abs() < ARC_TOL;
    let pass = total == cal.stats.total_returns && low_bad == 0 && high_bad == 0 && arc_ok;
    outcome(
        pass,
        format!(
            "{total} returns (seed {}), lower violations {low_bad} (min margin {min_margin:.4}), upper violations {high_bad} of {high_checked} with c={c:.4}; \
             arc {arc:.15} vs c' {cp:.15}",
            cal.seed
        ),
    )
}

fn c13_rationals() -> Outcome {
    let mut r = rng(13);
    let pairs: Vec<(CfParams, Region)> = [CfParams::nearest(), CfParams::ab_ratio(-2, 5, 3, 5), CfParams::minus_one_one()]
        .into_iter()
        .map(|p| {
            let region = if p.is_minus_one_one() { Region::MinusOneOne } else { fixture(&p).region() };
            (p, region)
        })
        .collect();
    let (mut n, mut bad_exp, mut bad_prof) = (0usize, 0usize, 0usize);
    for (p, region) in &pairs {
        for _ in 0..100 {
            let x = random_rational(&mut r, 10, 10_000);
            n += 1;
            if !expand_ab(&x, p, 10_000).unwrap().terminated {
                bad_exp += 1;
            }
            let cfg = ProfileConfig::new(1000, &[2.0], &[3.0]);
            let prof = frequency_profile_in(&x, p, region, &cfg).unwrap();
            if !matches!(prof.status, ProfileStatus::DegenerateRational { .. }) {
                bad_prof += 1;
            }
        }
    }
    // oracle fraction on the geodesic from x - 3 to x
    let (d, step) = (2.0, 0.01);
    let ts = [50.0, 100.0, 200.0];
    let (mut mono_bad, mut deficit_bad) = (0usize, 0usize);
    let mut lowest: f64 = 1.0;
    let mut r = rng(14);
    for _ in 0..20 {
        let x = random_rational(&mut r, 10, 1000);
        let g = Geodesic::new(x.add_int(&BigInt::from(-3)), x.clone()).unwrap();
        let est: Vec<_> = ts.iter().map(|&t| cusp_time_numeric(&g, t, d, step).unwrap()).collect();
        if !est.windows(2).all(|w| w[1].fraction > w[0].fraction) {
            mono_bad += 1;
        }
        lowest = lowest.min(est[2].fraction);
        // once in the cusp the time below y = d stays fixed, so f(T) = 1 - t0/T
        let deficit: Vec<f64> = est.iter().zip(ts).map(|(e, t)| t * (1.0 - e.fraction)).collect();
        let slack = 4.0 * step;
        if deficit.windows(2).any(|w| (w[1] - w[0]).abs() > slack) {
            deficit_bad += 1;
        }
    }
    outcome(
        bad_exp == 0 && bad_prof == 0 && mono_bad == 0 && deficit_bad == 0,
        format!(
            "{n} rationals: {bad_exp} unterminated, {bad_prof} non-degenerate profiles; 20 oracle runs, {mono_bad} non-increasing, \
             {deficit_bad} with drifting time below d, min f(200) {lowest:.4}"
        ),
    )
}

fn main() {
    let criteria: [(usize, &str, fn() -> Outcome); 13] = [
        (1, "alternation identity", c1_alternation),
        (2, "nearest-integer equivalence", c2_hurwitz),
        (3, "convergent laws", c3_convergents),
        (4, "finiteness and cycles", c4_cycles),
        (5, "attractor structure", c5_attractor),
        (6, "boundary coordinate signs", c6_signs),
        (7, "return time vs 2 log|a_j|", c7_return_deviation),
        (8, "excursion thresholds", c8_thresholds),
        (9, "closed form vs oracle", c9_oracle),
        (10, "frequency-0 fixtures", c10_frequency0),
        (11, "frequency-1 fixture", c11_frequency1),
        (12, "(-1,1) return time bounds", c12_minus11),
        (13, "rational degeneracy", c13_rationals),
    ];
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let start = Instant::now();
    let mut failed = vec![];
    let mut ran = vec![];
    for (id, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t0 = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{status} criterion {id:>2} ({name}) [{:.1}s]: {}", t0.elapsed().as_secs_f64(), o.detail);
        ran.push(id);
        if !o.pass {
            failed.push(id);
        }
    }
    let expected: Vec<usize> = KNOWN_FAILURES.iter().copied().filter(|k| ran.contains(k)).collect();
    println!(
        "{} of {} criteria pass in {:.1}s; failing {:?}, documented failures {:?}",
        ran.len() - failed.len(),
        ran.len(),
        start.elapsed().as_secs_f64(),
        failed,
        expected
    );
    if failed != expected {
        println!("failures differ from the documented list");
        std::process::exit(1);
    }
}

