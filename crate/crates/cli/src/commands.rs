use std::fs;
use std::path::Path;
use std::process::ExitCode;

use cnrange::closedform::{is_ellipse, EllipseDescriptor, NON_ELLIPSE_RTOL};
use cnrange::linalg::HERMITIAN_TOL;
use cnrange::oracle::{hull_compare, sample_values, HullReport};
use cnrange::preserver::{
    projection_fixture, verify_pair, verify_product_preservation, weak_zero_product_check, PreserverMap, RuleName,
    TrialEntry,
};
use cnrange::range::{boundary, is_symmetric, radius, selfadjoint_range, RegionShape};
use cnrange::rng::SplitMix64;
use cnrange::{AmbientDim, RegimeClass};
use serde::Serialize;

use crate::error::{CliError, EXIT_MISMATCH};
use crate::input::{self, Check, Expect, Fixture, Variant};
use crate::{svg, ClassifyArgs, EllipseFitArgs, Format, OracleArgs, RangeArgs, VerifyArgs};

fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| CliError::usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn json_line<T: Serialize>(value: &T) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn status(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_MISMATCH)
    }
}

#[derive(Serialize)]
struct RangeSummary {
    c: Vec<f64>,
    ambient: String,
    grid: usize,
    radius: f64,
    shape: RegionShape,
    is_degenerate: bool,
    is_symmetric: Option<bool>,
    interval: Option<[f64; 2]>,
    is_ellipse: bool,
    ellipse_residual: f64,
    ellipse: Option<EllipseDescriptor>,
    oracle: Option<HullReport>,
}

pub fn range(args: &RangeArgs) -> Result<ExitCode, CliError> {
    let job = input::load(&args.op)?;
    let region = boundary(&job.operator, &job.c, job.grid)?;
    let fit = is_ellipse(&region, NON_ELLIPSE_RTOL);
    let interval = if job.operator.block().is_hermitian(HERMITIAN_TOL) {
        let iv = selfadjoint_range(&job.operator, &job.c)?;
        Some([iv.lo, iv.hi])
    } else {
        None
    };
    let cloud = if args.samples > 0 {
        Some(sample_values(&job.operator, &job.c, args.samples, args.seed)?)
    } else {
        None
    };
    let oracle = cloud.as_ref().map(|cl| hull_compare(cl, &region)).transpose()?;
    let summary = RangeSummary {
        c: job.c.entries().to_vec(),
        ambient: job.operator.ambient().to_string(),
        grid: job.grid,
        radius: radius(&region),
        shape: region.shape(),
        is_degenerate: region.is_degenerate(),
        is_symmetric: is_symmetric(&region, args.tol).ok(),
        interval,
        is_ellipse: fit.is_ellipse,
        ellipse_residual: fit.residual,
        ellipse: fit.is_ellipse.then_some(fit.best_fit),
        oracle,
    };
    let summary_text = json_line(&summary)?;
    let artifact = match args.format {
        Format::Json => None,
        Format::Csv => {
            let mut s = String::from("re,im\n");
            for z in region.polyline() {
                s.push_str(&format!("{:e},{:e}\n", z.re, z.im));
            }
            Some(s)
        }
        Format::Svg => {
            let pts = cloud.as_ref().map(|c| c.points.as_slice()).unwrap_or(&[]);
            Some(svg::render(region.polyline(), pts, summary.ellipse.as_ref()))
        }
    };
    match (artifact, args.out.as_deref()) {
        (None, out) => emit(out, &summary_text)?,
        (Some(body), Some(path)) => {
            emit(Some(path), &body)?;
            emit(None, &summary_text)?;
        }
        (Some(body), None) => emit(None, &body)?,
    }
    Ok(status(summary.oracle.is_none_or(|r| r.containment)))
}

#[derive(Serialize)]
struct Classification {
    c: Vec<f64>,
    regime: &'static str,
    p: Option<usize>,
    sum: f64,
    norm: bool,
}

pub fn classify(args: &ClassifyArgs) -> Result<ExitCode, CliError> {
    let c = input::coefficients(&args.c)?;
    let (regime, p) = match c.regime() {
        RegimeClass::CaseI => ("CaseI", None),
        RegimeClass::CaseII { p } => ("CaseII", Some(p)),
        RegimeClass::CaseIII => ("CaseIII", None),
    };
    let out = Classification { c: c.entries().to_vec(), regime, p, sum: c.sum(), norm: c.radius_is_norm() };
    if args.format == Some(Format::Json) {
        emit(None, &json_line(&out)?)?;
    } else {
        let mut s = format!("regime: {regime}\n");
        if let Some(p) = p {
            s.push_str(&format!("p: {p}\n"));
        }
        s.push_str(&format!("sum: {}\nnorm: {}\n", out.sum, if out.norm { "yes" } else { "no" }));
        emit(None, &s)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn regime_family(r: RegimeClass) -> &'static str {
    match r {
        RegimeClass::CaseI => "CaseI",
        RegimeClass::CaseII { .. } => "CaseII",
        RegimeClass::CaseIII => "CaseIII",
    }
}

pub fn verify(args: &VerifyArgs) -> Result<ExitCode, CliError> {
    let map = input::read_map(&args.map)?;
    let c = input::coefficients(&args.c)?;
    if args.trials == 0 {
        return Err(CliError::usage("--trials must be positive"));
    }
    let n = map.n;
    let u = input::resolve_unitary(&map, &args.map, SplitMix64::stream(args.seed, u64::MAX).next_u64())?;
    let phi = match map.variant {
        Variant::CaseOne => PreserverMap::case_one(u, map.sign)?,
        Variant::CaseTwo => PreserverMap::case_two(u, map.rule.unwrap_or(RuleName::NegativeOnRankOne).rule())?,
        Variant::CaseThree => PreserverMap::case_three(u, map.rule.unwrap_or(RuleName::Plus).rule(), map.use_i)?,
        Variant::Hybrid => PreserverMap::hybrid(n)?,
        Variant::Transpose => PreserverMap::transpose(u)?,
    };
    let family = regime_family(c.regime());
    if let Some(map_family) = phi.regime_family() {
        // A map from another regime is only meaningful as a negative experiment.
        if map_family != family && map.expect == Expect::Pass {
            return Err(CliError::usage(format!(
                "map/regime mismatch: {map_family} map cannot be expected to pass for c = {c} ({family})"
            )));
        }
    }

    let (lines, observed_pass, detail) = match map.check {
        Check::Product => {
            let entries = match map.fixture {
                Fixture::Random => verify_product_preservation(&phi, &c, args.trials, n, args.seed, args.tol)?.entries,
                Fixture::Projection => {
                    let p = map.p.unwrap_or(match c.regime() {
                        RegimeClass::CaseII { p } => p,
                        _ => 1,
                    });
                    let a = projection_fixture(p, n)?;
                    let (pass, max_dev) = verify_pair(&phi, &a, &a, &c, AmbientDim::Finite(n), args.tol)?;
                    vec![TrialEntry { trial: 0, pass, max_dev, seed: args.seed }]
                }
            };
            let failures = entries.iter().filter(|e| !e.pass).count();
            let lines = entries.iter().map(serde_json::to_string).collect::<Result<Vec<_>, _>>()?;
            (lines, failures == 0, format!("{} trials, {failures} failed", entries.len()))
        }
        Check::WeakZeroProduct => {
            let rep = weak_zero_product_check(&phi, args.trials, n, args.seed)?;
            let lines = rep.entries.iter().map(serde_json::to_string).collect::<Result<Vec<_>, _>>()?;
            let failures = rep.entries.iter().filter(|e| !e.pass).count();
            (lines, rep.all_pass(), format!("{} checks, {failures} failed", rep.entries.len()))
        }
    };
    let mut report = lines.join("\n");
    report.push('\n');
    emit(args.out.as_deref(), &report)?;
    let expected_pass = map.expect == Expect::Pass;
    let verdict = if observed_pass == expected_pass { "as expected" } else { "MISMATCH" };
    eprintln!(
        "cnr verify: expected {}, observed {} ({detail}): {verdict}",
        if expected_pass { "pass" } else { "fail" },
        if observed_pass { "pass" } else { "fail" },
    );
    Ok(status(observed_pass == expected_pass))
}

#[derive(Serialize)]
struct OracleSummary {
    samples: usize,
    seed: u64,
    #[serde(flatten)]
    report: HullReport,
}

pub fn oracle(args: &OracleArgs) -> Result<ExitCode, CliError> {
    if args.samples == 0 {
        return Err(CliError::usage("--samples must be positive"));
    }
    if args.format == Format::Svg {
        return Err(CliError::usage("oracle writes json or csv; use `cnr range --samples N --format svg` for plots"));
    }
    let job = input::load(&args.op)?;
    let region = boundary(&job.operator, &job.c, job.grid)?;
    let cloud = sample_values(&job.operator, &job.c, args.samples, args.seed)?;
    let report = hull_compare(&cloud, &region)?;
    let summary = json_line(&OracleSummary { samples: cloud.len(), seed: args.seed, report })?;
    match (args.format, args.out.as_deref()) {
        (Format::Csv, Some(path)) => {
            emit(Some(path), &cloud.to_csv())?;
            emit(None, &summary)?;
        }
        (Format::Csv, None) => emit(None, &cloud.to_csv())?,
        (_, out) => emit(out, &summary)?,
    }
    Ok(status(report.containment))
}

#[derive(Serialize)]
struct FitSummary {
    is_ellipse: bool,
    residual: f64,
    ellipse: EllipseDescriptor,
    center: [f64; 2],
    semi_major: f64,
}

pub fn ellipse_fit(args: &EllipseFitArgs) -> Result<ExitCode, CliError> {
    let job = input::load(&args.op)?;
    let region = boundary(&job.operator, &job.c, job.grid)?;
    let fit = is_ellipse(&region, args.tol);
    let center = fit.best_fit.center();
    let out = FitSummary {
        is_ellipse: fit.is_ellipse,
        residual: fit.residual,
        ellipse: fit.best_fit,
        center: [center.re, center.im],
        semi_major: fit.best_fit.semi_major(),
    };
    emit(args.out.as_deref(), &json_line(&out)?)?;
    Ok(ExitCode::SUCCESS)
}
