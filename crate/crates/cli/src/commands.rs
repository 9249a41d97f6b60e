use std::fs::File;
use std::io::{BufWriter, Write};
use std::ops::Range;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use chsh_core::bell::{correlation_tensor, horodecki_value, optimize_tensor, quad_by_trace, BellQuad, Extremum, LHV_BOUND, TSIRELSON};
use chsh_core::explore::{scan_directions_range, scan_star_range, star_partner_slack, summarize, Quarter, ScanPoint, StarConfig};
use chsh_core::geometry::{AdmissibleBox, Settings};
use chsh_core::rng::stream;
use chsh_core::states::{random_mixed, random_pure, DensityMatrix};
use chsh_core::tradeoff::{
    ellipse_case_from_scene, maximize_m2sum, operator_identity_residuals, pair_radius, random_admissible_tuple, variances, EllipseCase,
    PrincipalAxes, CIRCLE_TOL, IDENTITY_TOL,
};
use chsh_core::Error;

use crate::args::{Common, EllipseArgs, EvalArgs, Ext, Format, OptimizeArgs, Output, ScanArgs, StarArgs, UncertaintyArgs, VerifyArgs};
use crate::error::{exit, CliError};
use crate::output::{render_svg, summary_json, write_csv, write_json};
use crate::spec::density_matrix_json;

/// Samples per parallel work item. Results never depend on it.
pub const CHUNK: u64 = 1024;
/// Slack on the star's pointwise partner bound.
pub const STAR_TOL: f64 = 1e-6;

pub struct Ctx<'a> {
    pub env_seed: Option<String>,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn seed(&self, common: &Common) -> Result<Option<u64>, CliError> {
        if let Some(s) = common.seed {
            return Ok(Some(s));
        }
        match &self.env_seed {
            None => Ok(None),
            Some(v) => v.trim().parse().map(Some).map_err(|_| CliError::config(format!("CHSH_SEED: `{v}` is not an unsigned integer"))),
        }
    }

    fn require_seed(&self, common: &Common, what: &str) -> Result<u64, CliError> {
        self.seed(common)?.ok_or_else(|| CliError::config(format!("{what} needs a seed (--seed, config `seed`, or CHSH_SEED)")))
    }

    fn print_json(&mut self, v: &Value) -> Result<(), CliError> {
        write_pretty(&mut *self.stdout, v).map_err(|e| CliError::io("<stdout>", e))
    }
}

fn write_pretty(w: &mut dyn Write, v: &Value) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, v)?;
    writeln!(w)
}

fn quad_json(q: &BellQuad) -> Value {
    json!({ "i0": q.i0, "i1": q.i1, "i2": q.i2, "i3": q.i3 })
}

fn pairs_json(q: &BellQuad) -> Value {
    let mut m = serde_json::Map::new();
    for mu in 0..4 {
        for nu in mu + 1..4 {
            m.insert(format!("{mu}{nu}"), json!(pair_radius(q, mu, nu).expect("distinct indices")));
        }
    }
    Value::Object(m)
}

fn settings_json(s: &Settings) -> Value {
    json!(s.components())
}

/// Runs `f` over `0..n` in chunks on `threads` workers, concatenating the
/// results in index order.
fn par_ranges<T, F>(n: u64, threads: Option<usize>, f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(Range<u64>) -> Result<Vec<T>, CliError> + Sync + Send,
{
    let chunks: Vec<Range<u64>> = (0..n.div_ceil(CHUNK)).map(|k| k * CHUNK..((k + 1) * CHUNK).min(n)).collect();
    let run = || chunks.par_iter().cloned().map(&f).collect::<Result<Vec<Vec<T>>, CliError>>();
    let parts = match threads {
        Some(0) => return Err(CliError::config("threads must be at least 1")),
        Some(t) => {
            rayon::ThreadPoolBuilder::new().num_threads(t).build().map_err(|e| CliError::config(format!("threads: {e}")))?.install(run)?
        }
        None => run()?,
    };
    Ok(parts.into_iter().flatten().collect())
}

pub fn eval(ctx: &mut Ctx, a: &EvalArgs) -> Result<i32, CliError> {
    let rho = a.state.resolve()?;
    let s = a.settings.resolve(&rho, ctx.seed(&a.common)?)?;
    let q = quad_by_trace(&rho, &s);
    let doc = json!({
        "settings": settings_json(&s),
        "quad": quad_json(&q),
        "pair_radius": pairs_json(&q),
        "max_pair_radius": q.max_pair_radius(),
        "horodecki": horodecki_value(&correlation_tensor(&rho)?),
        "lhv_bound": LHV_BOUND,
    });
    ctx.print_json(&doc)?;
    Ok(exit::OK)
}

pub fn optimize(ctx: &mut Ctx, a: &OptimizeArgs) -> Result<i32, CliError> {
    let rho = a.state.resolve()?;
    let t = correlation_tensor(&rho)?;
    let which = match a.extremum {
        Ext::Max => Extremum::Max,
        Ext::Min => Extremum::Min,
    };
    let seed = ctx.seed(&a.common)?.unwrap_or(0);
    let opt = optimize_tensor(&t, a.mu, which, &mut stream(seed, 0))?;
    let q = quad_by_trace(&rho, &opt.settings);
    let doc = json!({
        "mu": a.mu,
        "extremum": if which == Extremum::Max { "max" } else { "min" },
        "value": opt.value,
        "settings": settings_json(&opt.settings),
        "quad": quad_json(&q),
        "horodecki": horodecki_value(&t),
    });
    ctx.print_json(&doc)?;
    Ok(exit::OK)
}

/// One verification sample and what it found.
struct Sample {
    point: ScanPoint,
    identity: f64,
    ellipse: EllipseOutcome,
    failures: Vec<Value>,
}

enum EllipseOutcome {
    Checked(f64),
    Singular,
    Skipped,
}

fn verify_sample(seed: u64, idx: u64) -> Sample {
    let mut rng = stream(seed, idx);
    let rank = rng.random_range(1..=4);
    let rho = random_mixed(&mut rng, rank).expect("rank in 1..=4");
    let s = Settings::random(&mut rng);
    let q = quad_by_trace(&rho, &s);
    let identity = operator_identity_residuals(&s).max();
    let mut failures = Vec::new();
    let witness = |check: &str, detail: Value, rho: &DensityMatrix| {
        json!({
            "idx": idx,
            "check": check,
            "detail": detail,
            "state": density_matrix_json(rho),
            "settings": settings_json(&s),
            "quad": quad_json(&q),
        })
    };
    if q.max_pair_radius() > 8.0 + CIRCLE_TOL || q.max_abs() > TSIRELSON + CIRCLE_TOL {
        failures.push(witness("circle", json!({ "max_pair_radius": q.max_pair_radius() }), &rho));
    }
    if identity > IDENTITY_TOL {
        failures.push(witness("identity", json!({ "residual": identity }), &rho));
    }

    let pure = random_pure(&mut rng);
    let ellipse = match ellipse_case_from_scene(&pure, &s) {
        Ok(sc) => {
            let mut bad = Vec::new();
            if !sc.in_ellipse() {
                bad.push(("ellipse", json!({ "excess": sc.excess, "i0": sc.i0, "i1": sc.i1 })));
            }
            if !sc.magnitudes_bounded() {
                let (d, dp) = sc.solved.as_ref().map(|m| (m.d, m.dp)).unwrap_or((f64::NAN, f64::NAN));
                bad.push(("magnitudes", json!({ "d": d, "dp": dp })));
            }
            if !sc.case.passes() {
                bad.push(("semi_axis", json!({ "v2": sc.case.gap.v2 })));
            }
            for (check, detail) in bad {
                failures.push(witness(check, detail, &pure));
            }
            if sc.solved.is_ok() {
                EllipseOutcome::Checked(sc.case.gap.v2)
            } else {
                EllipseOutcome::Singular
            }
        }
        Err(Error::DegenerateBob | Error::NoBranch(_)) => EllipseOutcome::Skipped,
        Err(e) => {
            failures.push(witness("pipeline", json!({ "error": e.to_string() }), &pure));
            EllipseOutcome::Skipped
        }
    };
    Sample { point: ScanPoint::from_quad(idx, &q), identity, ellipse, failures }
}

fn parse_point(s: &str) -> Result<(f64, f64), CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::config("inject-fake-point: expected x,y"))?;
    match v[..] {
        [x, y] => Ok((x, y)),
        _ => Err(CliError::config("inject-fake-point: expected x,y")),
    }
}

pub fn verify(ctx: &mut Ctx, a: &VerifyArgs) -> Result<i32, CliError> {
    if a.n == 0 {
        return Err(CliError::config("n must be at least 1"));
    }
    let seed = ctx.require_seed(&a.common, "verify")?;
    let fake = a.inject_fake_point.as_deref().map(parse_point).transpose()?;
    let samples = par_ranges(a.n, a.common.threads, |r| Ok(r.map(|k| verify_sample(seed, k)).collect()))?;

    let mut points: Vec<ScanPoint> = samples.iter().map(|s| s.point).collect();
    let mut failures: Vec<Value> = samples.iter().flat_map(|s| s.failures.iter().cloned()).collect();
    if let Some((x, y)) = fake {
        let p = ScanPoint::from_quad(a.n, &BellQuad::from_array([x, y, 0.0, 0.0]));
        if !p.in_circle() {
            failures.push(
                json!({ "idx": a.n, "check": "circle", "injected": true, "quad": quad_json(&BellQuad::from_array([x, y, 0.0, 0.0])) }),
            );
        }
        points.push(p);
    }
    let summary = summarize(&points, seed);
    let identity = samples.iter().map(|s| s.identity).fold(0.0, f64::max);
    let (mut checked, mut singular, mut skipped, mut max_v2) = (0u64, 0u64, 0u64, f64::NEG_INFINITY);
    for s in &samples {
        match s.ellipse {
            EllipseOutcome::Checked(v2) => {
                checked += 1;
                max_v2 = max_v2.max(v2);
            }
            EllipseOutcome::Singular => singular += 1,
            EllipseOutcome::Skipped => skipped += 1,
        }
    }
    let max_pair = samples.iter().map(|s| {
        let p = &s.point;
        BellQuad::from_array([p.i0, p.i1, p.i2, p.i3]).max_pair_radius()
    });
    let first = failures.first().cloned();
    let doc = json!({
        "summary": summary_json(&summary),
        "max_pair_radius": max_pair.fold(0.0, f64::max),
        "max_identity_residual": identity,
        "ellipse": { "checked": checked, "singular": singular, "skipped": skipped, "max_v2": max_v2 },
        "violations": failures.len(),
        "first_counterexample": first,
    });
    ctx.print_json(&doc)?;
    match first {
        None => Ok(exit::OK),
        Some(c) => {
            let _ = writeln!(ctx.stderr, "counterexample: {c}");
            Ok(exit::COUNTEREXAMPLE)
        }
    }
}

fn write_output(
    ctx: &mut Ctx,
    o: &Output,
    points: &[ScanPoint],
    summary: &chsh_core::explore::ScanSummary,
    title: &str,
) -> Result<(), CliError> {
    let render = |w: &mut dyn Write| -> std::io::Result<()> {
        match o.format {
            Format::Csv => write_csv(points, w),
            Format::Json => write_json(points, summary, w),
            Format::Svg => w.write_all(render_svg(points, title).as_bytes()),
        }
    };
    match &o.out {
        None => render(&mut *ctx.stdout).map_err(|e| CliError::io("<stdout>", e)),
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            let mut w = BufWriter::new(file);
            render(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))?;
            ctx.print_json(&json!({ "out": path_str(path), "summary": summary_json(summary) }))
        }
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

pub fn scan(ctx: &mut Ctx, a: &ScanArgs) -> Result<i32, CliError> {
    if a.n == 0 {
        return Err(CliError::config("n must be at least 1"));
    }
    let seed = ctx.require_seed(&a.common, "scan")?;
    let rho = a.state.resolve()?;
    let (v, theta) = a.state.tags();
    let mut points = par_ranges(a.n, a.common.threads, |r| Ok(scan_directions_range(&rho, r, seed)))?;
    for p in &mut points {
        p.v = v;
        p.theta = theta;
    }
    let summary = summarize(&points, seed);
    write_output(ctx, &a.output, &points, &summary, "random-direction scan")?;
    Ok(if summary.passes() { exit::OK } else { exit::COUNTEREXAMPLE })
}

pub fn star(ctx: &mut Ctx, a: &StarArgs) -> Result<i32, CliError> {
    if a.n == 0 {
        return Err(CliError::config("n must be at least 1"));
    }
    let seed = ctx.require_seed(&a.common, "star")?;
    let cfg = StarConfig { n_per_quarter: a.n, seed, v_range: (a.v_min, a.v_max), theta_range: (a.theta_min, a.theta_max) };
    let points = par_ranges(cfg.total(), a.common.threads, |r| Ok(scan_star_range(&cfg, r)?))?;
    let summary = summarize(&points, seed);
    let worst = points.iter().filter_map(star_partner_slack).fold(f64::INFINITY, f64::min);
    write_output(ctx, &a.output, &points, &summary, "eight-pointed star")?;
    if a.output.out.is_some() {
        let counts: Vec<Value> =
            Quarter::ALL.iter().map(|q| json!({ q.name(): points.iter().filter(|p| p.quarter == Some(*q)).count() })).collect();
        ctx.print_json(&json!({ "quarters": counts, "min_partner_slack": worst }))?;
    }
    Ok(if summary.passes() && worst >= -STAR_TOL { exit::OK } else { exit::COUNTEREXAMPLE })
}

fn axes_json(ax: &Result<PrincipalAxes, Error>) -> Value {
    match ax {
        Ok(a) => json!({ "xi": a.xi, "a_p": a.a_p, "b_p": a.b_p, "u2": a.u2, "v2": a.v2 }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

pub fn ellipse(ctx: &mut Ctx, a: &EllipseArgs) -> Result<i32, CliError> {
    let case = match a.tuple.as_deref() {
        Some("random") => {
            let seed = ctx.require_seed(&a.common, "a random tuple")?;
            let t = random_admissible_tuple(&mut stream(seed, 0));
            EllipseCase::from_tuple(&t, a.theta)?
        }
        Some(other) => return Err(CliError::config(format!("tuple: unknown value `{other}` (random)"))),
        None => {
            let named = [("alpha", a.alpha), ("alpha-p", a.alpha_p), ("beta", a.beta), ("delta", a.delta), ("delta-p", a.delta_p)];
            let missing: Vec<&str> = named.iter().filter(|(_, v)| v.is_none()).map(|(k, _)| *k).collect();
            if !missing.is_empty() {
                return Err(CliError::config(format!("ellipse: missing {}", missing.join(", "))));
            }
            let [al, ap, be, de, dp] = named.map(|(_, v)| v.expect("checked"));
            EllipseCase::new(al, ap, be, de, dp, a.theta)?
        }
    };
    let c = &case.coeffs;
    let vertices: Vec<Value> = AdmissibleBox::vertices(case.alpha, case.alpha_p, case.beta)
        .iter()
        .zip(case.vertex_deltas)
        .map(|(&(x, y, u, v), closed)| {
            let gap = chsh_core::tradeoff::vertex_delta_by_gap(case.alpha, case.alpha_p, case.beta, x == 1, y == 1);
            json!({ "x": x, "y": y, "u": u, "v": v, "delta_prime": gap, "closed_form": closed })
        })
        .collect();
    let pass = case.passes();
    let doc = json!({
        "alpha": case.alpha, "alpha_p": case.alpha_p, "beta": case.beta, "delta": case.delta, "delta_p": case.delta_p, "theta": case.theta,
        "u": c.u, "v": c.v, "A": c.a, "B": c.b, "C": c.c, "r2": c.r2,
        "even": axes_json(&case.even),
        "odd": axes_json(&case.odd),
        "L": case.gap.l, "R": case.gap.r,
        "delta_gap": case.gap.delta, "delta_gap_prime": case.gap.delta_prime, "V2": case.gap.v2,
        "vertices": vertices,
        "verdict": if pass { "PASS" } else { "FAIL" },
    });
    ctx.print_json(&doc)?;
    Ok(if pass { exit::OK } else { exit::COUNTEREXAMPLE })
}

pub fn uncertainty(ctx: &mut Ctx, a: &UncertaintyArgs) -> Result<i32, CliError> {
    let rho = a.state.resolve()?;
    let seed = ctx.seed(&a.common)?;
    let s = a.settings.resolve(&rho, seed)?;
    let r = variances(&rho, &s);
    let (best, value) = maximize_m2sum(&rho, &mut stream(seed.unwrap_or(0), 1))?;
    let doc = json!({
        "settings": settings_json(&s),
        "mean0": r.mean0, "mean1": r.mean1,
        "var0": r.var0, "var1": r.var1,
        "var_sum": r.var0 + r.var1,
        "m2sum": r.m2sum,
        "maximized": { "m2sum": value, "settings": settings_json(&best) },
    });
    ctx.print_json(&doc)?;
    Ok(exit::OK)
}
