use std::io::Write;

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankframe::chartfile::load_chart;
use rankframe::dynamics::{offdiag_decay, riccati_solve, Branch, RiccatiSolution};
use rankframe::frame::{ricci_frame, PointClass};
use rankframe::metric::{DerivativeSource, MetricChart, Vec3};
use rankframe::transport::{integrate_geodesic, rank_deficit, ExitInfo};
use rankframe::zoo::{zoo_get, zoo_get_ref, zoo_list, Known};
use rankframe::{Error, Point, Tolerances};
use rayon::prelude::*;
use serde::Serialize;

use crate::report::{ChartInfo, Report, RowError, Tool, Warning, SCHEMA};
use crate::Global;

pub enum Outcome {
    Complete,
    AllRowsFailed,
}

type CmdResult = Result<Outcome, Box<dyn std::error::Error>>;

#[derive(Debug, Clone, Args)]
pub struct ChartRef {
    /// Builtin chart, optionally with parameters, e.g. `berger(0.6)`.
    #[arg(long, conflicts_with = "chart_file", required_unless_present = "chart_file")]
    pub chart: Option<String>,

    /// Chart definition file (JSON).
    #[arg(long)]
    pub chart_file: Option<String>,

    /// Differentiate chart-file expressions exactly instead of by finite differences.
    #[arg(long)]
    pub exact_derivatives: bool,
}

struct Resolved {
    chart: MetricChart,
    info: ChartInfo,
    epsilon: Option<f64>,
    base_point: Point,
}

fn resolve(r: &ChartRef) -> Result<Resolved, Error> {
    if let Some(path) = &r.chart_file {
        let loaded = load_chart(path, r.exact_derivatives)?;
        let b = loaded.chart.domain.sample_box();
        let base_point = std::array::from_fn(|a| 0.5 * (b.lo[a] + b.hi[a]));
        let info = ChartInfo {
            name: loaded.chart.name.clone(),
            params: vec![],
            source: "file",
            path: Some(path.clone()),
            derivatives: derivative_name(loaded.chart.has_analytic_derivatives()),
        };
        return Ok(Resolved {
            chart: loaded.chart,
            info,
            epsilon: loaded.epsilon,
            base_point,
        });
    }
    let reference = r.chart.as_deref().unwrap_or_default();
    let entry = zoo_get_ref(reference)?;
    Ok(Resolved {
        info: ChartInfo {
            name: entry.name.to_string(),
            params: entry.params.clone(),
            source: "zoo",
            path: None,
            derivatives: derivative_name(entry.chart.has_analytic_derivatives()),
        },
        epsilon: Some(entry.known.epsilon),
        base_point: entry.base_point,
        chart: entry.chart,
    })
}

fn derivative_name(analytic: bool) -> &'static str {
    if analytic {
        "analytic"
    } else {
        "finite-difference"
    }
}

fn tolerances(g: &Global) -> Tolerances {
    Tolerances {
        class: g.tol,
        ..Tolerances::default()
    }
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got `{s}`"));
    }
    let mut out = [0.0f64; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("`{p}` is not a number"))?;
        if !o.is_finite() {
            return Err(format!("`{p}` is not finite"));
        }
    }
    Ok(out)
}

fn need_epsilon(given: Option<f64>, chart: &Resolved) -> Result<f64, Error> {
    given
        .or(chart.epsilon)
        .ok_or_else(|| Error::InvalidInput("no --epsilon given and the chart file does not set one".into()))
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub chart: ChartRef,

    /// Target sectional curvature (defaults to the chart's own epsilon).
    #[arg(short, long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,

    /// Point `x,y,z`; repeat for several points.
    #[arg(long, value_parser = parse_triple, allow_negative_numbers = true)]
    pub point: Vec<[f64; 3]>,

    /// Classify an `n×n×n` interior lattice of the chart's domain box.
    #[arg(long, conflicts_with = "point")]
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
struct ClassifyRow {
    index: usize,
    point: Point,
    status: &'static str,
    error: Option<RowError>,
    class: Option<PointClass>,
    lambda: Option<f64>,
    lambda12: Option<f64>,
    big_lambda: Option<f64>,
    epsilon: f64,
    m: Option<f64>,
    ricci: Option<[f64; 3]>,
    ricci_residual: Option<f64>,
    near_extremal: bool,
    derivatives: Option<&'static str>,
    tol: f64,
}

#[derive(Debug, Clone, Serialize)]
struct ClassifySummary {
    rows: usize,
    failed: usize,
    isotropic: usize,
    extremal_minus: usize,
    extremal_plus: usize,
    generic: usize,
}

pub fn classify(g: &Global, a: &ClassifyArgs, args: Vec<String>, out: &mut impl Write) -> CmdResult {
    let chart = resolve(&a.chart)?;
    let eps = need_epsilon(a.epsilon, &chart)?;
    let tol = tolerances(g);
    let points: Vec<Point> = match (a.grid, a.point.is_empty()) {
        (Some(n), _) => chart.chart.domain.lattice(n),
        (None, false) => a.point.clone(),
        (None, true) => vec![chart.base_point],
    };
    let rows: Vec<ClassifyRow> = points
        .par_iter()
        .enumerate()
        .map(|(index, p)| match ricci_frame(&chart.chart, p, eps, &tol) {
            Ok(fp) => ClassifyRow {
                index,
                point: *p,
                status: "ok",
                error: None,
                class: Some(fp.class),
                lambda: Some(fp.lambda),
                lambda12: Some(fp.lambda12),
                big_lambda: Some(fp.big_lambda),
                epsilon: eps,
                m: fp.m,
                ricci: Some(fp.ricci),
                ricci_residual: Some(fp.ricci_residual),
                near_extremal: fp.near_extremal,
                derivatives: Some(derivative_name(fp.source == DerivativeSource::Analytic)),
                tol: fp.class_tol,
            },
            Err(e) => ClassifyRow {
                index,
                point: *p,
                status: "error",
                error: Some(RowError::from(&e)),
                class: None,
                lambda: None,
                lambda12: None,
                big_lambda: None,
                epsilon: eps,
                m: None,
                ricci: None,
                ricci_residual: None,
                near_extremal: false,
                derivatives: None,
                tol: tol.class,
            },
        })
        .collect();

    let mut warnings = Vec::new();
    for r in &rows {
        if r.near_extremal {
            warnings.push(Warning {
                kind: "NearExtremal",
                row: Some(r.index),
                message: format!("m = {:?} is outside [1e-6, 1e6]; V± are ill-conditioned", r.m),
            });
        }
    }
    if rows.iter().any(|r| r.derivatives == Some("finite-difference")) {
        warnings.push(precision_warning());
    }
    let count = |c: PointClass| rows.iter().filter(|r| r.class == Some(c)).count();
    let summary = ClassifySummary {
        rows: rows.len(),
        failed: rows.iter().filter(|r| r.error.is_some()).count(),
        isotropic: count(PointClass::Isotropic),
        extremal_minus: count(PointClass::ExtremalMinus),
        extremal_plus: count(PointClass::ExtremalPlus),
        generic: count(PointClass::Generic),
    };
    let all_failed = !rows.is_empty() && summary.failed == rows.len();
    Report {
        schema: SCHEMA,
        tool: Tool::current(),
        command: "classify",
        args,
        seed: g.seed,
        chart: Some(chart.info),
        tolerances: tol,
        rows,
        summary,
        warnings,
    }
    .write_json(out)?;
    Ok(if all_failed { Outcome::AllRowsFailed } else { Outcome::Complete })
}

fn precision_warning() -> Warning {
    Warning {
        kind: "PrecisionWarning",
        row: None,
        message: "curvature from nested finite differences; classification band widened to the numeric tolerance"
            .into(),
    }
}

#[derive(Debug, Clone, Args)]
pub struct RankCheckArgs {
    #[command(flatten)]
    pub chart: ChartRef,

    /// Target sectional curvature (defaults to the chart's own epsilon).
    #[arg(short, long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,

    /// Start point `x,y,z` (defaults to the chart's base point).
    #[arg(long, value_parser = parse_triple, allow_negative_numbers = true)]
    pub point: Option<[f64; 3]>,

    /// Initial direction `x,y,z`, normalized in the metric. Without it,
    /// `--geodesics` directions are drawn from `--seed`.
    #[arg(long, value_parser = parse_triple, allow_negative_numbers = true)]
    pub dir: Option<[f64; 3]>,

    /// Number of random geodesics when no direction is given.
    #[arg(long, default_value_t = 1)]
    pub geodesics: usize,

    /// Geodesic length.
    #[arg(short = 'T', long = "horizon", default_value_t = 5.0)]
    pub horizon: f64,

    /// Coarse angular samples of the normal circle before refinement.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,

    /// Points kept in each residual profile.
    #[arg(long, default_value_t = 101)]
    pub profile_points: usize,
}

#[derive(Debug, Clone, Serialize)]
struct RankRow {
    index: usize,
    point: Point,
    dir: [f64; 3],
    status: &'static str,
    error: Option<RowError>,
    deficit: Option<f64>,
    full_rank: Option<bool>,
    best_v0: Option<[f64; 3]>,
    best_angle: Option<f64>,
    n_samples: usize,
    refine_iterations: Option<usize>,
    t_end: Option<f64>,
    max_drift: Option<f64>,
    exit: Option<ExitInfo>,
    profile: Vec<(f64, f64)>,
    tol: f64,
}

#[derive(Debug, Clone, Serialize)]
struct RankSummary {
    rows: usize,
    failed: usize,
    max_deficit: Option<f64>,
    all_full_rank: bool,
}

fn thin<T: Copy>(v: &[T], keep: usize) -> Vec<T> {
    if keep == 0 || v.is_empty() {
        return Vec::new();
    }
    if v.len() <= keep {
        return v.to_vec();
    }
    let last = v.len() - 1;
    (0..keep).map(|k| v[k * last / (keep - 1).max(1)]).collect()
}

pub fn rank_check(g: &Global, a: &RankCheckArgs, args: Vec<String>, out: &mut impl Write) -> CmdResult {
    let chart = resolve(&a.chart)?;
    let eps = need_epsilon(a.epsilon, &chart)?;
    let tol = tolerances(g);
    let p = a.point.unwrap_or(chart.base_point);
    let metric = chart.chart.metric_at(&p)?;
    let normalize = |v: Vec3| -> Result<Vec3, Error> {
        let n = v.dot(&(metric * v));
        if n.is_nan() || n <= 0.0 {
            return Err(Error::InvalidInput("direction must be nonzero".into()));
        }
        Ok(v / n.sqrt())
    };
    let dirs: Vec<Vec3> = match a.dir {
        Some(d) => vec![normalize(Vec3::from(d))?],
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            let mut out = Vec::with_capacity(a.geodesics);
            while out.len() < a.geodesics {
                let v = Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
                let n = v.norm();
                if n > 0.1 && n <= 1.0 {
                    out.push(normalize(v)?);
                }
            }
            out
        }
    };
    let judged = tol.class;
    let rows: Vec<RankRow> = dirs
        .par_iter()
        .enumerate()
        .map(|(index, dir)| {
            let base = RankRow {
                index,
                point: p,
                dir: (*dir).into(),
                status: "error",
                error: None,
                deficit: None,
                full_rank: None,
                best_v0: None,
                best_angle: None,
                n_samples: a.samples,
                refine_iterations: None,
                t_end: None,
                max_drift: None,
                exit: None,
                profile: Vec::new(),
                tol: judged,
            };
            let result = integrate_geodesic(&chart.chart, &p, dir, a.horizon, g.ode_step, &tol)
                .and_then(|trace| rank_deficit(&chart.chart, &trace, eps, a.samples).map(|rd| (trace, rd)));
            match result {
                Ok((trace, rd)) => RankRow {
                    status: "ok",
                    deficit: Some(rd.deficit),
                    full_rank: Some(rd.deficit < judged),
                    best_v0: Some(rd.best_v0),
                    best_angle: Some(rd.best_angle),
                    refine_iterations: Some(rd.refine_iterations),
                    t_end: Some(trace.end_time()),
                    max_drift: Some(trace.max_drift),
                    exit: trace.exit.clone(),
                    profile: thin(&rd.profile, a.profile_points),
                    ..base
                },
                Err(e) => RankRow {
                    error: Some(RowError::from(&e)),
                    ..base
                },
            }
        })
        .collect();
    let mut warnings = Vec::new();
    for r in &rows {
        if let Some(exit) = &r.exit {
            warnings.push(Warning {
                kind: "DomainExit",
                row: Some(r.index),
                message: format!("geodesic left the chart at t = {} ({})", exit.time, exit.reason),
            });
        }
    }
    if !chart.chart.has_analytic_derivatives() {
        warnings.push(precision_warning());
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let deficits: Vec<f64> = rows.iter().filter_map(|r| r.deficit).collect();
    let summary = RankSummary {
        rows: rows.len(),
        failed,
        max_deficit: deficits.iter().copied().reduce(f64::max),
        all_full_rank: failed == 0 && rows.iter().all(|r| r.full_rank == Some(true)),
    };
    let all_failed = !rows.is_empty() && failed == rows.len();
    Report {
        schema: SCHEMA,
        tool: Tool::current(),
        command: "rank-check",
        args,
        seed: g.seed,
        chart: Some(chart.info),
        tolerances: tol,
        rows,
        summary,
        warnings,
    }
    .write_json(out)?;
    Ok(if all_failed { Outcome::AllRowsFailed } else { Outcome::Complete })
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    /// Curvature constant in `tr(A)' = −2ε − tr(A)²/2`.
    #[arg(short, long, allow_negative_numbers = true)]
    pub epsilon: f64,

    /// Initial value of `tr(A)`.
    #[arg(long, allow_negative_numbers = true)]
    pub tr0: f64,

    /// Horizon.
    #[arg(short = 'T', long = "horizon", default_value_t = 10.0)]
    pub horizon: f64,

    /// Initial `|R₂|`.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub r20: f64,

    /// Initial `|R₃|`.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub r30: f64,

    /// Spacing of emitted rows (the solver step is `--ode-step`).
    #[arg(long, default_value_t = 0.01)]
    pub every: f64,

    /// Emit the JSON report (the default).
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,

    /// Emit CSV rows instead of the JSON report.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Clone, Serialize)]
struct EvolveRow {
    /// `sample` or `blowup`.
    kind: &'static str,
    t: f64,
    tr_a: Option<f64>,
    r2: Option<f64>,
    r3: Option<f64>,
    log_volume: Option<f64>,
    tol: f64,
}

#[derive(Debug, Clone, Serialize)]
struct EvolveSummary {
    branch: Branch,
    blowup_time: Option<f64>,
    blowup_bracket: Option<(f64, f64)>,
    max_closed_form_error: f64,
    decay_log_residual: Option<f64>,
    final_t: f64,
    final_tr_a: f64,
}

pub fn evolve(g: &Global, a: &EvolveArgs, args: Vec<String>, out: &mut impl Write) -> CmdResult {
    let tol = tolerances(g);
    let sol = riccati_solve(a.epsilon, a.tr0, a.horizon, g.ode_step)?;
    let aug: RiccatiSolution = match offdiag_decay(&sol, a.r20, a.r30) {
        Ok(s) => s,
        Err(Error::HorizonTruncated { partial, .. }) => *partial,
        Err(e) => return Err(e.into()),
    };
    let lv = aug.log_volume();
    let r2 = aug.r2_samples.clone().unwrap_or_default();
    let r3 = aug.r3_samples.clone().unwrap_or_default();
    let stride = ((a.every / g.ode_step).round() as usize).max(1);
    let n = aug.samples.len();
    let mut rows: Vec<EvolveRow> = aug
        .samples
        .iter()
        .enumerate()
        .filter(|(k, _)| k % stride == 0 || k + 1 == n)
        .map(|(k, &(t, y))| EvolveRow {
            kind: "sample",
            t,
            tr_a: Some(y),
            r2: r2.get(k).copied(),
            r3: r3.get(k).copied(),
            log_volume: Some(lv[k]),
            tol: tol.analytic,
        })
        .collect();
    if let Some(t) = aug.blowup_time {
        rows.push(EvolveRow {
            kind: "blowup",
            t,
            tr_a: None,
            r2: None,
            r3: None,
            log_volume: None,
            tol: tol.analytic,
        });
    }
    let &(final_t, final_tr_a) = aug.samples.last().expect("solution has its initial sample");
    if a.csv {
        writeln!(out, "kind,t,tr_a,r2,r3,log_volume")?;
        let cell = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        for r in &rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.kind,
                r.t,
                cell(r.tr_a),
                cell(r.r2),
                cell(r.r3),
                cell(r.log_volume)
            )?;
        }
        return Ok(Outcome::Complete);
    }
    let mut warnings = Vec::new();
    if let Some(t) = aug.blowup_time {
        warnings.push(Warning {
            kind: "HorizonTruncated",
            row: Some(rows.len() - 1),
            message: format!("tr(A) blows up at t = {t}; rows stop before the pole"),
        });
    }
    let summary = EvolveSummary {
        branch: aug.branch,
        blowup_time: aug.blowup_time,
        blowup_bracket: aug.blowup_bracket,
        max_closed_form_error: aug.max_closed_form_error,
        decay_log_residual: aug.decay_log_residual,
        final_t,
        final_tr_a,
    };
    Report {
        schema: SCHEMA,
        tool: Tool::current(),
        command: "evolve",
        args,
        seed: g.seed,
        chart: None,
        tolerances: tol,
        rows,
        summary,
        warnings,
    }
    .write_json(out)?;
    Ok(Outcome::Complete)
}

#[derive(Debug, Clone, Args)]
pub struct ZooArgs {
    /// Show a single chart.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
struct ZooRow {
    name: &'static str,
    params: Vec<(&'static str, f64)>,
    description: &'static str,
    coords: [String; 3],
    known: Known,
    base_point: Point,
}

#[derive(Debug, Clone, Serialize)]
struct ZooSummary {
    entries: usize,
}

pub fn zoo(g: &Global, a: &ZooArgs, args: Vec<String>, out: &mut impl Write) -> CmdResult {
    let mut rows = Vec::new();
    for info in zoo_list() {
        if a.name.as_deref().is_some_and(|n| n != info.name) {
            continue;
        }
        let entry = zoo_get(info.name, &[])?;
        rows.push(ZooRow {
            name: info.name,
            params: info.params,
            description: info.description,
            coords: entry.chart.coords.clone(),
            known: entry.known,
            base_point: entry.base_point,
        });
    }
    if let (Some(name), true) = (&a.name, rows.is_empty()) {
        return Err(Error::UnknownChart(name.clone()).into());
    }
    Report {
        schema: SCHEMA,
        tool: Tool::current(),
        command: "zoo",
        args,
        seed: g.seed,
        chart: None,
        tolerances: tolerances(g),
        summary: ZooSummary { entries: rows.len() },
        rows,
        warnings: Vec::new(),
    }
    .write_json(out)?;
    Ok(Outcome::Complete)
}
