//! Command line: configuration, task dispatch and CSV/JSON output.
//!
//! A run is described by an [`ExperimentConfig`], read from a flat TOML
//! file and overridden by command-line flags. Every task produces CSV rows
//! with the columns in [`CSV_COLUMNS`] and a JSON summary; outputs depend
//! only on the configuration, so identical configs give identical bytes.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{json, Value};

use crate::analytic::{bound_ledger, ln_big, loop_sum_within_closed_form, q_asym_log, q_distinct_table, q_odd_table};
use crate::error::{Error, Result};
use crate::estimate::{
    default_workers, estimate_ascent, estimate_connections, estimate_profile, estimate_statistic, fit_decay,
    inequality_suite, pc_crossing, pc_survival, McConfig, MCEstimate, PcEstimate, Statistic, StatisticSpec,
    SurvivalTarget,
};
use crate::graphs::{ball, boundary_ratio, Family, HalfMode, Kernel, Lattice, Truncation};
use crate::oracle::exact_statistic_poly;
use crate::perc::{explore, Constraint, EdgeSampler, ProfileMode, DEFAULT_BUDGET};
use crate::suite::{Suite, SuiteConfig, CRITERIA};

/// Column order of every CSV file.
pub const CSV_COLUMNS: [&str; 12] =
    ["family", "params", "half_mode", "task", "statistic", "k", "p", "estimate", "stderr", "n", "n_censored", "seed"];

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Graph,
    Explore,
    Estimate,
    Pc,
    Decay,
    Exact,
    Analytic,
    Suite,
}

impl Task {
    fn name(self) -> &'static str {
        match self {
            Task::Graph => "graph",
            Task::Explore => "explore",
            Task::Estimate => "estimate",
            Task::Pc => "pc",
            Task::Decay => "decay",
            Task::Exact => "exact",
            Task::Analytic => "analytic",
            Task::Suite => "suite",
        }
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<f64>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(Option::<OneOrMany>::deserialize(d)?.map(|v| match v {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    }))
}

/// One experiment. Every key is optional in the file; defaults depend on
/// the task.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Task to run; the subcommand takes precedence.
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    /// Graph family: tree(d), grandparent(d), triangles, dl(a,b), lamp_dl, lamp_walk.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    /// none, descendants_of_origin, nonneg_street or fibonacci.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_mode: Option<String>,
    /// Edge probabilities, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    /// Statistics such as e_3, a_0, tau_2; a `_k` suffix expands over the k range.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistics: Option<Vec<String>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_min: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
    /// Monte Carlo replicas.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<u64>,
    /// Vertex expansions per replica.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    /// Bisection tolerance for `pc`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// `crossing` or `survival`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    /// Level of the crossing `e_k0 = 1`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k0: Option<u32>,
    /// Survival depth.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    /// Survival threshold; omitted means the halving rule.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Ball or truncation radius.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<u32>,
    /// Lowest level, relative to the origin, of a window.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<i64>,
    /// Highest relative level of a window.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<i64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<u32>,
    /// Largest n for the partition tables.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Acceptance criteria to run, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criteria: Option<Vec<u8>>,
    /// Replicas per probe when the suite locates critical points.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pc_replicas: Option<u64>,
    /// Master seed.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Worker threads; defaults to PERCLAB_WORKERS or 1.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// CSV output path; standard output when omitted.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// JSON summary path.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses a TOML document, rejecting unknown keys.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    /// Fields set in `other` replace those here.
    pub fn overridden_by(&self, other: &ExperimentConfig) -> Result<Self> {
        let to_table = |c: &ExperimentConfig| match toml::Table::try_from(c) {
            Ok(t) => Ok(t),
            Err(e) => Err(Error::Config(e.to_string())),
        };
        let mut base = to_table(self)?;
        base.extend(to_table(other)?);
        base.try_into().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))
    }

    fn kernel(&self) -> Result<Kernel> {
        let family: Family = self.family.as_deref().unwrap_or("tree(2)").parse().map_err(config_error)?;
        let half: HalfMode = self.half_mode.as_deref().unwrap_or("none").parse().map_err(config_error)?;
        Kernel::new(family, half).map_err(config_error)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    fn mc(&self) -> McConfig {
        McConfig::new(self.replicas.unwrap_or(10_000), self.seed())
            .with_budget(self.budget.unwrap_or(DEFAULT_BUDGET))
            .with_workers(self.workers.unwrap_or_else(default_workers))
    }

    fn ps(&self, default: &[f64]) -> Vec<f64> {
        self.p.clone().unwrap_or_else(|| default.to_vec())
    }

    fn k_range(&self, lo: u32, hi: u32) -> (u32, u32) {
        (self.k_min.unwrap_or(lo), self.k_max.unwrap_or(hi))
    }
}

fn config_error(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

/// A statistic as requested, expanded over the k range.
#[derive(Clone, Debug, PartialEq)]
struct Requested {
    spec: StatisticSpec,
    /// Column value: level, height or distance.
    k: u32,
}

fn expand_statistics(names: &[String], k_min: u32, k_max: u32) -> Result<Vec<Requested>> {
    let mut out = Vec::new();
    for name in names {
        let name = name.trim();
        let ks: Vec<u32> = if name.ends_with("_k") { (k_min..=k_max).collect() } else { vec![0] };
        for k in ks {
            let text = match name.strip_suffix("_k") {
                Some(stem) => format!("{stem}_{k}"),
                None => name.to_string(),
            };
            let spec: StatisticSpec = text.parse().map_err(config_error)?;
            let k = match &spec {
                StatisticSpec::TauAtDistance(d) => *d,
                StatisticSpec::Fixed(s) => s.k() as u32,
            };
            out.push(Requested { spec, k });
        }
    }
    Ok(out)
}

fn spec_name(spec: &StatisticSpec) -> &'static str {
    match spec {
        StatisticSpec::TauAtDistance(_) => "tau",
        StatisticSpec::Fixed(s) => s.name(),
    }
}

/// One CSV line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub family: String,
    pub params: String,
    pub half_mode: String,
    pub task: String,
    pub statistic: String,
    pub k: i64,
    pub p: Option<f64>,
    pub estimate: f64,
    pub stderr: f64,
    pub n: u64,
    pub n_censored: u64,
    pub seed: u64,
}

struct RowMaker<'a> {
    kernel: Kernel,
    task: Task,
    seed: u64,
    rows: &'a mut Vec<Row>,
}

impl RowMaker<'_> {
    fn push(&mut self, statistic: &str, k: i64, p: Option<f64>, est: &MCEstimate) {
        self.rows.push(Row {
            family: self.kernel.family.name().into(),
            params: self.kernel.family.params(),
            half_mode: self.kernel.half.name().into(),
            task: self.task.name().into(),
            statistic: statistic.into(),
            k,
            p,
            estimate: est.mean,
            stderr: est.stderr,
            n: est.n,
            n_censored: est.n_censored,
            seed: self.seed,
        });
    }

    fn value(&mut self, statistic: &str, k: i64, p: Option<f64>, value: f64) {
        self.push(statistic, k, p, &MCEstimate { mean: value, stderr: 0.0, n: 0, n_censored: 0 });
    }
}

/// Everything a task produced.
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub rows: Vec<Row>,
    pub summary: Value,
    /// Text for standard output instead of CSV (the suite table).
    pub table: Option<String>,
    pub exit: u8,
}

/// Runs a validated configuration.
pub fn run(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let task = cfg.task.ok_or_else(|| Error::Config("no task given".into()))?;
    let mut rows = Vec::new();
    let mut table = None;
    let mut exit = EXIT_OK;
    let mut summary = serde_json::Map::new();
    if task == Task::Suite {
        let (text, body, pass) = run_suite(cfg)?;
        table = Some(text);
        summary.extend(body);
        if !pass {
            exit = EXIT_CHECK_FAILED;
        }
    } else if task == Task::Analytic {
        let (alpha, beta) = (cfg.alpha.unwrap_or(3), cfg.beta.unwrap_or(2));
        let kernel = u8::try_from(alpha)
            .ok()
            .zip(u8::try_from(beta).ok())
            .ok_or_else(|| Error::Config(format!("DL parameters out of range: ({alpha},{beta})")))
            .and_then(|(alpha, beta)| Kernel::full(Family::Dl { alpha, beta }).map_err(config_error))?;
        let mut out = RowMaker { kernel, task, seed: cfg.seed(), rows: &mut rows };
        summary.extend(run_analytic(cfg, &mut out)?);
    } else {
        let kernel = cfg.kernel()?;
        let mut out = RowMaker { kernel, task, seed: cfg.seed(), rows: &mut rows };
        let body = match task {
            Task::Graph => run_graph(cfg, &kernel, &mut out)?,
            Task::Explore => run_explore(cfg, &kernel, &mut out)?,
            Task::Estimate => run_estimate(cfg, &kernel, &mut out)?,
            Task::Pc => run_pc(cfg, &kernel, &mut out)?,
            Task::Decay => run_decay(cfg, &kernel, &mut out)?,
            Task::Exact => {
                let (body, failed) = run_exact(cfg, &kernel, &mut out)?;
                if failed {
                    exit = EXIT_RESOURCE;
                }
                body
            }
            Task::Analytic | Task::Suite => unreachable!(),
        };
        summary.extend(body);
    }
    summary.insert("task".into(), json!(task.name()));
    summary.insert("provenance".into(), provenance(cfg));
    Ok(Artifacts { rows, summary: Value::Object(summary), table, exit })
}

fn provenance(cfg: &ExperimentConfig) -> Value {
    let mut echo = cfg.clone();
    echo.csv = None;
    echo.json = None;
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed(),
        "config": echo,
    })
}

type Body = serde_json::Map<String, Value>;

fn body(v: Value) -> Body {
    match v {
        Value::Object(m) => m,
        _ => Body::new(),
    }
}

fn run_graph(cfg: &ExperimentConfig, kernel: &Kernel, out: &mut RowMaker) -> Result<Body> {
    let radius = cfg.radius.unwrap_or(3);
    let o = kernel.origin();
    let mut sizes = Vec::new();
    for r in 0..=radius {
        let b = ball(kernel, &o, r)?;
        out.value("ball_vertices", r as i64, None, b.num_vertices() as f64);
        out.value("ball_edges", r as i64, None, b.num_edges() as f64);
        sizes.push(json!({"radius": r, "vertices": b.num_vertices(), "edges": b.num_edges()}));
    }
    let ratio = boundary_ratio(kernel, &o, radius)?;
    Ok(body(json!({
        "graph": {
            "kernel": kernel.to_string(),
            "degree": kernel.family.degree(),
            "span": kernel.family.span(),
            "origin": o.to_string(),
            "balls": sizes,
            "boundary_ratio": [ratio.numer(), ratio.denom()],
        }
    })))
}

fn run_explore(cfg: &ExperimentConfig, kernel: &Kernel, out: &mut RowMaker) -> Result<Body> {
    let o = kernel.origin();
    let constraint = Constraint::window(cfg.lo, cfg.hi);
    let budget = cfg.budget.unwrap_or(DEFAULT_BUDGET);
    let mut runs = Vec::new();
    for p in cfg.ps(&[0.5]) {
        check_p(p)?;
        let report = explore(kernel, &mut EdgeSampler::new(cfg.seed(), p), &o, &constraint, budget)?;
        for (&level, &count) in &report.per_level {
            out.push(
                "cluster_level",
                level - o.level(),
                Some(p),
                &MCEstimate { mean: count as f64, stderr: 0.0, n: 1, n_censored: !report.is_exhausted() as u64 },
            );
        }
        runs.push(json!({
            "p": p,
            "size": report.visited.len(),
            "edges_examined": report.edges_examined,
            "status": report.status,
        }));
    }
    Ok(body(json!({ "explore": runs })))
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn run_estimate(cfg: &ExperimentConfig, kernel: &Kernel, out: &mut RowMaker) -> Result<Body> {
    let mc = cfg.mc();
    let ps = cfg.ps(&[0.5]);
    ps.iter().try_for_each(|&p| check_p(p))?;
    let Some(names) = &cfg.statistics else {
        let mut tables = Vec::new();
        for &p in &ps {
            let rows = inequality_suite(kernel, p, &mc)?;
            for r in &rows {
                out.push(r.statistic, r.k as i64, Some(p), &r.estimate);
            }
            tables.push(json!({ "p": p, "rows": rows }));
        }
        return Ok(body(json!({ "inequality": tables })));
    };
    let (k_min, k_max) = cfg.k_range(0, 8);
    let requested = expand_statistics(names, k_min, k_max)?;
    for &p in &ps {
        for (spec, k, est) in estimate_requested(kernel, &requested, p, &mc)? {
            out.push(spec_name(&spec), k as i64, Some(p), &est);
        }
    }
    Ok(Body::new())
}

/// Estimates in request order; runs of `e`, `v_minus`, `a`, `w_minus` and
/// `A` share one profile sweep per replica.
fn estimate_requested<L: Lattice + ?Sized>(
    lattice: &L,
    requested: &[Requested],
    p: f64,
    mc: &McConfig,
) -> Result<Vec<(StatisticSpec, u32, MCEstimate)>> {
    #[derive(PartialEq)]
    enum Kind {
        Profile(ProfileMode),
        Ascent,
        Single,
    }
    let kind = |s: &StatisticSpec| match s {
        StatisticSpec::Fixed(Statistic::E(_)) => Kind::Profile(ProfileMode::Forward),
        StatisticSpec::Fixed(Statistic::VMinus(_)) => Kind::Profile(ProfileMode::UpwardWindow),
        StatisticSpec::Fixed(Statistic::AMinus(_)) => Kind::Profile(ProfileMode::UpwardFree),
        StatisticSpec::Fixed(Statistic::WMinus(_)) => Kind::Profile(ProfileMode::FullCluster),
        StatisticSpec::Fixed(Statistic::Ascent(_)) => Kind::Ascent,
        _ => Kind::Single,
    };
    let mut out = Vec::new();
    let mut i = 0;
    while i < requested.len() {
        let head = kind(&requested[i].spec);
        let mut j = i + 1;
        if head != Kind::Single {
            while j < requested.len() && kind(&requested[j].spec) == head {
                j += 1;
            }
        }
        let group = &requested[i..j];
        let max_k = group.iter().map(|r| r.k).max().unwrap_or(0);
        let ests = match head {
            Kind::Profile(mode) => {
                let prof = estimate_profile(lattice, mode, max_k, p, mc)?;
                group.iter().map(|r| prof[r.k as usize]).collect()
            }
            Kind::Ascent => {
                let asc = estimate_ascent(lattice, max_k, p, mc)?;
                group.iter().map(|r| asc[r.k as usize]).collect()
            }
            Kind::Single => vec![estimate_statistic(lattice, &group[0].spec.resolve(lattice)?, p, mc)?],
        };
        out.extend(group.iter().zip(ests).map(|(r, e)| (r.spec.clone(), r.k, e)));
        i = j;
    }
    Ok(out)
}

fn run_pc(cfg: &ExperimentConfig, kernel: &Kernel, out: &mut RowMaker) -> Result<Body> {
    let mc = cfg.mc();
    let tol = cfg.tol.unwrap_or(2e-3);
    let est: PcEstimate = match cfg.method.as_deref().unwrap_or("survival") {
        "crossing" => pc_crossing(kernel, cfg.k0.unwrap_or(1), tol, &mc)?,
        "survival" => {
            let target = cfg.threshold.map_or(SurvivalTarget::Halving, SurvivalTarget::Level);
            pc_survival(kernel, cfg.depth.unwrap_or(10), target, tol, &mc)?
        }
        other => return Err(Error::Config(format!("unknown method {other:?}; use crossing or survival"))),
    };
    let k = match est.method {
        crate::estimate::PcMethod::Crossing { k0 } => k0,
        crate::estimate::PcMethod::Survival { depth, .. } => depth,
    };
    out.push(
        "p_hat",
        k as i64,
        None,
        &MCEstimate { mean: est.p_hat, stderr: est.stderr, n: est.replicas, n_censored: 0 },
    );
    Ok(body(json!({ "pc": est })))
}

fn run_decay(cfg: &ExperimentConfig, kernel: &Kernel, out: &mut RowMaker) -> Result<Body> {
    let mc = cfg.mc();
    let (d_min, d_max) = cfg.k_range(1, 8);
    if d_min > d_max {
        return Err(Error::Config(format!("empty distance range {d_min}..={d_max}")));
    }
    let targets = (d_min..=d_max).map(|d| crate::estimate::distance_target(kernel, d)).collect::<Result<Vec<_>>>()?;
    let mut fits = Vec::new();
    for p in cfg.ps(&[0.25]) {
        check_p(p)?;
        let taus = estimate_connections(kernel, &targets, p, &mc)?;
        let points: Vec<(f64, MCEstimate)> = (d_min..=d_max).map(|d| d as f64).zip(taus).collect();
        for (d, est) in &points {
            out.push("tau", *d as i64, Some(p), est);
        }
        let fit = match fit_decay(&points) {
            Ok(f) => json!({
                "slope": f.slope,
                "intercept": f.intercept,
                "slope_stderr": f.slope_stderr,
                "r2": f.r2,
                "rate": f.rate(),
                "points": f.points(),
            }),
            Err(e) => json!({ "error": e.to_string() }),
        };
        fits.push(json!({ "p": p, "fit": fit }));
    }
    Ok(body(json!({ "fit": fits })))
}

/// Exact values on a finite truncation. Size-limit failures become error
/// entries; the flag reports whether there were any.
fn run_exact(cfg: &ExperimentConfig, kernel: &Kernel, out: &mut RowMaker) -> Result<(Body, bool)> {
    let trunc = Truncation::new(cfg.radius.unwrap_or(2), cfg.lo, cfg.hi);
    let g = trunc.build(kernel, &kernel.origin())?;
    let lattice = g.to_lattice();
    let names = cfg.statistics.clone().unwrap_or_else(|| vec!["e_k".into()]);
    let (k_min, k_max) = cfg.k_range(0, 1);
    let requested = expand_statistics(&names, k_min, k_max)?;
    let ps = cfg.ps(&[0.2, 0.3, 0.5]);
    ps.iter().try_for_each(|&p| check_p(p))?;
    let mut polys = Vec::new();
    let mut errors = Vec::new();
    for r in &requested {
        let result = r.spec.resolve(&lattice).and_then(|s| exact_statistic_poly(&g, &s).map(|poly| (s, poly)));
        match result {
            Ok((stat, poly)) => {
                for &p in &ps {
                    out.value(spec_name(&r.spec), r.k as i64, Some(p), poly.eval_f64(p));
                }
                polys.push(json!({ "statistic": stat.to_string(), "k": r.k, "poly": poly.to_string() }));
            }
            Err(e) if e.is_resource_limit() => {
                errors.push(json!({ "statistic": spec_name(&r.spec), "k": r.k, "error": e.to_string() }));
            }
            Err(e) => return Err(e),
        }
    }
    let failed = !errors.is_empty();
    let summary = json!({
        "truncation": { "radius": trunc.radius, "lo": trunc.lo, "hi": trunc.hi,
                        "vertices": g.num_vertices(), "edges": g.num_edges() },
        "exact": polys,
        "errors": errors,
    });
    Ok((body(summary), failed))
}

fn run_analytic(cfg: &ExperimentConfig, out: &mut RowMaker) -> Result<Body> {
    let (alpha, beta) = (cfg.alpha.unwrap_or(3), cfg.beta.unwrap_or(2));
    let ledger = bound_ledger(alpha, beta);
    for (name, v) in [
        ("pc_lower", ledger.pc_lower),
        ("pc_upper", ledger.pc_upper),
        ("pu_lower", ledger.pu_lower),
        ("pu_upper", ledger.pu_upper),
        ("gamma", ledger.gamma),
        ("sufficient", ledger.sufficient as u8 as f64),
    ] {
        out.value(name, 0, None, v);
    }
    let n_max = cfg.n_max.unwrap_or(2000);
    if n_max == 0 {
        return Err(Error::Config("n_max must be positive".into()));
    }
    let distinct = q_distinct_table(n_max);
    let odd = q_odd_table(n_max);
    let ratio = (ln_big(&distinct[n_max]) - q_asym_log(n_max as u64)).exp();
    out.value("q_ratio", n_max as i64, None, ratio);
    let loops_ok = (1..=30).all(|n| loop_sum_within_closed_form(n, ledger.alpha, ledger.beta));
    Ok(body(json!({
        "bounds": ledger,
        "partitions": {
            "n_max": n_max,
            "q_distinct": distinct[n_max].to_string(),
            "distinct_equals_odd": distinct == odd,
            "ratio_to_asymptotic": ratio,
        },
        "loop_sum_within_closed_form": loops_ok,
    })))
}

fn run_suite(cfg: &ExperimentConfig) -> Result<(String, Body, bool)> {
    let defaults = SuiteConfig::default();
    let suite_cfg = SuiteConfig {
        seed: cfg.seed.unwrap_or(defaults.seed),
        workers: cfg.workers.unwrap_or(defaults.workers),
        replicas: cfg.replicas.unwrap_or(defaults.replicas),
        budget: cfg.budget.unwrap_or(defaults.budget),
        pc_replicas: cfg.pc_replicas.unwrap_or(defaults.pc_replicas),
        pc_depth: cfg.depth.unwrap_or(defaults.pc_depth),
    };
    let ids: Vec<u8> = cfg.criteria.clone().unwrap_or_else(|| CRITERIA.iter().map(|c| c.0).collect());
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(Error::Config(format!("unknown criterion {bad}")));
    }
    let suite = Suite::new(suite_cfg);
    let mut text = String::new();
    let mut reports = Vec::new();
    for id in ids {
        let report = suite.run(id);
        text.push_str(&format!("{report}\n"));
        for check in report.checks.iter().filter(|c| !c.pass) {
            text.push_str(&format!("      failed: {}: {}\n", check.name, check.detail));
        }
        reports.push(report);
    }
    let pass = reports.iter().all(|r| r.pass());
    let failed = reports.iter().filter(|r| !r.pass()).count();
    text.push_str(&if pass { "all criteria passed\n".to_string() } else { format!("{failed} criteria failed\n") });
    let pcs: Vec<Value> =
        suite.critical_points().into_iter().map(|(name, est)| json!({ "graph": name, "estimate": est })).collect();
    let summary = json!({
        "suite": { "config": suite_cfg, "reports": reports, "critical_points": pcs, "pass": pass },
    });
    Ok((text, body(summary), pass))
}

/// Header lines, then the rows.
pub fn render_csv(cfg: &ExperimentConfig, rows: &[Row]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let task = cfg.task.map_or("none", Task::name);
    writeln!(buf, "# perclab {} task={task} seed={}", env!("CARGO_PKG_VERSION"), cfg.seed())?;
    let config = serde_json::to_string(&provenance(cfg)["config"]).map_err(|e| Error::Config(e.to_string()))?;
    writeln!(buf, "# config {config}")?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(buf);
    w.write_record(CSV_COLUMNS).map_err(csv_error)?;
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn render_json(summary: &Value) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(summary).map_err(|e| Error::Config(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Debug, Parser)]
#[command(name = "perclab", version, about = "Percolation experiments on non-unimodular graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct TaskArgs {
    /// TOML file with experiment keys; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    exp: ExperimentConfig,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ball sizes and structure of a graph.
    Graph(TaskArgs),
    /// One cluster exploration per edge probability.
    Explore(TaskArgs),
    /// Monte Carlo estimates; without statistics, the inequality table.
    Estimate(TaskArgs),
    /// Critical-point estimate.
    Pc(TaskArgs),
    /// Connection probability against distance, with a log-linear fit.
    Decay(TaskArgs),
    /// Exact polynomials on a finite truncation.
    Exact(TaskArgs),
    /// Closed-form bounds and partition counts.
    Analytic(TaskArgs),
    /// Acceptance checks; exit status 1 when any fails.
    Suite(TaskArgs),
    /// Run the task named in a config file.
    Run {
        file: PathBuf,
        #[command(flatten)]
        exp: ExperimentConfig,
    },
}

fn resolve(command: Command) -> Result<ExperimentConfig> {
    let (task, file, flags) = match command {
        Command::Run { file, exp } => (None, Some(file), exp),
        Command::Graph(a) => (Some(Task::Graph), a.config, a.exp),
        Command::Explore(a) => (Some(Task::Explore), a.config, a.exp),
        Command::Estimate(a) => (Some(Task::Estimate), a.config, a.exp),
        Command::Pc(a) => (Some(Task::Pc), a.config, a.exp),
        Command::Decay(a) => (Some(Task::Decay), a.config, a.exp),
        Command::Exact(a) => (Some(Task::Exact), a.config, a.exp),
        Command::Analytic(a) => (Some(Task::Analytic), a.config, a.exp),
        Command::Suite(a) => (Some(Task::Suite), a.config, a.exp),
    };
    let base = match file {
        Some(path) => {
            let text = fs::read_to_string(&path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_toml(&text)?
        }
        None => ExperimentConfig::default(),
    };
    let mut cfg = base.overridden_by(&flags)?;
    if task.is_some() {
        cfg.task = task;
    }
    validate(&cfg)?;
    Ok(cfg)
}

/// Checks everything that can be checked before work starts.
pub fn validate(cfg: &ExperimentConfig) -> Result<()> {
    let task = cfg.task.ok_or_else(|| Error::Config("no task given".into()))?;
    if !matches!(task, Task::Analytic | Task::Suite) {
        cfg.kernel()?;
    }
    if let Some(ps) = &cfg.p {
        if ps.is_empty() {
            return Err(Error::Config("p is empty".into()));
        }
        ps.iter().try_for_each(|&p| check_p(p))?;
    }
    if let Some(names) = &cfg.statistics {
        let (k_min, k_max) = cfg.k_range(0, 8);
        expand_statistics(names, k_min, k_max)?;
    }
    if let (Some(a), Some(b)) = (cfg.k_min, cfg.k_max) {
        if a > b {
            return Err(Error::Config(format!("k_min {a} exceeds k_max {b}")));
        }
    }
    if cfg.replicas.is_some_and(|n| n < 2) {
        return Err(Error::Config("replicas must be at least 2".into()));
    }
    if cfg.budget == Some(0) || cfg.workers == Some(0) {
        return Err(Error::Config("budget and workers must be positive".into()));
    }
    if let Some(m) = &cfg.method {
        if m != "crossing" && m != "survival" {
            return Err(Error::Config(format!("unknown method {m:?}")));
        }
    }
    if task == Task::Analytic && (cfg.alpha.is_some_and(|a| !(2..=64).contains(&a)) || cfg.beta.is_some_and(|b| !(2..=64).contains(&b))) {
        return Err(Error::Config("alpha and beta must lie in 2..=64".into()));
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_resource_limit() {
        EXIT_RESOURCE
    } else {
        EXIT_CONFIG
    }
}

fn diagnostic(e: &Error) {
    let kind = if e.is_resource_limit() { "resource_limit" } else { "config" };
    eprintln!("{}", json!({ "error": kind, "message": e.to_string() }));
}

fn write_to(path: &PathBuf, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Entry point of the `perclab` binary.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK });
        }
    };
    let result = resolve(cli.command).and_then(|cfg| {
        let art = run(&cfg)?;
        Ok((cfg, art))
    });
    let (cfg, art) = match result {
        Ok(x) => x,
        Err(e) => {
            diagnostic(&e);
            return ExitCode::from(exit_code(&e));
        }
    };
    let written = (|| -> Result<()> {
        let stdout = &mut std::io::stdout().lock();
        let csv = render_csv(&cfg, &art.rows)?;
        match &cfg.csv {
            Some(path) => write_to(path, &csv)?,
            None if art.table.is_none() => stdout.write_all(&csv)?,
            None => {}
        }
        if let Some(text) = &art.table {
            stdout.write_all(text.as_bytes())?;
        }
        if let Some(path) = &cfg.json {
            write_to(path, &render_json(&art.summary)?)?;
        }
        Ok(())
    })();
    if let Err(e) = written {
        diagnostic(&e);
        return ExitCode::from(EXIT_CONFIG);
    }
    ExitCode::from(art.exit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_are_overridden_by_flags() {
        let file = ExperimentConfig::from_toml("family = \"dl(3,2)\"\np = 0.2\nreplicas = 50\n").unwrap();
        let flags = ExperimentConfig { replicas: Some(80), ..Default::default() };
        let merged = file.overridden_by(&flags).unwrap();
        assert_eq!(merged.family.as_deref(), Some("dl(3,2)"));
        assert_eq!(merged.p, Some(vec![0.2]));
        assert_eq!(merged.replicas, Some(80));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(ExperimentConfig::from_toml("famly = \"tree(2)\""), Err(Error::Config(_))));
        assert!(ExperimentConfig::from_toml("p = [0.1, 0.2]\ntask = \"estimate\"").is_ok());
        assert!(ExperimentConfig::from_toml("task = \"nonsense\"").is_err());
    }

    #[test]
    fn statistic_ranges_expand() {
        let r = expand_statistics(&["e_k".into(), "tau_3".into(), "a_0".into()], 1, 3).unwrap();
        let names: Vec<_> = r.iter().map(|r| (spec_name(&r.spec), r.k)).collect();
        assert_eq!(names, [("e_k", 1), ("e_k", 2), ("e_k", 3), ("tau", 3), ("a_k", 0)]);
        assert!(expand_statistics(&["q_k".into()], 0, 1).is_err());
    }
}
