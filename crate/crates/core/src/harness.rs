//! Monte Carlo driver: MAE/MSE tables and interval coverage.
//!
//! Replications are independent work units keyed by
//! [`replication_seed`](crate::sim::replication_seed); results are collected
//! in replication order so the aggregate never depends on scheduling.
//!
//! MAE and MSE average the estimates over replications *before* comparing
//! with the truth:
//!
//! ```text
//! MAE = (1/m) Σ_i | (1/L) Σ_l v̂_l(x_i) - v(x_i) |
//! MSE = (1/m) Σ_i | (1/L) Σ_l v̂_l(x_i) - v(x_i) |²
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::{log_grid, select_bandwidth, CvConfig, DEFAULT_GRID_COUNT};
use crate::el::{normal_interval, profile_interval, CiMethod, IntervalResult, LocalSample};
use crate::error::{Error, Result};
use crate::estimators::{estimate_from_sums, evaluation_grid, kernel_sums, EstimatorKind, Method, Target};
use crate::kernels::{KernelId, KernelSpec};
use crate::model::{ModelConfig, ModelSpec};
use crate::sim::{replication_seed, simulate_path, SamplePath};

/// Fixed bandwidth or per-replication cross-validation. Serialised as a
/// number or the string `"cv"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Fixed(f64),
    Cv,
}

impl Serialize for Bandwidth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bandwidth::Fixed(h) => s.serialize_f64(*h),
            Bandwidth::Cv => s.serialize_str("cv"),
        }
    }
}

impl<'de> Deserialize<'de> for Bandwidth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(h) => Ok(Bandwidth::Fixed(h)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl std::str::FromStr for Bandwidth {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("cv") {
            return Ok(Bandwidth::Cv);
        }
        s.parse::<f64>()
            .map(Bandwidth::Fixed)
            .map_err(|_| Error::Usage(format!("bandwidth must be a number or `cv`, got `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(rename = "T")]
    pub span: f64,
    pub n: usize,
    #[serde(rename = "L")]
    pub replications: usize,
    pub m: usize,
    pub kernel: KernelId,
    pub methods: Vec<Method>,
    pub targets: Vec<Target>,
    pub bandwidth: Bandwidth,
    pub alpha: f64,
    pub seed: u64,
    pub ci_methods: Vec<CiMethod>,
    /// 0 = leave-one-out; unset = 10-fold for n >= 2000, else leave-one-out.
    pub cv_folds: Option<usize>,
    pub cv_grid_min: Option<f64>,
    pub cv_grid_max: Option<f64>,
    pub cv_grid_count: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelConfig::named("example1"),
            span: 10.0,
            n: 5000,
            replications: 200,
            m: 20,
            kernel: KernelId::Epanechnikov,
            methods: vec![Method::Nw, Method::Ll],
            targets: vec![Target::GeneratorF, Target::ZSquared],
            bandwidth: Bandwidth::Cv,
            alpha: 0.05,
            seed: 1,
            ci_methods: vec![CiMethod::El, CiMethod::Normal],
            cv_folds: None,
            cv_grid_min: None,
            cv_grid_max: None,
            cv_grid_count: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Usage(msg));
        if self.replications < 1 {
            return bad("L must be at least 1".into());
        }
        if self.m < 1 {
            return bad("m must be at least 1".into());
        }
        if !(self.span > 0.0) || !self.span.is_finite() {
            return bad(format!("T must be positive, got {}", self.span));
        }
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if let Bandwidth::Fixed(h) = self.bandwidth {
            if !(h > 0.0) || !h.is_finite() {
                return bad(format!("bandwidth must be positive, got {h}"));
            }
        }
        match (self.cv_grid_min, self.cv_grid_max) {
            (Some(a), Some(b)) if !(a > 0.0 && b > a) => {
                return bad(format!("cv grid bounds must satisfy 0 < min < max, got [{a}, {b}]"))
            }
            (Some(_), None) | (None, Some(_)) => {
                return bad("cv_grid_min and cv_grid_max must be given together".into())
            }
            _ => {}
        }
        self.model.build()?;
        Ok(())
    }

    pub fn kernel_spec(&self) -> KernelSpec {
        KernelSpec::new(self.kernel)
    }

    pub fn cv_config(&self, path: &SamplePath, target: Target, method: Method) -> CvConfig {
        let mut cfg = CvConfig::for_path(path, target, method);
        if let Some(folds) = self.cv_folds {
            cfg.folds = folds;
        }
        let count = self.cv_grid_count.unwrap_or(DEFAULT_GRID_COUNT).max(1);
        if let (Some(lo), Some(hi)) = (self.cv_grid_min, self.cv_grid_max) {
            cfg.h_grid = log_grid(lo, hi, count);
        } else if count != cfg.h_grid.len() {
            let (lo, hi) = (cfg.h_grid[0], *cfg.h_grid.last().unwrap());
            cfg.h_grid = log_grid(lo, hi, count);
        }
        cfg
    }

    /// Bandwidth for one replication: fixed, or selected by CV.
    pub fn choose_bandwidth(&self, path: &SamplePath, target: Target, method: Method) -> Result<f64> {
        match self.bandwidth {
            Bandwidth::Fixed(h) => Ok(h),
            Bandwidth::Cv => select_bandwidth(path, &self.cv_config(path, target, method), &self.kernel_spec()),
        }
    }
}

/// Per-(target, method) MAE/MSE row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub target: Target,
    pub method: Method,
    pub mae: f64,
    pub mse: f64,
    /// Grid points with at least one successful replication.
    pub points_used: usize,
    /// Replication-average estimate per grid point (`None` = missing cell).
    pub point_means: Vec<Option<f64>>,
    /// Failed (replication, grid point) pairs.
    pub failures: usize,
    pub median_h: Option<f64>,
}

/// Coverage tally at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub x: f64,
    pub target: Target,
    pub ci_method: CiMethod,
    pub covered: usize,
    pub count: usize,
    pub coverage: f64,
    pub mean_width: f64,
    /// Intervals with a non-finite width (excluded from `mean_width`).
    pub unbounded: usize,
}

/// Intervals from the first replication, for figure reproduction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRow {
    pub x: f64,
    pub target: Target,
    pub truth: f64,
    pub point: Option<f64>,
    pub normal: Option<(f64, f64)>,
    pub el: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthRecord {
    pub target: Target,
    pub method: Method,
    /// Chosen bandwidth per replication (`None` when selection failed).
    pub per_replication: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub config: ExperimentConfig,
    pub grid: Vec<f64>,
    pub tables: Vec<TableRow>,
    pub coverage: Vec<CoverageRow>,
    pub intervals: Vec<IntervalRow>,
    pub bandwidths: Vec<BandwidthRecord>,
    /// Error counts keyed by error kind.
    pub failures: BTreeMap<String, usize>,
}

impl McSummary {
    pub fn table(&self, target: Target, method: Method) -> Option<&TableRow> {
        self.tables.iter().find(|r| r.target == target && r.method == method)
    }

    /// Pooled coverage over the grid indices in `points`.
    pub fn pooled_coverage(&self, target: Target, ci: CiMethod, points: std::ops::Range<usize>) -> Option<f64> {
        let rows: Vec<&CoverageRow> = self
            .coverage
            .iter()
            .filter(|r| r.target == target && r.ci_method == ci)
            .collect();
        let (covered, count) = rows
            .get(points)?
            .iter()
            .fold((0, 0), |(c, n), r| (c + r.covered, n + r.count));
        (count > 0).then(|| covered as f64 / count as f64)
    }

    pub fn mean_width(&self, target: Target, ci: CiMethod) -> Option<f64> {
        let (sum, n) = self
            .coverage
            .iter()
            .filter(|r| r.target == target && r.ci_method == ci && r.mean_width.is_finite())
            .fold((0.0, 0usize), |(s, n), r| {
                (s + r.mean_width * r.count as f64, n + r.count)
            });
        (n > 0).then(|| sum / n as f64)
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::NoLocalData { .. } => "no_local_data",
        Error::DegenerateDesign { .. } => "degenerate_design",
        Error::BandwidthInfeasible { .. } => "bandwidth_infeasible",
        Error::SimulationBlowup { .. } => "simulation_blowup",
        Error::HullViolation => "hull_violation",
        Error::Usage(_) | Error::UnknownModel(_) => "usage",
        Error::Io(_) => "io",
    }
}

/// Everything one replication contributes.
#[derive(Debug, Default)]
struct Replication {
    /// Per requested (target, method): bandwidth and per-point estimates.
    estimates: Vec<(Option<f64>, Vec<Option<f64>>)>,
    /// Per requested (target, ci method): per-point intervals.
    intervals: Vec<Vec<Option<IntervalResult>>>,
    /// NW point estimate per (target, grid point), for the figure file.
    points: Vec<Vec<Option<f64>>>,
    failures: BTreeMap<&'static str, usize>,
}

impl Replication {
    fn fail(&mut self, e: &Error) {
        *self.failures.entry(error_kind(e)).or_default() += 1;
    }
}

struct Plan<'a> {
    config: &'a ExperimentConfig,
    model: ModelSpec,
    kernel: KernelSpec,
    grid: Vec<f64>,
    kinds: Vec<EstimatorKind>,
    ci_cells: Vec<(Target, CiMethod)>,
}

impl Plan<'_> {
    fn run(&self, l: usize) -> Replication {
        let mut rep = Replication::default();
        let seed = replication_seed(self.config.seed, l as u64);
        let path = match simulate_path(&self.model, self.config.span, self.config.n, seed) {
            Ok(p) if p.increments() >= 1 => p,
            Ok(_) => {
                rep.fail(&Error::NoLocalData { x: self.model.x0 });
                return self.empty(rep);
            }
            Err(e) => {
                rep.fail(&e);
                return self.empty(rep);
            }
        };

        for kind in &self.kinds {
            let h = match self.config.choose_bandwidth(&path, kind.target, kind.method) {
                Ok(h) => h,
                Err(e) => {
                    rep.fail(&e);
                    rep.estimates.push((None, vec![None; self.grid.len()]));
                    continue;
                }
            };
            let values = self
                .grid
                .iter()
                .map(|&x| {
                    let sums = kernel_sums(&path, x, h, &self.kernel);
                    match sums.estimate(kind.target, kind.method, x) {
                        Ok(v) => Some(v),
                        Err(e) => {
                            rep.fail(&e);
                            None
                        }
                    }
                })
                .collect();
            rep.estimates.push((Some(h), values));
        }

        let mut ci_targets: Vec<Target> = self.ci_cells.iter().map(|c| c.0).collect();
        ci_targets.dedup();
        let mut by_target: BTreeMap<Target, Vec<BTreeMap<CiMethod, Option<IntervalResult>>>> = BTreeMap::new();
        for &target in &ci_targets {
            let methods: Vec<CiMethod> = self.ci_cells.iter().filter(|c| c.0 == target).map(|c| c.1).collect();
            let h = match self.config.choose_bandwidth(&path, target, Method::Nw) {
                Ok(h) => h,
                Err(e) => {
                    rep.fail(&e);
                    by_target.insert(target, vec![BTreeMap::new(); self.grid.len()]);
                    rep.points.push(vec![None; self.grid.len()]);
                    continue;
                }
            };
            let mut cells = Vec::with_capacity(self.grid.len());
            let mut points = Vec::with_capacity(self.grid.len());
            for &x in &self.grid {
                let mut cell = BTreeMap::new();
                let sums = kernel_sums(&path, x, h, &self.kernel);
                let kind = EstimatorKind::new(target, Method::Nw);
                let estimate = estimate_from_sums(&sums, kind, x, h, path.delta, &self.kernel);
                points.push(estimate.as_ref().ok().map(|e| e.value));
                for &method in &methods {
                    let ci = match (method, &estimate) {
                        (_, Err(e)) => Err(e.clone()),
                        (CiMethod::Normal, Ok(est)) => normal_interval(est, self.config.alpha),
                        (CiMethod::El, Ok(_)) => {
                            let local = LocalSample::new(&path, x, h, &self.kernel, target);
                            if local.len() < 2 {
                                Err(Error::NoLocalData { x })
                            } else {
                                profile_interval(&local, self.config.alpha).map(|(lo, hi, point)| IntervalResult {
                                    x,
                                    lo,
                                    hi,
                                    alpha: self.config.alpha,
                                    method: CiMethod::El,
                                    target,
                                    point,
                                })
                            }
                        }
                    };
                    let ci = match ci {
                        Ok(ci) => Some(ci),
                        Err(e) => {
                            rep.fail(&e);
                            None
                        }
                    };
                    cell.insert(method, ci);
                }
                cells.push(cell);
            }
            by_target.insert(target, cells);
            rep.points.push(points);
        }
        for &(target, method) in &self.ci_cells {
            let cells = &by_target[&target];
            rep.intervals
                .push(cells.iter().map(|c| c.get(&method).copied().flatten()).collect());
        }
        rep
    }

    fn empty(&self, mut rep: Replication) -> Replication {
        let m = self.grid.len();
        rep.estimates = self.kinds.iter().map(|_| (None, vec![None; m])).collect();
        rep.intervals = self.ci_cells.iter().map(|_| vec![None; m]).collect();
        let mut targets: Vec<Target> = self.ci_cells.iter().map(|c| c.0).collect();
        targets.dedup();
        rep.points = targets.iter().map(|_| vec![None; m]).collect();
        rep
    }
}

fn dedup_sorted<T: Ord + Copy>(items: &[T]) -> Vec<T> {
    let mut v = items.to_vec();
    v.sort();
    v.dedup();
    v
}

fn truth(model: &ModelSpec, target: Target, x: f64) -> f64 {
    match target {
        Target::GeneratorF => model.true_f(x),
        Target::ZSquared => model.true_z2(x),
    }
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let k = values.len();
    Some(if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    })
}

/// MAE and MSE of replication-averaged estimates. Missing cells
/// are skipped; returns `(mae, mse, cells_used)`.
pub fn mae_mse(point_means: &[Option<f64>], truths: &[f64]) -> (f64, f64, usize) {
    let errors: Vec<f64> = point_means
        .iter()
        .zip(truths)
        .filter_map(|(mean, t)| mean.map(|v| v - t))
        .collect();
    if errors.is_empty() {
        return (f64::NAN, f64::NAN, 0);
    }
    let k = errors.len() as f64;
    (
        errors.iter().map(|e| e.abs()).sum::<f64>() / k,
        errors.iter().map(|e| e * e).sum::<f64>() / k,
        errors.len(),
    )
}

/// Coverage and mean finite width of the intervals computed at one point.
pub fn tally_coverage(x: f64, target: Target, ci_method: CiMethod, cis: &[IntervalResult], truth: f64) -> CoverageRow {
    let covered = cis.iter().filter(|ci| ci.contains(truth)).count();
    let finite: Vec<f64> = cis.iter().map(|ci| ci.width()).filter(|w| w.is_finite()).collect();
    CoverageRow {
        x,
        target,
        ci_method,
        covered,
        count: cis.len(),
        coverage: if cis.is_empty() {
            f64::NAN
        } else {
            covered as f64 / cis.len() as f64
        },
        mean_width: if finite.is_empty() {
            f64::NAN
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        },
        unbounded: cis.len() - finite.len(),
    }
}

fn run_experiment(config: &ExperimentConfig, tables: bool, coverage: bool) -> Result<McSummary> {
    config.validate()?;
    let model = config.model.build()?;
    let kernel = config.kernel_spec();
    let targets = dedup_sorted(&config.targets);
    let methods = dedup_sorted(&config.methods);
    let ci_methods = dedup_sorted(&config.ci_methods);

    let kinds: Vec<EstimatorKind> = if tables {
        targets
            .iter()
            .flat_map(|&t| methods.iter().map(move |&m| EstimatorKind::new(t, m)))
            .collect()
    } else {
        Vec::new()
    };
    let ci_cells: Vec<(Target, CiMethod)> = if coverage {
        if ci_methods.is_empty() {
            return Err(Error::Usage("coverage run needs at least one interval method".into()));
        }
        targets
            .iter()
            .flat_map(|&t| ci_methods.iter().map(move |&c| (t, c)))
            .collect()
    } else {
        Vec::new()
    };

    // the grid comes from the first replication and is shared by all
    let first = simulate_path(&model, config.span, config.n, replication_seed(config.seed, 0))?;
    let grid = evaluation_grid(&first, config.m);

    let plan = Plan {
        config,
        model: model.clone(),
        kernel,
        grid,
        kinds,
        ci_cells,
    };
    let reps: Vec<Replication> = (0..config.replications).into_par_iter().map(|l| plan.run(l)).collect();

    let mut failures: BTreeMap<String, usize> = BTreeMap::new();
    for rep in &reps {
        for (k, v) in &rep.failures {
            *failures.entry(k.to_string()).or_default() += v;
        }
    }

    let m = plan.grid.len();
    let mut table_rows = Vec::new();
    let mut bandwidths = Vec::new();
    for (k, kind) in plan.kinds.iter().enumerate() {
        let mut point_means = Vec::with_capacity(m);
        let mut fails = 0;
        for i in 0..m {
            let vals: Vec<f64> = reps.iter().filter_map(|r| r.estimates[k].1[i]).collect();
            fails += reps.len() - vals.len();
            point_means.push((!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64));
        }
        let truths: Vec<f64> = plan.grid.iter().map(|&x| truth(&model, kind.target, x)).collect();
        let (mae, mse, used) = mae_mse(&point_means, &truths);
        let per_rep: Vec<Option<f64>> = reps.iter().map(|r| r.estimates[k].0).collect();
        let mut chosen: Vec<f64> = per_rep.iter().flatten().copied().collect();
        table_rows.push(TableRow {
            target: kind.target,
            method: kind.method,
            mae,
            mse,
            points_used: used,
            point_means,
            failures: fails,
            median_h: median(&mut chosen),
        });
        bandwidths.push(BandwidthRecord {
            target: kind.target,
            method: kind.method,
            per_replication: per_rep,
        });
    }

    let mut coverage_rows = Vec::new();
    for (c, &(target, ci_method)) in plan.ci_cells.iter().enumerate() {
        for (i, &x) in plan.grid.iter().enumerate() {
            let v = truth(&model, target, x);
            let cis: Vec<IntervalResult> = reps.iter().filter_map(|r| r.intervals[c][i]).collect();
            coverage_rows.push(tally_coverage(x, target, ci_method, &cis, v));
        }
    }

    let mut interval_rows = Vec::new();
    if let Some(rep0) = reps.first() {
        let mut ci_targets: Vec<Target> = plan.ci_cells.iter().map(|c| c.0).collect();
        ci_targets.dedup();
        for (t, &target) in ci_targets.iter().enumerate() {
            for (i, &x) in plan.grid.iter().enumerate() {
                let find = |method: CiMethod| {
                    plan.ci_cells
                        .iter()
                        .position(|&c| c == (target, method))
                        .and_then(|c| rep0.intervals[c][i].map(|ci| (ci.lo, ci.hi)))
                };
                interval_rows.push(IntervalRow {
                    x,
                    target,
                    truth: truth(&model, target, x),
                    point: rep0.points[t][i],
                    normal: find(CiMethod::Normal),
                    el: find(CiMethod::El),
                });
            }
        }
    }

    Ok(McSummary {
        config: config.clone(),
        grid: plan.grid,
        tables: table_rows,
        coverage: coverage_rows,
        intervals: interval_rows,
        bandwidths,
        failures,
    })
}

/// MAE/MSE for every requested (target, method).
pub fn run_mc(config: &ExperimentConfig) -> Result<McSummary> {
    run_experiment(config, true, false)
}

/// Empirical coverage and width of the requested interval methods.
pub fn run_coverage(config: &ExperimentConfig) -> Result<McSummary> {
    run_experiment(config, false, true)
}

fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_else(|| "nan".into())
}

/// Write `mae_mse.csv`, `coverage.csv` and `intervals.csv` (whichever apply)
/// into `dir`. With several targets the interval files get a `_<target>` suffix.
pub fn emit_tables(summary: &McSummary, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let cfg = &summary.config;

    if !summary.tables.is_empty() {
        let path = dir.join("mae_mse.csv");
        let mut out = fs::File::create(&path)?;
        writeln!(out, "target,method,T,n,L,mae,mse")?;
        for r in &summary.tables {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.target,
                r.method,
                fmt_f(cfg.span),
                cfg.n,
                cfg.replications,
                fmt_f(r.mae),
                fmt_f(r.mse)
            )?;
        }
        written.push(path);
    }

    if !summary.coverage.is_empty() {
        let mut targets: Vec<Target> = summary.coverage.iter().map(|r| r.target).collect();
        targets.dedup();
        let suffixed = targets.len() > 1;
        for target in targets {
            let name = |stem: &str| {
                if suffixed {
                    format!("{stem}_{target}.csv")
                } else {
                    format!("{stem}.csv")
                }
            };
            let path = dir.join(name("coverage"));
            let mut out = fs::File::create(&path)?;
            writeln!(out, "x,ci_method,coverage,mean_width")?;
            for r in summary.coverage.iter().filter(|r| r.target == target) {
                writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_f(r.x),
                    r.ci_method,
                    fmt_f(r.coverage),
                    fmt_f(r.mean_width)
                )?;
            }
            written.push(path);

            let path = dir.join(name("intervals"));
            let mut out = fs::File::create(&path)?;
            writeln!(out, "x,true,point,lo_normal,hi_normal,lo_el,hi_el")?;
            for r in summary.intervals.iter().filter(|r| r.target == target) {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    fmt_f(r.x),
                    fmt_f(r.truth),
                    fmt_opt(r.point),
                    fmt_opt(r.normal.map(|c| c.0)),
                    fmt_opt(r.normal.map(|c| c.1)),
                    fmt_opt(r.el.map(|c| c.0)),
                    fmt_opt(r.el.map(|c| c.1)),
                )?;
            }
            written.push(path);
        }
    }
    Ok(written)
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMeta<'a> {
    pub config: &'a ExperimentConfig,
    pub version: &'static str,
    pub wall_seconds: f64,
    pub failures: &'a BTreeMap<String, usize>,
    pub median_bandwidths: Vec<(String, Option<f64>)>,
    pub grid: &'a [f64],
}

/// Write `run_meta.json` next to the tables.
pub fn write_run_meta(summary: &McSummary, dir: &Path, wall_seconds: f64) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let meta = RunMeta {
        config: &summary.config,
        version: env!("CARGO_PKG_VERSION"),
        wall_seconds,
        failures: &summary.failures,
        median_bandwidths: summary
            .tables
            .iter()
            .map(|r| (format!("{}_{}", r.target, r.method), r.median_h))
            .collect(),
        grid: &summary.grid,
    };
    let path = dir.join("run_meta.json");
    fs::write(&path, serde_json::to_string_pretty(&meta)?)?;
    Ok(path)
}
