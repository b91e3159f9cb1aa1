//! `fbsde`: simulate paths, estimate the generator and `Z²`, build intervals,
//! and run the Monte Carlo tables.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use fbsde_core::el::{el_interval, normal_interval};
use fbsde_core::estimators::{estimate, evaluation_grid};
use fbsde_core::harness::{emit_tables, run_coverage, run_mc, write_run_meta};
use fbsde_core::sim::simulate_path;
use fbsde_core::{
    Bandwidth, CiMethod, EstimatorKind, ExperimentConfig, KernelId, Method, ModelSpec, SamplePath, Target,
};

#[derive(Parser)]
#[command(
    name = "fbsde",
    version,
    about = "Kernel estimation and empirical-likelihood inference for FBSDE generators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one path and write it as CSV (i,t,x,y).
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Point estimates on a grid for one simulated path.
    Estimate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Confidence intervals on a grid for one simulated path.
    Ci {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "ci-method", value_enum)]
        ci_method: Option<CiChoice>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo MAE/MSE table.
    #[command(name = "mc-table")]
    McTable {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "out-dir", default_value = ".")]
        out_dir: PathBuf,
    },
    /// Monte Carlo coverage of EL and normal intervals.
    Coverage {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "ci-method", value_enum)]
        ci_method: Option<CiChoice>,
        #[arg(long = "out-dir", default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CiChoice {
    El,
    Normal,
    Both,
}

impl CiChoice {
    fn methods(self) -> Vec<CiMethod> {
        match self {
            CiChoice::El => vec![CiMethod::El],
            CiChoice::Normal => vec![CiMethod::Normal],
            CiChoice::Both => vec![CiMethod::El, CiMethod::Normal],
        }
    }
}

/// Flags shared by every subcommand; each overrides the JSON config.
#[derive(Args)]
struct CommonArgs {
    /// JSON experiment config (field names as in ExperimentConfig).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    /// Model parameter override, e.g. `--param sigma=0.3`.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    #[arg(long = "T")]
    span: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "L")]
    replications: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    kernel: Option<KernelId>,
    #[arg(long, value_delimiter = ',')]
    method: Vec<Method>,
    #[arg(long, value_delimiter = ',')]
    target: Vec<Target>,
    /// A positive number or `cv`.
    #[arg(long)]
    bandwidth: Option<Bandwidth>,
    /// Number of evaluation points.
    #[arg(long = "grid")]
    grid: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "cv-folds")]
    cv_folds: Option<usize>,
    #[arg(long = "cv-grid-min")]
    cv_grid_min: Option<f64>,
    #[arg(long = "cv-grid-max")]
    cv_grid_max: Option<f64>,
    #[arg(long = "cv-grid-count")]
    cv_grid_count: Option<usize>,
}

fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}

impl CommonArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                ExperimentConfig::from_json(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(name) = &self.model {
            if *name != cfg.model.name {
                cfg.model.params.clear();
            }
            cfg.model.name = name.clone();
        }
        for (k, v) in &self.params {
            cfg.model.params.insert(k.clone(), *v);
        }
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$target = v; })*
            };
        }
        set!(span => span, n => n, replications => replications, seed => seed, kernel => kernel,
             bandwidth => bandwidth, grid => m, alpha => alpha);
        if !self.method.is_empty() {
            cfg.methods = self.method.clone();
        }
        if !self.target.is_empty() {
            cfg.targets = self.target.clone();
        }
        if self.cv_folds.is_some() {
            cfg.cv_folds = self.cv_folds;
        }
        if self.cv_grid_min.is_some() {
            cfg.cv_grid_min = self.cv_grid_min;
        }
        if self.cv_grid_max.is_some() {
            cfg.cv_grid_max = self.cv_grid_max;
        }
        if self.cv_grid_count.is_some() {
            cfg.cv_grid_count = self.cv_grid_count;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Single-path commands take one target and one method (default `f`, `nw`).
    fn single_kind(&self) -> Result<EstimatorKind> {
        let target = match self.target.as_slice() {
            [] => Target::GeneratorF,
            [t] => *t,
            _ => bail!("this command takes a single --target"),
        };
        let method = match self.method.as_slice() {
            [] => Method::Nw,
            [m] => *m,
            _ => bail!("this command takes a single --method"),
        };
        Ok(EstimatorKind::new(target, method))
    }
}

fn simulate_one(cfg: &ExperimentConfig) -> Result<(ModelSpec, SamplePath)> {
    let model = cfg.model.build()?;
    let path = simulate_path(&model, cfg.span, cfg.n, cfg.seed)?;
    Ok((model, path))
}

fn writer(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:e}")
    }
}

fn truth(model: &ModelSpec, target: Target, x: f64) -> f64 {
    match target {
        Target::GeneratorF => model.true_f(x),
        Target::ZSquared => model.true_z2(x),
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { common, out } => {
            let cfg = common.resolve()?;
            let (_, path) = simulate_one(&cfg)?;
            path.write_csv(writer(&out)?)?;
        }
        Command::Estimate { common, out } => {
            let cfg = common.resolve()?;
            let kind = common.single_kind()?;
            let (model, path) = simulate_one(&cfg)?;
            let h = cfg.choose_bandwidth(&path, kind.target, kind.method)?;
            eprintln!("# bandwidth={h:e} target={} method={}", kind.target, kind.method);
            let kernel = cfg.kernel_spec();
            let mut w = writer(&out)?;
            writeln!(w, "x,estimate,true,local_time,variance,n_effective")?;
            for x in evaluation_grid(&path, cfg.m) {
                match estimate(&path, x, h, &kernel, kind) {
                    Ok(e) => writeln!(
                        w,
                        "{},{},{},{},{},{}",
                        fmt_f(x),
                        fmt_f(e.value),
                        fmt_f(truth(&model, kind.target, x)),
                        fmt_f(e.local_time),
                        fmt_f(e.variance),
                        e.n_effective
                    )?,
                    Err(err) => {
                        eprintln!("# x={x:e}: {err}");
                        writeln!(w, "{},nan,{},0e0,nan,0", fmt_f(x), fmt_f(truth(&model, kind.target, x)))?
                    }
                }
            }
        }
        Command::Ci { common, ci_method, out } => {
            let cfg = common.resolve()?;
            let kind = common.single_kind()?;
            let target = kind.target;
            let methods = ci_method
                .map(CiChoice::methods)
                .unwrap_or_else(|| cfg.ci_methods.clone());
            let (_, path) = simulate_one(&cfg)?;
            let h = cfg.choose_bandwidth(&path, target, Method::Nw)?;
            eprintln!("# bandwidth={h:e} target={target}");
            let kernel = cfg.kernel_spec();
            let nw = EstimatorKind::new(target, Method::Nw);
            let mut w = writer(&out)?;
            writeln!(w, "x,point,lo,hi,method,alpha")?;
            for x in evaluation_grid(&path, cfg.m) {
                for &method in &methods {
                    let ci = match method {
                        CiMethod::El => el_interval(&path, x, h, &kernel, target, cfg.alpha),
                        CiMethod::Normal => {
                            estimate(&path, x, h, &kernel, nw).and_then(|e| normal_interval(&e, cfg.alpha))
                        }
                    };
                    match ci {
                        Ok(ci) => writeln!(
                            w,
                            "{},{},{},{},{},{}",
                            fmt_f(x),
                            fmt_f(ci.point),
                            fmt_f(ci.lo),
                            fmt_f(ci.hi),
                            method,
                            fmt_f(cfg.alpha)
                        )?,
                        Err(err) => eprintln!("# x={x:e} {method}: {err}"),
                    }
                }
            }
        }
        Command::McTable { common, out_dir } => {
            let cfg = common.resolve()?;
            let start = Instant::now();
            let summary = run_mc(&cfg)?;
            for f in emit_tables(&summary, &out_dir)? {
                eprintln!("wrote {}", f.display());
            }
            write_run_meta(&summary, &out_dir, start.elapsed().as_secs_f64())?;
        }
        Command::Coverage {
            common,
            ci_method,
            out_dir,
        } => {
            let mut cfg = common.resolve()?;
            if let Some(choice) = ci_method {
                cfg.ci_methods = choice.methods();
            }
            let start = Instant::now();
            let summary = run_coverage(&cfg)?;
            for f in emit_tables(&summary, &out_dir)? {
                eprintln!("wrote {}", f.display());
            }
            write_run_meta(&summary, &out_dir, start.elapsed().as_secs_f64())?;
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(2);
    }
}
