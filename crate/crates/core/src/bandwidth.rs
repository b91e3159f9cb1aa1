//! Cross-validated bandwidth selection.
//!
//! Each increment `i` is held out (alone for leave-one-out, with its fold for
//! k-fold) and predicted at `X_{iΔ}` from the kernel sums of the remaining
//! increments. Folds are interleaved: increment `i` belongs to fold `i mod k`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{KernelSums, Method, Target};
use crate::kernels::Kernel;
use crate::sim::SamplePath;

/// Paths at least this long default to 10-fold instead of leave-one-out.
pub const KFOLD_MIN_N: usize = 2000;
pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_GRID_COUNT: usize = 15;
pub const DEFAULT_GRID_MIN_MULT: f64 = 0.1;
pub const DEFAULT_GRID_MAX_MULT: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub h_grid: Vec<f64>,
    /// 0 means leave-one-out.
    pub folds: usize,
    pub target: Target,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvScore {
    pub h: f64,
    pub score: f64,
    /// Held-out points whose fit was feasible.
    pub feasible: usize,
}

impl CvConfig {
    /// Default grid and fold count for this path.
    pub fn for_path(path: &SamplePath, target: Target, method: Method) -> Self {
        CvConfig {
            h_grid: default_h_grid(path, DEFAULT_GRID_COUNT, DEFAULT_GRID_MIN_MULT, DEFAULT_GRID_MAX_MULT),
            folds: default_folds(path.increments()),
            target,
            method,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.h_grid.is_empty() {
            return Err(Error::Usage("bandwidth grid is empty".into()));
        }
        if self.h_grid.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(Error::Usage("bandwidths must be positive and finite".into()));
        }
        if self.h_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Usage("bandwidth grid must be strictly ascending".into()));
        }
        if self.folds == 1 || self.folds > n {
            return Err(Error::Usage(format!(
                "folds must be 0 (leave-one-out) or in [2, {n}], got {}",
                self.folds
            )));
        }
        Ok(())
    }
}

pub fn default_folds(n: usize) -> usize {
    if n >= KFOLD_MIN_N {
        DEFAULT_FOLDS
    } else {
        0
    }
}

/// `count` log-spaced bandwidths in `[lo_mult, hi_mult] · ŝ · n^{-1/5}`.
pub fn default_h_grid(path: &SamplePath, count: usize, lo_mult: f64, hi_mult: f64) -> Vec<f64> {
    let n = path.increments().max(1) as f64;
    let mut scale = path.state_sd() * n.powf(-0.2);
    if !(scale > 0.0) {
        scale = 1.0;
    }
    log_grid(lo_mult * scale, hi_mult * scale, count)
}

pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let ratio = (hi / lo).ln() / (count - 1) as f64;
            (0..count).map(|k| lo * (ratio * k as f64).exp()).collect()
        }
    }
}

/// Increments sorted by state, with both responses and fold labels.
struct CvDesign {
    x: Vec<f64>,
    resp_f: Vec<f64>,
    resp_z: Vec<f64>,
    fold: Vec<usize>,
}

impl CvDesign {
    fn new(path: &SamplePath, folds: usize) -> Self {
        let n = path.increments();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| path.x[a].total_cmp(&path.x[b]).then(a.cmp(&b)));
        let rf = path.drift_responses();
        let rz = path.square_responses();
        CvDesign {
            x: order.iter().map(|&i| path.x[i]).collect(),
            resp_f: order.iter().map(|&i| rf[i]).collect(),
            resp_z: order.iter().map(|&i| rz[i]).collect(),
            fold: order.iter().map(|&i| if folds == 0 { i } else { i % folds }).collect(),
        }
    }

    fn score<K: Kernel + ?Sized>(&self, h: f64, target: Target, method: Method, kernel: &K) -> Result<CvScore> {
        let radius = kernel.support_radius() * h;
        let n = self.x.len();
        let (mut lo, mut hi) = (0usize, 0usize);
        let mut sse = 0.0;
        let mut feasible = 0usize;
        for p in 0..n {
            let centre = self.x[p];
            while lo < n && self.x[lo] < centre - radius {
                lo += 1;
            }
            while hi < n && self.x[hi] <= centre + radius {
                hi += 1;
            }
            let mut sums = KernelSums::default();
            for q in lo..hi {
                if self.fold[q] == self.fold[p] {
                    continue;
                }
                let u = (self.x[q] - centre) / h;
                sums.add(kernel.eval(u), u, self.resp_f[q], self.resp_z[q]);
            }
            if let Ok(fit) = sums.estimate(target, method, centre) {
                let r = match target {
                    Target::GeneratorF => self.resp_f[p],
                    Target::ZSquared => self.resp_z[p],
                };
                sse += (r - fit).powi(2);
                feasible += 1;
            }
        }
        if feasible == 0 {
            return Err(Error::BandwidthInfeasible { h });
        }
        Ok(CvScore {
            h,
            score: sse / feasible as f64,
            feasible,
        })
    }
}

/// Mean squared held-out prediction error at bandwidth `h`.
pub fn cv_score<K: Kernel + ?Sized>(path: &SamplePath, h: f64, config: &CvConfig, kernel: &K) -> Result<CvScore> {
    if !(h > 0.0) {
        return Err(Error::Usage(format!("bandwidth must be positive, got {h}")));
    }
    if config.folds == 1 || config.folds > path.increments() {
        return Err(Error::Usage(format!("invalid fold count {}", config.folds)));
    }
    CvDesign::new(path, config.folds).score(h, config.target, config.method, kernel)
}

/// Scores for every candidate; infeasible candidates are `Err`.
pub fn cv_profile<K: Kernel + ?Sized>(
    path: &SamplePath,
    config: &CvConfig,
    kernel: &K,
) -> Result<Vec<Result<CvScore>>> {
    config.validate(path.increments())?;
    let design = CvDesign::new(path, config.folds);
    Ok(config
        .h_grid
        .par_iter()
        .map(|&h| design.score(h, config.target, config.method, kernel))
        .collect())
}

/// The CV-minimising bandwidth; ties go to the larger `h`.
pub fn select_bandwidth<K: Kernel + ?Sized>(path: &SamplePath, config: &CvConfig, kernel: &K) -> Result<f64> {
    let profile = cv_profile(path, config, kernel)?;
    argmin_larger(profile.iter().filter_map(|s| s.as_ref().ok()).map(|s| (s.h, s.score))).ok_or(
        Error::BandwidthInfeasible {
            h: *config.h_grid.last().unwrap(),
        },
    )
}

fn argmin_larger(scores: impl Iterator<Item = (f64, f64)>) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for (h, s) in scores {
        best = match best {
            Some((bh, bs)) if s > bs || (s == bs && h < bh) => Some((bh, bs)),
            _ => Some((h, s)),
        };
    }
    best.map(|(h, _)| h)
}
