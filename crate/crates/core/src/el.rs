//! Empirical-likelihood inference for `f̃(x)` and `Z̃²(x)` with local-constant
//! weights, plus the normal-theory comparator interval.
//!
//! With estimating values `g_i(θ) = K((X_i - x)/h) (r_i - θ)` the profile
//! weights are `p_i = 1 / (n (1 + λ g_i))`, where `λ` solves
//! `Σ g_i / (1 + λ g_i) = 0`, and the log ratio is `2 Σ log(1 + λ g_i)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{PointEstimate, Target};
use crate::kernels::Kernel;
use crate::quantile::{chi2_quantile_df1, normal_quantile};
use crate::sim::SamplePath;

const LAMBDA_REL_TOL: f64 = 1e-10;
const MAX_LAMBDA_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiMethod {
    El,
    Normal,
}

impl FromStr for CiMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "el" => Ok(CiMethod::El),
            "normal" => Ok(CiMethod::Normal),
            other => Err(Error::Usage(format!("unknown interval method `{other}`"))),
        }
    }
}

impl fmt::Display for CiMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CiMethod::El => "el",
            CiMethod::Normal => "normal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaSolution {
    pub lambda: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `Σ g_i / (1 + λ g_i)` at the returned `λ`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ELEvaluation {
    pub theta: f64,
    pub lambda: f64,
    pub logratio: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalResult {
    pub x: f64,
    pub lo: f64,
    pub hi: f64,
    pub alpha: f64,
    pub method: CiMethod,
    pub target: Target,
    pub point: f64,
}

impl IntervalResult {
    pub fn contains(&self, value: f64) -> bool {
        self.lo <= value && value <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// In-window kernel weights and responses (zero-weight increments dropped).
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSample {
    pub weights: Vec<f64>,
    pub responses: Vec<f64>,
}

impl LocalSample {
    pub fn new<K: Kernel + ?Sized>(path: &SamplePath, x: f64, h: f64, kernel: &K, target: Target) -> Self {
        let radius = kernel.support_radius() * h;
        let mut weights = Vec::new();
        let mut responses = Vec::new();
        for i in 0..path.increments() {
            if (path.x[i] - x).abs() > radius {
                continue;
            }
            let w = kernel.eval((path.x[i] - x) / h);
            if w == 0.0 {
                continue;
            }
            let dy = path.y[i + 1] - path.y[i];
            weights.push(w);
            responses.push(match target {
                Target::GeneratorF => dy / path.delta,
                Target::ZSquared => dy * dy / path.delta,
            });
        }
        LocalSample { weights, responses }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The local-constant estimate `Σ w r / Σ w`.
    pub fn nw(&self) -> Option<f64> {
        let den: f64 = self.weights.iter().sum();
        if self.is_empty() || !(den > 0.0) {
            return None;
        }
        let num: f64 = self.weights.iter().zip(&self.responses).map(|(w, r)| w * r).sum();
        Some(num / den)
    }

    pub fn hull(&self) -> (f64, f64) {
        self.responses
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)))
    }

    pub fn estimating_values(&self, theta: f64) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.responses)
            .map(|(w, r)| w * (r - theta))
            .collect()
    }

    pub fn evaluate(&self, theta: f64) -> ELEvaluation {
        let g = self.estimating_values(theta);
        evaluate_values(theta, &g)
    }
}

fn evaluate_values(theta: f64, g: &[f64]) -> ELEvaluation {
    match solve_lambda(g) {
        Ok(sol) => {
            let logratio: f64 = 2.0
                * g.iter()
                    .filter(|v| **v != 0.0)
                    .map(|v| (sol.lambda * v).ln_1p())
                    .sum::<f64>();
            ELEvaluation {
                theta,
                lambda: sol.lambda,
                logratio: logratio.max(0.0),
                converged: sol.converged,
                iterations: sol.iterations,
            }
        }
        Err(_) => ELEvaluation {
            theta,
            lambda: f64::NAN,
            logratio: f64::INFINITY,
            converged: false,
            iterations: 0,
        },
    }
}

/// `g_i(θ)` for every increment `i = 0..n-1`; out-of-window entries are exact zeros.
pub fn estimating_values<K: Kernel + ?Sized>(
    path: &SamplePath,
    x: f64,
    h: f64,
    kernel: &K,
    target: Target,
    theta: f64,
) -> Vec<f64> {
    (0..path.increments())
        .map(|i| {
            let w = kernel.eval((path.x[i] - x) / h);
            if w == 0.0 {
                return 0.0;
            }
            let dy = path.y[i + 1] - path.y[i];
            let r = match target {
                Target::GeneratorF => dy / path.delta,
                Target::ZSquared => dy * dy / path.delta,
            };
            w * (r - theta)
        })
        .collect()
}

/// Root of `Σ g_i / (1 + λ g_i) = 0` on `(-1/max g, -1/min g)` by
/// safeguarded Newton–bisection. Exact zeros in `g` are ignored.
pub fn solve_lambda(g: &[f64]) -> Result<LambdaSolution> {
    let (mut gmin, mut gmax, mut scale, mut nonzero) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for &v in g.iter().filter(|v| **v != 0.0) {
        gmin = gmin.min(v);
        gmax = gmax.max(v);
        scale += v.abs();
        nonzero += 1;
    }
    if nonzero == 0 {
        return Err(Error::Usage("no nonzero estimating values".into()));
    }
    if !(gmin < 0.0 && gmax > 0.0) {
        return Err(Error::HullViolation);
    }

    let dual = |lambda: f64| {
        let (mut value, mut slope) = (0.0, 0.0);
        for &v in g.iter().filter(|v| **v != 0.0) {
            let t = v / (1.0 + lambda * v);
            value += t;
            slope -= t * t;
        }
        (value, slope)
    };

    // the dual is strictly decreasing; these poles bracket the root
    let (mut a, mut b) = (-1.0 / gmax, -1.0 / gmin);
    let mut lambda = 0.0;
    let mut iterations = 0;
    let (mut value, mut slope) = dual(lambda);
    while iterations < MAX_LAMBDA_ITER {
        if value.abs() <= 1e-14 * scale {
            break;
        }
        iterations += 1;
        if value > 0.0 {
            a = lambda;
        } else {
            b = lambda;
        }
        let newton = lambda - value / slope;
        let next = if newton > a && newton < b && newton.is_finite() {
            newton
        } else {
            0.5 * (a + b)
        };
        let step = (next - lambda).abs();
        lambda = next;
        (value, slope) = dual(lambda);
        if step <= f64::EPSILON * lambda.abs() || b - a <= f64::EPSILON * lambda.abs() {
            break;
        }
    }
    Ok(LambdaSolution {
        lambda,
        converged: value.abs() <= LAMBDA_REL_TOL * scale && g.iter().all(|v| 1.0 + lambda * v > 0.0),
        iterations,
        residual: value,
    })
}

/// Profile weights `p_i = 1 / (n (1 + λ g_i))` over the nonzero `g_i`.
pub fn el_weights(g: &[f64], lambda: f64) -> Vec<f64> {
    let nz: Vec<f64> = g.iter().copied().filter(|v| *v != 0.0).collect();
    let n = nz.len() as f64;
    nz.iter().map(|v| 1.0 / (n * (1.0 + lambda * v))).collect()
}

/// EL log ratio `l(x, h, θ)`; `+∞` when θ is outside the local response hull.
pub fn el_logratio<K: Kernel + ?Sized>(
    path: &SamplePath,
    x: f64,
    h: f64,
    kernel: &K,
    target: Target,
    theta: f64,
) -> Result<ELEvaluation> {
    let local = LocalSample::new(path, x, h, kernel, target);
    if local.len() < 2 {
        return Err(Error::NoLocalData { x });
    }
    Ok(local.evaluate(theta))
}

/// EL interval `{θ : l(x, h, θ) <= χ²_{1-α}(1)}` around the local-constant estimate.
pub fn el_interval<K: Kernel + ?Sized>(
    path: &SamplePath,
    x: f64,
    h: f64,
    kernel: &K,
    target: Target,
    alpha: f64,
) -> Result<IntervalResult> {
    check_alpha(alpha)?;
    let local = LocalSample::new(path, x, h, kernel, target);
    if local.len() < 2 {
        return Err(Error::NoLocalData { x });
    }
    let (lo, hi, point) = profile_interval(&local, alpha)?;
    Ok(IntervalResult {
        x,
        lo,
        hi,
        alpha,
        method: CiMethod::El,
        target,
        point,
    })
}

/// Invert the profile on both sides of the NW estimate. Returns `(lo, hi, point)`.
pub fn profile_interval(local: &LocalSample, alpha: f64) -> Result<(f64, f64, f64)> {
    let point = local.nw().ok_or(Error::NoLocalData { x: f64::NAN })?;
    let crit = chi2_quantile_df1(1.0 - alpha)?;
    let (rmin, rmax) = local.hull();
    let sw: f64 = local.weights.iter().sum();
    let spread: f64 = local
        .weights
        .iter()
        .zip(&local.responses)
        .map(|(w, r)| (w * (r - point)).powi(2))
        .sum::<f64>()
        .sqrt()
        / sw;
    let first_step = if spread > 0.0 { spread } else { 1e-3 * (rmax - rmin) };
    let tol = 1e-8 * (1.0 + point.abs());
    let lo = profile_crossing(local, point, -1.0, rmin, first_step, crit, tol);
    let hi = profile_crossing(local, point, 1.0, rmax, first_step, crit, tol);
    Ok((lo, hi, point))
}

fn profile_crossing(local: &LocalSample, point: f64, dir: f64, edge: f64, first_step: f64, crit: f64, tol: f64) -> f64 {
    if (edge - point) * dir <= 0.0 || !(first_step > 0.0) {
        return point;
    }
    // geometric expansion until the critical value or the hull edge is crossed
    let mut inside = point;
    let mut step = first_step;
    let outside = loop {
        let theta = point + dir * step;
        if (theta - edge) * dir >= 0.0 {
            break edge;
        }
        if local.evaluate(theta).logratio >= crit {
            break theta;
        }
        inside = theta;
        step *= 2.0;
    };
    let (mut a, mut b) = (inside, outside);
    while (b - a).abs() > tol {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if local.evaluate(mid).logratio >= crit {
            b = mid;
        } else {
            a = mid;
        }
    }
    0.5 * (a + b)
}

/// `point ± z_{1-α/2} √variance`.
pub fn normal_interval(estimate: &PointEstimate, alpha: f64) -> Result<IntervalResult> {
    check_alpha(alpha)?;
    if !estimate.variance.is_finite() || estimate.variance < 0.0 {
        return Err(Error::Usage(format!(
            "variance must be finite and nonnegative, got {}",
            estimate.variance
        )));
    }
    let half = normal_quantile(1.0 - 0.5 * alpha) * estimate.variance.sqrt();
    Ok(IntervalResult {
        x: estimate.x,
        lo: estimate.value - half,
        hi: estimate.value + half,
        alpha,
        method: CiMethod::Normal,
        target: estimate.kind.target,
        point: estimate.value,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Usage(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}
