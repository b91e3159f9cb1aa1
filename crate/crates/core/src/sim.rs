//! Euler–Maruyama simulation of the forward state and the observed pair
//! `(X_{iΔ}, Y_{iΔ})`.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelSpec;

/// Paths are aborted once `|X|` exceeds this.
pub const BLOWUP_LIMIT: f64 = 1e8;

/// Equispaced observations of the forward and backward components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub delta: f64,
    pub span: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Index of the first observation outside the exit domain, if any.
    pub truncated_at: Option<usize>,
}

impl SamplePath {
    /// Build a path from raw observations with `span = delta * (len - 1)`.
    pub fn from_observations(delta: f64, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Usage(format!(
                "state and response lengths differ ({} vs {})",
                x.len(),
                y.len()
            )));
        }
        if x.is_empty() {
            return Err(Error::Usage("empty path".into()));
        }
        if !(delta > 0.0) {
            return Err(Error::Usage(format!("time step must be positive, got {delta}")));
        }
        Ok(SamplePath {
            delta,
            span: delta * (x.len() - 1) as f64,
            x,
            y,
            truncated_at: None,
        })
    }

    /// Number of increments `n`.
    pub fn increments(&self) -> usize {
        self.x.len().saturating_sub(1)
    }

    /// `(Y_{(i+1)Δ} - Y_{iΔ}) / Δ` for `i = 0..n-1`.
    pub fn drift_responses(&self) -> Vec<f64> {
        self.y.windows(2).map(|w| (w[1] - w[0]) / self.delta).collect()
    }

    /// `(Y_{(i+1)Δ} - Y_{iΔ})² / Δ` for `i = 0..n-1`.
    pub fn square_responses(&self) -> Vec<f64> {
        self.y
            .windows(2)
            .map(|w| {
                let d = w[1] - w[0];
                d * d / self.delta
            })
            .collect()
    }

    /// Sample standard deviation of all observed states.
    pub fn state_sd(&self) -> f64 {
        let n = self.x.len() as f64;
        if self.x.len() < 2 {
            return 0.0;
        }
        let mean = self.x.iter().sum::<f64>() / n;
        let ss: f64 = self.x.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (n - 1.0)).sqrt()
    }

    pub fn state_range(&self) -> (f64, f64) {
        self.x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "i,t,x,y")?;
        for (i, (x, y)) in self.x.iter().zip(&self.y).enumerate() {
            writeln!(out, "{},{:e},{:e},{:e}", i, i as f64 * self.delta, x, y)?;
        }
        Ok(())
    }
}

fn check_grid(span: f64, n: usize) -> Result<f64> {
    if !(span > 0.0) || !span.is_finite() {
        return Err(Error::Usage(format!("time span must be positive, got {span}")));
    }
    if n < 2 {
        return Err(Error::Usage(format!("need at least 2 steps, got {n}")));
    }
    Ok(span / n as f64)
}

/// Euler–Maruyama with caller-supplied standard normal shocks `noise(i)`.
///
/// The exit domain of the model, if any, is applied afterwards.
pub fn simulate_with_noise<F>(model: &ModelSpec, span: f64, n: usize, mut noise: F) -> Result<SamplePath>
where
    F: FnMut(usize) -> f64,
{
    let delta = check_grid(span, n)?;
    let sqrt_delta = delta.sqrt();
    let mut x = Vec::with_capacity(n + 1);
    let mut state = model.x0;
    x.push(state);
    for i in 0..n {
        let xi = noise(i);
        state += model.drift(state) * delta + model.diffusion(state) * sqrt_delta * xi;
        if !state.is_finite() || state.abs() > BLOWUP_LIMIT {
            return Err(Error::SimulationBlowup { step: i + 1, state });
        }
        x.push(state);
    }
    let y = x.iter().map(|&v| model.u(v)).collect();
    let path = SamplePath {
        delta,
        span,
        x,
        y,
        truncated_at: None,
    };
    Ok(match model.exit_domain {
        Some(domain) => truncate_at_exit(path, domain),
        None => path,
    })
}

/// Simulate `n` Euler steps over `[0, span]`; shocks come from a ChaCha8 stream keyed by `seed`.
pub fn simulate_path(model: &ModelSpec, span: f64, n: usize, seed: u64) -> Result<SamplePath> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_with_noise(model, span, n, |_| StandardNormal.sample(&mut rng))
}

/// Cut the path right after the first observation outside the closed interval.
pub fn truncate_at_exit(mut path: SamplePath, domain: (f64, f64)) -> SamplePath {
    let (l, r) = domain;
    if let Some(k) = path.x.iter().position(|&v| v < l || v > r) {
        path.x.truncate(k + 1);
        path.y.truncate(k + 1);
        path.span = path.delta * k as f64;
        path.truncated_at = Some(k);
    }
    path
}

/// Deterministic per-replication seed: SplitMix64 finalizer over
/// `master + (l + 1) * φ`. Injective in `l` for a fixed master seed.
pub fn replication_seed(master: u64, replication: u64) -> u64 {
    let mut z = master.wrapping_add(replication.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
