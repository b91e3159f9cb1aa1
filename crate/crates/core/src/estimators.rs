//! Local-constant (NW) and local-linear (LL) estimators of the generator
//! `f̃(x)` and of `Z̃²(x)`, the kernel local-time estimate, and plug-in
//! asymptotic variances.
//!
//! All sums run over increments `i = 0..n-1`; the final observation is never
//! a regression point. With `u_i = (X_{iΔ} - x) / h`:
//!
//! ```text
//! D(K)    = Σ K(u_i)                 N(K, f) = Σ K(u_i)  (Y_{i+1} - Y_i) / Δ
//! D(K1)   = Σ u_i K(u_i)             N(K1,f) = Σ u_i K(u_i) (Y_{i+1} - Y_i) / Δ
//! D(K2)   = Σ u_i² K(u_i)            N(K, Z) = Σ K(u_i)  (Y_{i+1} - Y_i)² / Δ
//! ```
//!
//! NW is `N(K,·)/D(K)`; LL is `[N(K,·)D(K2) - N(K1,·)D(K1)] / [D(K)D(K2) - D(K1)²]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::sim::SamplePath;

/// Relative collinearity guard for the LL denominator.
pub const LL_DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Target {
    #[serde(rename = "f")]
    GeneratorF,
    #[serde(rename = "z2")]
    ZSquared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Nw,
    Ll,
}

impl FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f" | "generator_f" => Ok(Target::GeneratorF),
            "z2" | "z_squared" => Ok(Target::ZSquared),
            other => Err(Error::Usage(format!("unknown target `{other}` (expected f or z2)"))),
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nw" => Ok(Method::Nw),
            "ll" => Ok(Method::Ll),
            other => Err(Error::Usage(format!("unknown method `{other}` (expected nw or ll)"))),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::GeneratorF => "f",
            Target::ZSquared => "z2",
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Nw => "nw",
            Method::Ll => "ll",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EstimatorKind {
    pub target: Target,
    pub method: Method,
}

impl EstimatorKind {
    pub fn new(target: Target, method: Method) -> Self {
        EstimatorKind { target, method }
    }
}

/// A point estimate with the quantities needed for normal-theory inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    pub x: f64,
    pub value: f64,
    pub h: f64,
    pub kind: EstimatorKind,
    pub local_time: f64,
    pub variance: f64,
    pub n_effective: usize,
    /// Set when an LL estimate of `Z̃²` came out negative.
    pub negative_warning: bool,
}

/// The seven weighted sums, accumulated in one pass.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KernelSums {
    pub d_k: f64,
    pub d_k1: f64,
    pub d_k2: f64,
    pub n_k_f: f64,
    pub n_k1_f: f64,
    pub n_k_z: f64,
    pub n_k1_z: f64,
    /// Observations with nonzero kernel weight.
    pub count: usize,
}

impl KernelSums {
    /// Add one increment with kernel weight `w = K(u)`, drift response
    /// `(ΔY)/Δ` and squared response `(ΔY)²/Δ`.
    #[inline]
    pub fn add(&mut self, w: f64, u: f64, resp_f: f64, resp_z: f64) {
        if w == 0.0 {
            return;
        }
        let w1 = u * w;
        self.d_k += w;
        self.d_k1 += w1;
        self.d_k2 += u * w1;
        self.n_k_f += w * resp_f;
        self.n_k1_f += w1 * resp_f;
        self.n_k_z += w * resp_z;
        self.n_k1_z += w1 * resp_z;
        self.count += 1;
    }

    /// Inverse of [`KernelSums::add`].
    #[inline]
    pub fn remove(&mut self, w: f64, u: f64, resp_f: f64, resp_z: f64) {
        if w == 0.0 {
            return;
        }
        let w1 = u * w;
        self.d_k -= w;
        self.d_k1 -= w1;
        self.d_k2 -= u * w1;
        self.n_k_f -= w * resp_f;
        self.n_k1_f -= w1 * resp_f;
        self.n_k_z -= w * resp_z;
        self.n_k1_z -= w1 * resp_z;
        self.count -= 1;
    }

    fn numerators(&self, target: Target) -> (f64, f64) {
        match target {
            Target::GeneratorF => (self.n_k_f, self.n_k1_f),
            Target::ZSquared => (self.n_k_z, self.n_k1_z),
        }
    }

    /// Local-constant ratio `N(K,·)/D(K)`; `None` when the window is empty.
    pub fn nw(&self, target: Target) -> Option<f64> {
        if self.count == 0 || self.d_k <= 0.0 {
            return None;
        }
        Some(self.numerators(target).0 / self.d_k)
    }

    /// Local-linear intercept at the window centre `x`.
    pub fn ll(&self, target: Target, x: f64) -> Result<f64> {
        let nw = self.nw(target).ok_or(Error::NoLocalData { x })?;
        let denom = self.d_k * self.d_k2 - self.d_k1 * self.d_k1;
        if !(denom > LL_DEGENERACY_TOL * self.d_k * self.d_k2) {
            return Err(Error::DegenerateDesign { x, nw_fallback: nw });
        }
        let (n0, n1) = self.numerators(target);
        Ok((n0 * self.d_k2 - n1 * self.d_k1) / denom)
    }

    pub fn estimate(&self, target: Target, method: Method, x: f64) -> Result<f64> {
        match method {
            Method::Nw => self.nw(target).ok_or(Error::NoLocalData { x }),
            Method::Ll => self.ll(target, x),
        }
    }
}

/// All kernel sums at `x` in one pass over the path.
pub fn kernel_sums<K: Kernel + ?Sized>(path: &SamplePath, x: f64, h: f64, kernel: &K) -> KernelSums {
    let mut sums = KernelSums::default();
    let radius = kernel.support_radius() * h;
    for i in 0..path.increments() {
        let xi = path.x[i];
        if (xi - x).abs() > radius {
            continue;
        }
        let u = (xi - x) / h;
        let w = kernel.eval(u);
        let dy = path.y[i + 1] - path.y[i];
        sums.add(w, u, dy / path.delta, dy * dy / path.delta);
    }
    sums
}

/// `ℓ̂(T, x) = (Δ/h) D(K)`.
pub fn local_time_hat<K: Kernel + ?Sized>(path: &SamplePath, x: f64, h: f64, kernel: &K) -> f64 {
    path.delta / h * kernel_sums(path, x, h, kernel).d_k
}

/// Plug-in variance of the `f̃` estimators: `l(K2) Ẑ² / (h ℓ̂)`.
pub fn variance_f<K: Kernel + ?Sized>(z2_hat: f64, kernel: &K, h: f64, local_time: f64) -> Result<f64> {
    if !(local_time > 0.0) {
        return Err(Error::NoLocalData { x: f64::NAN });
    }
    Ok(kernel.l_k2() * z2_hat.max(0.0) / (h * local_time))
}

/// Plug-in variance of the `Z̃²` estimators: `2 l(K2) Ẑ⁴ Δ / (h ℓ̂)`.
pub fn variance_z2<K: Kernel + ?Sized>(z2_hat: f64, kernel: &K, h: f64, local_time: f64, delta: f64) -> Result<f64> {
    if !(local_time > 0.0) {
        return Err(Error::NoLocalData { x: f64::NAN });
    }
    let z2 = z2_hat.max(0.0);
    Ok(2.0 * kernel.l_k2() * z2 * z2 * delta / (h * local_time))
}

fn check_bandwidth(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::Usage(format!("bandwidth must be positive, got {h}")))
    }
}

/// Point estimate from precomputed sums.
pub fn estimate_from_sums<K: Kernel + ?Sized>(
    sums: &KernelSums,
    kind: EstimatorKind,
    x: f64,
    h: f64,
    delta: f64,
    kernel: &K,
) -> Result<PointEstimate> {
    let value = sums.estimate(kind.target, kind.method, x)?;
    let local_time = delta / h * sums.d_k;
    let variance = match kind.target {
        Target::GeneratorF => {
            let z2 = sums.nw(Target::ZSquared).ok_or(Error::NoLocalData { x })?;
            variance_f(z2, kernel, h, local_time)
        }
        Target::ZSquared => variance_z2(value, kernel, h, local_time, delta),
    }
    .map_err(|_| Error::NoLocalData { x })?;
    Ok(PointEstimate {
        x,
        value,
        h,
        kind,
        local_time,
        variance,
        n_effective: sums.count,
        negative_warning: kind.target == Target::ZSquared && value < 0.0,
    })
}

pub fn estimate<K: Kernel + ?Sized>(
    path: &SamplePath,
    x: f64,
    h: f64,
    kernel: &K,
    kind: EstimatorKind,
) -> Result<PointEstimate> {
    check_bandwidth(h)?;
    let sums = kernel_sums(path, x, h, kernel);
    estimate_from_sums(&sums, kind, x, h, path.delta, kernel)
}

pub fn estimate_nw_f<K: Kernel + ?Sized>(path: &SamplePath, x: f64, h: f64, kernel: &K) -> Result<PointEstimate> {
    estimate(path, x, h, kernel, EstimatorKind::new(Target::GeneratorF, Method::Nw))
}

pub fn estimate_ll_f<K: Kernel + ?Sized>(path: &SamplePath, x: f64, h: f64, kernel: &K) -> Result<PointEstimate> {
    estimate(path, x, h, kernel, EstimatorKind::new(Target::GeneratorF, Method::Ll))
}

pub fn estimate_nw_z2<K: Kernel + ?Sized>(path: &SamplePath, x: f64, h: f64, kernel: &K) -> Result<PointEstimate> {
    estimate(path, x, h, kernel, EstimatorKind::new(Target::ZSquared, Method::Nw))
}

pub fn estimate_ll_z2<K: Kernel + ?Sized>(path: &SamplePath, x: f64, h: f64, kernel: &K) -> Result<PointEstimate> {
    estimate(path, x, h, kernel, EstimatorKind::new(Target::ZSquared, Method::Ll))
}

/// `m` equispaced points over the central 80% of the observed state range.
pub fn evaluation_grid(path: &SamplePath, m: usize) -> Vec<f64> {
    let (lo, hi) = path.state_range();
    let pad = 0.1 * (hi - lo);
    let (a, b) = (lo + pad, hi - pad);
    match m {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => (0..m).map(|j| a + (b - a) * j as f64 / (m - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelSpec;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const EPA: KernelSpec = KernelSpec::EPANECHNIKOV;

    /// Path with given regression states and chosen drift responses.
    fn path_from_responses(xs: &[f64], responses: &[f64], delta: f64) -> SamplePath {
        let mut x = xs.to_vec();
        x.push(*xs.last().unwrap());
        let mut y = vec![0.0];
        for r in responses {
            let last = *y.last().unwrap();
            y.push(last + r * delta);
        }
        SamplePath::from_observations(delta, x, y).unwrap()
    }

    /// Kernel-weighted least squares of r on (1, X - x) by normal equations.
    fn wls_intercept(xs: &[f64], r: &[f64], x: f64, h: f64) -> f64 {
        let (mut s0, mut s1, mut s2, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (xi, ri) in xs.iter().zip(r) {
            let w = EPA.eval((xi - x) / h);
            let d = xi - x;
            s0 += w;
            s1 += w * d;
            s2 += w * d * d;
            t0 += w * ri;
            t1 += w * d * ri;
        }
        (s2 * t0 - s1 * t1) / (s0 * s2 - s1 * s1)
    }

    #[test]
    fn one_term_sums() {
        let p = path_from_responses(&[0.3], &[2.0], 0.01);
        let s = kernel_sums(&p, 0.3, 0.1, &EPA);
        assert_eq!(s.d_k, 0.75);
        assert_abs_diff_eq!(s.n_k_f, 0.75 * 2.0, epsilon = 1e-12);
        let e = estimate_nw_f(&p, 0.3, 0.1, &EPA).unwrap();
        assert_abs_diff_eq!(e.value, 2.0, epsilon = 1e-12);
        let z = estimate_nw_z2(&p, 0.3, 0.1, &EPA).unwrap();
        assert_abs_diff_eq!(z.value, (0.02f64).powi(2) / 0.01, epsilon = 1e-14);
        assert_abs_diff_eq!(local_time_hat(&p, 0.3, 0.1, &EPA), 0.01 / 0.1 * 0.75, epsilon = 1e-15);
    }

    #[test]
    fn empty_window() {
        let p = path_from_responses(&[5.0, 6.0], &[1.0, 1.0], 0.01);
        let s = kernel_sums(&p, 0.0, 0.5, &EPA);
        assert_eq!(s, KernelSums::default());
        assert_eq!(local_time_hat(&p, 0.0, 0.5, &EPA), 0.0);
        assert!(matches!(
            estimate_nw_f(&p, 0.0, 0.5, &EPA),
            Err(Error::NoLocalData { .. })
        ));
        assert!(matches!(
            estimate_nw_z2(&p, 0.0, 0.5, &EPA),
            Err(Error::NoLocalData { .. })
        ));
    }

    #[test]
    fn two_point_denominator() {
        let (x, h) = (1.0, 0.2);
        let p = path_from_responses(&[x - h / 2.0, x + h / 2.0], &[0.0, 0.0], 0.1);
        assert_abs_diff_eq!(kernel_sums(&p, x, h, &EPA).d_k, 1.125, epsilon = 1e-12);
    }

    #[test]
    fn constant_response_reproduced() {
        let xs = [0.1, 0.15, 0.3, 0.22, 0.05];
        let p = path_from_responses(&xs, &[3.5; 5], 0.01);
        assert_abs_diff_eq!(estimate_nw_f(&p, 0.2, 0.3, &EPA).unwrap().value, 3.5, epsilon = 1e-12);
        assert_abs_diff_eq!(estimate_ll_f(&p, 0.2, 0.3, &EPA).unwrap().value, 3.5, epsilon = 1e-11);
    }

    #[test]
    fn constant_y_gives_zero_z2() {
        let p = SamplePath::from_observations(0.01, vec![0.0, 0.1, 0.05, 0.2], vec![1.0; 4]).unwrap();
        assert_eq!(estimate_nw_z2(&p, 0.1, 0.5, &EPA).unwrap().value, 0.0);
        assert_eq!(estimate_ll_z2(&p, 0.1, 0.5, &EPA).unwrap().value, 0.0);
    }

    #[test]
    fn ll_degenerate_design() {
        let p = path_from_responses(&[0.4, 0.4, 0.4], &[1.0, 2.0, 3.0], 0.01);
        match estimate_ll_f(&p, 0.5, 0.3, &EPA) {
            Err(Error::DegenerateDesign { nw_fallback, .. }) => assert_abs_diff_eq!(nw_fallback, 2.0, epsilon = 1e-12),
            other => panic!("expected degenerate design, got {other:?}"),
        }
    }

    #[test]
    fn affine_response_reproduced_by_ll() {
        let xs = [0.0, 0.07, 0.21, 0.33, 0.48, 0.12];
        let r: Vec<f64> = xs.iter().map(|v| -1.5 + 4.0 * v).collect();
        let p = path_from_responses(&xs, &r, 0.001);
        let e = estimate_ll_f(&p, 0.25, 0.4, &EPA).unwrap();
        assert_abs_diff_eq!(e.value, -1.5 + 4.0 * 0.25, epsilon = 1e-10);
    }

    #[test]
    fn variance_arithmetic() {
        assert_eq!(variance_f(0.0, &EPA, 0.1, 6.0).unwrap(), 0.0);
        assert_abs_diff_eq!(variance_f(1.0, &EPA, 0.1, 6.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            variance_f(1.0, &EPA, 0.1, 12.0).unwrap(),
            0.5 * variance_f(1.0, &EPA, 0.1, 6.0).unwrap(),
            epsilon = 1e-15
        );
        assert!(variance_f(1.0, &EPA, 0.1, 0.0).is_err());
        assert_eq!(variance_z2(0.0, &EPA, 0.1, 6.0, 0.01).unwrap(), 0.0);
        assert_abs_diff_eq!(variance_z2(1.0, &EPA, 0.1, 6.0, 0.01).unwrap(), 0.02, epsilon = 1e-15);
        assert_abs_diff_eq!(variance_z2(1.0, &EPA, 0.1, 6.0, 0.005).unwrap(), 0.01, epsilon = 1e-15);
        assert!(variance_z2(1.0, &EPA, 0.1, 0.0, 0.01).is_err());
    }

    #[test]
    fn negative_ll_z2_is_flagged_not_clipped() {
        // squared responses falling steeply with X push the LL intercept below zero
        let xs = [0.0, 0.05, 0.1, 0.3, 0.35, 0.4];
        let dy = [1.0, 0.9, 0.8, 0.05, 0.01, 0.0];
        let delta = 0.01;
        let mut y = vec![0.0];
        for d in dy {
            let last: f64 = *y.last().unwrap();
            y.push(last + d);
        }
        let mut x = xs.to_vec();
        x.push(0.4);
        let p = SamplePath::from_observations(delta, x, y).unwrap();
        let e = estimate_ll_z2(&p, 0.5, 0.5, &EPA).unwrap();
        assert!(e.value < 0.0);
        assert!(e.negative_warning);
        assert_eq!(e.variance, 0.0);
    }

    #[test]
    fn box_kernel_local_time_conserves_mass() {
        struct BoxKernel;
        impl Kernel for BoxKernel {
            fn eval(&self, u: f64) -> f64 {
                if (-1.0..1.0).contains(&u) {
                    0.5
                } else {
                    0.0
                }
            }
            fn support_radius(&self) -> f64 {
                1.0
            }
            fn l_k1(&self) -> f64 {
                1.0 / 3.0
            }
            fn l_k2(&self) -> f64 {
                0.5
            }
        }
        let path = crate::sim::simulate_path(&crate::model::ModelSpec::example1(), 4.0, 4000, 11).unwrap();
        let (lo, hi) = path.state_range();
        let h = 0.05;
        let mut total = 0.0;
        let mut centre = lo - h * 0.5;
        while centre - h <= hi {
            total += local_time_hat(&path, centre, h, &BoxKernel) * 2.0 * h;
            centre += 2.0 * h;
        }
        assert_abs_diff_eq!(total, path.span, epsilon = 1e-9);
    }

    #[test]
    fn grid_covers_central_range() {
        let p = SamplePath::from_observations(0.1, vec![0.0, 10.0, 5.0], vec![0.0; 3]).unwrap();
        assert_eq!(evaluation_grid(&p, 3), vec![1.0, 5.0, 9.0]);
        assert_eq!(evaluation_grid(&p, 1), vec![5.0]);
    }

    proptest! {
        #[test]
        fn ll_matches_weighted_least_squares(
            pts in prop::collection::vec((-1.0f64..1.0, -5.0f64..5.0), 3..50),
            x in -0.5f64..0.5,
            h in 0.3f64..2.0,
        ) {
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let r: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let path = path_from_responses(&xs, &r, 0.01);
            if let Ok(e) = estimate_ll_f(&path, x, h, &EPA) {
                let oracle = wls_intercept(&xs, &r, x, h);
                prop_assert!((e.value - oracle).abs() <= 1e-8 * (1.0 + oracle.abs()),
                    "ll {} vs oracle {}", e.value, oracle);
            }
        }

        #[test]
        fn nw_within_response_hull(
            pts in prop::collection::vec((-1.0f64..1.0, -5.0f64..5.0), 1..40),
            x in -1.0f64..1.0,
            h in 0.05f64..1.0,
        ) {
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let r: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let path = path_from_responses(&xs, &r, 0.01);
            let responses = path.drift_responses();
            if let Ok(e) = estimate_nw_f(&path, x, h, &EPA) {
                let active: Vec<f64> = xs.iter().zip(&responses)
                    .filter(|(xi, _)| EPA.eval((*xi - x) / h) > 0.0)
                    .map(|(_, r)| *r).collect();
                let lo = active.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = active.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(e.value >= lo - 1e-9 && e.value <= hi + 1e-9);
                prop_assert!(e.n_effective >= 1);
                let z = estimate_nw_z2(&path, x, h, &EPA).unwrap();
                prop_assert!(z.value >= 0.0);
                prop_assert!(z.variance >= 0.0 && e.variance >= 0.0);
            }
        }
    }
}
