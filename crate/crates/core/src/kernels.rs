//! Compactly supported smoothing kernels.
//!
//! Besides the kernel `K` itself the estimators use the polynomial-weighted
//! variants `K1(u) = u K(u)` and `K2(u) = u^2 K(u)`, and the asymptotic
//! variances need the constants `l(K1) = ∫u²K(u)du` and `l(K2) = ∫K(u)²du`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Anything the kernel-sum machinery can smooth with.
///
/// Implemented by [`KernelSpec`]; tests plug in other shapes (e.g. a box kernel).
pub trait Kernel: Sync {
    fn eval(&self, u: f64) -> f64;
    fn support_radius(&self) -> f64;
    /// `∫u²K(u)du`
    fn l_k1(&self) -> f64;
    /// `∫K(u)²du`
    fn l_k2(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelId {
    Epanechnikov,
    Quartic,
}

impl FromStr for KernelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "epanechnikov" => Ok(KernelId::Epanechnikov),
            "quartic" | "biweight" => Ok(KernelId::Quartic),
            other => Err(Error::Usage(format!(
                "unknown kernel `{other}` (expected epanechnikov or quartic)"
            ))),
        }
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelId::Epanechnikov => "epanechnikov",
            KernelId::Quartic => "quartic",
        })
    }
}

/// A built-in kernel together with its precomputed moment constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub id: KernelId,
    pub support_radius: f64,
    pub l_k1: f64,
    pub l_k2: f64,
}

impl KernelSpec {
    pub const EPANECHNIKOV: KernelSpec = KernelSpec {
        id: KernelId::Epanechnikov,
        support_radius: 1.0,
        l_k1: 1.0 / 5.0,
        l_k2: 3.0 / 5.0,
    };

    pub const QUARTIC: KernelSpec = KernelSpec {
        id: KernelId::Quartic,
        support_radius: 1.0,
        l_k1: 1.0 / 7.0,
        l_k2: 5.0 / 7.0,
    };

    pub fn new(id: KernelId) -> Self {
        match id {
            KernelId::Epanechnikov => Self::EPANECHNIKOV,
            KernelId::Quartic => Self::QUARTIC,
        }
    }

    /// `K(u)`; zero outside the support.
    pub fn eval(&self, u: f64) -> f64 {
        if u.abs() > self.support_radius {
            return 0.0;
        }
        let s = 1.0 - u * u;
        match self.id {
            KernelId::Epanechnikov => 0.75 * s,
            KernelId::Quartic => 0.9375 * s * s,
        }
    }

    /// `u^order K(u)` for `order` 1 or 2.
    pub fn eval_poly(&self, order: u32, u: f64) -> Result<f64> {
        match order {
            1 => Ok(u * self.eval(u)),
            2 => Ok(u * u * self.eval(u)),
            _ => Err(Error::Usage(format!(
                "kernel polynomial order must be 1 or 2, got {order}"
            ))),
        }
    }

    /// `(l(K1), l(K2))`.
    pub fn moments(&self) -> (f64, f64) {
        (self.l_k1, self.l_k2)
    }
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::EPANECHNIKOV
    }
}

impl From<KernelId> for KernelSpec {
    fn from(id: KernelId) -> Self {
        KernelSpec::new(id)
    }
}

impl Kernel for KernelSpec {
    #[inline]
    fn eval(&self, u: f64) -> f64 {
        KernelSpec::eval(self, u)
    }

    fn support_radius(&self) -> f64 {
        self.support_radius
    }

    fn l_k1(&self) -> f64 {
        self.l_k1
    }

    fn l_k2(&self) -> f64 {
        self.l_k2
    }
}
