//! Forward diffusions with a closed-form backward solution `Y = u(X)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of the registered models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Dynamics {
    /// `dX = sigma dW`, `u(x) = 2 sin x`. Recurrent.
    Example1 { sigma: f64 },
    /// `dX = drift X dt + vol X dW`, `u(x) = x^2`.
    Example2 { drift: f64, vol: f64 },
}

/// A forward SDE plus its backward solution map and derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub dynamics: Dynamics,
    pub x0: f64,
    /// Open interval `(l, r)`; paths stop at the first exit from its closure.
    pub exit_domain: Option<(f64, f64)>,
}

/// Model selection as it appears in JSON configs: a registered name plus
/// optional parameter overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit_domain: Option<(f64, f64)>,
}

impl ModelConfig {
    pub fn named(name: &str) -> Self {
        ModelConfig {
            name: name.to_string(),
            params: BTreeMap::new(),
            exit_domain: None,
        }
    }

    pub fn build(&self) -> Result<ModelSpec> {
        let mut model = ModelSpec::by_name(&self.name)?;
        for (key, &value) in &self.params {
            model.set_param(key, value)?;
        }
        if let Some((l, r)) = self.exit_domain {
            if !(l < r) {
                return Err(Error::Usage(format!("empty exit domain ({l}, {r})")));
            }
            model.exit_domain = Some((l, r));
        }
        Ok(model)
    }
}

impl ModelSpec {
    /// Example 1 with sigma = 0.5, x0 = 0.05.
    pub fn example1() -> Self {
        ModelSpec {
            name: "example1".into(),
            dynamics: Dynamics::Example1 { sigma: 0.5 },
            x0: 0.05,
            exit_domain: None,
        }
    }

    /// Example 2 (geometric Brownian motion) with drift 0.02, vol 0.2, x0 = 0.5.
    pub fn example2() -> Self {
        ModelSpec {
            name: "example2".into(),
            dynamics: Dynamics::Example2 { drift: 0.02, vol: 0.2 },
            x0: 0.5,
            exit_domain: None,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "example1" => Ok(Self::example1()),
            "example2" => Ok(Self::example2()),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }

    pub fn set_param(&mut self, key: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::Usage(format!("parameter {key} must be finite")));
        }
        match (&mut self.dynamics, key) {
            (_, "x0") => self.x0 = value,
            (Dynamics::Example1 { sigma }, "sigma") => *sigma = value,
            (Dynamics::Example2 { drift, .. }, "drift") => *drift = value,
            (Dynamics::Example2 { vol, .. }, "vol" | "sigma") => *vol = value,
            _ => return Err(Error::Usage(format!("model {} has no parameter `{key}`", self.name))),
        }
        Ok(())
    }

    #[inline]
    pub fn drift(&self, x: f64) -> f64 {
        match self.dynamics {
            Dynamics::Example1 { .. } => 0.0,
            Dynamics::Example2 { drift, .. } => drift * x,
        }
    }

    #[inline]
    pub fn diffusion(&self, x: f64) -> f64 {
        match self.dynamics {
            Dynamics::Example1 { sigma } => sigma,
            Dynamics::Example2 { vol, .. } => vol * x,
        }
    }

    #[inline]
    pub fn u(&self, x: f64) -> f64 {
        match self.dynamics {
            Dynamics::Example1 { .. } => 2.0 * x.sin(),
            Dynamics::Example2 { .. } => x * x,
        }
    }

    pub fn u1(&self, x: f64) -> f64 {
        match self.dynamics {
            Dynamics::Example1 { .. } => 2.0 * x.cos(),
            Dynamics::Example2 { .. } => 2.0 * x,
        }
    }

    pub fn u2(&self, x: f64) -> f64 {
        match self.dynamics {
            Dynamics::Example1 { .. } => -2.0 * x.sin(),
            Dynamics::Example2 { .. } => 2.0,
        }
    }

    /// Infinitesimal drift of `Y = u(X)`: the generator `b u' + ½ σ² u''`.
    pub fn true_f(&self, x: f64) -> f64 {
        let s = self.diffusion(x);
        self.drift(x) * self.u1(x) + 0.5 * s * s * self.u2(x)
    }

    /// Infinitesimal variance of `Y = u(X)`: `(u' σ)²`.
    pub fn true_z2(&self, x: f64) -> f64 {
        let z = self.u1(x) * self.diffusion(x);
        z * z
    }
}
