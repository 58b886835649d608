//! Hyperparameters for each optimizer.
//!
//! Field names follow the usual SPSA notation: `eps0`/`gamma` set the
//! perturbation size `εᵢ = ε₀ / iᵞ`, `eta0`/`c`/`alpha` the learning rate
//! `ηᵢ = η₀ / (c + i)^α`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be positive, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be non-negative, got {v}")))
    }
}

fn unit_interval(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must lie in [0, 1], got {v}")))
    }
}

pub(crate) fn perturbation_size(eps0: f64, gamma: f64, step: u64) -> f64 {
    eps0 / (step as f64).powf(gamma)
}

pub(crate) fn learning_rate(eta0: f64, c: f64, alpha: f64, step: u64) -> f64 {
    eta0 / (c + step as f64).powf(alpha)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpsaParams {
    pub eps0: f64,
    pub gamma: f64,
    pub eta0: f64,
    pub c: f64,
    pub alpha: f64,
}

impl Default for SpsaParams {
    fn default() -> Self {
        SpsaParams {
            eps0: 0.1,
            gamma: 0.101,
            eta0: 0.1,
            c: 0.0,
            alpha: 0.602,
        }
    }
}

impl SpsaParams {
    pub fn eps(&self, step: u64) -> f64 {
        perturbation_size(self.eps0, self.gamma, step)
    }

    pub fn eta(&self, step: u64) -> f64 {
        learning_rate(self.eta0, self.c, self.alpha, step)
    }

    pub fn validate(&self) -> Result<()> {
        positive("eps0", self.eps0)?;
        positive("eta0", self.eta0)?;
        non_negative("gamma", self.gamma)?;
        non_negative("alpha", self.alpha)?;
        non_negative("c", self.c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamSpsaParams {
    pub eps0: f64,
    pub gamma: f64,
    pub eta0: f64,
    pub c: f64,
    pub alpha: f64,
    /// First-moment coefficient `βᵢ = β₀ / i^λ`.
    pub beta0: f64,
    pub lambda: f64,
    /// Second-moment coefficient.
    pub beta2: f64,
    pub delta: f64,
}

impl Default for AdamSpsaParams {
    fn default() -> Self {
        let s = SpsaParams::default();
        AdamSpsaParams {
            eps0: s.eps0,
            gamma: s.gamma,
            eta0: s.eta0,
            c: s.c,
            alpha: s.alpha,
            beta0: 0.9,
            lambda: 0.0,
            beta2: 0.999,
            delta: 1e-8,
        }
    }
}

impl AdamSpsaParams {
    pub fn eps(&self, step: u64) -> f64 {
        perturbation_size(self.eps0, self.gamma, step)
    }

    pub fn eta(&self, step: u64) -> f64 {
        learning_rate(self.eta0, self.c, self.alpha, step)
    }

    pub fn beta(&self, step: u64) -> f64 {
        self.beta0 / (step as f64).powf(self.lambda)
    }

    pub fn validate(&self) -> Result<()> {
        positive("eps0", self.eps0)?;
        positive("eta0", self.eta0)?;
        non_negative("gamma", self.gamma)?;
        non_negative("alpha", self.alpha)?;
        non_negative("c", self.c)?;
        unit_interval("beta0", self.beta0)?;
        non_negative("lambda", self.lambda)?;
        unit_interval("beta2", self.beta2)?;
        positive("delta", self.delta)
    }
}

/// Shared by 2-SPSA and QNSPSA.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SecondOrderParams {
    pub eps0: f64,
    pub gamma: f64,
    /// Constant step size applied to the preconditioned gradient.
    pub eta: f64,
    /// A candidate is rejected when its loss exceeds the current loss by
    /// more than this.
    pub b_tol: f64,
    /// Eigenvalue floor used before inverting the averaged Hessian.
    pub lambda_floor: f64,
}

impl Default for SecondOrderParams {
    fn default() -> Self {
        SecondOrderParams {
            eps0: 0.1,
            gamma: 0.101,
            eta: 0.1,
            b_tol: 0.0,
            lambda_floor: 1e-3,
        }
    }
}

impl SecondOrderParams {
    pub fn eps(&self, step: u64) -> f64 {
        perturbation_size(self.eps0, self.gamma, step)
    }

    pub fn validate(&self) -> Result<()> {
        positive("eps0", self.eps0)?;
        non_negative("gamma", self.gamma)?;
        positive("eta", self.eta)?;
        non_negative("b_tol", self.b_tol)?;
        positive("lambda_floor", self.lambda_floor)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GesParams {
    /// Overall perturbation scale.
    pub sigma: f64,
    /// Number of past gradient estimates spanning the guiding subspace.
    pub k: usize,
    /// Weight of the isotropic part of the sampling covariance.
    pub alpha_mix: f64,
    pub beta_scale: f64,
    pub eta: f64,
}

impl Default for GesParams {
    fn default() -> Self {
        GesParams {
            sigma: 0.1,
            k: 10,
            alpha_mix: 0.5,
            beta_scale: 2.0,
            eta: 0.1,
        }
    }
}

impl GesParams {
    pub fn validate(&self) -> Result<()> {
        positive("sigma", self.sigma)?;
        if self.k == 0 {
            return Err(Error::config("k must be at least 1"));
        }
        unit_interval("alpha_mix", self.alpha_mix)?;
        positive("beta_scale", self.beta_scale)?;
        positive("eta", self.eta)
    }
}

/// Default NES learning rate for the scale and shape parameters.
pub fn nes_default_rate(dim: usize) -> f64 {
    let d = dim as f64;
    (9.0 + 3.0 * d.ln()) / (5.0 * d * d.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct XnesParams {
    pub eta_mu: f64,
    /// `None` selects [`nes_default_rate`].
    pub eta_sigma: Option<f64>,
    pub eta_b: Option<f64>,
    pub sigma_init: f64,
}

impl Default for XnesParams {
    fn default() -> Self {
        XnesParams {
            eta_mu: 1.0,
            eta_sigma: None,
            eta_b: None,
            sigma_init: 0.1,
        }
    }
}

impl XnesParams {
    pub fn eta_sigma(&self, dim: usize) -> f64 {
        self.eta_sigma.unwrap_or_else(|| nes_default_rate(dim))
    }

    pub fn eta_b(&self, dim: usize) -> f64 {
        self.eta_b.unwrap_or_else(|| nes_default_rate(dim))
    }

    pub fn validate(&self) -> Result<()> {
        positive("eta_mu", self.eta_mu)?;
        if let Some(v) = self.eta_sigma {
            positive("eta_sigma", v)?;
        }
        if let Some(v) = self.eta_b {
            positive("eta_b", v)?;
        }
        positive("sigma_init", self.sigma_init)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnesParams {
    pub eta_mu: f64,
    pub eta_sigma: Option<f64>,
    pub sigma_init: f64,
}

impl Default for SnesParams {
    fn default() -> Self {
        SnesParams {
            eta_mu: 1.0,
            eta_sigma: None,
            sigma_init: 0.1,
        }
    }
}

impl SnesParams {
    pub fn eta_sigma(&self, dim: usize) -> f64 {
        self.eta_sigma.unwrap_or_else(|| nes_default_rate(dim))
    }

    pub fn validate(&self) -> Result<()> {
        positive("eta_mu", self.eta_mu)?;
        if let Some(v) = self.eta_sigma {
            positive("eta_sigma", v)?;
        }
        positive("sigma_init", self.sigma_init)
    }
}
