//! Zeroth-order optimizers with a uniform step interface.
//!
//! Every stepper draws its perturbations from the supplied RNG and then
//! delegates to an `*_apply` function that takes the perturbations
//! explicitly, so exact update rules can be checked against hand-computed
//! values.
//!
//! Loss queries per step: SPSA, AdamSPSA, GES, xNES and sNES use 2; 2-SPSA
//! uses 5 (gradient pair, two extra Hessian points, candidate check); QNSPSA
//! uses 3 loss and 4 fidelity queries. The blocking optimizers also need
//! `f(θ₀)` once before the first step, see [`Optimizer::prime`].

mod ges;
mod linalg;
mod nes;
mod oracle;
mod params;
mod second_order;
mod spsa;

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{StreamKey, StreamRng};

pub use ges::{ges_apply, ges_perturbation, ges_step, orthonormal_basis};
pub use linalg::{expm_symmetric, regularize, regularized_solve, symmetric_outer};
pub use nes::{snes_apply, snes_step, xnes_apply, xnes_step};
pub use oracle::{FidelityOracle, LossOracle};
pub use params::{
    nes_default_rate, AdamSpsaParams, GesParams, SecondOrderParams, SnesParams, SpsaParams,
    XnesParams,
};
pub use second_order::{
    hessian_sample, metric_sample, qnspsa_apply, qnspsa_step, two_spsa_apply, two_spsa_step,
};
pub use spsa::{adam_spsa_apply, adam_spsa_step, spsa_apply, spsa_gradient, spsa_step};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "spsa")]
    Spsa,
    #[serde(rename = "adam-spsa")]
    AdamSpsa,
    #[serde(rename = "2-spsa")]
    TwoSpsa,
    #[serde(rename = "qnspsa")]
    Qnspsa,
    #[serde(rename = "ges")]
    Ges,
    #[serde(rename = "xnes")]
    Xnes,
    #[serde(rename = "snes")]
    Snes,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Spsa,
        Algorithm::AdamSpsa,
        Algorithm::TwoSpsa,
        Algorithm::Qnspsa,
        Algorithm::Ges,
        Algorithm::Xnes,
        Algorithm::Snes,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Spsa => "spsa",
            Algorithm::AdamSpsa => "adam-spsa",
            Algorithm::TwoSpsa => "2-spsa",
            Algorithm::Qnspsa => "qnspsa",
            Algorithm::Ges => "ges",
            Algorithm::Xnes => "xnes",
            Algorithm::Snes => "snes",
        }
    }

    /// Whether the algorithm rejects candidates that raise the loss.
    pub fn blocks(self) -> bool {
        matches!(self, Algorithm::TwoSpsa | Algorithm::Qnspsa)
    }

    pub fn needs_fidelity(self) -> bool {
        self == Algorithm::Qnspsa
    }

    /// Loss queries a single step may use.
    pub fn loss_query_budget(self) -> u64 {
        match self {
            Algorithm::TwoSpsa => 7,
            Algorithm::Qnspsa => 3,
            _ => 2,
        }
    }

    pub fn fidelity_query_budget(self) -> u64 {
        if self == Algorithm::Qnspsa {
            4
        } else {
            0
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown optimizer `{s}`")))
    }
}

/// Hyperparameters tagged by optimizer id. The JSON form is the optimizer
/// block of an experiment config, e.g. `{"id": "spsa", "eta0": 0.2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id")]
pub enum HyperParams {
    #[serde(rename = "spsa")]
    Spsa(SpsaParams),
    #[serde(rename = "adam-spsa")]
    AdamSpsa(AdamSpsaParams),
    #[serde(rename = "2-spsa")]
    TwoSpsa(SecondOrderParams),
    #[serde(rename = "qnspsa")]
    Qnspsa(SecondOrderParams),
    #[serde(rename = "ges")]
    Ges(GesParams),
    #[serde(rename = "xnes")]
    Xnes(XnesParams),
    #[serde(rename = "snes")]
    Snes(SnesParams),
}

impl HyperParams {
    pub fn defaults(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::Spsa => HyperParams::Spsa(Default::default()),
            Algorithm::AdamSpsa => HyperParams::AdamSpsa(Default::default()),
            Algorithm::TwoSpsa => HyperParams::TwoSpsa(Default::default()),
            Algorithm::Qnspsa => HyperParams::Qnspsa(Default::default()),
            Algorithm::Ges => HyperParams::Ges(Default::default()),
            Algorithm::Xnes => HyperParams::Xnes(Default::default()),
            Algorithm::Snes => HyperParams::Snes(Default::default()),
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            HyperParams::Spsa(_) => Algorithm::Spsa,
            HyperParams::AdamSpsa(_) => Algorithm::AdamSpsa,
            HyperParams::TwoSpsa(_) => Algorithm::TwoSpsa,
            HyperParams::Qnspsa(_) => Algorithm::Qnspsa,
            HyperParams::Ges(_) => Algorithm::Ges,
            HyperParams::Xnes(_) => Algorithm::Xnes,
            HyperParams::Snes(_) => Algorithm::Snes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            HyperParams::Spsa(p) => p.validate(),
            HyperParams::AdamSpsa(p) => p.validate(),
            HyperParams::TwoSpsa(p) | HyperParams::Qnspsa(p) => p.validate(),
            HyperParams::Ges(p) => p.validate(),
            HyperParams::Xnes(p) => p.validate(),
            HyperParams::Snes(p) => p.validate(),
        }
    }

    /// Reads a named numeric field through the JSON representation.
    pub fn get(&self, name: &str) -> Option<f64> {
        let value = serde_json::to_value(self).ok()?;
        value.get(name)?.as_f64()
    }

    /// Returns a copy with field `name` set to `value`; unknown names and
    /// invalid values are configuration errors.
    pub fn with(&self, name: &str, value: f64) -> Result<Self> {
        if name == "id" {
            return Err(Error::config("`id` is not a hyperparameter"));
        }
        let mut json = serde_json::to_value(self)?;
        let obj = json.as_object_mut().expect("hyperparameters serialize to an object");
        let number = if name == "k" {
            serde_json::Value::from(value.round().max(0.0) as u64)
        } else {
            serde_json::Number::from_f64(value)
                .map(serde_json::Value::Number)
                .ok_or_else(|| Error::config(format!("{name} = {value} is not finite")))?
        };
        obj.insert(name.to_owned(), number);
        let updated: HyperParams = serde_json::from_value(json).map_err(|e| {
            Error::config(format!("cannot set `{name}` on {}: {e}", self.algorithm()))
        })?;
        updated.validate()?;
        Ok(updated)
    }
}

/// Algorithm-specific evolving state.
#[derive(Clone, Debug, PartialEq)]
pub enum AlgorithmState {
    Spsa,
    AdamSpsa {
        m: Vec<f64>,
        v: Vec<f64>,
    },
    /// Running average of Hessian (2-SPSA) or metric (QNSPSA) samples.
    SecondOrder {
        hessian: DMatrix<f64>,
    },
    Ges {
        /// Most recent gradient estimates, oldest first.
        history: VecDeque<Vec<f64>>,
    },
    Xnes {
        sigma: f64,
        shape: DMatrix<f64>,
    },
    Snes {
        sigma: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    pub algorithm: Algorithm,
    pub theta: Vec<f64>,
    /// Index `i` of the next step, starting at 1.
    pub step: u64,
    /// Loss at the current iterate, kept by the blocking optimizers.
    pub current_loss: Option<f64>,
    pub detail: AlgorithmState,
}

impl OptimizerState {
    pub fn new(params: &HyperParams, theta: Vec<f64>) -> Result<Self> {
        let d = theta.len();
        if d == 0 {
            return Err(Error::config("cannot optimize zero parameters"));
        }
        let detail = match params {
            HyperParams::Spsa(_) => AlgorithmState::Spsa,
            HyperParams::AdamSpsa(_) => AlgorithmState::AdamSpsa {
                m: vec![0.0; d],
                v: vec![0.0; d],
            },
            HyperParams::TwoSpsa(_) | HyperParams::Qnspsa(_) => AlgorithmState::SecondOrder {
                hessian: DMatrix::identity(d, d),
            },
            HyperParams::Ges(p) => AlgorithmState::Ges {
                history: VecDeque::with_capacity(p.k),
            },
            HyperParams::Xnes(p) => AlgorithmState::Xnes {
                sigma: p.sigma_init,
                shape: DMatrix::identity(d, d),
            },
            HyperParams::Snes(p) => AlgorithmState::Snes {
                sigma: vec![p.sigma_init; d],
            },
        };
        Ok(OptimizerState {
            algorithm: params.algorithm(),
            theta,
            step: 1,
            current_loss: None,
            detail,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub(crate) fn expect(&self, algorithm: Algorithm) -> Result<()> {
        if self.algorithm != algorithm {
            return Err(Error::config(format!(
                "{algorithm} step applied to {} state",
                self.algorithm
            )));
        }
        Ok(())
    }
}

/// Result of one optimizer step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    /// False when a blocking optimizer rejected its candidate.
    pub accepted: bool,
}

impl StepOutcome {
    pub(crate) const ACCEPTED: StepOutcome = StepOutcome { accepted: true };
}

/// Uniform `{−1, +1}^d` sample.
pub fn rademacher(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

/// `Normal(0, I_d)` sample.
pub fn standard_normal(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

pub(crate) fn shifted(theta: &[f64], terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = theta.to_vec();
    for (scale, dir) in terms {
        for (o, d) in out.iter_mut().zip(dir.iter()) {
            *o += scale * d;
        }
    }
    out
}

/// An optimizer bound to its hyperparameters, state and perturbation stream.
#[derive(Clone, Debug)]
pub struct Optimizer {
    params: HyperParams,
    state: OptimizerState,
    rng: StreamRng,
}

impl Optimizer {
    pub fn new(params: HyperParams, theta: Vec<f64>, key: StreamKey) -> Result<Self> {
        params.validate()?;
        let state = OptimizerState::new(&params, theta)?;
        Ok(Optimizer {
            params,
            state,
            rng: key.rng(),
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.params.algorithm()
    }

    pub fn params(&self) -> &HyperParams {
        &self.params
    }

    pub fn state(&self) -> &OptimizerState {
        &self.state
    }

    pub fn theta(&self) -> &[f64] {
        &self.state.theta
    }

    /// Evaluates `f(θ₀)` for the blocking optimizers; a no-op otherwise.
    pub fn prime(&mut self, loss: &mut LossOracle<'_>) -> Result<()> {
        if self.algorithm().blocks() && self.state.current_loss.is_none() {
            self.state.current_loss = Some(loss.evaluate(&self.state.theta)?);
        }
        Ok(())
    }

    pub fn step(
        &mut self,
        loss: &mut LossOracle<'_>,
        fidelity: Option<&mut FidelityOracle<'_>>,
    ) -> Result<StepOutcome> {
        let (state, rng) = (&mut self.state, &mut self.rng);
        match &self.params {
            HyperParams::Spsa(p) => spsa_step(state, p, loss, rng),
            HyperParams::AdamSpsa(p) => adam_spsa_step(state, p, loss, rng),
            HyperParams::TwoSpsa(p) => two_spsa_step(state, p, loss, rng),
            HyperParams::Qnspsa(p) => {
                let fidelity = fidelity
                    .ok_or_else(|| Error::config("QNSPSA needs a fidelity oracle"))?;
                qnspsa_step(state, p, loss, fidelity, rng)
            }
            HyperParams::Ges(p) => ges_step(state, p, loss, rng),
            HyperParams::Xnes(p) => xnes_step(state, p, loss, rng),
            HyperParams::Snes(p) => snes_step(state, p, loss, rng),
        }
    }
}
