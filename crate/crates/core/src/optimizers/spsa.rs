use rand::Rng;

use super::params::{AdamSpsaParams, SpsaParams};
use super::{rademacher, shifted, Algorithm, AlgorithmState, LossOracle, OptimizerState, StepOutcome};
use crate::error::Result;

/// Central difference along `delta`: returns
/// `([f(θ+εΔ) − f(θ−εΔ)] / 2ε, f(θ+εΔ), f(θ−εΔ))`.
pub(crate) fn directional_difference(
    loss: &mut LossOracle<'_>,
    theta: &[f64],
    eps: f64,
    delta: &[f64],
) -> Result<(f64, f64, f64)> {
    let plus = loss.evaluate(&shifted(theta, &[(eps, delta)]))?;
    let minus = loss.evaluate(&shifted(theta, &[(-eps, delta)]))?;
    Ok(((plus - minus) / (2.0 * eps), plus, minus))
}

/// SPSA gradient estimate `[f(θ+εΔ) − f(θ−εΔ)] / 2ε · Δ`.
pub fn spsa_gradient(
    loss: &mut LossOracle<'_>,
    theta: &[f64],
    eps: f64,
    delta: &[f64],
) -> Result<Vec<f64>> {
    let (slope, _, _) = directional_difference(loss, theta, eps, delta)?;
    Ok(delta.iter().map(|d| slope * d).collect())
}

pub fn spsa_step(
    state: &mut OptimizerState,
    hp: &SpsaParams,
    loss: &mut LossOracle<'_>,
    rng: &mut impl Rng,
) -> Result<StepOutcome> {
    state.expect(Algorithm::Spsa)?;
    let delta = rademacher(rng, state.dim());
    spsa_apply(state, hp, &delta, loss)
}

/// SPSA update with a given perturbation direction.
pub fn spsa_apply(
    state: &mut OptimizerState,
    hp: &SpsaParams,
    delta: &[f64],
    loss: &mut LossOracle<'_>,
) -> Result<StepOutcome> {
    state.expect(Algorithm::Spsa)?;
    let i = state.step;
    let (eps, eta) = (hp.eps(i), hp.eta(i));
    let g = spsa_gradient(loss, &state.theta, eps, delta)?;
    for (t, gk) in state.theta.iter_mut().zip(&g) {
        *t -= eta * gk;
    }
    state.step += 1;
    Ok(StepOutcome::ACCEPTED)
}

pub fn adam_spsa_step(
    state: &mut OptimizerState,
    hp: &AdamSpsaParams,
    loss: &mut LossOracle<'_>,
    rng: &mut impl Rng,
) -> Result<StepOutcome> {
    state.expect(Algorithm::AdamSpsa)?;
    let delta = rademacher(rng, state.dim());
    adam_spsa_apply(state, hp, &delta, loss)
}

/// AdamSPSA update. The first step seeds `m₁ = g₁`, `v₁ = g₁²`.
pub fn adam_spsa_apply(
    state: &mut OptimizerState,
    hp: &AdamSpsaParams,
    delta: &[f64],
    loss: &mut LossOracle<'_>,
) -> Result<StepOutcome> {
    state.expect(Algorithm::AdamSpsa)?;
    let i = state.step;
    let (eps, eta, beta) = (hp.eps(i), hp.eta(i), hp.beta(i));
    let g = spsa_gradient(loss, &state.theta, eps, delta)?;
    let AlgorithmState::AdamSpsa { m, v } = &mut state.detail else {
        unreachable!("state tag checked above");
    };
    for k in 0..g.len() {
        if i == 1 {
            m[k] = g[k];
            v[k] = g[k] * g[k];
        } else {
            m[k] = beta * m[k] + (1.0 - beta) * g[k];
            v[k] = hp.beta2 * v[k] + (1.0 - hp.beta2) * g[k] * g[k];
        }
        state.theta[k] -= eta * m[k] / (v[k].sqrt() + hp.delta);
    }
    state.step += 1;
    Ok(StepOutcome::ACCEPTED)
}
