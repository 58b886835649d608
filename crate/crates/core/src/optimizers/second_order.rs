//! 2-SPSA and QNSPSA: SPSA gradients preconditioned by a running average of
//! rank-two curvature samples, with candidate blocking.

use nalgebra::DMatrix;
use rand::Rng;

use super::linalg::{regularized_solve, symmetric_outer};
use super::params::SecondOrderParams;
use super::spsa::directional_difference;
use super::{
    rademacher, shifted, Algorithm, AlgorithmState, FidelityOracle, LossOracle, OptimizerState,
    StepOutcome,
};
use crate::error::Result;

/// Four-point Hessian sample
/// `δf / 2ε² · (ΔΔ′ᵀ + Δ′Δᵀ)/2` with
/// `δf = f(θ+εΔ+εΔ′) − f(θ+εΔ) − f(θ−εΔ+εΔ′) + f(θ−εΔ)`.
pub fn hessian_sample(
    loss: &mut LossOracle<'_>,
    theta: &[f64],
    eps: f64,
    delta: &[f64],
    delta2: &[f64],
) -> Result<DMatrix<f64>> {
    let plus = loss.evaluate(&shifted(theta, &[(eps, delta)]))?;
    let minus = loss.evaluate(&shifted(theta, &[(-eps, delta)]))?;
    hessian_from_pair(loss, theta, eps, delta, delta2, plus, minus)
}

fn hessian_from_pair(
    loss: &mut LossOracle<'_>,
    theta: &[f64],
    eps: f64,
    delta: &[f64],
    delta2: &[f64],
    plus: f64,
    minus: f64,
) -> Result<DMatrix<f64>> {
    let plus_plus = loss.evaluate(&shifted(theta, &[(eps, delta), (eps, delta2)]))?;
    let minus_plus = loss.evaluate(&shifted(theta, &[(-eps, delta), (eps, delta2)]))?;
    let df = plus_plus - plus - minus_plus + minus;
    Ok(symmetric_outer(delta, delta2) * (df / (2.0 * eps * eps)))
}

/// Fubini-Study metric sample
/// `−δF / 4ε² · (ΔΔ′ᵀ + Δ′Δᵀ)/2` where `δF` is the four-point difference of
/// `F(θ, ·)`.
pub fn metric_sample(
    fidelity: &mut FidelityOracle<'_>,
    theta: &[f64],
    eps: f64,
    delta: &[f64],
    delta2: &[f64],
) -> Result<DMatrix<f64>> {
    let mut at = |shift: &[(f64, &[f64])]| fidelity.evaluate(theta, &shifted(theta, shift));
    let df = at(&[(eps, delta), (eps, delta2)])? - at(&[(eps, delta)])?
        - at(&[(-eps, delta), (eps, delta2)])?
        + at(&[(-eps, delta)])?;
    Ok(symmetric_outer(delta, delta2) * (-df / (4.0 * eps * eps)))
}

pub fn two_spsa_step(
    state: &mut OptimizerState,
    hp: &SecondOrderParams,
    loss: &mut LossOracle<'_>,
    rng: &mut impl Rng,
) -> Result<StepOutcome> {
    state.expect(Algorithm::TwoSpsa)?;
    let delta = rademacher(rng, state.dim());
    let delta2 = rademacher(rng, state.dim());
    two_spsa_apply(state, hp, &delta, &delta2, loss)
}

pub fn two_spsa_apply(
    state: &mut OptimizerState,
    hp: &SecondOrderParams,
    delta: &[f64],
    delta2: &[f64],
    loss: &mut LossOracle<'_>,
) -> Result<StepOutcome> {
    state.expect(Algorithm::TwoSpsa)?;
    let eps = hp.eps(state.step);
    let (slope, plus, minus) = directional_difference(loss, &state.theta, eps, delta)?;
    let sample = hessian_from_pair(loss, &state.theta, eps, delta, delta2, plus, minus)?;
    let gradient: Vec<f64> = delta.iter().map(|d| slope * d).collect();
    preconditioned_update(state, hp, &gradient, &sample, loss)
}

pub fn qnspsa_step(
    state: &mut OptimizerState,
    hp: &SecondOrderParams,
    loss: &mut LossOracle<'_>,
    fidelity: &mut FidelityOracle<'_>,
    rng: &mut impl Rng,
) -> Result<StepOutcome> {
    state.expect(Algorithm::Qnspsa)?;
    let delta = rademacher(rng, state.dim());
    let delta2 = rademacher(rng, state.dim());
    qnspsa_apply(state, hp, &delta, &delta2, loss, fidelity)
}

pub fn qnspsa_apply(
    state: &mut OptimizerState,
    hp: &SecondOrderParams,
    delta: &[f64],
    delta2: &[f64],
    loss: &mut LossOracle<'_>,
    fidelity: &mut FidelityOracle<'_>,
) -> Result<StepOutcome> {
    state.expect(Algorithm::Qnspsa)?;
    let eps = hp.eps(state.step);
    let (slope, _, _) = directional_difference(loss, &state.theta, eps, delta)?;
    let sample = metric_sample(fidelity, &state.theta, eps, delta, delta2)?;
    let gradient: Vec<f64> = delta.iter().map(|d| slope * d).collect();
    preconditioned_update(state, hp, &gradient, &sample, loss)
}

/// Folds `sample` into the running average `Hᵢ = i/(i+1) Hᵢ₋₁ + 1/(i+1) Ĥᵢ`,
/// proposes `θ − η · reg(Hᵢ)⁻¹ g` and keeps it unless its loss exceeds the
/// current loss by more than `b_tol`. The average is updated either way.
fn preconditioned_update(
    state: &mut OptimizerState,
    hp: &SecondOrderParams,
    gradient: &[f64],
    sample: &DMatrix<f64>,
    loss: &mut LossOracle<'_>,
) -> Result<StepOutcome> {
    let i = state.step as f64;
    let AlgorithmState::SecondOrder { hessian } = &mut state.detail else {
        unreachable!("state tag checked by caller");
    };
    *hessian = &*hessian * (i / (i + 1.0)) + sample * (1.0 / (i + 1.0));
    let direction = regularized_solve(hessian, hp.lambda_floor, gradient)?;
    let candidate: Vec<f64> = state
        .theta
        .iter()
        .zip(&direction)
        .map(|(t, d)| t - hp.eta * d)
        .collect();

    let reference = match state.current_loss {
        Some(v) => v,
        None => loss.evaluate(&state.theta)?,
    };
    let candidate_loss = loss.evaluate(&candidate)?;
    state.step += 1;
    // NaN candidates are rejected too.
    if candidate_loss <= reference + hp.b_tol {
        state.theta = candidate;
        state.current_loss = Some(candidate_loss);
        Ok(StepOutcome { accepted: true })
    } else {
        state.current_loss = Some(reference);
        Ok(StepOutcome { accepted: false })
    }
}
