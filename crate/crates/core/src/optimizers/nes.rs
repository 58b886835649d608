//! Exponential (xNES) and separable (sNES) natural evolution strategies
//! with two samples per step and ±½ rank utilities.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::linalg::expm_symmetric;
use super::params::{SnesParams, XnesParams};
use super::{standard_normal, Algorithm, AlgorithmState, LossOracle, OptimizerState, StepOutcome};
use crate::error::Result;

/// `(u, u′)`: +½ for the better sample, −½ for the worse, zero on ties.
fn utilities(f: f64, f2: f64) -> (f64, f64) {
    if f < f2 {
        (0.5, -0.5)
    } else if f2 < f {
        (-0.5, 0.5)
    } else {
        (0.0, 0.0)
    }
}

pub fn xnes_step(
    state: &mut OptimizerState,
    hp: &XnesParams,
    loss: &mut LossOracle<'_>,
    rng: &mut impl Rng,
) -> Result<StepOutcome> {
    state.expect(Algorithm::Xnes)?;
    let s = standard_normal(rng, state.dim());
    let s2 = standard_normal(rng, state.dim());
    xnes_apply(state, hp, &s, &s2, loss)
}

/// xNES update for given standard-normal samples `s`, `s′`:
///
/// ```text
/// z = θ + σ B s,  z′ = θ + σ B s′
/// ∇μ = u s + u′ s′
/// ∇M = u (s sᵀ − I) + u′ (s′ s′ᵀ − I)
/// ∇σ = tr(∇M) / d,   ∇B = ∇M − ∇σ I
/// θ ← θ + η_μ σ B ∇μ,  σ ← σ exp(η_σ/2 ∇σ),  B ← B exp(η_B/2 ∇B)
/// ```
pub fn xnes_apply(
    state: &mut OptimizerState,
    hp: &XnesParams,
    s: &[f64],
    s2: &[f64],
    loss: &mut LossOracle<'_>,
) -> Result<StepOutcome> {
    state.expect(Algorithm::Xnes)?;
    let d = state.dim();
    let AlgorithmState::Xnes { sigma, shape } = &mut state.detail else {
        unreachable!("state tag checked above");
    };
    let theta = DVector::from_column_slice(&state.theta);
    let (sv, sv2) = (DVector::from_column_slice(s), DVector::from_column_slice(s2));
    // Sampling through B (not Bᵀ) keeps the sample covariance σ²BBᵀ
    // consistent with the right-multiplicative shape update.
    let z = &theta + (&*shape * &sv) * *sigma;
    let z2 = &theta + (&*shape * &sv2) * *sigma;
    let (u, u2) = utilities(loss.evaluate(z.as_slice())?, loss.evaluate(z2.as_slice())?);
    state.step += 1;
    if u == 0.0 {
        return Ok(StepOutcome::ACCEPTED);
    }

    let identity = DMatrix::<f64>::identity(d, d);
    let grad_mu = &sv * u + &sv2 * u2;
    let grad_m = (&sv * sv.transpose() - &identity) * u + (&sv2 * sv2.transpose() - &identity) * u2;
    let grad_sigma = grad_m.trace() / d as f64;
    let grad_b = &grad_m - &identity * grad_sigma;

    let new_theta = theta + (&*shape * grad_mu) * (hp.eta_mu * *sigma);
    state.theta = new_theta.as_slice().to_vec();
    *sigma *= (hp.eta_sigma(d) / 2.0 * grad_sigma).exp();
    *shape = &*shape * expm_symmetric(&(grad_b * (hp.eta_b(d) / 2.0)))?;
    Ok(StepOutcome::ACCEPTED)
}

pub fn snes_step(
    state: &mut OptimizerState,
    hp: &SnesParams,
    loss: &mut LossOracle<'_>,
    rng: &mut impl Rng,
) -> Result<StepOutcome> {
    state.expect(Algorithm::Snes)?;
    let s = standard_normal(rng, state.dim());
    let s2 = standard_normal(rng, state.dim());
    snes_apply(state, hp, &s, &s2, loss)
}

/// sNES update: per-coordinate scale `σ`, `z = θ + σ ⊙ s`,
/// `∇σ = u (s² − 1) + u′ (s′² − 1)`, `θ ← θ + η_μ σ ⊙ ∇μ`,
/// `σ ← σ ⊙ exp(η_σ/2 ∇σ)`.
pub fn snes_apply(
    state: &mut OptimizerState,
    hp: &SnesParams,
    s: &[f64],
    s2: &[f64],
    loss: &mut LossOracle<'_>,
) -> Result<StepOutcome> {
    state.expect(Algorithm::Snes)?;
    let d = state.dim();
    let AlgorithmState::Snes { sigma } = &mut state.detail else {
        unreachable!("state tag checked above");
    };
    let sample = |noise: &[f64]| -> Vec<f64> {
        state
            .theta
            .iter()
            .zip(sigma.iter())
            .zip(noise)
            .map(|((t, sg), n)| t + sg * n)
            .collect()
    };
    let (z, z2) = (sample(s), sample(s2));
    let (u, u2) = utilities(loss.evaluate(&z)?, loss.evaluate(&z2)?);
    state.step += 1;
    if u == 0.0 {
        return Ok(StepOutcome::ACCEPTED);
    }
    let rate = hp.eta_sigma(d) / 2.0;
    for k in 0..d {
        let grad_mu = u * s[k] + u2 * s2[k];
        let grad_sigma = u * (s[k] * s[k] - 1.0) + u2 * (s2[k] * s2[k] - 1.0);
        state.theta[k] += hp.eta_mu * sigma[k] * grad_mu;
        sigma[k] *= (rate * grad_sigma).exp();
    }
    Ok(StepOutcome::ACCEPTED)
}

#[cfg(test)]
mod tests {
    use super::super::HyperParams;
    use super::*;
    use crate::rng::StreamKey;

    fn xnes_state(theta: Vec<f64>, hp: &XnesParams) -> OptimizerState {
        OptimizerState::new(&HyperParams::Xnes(hp.clone()), theta).unwrap()
    }

    #[test]
    fn xnes_tie_changes_nothing() {
        let hp = XnesParams::default();
        let mut state = xnes_state(vec![0.1, 0.2], &hp);
        let before = state.clone();
        let mut f = LossOracle::new(|_| Ok(1.0));
        xnes_apply(&mut state, &hp, &[0.3, -1.0], &[1.0, 0.5], &mut f).unwrap();
        assert_eq!(state.theta, before.theta);
        assert_eq!(state.detail, before.detail);
        assert_eq!(f.queries(), 2);
    }

    #[test]
    fn xnes_hand_evaluated_mean_step() {
        let hp = XnesParams {
            eta_mu: 1.0,
            sigma_init: 1.0,
            ..Default::default()
        };
        let mut state = xnes_state(vec![0.0], &hp);
        // f increasing in θ: z = 0.5 beats z′ = −1.0 only if f is decreasing,
        // so use f = −θ to make f(z) < f(z′).
        let mut f = LossOracle::new(|t| Ok(-t[0]));
        xnes_apply(&mut state, &hp, &[0.5], &[-1.0], &mut f).unwrap();
        assert!((state.theta[0] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn xnes_shape_stays_unimodular_direction() {
        let hp = XnesParams::default();
        let mut state = xnes_state(vec![0.3; 4], &hp);
        let mut f = LossOracle::new(|t| Ok(t.iter().enumerate().map(|(i, x)| (i + 1) as f64 * x * x).sum()));
        let mut rng = StreamKey(8).rng();
        for _ in 0..50 {
            xnes_step(&mut state, &hp, &mut f, &mut rng).unwrap();
            let AlgorithmState::Xnes { sigma, shape } = &state.detail else { panic!() };
            assert!(*sigma > 0.0);
            // ∇B is traceless, so det B = exp(Σ tr) stays at 1.
            assert!((shape.determinant() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn xnes_ignores_constant_offsets() {
        let hp = XnesParams::default();
        let run = |offset: f64| {
            let mut state = xnes_state(vec![0.5, -0.5, 1.0], &hp);
            let mut f = LossOracle::new(move |t| Ok(t.iter().map(|x| x * x).sum::<f64>() + offset));
            let mut rng = StreamKey(1).rng();
            for _ in 0..20 {
                xnes_step(&mut state, &hp, &mut f, &mut rng).unwrap();
            }
            state
        };
        assert_eq!(run(0.0), run(1000.0));
    }

    #[test]
    fn snes_tie_changes_nothing() {
        let hp = SnesParams::default();
        let mut state = OptimizerState::new(&HyperParams::Snes(hp.clone()), vec![1.0, 2.0]).unwrap();
        let before = state.clone();
        let mut f = LossOracle::new(|_| Ok(0.0));
        snes_apply(&mut state, &hp, &[1.0, 1.0], &[0.0, 2.0], &mut f).unwrap();
        assert_eq!(state.theta, before.theta);
        assert_eq!(state.detail, before.detail);
    }

    #[test]
    fn snes_hand_evaluated_sigma() {
        let hp = SnesParams {
            eta_mu: 1.0,
            eta_sigma: Some(0.4),
            sigma_init: 1.0,
        };
        let mut state = OptimizerState::new(&HyperParams::Snes(hp.clone()), vec![0.0]).unwrap();
        // z = 2 and z′ = 0; f = −θ makes z the better sample.
        let mut f = LossOracle::new(|t| Ok(-t[0]));
        snes_apply(&mut state, &hp, &[2.0], &[0.0], &mut f).unwrap();
        let AlgorithmState::Snes { sigma } = &state.detail else { panic!() };
        assert!((sigma[0] - 0.4f64.exp()).abs() < 1e-12);
        assert!((state.theta[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn snes_matches_xnes_in_one_dimension() {
        let rate = nes_rate();
        let xhp = XnesParams {
            eta_sigma: Some(rate),
            eta_b: Some(rate),
            ..Default::default()
        };
        let shp = SnesParams {
            eta_sigma: Some(rate),
            ..Default::default()
        };
        let mut xs = OptimizerState::new(&HyperParams::Xnes(xhp.clone()), vec![1.3]).unwrap();
        let mut ss = OptimizerState::new(&HyperParams::Snes(shp.clone()), vec![1.3]).unwrap();
        let mut fx = LossOracle::new(|t| Ok((t[0] - 0.2).powi(2)));
        let mut fs = LossOracle::new(|t| Ok((t[0] - 0.2).powi(2)));
        let (mut rx, mut rs) = (StreamKey(5).rng(), StreamKey(5).rng());
        for _ in 0..100 {
            xnes_step(&mut xs, &xhp, &mut fx, &mut rx).unwrap();
            snes_step(&mut ss, &shp, &mut fs, &mut rs).unwrap();
            assert!((xs.theta[0] - ss.theta[0]).abs() < 1e-12);
        }
        let AlgorithmState::Xnes { sigma, .. } = &xs.detail else { panic!() };
        let AlgorithmState::Snes { sigma: sv } = &ss.detail else { panic!() };
        assert!((sigma - sv[0]).abs() < 1e-12);
    }

    fn nes_rate() -> f64 {
        super::super::nes_default_rate(1)
    }
}
