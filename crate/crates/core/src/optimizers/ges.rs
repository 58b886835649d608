//! Guided evolutionary strategies: antithetic Gaussian sampling whose
//! covariance leans toward the span of recent gradient estimates.

use rand::Rng;

use super::params::GesParams;
use super::{shifted, standard_normal, Algorithm, AlgorithmState, LossOracle, OptimizerState, StepOutcome};
use crate::error::Result;

/// Relative norm below which a Gram-Schmidt residual counts as dependent.
const RANK_TOLERANCE: f64 = 1e-10;

/// Orthonormal basis of `span(vectors)` by modified Gram-Schmidt (a reduced
/// QR that drops dependent and zero columns).
pub fn orthonormal_basis(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let scale = norm(v);
        if scale == 0.0 {
            continue;
        }
        let mut r = v.clone();
        for q in &basis {
            let proj = dot(&r, q);
            r.iter_mut().zip(q).for_each(|(x, y)| *x -= proj * y);
        }
        let n = norm(&r);
        if n > RANK_TOLERANCE * scale {
            r.iter_mut().for_each(|x| *x /= n);
            basis.push(r);
        }
    }
    basis
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Draws `Δ ~ Normal(0, σ² Σ)`. With fewer than `k` stored gradients
/// `Σ = I/n`; otherwise `Σ = (α/n) I + ((1−α)/k) U Uᵀ` for the orthonormal
/// basis `U` of the stored gradients.
pub fn ges_perturbation(
    history: &[Vec<f64>],
    hp: &GesParams,
    dim: usize,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let n = dim as f64;
    let xi = standard_normal(rng, dim);
    if history.len() < hp.k {
        let s = hp.sigma / n.sqrt();
        return xi.into_iter().map(|x| s * x).collect();
    }
    let basis = orthonormal_basis(history);
    let iso = hp.sigma * (hp.alpha_mix / n).sqrt();
    let guided = hp.sigma * ((1.0 - hp.alpha_mix) / hp.k as f64).sqrt();
    let mut delta: Vec<f64> = xi.into_iter().map(|x| iso * x).collect();
    for u in &basis {
        let w: f64 = rng.sample(rand_distr::StandardNormal);
        delta.iter_mut().zip(u).for_each(|(d, uk)| *d += guided * w * uk);
    }
    delta
}

pub fn ges_step(
    state: &mut OptimizerState,
    hp: &GesParams,
    loss: &mut LossOracle<'_>,
    rng: &mut impl Rng,
) -> Result<StepOutcome> {
    state.expect(Algorithm::Ges)?;
    let AlgorithmState::Ges { history } = &state.detail else {
        unreachable!("state tag checked above");
    };
    let history: Vec<Vec<f64>> = history.iter().cloned().collect();
    let delta = ges_perturbation(&history, hp, state.dim(), rng);
    ges_apply(state, hp, &delta, loss)
}

/// `g = β [f(θ+Δ) − f(θ−Δ)] / 2σ² · Δ`, `θ ← θ − η g`, and `g` joins the
/// history (oldest dropped beyond `k`).
pub fn ges_apply(
    state: &mut OptimizerState,
    hp: &GesParams,
    delta: &[f64],
    loss: &mut LossOracle<'_>,
) -> Result<StepOutcome> {
    state.expect(Algorithm::Ges)?;
    let plus = loss.evaluate(&shifted(&state.theta, &[(1.0, delta)]))?;
    let minus = loss.evaluate(&shifted(&state.theta, &[(-1.0, delta)]))?;
    let scale = hp.beta_scale * (plus - minus) / (2.0 * hp.sigma * hp.sigma);
    let g: Vec<f64> = delta.iter().map(|d| scale * d).collect();
    for (t, gk) in state.theta.iter_mut().zip(&g) {
        *t -= hp.eta * gk;
    }
    let AlgorithmState::Ges { history } = &mut state.detail else {
        unreachable!("state tag checked above");
    };
    if history.len() == hp.k {
        history.pop_front();
    }
    history.push_back(g);
    state.step += 1;
    Ok(StepOutcome::ACCEPTED)
}

#[cfg(test)]
mod tests {
    use super::super::HyperParams;
    use super::*;
    use crate::rng::StreamKey;

    fn covariance(samples: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let d = samples[0].len();
        let n = samples.len() as f64;
        let mut c = vec![vec![0.0; d]; d];
        for s in samples {
            for i in 0..d {
                for j in 0..d {
                    c[i][j] += s[i] * s[j] / n;
                }
            }
        }
        c
    }

    #[test]
    fn basis_handles_rank_deficiency() {
        let e1 = vec![1.0, 0.0, 0.0];
        let b = orthonormal_basis(&[e1.clone(), e1.clone(), vec![2.0, 0.0, 0.0], vec![0.0; 3]]);
        assert_eq!(b, vec![e1]);
        let b = orthonormal_basis(&[vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]]);
        assert_eq!(b.len(), 2);
        assert!(dot(&b[0], &b[1]).abs() < 1e-15);
        assert!((norm(&b[1]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn isotropic_before_history_fills() {
        let hp = GesParams {
            sigma: 1.0,
            ..Default::default()
        };
        let mut rng = StreamKey(21).rng();
        let samples: Vec<_> = (0..10_000).map(|_| ges_perturbation(&[], &hp, 2, &mut rng)).collect();
        let c = covariance(&samples);
        assert!((c[0][0] - 0.5).abs() < 0.05 && (c[1][1] - 0.5).abs() < 0.05);
        assert!(c[0][1].abs() < 0.05);
    }

    #[test]
    fn guided_covariance_along_history() {
        let hp = GesParams {
            sigma: 1.0,
            k: 3,
            alpha_mix: 0.4,
            ..Default::default()
        };
        let d = 4;
        let e1 = vec![1.0, 0.0, 0.0, 0.0];
        let history = vec![e1.clone(); 3];
        let mut rng = StreamKey(22).rng();
        let samples: Vec<_> = (0..20_000).map(|_| ges_perturbation(&history, &hp, d, &mut rng)).collect();
        let c = covariance(&samples);
        let along = hp.alpha_mix / d as f64 + (1.0 - hp.alpha_mix) / hp.k as f64;
        let across = hp.alpha_mix / d as f64;
        assert!((c[0][0] / along - 1.0).abs() < 0.1, "{} vs {along}", c[0][0]);
        for (j, row) in c.iter().enumerate().skip(1) {
            assert!((row[j] / across - 1.0).abs() < 0.1, "{} vs {across}", row[j]);
        }
        assert!(c[0][0] > c[1][1]);
    }

    #[test]
    fn constant_loss_pushes_zero_gradient() {
        let hp = GesParams {
            k: 2,
            ..Default::default()
        };
        let mut state = OptimizerState::new(&HyperParams::Ges(hp.clone()), vec![0.5, -0.5]).unwrap();
        let mut f = LossOracle::new(|_| Ok(2.0));
        let mut rng = StreamKey(0).rng();
        for n in 1..=3 {
            ges_step(&mut state, &hp, &mut f, &mut rng).unwrap();
            let AlgorithmState::Ges { history } = &state.detail else { panic!() };
            assert_eq!(history.len(), n.min(2));
            assert!(history.iter().flatten().all(|&g| g == 0.0));
        }
        assert_eq!(state.theta, vec![0.5, -0.5]);
        assert_eq!(f.queries(), 6);
    }

    #[test]
    fn hand_evaluated_update() {
        let hp = GesParams {
            sigma: 0.5,
            beta_scale: 2.0,
            eta: 0.1,
            ..Default::default()
        };
        let mut state = OptimizerState::new(&HyperParams::Ges(hp.clone()), vec![1.0]).unwrap();
        let mut f = LossOracle::new(|t| Ok(t[0] * t[0]));
        // f(1.2) − f(0.8) = 0.8; scale = 2·0.8/(2·0.25) = 3.2; g = 0.64.
        ges_apply(&mut state, &hp, &[0.2], &mut f).unwrap();
        assert!((state.theta[0] - (1.0 - 0.064)).abs() < 1e-12);
    }
}
