//! Benchmark objectives: Hamiltonian energies and generative NLL losses.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::circuits::CircuitTemplate;
use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::simulator::{Axis, Observable, PauliTerm, StateVector};

/// Floor applied to model probabilities inside the logarithm of the NLL.
pub const NLL_CLIP: f64 = 1e-12;

/// Standard deviation of random Hamiltonian coefficients and of the raw
/// normal draws behind random target distributions.
pub const COEFFICIENT_STD: f64 = PI;

/// Periodic transverse-field Ising chain `−Σ ZᵢZᵢ₊₁ − ½ Σ Xᵢ`.
pub fn ising_1d(n_qubits: usize) -> Result<Observable> {
    if n_qubits < 2 {
        return Err(Error::config("the Ising chain needs at least two qubits"));
    }
    let zz = (0..n_qubits).map(|i| PauliTerm::pair(-1.0, (i, Axis::Z), ((i + 1) % n_qubits, Axis::Z)));
    let x = (0..n_qubits).map(|i| PauliTerm::single(-0.5, i, Axis::X));
    Observable::new(n_qubits, zz.chain(x).collect())
}

/// Periodic `side × side` Heisenberg lattice:
/// `−½ Σ_{sites} Σ_{M∈{X,Y,Z}} (M⊗M_down + M⊗M_right) − ¼ Σ Z`.
///
/// Site `(i, j)` (zero-based) is qubit `side·i + j`.
pub fn heisenberg_2d(side: usize) -> Result<Observable> {
    if side < 2 {
        return Err(Error::config("the Heisenberg lattice needs side ≥ 2"));
    }
    let n = side * side;
    let site = |i: usize, j: usize| side * (i % side) + (j % side);
    let mut terms = Vec::with_capacity(7 * n);
    for i in 0..side {
        for j in 0..side {
            for axis in Axis::ALL {
                terms.push(PauliTerm::pair(-0.5, (site(i, j), axis), (site(i + 1, j), axis)));
                terms.push(PauliTerm::pair(-0.5, (site(i, j), axis), (site(i, j + 1), axis)));
            }
        }
    }
    for q in 0..n {
        terms.push(PauliTerm::single(-0.25, q, Axis::Z));
    }
    Observable::new(n, terms)
}

/// Random Hamiltonian with `n_pair` two-qubit terms on distinct qubit pairs
/// followed by `n_single` one-qubit terms. Coefficients are `Normal(0, π)`
/// (standard deviation π), axes and qubits uniform.
pub fn random_hamiltonian(
    seed: StreamKey,
    n_qubits: usize,
    n_single: usize,
    n_pair: usize,
) -> Result<Observable> {
    if n_qubits < 2 {
        return Err(Error::config("random Hamiltonians need at least two qubits"));
    }
    let mut rng = seed.rng();
    let normal = Normal::new(0.0, COEFFICIENT_STD).expect("finite std");
    let mut terms = Vec::with_capacity(n_single + n_pair);
    for _ in 0..n_pair {
        let c = normal.sample(&mut rng);
        let a = rng.random_range(0..n_qubits);
        let mut b = rng.random_range(0..n_qubits - 1);
        if b >= a {
            b += 1;
        }
        let axis_a = Axis::ALL[rng.random_range(0..3)];
        let axis_b = Axis::ALL[rng.random_range(0..3)];
        terms.push(PauliTerm::pair(c, (a, axis_a), (b, axis_b)));
    }
    for _ in 0..n_single {
        let c = normal.sample(&mut rng);
        let q = rng.random_range(0..n_qubits);
        let axis = Axis::ALL[rng.random_range(0..3)];
        terms.push(PauliTerm::single(c, q, axis));
    }
    Observable::new(n_qubits, terms)
}

/// Probability distribution over `n_bits`-bit outcomes, indexed like
/// [`StateVector`] amplitudes (bit 0 is the most significant).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTarget")]
pub struct TargetDistribution {
    n_bits: usize,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawTarget {
    n_bits: usize,
    probs: Vec<f64>,
}

impl TryFrom<RawTarget> for TargetDistribution {
    type Error = Error;

    fn try_from(raw: RawTarget) -> Result<Self> {
        TargetDistribution::new(raw.n_bits, raw.probs)
    }
}

impl TargetDistribution {
    pub fn new(n_bits: usize, probs: Vec<f64>) -> Result<Self> {
        if n_bits == 0 || n_bits > crate::simulator::MAX_QUBITS {
            return Err(Error::config(format!("unsupported bit count {n_bits}")));
        }
        if probs.len() != 1 << n_bits {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_bits,
                found: probs.len(),
            });
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::config("probabilities must be finite and non-negative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::config(format!("probabilities sum to {total}, not 1")));
        }
        Ok(TargetDistribution { n_bits, probs })
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }

    pub fn fingerprint(&self) -> String {
        crate::fingerprint::of_json(self)
    }
}

/// Uniform distribution over bitstrings of Hamming weight `k`.
pub fn cardinality_target(n_bits: usize, k: usize) -> Result<TargetDistribution> {
    if k > n_bits {
        return Err(Error::config(format!("cardinality {k} exceeds {n_bits} bits")));
    }
    if n_bits == 0 || n_bits > crate::simulator::MAX_QUBITS {
        return Err(Error::config(format!("unsupported bit count {n_bits}")));
    }
    let support = (0..1usize << n_bits)
        .filter(|x| x.count_ones() as usize == k)
        .count();
    let weight = 1.0 / support as f64;
    let probs = (0..1usize << n_bits)
        .map(|x| if x.count_ones() as usize == k { weight } else { 0.0 })
        .collect();
    TargetDistribution::new(n_bits, renormalize(probs))
}

/// `|xᵢ| / Σ|xⱼ|` with `xᵢ ~ Normal(0, π)` over all `2^n_bits` outcomes.
pub fn random_target(seed: StreamKey, n_bits: usize) -> Result<TargetDistribution> {
    if n_bits == 0 || n_bits > crate::simulator::MAX_QUBITS {
        return Err(Error::config(format!("unsupported bit count {n_bits}")));
    }
    let mut rng = seed.rng();
    let normal = Normal::new(0.0, COEFFICIENT_STD).expect("finite std");
    let raw: Vec<f64> = (0..1usize << n_bits).map(|_| normal.sample(&mut rng).abs()).collect();
    let total: f64 = raw.iter().sum();
    TargetDistribution::new(n_bits, renormalize(raw.into_iter().map(|x| x / total).collect()))
}

// A second pass absorbs the rounding left by the first division so the sum
// lands within 1e-12 of one even for 4096 outcomes.
fn renormalize(probs: Vec<f64>) -> Vec<f64> {
    let total: f64 = probs.iter().sum();
    probs.into_iter().map(|p| p / total).collect()
}

/// What a loss function measures on the circuit output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Expected energy of a Hamiltonian.
    Energy(Observable),
    /// Cross-entropy of the Born distribution against a target.
    Nll(TargetDistribution),
}

/// Deterministic map from circuit parameters to a scalar loss.
#[derive(Clone, Debug, PartialEq)]
pub struct LossFunction {
    template: CircuitTemplate,
    objective: Objective,
}

impl LossFunction {
    pub fn n_params(&self) -> usize {
        self.template.n_params()
    }

    pub fn template(&self) -> &CircuitTemplate {
        &self.template
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn state(&self, params: &[f64]) -> Result<StateVector> {
        self.template.evaluate(params)
    }

    pub fn evaluate(&self, params: &[f64]) -> Result<f64> {
        let state = self.template.evaluate(params)?;
        self.evaluate_state(&state)
    }

    pub fn evaluate_state(&self, state: &StateVector) -> Result<f64> {
        match &self.objective {
            Objective::Energy(obs) => obs.expectation(state),
            Objective::Nll(target) => Ok(nll(target, &state.probabilities())),
        }
    }

    /// Content hash of the observable or target distribution.
    pub fn objective_fingerprint(&self) -> String {
        crate::fingerprint::of_json(&self.objective)
    }
}

/// `−Σ p_target(x) ln max(p_model(x), NLL_CLIP)`.
pub fn nll(target: &TargetDistribution, model: &[f64]) -> f64 {
    -target
        .probs()
        .iter()
        .zip(model)
        .filter(|(&t, _)| t > 0.0)
        .map(|(&t, &m)| t * m.max(NLL_CLIP).ln())
        .sum::<f64>()
}

pub fn energy_loss(template: CircuitTemplate, obs: Observable) -> Result<LossFunction> {
    if template.n_qubits() != obs.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: template.n_qubits(),
            found: obs.n_qubits(),
        });
    }
    Ok(LossFunction {
        template,
        objective: Objective::Energy(obs),
    })
}

pub fn nll_loss(template: CircuitTemplate, target: TargetDistribution) -> Result<LossFunction> {
    if template.n_qubits() != target.n_bits() {
        return Err(Error::DimensionMismatch {
            expected: template.n_qubits(),
            found: target.n_bits(),
        });
    }
    Ok(LossFunction {
        template,
        objective: Objective::Nll(target),
    })
}
