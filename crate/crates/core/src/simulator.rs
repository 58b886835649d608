//! Dense statevector simulation.
//!
//! Conventions:
//! * qubit 0 is the most significant bit of a basis-state index, so on two
//!   qubits `|10⟩` has index 2;
//! * rotations are `R_A(φ) = exp(−i φ A / 2)` for `A ∈ {X, Y, Z}`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 12;

/// Tolerance on the imaginary residue of a Pauli expectation, relative to the
/// observable's total coefficient weight.
const IMAG_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        };
        f.write_str(s)
    }
}

/// A concrete gate with bound angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    Rotation { axis: Axis, qubit: usize, angle: f64 },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn rx(qubit: usize, angle: f64) -> Self {
        Gate::Rotation { axis: Axis::X, qubit, angle }
    }

    pub fn ry(qubit: usize, angle: f64) -> Self {
        Gate::Rotation { axis: Axis::Y, qubit, angle }
    }

    pub fn rz(qubit: usize, angle: f64) -> Self {
        Gate::Rotation { axis: Axis::Z, qubit, angle }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }
}

/// Pure state of `n_qubits` qubits as `2^n` complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amplitudes })
    }

    /// Wraps raw amplitudes after checking length and normalization.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::config(format!(
                "amplitude count {len} is not a power of two ≥ 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_register(n_qubits)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::config(format!("state is not normalized (norm² = {norm})")));
        }
        Ok(StateVector { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::config(format!(
                "qubit {qubit} out of range for a {}-qubit state",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        match *gate {
            Gate::Rotation { axis, qubit, angle } => {
                self.check_qubit(qubit)?;
                let (s, c) = (angle / 2.0).sin_cos();
                let m = match axis {
                    Axis::X => [
                        [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                        [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
                    ],
                    Axis::Y => [
                        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                    ],
                    Axis::Z => [
                        [Complex64::new(c, -s), Complex64::new(0.0, 0.0)],
                        [Complex64::new(0.0, 0.0), Complex64::new(c, s)],
                    ],
                };
                self.apply_single(qubit, &m);
            }
            Gate::Cnot { control, target } => {
                self.check_qubit(control)?;
                self.check_qubit(target)?;
                if control == target {
                    return Err(Error::config(format!(
                        "CNOT control and target are both qubit {control}"
                    )));
                }
                let cmask = self.mask(control);
                let tmask = self.mask(target);
                for i in 0..self.amplitudes.len() {
                    if i & cmask != 0 && i & tmask == 0 {
                        self.amplitudes.swap(i, i | tmask);
                    }
                }
            }
        }
        Ok(())
    }

    fn apply_single(&mut self, qubit: usize, m: &[[Complex64; 2]; 2]) {
        let mask = self.mask(qubit);
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | mask];
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[i | mask] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// Born-rule outcome probabilities in the computational basis.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `⟨ψ|P|ψ⟩` for a single Pauli string (coefficient ignored).
    fn pauli_expectation(&self, term: &PauliTerm) -> Complex64 {
        let mut flip = 0usize;
        let mut phase_mask = 0usize;
        let mut y_count = 0u32;
        for &(q, axis) in &term.factors {
            let m = self.mask(q);
            match axis {
                Axis::X => flip |= m,
                Axis::Y => {
                    flip |= m;
                    phase_mask |= m;
                    y_count += 1;
                }
                Axis::Z => phase_mask |= m,
            }
        }
        // P|x⟩ = i^{#Y} (−1)^{popcount(x & phase_mask)} |x ⊕ flip⟩
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, &ax) in self.amplitudes.iter().enumerate() {
            let bra = self.amplitudes[x ^ flip].conj();
            let term = bra * ax;
            if (x & phase_mask).count_ones() % 2 == 1 {
                acc -= term;
            } else {
                acc += term;
            }
        }
        match y_count % 4 {
            0 => acc,
            1 => acc * Complex64::i(),
            2 => -acc,
            _ => -acc * Complex64::i(),
        }
    }
}

fn check_register(n_qubits: usize) -> Result<()> {
    if !(1..=MAX_QUBITS).contains(&n_qubits) {
        return Err(Error::config(format!(
            "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// `|0…0⟩`.
pub fn init_zero_state(n_qubits: usize) -> Result<StateVector> {
    StateVector::zero(n_qubits)
}

/// Functional form of [`StateVector::apply`].
pub fn apply_gate(mut state: StateVector, gate: &Gate) -> Result<StateVector> {
    state.apply(gate)?;
    Ok(state)
}

pub fn probabilities(state: &StateVector) -> Vec<f64> {
    state.probabilities()
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

pub fn expectation(state: &StateVector, obs: &Observable) -> Result<f64> {
    obs.expectation(state)
}

/// A real multiple of a Pauli string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coefficient: f64,
    /// `(qubit, axis)` pairs on distinct qubits.
    pub factors: Vec<(usize, Axis)>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, factors: Vec<(usize, Axis)>) -> Self {
        PauliTerm { coefficient, factors }
    }

    pub fn single(coefficient: f64, qubit: usize, axis: Axis) -> Self {
        PauliTerm::new(coefficient, vec![(qubit, axis)])
    }

    pub fn pair(coefficient: f64, a: (usize, Axis), b: (usize, Axis)) -> Self {
        PauliTerm::new(coefficient, vec![a, b])
    }
}

/// Weighted sum of Pauli strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawObservable")]
pub struct Observable {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

#[derive(Deserialize)]
struct RawObservable {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl TryFrom<RawObservable> for Observable {
    type Error = Error;

    fn try_from(raw: RawObservable) -> Result<Self> {
        Observable::new(raw.n_qubits, raw.terms)
    }
}

impl Observable {
    pub fn new(n_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        check_register(n_qubits)?;
        for (i, term) in terms.iter().enumerate() {
            if term.factors.is_empty() {
                return Err(Error::config(format!("term {i} has no Pauli factors")));
            }
            if !term.coefficient.is_finite() {
                return Err(Error::config(format!("term {i} has a non-finite coefficient")));
            }
            for (k, &(q, _)) in term.factors.iter().enumerate() {
                if q >= n_qubits {
                    return Err(Error::config(format!(
                        "term {i} acts on qubit {q} of a {n_qubits}-qubit observable"
                    )));
                }
                if term.factors[..k].iter().any(|&(p, _)| p == q) {
                    return Err(Error::config(format!("term {i} repeats qubit {q}")));
                }
            }
        }
        Ok(Observable { n_qubits, terms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// `Σ cₖ ⟨ψ|Pₖ|ψ⟩`.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: state.n_qubits(),
            });
        }
        let mut total = Complex64::new(0.0, 0.0);
        let mut weight = 0.0;
        for term in &self.terms {
            total += state.pauli_expectation(term) * term.coefficient;
            weight += term.coefficient.abs();
        }
        if total.im.abs() > IMAG_TOLERANCE * (1.0 + weight) {
            return Err(Error::Internal(format!(
                "expectation has imaginary residue {:e}",
                total.im
            )));
        }
        Ok(total.re)
    }
}
