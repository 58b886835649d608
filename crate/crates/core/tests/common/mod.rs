//! Dense-matrix reference implementations used as oracles by the
//! integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use qzo_core::reporting::BoxStats;
use qzo_core::simulator::{Axis, Gate, Observable, PauliTerm, StateVector};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli(axis: Option<Axis>) -> DMatrix<Complex64> {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match axis {
        None => DMatrix::from_row_slice(2, 2, &[one, z, z, one]),
        Some(Axis::X) => DMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        Some(Axis::Y) => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        Some(Axis::Z) => DMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    }
}

/// `ops[0] ⊗ ops[1] ⊗ …`, so qubit 0 is the most significant factor.
pub fn kron_all(ops: &[DMatrix<Complex64>]) -> DMatrix<Complex64> {
    ops.iter()
        .skip(1)
        .fold(ops[0].clone(), |acc, op| acc.kronecker(op))
}

pub fn single_qubit_op(n: usize, qubit: usize, op: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let ops: Vec<_> = (0..n)
        .map(|q| if q == qubit { op.clone() } else { pauli(None) })
        .collect();
    kron_all(&ops)
}

pub fn term_matrix(n: usize, term: &PauliTerm) -> DMatrix<Complex64> {
    let ops: Vec<_> = (0..n)
        .map(|q| {
            let axis = term.factors.iter().find(|(fq, _)| *fq == q).map(|(_, a)| *a);
            pauli(axis)
        })
        .collect();
    kron_all(&ops) * c(term.coefficient, 0.0)
}

pub fn observable_matrix(obs: &Observable) -> DMatrix<Complex64> {
    let n = obs.n_qubits();
    let dim = 1 << n;
    obs.terms()
        .iter()
        .fold(DMatrix::zeros(dim, dim), |acc, t| acc + term_matrix(n, t))
}

/// `exp(−iφA/2) = cos(φ/2) I − i sin(φ/2) A`.
pub fn rotation_matrix(axis: Axis, angle: f64) -> DMatrix<Complex64> {
    pauli(None) * c((angle / 2.0).cos(), 0.0) - pauli(Some(axis)) * c(0.0, (angle / 2.0).sin())
}

/// `|0⟩⟨0|_c ⊗ I + |1⟩⟨1|_c ⊗ X_t`.
pub fn cnot_matrix(n: usize, control: usize, target: usize) -> DMatrix<Complex64> {
    let p0 = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let p1 = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let with = |ctl: &DMatrix<Complex64>, tgt: &DMatrix<Complex64>| {
        let ops: Vec<_> = (0..n)
            .map(|q| {
                if q == control {
                    ctl.clone()
                } else if q == target {
                    tgt.clone()
                } else {
                    pauli(None)
                }
            })
            .collect();
        kron_all(&ops)
    };
    with(&p0, &pauli(None)) + with(&p1, &pauli(Some(Axis::X)))
}

pub fn gate_matrix(n: usize, gate: &Gate) -> DMatrix<Complex64> {
    match *gate {
        Gate::Rotation { axis, qubit, angle } => {
            single_qubit_op(n, qubit, &rotation_matrix(axis, angle))
        }
        Gate::Cnot { control, target } => cnot_matrix(n, control, target),
    }
}

pub fn circuit_unitary(n: usize, gates: &[Gate]) -> DMatrix<Complex64> {
    gates
        .iter()
        .fold(DMatrix::identity(1 << n, 1 << n), |u, g| gate_matrix(n, g) * u)
}

pub fn zero_vector(n: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(1 << n);
    v[0] = c(1.0, 0.0);
    v
}

pub fn to_vector(state: &StateVector) -> DVector<Complex64> {
    DVector::from_column_slice(state.amplitudes())
}

/// `⟨ψ|H|ψ⟩` with `ψ = U|0⟩`.
pub fn dense_expectation(n: usize, gates: &[Gate], obs: &Observable) -> f64 {
    let psi = circuit_unitary(n, gates) * zero_vector(n);
    let h = observable_matrix(obs);
    (psi.adjoint() * h * &psi)[(0, 0)].re
}

/// Ground energy by full diagonalization.
pub fn ground_energy(obs: &Observable) -> f64 {
    let h = observable_matrix(obs);
    h.symmetric_eigen().eigenvalues.min()
}

pub fn random_gates(rng: &mut impl Rng, n: usize, count: usize) -> Vec<Gate> {
    (0..count)
        .map(|_| {
            if n > 1 && rng.random_bool(0.3) {
                let control = rng.random_range(0..n);
                let target = (control + rng.random_range(1..n)) % n;
                Gate::cnot(control, target)
            } else {
                Gate::Rotation {
                    axis: Axis::ALL[rng.random_range(0..3)],
                    qubit: rng.random_range(0..n),
                    angle: rng.random_range(-7.0..7.0),
                }
            }
        })
        .collect()
}

pub fn random_observable(rng: &mut impl Rng, n: usize, n_terms: usize) -> Observable {
    let terms = (0..n_terms)
        .map(|_| {
            let mut qubits: Vec<usize> = (0..n).collect();
            let weight = rng.random_range(1..=n);
            let factors = (0..weight)
                .map(|_| {
                    let q = qubits.swap_remove(rng.random_range(0..qubits.len()));
                    (q, Axis::ALL[rng.random_range(0..3)])
                })
                .collect();
            PauliTerm::new(rng.random_range(-2.0..2.0), factors)
        })
        .collect();
    Observable::new(n, terms).unwrap()
}

pub fn apply_all(n: usize, gates: &[Gate]) -> StateVector {
    let mut s = StateVector::zero(n).unwrap();
    for g in gates {
        s.apply(g).unwrap();
    }
    s
}

/// Sort, interpolate at `(n − 1)p`, then scan for whiskers.
pub fn brute_force_box(values: &[f64]) -> BoxStats {
    let mut s = values.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| {
        let h = (s.len() - 1) as f64 * p;
        let i = h.floor() as usize;
        if i + 1 < s.len() {
            s[i] + (h - i as f64) * (s[i + 1] - s[i])
        } else {
            s[i]
        }
    };
    let (q1, median, q3) = (q(0.25), q(0.5), q(0.75));
    let iqr = q3 - q1;
    let mut whisker_low = f64::INFINITY;
    let mut whisker_high = f64::NEG_INFINITY;
    for &v in &s {
        if v >= q1 - 1.5 * iqr && v <= q3 + 1.5 * iqr {
            whisker_low = whisker_low.min(v);
            whisker_high = whisker_high.max(v);
        }
    }
    let mut outliers = Vec::new();
    for &v in &s {
        if v < whisker_low || v > whisker_high {
            outliers.push(v);
        }
    }
    BoxStats {
        median,
        q1,
        q3,
        whisker_low,
        whisker_high,
        outliers,
    }
}
