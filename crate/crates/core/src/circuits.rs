//! Parameterized circuit templates.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::simulator::{Axis, Gate, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    #[serde(rename = "RX")]
    Rx,
    #[serde(rename = "RY")]
    Ry,
    #[serde(rename = "RZ")]
    Rz,
    #[serde(rename = "CNOT")]
    Cnot,
}

impl GateKind {
    pub fn axis(self) -> Option<Axis> {
        match self {
            GateKind::Rx => Some(Axis::X),
            GateKind::Ry => Some(Axis::Y),
            GateKind::Rz => Some(Axis::Z),
            GateKind::Cnot => None,
        }
    }

    pub fn rotation(axis: Axis) -> Self {
        match axis {
            Axis::X => GateKind::Rx,
            Axis::Y => GateKind::Ry,
            Axis::Z => GateKind::Rz,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Cnot => "CNOT",
        })
    }
}

/// One gate position of a template. Rotations carry a parameter index,
/// CNOTs carry a control qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateSlot {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
    pub param_index: Option<usize>,
}

impl GateSlot {
    pub fn rotation(axis: Axis, target: usize, param_index: usize) -> Self {
        GateSlot {
            kind: GateKind::rotation(axis),
            target,
            control: None,
            param_index: Some(param_index),
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        GateSlot {
            kind: GateKind::Cnot,
            target,
            control: Some(control),
            param_index: None,
        }
    }

    fn bind(&self, params: &[f64]) -> Gate {
        match (self.kind.axis(), self.param_index, self.control) {
            (Some(axis), Some(p), _) => Gate::Rotation {
                axis,
                qubit: self.target,
                angle: params[p],
            },
            (None, _, Some(control)) => Gate::Cnot {
                control,
                target: self.target,
            },
            _ => unreachable!("slot validated at construction"),
        }
    }
}

/// Ordered gate list over `n_qubits` with `n_params` parameter slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTemplate")]
pub struct CircuitTemplate {
    n_qubits: usize,
    n_params: usize,
    slots: Vec<GateSlot>,
}

#[derive(Deserialize)]
struct RawTemplate {
    n_qubits: usize,
    #[allow(dead_code)]
    n_params: usize,
    slots: Vec<GateSlot>,
}

impl TryFrom<RawTemplate> for CircuitTemplate {
    type Error = Error;

    fn try_from(raw: RawTemplate) -> Result<Self> {
        let t = CircuitTemplate::new(raw.n_qubits, raw.slots)?;
        if t.n_params != raw.n_params {
            return Err(Error::config(format!(
                "declared n_params {} but slots use {}",
                raw.n_params, t.n_params
            )));
        }
        Ok(t)
    }
}

impl CircuitTemplate {
    /// Validates slots: qubits in range, rotations parameterized, CNOTs not,
    /// and parameter indices forming exactly `0..n_params`.
    pub fn new(n_qubits: usize, slots: Vec<GateSlot>) -> Result<Self> {
        StateVector::zero(n_qubits)?;
        let mut seen = Vec::new();
        for (i, slot) in slots.iter().enumerate() {
            if slot.target >= n_qubits {
                return Err(Error::config(format!("slot {i}: target {} out of range", slot.target)));
            }
            match (slot.kind, slot.control, slot.param_index) {
                (GateKind::Cnot, Some(c), None) => {
                    if c >= n_qubits || c == slot.target {
                        return Err(Error::config(format!("slot {i}: invalid CNOT control {c}")));
                    }
                }
                (GateKind::Cnot, _, _) => {
                    return Err(Error::config(format!(
                        "slot {i}: CNOT needs a control and no parameter"
                    )));
                }
                (_, None, Some(p)) => {
                    if p >= seen.len() {
                        seen.resize(p + 1, false);
                    }
                    if std::mem::replace(&mut seen[p], true) {
                        return Err(Error::config(format!("slot {i}: parameter {p} reused")));
                    }
                }
                _ => {
                    return Err(Error::config(format!(
                        "slot {i}: rotation needs a parameter and no control"
                    )));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|used| !used) {
            return Err(Error::config(format!("parameter {missing} is never used")));
        }
        Ok(CircuitTemplate {
            n_qubits,
            n_params: seen.len(),
            slots,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn slots(&self) -> &[GateSlot] {
        &self.slots
    }

    pub fn cnot_count(&self) -> usize {
        self.slots.iter().filter(|s| s.kind == GateKind::Cnot).count()
    }

    /// Applies the slots in order to `|0…0⟩` with `params` bound by index.
    pub fn evaluate(&self, params: &[f64]) -> Result<StateVector> {
        if params.len() != self.n_params {
            return Err(Error::DimensionMismatch {
                expected: self.n_params,
                found: params.len(),
            });
        }
        let mut state = StateVector::zero(self.n_qubits)?;
        for slot in &self.slots {
            state.apply(&slot.bind(params))?;
        }
        Ok(state)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("templates serialize")
    }

    /// Stable content hash of the slot list.
    pub fn fingerprint(&self) -> String {
        crate::fingerprint::of_json(self)
    }
}

/// Functional form of [`CircuitTemplate::evaluate`].
pub fn evaluate(template: &CircuitTemplate, params: &[f64]) -> Result<StateVector> {
    template.evaluate(params)
}

/// Seeded random-layers circuit.
///
/// Gates are laid out in `max(1, n_cnots)` blocks. Each block holds
/// `n_rotations / blocks` rotations followed by one CNOT; the rotation
/// remainder goes into the last block (after its CNOT when there is one).
/// Every rotation draws its axis uniformly from {X, Y, Z} and its qubit
/// uniformly; every CNOT draws an ordered pair of distinct qubits uniformly.
pub fn build_random_layers(
    seed: StreamKey,
    n_qubits: usize,
    n_rotations: usize,
    n_cnots: usize,
) -> Result<CircuitTemplate> {
    if n_cnots > 0 && n_qubits < 2 {
        return Err(Error::config("CNOT gates need at least two qubits"));
    }
    StateVector::zero(n_qubits)?;
    let mut rng = seed.rng();
    let blocks = n_cnots.max(1);
    let per_block = n_rotations / blocks;
    let remainder = n_rotations % blocks;

    let mut slots = Vec::with_capacity(n_rotations + n_cnots);
    let mut next_param = 0;
    let mut push_rotations = |slots: &mut Vec<GateSlot>, rng: &mut crate::rng::StreamRng, count| {
        for _ in 0..count {
            let axis = Axis::ALL[rng.random_range(0..3)];
            let qubit = rng.random_range(0..n_qubits);
            slots.push(GateSlot::rotation(axis, qubit, next_param));
            next_param += 1;
        }
    };
    for _ in 0..blocks {
        push_rotations(&mut slots, &mut rng, per_block);
        if n_cnots > 0 {
            let control = rng.random_range(0..n_qubits);
            let mut target = rng.random_range(0..n_qubits - 1);
            if target >= control {
                target += 1;
            }
            slots.push(GateSlot::cnot(control, target));
        }
    }
    push_rotations(&mut slots, &mut rng, remainder);
    CircuitTemplate::new(n_qubits, slots)
}

/// QCBM ansatz: per layer, RX on every qubit, then RZ on every qubit, then a
/// CNOT ring `q → (q+1) mod n`.
pub fn build_qcbm(n_qubits: usize, n_layers: usize) -> Result<CircuitTemplate> {
    if n_qubits < 2 {
        return Err(Error::config("the QCBM ansatz needs at least two qubits"));
    }
    let mut slots = Vec::with_capacity(n_layers * 3 * n_qubits);
    let mut p = 0;
    for _ in 0..n_layers {
        for axis in [Axis::X, Axis::Z] {
            for q in 0..n_qubits {
                slots.push(GateSlot::rotation(axis, q, p));
                p += 1;
            }
        }
        for q in 0..n_qubits {
            slots.push(GateSlot::cnot(q, (q + 1) % n_qubits));
        }
    }
    CircuitTemplate::new(n_qubits, slots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn random_layers_counts() {
        let t = build_random_layers(StreamKey(11), 3, 30, 10).unwrap();
        assert_eq!(t.n_params(), 30);
        assert_eq!(t.cnot_count(), 10);
        let t = build_random_layers(StreamKey(11), 9, 162, 49).unwrap();
        assert_eq!((t.n_params(), t.cnot_count()), (162, 49));
        let t = build_random_layers(StreamKey(11), 1, 4, 0).unwrap();
        assert_eq!((t.n_params(), t.cnot_count()), (4, 0));
    }

    #[test]
    fn random_layers_deterministic() {
        let a = build_random_layers(StreamKey(5), 5, 100, 30).unwrap();
        let b = build_random_layers(StreamKey(5), 5, 100, 30).unwrap();
        let c = build_random_layers(StreamKey(6), 5, 100, 30).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn single_qubit_cnots_rejected() {
        assert!(build_random_layers(StreamKey(0), 1, 3, 1).is_err());
    }

    #[test]
    fn qcbm_layout() {
        let t = build_qcbm(2, 1).unwrap();
        let kinds: Vec<_> = t.slots().iter().map(|s| (s.kind, s.target, s.control)).collect();
        assert_eq!(
            kinds,
            vec![
                (GateKind::Rx, 0, None),
                (GateKind::Rx, 1, None),
                (GateKind::Rz, 0, None),
                (GateKind::Rz, 1, None),
                (GateKind::Cnot, 1, Some(0)),
                (GateKind::Cnot, 0, Some(1)),
            ]
        );
        assert_eq!(build_qcbm(10, 10).unwrap().n_params(), 200);
        assert_eq!(build_qcbm(4, 3).unwrap(), build_qcbm(4, 3).unwrap());
        assert!(build_qcbm(1, 3).is_err());
    }

    #[test]
    fn zero_params_give_zero_state() {
        let t = build_random_layers(StreamKey(3), 4, 20, 8).unwrap();
        let s = t.evaluate(&[0.0; 20]).unwrap();
        assert_eq!(s, StateVector::zero(4).unwrap());
    }

    #[test]
    fn single_rx_flip() {
        let t = CircuitTemplate::new(1, vec![GateSlot::rotation(Axis::X, 0, 0)]).unwrap();
        let p = t.evaluate(&[PI]).unwrap().probabilities();
        assert!(p[0] < 1e-30 && (p[1] - 1.0).abs() < 1e-15);
        assert!(t.evaluate(&[PI, 0.0]).is_err());
    }

    #[test]
    fn template_validation() {
        let rot = GateSlot::rotation(Axis::X, 0, 1);
        assert!(CircuitTemplate::new(2, vec![rot]).is_err(), "index 0 missing");
        let dup = vec![GateSlot::rotation(Axis::X, 0, 0), GateSlot::rotation(Axis::Y, 1, 0)];
        assert!(CircuitTemplate::new(2, dup).is_err());
        assert!(CircuitTemplate::new(2, vec![GateSlot::cnot(1, 1)]).is_err());
        let bad = GateSlot {
            kind: GateKind::Rz,
            target: 0,
            control: Some(1),
            param_index: Some(0),
        };
        assert!(CircuitTemplate::new(2, vec![bad]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = build_random_layers(StreamKey(9), 3, 6, 2).unwrap();
        let back: CircuitTemplate = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(t, back);
        assert_eq!(t.fingerprint(), back.fingerprint());
    }
}
