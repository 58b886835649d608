use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuits::{build_qcbm, build_random_layers};
use crate::error::{Error, Result};
use crate::problems::{
    cardinality_target, energy_loss, heisenberg_2d, ising_1d, nll_loss, random_hamiltonian,
    random_target, LossFunction,
};
use crate::rng::{MasterKey, StreamLabel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskId {
    #[serde(rename = "ising1d")]
    Ising1d,
    #[serde(rename = "heis2d")]
    Heis2d,
    #[serde(rename = "randham")]
    RandHam,
    #[serde(rename = "qcbm-card")]
    QcbmCard,
    #[serde(rename = "rand-dist")]
    RandDist,
}

impl TaskId {
    pub const ALL: [TaskId; 5] = [
        TaskId::Ising1d,
        TaskId::Heis2d,
        TaskId::RandHam,
        TaskId::QcbmCard,
        TaskId::RandDist,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskId::Ising1d => "ising1d",
            TaskId::Heis2d => "heis2d",
            TaskId::RandHam => "randham",
            TaskId::QcbmCard => "qcbm-card",
            TaskId::RandDist => "rand-dist",
        }
    }

    /// Benchmark length of the preset.
    pub fn default_steps(self) -> usize {
        match self {
            TaskId::Ising1d | TaskId::RandHam => 500,
            TaskId::Heis2d => 2000,
            TaskId::QcbmCard | TaskId::RandDist => 5000,
        }
    }

    /// Run length used while tuning. Heisenberg is tuned at half its
    /// benchmark length.
    pub fn tuning_steps(self) -> usize {
        match self {
            TaskId::Heis2d => 1000,
            other => other.default_steps(),
        }
    }

    pub fn preset(self) -> TaskConfig {
        match self {
            TaskId::Ising1d => TaskConfig::Ising1d(Default::default()),
            TaskId::Heis2d => TaskConfig::Heis2d(Default::default()),
            TaskId::RandHam => TaskConfig::RandHam(Default::default()),
            TaskId::QcbmCard => TaskConfig::QcbmCard(Default::default()),
            TaskId::RandDist => TaskConfig::RandDist(Default::default()),
        }
    }

    /// Whether the loss is an NLL (as opposed to an energy).
    pub fn is_generative(self) -> bool {
        matches!(self, TaskId::QcbmCard | TaskId::RandDist)
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown task `{s}`")))
    }
}

/// Periodic 1D transverse-field Ising chain on a random-layers circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsingTask {
    pub n_qubits: usize,
    pub n_rotations: usize,
    pub n_cnots: usize,
}

impl Default for IsingTask {
    fn default() -> Self {
        IsingTask {
            n_qubits: 3,
            n_rotations: 30,
            n_cnots: 10,
        }
    }
}

/// Periodic 2D Heisenberg lattice on a random-layers circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeisenbergTask {
    pub side: usize,
    pub n_rotations: usize,
    pub n_cnots: usize,
}

impl Default for HeisenbergTask {
    fn default() -> Self {
        HeisenbergTask {
            side: 3,
            n_rotations: 162,
            n_cnots: 49,
        }
    }
}

/// Random Pauli Hamiltonian on a random-layers circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomHamiltonianTask {
    pub n_qubits: usize,
    pub n_single: usize,
    pub n_pair: usize,
    pub n_rotations: usize,
    pub n_cnots: usize,
}

impl Default for RandomHamiltonianTask {
    fn default() -> Self {
        RandomHamiltonianTask {
            n_qubits: 10,
            n_single: 10,
            n_pair: 20,
            n_rotations: 30,
            n_cnots: 10,
        }
    }
}

/// Fixed-Hamming-weight target learned by the QCBM ansatz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CardinalityTask {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub cardinality: usize,
}

impl Default for CardinalityTask {
    fn default() -> Self {
        CardinalityTask {
            n_qubits: 10,
            n_layers: 10,
            cardinality: 5,
        }
    }
}

/// Random target distribution learned by a random-layers circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomDistributionTask {
    pub n_qubits: usize,
    pub n_rotations: usize,
    pub n_cnots: usize,
}

impl Default for RandomDistributionTask {
    fn default() -> Self {
        RandomDistributionTask {
            n_qubits: 5,
            n_rotations: 100,
            n_cnots: 30,
        }
    }
}

/// Task block of an experiment config: `{"id": "ising1d", "n_qubits": 3, …}`.
/// Omitted sizes take the preset values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id")]
pub enum TaskConfig {
    #[serde(rename = "ising1d")]
    Ising1d(IsingTask),
    #[serde(rename = "heis2d")]
    Heis2d(HeisenbergTask),
    #[serde(rename = "randham")]
    RandHam(RandomHamiltonianTask),
    #[serde(rename = "qcbm-card")]
    QcbmCard(CardinalityTask),
    #[serde(rename = "rand-dist")]
    RandDist(RandomDistributionTask),
}

impl TaskConfig {
    pub fn id(&self) -> TaskId {
        match self {
            TaskConfig::Ising1d(_) => TaskId::Ising1d,
            TaskConfig::Heis2d(_) => TaskId::Heis2d,
            TaskConfig::RandHam(_) => TaskId::RandHam,
            TaskConfig::QcbmCard(_) => TaskId::QcbmCard,
            TaskConfig::RandDist(_) => TaskId::RandDist,
        }
    }
}

/// Builds the loss of `task` for master key `key`. The circuit comes from the
/// `circuit` stream and random Hamiltonians or targets from the `problem`
/// stream.
pub fn build_problem(task: &TaskConfig, key: MasterKey) -> Result<LossFunction> {
    let circuit = key.stream(StreamLabel::Circuit);
    let problem = key.stream(StreamLabel::Problem);
    match task {
        TaskConfig::Ising1d(t) => energy_loss(
            build_random_layers(circuit, t.n_qubits, t.n_rotations, t.n_cnots)?,
            ising_1d(t.n_qubits)?,
        ),
        TaskConfig::Heis2d(t) => {
            let n = t.side * t.side;
            energy_loss(
                build_random_layers(circuit, n, t.n_rotations, t.n_cnots)?,
                heisenberg_2d(t.side)?,
            )
        }
        TaskConfig::RandHam(t) => energy_loss(
            build_random_layers(circuit, t.n_qubits, t.n_rotations, t.n_cnots)?,
            random_hamiltonian(problem, t.n_qubits, t.n_single, t.n_pair)?,
        ),
        TaskConfig::QcbmCard(t) => nll_loss(
            build_qcbm(t.n_qubits, t.n_layers)?,
            cardinality_target(t.n_qubits, t.cardinality)?,
        ),
        TaskConfig::RandDist(t) => nll_loss(
            build_random_layers(circuit, t.n_qubits, t.n_rotations, t.n_cnots)?,
            random_target(problem, t.n_qubits)?,
        ),
    }
}
