//! Keyed random streams.
//!
//! Every run is driven by one 64-bit [`MasterKey`]. Independent sub-keys are
//! derived from it per [`StreamLabel`] by hashing, so the circuit, problem
//! and initialization streams never depend on which optimizer consumes the
//! optimizer stream.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Concrete generator used for every stream.
pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MasterKey(pub u64);

impl MasterKey {
    /// Key of the `index`-th run of a suite starting at `self`.
    pub fn offset(self, index: u64) -> MasterKey {
        MasterKey(self.0.wrapping_add(index))
    }

    pub fn stream(self, label: StreamLabel) -> StreamKey {
        derive_stream(self, label)
    }
}

impl fmt::Display for MasterKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Seed of one derived stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StreamKey(pub u64);

impl StreamKey {
    pub fn rng(self) -> StreamRng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamLabel {
    /// Initial circuit parameters.
    Init,
    /// Random circuit structure.
    Circuit,
    /// Random Hamiltonians and target distributions.
    Problem,
    /// Perturbations drawn by the optimizer.
    Optimizer,
}

impl StreamLabel {
    pub const ALL: [StreamLabel; 4] = [
        StreamLabel::Init,
        StreamLabel::Circuit,
        StreamLabel::Problem,
        StreamLabel::Optimizer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StreamLabel::Init => "init",
            StreamLabel::Circuit => "circuit",
            StreamLabel::Problem => "problem",
            StreamLabel::Optimizer => "optimizer",
        }
    }
}

impl FromStr for StreamLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StreamLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown stream label `{s}`")))
    }
}

/// Sub-key for `label`: the first eight bytes of
/// `SHA-256("qzo-stream/" || label || master_le)`.
pub fn derive_stream(master: MasterKey, label: StreamLabel) -> StreamKey {
    let mut hasher = Sha256::new();
    hasher.update(b"qzo-stream/");
    hasher.update(label.as_str().as_bytes());
    hasher.update(master.0.to_le_bytes());
    let digest = hasher.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    StreamKey(u64::from_le_bytes(word))
}

/// String-labelled variant of [`derive_stream`]; rejects unknown labels.
pub fn derive_stream_named(master: MasterKey, label: &str) -> Result<StreamKey> {
    Ok(derive_stream(master, label.parse()?))
}
