//! Shared fixtures for the criterion benches.

use qzo_core::circuits::build_random_layers;
use qzo_core::problems::{energy_loss, heisenberg_2d};
use qzo_core::{LossFunction, StreamKey};

/// Heisenberg 3×3 energy on the full-size random-layers circuit.
pub fn heisenberg_loss() -> LossFunction {
    let template = build_random_layers(StreamKey(0), 9, 162, 49).expect("valid sizes");
    energy_loss(template, heisenberg_2d(3).expect("valid side")).expect("matching sizes")
}
