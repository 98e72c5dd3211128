//! Fixtures shared by the benchmarks.

use psym_core::ensembles::{sample_ps_state, stream_rng};
use psym_core::kicked_top::DEFAULT_DIM_CAP;
use psym_core::state::coherent_state;
use psym_core::{KickedTopParams, PSState, SpinSystem};

pub const SEED: u64 = 7;

/// A fixed random PS state of `n` qubits.
pub fn random_state(n: usize) -> PSState {
    sample_ps_state(n, &mut stream_rng(SEED, 0)).expect("valid qubit count")
}

/// Chaotic kicked top (`k = 6`, `p = π/2`) at spin `j`.
pub fn chaotic_top(j: f64) -> SpinSystem {
    SpinSystem::with_cap(KickedTopParams::standard(j, 6.0).expect("valid spin"), DEFAULT_DIM_CAP).expect("within cap")
}

pub fn start_state(j: f64) -> PSState {
    coherent_state(j, 2.25, 2.0).expect("valid spin")
}
