//! Exact reduced states, random ensembles, entropic correlations and
//! kicked-top dynamics for permutation-symmetric qubit systems.
//!
//! States of `N` symmetric qubits are held as `N+1` Dicke amplitudes; a
//! block of `Q` qubits has a `(Q+1)`-dimensional reduced state computed
//! without ever forming the `2^N` vector.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod combinatorics;
pub mod concentration;
pub mod ensembles;
pub mod error;
pub mod info;
pub mod kicked_top;
pub mod linalg;
pub mod qubits;
pub mod reduced;
pub mod state;

pub use concentration::{
    empirical_concentration, levy_bound, lipschitz_bound, ConcentrationReport, ConcentrationRow, Functional,
    LipschitzBudget, LipschitzKind, TmiComponent,
};
pub use ensembles::{EnsembleKind, EnsembleSpec, SampleStats, SpectralHistogram, TmiEstimate, WishartFlavor};
pub use error::{Error, Result};
pub use info::{BlockPartition, BlockReducer, EntropyKind, RegionEntropies};
pub use kicked_top::{ClassicalPoint, KickedTopParams, OtocSeries, SpinSystem, TimeSeries, TmiGrid};
pub use reduced::{Bipartition, CoeffMatrix, DensityMatrix};
pub use state::PSState;

pub use faer::c64;
