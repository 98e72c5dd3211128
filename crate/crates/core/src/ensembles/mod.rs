//! Random ensembles of reduced density matrices, their spectra, and the
//! closed-form ensemble averages they are checked against.

pub mod averages;
pub mod montecarlo;
pub mod sampling;
pub mod spectrum;

pub use averages::*;
pub use montecarlo::{sharded_samples, stream_rng, SampleStats, CHUNK_SIZE};
pub use sampling::{sample_ps_state, sample_wishart_rdm, EnsembleKind, EnsembleSpec};
pub use spectrum::{
    ks_two_sample, marchenko_pastur_density, pooled_scaled_eigenvalues, spectral_histogram, KsTest,
    SpectralHistogram, TailFit,
};
