use faer::{c64, Mat};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::reduced::{Bipartition, DensityMatrix};
use crate::state::PSState;

use super::montecarlo::sharded_samples;

/// Independent standard complex Gaussians (unit variance per component).
pub fn complex_gaussian_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<c64> {
    (0..len)
        .map(|_| c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Haar-random `N`-qubit permutation-symmetric state: Dicke amplitudes
/// uniform on the unit sphere of `C^{N+1}`.
pub fn sample_ps_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PSState> {
    if n == 0 {
        return Err(Error::domain("n", "need at least one qubit"));
    }
    PSState::normalized(complex_gaussian_vector(n + 1, rng))
}

/// Trace-normalized Wishart matrix `G G† / Tr(G G†)` with `G` an
/// `n1 x n2` complex Gaussian matrix.
pub fn sample_wishart_rdm<R: Rng + ?Sized>(n1: usize, n2: usize, rng: &mut R) -> Result<DensityMatrix> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::domain("dims", format!("Wishart dimensions must be positive, got {n1}x{n2}")));
    }
    let g = gaussian_matrix(n1, n2, rng);
    let mut w = linalg::gram(g.as_ref());
    let tr = linalg::trace(w.as_ref()).re;
    let inv = 1.0 / tr;
    for j in 0..n1 {
        for i in 0..n1 {
            w[(i, j)] *= inv;
        }
    }
    Ok(DensityMatrix::from_hermitian_unchecked(w))
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat<c64> {
    let mut g = Mat::<c64>::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            g[(i, j)] = c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
    }
    g
}

pub(crate) fn wishart_spectrum<R: Rng + ?Sized>(n1: usize, n2: usize, rng: &mut R) -> Result<Vec<f64>> {
    let rho = sample_wishart_rdm(n1, n2, rng)?;
    rho.eigenvalues()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleKind {
    /// Reduced states of `q` qubits of random `n`-qubit symmetric states.
    Ps { n: usize, q: usize },
    /// Trace-normalized Wishart matrices of size `n1` with `n2` columns.
    Wishart { n1: usize, n2: usize },
}

impl EnsembleKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EnsembleKind::Ps { n, q } => {
                if q == 0 || q >= n {
                    return Err(Error::domain("q", format!("need 1 <= Q <= N-1, got Q={q}, N={n}")));
                }
            }
            EnsembleKind::Wishart { n1, n2 } => {
                if n1 == 0 || n2 == 0 {
                    return Err(Error::domain("dims", format!("Wishart dimensions must be positive, got {n1}x{n2}")));
                }
            }
        }
        Ok(())
    }

    /// Dimension of the sampled matrices.
    pub fn matrix_dim(&self) -> usize {
        match *self {
            EnsembleKind::Ps { q, .. } => q + 1,
            EnsembleKind::Wishart { n1, .. } => n1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub sample_count: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, sample_count: usize, seed: u64) -> Result<Self> {
        kind.validate()?;
        if sample_count == 0 {
            return Err(Error::domain("samples", "sample count must be positive"));
        }
        Ok(EnsembleSpec { kind, sample_count, seed })
    }

    /// Full spectrum (`matrix_dim` eigenvalues) of every sampled matrix, in
    /// sample order.
    pub fn sample_spectra(&self) -> Result<Vec<Vec<f64>>> {
        self.kind.validate()?;
        match self.kind {
            EnsembleKind::Ps { n, q } => {
                let part = Bipartition::new(n, q)?;
                sharded_samples(self.seed, self.sample_count, |rng| {
                    let state = sample_ps_state(n, rng)?;
                    part.reduced_density_matrix(&state)?.eigenvalues()
                })
                .into_iter()
                .collect()
            }
            EnsembleKind::Wishart { n1, n2 } => {
                sharded_samples(self.seed, self.sample_count, |rng| wishart_spectrum(n1, n2, rng))
                    .into_iter()
                    .collect()
            }
        }
    }
}
