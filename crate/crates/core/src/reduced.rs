//! Bipartitions of a permutation-symmetric state and the reduced density
//! matrices of qubit blocks.
//!
//! A state of `N` qubits factors over a block of `Q` qubits and its
//! complement as `Σ_{mn} A_{mn} |m_Q⟩|n_{N-Q}⟩` with
//! `A_{mn} = C_{mn} a_{m+n}`, so the block's reduced state in its own Dicke
//! basis is the `(Q+1) x (Q+1)` Gram matrix `A A†`.

use faer::{c64, Mat, MatRef};

use crate::combinatorics::CoeffTable;
use crate::error::{Error, Result};
use crate::linalg;
use crate::state::PSState;

pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
pub const TRACE_TOLERANCE: f64 = 1e-10;
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Coefficient matrix `A` of a `Q | N-Q` split; `Tr(A A†) = 1`.
#[derive(Debug, Clone)]
pub struct CoeffMatrix {
    q: usize,
    n: usize,
    mat: Mat<c64>,
}

impl CoeffMatrix {
    pub fn block(&self) -> usize {
        self.q
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.mat.nrows()
    }

    pub fn cols(&self) -> usize {
        self.mat.ncols()
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    pub fn get(&self, m: usize, k: usize) -> c64 {
        self.mat[(m, k)]
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.cols() {
            for m in 0..self.rows() {
                acc += self.mat[(m, k)].norm_sqr();
            }
        }
        acc
    }
}

/// A Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: Mat<c64>,
}

impl DensityMatrix {
    /// Validates Hermiticity (entrywise `1e-12`) and trace (`1e-10`).
    /// Positivity is checked when the spectrum is computed.
    pub fn new(mat: Mat<c64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::domain("matrix", format!("{}x{} is not a nonempty square", mat.nrows(), mat.ncols())));
        }
        let defect = linalg::hermiticity_defect(mat.as_ref());
        if defect > HERMITIAN_TOLERANCE {
            return Err(Error::Integrity(format!("matrix is not Hermitian (defect {defect:e})")));
        }
        let tr = linalg::trace(mat.as_ref());
        if (tr.re - 1.0).abs() > TRACE_TOLERANCE || tr.im.abs() > TRACE_TOLERANCE {
            return Err(Error::Integrity(format!("trace {tr} is not 1")));
        }
        Ok(DensityMatrix { mat })
    }

    pub(crate) fn from_hermitian_unchecked(mat: Mat<c64>) -> Self {
        DensityMatrix { mat }
    }

    /// The maximally mixed state of dimension `d`.
    pub fn maximally_mixed(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("d", "dimension must be positive"));
        }
        let w = 1.0 / d as f64;
        Ok(DensityMatrix {
            mat: Mat::from_fn(d, d, |i, j| if i == j { c64::new(w, 0.0) } else { c64::new(0.0, 0.0) }),
        })
    }

    /// Diagonal density matrix from nonnegative weights summing to one.
    pub fn diagonal(weights: &[f64]) -> Result<Self> {
        let mat = Mat::from_fn(weights.len(), weights.len(), |i, j| {
            if i == j {
                c64::new(weights[i], 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        });
        let rho = DensityMatrix::new(mat)?;
        rho.eigenvalues()?;
        Ok(rho)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.mat[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(self.mat.as_ref()).re
    }

    /// `Tr ρ²`, from the Frobenius norm.
    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                acc += self.mat[(i, j)].norm_sqr();
            }
        }
        acc
    }

    /// Eigenvalues in nondecreasing order; an eigenvalue below `-1e-10` is an
    /// integrity error.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let ev = linalg::hermitian_eigenvalues(self.mat.as_ref())?;
        check_psd(&ev)?;
        Ok(ev)
    }
}

pub(crate) fn check_psd(ev: &[f64]) -> Result<()> {
    if let Some(&min) = ev.iter().min_by(|a, b| a.total_cmp(b)) {
        if min < -PSD_TOLERANCE {
            return Err(Error::Integrity(format!("negative eigenvalue {min:e}")));
        }
    }
    Ok(())
}

/// Precomputed weights for splitting `N` qubits into a block of `Q` and its
/// complement; reusable across any number of states.
#[derive(Debug, Clone)]
pub struct Bipartition {
    table: CoeffTable,
}

impl Bipartition {
    pub fn new(n: usize, q: usize) -> Result<Self> {
        if q == 0 || q >= n {
            return Err(Error::domain("q", format!("block size must satisfy 1 <= Q <= N-1, got Q={q}, N={n}")));
        }
        Ok(Bipartition {
            table: CoeffTable::by_recursion(n, q)?,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.table.n_qubits()
    }

    pub fn block(&self) -> usize {
        self.table.block()
    }

    pub fn table(&self) -> &CoeffTable {
        &self.table
    }

    fn check_state(&self, state: &PSState) -> Result<()> {
        if state.n_qubits() != self.n_qubits() {
            return Err(Error::domain(
                "state",
                format!("state has {} qubits, partition expects {}", state.n_qubits(), self.n_qubits()),
            ));
        }
        Ok(())
    }

    fn fill(&self, amps: &[c64]) -> Mat<c64> {
        let t = &self.table;
        Mat::from_fn(t.rows(), t.cols(), |m, k| amps[m + k] * t.get(m, k))
    }

    pub fn coefficient_matrix(&self, state: &PSState) -> Result<CoeffMatrix> {
        self.check_state(state)?;
        Ok(CoeffMatrix {
            q: self.block(),
            n: self.n_qubits(),
            mat: self.fill(state.amplitudes()),
        })
    }

    /// `ρ_Q = A A†` in the block's Dicke basis.
    pub fn reduced_density_matrix(&self, state: &PSState) -> Result<DensityMatrix> {
        self.check_state(state)?;
        let a = self.fill(state.amplitudes());
        Ok(DensityMatrix::from_hermitian_unchecked(linalg::gram(a.as_ref())))
    }

    /// Nonzero-spectrum eigenvalues of the block's reduced state, taken from
    /// whichever of `A A†`, `A† A` is smaller (they share nonzero
    /// eigenvalues). Length `min(Q, N-Q) + 1`, nondecreasing.
    pub fn spectrum(&self, state: &PSState) -> Result<Vec<f64>> {
        self.check_state(state)?;
        let a = self.fill(state.amplitudes());
        let g = if a.nrows() <= a.ncols() {
            linalg::gram(a.as_ref())
        } else {
            linalg::gram_adjoint(a.as_ref())
        };
        let ev = linalg::hermitian_eigenvalues(g.as_ref())?;
        check_psd(&ev)?;
        Ok(ev)
    }

    /// `Tr ρ_Q²` without an eigensolve.
    pub fn purity(&self, state: &PSState) -> Result<f64> {
        self.check_state(state)?;
        let a = self.fill(state.amplitudes());
        let g = if a.nrows() <= a.ncols() {
            linalg::gram(a.as_ref())
        } else {
            linalg::gram_adjoint(a.as_ref())
        };
        Ok(DensityMatrix::from_hermitian_unchecked(g).purity())
    }
}

/// Coefficient matrix of the `Q | N-Q` split of `state`.
pub fn coefficient_matrix(state: &PSState, q: usize) -> Result<CoeffMatrix> {
    Bipartition::new(state.n_qubits(), q)?.coefficient_matrix(state)
}

/// Reduced density matrix of any `Q` of the state's qubits.
pub fn reduced_density_matrix(state: &PSState, q: usize) -> Result<DensityMatrix> {
    Bipartition::new(state.n_qubits(), q)?.reduced_density_matrix(state)
}
