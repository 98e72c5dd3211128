//! Entropies of qubit blocks and the mutual / tripartite information built
//! from them.
//!
//! Because the state is permutation symmetric, the reduced state of a block
//! depends only on how many qubits it holds, and for a pure state a block and
//! its complement share their nonzero spectrum. Blocks are therefore keyed by
//! `min(q, N - q)` and each distinct size is diagonalized once.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reduced::{Bipartition, DensityMatrix};
use crate::state::PSState;

/// Eigenvalues below this are treated as exact zeros.
pub const EIGEN_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyKind {
    /// `-Σ λ log2 λ`, in bits.
    VonNeumann,
    /// `1 - Σ λ²`.
    Linear,
    /// `log2(Σ λ^α) / (1 - α)`, in bits.
    Renyi(f64),
}

impl EntropyKind {
    pub fn renyi(alpha: f64) -> Result<Self> {
        let kind = EntropyKind::Renyi(alpha);
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        if let EntropyKind::Renyi(alpha) = *self {
            if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
                return Err(Error::domain("alpha", format!("Renyi order must be positive and != 1, got {alpha}")));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            EntropyKind::VonNeumann => "vn".into(),
            EntropyKind::Linear => "lin".into(),
            EntropyKind::Renyi(a) => format!("renyi{a}"),
        }
    }
}

impl std::str::FromStr for EntropyKind {
    type Err = Error;

    /// `vn`, `lin`, or `renyi:<α>` (long forms `von_neumann`, `linear` also
    /// accepted).
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "vn" | "von_neumann" | "vonneumann" => Ok(EntropyKind::VonNeumann),
            "lin" | "linear" => Ok(EntropyKind::Linear),
            other => {
                let alpha = other
                    .strip_prefix("renyi:")
                    .or_else(|| other.strip_prefix("renyi"))
                    .ok_or_else(|| Error::domain("kind", format!("unknown entropy kind {s:?}; use vn, lin or renyi:<alpha>")))?;
                let alpha: f64 = alpha
                    .parse()
                    .map_err(|_| Error::domain("kind", format!("bad Renyi order in {s:?}")))?;
                EntropyKind::renyi(alpha)
            }
        }
    }
}

fn clamp(l: f64) -> f64 {
    if l < EIGEN_FLOOR {
        0.0
    } else {
        l.min(1.0)
    }
}

/// Entropy of a spectrum. Eigenvalues are clamped to `[0, 1]` with anything
/// under [`EIGEN_FLOOR`] set to zero.
pub fn entropy_of_spectrum(eigenvalues: &[f64], kind: EntropyKind) -> Result<f64> {
    kind.validate()?;
    let s = match kind {
        EntropyKind::VonNeumann => -eigenvalues
            .iter()
            .map(|&l| clamp(l))
            .filter(|&l| l > 0.0)
            .map(|l| l * l.log2())
            .sum::<f64>(),
        EntropyKind::Linear => 1.0 - eigenvalues.iter().map(|&l| clamp(l).powi(2)).sum::<f64>(),
        EntropyKind::Renyi(alpha) => {
            let moment: f64 = eigenvalues
                .iter()
                .map(|&l| clamp(l))
                .filter(|&l| l > 0.0)
                .map(|l| l.powf(alpha))
                .sum();
            moment.log2() / (1.0 - alpha)
        }
    };
    Ok(s.max(0.0))
}

/// Entropy of a density matrix.
pub fn entropy(rho: &DensityMatrix, kind: EntropyKind) -> Result<f64> {
    entropy_of_spectrum(&rho.eigenvalues()?, kind)
}

/// Three disjoint qubit blocks of an `N`-qubit system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    sizes: [usize; 3],
    total: usize,
}

impl BlockPartition {
    pub fn new(q1: usize, q2: usize, q3: usize, total: usize) -> Result<Self> {
        if q1 == 0 || q2 == 0 || q3 == 0 {
            return Err(Error::domain("blocks", format!("block sizes must be positive, got ({q1},{q2},{q3})")));
        }
        if q1 + q2 + q3 > total {
            return Err(Error::domain("blocks", format!("blocks ({q1},{q2},{q3}) exceed {total} qubits")));
        }
        Ok(BlockPartition {
            sizes: [q1, q2, q3],
            total,
        })
    }

    pub fn sizes(&self) -> [usize; 3] {
        self.sizes
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Sizes of `A, B, C, AB, BC, AC, ABC` in that order.
    pub fn region_sizes(&self) -> [usize; 7] {
        let [a, b, c] = self.sizes;
        [a, b, c, a + b, b + c, a + c, a + b + c]
    }
}

/// Lazily built bipartitions of an `N`-qubit system, one per block size.
/// Shareable across threads.
#[derive(Debug)]
pub struct BlockReducer {
    n: usize,
    parts: Vec<OnceLock<Bipartition>>,
}

impl BlockReducer {
    pub fn new(n: usize) -> Self {
        BlockReducer {
            n,
            parts: (0..=n / 2).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    fn check(&self, state: &PSState) -> Result<()> {
        if state.n_qubits() != self.n {
            return Err(Error::domain("state", format!("expected {} qubits, got {}", self.n, state.n_qubits())));
        }
        Ok(())
    }

    /// Nonzero spectrum of a block of `q` qubits (`0 <= q <= N`).
    pub fn block_spectrum(&self, state: &PSState, q: usize) -> Result<Vec<f64>> {
        self.check(state)?;
        if q > self.n {
            return Err(Error::domain("q", format!("block of {q} qubits exceeds {}", self.n)));
        }
        let key = q.min(self.n - q);
        if key == 0 {
            // The empty block, or the whole (pure) system.
            return Ok(vec![1.0]);
        }
        let part = match self.parts[key].get() {
            Some(p) => p,
            None => {
                let p = Bipartition::new(self.n, key)?;
                let _ = self.parts[key].set(p);
                self.parts[key].get().expect("just set")
            }
        };
        part.spectrum(state)
    }

    pub fn block_entropy(&self, state: &PSState, q: usize, kind: EntropyKind) -> Result<f64> {
        entropy_of_spectrum(&self.block_spectrum(state, q)?, kind)
    }

    /// `I₂(A:B) = S(A) + S(B) - S(AB)` for disjoint blocks of `qa`, `qb` qubits.
    pub fn mutual_information(&self, state: &PSState, qa: usize, qb: usize, kind: EntropyKind) -> Result<f64> {
        if qa == 0 || qb == 0 || qa + qb > self.n {
            return Err(Error::domain("blocks", format!("blocks ({qa},{qb}) do not fit in {} qubits", self.n)));
        }
        Ok(self.block_entropy(state, qa, kind)? + self.block_entropy(state, qb, kind)?
            - self.block_entropy(state, qa + qb, kind)?)
    }

    /// Spectra of every region of a three-block partition.
    pub fn tripartite(&self, state: &PSState, blocks: &BlockPartition) -> Result<TripartiteSpectra> {
        if blocks.total() != self.n {
            return Err(Error::domain("blocks", format!("partition of {} qubits used on {}", blocks.total(), self.n)));
        }
        let sizes = blocks.region_sizes();
        let mut keys: Vec<usize> = Vec::with_capacity(7);
        let mut spectra: Vec<Vec<f64>> = Vec::with_capacity(7);
        let mut index = [0usize; 7];
        for (slot, &q) in sizes.iter().enumerate() {
            let key = q.min(self.n - q);
            index[slot] = match keys.iter().position(|&k| k == key) {
                Some(pos) => pos,
                None => {
                    keys.push(key);
                    spectra.push(self.block_spectrum(state, q)?);
                    keys.len() - 1
                }
            };
        }
        Ok(TripartiteSpectra { index, spectra })
    }

    pub fn tmi(&self, state: &PSState, q1: usize, q2: usize, q3: usize, kind: EntropyKind) -> Result<f64> {
        let blocks = BlockPartition::new(q1, q2, q3, self.n)?;
        self.tripartite(state, &blocks)?.tmi(kind)
    }
}

/// Region spectra of a three-block partition, deduplicated by block size.
#[derive(Debug, Clone)]
pub struct TripartiteSpectra {
    index: [usize; 7],
    spectra: Vec<Vec<f64>>,
}

/// Region entropies in the order `A, B, C, AB, BC, AC, ABC`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionEntropies(pub [f64; 7]);

impl RegionEntropies {
    pub fn s_a(&self) -> f64 {
        self.0[0]
    }

    pub fn mi_ab(&self) -> f64 {
        self.0[0] + self.0[1] - self.0[3]
    }

    pub fn mi_a_bc(&self) -> f64 {
        self.0[0] + self.0[4] - self.0[6]
    }

    /// `S_A + S_B + S_C - S_AB - S_BC - S_AC + S_ABC`.
    pub fn tmi(&self) -> f64 {
        let s = &self.0;
        s[0] + s[1] + s[2] - s[3] - s[4] - s[5] + s[6]
    }
}

impl TripartiteSpectra {
    pub fn entropies(&self, kind: EntropyKind) -> Result<RegionEntropies> {
        let per_key = self
            .spectra
            .iter()
            .map(|ev| entropy_of_spectrum(ev, kind))
            .collect::<Result<Vec<_>>>()?;
        let mut out = [0.0; 7];
        for (slot, &i) in self.index.iter().enumerate() {
            out[slot] = per_key[i];
        }
        Ok(RegionEntropies(out))
    }

    pub fn tmi(&self, kind: EntropyKind) -> Result<f64> {
        Ok(self.entropies(kind)?.tmi())
    }
}

/// `I₂(A:B)` for blocks of `qa` and `qb` qubits of `state`.
pub fn mutual_information(state: &PSState, qa: usize, qb: usize, kind: EntropyKind) -> Result<f64> {
    BlockReducer::new(state.n_qubits()).mutual_information(state, qa, qb, kind)
}

/// `I₃(A:B:C)` for blocks of `q1`, `q2`, `q3` qubits of `state`.
pub fn tmi(state: &PSState, q1: usize, q2: usize, q3: usize, kind: EntropyKind) -> Result<f64> {
    BlockReducer::new(state.n_qubits()).tmi(state, q1, q2, q3, kind)
}
