//! Brute-force reference routines on the full `2^N` computational space.
//!
//! These are exponential in `N` and exist to cross-check the Dicke-basis
//! machinery and to sample unrestricted random states of a few qubits.
//! Qubit `b` is bit `b` of the computational index.

use faer::{c64, Mat};
use rand::Rng;

use crate::combinatorics::ln_dicke_norm;
use crate::ensembles::sampling::complex_gaussian_vector;
use crate::error::{Error, Result};
use crate::info::{entropy_of_spectrum, BlockPartition, EntropyKind, RegionEntropies};
use crate::linalg;
use crate::reduced::DensityMatrix;
use crate::state::MAX_FULL_QUBITS;

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("n", "need at least one qubit"));
    }
    if n > MAX_FULL_QUBITS {
        return Err(Error::Capacity {
            field: "n",
            requested: n,
            limit: MAX_FULL_QUBITS,
        });
    }
    Ok(())
}

/// Haar-random pure state of `n` qubits with no symmetry constraint.
pub fn haar_qubit_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<c64>> {
    check_qubits(n)?;
    let mut v = complex_gaussian_vector(1 << n, rng);
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
    Ok(v)
}

/// Reduced state of the qubits in `keep` (in that order, `keep[0]` as the
/// least significant bit of the reduced index).
pub fn partial_trace(psi: &[c64], n: usize, keep: &[usize]) -> Result<DensityMatrix> {
    check_qubits(n)?;
    if psi.len() != 1 << n {
        return Err(Error::domain("psi", format!("length {} is not 2^{n}", psi.len())));
    }
    let mut mask = 0usize;
    for &b in keep {
        if b >= n || mask & (1 << b) != 0 {
            return Err(Error::domain("keep", format!("qubit list {keep:?} invalid for {n} qubits")));
        }
        mask |= 1 << b;
    }
    let rest: Vec<usize> = (0..n).filter(|b| mask & (1 << b) == 0).collect();
    let mut m = Mat::<c64>::zeros(1 << keep.len(), 1 << rest.len());
    for (i, &amp) in psi.iter().enumerate() {
        let a = keep.iter().enumerate().fold(0, |acc, (pos, &b)| acc | (((i >> b) & 1) << pos));
        let r = rest.iter().enumerate().fold(0, |acc, (pos, &b)| acc | (((i >> b) & 1) << pos));
        m[(a, r)] = amp;
    }
    Ok(DensityMatrix::from_hermitian_unchecked(linalg::gram(m.as_ref())))
}

/// Entropies of `A, B, C, AB, BC, AC, ABC` for contiguous blocks
/// `A = [0, q1)`, `B = [q1, q1+q2)`, `C = [q1+q2, q1+q2+q3)`.
pub fn region_entropies(psi: &[c64], n: usize, blocks: &BlockPartition, kind: EntropyKind) -> Result<RegionEntropies> {
    if blocks.total() != n {
        return Err(Error::domain("blocks", format!("partition of {} qubits used on {n}", blocks.total())));
    }
    let [q1, q2, q3] = blocks.sizes();
    let a: Vec<usize> = (0..q1).collect();
    let b: Vec<usize> = (q1..q1 + q2).collect();
    let c: Vec<usize> = (q1 + q2..q1 + q2 + q3).collect();
    let join = |x: &[usize], y: &[usize]| -> Vec<usize> { x.iter().chain(y).copied().collect() };
    let regions = [
        a.clone(),
        b.clone(),
        c.clone(),
        join(&a, &b),
        join(&b, &c),
        join(&a, &c),
        join(&join(&a, &b), &c),
    ];
    let mut out = [0.0; 7];
    for (slot, region) in regions.iter().enumerate() {
        let rho = partial_trace(psi, n, region)?;
        out[slot] = entropy_of_spectrum(&rho.eigenvalues()?, kind)?;
    }
    Ok(RegionEntropies(out))
}

/// Tripartite information of contiguous blocks of a full-space state.
pub fn tmi(psi: &[c64], n: usize, q1: usize, q2: usize, q3: usize, kind: EntropyKind) -> Result<f64> {
    let blocks = BlockPartition::new(q1, q2, q3, n)?;
    Ok(region_entropies(psi, n, &blocks, kind)?.tmi())
}

/// The `2^q x (q+1)` isometry sending `|m_q⟩` to its computational-basis
/// expansion.
pub fn dicke_isometry(q: usize) -> Result<Mat<c64>> {
    check_qubits(q)?;
    let weights: Vec<f64> = (0..=q)
        .map(|m| (-ln_dicke_norm(q as u64, m as u64).expect("m <= q")).exp())
        .collect();
    Ok(Mat::from_fn(1 << q, q + 1, |i, m| {
        if i.count_ones() as usize == m {
            c64::new(weights[m], 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bell_pair_marginal_is_maximally_mixed() {
        let h = 0.5f64.sqrt();
        let psi = [c64::new(h, 0.0), c64::new(0.0, 0.0), c64::new(0.0, 0.0), c64::new(h, 0.0)];
        let rho = partial_trace(&psi, 2, &[1]).unwrap();
        assert!((rho.get(0, 0).re - 0.5).abs() < 1e-15);
        assert!(rho.get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn keep_order_permutes_reduced_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = haar_qubit_state(4, &mut rng).unwrap();
        let r01 = partial_trace(&psi, 4, &[0, 1]).unwrap();
        let r10 = partial_trace(&psi, 4, &[1, 0]).unwrap();
        let swap = |i: usize| ((i & 1) << 1) | (i >> 1);
        for i in 0..4 {
            for j in 0..4 {
                assert!((r01.get(i, j) - r10.get(swap(i), swap(j))).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn invalid_arguments() {
        let psi = vec![c64::new(1.0, 0.0); 8];
        assert!(partial_trace(&psi, 3, &[0, 0]).is_err());
        assert!(partial_trace(&psi, 3, &[3]).is_err());
        assert!(partial_trace(&psi[..4], 3, &[0]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(haar_qubit_state(30, &mut rng), Err(Error::Capacity { .. })));
    }

    #[test]
    fn dicke_isometry_columns_are_orthonormal() {
        let e = dicke_isometry(5).unwrap();
        let g = linalg::gram_adjoint(e.as_ref());
        assert!(linalg::identity_defect(g.as_ref()) < 1e-14);
    }
}
