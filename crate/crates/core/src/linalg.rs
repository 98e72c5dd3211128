//! Thin layer over `faer` for the handful of dense kernels used here.

use faer::linalg::matmul::matmul;
use faer::{c64, Accum, Mat, MatRef, Par, Side};

use crate::error::{Error, Result};

/// Eigenvalues of a Hermitian matrix in nondecreasing order.
///
/// Orders 1 and 2 are solved in closed form; the reduced states of one or two
/// Dicke levels dominate the time-series workloads.
pub fn hermitian_eigenvalues(m: MatRef<'_, c64>) -> Result<Vec<f64>> {
    let d = m.nrows();
    if d != m.ncols() {
        return Err(Error::domain("matrix", format!("{}x{} is not square", d, m.ncols())));
    }
    match d {
        0 => Ok(Vec::new()),
        1 => Ok(vec![m[(0, 0)].re]),
        2 => {
            let a = m[(0, 0)].re;
            let b = m[(1, 1)].re;
            let off = m[(1, 0)];
            let mean = 0.5 * (a + b);
            let half = 0.5 * (a - b);
            let r = (half * half + off.norm_sqr()).sqrt();
            Ok(vec![mean - r, mean + r])
        }
        _ => m
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Integrity(format!("Hermitian eigensolver failed: {e:?}"))),
    }
}

/// `A A†`, made exactly Hermitian.
pub fn gram(a: MatRef<'_, c64>) -> Mat<c64> {
    let r = a.nrows();
    let mut out = Mat::<c64>::zeros(r, r);
    matmul(out.as_mut(), Accum::Replace, a, a.adjoint(), c64::new(1.0, 0.0), Par::Seq);
    hermitize(&mut out);
    out
}

/// `A† A`, made exactly Hermitian.
pub fn gram_adjoint(a: MatRef<'_, c64>) -> Mat<c64> {
    let c = a.ncols();
    let mut out = Mat::<c64>::zeros(c, c);
    matmul(out.as_mut(), Accum::Replace, a.adjoint(), a, c64::new(1.0, 0.0), Par::Seq);
    hermitize(&mut out);
    out
}

/// Replaces `M` by `(M + M†)/2`.
pub fn hermitize(m: &mut Mat<c64>) {
    let d = m.nrows();
    for i in 0..d {
        m[(i, i)] = c64::new(m[(i, i)].re, 0.0);
        for j in 0..i {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
}

/// Largest entrywise deviation `|M_ij - conj(M_ji)|`.
pub fn hermiticity_defect(m: MatRef<'_, c64>) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..d {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: MatRef<'_, c64>) -> c64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// `Σ_ij A_ij B_ji = Tr(A B)` without forming the product.
pub fn trace_of_product(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> c64 {
    let mut acc = c64::new(0.0, 0.0);
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Largest entrywise `|M - I|`.
pub fn identity_defect(m: MatRef<'_, c64>) -> f64 {
    let mut worst = 0.0_f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let target = if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) };
            worst = worst.max((m[(i, j)] - target).norm());
        }
    }
    worst
}

/// Threaded kernels only pay off for larger matrices.
pub fn par_for(dim: usize) -> Par {
    if dim >= 192 {
        Par::rayon(0)
    } else {
        Par::Seq
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_two_by_two_matches_solver() {
        let m = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c64::new(0.7, 0.0),
            (1, 1) => c64::new(0.3, 0.0),
            (0, 1) => c64::new(0.1, -0.2),
            _ => c64::new(0.1, 0.2),
        });
        let closed = hermitian_eigenvalues(m.as_ref()).unwrap();
        let solver = m.self_adjoint_eigenvalues(Side::Lower).unwrap();
        for (a, b) in closed.iter().zip(&solver) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn gram_is_hermitian_with_trace_of_frobenius_norm() {
        let a = Mat::from_fn(3, 5, |i, j| c64::new((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.05));
        let g = gram(a.as_ref());
        assert_eq!(hermiticity_defect(g.as_ref()), 0.0);
        let fro: f64 = (0..3).flat_map(|i| (0..5).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].norm_sqr()).sum();
        assert!((trace(g.as_ref()).re - fro).abs() < 1e-14);
        let h = gram_adjoint(a.as_ref());
        assert!((trace(h.as_ref()).re - fro).abs() < 1e-14);
    }
}
