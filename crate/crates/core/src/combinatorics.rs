//! Binomial weights of the Dicke basis.
//!
//! Everything is carried in log-space: `ln C(n, k)` comes from a table of
//! `ln n!` accumulated with compensated summation, so binomials of a few
//! thousand qubits stay exact to a handful of ulps even though the binomial
//! itself overflows `f64` long before that.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const LN_FACT_TABLE: usize = 1 << 14;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(LN_FACT_TABLE + 1);
        table.push(0.0);
        // Neumaier summation of ln 1 + ln 2 + ...
        let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
        for i in 1..=LN_FACT_TABLE {
            let term = (i as f64).ln();
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
            table.push(sum + comp);
        }
        table
    })
}

/// `ln n!`, tabulated below 2^14 and from the Stirling series above.
pub fn ln_factorial(n: u64) -> f64 {
    let table = ln_fact_table();
    if (n as usize) < table.len() {
        return table[n as usize];
    }
    let x = n as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// `ln C(n, k)`; `k > n` is a domain error.
pub fn ln_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::domain("k", format!("binomial index {k} exceeds {n}")));
    }
    Ok(ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k))
}

/// Natural log of the Dicke normalization `c_N(m) = sqrt(C(N, m))`.
pub fn ln_dicke_norm(n: u64, m: u64) -> Result<f64> {
    if m > n {
        return Err(Error::domain("m", format!("excitation {m} out of range 0..={n}")));
    }
    Ok(0.5 * ln_binomial(n, m)?)
}

/// Dicke normalization `c_N(m) = sqrt(C(N, m))`.
///
/// Finite whenever `C(N, m)` fits below `f64::MAX^2`; beyond that (around
/// `N ≈ 2000` at half filling) the result is `+inf` and callers should use
/// [`ln_dicke_norm`].
pub fn dicke_norm(n: u64, m: u64) -> Result<f64> {
    Ok(ln_dicke_norm(n, m)?.exp())
}

fn check_embed_indices(n: u64, q: u64, m: u64, k: u64) -> Result<()> {
    if q >= n {
        return Err(Error::domain("q", format!("block size {q} must be below {n}")));
    }
    if m > q {
        return Err(Error::domain("m", format!("row index {m} out of range 0..={q}")));
    }
    if k > n - q {
        return Err(Error::domain("n", format!("column index {k} out of range 0..={}", n - q)));
    }
    Ok(())
}

/// `ln C_{mn}` with `C_{mn} = c_Q(m) c_{N-Q}(n) / c_N(m+n)`.
pub fn ln_embed_coeff(n: u64, q: u64, m: u64, k: u64) -> Result<f64> {
    check_embed_indices(n, q, m, k)?;
    Ok(0.5 * (ln_binomial(q, m)? + ln_binomial(n - q, k)? - ln_binomial(n, m + k)?))
}

/// Weight `C_{mn}` tying the amplitude `a_{m+n}` to the block-product entry
/// `A_{mn}`. Always in `(0, 1]`.
pub fn embed_coeff(n: u64, q: u64, m: u64, k: u64) -> Result<f64> {
    Ok(ln_embed_coeff(n, q, m, k)?.exp())
}

/// The full `(Q+1) x (N-Q+1)` table of embedding weights, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    n: usize,
    q: usize,
    ln: Vec<f64>,
    values: Vec<f64>,
}

impl CoeffTable {
    /// Fills the table with the single-step recursions
    /// `C_{k,l} -> C_{k+1,l}` and `C_{k,l} -> C_{k,l+1}` seeded at `C_00 = 1`.
    ///
    /// Row 0 is walked along `l`; every later row is derived entry-wise from
    /// the row above, so each value has exactly one predecessor. The walk runs
    /// on logarithms so that entries which underflow `f64` do not poison their
    /// descendants.
    pub fn by_recursion(n: usize, q: usize) -> Result<Self> {
        if q >= n {
            return Err(Error::domain("q", format!("block size {q} must be below {n}")));
        }
        let rows = q + 1;
        let cols = n - q + 1;
        let nf = n as f64;
        let qf = q as f64;
        let mut ln = vec![0.0; rows * cols];
        // C_{0,l+1} = sqrt((N-Q-l)/(N-l)) C_{0,l}; the (k+l+1)/(l+1) factor is 1 on row 0.
        for l in 0..cols - 1 {
            let lf = l as f64;
            ln[l + 1] = ln[l] + 0.5 * ((nf - qf - lf) / (nf - lf)).ln();
        }
        for k in 0..rows - 1 {
            let kf = k as f64;
            for l in 0..cols {
                let lf = l as f64;
                let ratio = ((qf - kf) / (nf - kf - lf)) * ((kf + lf + 1.0) / (kf + 1.0));
                ln[(k + 1) * cols + l] = ln[k * cols + l] + 0.5 * ratio.ln();
            }
        }
        let values = ln.iter().map(|v| v.exp()).collect();
        Ok(CoeffTable { n, q, ln, values })
    }

    /// Table filled entry-by-entry from the log-factorial closed form.
    pub fn direct(n: usize, q: usize) -> Result<Self> {
        if q >= n {
            return Err(Error::domain("q", format!("block size {q} must be below {n}")));
        }
        let rows = q + 1;
        let cols = n - q + 1;
        let mut ln = Vec::with_capacity(rows * cols);
        for m in 0..rows {
            for k in 0..cols {
                ln.push(ln_embed_coeff(n as u64, q as u64, m as u64, k as u64)?);
            }
        }
        let values = ln.iter().map(|v| v.exp()).collect();
        Ok(CoeffTable { n, q, ln, values })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn block(&self) -> usize {
        self.q
    }

    pub fn rows(&self) -> usize {
        self.q + 1
    }

    pub fn cols(&self) -> usize {
        self.n - self.q + 1
    }

    #[inline]
    pub fn get(&self, m: usize, k: usize) -> f64 {
        self.values[m * self.cols() + k]
    }

    #[inline]
    pub fn ln_get(&self, m: usize, k: usize) -> f64 {
        self.ln[m * self.cols() + k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Relative residual of the combinatorial identity
/// `Σ_{k,j,m} C(Q,k) C(Q,j) C(N-Q,m)^2 / (C(N,k+m) C(N,j+m)) = (N+1)^2 / (N-Q+1)`
/// behind the exact average purity.
///
/// The triple sum factors as `Σ_m (Σ_k C(Q,k) C(N-Q,m) / C(N,k+m))^2`; every
/// ratio is formed in log-space.
pub fn comb_identity_residual(n: usize, q: usize) -> Result<f64> {
    if q == 0 || q >= n {
        return Err(Error::domain("q", format!("need 1 <= Q <= N-1, got Q={q}, N={n}")));
    }
    if n > 60 {
        return Err(Error::domain("n", format!("identity check limited to N <= 60, got {n}")));
    }
    let (nu, qu) = (n as u64, q as u64);
    let mut total = 0.0;
    for m in 0..=(nu - qu) {
        let mut inner = 0.0;
        for k in 0..=qu {
            let ln_term = ln_binomial(qu, k)? + ln_binomial(nu - qu, m)? - ln_binomial(nu, k + m)?;
            inner += ln_term.exp();
        }
        total += inner * inner;
    }
    let expected = ((n + 1) * (n + 1)) as f64 / (n - q + 1) as f64;
    Ok(((total - expected) / expected).abs())
}
