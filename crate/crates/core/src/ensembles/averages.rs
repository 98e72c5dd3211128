//! Closed-form ensemble averages and the Monte Carlo estimates they are
//! compared against.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

pub use crate::combinatorics::comb_identity_residual;
use crate::error::{Error, Result};
use crate::info::{BlockPartition, BlockReducer, EntropyKind};
use crate::reduced::Bipartition;

use super::montecarlo::{sharded_samples, SampleStats};
use super::sampling::{sample_ps_state, sample_wishart_rdm};

/// Default coefficient of the finite-size correction in [`avg_vn_ps_approx`].
pub const DEFAULT_ALPHA: f64 = 2.0 / 3.0;

fn check_block(n: usize, q: usize) -> Result<()> {
    if q == 0 || q >= n {
        return Err(Error::domain("q", format!("need 1 <= Q <= N-1, got Q={q}, N={n}")));
    }
    Ok(())
}

/// `(N+1) / ((Q+1)(N-Q+1))`.
pub fn avg_purity_ps(n: usize, q: usize) -> Result<f64> {
    check_block(n, q)?;
    let (n, q) = (n as f64, q as f64);
    Ok((n + 1.0) / ((q + 1.0) * (n - q + 1.0)))
}

/// `Q(N-Q) / ((Q+1)(N-Q+1))`.
pub fn avg_linear_entropy_ps(n: usize, q: usize) -> Result<f64> {
    check_block(n, q)?;
    let (n, q) = (n as f64, q as f64);
    Ok(q * (n - q) / ((q + 1.0) * (n - q + 1.0)))
}

/// Dimensions used for the Wishart comparison: the full qubit spaces, or
/// the symmetric-subspace sizes `Q+1` and `N-Q+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WishartFlavor {
    Qubits,
    Dims,
}

impl WishartFlavor {
    pub fn dims(&self, n: usize, q: usize) -> (f64, f64) {
        match self {
            WishartFlavor::Qubits => (2f64.powi(q as i32), 2f64.powi((n - q) as i32)),
            WishartFlavor::Dims => ((q + 1) as f64, (n - q + 1) as f64),
        }
    }
}

/// Average linear entropy `(d1-1)(d2-1)/(d1 d2 + 1)` of the trace-normalized
/// Wishart ensemble with the dimensions selected by `flavor`.
pub fn avg_linear_entropy_wishart(n: usize, q: usize, flavor: WishartFlavor) -> Result<f64> {
    check_block(n, q)?;
    let (d1, d2) = flavor.dims(n, q);
    Ok((d1 - 1.0) * (d2 - 1.0) / (d1 * d2 + 1.0))
}

/// `log2(Q+1) - α(Q+1)/(N-Q+1)`, minus `1/(N+1)` when `half_correction` is
/// set and `Q = N/2`.
pub fn avg_vn_ps_approx(n: usize, q: usize, alpha: f64, half_correction: bool) -> Result<f64> {
    check_block(n, q)?;
    if 2 * q > n {
        return Err(Error::domain("q", format!("need Q <= N/2, got Q={q}, N={n}")));
    }
    if !alpha.is_finite() {
        return Err(Error::domain("alpha", "must be finite"));
    }
    let (nf, qf) = (n as f64, q as f64);
    let mut s = (qf + 1.0).log2() - alpha * (qf + 1.0) / (nf - qf + 1.0);
    if half_correction && 2 * q == n {
        s -= 1.0 / (nf + 1.0);
    }
    Ok(s)
}

/// [`avg_vn_ps_approx`] for any block size, folded through `Q -> N-Q`, with
/// the trivial blocks `0` and `N` giving zero.
pub fn avg_vn_ps_folded(n: usize, q: usize, alpha: f64) -> Result<f64> {
    if q > n {
        return Err(Error::domain("q", format!("block of {q} qubits exceeds N={n}")));
    }
    let q = q.min(n - q);
    if q == 0 {
        return Ok(0.0);
    }
    avg_vn_ps_approx(n, q, alpha, false)
}

/// Exact mean entropy (bits) of an `m`-dimensional subsystem of a random
/// pure state on `C^m ⊗ C^n`, `m <= n`:
/// `Σ_{k=n+1}^{mn} 1/k - (m-1)/(2n)` nats.
pub fn page_formula(m: usize, n: usize) -> Result<f64> {
    if m == 0 || n == 0 || m > n {
        return Err(Error::domain("m", format!("need 1 <= m <= n, got m={m}, n={n}")));
    }
    let mn = m.checked_mul(n).ok_or_else(|| Error::domain("m", "m*n overflows"))?;
    let tail = harmonic(mn) - harmonic(n);
    Ok((tail - (m as f64 - 1.0) / (2.0 * n as f64)) / LN_2)
}

/// Large-dimension square case of [`page_formula`] with `m = n = Q+1`:
/// `log2(Q+1) - 1/(2 ln 2)`.
pub fn page_square_approx(q: usize) -> f64 {
    ((q + 1) as f64).log2() - 0.5 / LN_2
}

/// `H_k = Σ_{i<=k} 1/i`, summed exactly for small `k` and by the asymptotic
/// series beyond.
fn harmonic(k: usize) -> f64 {
    if k < 10_000 {
        return (1..=k).rev().map(|i| 1.0 / i as f64).sum();
    }
    let x = k as f64;
    let x2 = x * x;
    x.ln() + 0.577_215_664_901_532_9 + 0.5 / x - 1.0 / (12.0 * x2) + 1.0 / (120.0 * x2 * x2)
}

/// Wishart (unrestricted random state) von Neumann entropy estimate in bits,
/// `Q - 2^{2Q-N-1}/ln 2`, folded through `Q -> N-Q`.
pub fn wishart_vn_estimate(n: usize, q: usize) -> Result<f64> {
    if q > n {
        return Err(Error::domain("q", format!("block of {q} qubits exceeds N={n}")));
    }
    let q = q.min(n - q) as i32;
    if q == 0 {
        return Ok(0.0);
    }
    Ok(q as f64 - 2f64.powi(2 * q - n as i32 - 1) / LN_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum TmiEstimate {
    /// Leading-order PS von Neumann TMI for three `q`-qubit blocks.
    PsVn { q: usize },
    /// Wishart von Neumann TMI for three `q`-qubit blocks of `n` qubits.
    WishartVn { q: usize, n: usize },
    /// Exact PS linear-entropy TMI for three single qubits of `n`.
    PsLin111 { n: usize },
    /// Large-`N` PS linear-entropy TMI for three `m`-qubit blocks.
    PsLinMmm { m: usize },
}

pub fn avg_tmi_estimate(variant: TmiEstimate) -> Result<f64> {
    match variant {
        TmiEstimate::PsVn { q } => {
            if q == 0 {
                return Err(Error::domain("q", "block size must be positive"));
            }
            let q = q as f64;
            Ok(((3.0 * q + 1.0) * (q + 1.0).powi(3) / (2.0 * q + 1.0).powi(3)).log2())
        }
        TmiEstimate::WishartVn { q, n } => {
            if q == 0 || 3 * q > n {
                return Err(Error::domain("q", format!("need 1 <= 3Q <= N, got Q={q}, N={n}")));
            }
            let x = 2f64.powi(2 * q as i32);
            Ok(-2f64.powi(2 * q as i32 - n as i32 - 1) * (x * x - 3.0 * x + 3.0) / LN_2)
        }
        TmiEstimate::PsLin111 { n } => {
            if n < 3 {
                return Err(Error::domain("n", format!("need N >= 3, got {n}")));
            }
            let n = n as f64;
            Ok((n - 3.0) * (n * n - n + 4.0) / (4.0 * n * (n - 1.0) * (n - 2.0)))
        }
        TmiEstimate::PsLinMmm { m } => {
            if m == 0 {
                return Err(Error::domain("m", "block size must be positive"));
            }
            let m = m as f64;
            Ok(6.0 * m.powi(3) / ((m + 1.0) * (2.0 * m + 1.0) * (3.0 * m + 1.0)))
        }
    }
}

fn seven_term<F: Fn(usize) -> Result<f64>>(blocks: &BlockPartition, s: F) -> Result<f64> {
    let sizes = blocks.region_sizes();
    let signs = [1.0, 1.0, 1.0, -1.0, -1.0, -1.0, 1.0];
    sizes.iter().zip(signs).try_fold(0.0, |acc, (&q, sign)| Ok(acc + sign * s(q)?))
}

/// von Neumann TMI of blocks of a random PS state, assembled from the
/// folded block-entropy approximation.
pub fn ps_vn_tmi_seven_term(blocks: &BlockPartition, alpha: f64) -> Result<f64> {
    let n = blocks.total();
    seven_term(blocks, |q| avg_vn_ps_folded(n, q, alpha))
}

/// von Neumann TMI of blocks of an unrestricted random state, assembled
/// from [`wishart_vn_estimate`]. Equals the `WishartVn` closed form for
/// three equal blocks with `6Q <= N`.
pub fn wishart_vn_tmi_seven_term(blocks: &BlockPartition) -> Result<f64> {
    let n = blocks.total();
    seven_term(blocks, |q| wishart_vn_estimate(n, q))
}

/// Least-squares `α` for `mean ≈ log2(Q+1) - α(Q+1)/(N-Q+1)` over
/// `(N, Q, mean)` points.
pub fn calibrate_alpha(points: &[(usize, usize, f64)]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::domain("points", "need at least one point"));
    }
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(n, q, mean) in points {
        check_block(n, q)?;
        let x = (q + 1) as f64 / (n - q + 1) as f64;
        sxy += x * (((q + 1) as f64).log2() - mean);
        sxx += x * x;
    }
    Ok(sxy / sxx)
}

/// Monte Carlo average of a `Q`-block entropy over the PS ensemble.
pub fn mc_ps_block_entropy(n: usize, q: usize, kind: EntropyKind, samples: usize, seed: u64) -> Result<SampleStats> {
    check_block(n, q)?;
    kind.validate()?;
    let part = Bipartition::new(n, q)?;
    let values = sharded_samples(seed, samples, |rng| {
        let state = sample_ps_state(n, rng)?;
        crate::info::entropy_of_spectrum(&part.spectrum(&state)?, kind)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok(SampleStats::from_slice(&values))
}

/// Monte Carlo average of the PS-ensemble purity of `Q` qubits.
pub fn mc_ps_purity(n: usize, q: usize, samples: usize, seed: u64) -> Result<SampleStats> {
    check_block(n, q)?;
    let part = Bipartition::new(n, q)?;
    let values = sharded_samples(seed, samples, |rng| part.purity(&sample_ps_state(n, rng)?))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    Ok(SampleStats::from_slice(&values))
}

/// Monte Carlo average of the Wishart-ensemble linear entropy.
pub fn mc_wishart_linear_entropy(n1: usize, n2: usize, samples: usize, seed: u64) -> Result<SampleStats> {
    let values = sharded_samples(seed, samples, |rng| Ok(1.0 - sample_wishart_rdm(n1, n2, rng)?.purity()))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    Ok(SampleStats::from_slice(&values))
}

/// Per-sample TMI values over the PS ensemble, in sample order.
pub fn ps_tmi_samples(blocks: &BlockPartition, n: usize, kind: EntropyKind, samples: usize, seed: u64) -> Result<Vec<f64>> {
    kind.validate()?;
    if blocks.total() > n {
        return Err(Error::domain("blocks", format!("blocks cover {} qubits, N={n}", blocks.total())));
    }
    let reducer = BlockReducer::new(n);
    let [q1, q2, q3] = blocks.sizes();
    sharded_samples(seed, samples, |rng| reducer.tmi(&sample_ps_state(n, rng)?, q1, q2, q3, kind))
        .into_iter()
        .collect()
}

/// One line of an analytic-versus-Monte-Carlo comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Q")]
    pub q: usize,
    pub quantity: String,
    pub analytic: f64,
    /// Empty when no samples were drawn.
    pub montecarlo: Option<f64>,
    pub stderr: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn purity_and_linear_entropy() {
        assert!(close(avg_purity_ps(12, 6).unwrap(), 13.0 / 49.0, 1e-15));
        assert!(close(avg_purity_ps(12, 2).unwrap(), 13.0 / 33.0, 1e-15));
        for q in 1..12 {
            assert_eq!(avg_purity_ps(12, q).unwrap(), avg_purity_ps(12, 12 - q).unwrap());
            let sum = avg_purity_ps(12, q).unwrap() + avg_linear_entropy_ps(12, q).unwrap();
            assert!(close(sum, 1.0, 1e-14));
        }
        assert!(avg_purity_ps(5, 0).is_err());
        assert!(avg_purity_ps(5, 5).is_err());
    }

    #[test]
    fn wishart_linear_entropy() {
        assert!(close(avg_linear_entropy_wishart(2, 1, WishartFlavor::Qubits).unwrap(), 0.2, 1e-15));
        let dims = avg_linear_entropy_wishart(12, 2, WishartFlavor::Dims).unwrap();
        assert!(close(dims, 20.0 / 34.0, 1e-15));
        assert!(dims < 20.0 / 33.0);
        for n in 2..200 {
            let ps = avg_linear_entropy_ps(n, 1).unwrap();
            let w = avg_linear_entropy_wishart(n, 1, WishartFlavor::Dims).unwrap();
            assert!(close(ps, 0.5 * (1.0 - 1.0 / n as f64), 1e-14));
            assert!(close(w, 0.5 * (1.0 - 3.0 / (2 * n + 1) as f64), 1e-14));
            assert!(w < ps, "N={n}");
        }
    }

    #[test]
    fn vn_approximation() {
        let v = avg_vn_ps_approx(100, 50, DEFAULT_ALPHA, true).unwrap();
        let expected = 51f64.log2() - 2.0 / 3.0 - 1.0 / 101.0;
        assert!(close(v, expected, 1e-14));
        let no_corr = avg_vn_ps_approx(100, 50, DEFAULT_ALPHA, false).unwrap();
        assert!(close(no_corr - v, 1.0 / 101.0, 1e-15));
        // correction applies only at half filling
        assert_eq!(
            avg_vn_ps_approx(100, 20, DEFAULT_ALPHA, true).unwrap(),
            avg_vn_ps_approx(100, 20, DEFAULT_ALPHA, false).unwrap()
        );
        assert!(avg_vn_ps_approx(10, 6, DEFAULT_ALPHA, false).is_err());
        assert_eq!(avg_vn_ps_folded(10, 10, DEFAULT_ALPHA).unwrap(), 0.0);
        assert_eq!(
            avg_vn_ps_folded(10, 7, DEFAULT_ALPHA).unwrap(),
            avg_vn_ps_folded(10, 3, DEFAULT_ALPHA).unwrap()
        );
    }

    #[test]
    fn page_values() {
        // m = 1: pure state, zero entropy
        assert!(close(page_formula(1, 7).unwrap(), 0.0, 1e-15));
        // m = n = 2: 1/3 + 1/4 - 1/4 nats
        assert!(close(page_formula(2, 2).unwrap(), (1.0 / 3.0) / LN_2, 1e-15));
        assert!(close(0.5 / LN_2, 0.7213475, 1e-7));
        let exact = page_formula(2000, 2000).unwrap();
        assert!(close(exact, page_square_approx(1999), 1e-6));
        assert!(page_formula(3, 2).is_err());
    }

    #[test]
    fn harmonic_series_switch_is_smooth() {
        let exact: f64 = (1..=10_000usize).rev().map(|i| 1.0 / i as f64).sum();
        assert!(close(harmonic(10_000), exact, 1e-13));
    }

    #[test]
    fn tmi_closed_forms() {
        assert!(close(avg_tmi_estimate(TmiEstimate::PsLinMmm { m: 1 }).unwrap(), 0.25, 1e-15));
        let lin = avg_tmi_estimate(TmiEstimate::PsLin111 { n: 12 }).unwrap();
        assert!(close(lin, 9.0 * 136.0 / (4.0 * 12.0 * 11.0 * 10.0), 1e-15));
        assert!(close(lin, 0.23182, 1e-5));
        for q in 1..40 {
            assert!(avg_tmi_estimate(TmiEstimate::PsVn { q }).unwrap() > 0.0);
            for n in 3 * q..3 * q + 10 {
                assert!(avg_tmi_estimate(TmiEstimate::WishartVn { q, n }).unwrap() < 0.0);
            }
        }
        assert!(avg_tmi_estimate(TmiEstimate::WishartVn { q: 2, n: 5 }).is_err());
    }

    #[test]
    fn seven_term_estimates_reduce_to_closed_forms() {
        for q in 1..4 {
            let blocks = BlockPartition::new(q, q, q, 6 * q + 2).unwrap();
            let seven = wishart_vn_tmi_seven_term(&blocks).unwrap();
            let closed = avg_tmi_estimate(TmiEstimate::WishartVn { q, n: 6 * q + 2 }).unwrap();
            assert!(close(seven, closed, 1e-12), "q={q}");
        }
        // with α = 0 and no folding, the PS estimate is the leading-log form
        let blocks = BlockPartition::new(2, 2, 2, 20).unwrap();
        let lead = ps_vn_tmi_seven_term(&blocks, 0.0).unwrap();
        assert!(close(lead, avg_tmi_estimate(TmiEstimate::PsVn { q: 2 }).unwrap(), 1e-12));
    }

    #[test]
    fn alpha_calibration_recovers_exact_model() {
        let pts: Vec<(usize, usize, f64)> = [(20, 3), (40, 10), (80, 40)]
            .iter()
            .map(|&(n, q)| (n, q, avg_vn_ps_approx(n, q, 0.61, false).unwrap()))
            .collect();
        assert!(close(calibrate_alpha(&pts).unwrap(), 0.61, 1e-12));
    }

    #[test]
    fn small_monte_carlo_matches_purity() {
        let stats = mc_ps_purity(8, 3, 4000, 11).unwrap();
        assert!(stats.z_score(avg_purity_ps(8, 3).unwrap()) < 4.0);
        let w = mc_wishart_linear_entropy(2, 2, 4000, 3).unwrap();
        assert!(w.z_score(0.2) < 4.0);
    }
}
