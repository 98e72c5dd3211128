//! Pure permutation-symmetric states in the Dicke basis.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use faer::c64;

use crate::combinatorics::{ln_binomial, ln_dicke_norm};
use crate::error::{Error, Result};

/// Unit-norm tolerance enforced on construction.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Largest qubit count accepted by [`embed_to_full`].
pub const MAX_FULL_QUBITS: usize = 24;

/// An `N`-qubit permutation-symmetric pure state `Σ_m a_m |m_N⟩`, where
/// `|m_N⟩` is the normalized Dicke state with `m` excitations.
#[derive(Debug, Clone, PartialEq)]
pub struct PSState {
    amplitudes: Vec<c64>,
}

impl PSState {
    /// Wraps amplitudes `a_0..a_N`, rejecting anything that is not unit norm.
    pub fn new(amplitudes: Vec<c64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::domain("amplitudes", "need at least N = 1 qubit (2 amplitudes)"));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::domain("amplitudes", format!("squared norm {norm_sqr} is not 1")));
        }
        Ok(PSState { amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<c64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::domain("amplitudes", "need at least N = 1 qubit (2 amplitudes)"));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::domain("amplitudes", "cannot normalize a zero or non-finite vector"));
        }
        let inv = 1.0 / norm;
        amplitudes.iter_mut().for_each(|a| *a *= inv);
        Ok(PSState { amplitudes })
    }

    /// No norm check. Used for propagated states whose norm drift is tracked
    /// rather than corrected.
    pub(crate) fn from_raw(amplitudes: Vec<c64>) -> Self {
        debug_assert!(amplitudes.len() >= 2);
        PSState { amplitudes }
    }

    /// The Dicke state `|m_N⟩`.
    pub fn dicke(n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n", "need at least one qubit"));
        }
        if m > n {
            return Err(Error::domain("m", format!("excitation {m} out of range 0..={n}")));
        }
        let mut amplitudes = vec![c64::new(0.0, 0.0); n + 1];
        amplitudes[m] = c64::new(1.0, 0.0);
        Ok(PSState { amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<c64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PSState) -> Result<c64> {
        if self.dim() != other.dim() {
            return Err(Error::domain("other", format!("dimension {} vs {}", other.dim(), self.dim())));
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// Columnar text form: the qubit count on the first line, then one
    /// `re im` pair per amplitude.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n_qubits());
        for a in &self.amplitudes {
            let _ = writeln!(out, "{} {}", a.re, a.im);
        }
        out
    }
}

impl fmt::Display for PSState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for PSState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("missing qubit-count header".into()))?;
        let n: usize = header
            .parse()
            .map_err(|e| Error::Parse(format!("bad header {header:?}: {e}")))?;
        let mut amplitudes = Vec::with_capacity(n + 1);
        for (idx, line) in lines.enumerate() {
            let mut parts = line.split_whitespace();
            let (re, im) = match (parts.next(), parts.next(), parts.next()) {
                (Some(re), Some(im), None) => (re, im),
                _ => return Err(Error::Parse(format!("amplitude line {idx}: expected `re im`, got {line:?}"))),
            };
            let re: f64 = re.parse().map_err(|e| Error::Parse(format!("amplitude line {idx}: {e}")))?;
            let im: f64 = im.parse().map_err(|e| Error::Parse(format!("amplitude line {idx}: {e}")))?;
            amplitudes.push(c64::new(re, im));
        }
        if amplitudes.len() != n + 1 {
            return Err(Error::Parse(format!("expected {} amplitudes, found {}", n + 1, amplitudes.len())));
        }
        PSState::new(amplitudes)
    }
}

/// Checks that `j` is a positive integer or half-integer and returns `2j`.
pub fn twice_spin(j: f64) -> Result<usize> {
    let two_j = 2.0 * j;
    if !(two_j >= 1.0) || (two_j - two_j.round()).abs() > 1e-9 || !two_j.is_finite() {
        return Err(Error::domain("j", format!("spin {j} is not a positive half-integer")));
    }
    Ok(two_j.round() as usize)
}

/// Spin coherent state `⊗^{2j} (cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩)` in the
/// Dicke basis of `N = 2j` qubits.
pub fn coherent_state(j: f64, theta: f64, phi: f64) -> Result<PSState> {
    coherent_state_qubits(twice_spin(j)?, theta, phi)
}

/// [`coherent_state`] parameterized by the qubit count.
pub fn coherent_state_qubits(n: usize, theta: f64, phi: f64) -> Result<PSState> {
    if n == 0 {
        return Err(Error::domain("n", "need at least one qubit"));
    }
    let c = (0.5 * theta).cos();
    let s = (0.5 * theta).sin();
    let mut amplitudes = vec![c64::new(0.0, 0.0); n + 1];
    if s == 0.0 {
        amplitudes[0] = c64::new(c.powi(n as i32), 0.0);
    } else if c == 0.0 {
        amplitudes[n] = c64::from_polar(s.powi(n as i32), n as f64 * phi);
    } else {
        let (lc, ls) = (c.abs().ln(), s.abs().ln());
        for (m, amp) in amplitudes.iter_mut().enumerate() {
            let ln_mag = 0.5 * ln_binomial(n as u64, m as u64)? + (n - m) as f64 * lc + m as f64 * ls;
            let mut sign = 1.0;
            if c < 0.0 && (n - m) % 2 == 1 {
                sign = -sign;
            }
            if s < 0.0 && m % 2 == 1 {
                sign = -sign;
            }
            *amp = c64::from_polar(sign * ln_mag.exp(), m as f64 * phi);
        }
    }
    PSState::normalized(amplitudes)
}

/// Embeds a Dicke-basis state into the full `2^N` computational basis.
/// Component `i` is `a_{w(i)} / c_N(w(i))`, `w` the Hamming weight.
pub fn embed_to_full(state: &PSState) -> Result<Vec<c64>> {
    let n = state.n_qubits();
    if n > MAX_FULL_QUBITS {
        return Err(Error::Capacity {
            field: "n",
            requested: n,
            limit: MAX_FULL_QUBITS,
        });
    }
    let weights: Vec<c64> = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(m, a)| *a * (-ln_dicke_norm(n as u64, m as u64).expect("m <= n")).exp())
        .collect();
    Ok((0..1usize << n).map(|i| weights[i.count_ones() as usize]).collect())
}
