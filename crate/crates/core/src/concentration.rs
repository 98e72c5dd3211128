//! Lipschitz budgets, Lévy's concentration bound on the PS amplitude sphere,
//! and Monte Carlo tail estimates to hold against it.

use std::f64::consts::{LN_2, PI};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::ensembles::montecarlo::sharded_samples;
use crate::ensembles::sampling::sample_ps_state;
use crate::error::{Error, Result};
use crate::info::{entropy_of_spectrum, BlockPartition, BlockReducer, EntropyKind};

/// Smallest sample count accepted by [`empirical_concentration`].
pub const MIN_CONCENTRATION_SAMPLES: usize = 1000;

/// Functions of a random PS state whose concentration is tested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "functional", rename_all = "snake_case")]
pub enum Functional {
    /// von Neumann entropy of a `q`-qubit block.
    VonNeumann { q: usize },
    /// Linear entropy of a `q`-qubit block.
    Linear { q: usize },
    /// TMI of blocks `q1, q2, q3`.
    Tmi { q1: usize, q2: usize, q3: usize, kind: EntropyKind },
}

impl Functional {
    fn evaluate(&self, reducer: &BlockReducer, state: &crate::state::PSState) -> Result<f64> {
        match *self {
            Functional::VonNeumann { q } => entropy_of_spectrum(&reducer.block_spectrum(state, q)?, EntropyKind::VonNeumann),
            Functional::Linear { q } => entropy_of_spectrum(&reducer.block_spectrum(state, q)?, EntropyKind::Linear),
            Functional::Tmi { q1, q2, q3, kind } => reducer.tmi(state, q1, q2, q3, kind),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match *self {
            Functional::VonNeumann { q } | Functional::Linear { q } => {
                if q == 0 || q >= n {
                    return Err(Error::domain("q", format!("need 1 <= Q <= N-1, got Q={q}, N={n}")));
                }
                Ok(())
            }
            Functional::Tmi { q1, q2, q3, kind } => {
                kind.validate()?;
                BlockPartition::new(q1, q2, q3, n).map(|_| ())
            }
        }
    }

    /// Lipschitz budget of this functional.
    pub fn lipschitz(&self) -> Result<LipschitzBudget> {
        let kind = match *self {
            Functional::VonNeumann { q } => LipschitzKind::VonNeumann { d_y: q },
            Functional::Linear { .. } => LipschitzKind::Linear,
            Functional::Tmi { q1, q2, q3, kind } => {
                let component = match kind {
                    EntropyKind::VonNeumann => TmiComponent::VonNeumann,
                    EntropyKind::Linear => TmiComponent::Linear,
                    EntropyKind::Renyi(_) => {
                        return Err(Error::domain("kind", "no Lipschitz budget is available for Rényi TMI"));
                    }
                };
                LipschitzKind::Tmi {
                    blocks: [q1, q2, q3],
                    component,
                }
            }
        };
        LipschitzBudget::new(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TmiComponent {
    VonNeumann,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LipschitzKind {
    /// von Neumann entropy of a block of `d_y` qubits, `d_y >= 2`.
    VonNeumann { d_y: usize },
    Linear,
    /// Sum of the seven region budgets of a three-block TMI.
    Tmi { blocks: [usize; 3], component: TmiComponent },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzBudget {
    pub kind: LipschitzKind,
    pub eta: f64,
}

impl LipschitzBudget {
    pub fn new(kind: LipschitzKind) -> Result<Self> {
        Ok(LipschitzBudget {
            kind,
            eta: lipschitz_bound(kind)?,
        })
    }
}

/// `√8 log₂(d_Y + 1)` for von Neumann entropy, `4` for linear entropy, and
/// the seven-region sum for TMI.
pub fn lipschitz_bound(kind: LipschitzKind) -> Result<f64> {
    match kind {
        LipschitzKind::VonNeumann { d_y } => {
            if d_y < 2 {
                return Err(Error::domain("d_y", format!("von Neumann bound needs d_Y >= 2, got {d_y}")));
            }
            Ok(8f64.sqrt() * ((d_y + 1) as f64).log2())
        }
        LipschitzKind::Linear => Ok(4.0),
        LipschitzKind::Tmi { blocks, component } => {
            let [a, b, c] = blocks;
            if a == 0 || b == 0 || c == 0 {
                return Err(Error::domain("blocks", "block sizes must be positive"));
            }
            let regions = [a, b, c, a + b, b + c, a + c, a + b + c];
            match component {
                TmiComponent::Linear => Ok(regions.len() as f64 * 4.0),
                TmiComponent::VonNeumann => {
                    if a < 2 || b < 2 || c < 2 {
                        return Err(Error::domain(
                            "blocks",
                            format!("von Neumann TMI bound needs every block to have >= 2 qubits, got {blocks:?}"),
                        ));
                    }
                    regions
                        .iter()
                        .map(|&d_y| lipschitz_bound(LipschitzKind::VonNeumann { d_y }))
                        .sum()
                }
            }
        }
    }
}

/// `2 exp(-n ε² / (9 π³ ln 2 η²))`.
pub fn levy_bound(n_real_dim: usize, epsilon: f64, eta: f64) -> Result<f64> {
    if n_real_dim < 2 {
        return Err(Error::domain("n_real_dim", format!("need n >= 2, got {n_real_dim}")));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::domain("epsilon", format!("must be >= 0, got {epsilon}")));
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::domain("eta", format!("must be positive, got {eta}")));
    }
    let c = 9.0 * PI.powi(3) * LN_2;
    Ok(2.0 * (-(n_real_dim as f64) * epsilon * epsilon / (c * eta * eta)).exp())
}

/// Real dimension of the amplitude sphere of `N`-qubit PS states.
pub fn ps_real_dimension(n: usize) -> usize {
    2 * (n + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub epsilon: f64,
    pub empirical_tail: f64,
    pub levy_bound: f64,
    pub stderr: f64,
}

impl ConcentrationRow {
    /// Empirical tail within three binomial standard errors of the bound.
    pub fn within_bound(&self) -> bool {
        self.empirical_tail <= self.levy_bound + 3.0 * self.stderr
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub functional: Functional,
    pub samples: usize,
    pub eta: f64,
    pub mean: f64,
    /// Fraction of samples with a strictly positive value.
    pub positive_fraction: f64,
    pub rows: Vec<ConcentrationRow>,
}

impl ConcentrationReport {
    pub fn all_within_bound(&self) -> bool {
        self.rows.iter().all(ConcentrationRow::within_bound)
    }

    /// CSV with header `epsilon,empirical_tail,levy_bound,stderr`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::Integrity(format!("csv write failed: {e}")))?;
        }
        w.flush().map_err(|e| Error::Integrity(format!("csv flush failed: {e}")))?;
        Ok(())
    }
}

/// Estimates `P(|f - E f| >= ε)` over random `N`-qubit PS states, with
/// `E f` the same-run sample mean, and pairs each with the Lévy bound.
pub fn empirical_concentration(
    n: usize,
    functional: Functional,
    samples: usize,
    epsilons: &[f64],
    seed: u64,
) -> Result<ConcentrationReport> {
    functional.validate(n)?;
    if samples < MIN_CONCENTRATION_SAMPLES {
        return Err(Error::domain(
            "samples",
            format!("need at least {MIN_CONCENTRATION_SAMPLES} samples, got {samples}"),
        ));
    }
    if epsilons.iter().any(|e| !(*e >= 0.0)) {
        return Err(Error::domain("epsilons", "every ε must be >= 0"));
    }
    let eta = functional.lipschitz()?.eta;
    let reducer = BlockReducer::new(n);
    let values = sharded_samples(seed, samples, |rng| functional.evaluate(&reducer, &sample_ps_state(n, rng)?))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    let positive_fraction = values.iter().filter(|v| **v > 0.0).count() as f64 / count;
    let dim = ps_real_dimension(n);
    let rows = epsilons
        .iter()
        .map(|&epsilon| {
            let tail = values.iter().filter(|v| (**v - mean).abs() >= epsilon).count() as f64 / count;
            Ok(ConcentrationRow {
                epsilon,
                empirical_tail: tail,
                levy_bound: levy_bound(dim, epsilon, eta)?,
                stderr: (tail * (1.0 - tail) / count).sqrt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConcentrationReport {
        n,
        functional,
        samples,
        eta,
        mean,
        positive_fraction,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lipschitz_values() {
        assert_eq!(lipschitz_bound(LipschitzKind::Linear).unwrap(), 4.0);
        let vn = lipschitz_bound(LipschitzKind::VonNeumann { d_y: 2 }).unwrap();
        assert!((vn - 4.482).abs() < 1e-3);
        assert!(lipschitz_bound(LipschitzKind::VonNeumann { d_y: 1 }).is_err());
        let lin_tmi = LipschitzKind::Tmi {
            blocks: [1, 1, 1],
            component: TmiComponent::Linear,
        };
        assert_eq!(lipschitz_bound(lin_tmi).unwrap(), 28.0);
        let vn_tmi = LipschitzKind::Tmi {
            blocks: [2, 3, 2],
            component: TmiComponent::VonNeumann,
        };
        let parts: f64 = [2, 3, 2, 5, 5, 4, 7]
            .iter()
            .map(|&d_y| lipschitz_bound(LipschitzKind::VonNeumann { d_y }).unwrap())
            .sum();
        assert_eq!(lipschitz_bound(vn_tmi).unwrap(), parts);
        let bad = LipschitzKind::Tmi {
            blocks: [1, 2, 2],
            component: TmiComponent::VonNeumann,
        };
        assert!(lipschitz_bound(bad).is_err());
    }

    #[test]
    fn levy_values_and_monotonicity() {
        assert_eq!(levy_bound(10, 0.0, 1.0).unwrap(), 2.0);
        let direct = 2.0 * (-402.0 * 0.01 / (9.0 * PI.powi(3) * LN_2 * 16.0)).exp();
        assert!((levy_bound(402, 0.1, 4.0).unwrap() - direct).abs() < 1e-15);
        let b1 = levy_bound(50, 0.3, 2.0).unwrap();
        let b2 = levy_bound(50, 0.6, 2.0).unwrap();
        assert!((b2 - b1.powi(4) / 8.0).abs() < 1e-14);
        let eps = [0.0, 0.1, 0.5, 1.0, 3.0];
        for w in eps.windows(2) {
            assert!(levy_bound(100, w[1], 4.0).unwrap() < levy_bound(100, w[0], 4.0).unwrap());
        }
        assert!(levy_bound(200, 1.0, 4.0).unwrap() < levy_bound(100, 1.0, 4.0).unwrap());
        assert!(levy_bound(100, 1.0, 5.0).unwrap() > levy_bound(100, 1.0, 4.0).unwrap());
        assert!(levy_bound(100, 1.0, 0.0).is_err());
        assert!(levy_bound(1, 1.0, 1.0).is_err());
    }

    #[test]
    fn empirical_tails_shrink() {
        let f = Functional::Tmi {
            q1: 1,
            q2: 1,
            q3: 1,
            kind: EntropyKind::Linear,
        };
        let report = empirical_concentration(12, f, 2000, &[0.0, 0.02, 0.05, 0.1], 7).unwrap();
        assert_eq!(report.rows[0].empirical_tail, 1.0);
        for w in report.rows.windows(2) {
            assert!(w[1].empirical_tail <= w[0].empirical_tail);
        }
        assert!(report.all_within_bound());
        assert!(empirical_concentration(12, f, 10, &[0.1], 7).is_err());
        assert!(empirical_concentration(12, Functional::Linear { q: 12 }, 2000, &[0.1], 7).is_err());
    }
}
