//! Cross-checks against independent reference computations.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use psym_core::combinatorics::{embed_coeff, ln_binomial, ln_factorial};
use psym_core::ensembles::spectrum::marchenko_pastur_density;
use psym_core::ensembles::{avg_vn_ps_folded, sample_ps_state, sample_wishart_rdm, sharded_samples, stream_rng, SampleStats};
use psym_core::info::{entropy_of_spectrum, mutual_information};
use psym_core::state::embed_to_full;
use psym_core::{c64, qubits, BlockReducer, EntropyKind, KickedTopParams, SpinSystem};

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

fn binomial(n: u64, k: u64) -> BigUint {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Natural log of an arbitrarily large integer.
fn big_ln(x: &BigUint) -> f64 {
    let shift = x.bits().saturating_sub(900);
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * LN_2
}

#[test]
fn ln_factorial_matches_big_integers() {
    for n in [0u64, 1, 2, 10, 57, 170, 171, 1000, 5000, 16383, 16384, 16385, 20000] {
        let exact = big_ln(&factorial(n));
        let got = ln_factorial(n);
        let tol = 1e-13 * exact.abs().max(1.0);
        assert!((got - exact).abs() <= tol, "ln {n}! = {got}, exact {exact}");
    }
}

#[test]
fn ln_binomial_matches_big_integers() {
    for (n, k) in [(12, 5), (40, 20), (200, 3), (200, 100), (1000, 500), (3000, 1234)] {
        let exact = big_ln(&binomial(n, k));
        let got = ln_binomial(n, k).unwrap();
        assert!((got - exact).abs() <= 1e-12 * exact.max(1.0), "C({n},{k}): {got} vs {exact}");
    }
}

#[test]
fn embedding_weight_matches_factorials() {
    for (n, q, m, k) in [(12u64, 5, 3, 4), (12, 1, 0, 0), (30, 10, 10, 20), (100, 50, 25, 25), (200, 40, 7, 150)] {
        let num = binomial(q, m) * binomial(n - q, k);
        let den = binomial(n, m + k);
        let exact = ((big_ln(&num) - big_ln(&den)) * 0.5).exp();
        let got = embed_coeff(n, q, m, k).unwrap();
        assert!((got - exact).abs() <= 1e-12 * exact, "({n},{q},{m},{k}): {got} vs {exact}");
    }
}

#[test]
fn dicke_entropies_match_brute_force_partial_traces() {
    for n in 3..=9usize {
        let state = sample_ps_state(n, &mut stream_rng(41, n as u64)).unwrap();
        let full = embed_to_full(&state).unwrap();
        let reducer = BlockReducer::new(n);
        for q in 1..n {
            let keep: Vec<usize> = (0..q).collect();
            let brute = qubits::partial_trace(&full, n, &keep).unwrap();
            for kind in [EntropyKind::VonNeumann, EntropyKind::Linear, EntropyKind::Renyi(2.0)] {
                let a = reducer.block_entropy(&state, q, kind).unwrap();
                let b = entropy_of_spectrum(&brute.eigenvalues().unwrap(), kind).unwrap();
                assert!((a - b).abs() < 1e-9, "N={n} Q={q} {kind:?}: {a} vs {b}");
            }
        }
        if n >= 3 {
            let (q1, q2, q3) = (1, (n - 1) / 2, n - 1 - (n - 1) / 2);
            let a = reducer.tmi(&state, q1, q2, q3, EntropyKind::VonNeumann).unwrap();
            let b = qubits::tmi(&full, n, q1, q2, q3, EntropyKind::VonNeumann).unwrap();
            assert!((a - b).abs() < 1e-9, "N={n} TMI: {a} vs {b}");
        }
    }
}

/// `exp(a)` by scaling and squaring of a truncated Taylor series.
fn expm(a: &[Vec<c64>]) -> Vec<Vec<c64>> {
    let d = a.len();
    let norm = a.iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let s = (norm / 0.25).log2().ceil().max(0.0) as i32;
    let scale = 0.5f64.powi(s);
    let a: Vec<Vec<c64>> = a.iter().map(|r| r.iter().map(|z| z * scale).collect()).collect();
    let mul = |x: &[Vec<c64>], y: &[Vec<c64>]| -> Vec<Vec<c64>> {
        (0..d)
            .map(|i| (0..d).map(|j| (0..d).map(|k| x[i][k] * y[k][j]).sum()).collect())
            .collect()
    };
    let identity: Vec<Vec<c64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) }).collect())
        .collect();
    let mut result = identity.clone();
    let mut term = identity;
    for k in 1..=24 {
        term = mul(&term, &a);
        term.iter_mut().flatten().for_each(|z| *z /= k as f64);
        for i in 0..d {
            for j in 0..d {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        result = mul(&result, &result);
    }
    result
}

#[test]
fn floquet_trace_matches_expm_oracle() {
    let (j, k, p) = (10.0, 6.0, FRAC_PI_2);
    let sys = SpinSystem::new(KickedTopParams::new(j, k, p).unwrap()).unwrap();
    let d = sys.dim();
    let jy = sys.jy();
    let minus_ip_jy: Vec<Vec<c64>> = (0..d)
        .map(|r| (0..d).map(|c| c64::new(0.0, -p) * jy[(r, c)]).collect())
        .collect();
    let rot = expm(&minus_ip_jy);
    let jz = sys.jz();
    let twist = |r: usize| c64::from_polar(1.0, -k * jz[r] * jz[r] / (2.0 * j));
    let u = sys.floquet();
    let mut trace_oracle = c64::new(0.0, 0.0);
    let mut worst = 0.0f64;
    for r in 0..d {
        trace_oracle += twist(r) * rot[r][r];
        for c in 0..d {
            worst = worst.max((twist(r) * rot[r][c] - u[(r, c)]).norm());
        }
    }
    let trace: c64 = (0..d).map(|r| u[(r, r)]).sum();
    assert!((trace - trace_oracle).norm() < 1e-8, "Tr U = {trace}, oracle {trace_oracle}");
    assert!(worst < 1e-8, "entrywise error {worst}");
}

#[test]
fn marchenko_pastur_integrates_to_one() {
    // x = 4 sin²θ removes the inverse square-root singularity at the origin.
    let steps = 20_000;
    let h = FRAC_PI_2 / steps as f64;
    let (mut mass, mut mean, mut second) = (0.0, 0.0, 0.0);
    for i in 0..steps {
        let t = (i as f64 + 0.5) * h;
        let x = 4.0 * t.sin().powi(2);
        let w = marchenko_pastur_density(x) * 8.0 * t.sin() * t.cos() * h;
        mass += w;
        mean += x * w;
        second += x * x * w;
    }
    assert!((mass - 1.0).abs() < 1e-8, "mass {mass}");
    assert!((mean - 1.0).abs() < 1e-8, "mean {mean}");
    assert!((second - 2.0).abs() < 1e-8, "second moment {second}");
    assert_eq!(marchenko_pastur_density(4.5), 0.0);
    assert!((marchenko_pastur_density(1.0) - 3f64.sqrt() / (2.0 * PI)).abs() < 1e-14);
}

#[test]
fn two_by_two_wishart_matches_exact_density() {
    // The smaller eigenvalue of a trace-one 2x2 Wishart matrix with two
    // columns has CDF 1 - (1 - 2λ)³ on [0, 1/2].
    let samples = 20_000;
    let bins = 10;
    let mins = sharded_samples(5, samples, |rng| {
        let ev = sample_wishart_rdm(2, 2, rng).unwrap().eigenvalues().unwrap();
        ev[0].min(ev[1])
    });
    let mut counts = vec![0usize; bins];
    for l in mins {
        let u = 1.0 - (1.0 - 2.0 * l).powi(3);
        counts[((u * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let expected = samples as f64 / bins as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 99.9% quantile of chi-squared with 9 degrees of freedom.
    assert!(chi2 < 27.88, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn fourth_moment_of_ps_amplitudes() {
    let n = 12;
    let values = sharded_samples(8, 100_000, |rng| {
        sample_ps_state(n, rng).unwrap().amplitudes().iter().map(|a| a.norm_sqr().powi(2)).sum::<f64>()
    });
    let stats = SampleStats::from_slice(&values);
    let exact = 2.0 / (n as f64 + 2.0);
    assert!((stats.mean / exact - 1.0).abs() < 0.01, "{} vs {exact}", stats.mean);
}

#[test]
fn single_qubit_mutual_information_follows_the_entropy_fit() {
    let n = 12;
    let values = sharded_samples(9, 400_000, |rng| {
        mutual_information(&sample_ps_state(n, rng).unwrap(), 1, 1, EntropyKind::VonNeumann).unwrap()
    });
    // The true gap is close to 0.05, so the sampling error has to be small.
    let mean = SampleStats::from_slice(&values).mean;
    let alpha = 2.0 / 3.0;
    let fit = 2.0 * avg_vn_ps_folded(n, 1, alpha).unwrap() - avg_vn_ps_folded(n, 2, alpha).unwrap();
    assert!(mean > 0.0);
    assert!((mean - fit).abs() < 0.05, "MC {mean} vs fit {fit}");
}
