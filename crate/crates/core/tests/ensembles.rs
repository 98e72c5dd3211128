use psym_core::ensembles::spectral_histogram;
use psym_core::{empirical_concentration, EnsembleKind, EnsembleSpec, EntropyKind, Functional};

#[test]
fn single_qubit_spectrum_has_two_peaks() {
    let spec = EnsembleSpec::new(EnsembleKind::Ps { n: 12, q: 1 }, 10_000, 4).unwrap();
    let hist = spectral_histogram(&spec, 250).unwrap();
    assert!((hist.area() - 1.0).abs() < 1e-12);
    // Coarse-grain to 25 bins before looking for local maxima.
    let coarse: Vec<f64> = hist.densities.chunks(10).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    let peaks = (1..coarse.len() - 1)
        .filter(|&i| coarse[i] > coarse[i - 1] && coarse[i] >= coarse[i + 1] && coarse[i] > 0.1)
        .count();
    assert_eq!(peaks, 2, "{coarse:?}");
}

#[test]
fn large_ps_spectrum_is_finite_at_the_origin() {
    let spec = EnsembleSpec::new(EnsembleKind::Ps { n: 100, q: 50 }, 2500, 6).unwrap();
    let hist = spectral_histogram(&spec, 250).unwrap();
    let near_zero = hist.mean_density(0.0, 0.1);
    assert!(near_zero.is_finite() && near_zero > 0.0);
    assert!(hist.mass_above(4.0) > 0.0);
    let fit = hist.tail_fit().expect("occupied tail");
    assert!(fit.slope < 0.0);
}

#[test]
fn wishart_spectrum_follows_marchenko_pastur_bulk() {
    let spec = EnsembleSpec::new(EnsembleKind::Wishart { n1: 200, n2: 200 }, 50, 2).unwrap();
    let hist = spectral_histogram(&spec, 100).unwrap();
    let bulk = hist.mean_density(1.0, 2.0);
    // Average of the square-case law over [1, 2].
    let exact = 0.209_312;
    assert!((bulk - exact).abs() < 0.02, "{bulk} vs {exact}");
    assert!(hist.mass_above(4.3) < 1e-3);
}

#[test]
fn entropies_concentrate_within_the_levy_bound() {
    let cases = [
        (30, Functional::VonNeumann { q: 4 }),
        (30, Functional::Linear { q: 10 }),
        (20, Functional::Tmi { q1: 2, q2: 2, q3: 2, kind: EntropyKind::VonNeumann }),
    ];
    for (n, f) in cases {
        let report = empirical_concentration(n, f, 2000, &[0.01, 0.05, 0.1, 0.3], 12).unwrap();
        assert!(report.all_within_bound(), "{f:?}: {:?}", report.rows);
        let tails: Vec<f64> = report.rows.iter().map(|r| r.empirical_tail).collect();
        assert!(tails.windows(2).all(|w| w[1] <= w[0]), "{tails:?}");
    }
}

#[test]
fn single_qubit_von_neumann_concentration_is_rejected() {
    assert!(empirical_concentration(20, Functional::VonNeumann { q: 1 }, 2000, &[0.1], 0).is_err());
    let tmi = Functional::Tmi { q1: 1, q2: 2, q3: 2, kind: EntropyKind::VonNeumann };
    assert!(empirical_concentration(20, tmi, 2000, &[0.1], 0).is_err());
}
