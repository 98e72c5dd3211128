use std::f64::consts::FRAC_PI_2;

use psym_core::ensembles::{sample_ps_state, sharded_samples, stream_rng};
use psym_core::kicked_top::{classical_step, otoc_series, time_averaged_tmi_grid, timeseries_measures};
use psym_core::state::coherent_state;
use psym_core::{ClassicalPoint, EntropyKind, KickedTopParams, SpinSystem};

fn top(j: f64, k: f64) -> SpinSystem {
    SpinSystem::new(KickedTopParams::standard(j, k).unwrap()).unwrap()
}

#[test]
fn one_kick_follows_the_classical_map() {
    let j = 200.0;
    let sys = top(j, 6.0);
    let tol = 5.0 / j.sqrt();
    for (theta, phi) in [(2.25, 2.0), (0.7, 0.3), (1.3, 4.0), (2.9, 5.5), (FRAC_PI_2, 0.0)] {
        let start = coherent_state(j, theta, phi).unwrap();
        let quantum = sys.spin_expectation(&sys.step(&start).unwrap()).unwrap();
        let classical = classical_step(ClassicalPoint::from_angles(theta, phi), 6.0, FRAC_PI_2);
        for (qv, cv) in quantum.iter().zip([classical.x, classical.y, classical.z]) {
            assert!((qv - cv).abs() < tol, "({theta},{phi}): quantum {quantum:?} vs classical {classical:?}");
        }
    }
}

#[test]
fn correspondence_improves_with_spin() {
    let (theta, phi) = (1.1, 0.9);
    let err = |j: f64| {
        let sys = top(j, 3.0);
        let q = sys.spin_expectation(&sys.step(&coherent_state(j, theta, phi).unwrap()).unwrap()).unwrap();
        let c = classical_step(ClassicalPoint::from_angles(theta, phi), 3.0, FRAC_PI_2);
        (q[0] - c.x).abs().max((q[1] - c.y).abs()).max((q[2] - c.z).abs())
    };
    assert!(err(400.0) < err(25.0));
}

#[test]
fn otoc_without_twist_is_periodic_and_bounded() {
    let sys = top(5.0, 0.0);
    let series = otoc_series(&sys, 200).unwrap();
    // Four quarter turns about y are the identity up to a global phase.
    for n in (0..=200).step_by(4) {
        assert!(series.f[n].abs() < 1e-9, "F({n}) = {}", series.f[n]);
    }
    let first_period = series.f[..4].iter().cloned().fold(0.0, f64::max);
    let overall = series.f.iter().cloned().fold(0.0, f64::max);
    assert!((overall - first_period).abs() < 1e-9);
    assert!(series.identity_defect() < 1e-8);
}

#[test]
fn chaotic_otoc_grows_then_saturates() {
    let series = otoc_series(&top(100.0, 6.0), 30).unwrap();
    assert_eq!(series.f[0], 0.0);
    assert!(series.f[4] > 50.0 * series.f[1]);
    let late = &series.f[20..];
    let (lo, hi) = late.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    assert!(hi / lo < 2.0, "late OTOC not saturated: {lo}..{hi}");
}

#[test]
fn long_evolution_preserves_the_norm() {
    let sys = top(50.0, 6.0);
    let ts = timeseries_measures(&sys, 2.25, 2.0, 2000, [1, 1, 1], &[EntropyKind::Linear]).unwrap();
    let worst = ts.norm_drift.iter().cloned().fold(0.0, f64::max);
    assert!(worst < 1e-10, "norm drift {worst}");
}

#[test]
fn evolve_matches_dense_floquet_power() {
    let sys = top(8.0, 6.0);
    let start = sample_ps_state(16, &mut stream_rng(3, 0)).unwrap();
    let states = sys.evolve(&start, 5).unwrap();
    let u = sys.floquet();
    let mut psi = start.amplitudes().to_vec();
    for step in states.iter().skip(1) {
        psi = (0..psi.len()).map(|r| (0..psi.len()).map(|c| u[(r, c)] * psi[c]).sum()).collect();
        let err = psi.iter().zip(step.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-11);
    }
}

#[test]
fn sharded_results_do_not_depend_on_thread_count() {
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
        let s = sample_ps_state(20, rng).unwrap();
        s.amplitudes()[3].re
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sharded_samples(99, 1000, draw))
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
    // A shorter run is a prefix of a longer one.
    assert_eq!(&one[..300], &sharded_samples(99, 300, draw)[..]);
}

#[test]
fn grid_is_deterministic_across_thread_counts() {
    let sys = top(4.0, 6.0);
    let grid = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| time_averaged_tmi_grid(&sys, 3, 5, 20, [1, 1, 1], EntropyKind::VonNeumann).unwrap())
    };
    assert_eq!(grid(1), grid(4));
}
