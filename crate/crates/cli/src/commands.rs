use psym_core::concentration::empirical_concentration;
use psym_core::ensembles::spectrum::{marchenko_pastur_density, spectral_histogram};
use psym_core::ensembles::{
    avg_linear_entropy_ps, avg_linear_entropy_wishart, avg_purity_ps, avg_vn_ps_approx,
    calibrate_alpha, mc_ps_block_entropy, mc_ps_purity, mc_wishart_linear_entropy, page_formula, page_square_approx,
    ps_tmi_samples, ps_vn_tmi_seven_term, sharded_samples, wishart_vn_tmi_seven_term, SampleStats,
};
use psym_core::kicked_top::{
    ehrenfest_time, lyapunov_exponent, otoc_series, phase_portrait, saturation_window, time_averaged_tmi_grid,
    timeseries_measures, window_stats, Measure,
};
use psym_core::{
    qubits, BlockPartition, EnsembleKind, EnsembleSpec, EntropyKind, Functional, KickedTopParams, SpinSystem,
    WishartFlavor,
};
use serde_json::{json, Value};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Table};

/// Tables to write (file stem, contents) plus optional scalar summary.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub tables: Vec<(String, Table)>,
    pub summary: Option<Value>,
}

impl RunOutput {
    fn single(stem: &str, table: Table, summary: Option<Value>) -> Self {
        RunOutput {
            tables: vec![(stem.to_string(), table)],
            summary,
        }
    }
}

fn parse_kind(text: &str, field: &str) -> CliResult<EntropyKind> {
    text.parse::<EntropyKind>()
        .map_err(|e| CliError::validation(field, e.to_string()))
}

fn three_blocks(blocks: &[usize], field: &str) -> CliResult<[usize; 3]> {
    <[usize; 3]>::try_from(blocks)
        .map_err(|_| CliError::validation(field, format!("expected three block sizes, got {}", blocks.len())))
}

fn spin_system(j: f64, k: f64, p: f64, cap: usize) -> CliResult<SpinSystem> {
    Ok(SpinSystem::with_cap(KickedTopParams::new(j, k, p)?, cap)?)
}

/// Per-row seed so that rows are independent of which other rows are run.
fn row_seed(seed: u64, n: usize, q: usize, tag: u64) -> u64 {
    seed ^ ((n as u64) << 40) ^ ((q as u64) << 20) ^ tag
}

pub fn ensemble_spectrum(a: &EnsembleSpectrumArgs, seed: u64) -> CliResult<RunOutput> {
    let kind = match need(&a.kind, "kind")?.as_str() {
        "ps" => EnsembleKind::Ps {
            n: need(&a.n, "n")?,
            q: need(&a.q, "q")?,
        },
        "wishart" => EnsembleKind::Wishart {
            n1: need(&a.n1, "n1")?,
            n2: need(&a.n2, "n2")?,
        },
        other => return Err(CliError::validation("kind", format!("expected `ps` or `wishart`, got `{other}`"))),
    };
    let spec = EnsembleSpec::new(kind, need(&a.samples, "samples")?, seed)?;
    let hist = spectral_histogram(&spec, need(&a.bins, "bins")?)?;
    let mut table = Table::new(["x_left", "x_right", "density", "marchenko_pastur"]);
    for (i, d) in hist.densities.iter().enumerate() {
        let (lo, hi) = (hist.bin_edges[i], hist.bin_edges[i + 1]);
        table.push(vec![lo.into(), hi.into(), (*d).into(), marchenko_pastur_density(0.5 * (lo + hi)).into()]);
    }
    let tail = hist.tail_fit();
    let summary = json!({
        "matrix_dim": kind.matrix_dim(),
        "samples": hist.sample_count,
        "area": hist.area(),
        "density_below_0.05": hist.mean_density(0.0, 0.05),
        "marchenko_pastur_at_0.05": marchenko_pastur_density(0.05),
        "mass_above_4": hist.mass_above(4.0),
        "tail_slope": tail.map(|t| t.slope),
        "tail_points": tail.map(|t| t.points),
    });
    Ok(RunOutput::single("spectrum", table, Some(summary)))
}

fn stats_cells(stats: Option<SampleStats>) -> [Cell; 2] {
    match stats {
        Some(s) => [s.mean.into(), s.std_err.into()],
        None => [Cell::Empty, Cell::Empty],
    }
}

/// Largest `N` for which the full-qubit Wishart comparison is sampled.
const QUBIT_WISHART_MAX_N: usize = 16;

pub fn averages(a: &AveragesArgs, seed: u64) -> CliResult<RunOutput> {
    let n = need(&a.n, "n")?;
    let samples = need(&a.samples, "samples")?;
    let alpha = need(&a.alpha, "alpha")?;
    if n < 2 {
        return Err(CliError::validation("n", "need N >= 2"));
    }
    let qs: Vec<usize> = if need(&a.sweep_q, "sweep_q")? {
        (1..n).collect()
    } else {
        let q = need(&a.q, "q")?;
        if q == 0 || q >= n {
            return Err(CliError::validation("q", format!("need 1 <= Q <= N-1, got Q={q}, N={n}")));
        }
        vec![q]
    };
    let mc = |tag: u64, q: usize, f: &dyn Fn(u64) -> psym_core::Result<SampleStats>| -> CliResult<Option<SampleStats>> {
        if samples == 0 {
            return Ok(None);
        }
        Ok(Some(f(row_seed(seed, n, q, tag))?))
    };
    let mut table = Table::new(["N", "Q", "quantity", "analytic", "montecarlo", "stderr"]);
    let mut push = |q: usize, name: &str, analytic: f64, stats: Option<SampleStats>| {
        let [m, s] = stats_cells(stats);
        table.push(vec![n.into(), q.into(), name.into(), analytic.into(), m, s]);
    };
    for q in qs {
        let purity = mc(1, q, &|s| mc_ps_purity(n, q, samples, s))?;
        push(q, "purity_ps", avg_purity_ps(n, q)?, purity);
        let lin = purity.map(|p| SampleStats { mean: 1.0 - p.mean, ..p });
        push(q, "linear_entropy_ps", avg_linear_entropy_ps(n, q)?, lin);
        let dims = mc(2, q, &|s| mc_wishart_linear_entropy(q + 1, n - q + 1, samples, s))?;
        push(q, "linear_entropy_wishart_dims", avg_linear_entropy_wishart(n, q, WishartFlavor::Dims)?, dims);
        let qubit_mc = if n <= QUBIT_WISHART_MAX_N {
            mc(3, q, &|s| mc_wishart_linear_entropy(1 << q, 1 << (n - q), samples, s))?
        } else {
            None
        };
        push(q, "linear_entropy_wishart_qubits", avg_linear_entropy_wishart(n, q, WishartFlavor::Qubits)?, qubit_mc);
        let vn = mc(4, q, &|s| mc_ps_block_entropy(n, q, EntropyKind::VonNeumann, samples, s))?;
        let folded = q.min(n - q);
        push(q, "vn_ps", avg_vn_ps_approx(n, folded, alpha, 2 * folded == n)?, vn);
    }
    Ok(RunOutput::single("averages", table, None))
}

pub fn vn_scaling(a: &VnScalingArgs, seed: u64) -> CliResult<RunOutput> {
    let (lo, hi, step) = (need(&a.n_min, "n_min")?, need(&a.n_max, "n_max")?, need(&a.n_step, "n_step")?);
    let samples = need(&a.samples, "samples")?;
    let alpha = need(&a.alpha, "alpha")?;
    if lo < 2 || hi < lo {
        return Err(CliError::validation("n_min", format!("need 2 <= n_min <= n_max, got {lo}..{hi}")));
    }
    if step == 0 {
        return Err(CliError::validation("n_step", "must be positive"));
    }
    if samples < 2 {
        return Err(CliError::validation("samples", "need at least two samples"));
    }
    let mut table = Table::new(["N", "Q", "montecarlo", "stderr", "formula", "page_exact", "page_square"]);
    let mut points = Vec::new();
    for n in (lo..=hi).step_by(step) {
        let q = n / 2;
        let stats = mc_ps_block_entropy(n, q, EntropyKind::VonNeumann, samples, row_seed(seed, n, q, 5))?;
        points.push((n, q, stats.mean));
        table.push(vec![
            n.into(),
            q.into(),
            stats.mean.into(),
            stats.std_err.into(),
            avg_vn_ps_approx(n, q, alpha, true)?.into(),
            page_formula(q + 1, n - q + 1)?.into(),
            page_square_approx(q).into(),
        ]);
    }
    let calibrated = if need(&a.calibrate, "calibrate")? {
        Some(calibrate_alpha(&points)?)
    } else {
        None
    };
    let summary = json!({ "alpha": alpha, "calibrated_alpha": calibrated });
    Ok(RunOutput::single("vn_scaling", table, Some(summary)))
}

pub fn tmi_random(a: &TmiRandomArgs, seed: u64) -> CliResult<RunOutput> {
    let n = need(&a.n, "n")?;
    let [q1, q2, q3] = three_blocks(&need(&a.blocks, "blocks")?, "blocks")?;
    let blocks = BlockPartition::new(q1, q2, q3, n)?;
    let kind = parse_kind(&need(&a.kind, "kind")?, "kind")?;
    let samples = need(&a.samples, "samples")?;
    let alpha = need(&a.alpha, "alpha")?;
    if samples == 0 {
        return Err(CliError::validation("samples", "must be positive"));
    }
    let ensemble = need(&a.ensemble, "ensemble")?;
    let values = match ensemble.as_str() {
        "ps" => ps_tmi_samples(&blocks, n, kind, samples, seed)?,
        "qubits" => {
            sharded_samples(seed, samples, |rng| {
                let psi = qubits::haar_qubit_state(n, rng)?;
                qubits::tmi(&psi, n, q1, q2, q3, kind)
            })
            .into_iter()
            .collect::<psym_core::Result<Vec<f64>>>()?
        }
        other => return Err(CliError::validation("ensemble", format!("expected `ps` or `qubits`, got `{other}`"))),
    };
    let mut table = Table::new(["sample", "tmi"]);
    for (i, v) in values.iter().enumerate() {
        table.push(vec![i.into(), (*v).into()]);
    }
    let stats = SampleStats::from_slice(&values);
    let (ps_estimate, wishart_estimate) = if kind == EntropyKind::VonNeumann {
        (Some(ps_vn_tmi_seven_term(&blocks, alpha)?), Some(wishart_vn_tmi_seven_term(&blocks)?))
    } else {
        (None, None)
    };
    let summary = json!({
        "ensemble": ensemble,
        "kind": kind.label(),
        "mean": stats.mean,
        "stderr": stats.std_err,
        "positive_fraction": values.iter().filter(|v| **v > 0.0).count() as f64 / values.len() as f64,
        "ps_estimate": ps_estimate,
        "wishart_estimate": wishart_estimate,
    });
    Ok(RunOutput::single("tmi_samples", table, Some(summary)))
}

pub fn timeseries(a: &TimeseriesArgs) -> CliResult<RunOutput> {
    let sys = spin_system(need(&a.j, "j")?, need(&a.k, "k")?, need(&a.p, "p")?, need(&a.dim_cap, "dim_cap")?)?;
    let kinds = need(&a.kinds, "kinds")?
        .iter()
        .map(|k| parse_kind(k, "kinds"))
        .collect::<CliResult<Vec<_>>>()?;
    let blocks = three_blocks(&need(&a.blocks, "blocks")?, "blocks")?;
    let steps = need(&a.steps, "steps")?;
    let ts = timeseries_measures(&sys, need(&a.theta, "theta")?, need(&a.phi, "phi")?, steps, blocks, &kinds)?;
    let mut columns = vec!["step".to_string()];
    for kind in &kinds {
        let l = kind.label();
        columns.extend([format!("S_A_{l}"), format!("I2_AB_{l}"), format!("I2_A_BC_{l}"), format!("I3_{l}")]);
    }
    columns.push("norm_drift".into());
    let mut table = Table::new(columns);
    for (step, row) in ts.measures.iter().enumerate() {
        let mut cells = vec![Cell::from(step)];
        for m in row {
            cells.extend([m.s_a.into(), m.i2_ab.into(), m.i2_a_bc.into(), m.i3.into()]);
        }
        cells.push(ts.norm_drift[step].into());
        table.push(cells);
    }
    let lambda = need(&a.lambda, "lambda")?;
    let t_ehr = ehrenfest_time(sys.params().j, lambda)?;
    let windows: Vec<Value> = match saturation_window(t_ehr, ts.len()) {
        Ok((start, end)) => kinds
            .iter()
            .enumerate()
            .map(|(i, kind)| {
                let w = window_stats(&ts.series(i, Measure::Tripartite), start, end)?;
                Ok(json!({ "kind": kind.label(), "start": start, "end": end, "mean": w.mean, "std_dev": w.std_dev }))
            })
            .collect::<CliResult<_>>()?,
        Err(_) => Vec::new(),
    };
    let summary = json!({
        "ehrenfest_time": t_ehr,
        "max_norm_drift": ts.norm_drift.iter().cloned().fold(0.0, f64::max),
        "saturation": windows,
    });
    Ok(RunOutput::single("timeseries", table, Some(summary)))
}

pub fn otoc(a: &OtocArgs) -> CliResult<RunOutput> {
    let sys = spin_system(need(&a.j, "j")?, need(&a.k, "k")?, need(&a.p, "p")?, need(&a.dim_cap, "dim_cap")?)?;
    let steps = need(&a.steps, "steps")?;
    let lambda = need(&a.lambda, "lambda")?;
    let t_ehr = ehrenfest_time(sys.params().j, lambda)?;
    let series = otoc_series(&sys, steps)?;
    let mut table = Table::new(["n", "F", "C2", "C4"]);
    for i in 0..series.steps.len() {
        table.push(vec![series.steps[i].into(), series.f[i].into(), series.c2[i].into(), series.c4[i].into()]);
    }
    let start = need(&a.fit_start, "fit_start")?;
    let end = a.fit_end.unwrap_or((t_ehr.floor() as usize).min(steps));
    let slope = series
        .growth_rate(start, end)
        .map_err(|e| CliError::validation("fit_end", e.to_string()))?;
    let summary = json!({
        "ehrenfest_time": t_ehr,
        "fit_start": start,
        "fit_end": end,
        "growth_rate": slope,
        "twice_lambda": 2.0 * lambda,
        "identity_defect": series.identity_defect(),
    });
    Ok(RunOutput::single("otoc", table, Some(summary)))
}

pub fn tmi_grid(a: &TmiGridArgs) -> CliResult<RunOutput> {
    let sys = spin_system(need(&a.j, "j")?, need(&a.k, "k")?, need(&a.p, "p")?, need(&a.dim_cap, "dim_cap")?)?;
    let blocks = three_blocks(&need(&a.blocks, "blocks")?, "blocks")?;
    let kind = parse_kind(&need(&a.kind, "kind")?, "kind")?;
    let grid = time_averaged_tmi_grid(
        &sys,
        need(&a.n_theta, "n_theta")?,
        need(&a.n_phi, "n_phi")?,
        need(&a.steps, "steps")?,
        blocks,
        kind,
    )?;
    let mut table = Table::new(["theta", "phi", "tmi"]);
    for (i, t) in grid.thetas.iter().enumerate() {
        for (l, p) in grid.phis.iter().enumerate() {
            table.push(vec![(*t).into(), (*p).into(), grid.get(i, l).into()]);
        }
    }
    let stats = SampleStats::from_slice(&grid.values);
    let summary = json!({
        "mean": stats.mean,
        "node_std_dev": stats.std_dev,
        "min": grid.values.iter().cloned().fold(f64::INFINITY, f64::min),
        "max": grid.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    });
    Ok(RunOutput::single("tmi_grid", table, Some(summary)))
}

pub fn phase_portrait_cmd(a: &PhasePortraitArgs, seed: u64) -> CliResult<RunOutput> {
    let points = phase_portrait(
        need(&a.k, "k")?,
        need(&a.p, "p")?,
        need(&a.points, "points")?,
        need(&a.steps, "steps")?,
        seed,
    )?;
    let mut table = Table::new(["phi", "Z", "trajectory_id", "step"]);
    for pt in points {
        table.push(vec![pt.phi.into(), pt.z.into(), pt.trajectory_id.into(), pt.step.into()]);
    }
    Ok(RunOutput::single("phase_portrait", table, None))
}

pub fn lyapunov(a: &LyapunovArgs, seed: u64) -> CliResult<RunOutput> {
    let (k, p) = (need(&a.k, "k")?, need(&a.p, "p")?);
    let lambda = lyapunov_exponent(
        k,
        p,
        need(&a.transient, "transient")?,
        need(&a.average, "average")?,
        need(&a.trajectories, "trajectories")?,
        seed,
    )?;
    let t_ehr = match a.j {
        Some(j) if lambda > 0.0 => Some(ehrenfest_time(j, lambda)?),
        _ => None,
    };
    let mut table = Table::new(["k", "p", "lambda", "ehrenfest_time"]);
    table.push(vec![k.into(), p.into(), lambda.into(), t_ehr.into()]);
    Ok(RunOutput::single("lyapunov", table, None))
}

pub fn concentration(a: &ConcentrationArgs, seed: u64) -> CliResult<RunOutput> {
    let functional = match need(&a.functional, "functional")?.as_str() {
        "vn" => Functional::VonNeumann { q: need(&a.q, "q")? },
        "lin" => Functional::Linear { q: need(&a.q, "q")? },
        "tmi" => {
            let [q1, q2, q3] = three_blocks(&need(&a.blocks, "blocks")?, "blocks")?;
            let kind = parse_kind(&need(&a.kind, "kind")?, "kind")?;
            Functional::Tmi { q1, q2, q3, kind }
        }
        other => {
            return Err(CliError::validation("functional", format!("expected `vn`, `lin` or `tmi`, got `{other}`")))
        }
    };
    let report = empirical_concentration(
        need(&a.n, "n")?,
        functional,
        need(&a.samples, "samples")?,
        &need(&a.epsilons, "epsilons")?,
        seed,
    )?;
    let mut table = Table::new(["epsilon", "empirical_tail", "levy_bound", "stderr", "within_bound"]);
    for row in &report.rows {
        table.push(vec![
            row.epsilon.into(),
            row.empirical_tail.into(),
            row.levy_bound.into(),
            row.stderr.into(),
            Cell::from(if row.within_bound() { "true" } else { "false" }),
        ]);
    }
    let summary = json!({
        "eta": report.eta,
        "mean": report.mean,
        "positive_fraction": report.positive_fraction,
        "all_within_bound": report.all_within_bound(),
    });
    Ok(RunOutput::single("concentration", table, Some(summary)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_samples_leave_montecarlo_empty() {
        let args = AveragesArgs {
            samples: Some(0),
            ..AveragesArgs::defaults()
        };
        let out = averages(&args, 1).unwrap();
        let table = &out.tables[0].1;
        assert_eq!(table.rows.len(), 5);
        assert!(table.rows.iter().all(|r| r[4] == Cell::Empty && r[5] == Cell::Empty));
        assert!(table.rows.iter().all(|r| matches!(r[3], Cell::Float(v) if v.is_finite())));
    }

    #[test]
    fn block_count_is_checked() {
        let args = TmiRandomArgs {
            blocks: Some(vec![1, 2]),
            ..TmiRandomArgs::defaults()
        };
        let err = tmi_random(&args, 0).unwrap_err();
        assert!(matches!(&err, CliError::Validation { field, .. } if field == "blocks"));
    }

    #[test]
    fn spin_cap_is_a_capacity_error() {
        let args = OtocArgs {
            j: Some(50.0),
            dim_cap: Some(10),
            ..OtocArgs::defaults()
        };
        assert_eq!(otoc(&args).unwrap_err().exit_code(), 3);
    }
}
