use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::info::{BlockPartition, BlockReducer, EntropyKind};
use crate::state::coherent_state;

use super::system::SpinSystem;

/// Per-step measures of one kind: `S(A)`, `I₂(A:B)`, `I₂(A:BC)`, `I₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepMeasures {
    pub s_a: f64,
    pub i2_ab: f64,
    pub i2_a_bc: f64,
    pub i3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    EntropyA,
    MutualAB,
    MutualABC,
    Tripartite,
}

impl StepMeasures {
    pub fn get(&self, m: Measure) -> f64 {
        match m {
            Measure::EntropyA => self.s_a,
            Measure::MutualAB => self.i2_ab,
            Measure::MutualABC => self.i2_a_bc,
            Measure::Tripartite => self.i3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub kinds: Vec<EntropyKind>,
    pub blocks: BlockPartition,
    /// `measures[n][i]` for step `n` and `kinds[i]`.
    pub measures: Vec<Vec<StepMeasures>>,
    /// `| ‖ψ_n‖² - 1 |`.
    pub norm_drift: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.measures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measures.is_empty()
    }

    /// One measure of one kind as a series over all steps.
    pub fn series(&self, kind: usize, m: Measure) -> Vec<f64> {
        self.measures.iter().map(|row| row[kind].get(m)).collect()
    }

    /// CSV with header `step,S_A_<kind>,I2_AB_<kind>,I2_A_BC_<kind>,I3_<kind>,…,norm_drift`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Integrity(format!("csv write failed: {e}"));
        let mut header = vec!["step".to_string()];
        for kind in &self.kinds {
            let l = kind.label();
            header.extend([format!("S_A_{l}"), format!("I2_AB_{l}"), format!("I2_A_BC_{l}"), format!("I3_{l}")]);
        }
        header.push("norm_drift".into());
        w.write_record(&header).map_err(io)?;
        for (n, row) in self.measures.iter().enumerate() {
            let mut rec = vec![n.to_string()];
            for m in row {
                rec.extend([m.s_a, m.i2_ab, m.i2_a_bc, m.i3].map(|v| v.to_string()));
            }
            rec.push(self.norm_drift[n].to_string());
            w.write_record(&rec).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Integrity(format!("csv flush failed: {e}")))?;
        Ok(())
    }
}

/// Evolves the coherent state at `(θ, φ)` and records entropy, mutual
/// information and TMI of blocks `q1, q2, q3` at every step `0..=n_steps`.
pub fn timeseries_measures(
    sys: &SpinSystem,
    theta: f64,
    phi: f64,
    n_steps: usize,
    blocks: [usize; 3],
    kinds: &[EntropyKind],
) -> Result<TimeSeries> {
    if kinds.is_empty() {
        return Err(Error::domain("kinds", "need at least one entropy kind"));
    }
    kinds.iter().try_for_each(EntropyKind::validate)?;
    let n = sys.n_qubits();
    let partition = BlockPartition::new(blocks[0], blocks[1], blocks[2], n)?;
    let reducer = BlockReducer::new(n);
    let start = coherent_state(sys.params().j, theta, phi)?;
    let mut measures = Vec::with_capacity(n_steps + 1);
    let mut norm_drift = Vec::with_capacity(n_steps + 1);
    sys.for_each_step(&start, n_steps, |_, state| {
        let spectra = reducer.tripartite(state, &partition)?;
        let row = kinds
            .iter()
            .map(|&kind| {
                let e = spectra.entropies(kind)?;
                Ok(StepMeasures {
                    s_a: e.s_a(),
                    i2_ab: e.mi_ab(),
                    i2_a_bc: e.mi_a_bc(),
                    i3: e.tmi(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        measures.push(row);
        norm_drift.push((state.norm_sqr() - 1.0).abs());
        Ok(())
    })?;
    Ok(TimeSeries {
        kinds: kinds.to_vec(),
        blocks: partition,
        measures,
        norm_drift,
    })
}

/// Mean and sample standard deviation of `series[start..=end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowStats {
    pub start: usize,
    pub end: usize,
    pub mean: f64,
    pub std_dev: f64,
}

impl WindowStats {
    /// `std_dev / |mean|`.
    pub fn relative_spread(&self) -> f64 {
        self.std_dev / self.mean.abs()
    }
}

pub fn window_stats(series: &[f64], start: usize, end: usize) -> Result<WindowStats> {
    if start > end || end >= series.len() {
        return Err(Error::domain(
            "window",
            format!("[{start}, {end}] outside a series of length {}", series.len()),
        ));
    }
    let w = &series[start..=end];
    let k = w.len() as f64;
    let mean = w.iter().sum::<f64>() / k;
    let std_dev = if w.len() > 1 {
        (w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(WindowStats { start, end, mean, std_dev })
}

/// Steps `[⌈3 t⌉, min(⌊10 t⌋, last)]` for Ehrenfest time `t`.
pub fn saturation_window(t_ehrenfest: f64, len: usize) -> Result<(usize, usize)> {
    if !(t_ehrenfest > 0.0) || len == 0 {
        return Err(Error::domain("t_ehrenfest", "need a positive Ehrenfest time and a nonempty series"));
    }
    let start = (3.0 * t_ehrenfest).ceil() as usize;
    let end = ((10.0 * t_ehrenfest).floor() as usize).min(len - 1);
    if start > end {
        return Err(Error::domain("n_steps", format!("series too short for a window starting at step {start}")));
    }
    Ok((start, end))
}

/// `ln|x_n - saturation|` for every step.
pub fn saturation_residuals(series: &[f64], saturation: f64) -> Vec<f64> {
    series.iter().map(|x| (x - saturation).abs().ln()).collect()
}

/// Time-averaged TMI over coherent initial states on a `θ × φ` grid with
/// `θ_i = π i / n_theta`, `φ_l = 2π l / n_phi`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TmiGrid {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// Row-major: `values[i * n_phi + l]`.
    pub values: Vec<f64>,
}

impl TmiGrid {
    pub fn get(&self, i: usize, l: usize) -> f64 {
        self.values[i * self.phis.len() + l]
    }

    /// CSV matrix: header `theta\phi,<φ_0>,…`, then one row per `θ`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Integrity(format!("csv write failed: {e}"));
        let mut header = vec!["theta\\phi".to_string()];
        header.extend(self.phis.iter().map(|p| p.to_string()));
        w.write_record(&header).map_err(io)?;
        for (i, t) in self.thetas.iter().enumerate() {
            let mut rec = vec![t.to_string()];
            rec.extend((0..self.phis.len()).map(|l| self.get(i, l).to_string()));
            w.write_record(&rec).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Integrity(format!("csv flush failed: {e}")))?;
        Ok(())
    }
}

/// Mean of `I₃` over kicks `1..=n_steps` from the coherent state at `(θ, φ)`.
pub fn time_averaged_tmi(
    sys: &SpinSystem,
    reducer: &BlockReducer,
    partition: &BlockPartition,
    theta: f64,
    phi: f64,
    n_steps: usize,
    kind: EntropyKind,
) -> Result<f64> {
    let start = coherent_state(sys.params().j, theta, phi)?;
    let mut sum = 0.0;
    sys.for_each_step(&start, n_steps, |n, state| {
        if n > 0 {
            sum += reducer.tripartite(state, partition)?.tmi(kind)?;
        }
        Ok(())
    })?;
    Ok(sum / n_steps as f64)
}

pub fn time_averaged_tmi_grid(
    sys: &SpinSystem,
    n_theta: usize,
    n_phi: usize,
    n_steps: usize,
    blocks: [usize; 3],
    kind: EntropyKind,
) -> Result<TmiGrid> {
    if n_theta == 0 || n_phi == 0 {
        return Err(Error::domain("grid", "grid dimensions must be positive"));
    }
    if n_steps == 0 {
        return Err(Error::domain("n_steps", "need at least one kick"));
    }
    kind.validate()?;
    let n = sys.n_qubits();
    let partition = BlockPartition::new(blocks[0], blocks[1], blocks[2], n)?;
    let reducer = BlockReducer::new(n);
    let thetas: Vec<f64> = (0..n_theta).map(|i| std::f64::consts::PI * i as f64 / n_theta as f64).collect();
    let phis: Vec<f64> = (0..n_phi).map(|l| 2.0 * std::f64::consts::PI * l as f64 / n_phi as f64).collect();
    let values = (0..n_theta * n_phi)
        .into_par_iter()
        .map(|node| {
            let (i, l) = (node / n_phi, node % n_phi);
            time_averaged_tmi(sys, &reducer, &partition, thetas[i], phis[l], n_steps, kind)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(TmiGrid { thetas, phis, values })
}
