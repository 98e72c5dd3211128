use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};

use super::sampling::EnsembleSpec;

/// Marchenko–Pastur density for square Wishart matrices on the scaled axis
/// `x = λ·d`: `(1/2π) sqrt((4-x)/x)` on `(0, 4)`, zero elsewhere.
pub fn marchenko_pastur_density(x: f64) -> f64 {
    if x > 0.0 && x < 4.0 {
        ((4.0 - x) / x).sqrt() / (2.0 * PI)
    } else {
        0.0
    }
}

/// Eigenvalues of every sample, pooled and scaled by the matrix dimension
/// (`Q+1` for PS, `N1` for Wishart).
pub fn pooled_scaled_eigenvalues(spec: &EnsembleSpec) -> Result<Vec<f64>> {
    let scale = spec.kind.matrix_dim() as f64;
    let spectra = spec.sample_spectra()?;
    Ok(spectra.into_iter().flatten().map(|l| l * scale).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralHistogram {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub sample_count: usize,
}

/// Least-squares line through `ln(density)` against `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

impl SpectralHistogram {
    /// Bins `values` into `bins` equal bins spanning `[0, max(values)]`,
    /// normalized to unit area.
    pub fn from_values(values: &[f64], bins: usize, sample_count: usize) -> Result<Self> {
        if bins < 10 {
            return Err(Error::domain("bins", format!("need at least 10 bins, got {bins}")));
        }
        if values.is_empty() {
            return Err(Error::domain("values", "no eigenvalues to bin"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integrity("non-finite eigenvalue in histogram input".into()));
        }
        let hi = values.iter().cloned().fold(0.0f64, f64::max);
        let hi = if hi > 0.0 { hi } else { 1.0 };
        let width = hi / bins as f64;
        let mut counts = vec![0usize; bins];
        for &v in values {
            let idx = ((v.max(0.0) / width) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        let total = values.len() as f64;
        let bin_edges = (0..=bins).map(|i| i as f64 * width).collect();
        let densities = counts.iter().map(|&c| c as f64 / (total * width)).collect();
        Ok(SpectralHistogram {
            bin_edges,
            densities,
            sample_count,
        })
    }

    pub fn bins(&self) -> usize {
        self.densities.len()
    }

    pub fn bin_width(&self, i: usize) -> f64 {
        self.bin_edges[i + 1] - self.bin_edges[i]
    }

    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn area(&self) -> f64 {
        self.densities.iter().enumerate().map(|(i, d)| d * self.bin_width(i)).sum()
    }

    /// Probability mass of bins whose centers lie in `[lo, hi)`, divided by
    /// the width of those bins.
    pub fn mean_density(&self, lo: f64, hi: f64) -> f64 {
        let (mut mass, mut width) = (0.0, 0.0);
        for (i, c) in self.centers().into_iter().enumerate() {
            if c >= lo && c < hi {
                mass += self.densities[i] * self.bin_width(i);
                width += self.bin_width(i);
            }
        }
        if width > 0.0 {
            mass / width
        } else {
            0.0
        }
    }

    /// Probability mass of bins whose centers lie above `x`.
    pub fn mass_above(&self, x: f64) -> f64 {
        self.centers()
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c > x)
            .map(|(i, _)| self.densities[i] * self.bin_width(i))
            .sum()
    }

    /// Exponential fit over the last tenth (at least three) of the occupied
    /// bins. `None` when too few bins are occupied.
    pub fn tail_fit(&self) -> Option<TailFit> {
        let occupied: Vec<(f64, f64)> = self
            .centers()
            .into_iter()
            .zip(&self.densities)
            .filter(|(_, d)| **d > 0.0)
            .map(|(c, d)| (c, d.ln()))
            .collect();
        let take = (occupied.len() / 10).max(3);
        if occupied.len() < take {
            return None;
        }
        let pts = &occupied[occupied.len() - take..];
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx == 0.0 {
            return None;
        }
        let slope = sxy / sxx;
        Some(TailFit {
            slope,
            intercept: my - slope * mx,
            points: pts.len(),
        })
    }

    /// CSV with header `x_left,x_right,density`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Integrity(format!("csv write failed: {e}"));
        w.write_record(["x_left", "x_right", "density"]).map_err(io)?;
        for (i, d) in self.densities.iter().enumerate() {
            w.serialize((self.bin_edges[i], self.bin_edges[i + 1], d)).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Integrity(format!("csv flush failed: {e}")))?;
        Ok(())
    }
}

/// Samples `spec`, pools scaled eigenvalues and histograms them.
pub fn spectral_histogram(spec: &EnsembleSpec, bins: usize) -> Result<SpectralHistogram> {
    if bins < 10 {
        return Err(Error::domain("bins", format!("need at least 10 bins, got {bins}")));
    }
    let values = pooled_scaled_eigenvalues(spec)?;
    SpectralHistogram::from_values(&values, bins, spec.sample_count)
}

/// Two-sample Kolmogorov–Smirnov statistic with its asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTest> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("samples", "both samples must be nonempty"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    Ok(KsTest {
        statistic: d,
        p_value: kolmogorov_tail(lambda),
    })
}

/// `P(K > λ)` for the Kolmogorov distribution.
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
