use std::io::Write;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::par_for;

use super::system::SpinSystem;

/// Relative tolerance on `F = 2(C₂ - C₄)` and on the imaginary part of the
/// four-point trace.
pub const OTOC_TRACE_TOLERANCE: f64 = 1e-8;

/// `F(n) = -Tr([Jx, Jx(n)]²)`, `C₂(n) = Tr(Jx(n)² Jx²)` and
/// `C₄(n) = Tr(Jx(n) Jx Jx(n) Jx)`, all divided by `j⁴`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OtocSeries {
    pub steps: Vec<usize>,
    pub f: Vec<f64>,
    pub c2: Vec<f64>,
    pub c4: Vec<f64>,
}

#[derive(Serialize)]
struct OtocRow {
    n: usize,
    #[serde(rename = "F")]
    f: f64,
    #[serde(rename = "C2")]
    c2: f64,
    #[serde(rename = "C4")]
    c4: f64,
}

impl OtocSeries {
    /// Least-squares slope of `ln F(n)` over `start <= n <= end`.
    pub fn growth_rate(&self, start: usize, end: usize) -> Result<f64> {
        if start >= end || end >= self.f.len() {
            return Err(Error::domain(
                "window",
                format!("need start < end <= {}, got [{start}, {end}]", self.f.len().saturating_sub(1)),
            ));
        }
        let pts: Vec<(f64, f64)> = (start..=end).map(|n| (n as f64, self.f[n])).collect();
        if let Some((n, _)) = pts.iter().find(|(_, f)| !(*f > 0.0)) {
            return Err(Error::domain("window", format!("F({n}) is not positive")));
        }
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1.ln()).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Ok(sxy / sxx)
    }

    /// `max_n |F - 2(C₂ - C₄)| / max(F, C₂)`.
    pub fn identity_defect(&self) -> f64 {
        (0..self.f.len())
            .map(|n| {
                let scale = self.f[n].abs().max(self.c2[n].abs()).max(f64::MIN_POSITIVE);
                (self.f[n] - 2.0 * (self.c2[n] - self.c4[n])).abs() / scale
            })
            .fold(0.0, f64::max)
    }

    /// CSV with header `n,F,C2,C4`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for n in 0..self.steps.len() {
            w.serialize(OtocRow {
                n: self.steps[n],
                f: self.f[n],
                c2: self.c2[n],
                c4: self.c4[n],
            })
            .map_err(|e| Error::Integrity(format!("csv write failed: {e}")))?;
        }
        w.flush().map_err(|e| Error::Integrity(format!("csv flush failed: {e}")))?;
        Ok(())
    }
}

/// Heisenberg-picture `Jx(n) = U†ⁿ Jx Uⁿ` held as real and imaginary parts.
struct EvolvedOperator {
    re: Mat<f64>,
    im: Mat<f64>,
}

impl EvolvedOperator {
    /// `X <- U† X U = Rᵀ (D† X D) R`.
    fn conjugate(&mut self, sys: &SpinSystem, tmp: &mut Mat<f64>) {
        let d = sys.dim();
        let ph = sys.phases();
        for c in 0..d {
            for r in 0..d {
                let w = ph[r].conj() * ph[c];
                let (xr, xi) = (self.re[(r, c)], self.im[(r, c)]);
                self.re[(r, c)] = xr * w.re - xi * w.im;
                self.im[(r, c)] = xr * w.im + xi * w.re;
            }
        }
        let rot = sys.rotation();
        let par = par_for(d);
        for part in [&mut self.re, &mut self.im] {
            matmul(tmp.as_mut(), Accum::Replace, rot.transpose(), part.as_ref(), 1.0, par);
            matmul(part.as_mut(), Accum::Replace, tmp.as_ref(), rot, 1.0, par);
        }
    }
}

/// Returns `(C₂, Re C₄, Im C₄, F)` unnormalized for `M = X Jx`.
fn traces(x_re: MatRef<'_, f64>, x_im: MatRef<'_, f64>, sup: &[f64]) -> (f64, f64, f64, f64) {
    let d = sup.len();
    // M[:, c] = X[:, c-1] Jx[c-1, c] + X[:, c+1] Jx[c+1, c]
    let m_at = |r: usize, c: usize| -> (f64, f64) {
        let (mut re, mut im) = (0.0, 0.0);
        if c >= 1 {
            re += x_re[(r, c - 1)] * sup[c];
            im += x_im[(r, c - 1)] * sup[c];
        }
        if c + 1 < d {
            re += x_re[(r, c + 1)] * sup[c + 1];
            im += x_im[(r, c + 1)] * sup[c + 1];
        }
        (re, im)
    };
    let mut m_re = vec![0.0; d * d];
    let mut m_im = vec![0.0; d * d];
    for c in 0..d {
        for r in 0..d {
            let (re, im) = m_at(r, c);
            m_re[r + c * d] = re;
            m_im[r + c * d] = im;
        }
    }
    let (mut c2, mut c4_re, mut c4_im, mut f) = (0.0, 0.0, 0.0, 0.0);
    for c in 0..d {
        for r in 0..d {
            let (ar, ai) = (m_re[r + c * d], m_im[r + c * d]);
            let (br, bi) = (m_re[c + r * d], m_im[c + r * d]);
            c2 += ar * ar + ai * ai;
            c4_re += ar * br - ai * bi;
            c4_im += ar * bi + ai * br;
            // (M† - M)[r, c] = conj(M[c, r]) - M[r, c]
            let (dr, di) = (br - ar, -bi - ai);
            f += dr * dr + di * di;
        }
    }
    (c2, c4_re, c4_im, f)
}

/// OTOC series for `n = 0..=n_max` by repeated conjugation of `Jx`.
pub fn otoc_series(sys: &SpinSystem, n_max: usize) -> Result<OtocSeries> {
    if n_max == 0 {
        return Err(Error::domain("n_max", "need at least one step"));
    }
    let d = sys.dim();
    let sup = sys.jx_superdiag();
    let j4 = sys.params().j.powi(4);
    let jx = sys.jx();
    let mut x = EvolvedOperator {
        re: Mat::from_fn(d, d, |r, c| jx[(r, c)].re),
        im: Mat::zeros(d, d),
    };
    let mut tmp = Mat::<f64>::zeros(d, d);
    let mut series = OtocSeries {
        steps: Vec::with_capacity(n_max + 1),
        f: Vec::with_capacity(n_max + 1),
        c2: Vec::with_capacity(n_max + 1),
        c4: Vec::with_capacity(n_max + 1),
    };
    for n in 0..=n_max {
        if n > 0 {
            x.conjugate(sys, &mut tmp);
        }
        let (c2, c4, c4_im, f) = traces(x.re.as_ref(), x.im.as_ref(), &sup);
        let scale = c2.abs().max(f64::MIN_POSITIVE);
        if c4_im.abs() > OTOC_TRACE_TOLERANCE * scale {
            return Err(Error::Integrity(format!("Tr(M M) has imaginary part {c4_im:e} at step {n}")));
        }
        if (f - 2.0 * (c2 - c4)).abs() > OTOC_TRACE_TOLERANCE * scale {
            return Err(Error::Integrity(format!("OTOC identity violated at step {n}")));
        }
        series.steps.push(n);
        series.f.push(f / j4);
        series.c2.push(c2 / j4);
        series.c4.push(c4 / j4);
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kicked_top::KickedTopParams;

    #[test]
    fn initial_values() {
        let sys = SpinSystem::new(KickedTopParams::standard(5.0, 6.0).unwrap()).unwrap();
        let s = otoc_series(&sys, 3).unwrap();
        assert!(s.f[0].abs() < 1e-10);
        assert!((s.c2[0] - s.c4[0]).abs() < 1e-12);
        // Tr(Jx⁴) = Tr(Jz⁴) = Σ m⁴
        let tr4: f64 = sys.jz().iter().map(|m| m.powi(4)).sum();
        assert!((s.c2[0] - tr4 / 625.0).abs() < 1e-12);
        assert!(s.identity_defect() < 1e-10);
    }

    #[test]
    fn rejects_zero_steps() {
        let sys = SpinSystem::new(KickedTopParams::standard(2.0, 1.0).unwrap()).unwrap();
        assert!(otoc_series(&sys, 0).is_err());
    }

    #[test]
    fn growth_rate_of_exact_exponential() {
        let f: Vec<f64> = (0..10).map(|n| if n == 0 { 0.0 } else { 1e-4 * (2.2 * n as f64).exp() }).collect();
        let s = OtocSeries {
            steps: (0..10).collect(),
            c2: vec![0.0; 10],
            c4: vec![0.0; 10],
            f,
        };
        assert!((s.growth_rate(1, 7).unwrap() - 2.2).abs() < 1e-12);
        assert!(s.growth_rate(0, 7).is_err());
        assert!(s.growth_rate(3, 10).is_err());
    }
}
