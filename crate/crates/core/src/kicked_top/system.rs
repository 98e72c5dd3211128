use faer::linalg::matmul::matmul;
use faer::{c64, Accum, Mat, MatRef, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::state::{twice_spin, PSState};

/// Default bound on the Hilbert-space dimension `2j+1`.
pub const DEFAULT_DIM_CAP: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickedTopParams {
    pub j: f64,
    pub k: f64,
    #[serde(default = "default_p")]
    pub p: f64,
}

fn default_p() -> f64 {
    std::f64::consts::FRAC_PI_2
}

impl KickedTopParams {
    pub fn new(j: f64, k: f64, p: f64) -> Result<Self> {
        let params = KickedTopParams { j, k, p };
        params.validate()?;
        Ok(params)
    }

    /// Rotation angle `π/2`.
    pub fn standard(j: f64, k: f64) -> Result<Self> {
        Self::new(j, k, default_p())
    }

    pub fn validate(&self) -> Result<()> {
        twice_spin(self.j)?;
        if !(self.k >= 0.0) || !self.k.is_finite() {
            return Err(Error::domain("k", format!("kick strength must be finite and >= 0, got {}", self.k)));
        }
        if !self.p.is_finite() {
            return Err(Error::domain("p", "rotation angle must be finite"));
        }
        Ok(())
    }

    /// `N = 2j`.
    pub fn n_qubits(&self) -> usize {
        twice_spin(self.j).expect("validated spin")
    }

    pub fn dim(&self) -> usize {
        self.n_qubits() + 1
    }
}

/// Angular-momentum operators and the Floquet operator
/// `U = exp(-i k Jz²/(2j)) exp(-i p Jy)` of one kicked top.
///
/// Basis index `i` is the Dicke level with `i` excitations, i.e. `m = j - i`.
/// `exp(-i p Jy)` is real orthogonal in this basis and is stored as such, so
/// `U = D R` with `D` the diagonal kick phases.
#[derive(Debug, Clone)]
pub struct SpinSystem {
    params: KickedTopParams,
    jx: Mat<c64>,
    jy: Mat<c64>,
    jz: Vec<f64>,
    ladder: Vec<f64>,
    phases: Vec<c64>,
    rotation: Vec<f64>,
    floquet: Mat<c64>,
}

impl SpinSystem {
    pub fn new(params: KickedTopParams) -> Result<Self> {
        Self::with_cap(params, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(params: KickedTopParams, cap: usize) -> Result<Self> {
        params.validate()?;
        let n = params.n_qubits();
        let d = n + 1;
        if d > cap {
            return Err(Error::Capacity {
                field: "j",
                requested: d,
                limit: cap,
            });
        }
        let j = params.j;
        let jz: Vec<f64> = (0..d).map(|i| j - i as f64).collect();
        // ladder[i] = <i-1| J+ |i> for i >= 1
        let ladder: Vec<f64> = (0..d).map(|i| if i == 0 { 0.0 } else { ((i * (n - i + 1)) as f64).sqrt() }).collect();
        let jx = Mat::from_fn(d, d, |r, c| {
            if c == r + 1 {
                c64::new(0.5 * ladder[c], 0.0)
            } else if r == c + 1 {
                c64::new(0.5 * ladder[r], 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        });
        let jy = Mat::from_fn(d, d, |r, c| {
            if c == r + 1 {
                c64::new(0.0, -0.5 * ladder[c])
            } else if r == c + 1 {
                c64::new(0.0, 0.5 * ladder[r])
            } else {
                c64::new(0.0, 0.0)
            }
        });
        let rotation = rotation_about_y(jy.as_ref(), params.p)?;
        let phases: Vec<c64> = jz.iter().map(|m| c64::from_polar(1.0, -params.k * m * m / (2.0 * j))).collect();
        let floquet = Mat::from_fn(d, d, |r, c| phases[r] * rotation[r + c * d]);
        Ok(SpinSystem {
            params,
            jx,
            jy,
            jz,
            ladder,
            phases,
            rotation,
            floquet,
        })
    }

    pub fn params(&self) -> &KickedTopParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.jz.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim() - 1
    }

    pub fn jx(&self) -> MatRef<'_, c64> {
        self.jx.as_ref()
    }

    pub fn jy(&self) -> MatRef<'_, c64> {
        self.jy.as_ref()
    }

    /// Diagonal of `Jz`.
    pub fn jz(&self) -> &[f64] {
        &self.jz
    }

    pub fn jz_matrix(&self) -> Mat<c64> {
        Mat::from_fn(self.dim(), self.dim(), |r, c| if r == c { c64::new(self.jz[r], 0.0) } else { c64::new(0.0, 0.0) })
    }

    /// Superdiagonal of `Jx`: `<i-1|Jx|i>` at index `i` (index 0 unused).
    pub(crate) fn jx_superdiag(&self) -> Vec<f64> {
        self.ladder.iter().map(|l| 0.5 * l).collect()
    }

    /// Diagonal kick phases `exp(-i k m²/(2j))`.
    pub fn phases(&self) -> &[c64] {
        &self.phases
    }

    /// `exp(-i p Jy)`, real orthogonal.
    pub fn rotation(&self) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.rotation, self.dim(), self.dim())
    }

    pub fn floquet(&self) -> MatRef<'_, c64> {
        self.floquet.as_ref()
    }

    /// `max |U†U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        let mut g = Mat::<c64>::zeros(d, d);
        matmul(
            g.as_mut(),
            Accum::Replace,
            self.floquet.adjoint(),
            self.floquet.as_ref(),
            c64::new(1.0, 0.0),
            linalg::par_for(d),
        );
        linalg::identity_defect(g.as_ref())
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::domain(
                "state",
                format!("state dimension {len} does not match 2j+1 = {}", self.dim()),
            ));
        }
        Ok(())
    }

    /// `psi <- U psi`. `scratch` must have the state's length.
    pub fn apply(&self, psi: &mut [c64], scratch: &mut [c64]) {
        let d = self.dim();
        debug_assert_eq!(psi.len(), d);
        scratch.iter_mut().for_each(|s| *s = c64::new(0.0, 0.0));
        for (c, col) in self.rotation.chunks_exact(d).enumerate() {
            let x = psi[c];
            for (s, &r) in scratch.iter_mut().zip(col) {
                *s += x * r;
            }
        }
        for ((p, s), ph) in psi.iter_mut().zip(scratch.iter()).zip(&self.phases) {
            *p = *s * ph;
        }
    }

    /// One Floquet period applied to a state. The norm is not restored.
    pub fn step(&self, state: &PSState) -> Result<PSState> {
        self.check_dim(state.dim())?;
        let mut psi = state.amplitudes().to_vec();
        let mut scratch = vec![c64::new(0.0, 0.0); psi.len()];
        self.apply(&mut psi, &mut scratch);
        Ok(PSState::from_raw(psi))
    }

    /// The trajectory `ψ₀, U ψ₀, …, Uⁿ ψ₀`.
    pub fn evolve(&self, state: &PSState, n_steps: usize) -> Result<Vec<PSState>> {
        let mut out = Vec::with_capacity(n_steps + 1);
        self.for_each_step(state, n_steps, |_, s| {
            out.push(s.clone());
            Ok(())
        })?;
        Ok(out)
    }

    /// Calls `visit(n, ψ_n)` for `n = 0..=n_steps` without storing the
    /// trajectory.
    pub fn for_each_step<F>(&self, state: &PSState, n_steps: usize, mut visit: F) -> Result<()>
    where
        F: FnMut(usize, &PSState) -> Result<()>,
    {
        self.check_dim(state.dim())?;
        let mut current = state.clone();
        let mut scratch = vec![c64::new(0.0, 0.0); state.dim()];
        visit(0, &current)?;
        for n in 1..=n_steps {
            let mut psi = current.into_amplitudes();
            self.apply(&mut psi, &mut scratch);
            current = PSState::from_raw(psi);
            visit(n, &current)?;
        }
        Ok(())
    }

    /// `(⟨Jx⟩, ⟨Jy⟩, ⟨Jz⟩) / j`.
    pub fn spin_expectation(&self, state: &PSState) -> Result<[f64; 3]> {
        self.check_dim(state.dim())?;
        let a = state.amplitudes();
        let mut plus = c64::new(0.0, 0.0);
        for i in 1..a.len() {
            plus += a[i - 1].conj() * a[i] * self.ladder[i];
        }
        let z: f64 = a.iter().zip(&self.jz).map(|(x, m)| x.norm_sqr() * m).sum();
        let j = self.params.j;
        Ok([plus.re / j, plus.im / j, z / j])
    }
}

/// Real orthogonal `exp(-i p Jy)` from the spectral decomposition of `Jy`,
/// column-major.
fn rotation_about_y(jy: MatRef<'_, c64>, p: f64) -> Result<Vec<f64>> {
    let d = jy.nrows();
    let eig = jy
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Integrity(format!("eigendecomposition of Jy failed: {e:?}")))?;
    let u = eig.U();
    let s = eig.S();
    let scaled = Mat::from_fn(d, d, |r, c| u[(r, c)] * c64::from_polar(1.0, -p * s[c].re));
    let mut full = Mat::<c64>::zeros(d, d);
    matmul(full.as_mut(), Accum::Replace, scaled.as_ref(), u.adjoint(), c64::new(1.0, 0.0), linalg::par_for(d));
    let mut out = vec![0.0; d * d];
    let mut worst_imag = 0.0f64;
    for c in 0..d {
        for r in 0..d {
            let v = full[(r, c)];
            worst_imag = worst_imag.max(v.im.abs());
            out[r + c * d] = v.re;
        }
    }
    if worst_imag > 1e-8 {
        return Err(Error::Integrity(format!("exp(-i p Jy) has imaginary part {worst_imag:e}")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::coherent_state;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn params_validation() {
        assert!(KickedTopParams::standard(0.3, 1.0).is_err());
        assert!(KickedTopParams::standard(1.0, -1.0).is_err());
        assert!(KickedTopParams::new(1.0, 1.0, f64::NAN).is_err());
        let p = KickedTopParams::standard(10.0, 6.0).unwrap();
        assert_eq!(p.dim(), 21);
    }

    #[test]
    fn capacity_guard() {
        let p = KickedTopParams::standard(10.0, 6.0).unwrap();
        assert!(matches!(SpinSystem::with_cap(p, 20), Err(Error::Capacity { requested: 21, limit: 20, .. })));
    }

    #[test]
    fn commutation_relation() {
        let sys = SpinSystem::new(KickedTopParams::standard(3.5, 1.0).unwrap()).unwrap();
        let d = sys.dim();
        let (x, y) = (sys.jx(), sys.jy());
        let mut xy = Mat::<c64>::zeros(d, d);
        let mut yx = Mat::<c64>::zeros(d, d);
        matmul(xy.as_mut(), Accum::Replace, x, y, c64::new(1.0, 0.0), faer::Par::Seq);
        matmul(yx.as_mut(), Accum::Replace, y, x, c64::new(1.0, 0.0), faer::Par::Seq);
        for r in 0..d {
            for c in 0..d {
                let comm = xy[(r, c)] - yx[(r, c)];
                let expected = if r == c { c64::new(0.0, sys.jz()[r]) } else { c64::new(0.0, 0.0) };
                assert!((comm - expected).norm() < 1e-9 * 3.5 * 3.5);
            }
        }
    }

    #[test]
    fn spin_half_rotation() {
        let sys = SpinSystem::new(KickedTopParams::new(0.5, 0.0, FRAC_PI_2).unwrap()).unwrap();
        let h = 0.5f64.sqrt();
        let r = sys.rotation();
        // exp(-i π σ_y / 4) = [[c, -s], [s, c]] with c = s = 1/√2
        assert!((r[(0, 0)] - h).abs() < 1e-14);
        assert!((r[(0, 1)] + h).abs() < 1e-14);
        assert!((r[(1, 0)] - h).abs() < 1e-14);
        assert!((r[(1, 1)] - h).abs() < 1e-14);
    }

    #[test]
    fn floquet_is_unitary() {
        for j in [0.5, 1.0, 6.0, 10.0, 37.5] {
            let sys = SpinSystem::new(KickedTopParams::standard(j, 6.0).unwrap()).unwrap();
            assert!(sys.unitarity_defect() < 1e-10, "j={j}");
        }
    }

    #[test]
    fn step_matches_dense_floquet() {
        let sys = SpinSystem::new(KickedTopParams::new(4.0, 2.5, 0.7).unwrap()).unwrap();
        let psi = coherent_state(4.0, 1.1, 0.4).unwrap();
        let stepped = sys.step(&psi).unwrap();
        let u = sys.floquet();
        for r in 0..sys.dim() {
            let mut acc = c64::new(0.0, 0.0);
            for c in 0..sys.dim() {
                acc += u[(r, c)] * psi.amplitudes()[c];
            }
            assert!((acc - stepped.amplitudes()[r]).norm() < 1e-13);
        }
    }

    #[test]
    fn coherent_expectation() {
        let (theta, phi) = (2.25, 0.63);
        let sys = SpinSystem::new(KickedTopParams::standard(10.0, 0.0).unwrap()).unwrap();
        let e = sys.spin_expectation(&coherent_state(10.0, theta, phi).unwrap()).unwrap();
        assert!((e[0] - theta.sin() * phi.cos()).abs() < 1e-12);
        assert!((e[1] - theta.sin() * phi.sin()).abs() < 1e-12);
        assert!((e[2] - theta.cos()).abs() < 1e-12);
    }

    #[test]
    fn evolve_zero_steps_is_identity() {
        let sys = SpinSystem::new(KickedTopParams::standard(2.0, 6.0).unwrap()).unwrap();
        let psi = coherent_state(2.0, 0.3, 0.2).unwrap();
        let traj = sys.evolve(&psi, 0).unwrap();
        assert_eq!(traj, vec![psi]);
        assert!(sys.evolve(&coherent_state(1.5, 0.3, 0.2).unwrap(), 3).is_err());
    }
}
