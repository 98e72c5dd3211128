use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensembles::montecarlo::stream_rng;
use crate::error::{Error, Result};

/// Tolerance on `X² + Y² + Z² = 1`.
pub const SPHERE_TOLERANCE: f64 = 1e-12;

/// A point `J/j` on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ClassicalPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let r2 = x * x + y * y + z * z;
        if !((r2 - 1.0).abs() <= SPHERE_TOLERANCE) {
            return Err(Error::domain("point", format!("|v|² = {r2} is not 1")));
        }
        Ok(ClassicalPoint { x, y, z })
    }

    /// Polar angle `θ` from `+z`, azimuth `φ` from `+x`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        ClassicalPoint {
            x: theta.sin() * phi.cos(),
            y: theta.sin() * phi.sin(),
            z: theta.cos(),
        }
    }

    /// Uniformly distributed on the sphere.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
        let phi = 2.0 * PI * rng.random::<f64>();
        let s = (1.0 - z * z).max(0.0).sqrt();
        ClassicalPoint {
            x: s * phi.cos(),
            y: s * phi.sin(),
            z,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    /// Azimuth in `[0, 2π)`.
    pub fn phi(&self) -> f64 {
        self.y.atan2(self.x).rem_euclid(2.0 * PI)
    }

    fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// Rotation by `p` about `y`, then rotation about `z` by `k Z'`:
///
/// `X₁ = X cos p + Z sin p`, `Y₁ = Y`, `Z₁ = -X sin p + Z cos p`, then
/// `(X', Y') = R_z(k Z₁)(X₁, Y₁)`, `Z' = Z₁`.
pub fn classical_step(point: ClassicalPoint, k: f64, p: f64) -> ClassicalPoint {
    classical_step_with_tangent(point, None, k, p).0
}

fn classical_step_with_tangent(
    point: ClassicalPoint,
    tangent: Option<[f64; 3]>,
    k: f64,
    p: f64,
) -> (ClassicalPoint, Option<[f64; 3]>) {
    let (sp, cp) = p.sin_cos();
    let [x, y, z] = point.as_array();
    let x1 = x * cp + z * sp;
    let y1 = y;
    let z1 = -x * sp + z * cp;
    let (s, c) = (k * z1).sin_cos();
    let out = ClassicalPoint {
        x: x1 * c - y1 * s,
        y: x1 * s + y1 * c,
        z: z1,
    };
    let tangent = tangent.map(|[dx, dy, dz]| {
        let dx1 = dx * cp + dz * sp;
        let dy1 = dy;
        let dz1 = -dx * sp + dz * cp;
        [
            dx1 * c - dy1 * s - k * dz1 * out.y,
            dx1 * s + dy1 * c + k * dz1 * out.x,
            dz1,
        ]
    });
    (out, tangent)
}

/// Orbit `point, f(point), …` of length `n_steps + 1`.
pub fn classical_orbit(point: ClassicalPoint, k: f64, p: f64, n_steps: usize) -> Vec<ClassicalPoint> {
    std::iter::successors(Some(point), |pt| Some(classical_step(*pt, k, p)))
        .take(n_steps + 1)
        .collect()
}

/// Largest Lyapunov exponent along one orbit by tangent-map iteration,
/// renormalizing the tangent vector every step.
pub fn lyapunov_from_point(point: ClassicalPoint, k: f64, p: f64, n_transient: usize, n_average: usize) -> Result<f64> {
    if n_average == 0 {
        return Err(Error::domain("n_average", "need at least one averaging step"));
    }
    let mut pt = point;
    for _ in 0..n_transient {
        pt = classical_step(pt, k, p);
    }
    // any tangent direction: cross product with an axis not parallel to pt
    let axis = if pt.x.abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let v = pt.as_array();
    let mut t = [
        v[1] * axis[2] - v[2] * axis[1],
        v[2] * axis[0] - v[0] * axis[2],
        v[0] * axis[1] - v[1] * axis[0],
    ];
    normalize(&mut t);
    let mut sum = 0.0;
    for _ in 0..n_average {
        let (next, tangent) = classical_step_with_tangent(pt, Some(t), k, p);
        pt = next;
        t = tangent.expect("tangent requested");
        // keep the vector tangent to the sphere
        let v = pt.as_array();
        let radial: f64 = (0..3).map(|i| t[i] * v[i]).sum();
        (0..3).for_each(|i| t[i] -= radial * v[i]);
        sum += normalize(&mut t).ln();
    }
    Ok(sum / n_average as f64)
}

fn normalize(v: &mut [f64; 3]) -> f64 {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    n
}

/// Mean of [`lyapunov_from_point`] over random initial points; trajectory
/// `i` draws its start from stream `i` of `seed`.
pub fn lyapunov_exponent(
    k: f64,
    p: f64,
    n_transient: usize,
    n_average: usize,
    n_trajectories: usize,
    seed: u64,
) -> Result<f64> {
    if n_trajectories == 0 {
        return Err(Error::domain("n_trajectories", "need at least one trajectory"));
    }
    let values: Vec<f64> = (0..n_trajectories)
        .into_par_iter()
        .map(|i| {
            let start = ClassicalPoint::random(&mut stream_rng(seed, i as u64));
            lyapunov_from_point(start, k, p, n_transient, n_average)
        })
        .collect::<Result<_>>()?;
    Ok(values.iter().sum::<f64>() / n_trajectories as f64)
}

/// `ln(2j+1) / λ`.
pub fn ehrenfest_time(j: f64, lambda: f64) -> Result<f64> {
    crate::state::twice_spin(j)?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain("lambda", format!("Lyapunov exponent must be positive, got {lambda}")));
    }
    Ok((2.0 * j + 1.0).ln() / lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortraitPoint {
    pub phi: f64,
    #[serde(rename = "Z")]
    pub z: f64,
    pub trajectory_id: usize,
    pub step: usize,
}

/// `(φ, Z)` along `n_points` random orbits of `n_steps` kicks each.
pub fn phase_portrait(k: f64, p: f64, n_points: usize, n_steps: usize, seed: u64) -> Result<Vec<PortraitPoint>> {
    if n_points == 0 || n_steps == 0 {
        return Err(Error::domain("n_points", "point and step counts must be positive"));
    }
    let orbits: Vec<Vec<PortraitPoint>> = (0..n_points)
        .into_par_iter()
        .map(|id| {
            let start = ClassicalPoint::random(&mut stream_rng(seed, id as u64));
            classical_orbit(start, k, p, n_steps)
                .into_iter()
                .enumerate()
                .map(|(step, pt)| PortraitPoint {
                    phi: pt.phi(),
                    z: pt.z,
                    trajectory_id: id,
                    step,
                })
                .collect()
        })
        .collect();
    Ok(orbits.into_iter().flatten().collect())
}

/// CSV with header `phi,Z,trajectory_id,step`.
pub fn write_portrait_csv<W: Write>(points: &[PortraitPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for pt in points {
        w.serialize(pt).map_err(|e| Error::Integrity(format!("csv write failed: {e}")))?;
    }
    w.flush().map_err(|e| Error::Integrity(format!("csv flush failed: {e}")))?;
    Ok(())
}
