//! Product quadrature on the energy sphere `|m| = √E`: Gauss-Legendre in
//! `cos ϑ` times a uniform azimuthal rule, plus local tensor Lagrange
//! interpolation of grid functions at arbitrary directions.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, lagrange_weights};
use crate::vec3::Vec3;

/// Points per direction in the interpolation stencil.
const STENCIL: usize = 8;

pub type InterpWeights = SmallVec<[(usize, f64); 64]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SphereScheme {
    GlProduct,
}

#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub radius: f64,
    pub n_polar: usize,
    pub n_azimuth: usize,
    /// Polar angles, ascending.
    polar: Vec<f64>,
    /// Node `i * n_azimuth + j` sits at polar index `i`, azimuth `2πj/n_azimuth`.
    pub nodes: Vec<Vec3>,
    pub weights: Vec<f64>,
}

impl SphereGrid {
    /// `n × n` nodes on the sphere of radius `√e`.
    pub fn new(e: f64, n: usize) -> Result<Self> {
        if !(e > 0.0) {
            return Err(Error::config("E", "must be positive"));
        }
        if n < 4 {
            return Err(Error::config("n_sphere", "grid resolutions must be >= 4"));
        }
        let radius = e.sqrt();
        let gl = gauss_legendre(n, -1.0, 1.0);
        // ascending polar angle means descending cos
        let rings: Vec<(f64, f64)> = gl.iter().rev().map(|&(x, w)| (x.acos(), w)).collect();
        let dphi = std::f64::consts::TAU / n as f64;
        let mut nodes = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for &(theta, w) in &rings {
            let (st, ct) = theta.sin_cos();
            for j in 0..n {
                let (sp, cp) = (dphi * j as f64).sin_cos();
                nodes.push(Vec3::new(radius * st * cp, radius * st * sp, radius * ct));
                weights.push(w * dphi * e);
            }
        }
        Ok(SphereGrid {
            radius,
            n_polar: n,
            n_azimuth: n,
            polar: rings.iter().map(|r| r.0).collect(),
            nodes,
            weights,
        })
    }

    pub fn energy(&self) -> f64 {
        self.radius * self.radius
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn polar_angles(&self) -> &[f64] {
        &self.polar
    }

    /// Index of the node `-m`, when the grid contains it.
    pub fn antipode(&self, idx: usize) -> Option<usize> {
        if self.n_azimuth % 2 != 0 {
            return None;
        }
        let (i, j) = (idx / self.n_azimuth, idx % self.n_azimuth);
        let i2 = self.n_polar - 1 - i;
        let j2 = (j + self.n_azimuth / 2) % self.n_azimuth;
        Some(i2 * self.n_azimuth + j2)
    }

    /// Quadrature of a function of the node position.
    pub fn integrate<F: Fn(&Vec3) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(m, w)| w * f(m)).sum()
    }

    /// Interpolation weights for the direction of `x` (its length is ignored).
    ///
    /// Polar stencils that cross a pole continue on the opposite meridian,
    /// which keeps smooth functions on the sphere smooth in the extended
    /// polar variable.
    pub fn interp_weights(&self, x: &Vec3) -> InterpWeights {
        let r = x.norm();
        let theta = (x.0[2] / r).clamp(-1.0, 1.0).acos();
        let phi = x.0[1].atan2(x.0[0]);
        let np = self.n_polar as isize;
        let sp = STENCIL.min(self.n_polar) as isize;

        // extended polar index e: e < 0 mirrors through the north pole,
        // e >= n through the south pole
        let ext = |e: isize| -> (usize, f64, bool) {
            if e < 0 {
                let i = (-1 - e) as usize;
                (i, -self.polar[i], true)
            } else if e >= np {
                let i = (2 * np - 1 - e) as usize;
                (i, std::f64::consts::TAU - self.polar[i], true)
            } else {
                (e as usize, self.polar[e as usize], false)
            }
        };
        let mut e0 = self.polar.partition_point(|&t| t <= theta) as isize - 1;
        // keep the stencil centred on the interval [e0, e0+1]
        e0 -= sp / 2 - 1;
        let rings: Vec<(usize, f64, bool)> = (e0..e0 + sp).map(ext).collect();
        let thetas: Vec<f64> = rings.iter().map(|r| r.1).collect();
        let wp = lagrange_weights(&thetas, theta);

        let mut out = InterpWeights::new();
        for (&(ring, _, flipped), &w_ring) in rings.iter().zip(&wp) {
            let az = if flipped { phi + std::f64::consts::PI } else { phi };
            for (j, w_az) in self.azimuth_weights(az) {
                let w = w_ring * w_az;
                if w != 0.0 {
                    out.push((ring * self.n_azimuth + j, w));
                }
            }
        }
        out
    }

    fn azimuth_weights(&self, phi: f64) -> SmallVec<[(usize, f64); 8]> {
        let n = self.n_azimuth;
        let h = std::f64::consts::TAU / n as f64;
        let t = phi.rem_euclid(std::f64::consts::TAU) / h;
        let j0 = t.floor();
        let s = STENCIL.min(n) as isize;
        let lo = 1 - s / 2;
        let xs: Vec<f64> = (lo..lo + s).map(|d| d as f64).collect();
        let w = lagrange_weights(&xs, t - j0);
        (lo..lo + s)
            .zip(w)
            .map(|(d, w)| (((j0 as isize + d).rem_euclid(n as isize)) as usize, w))
            .collect()
    }

    /// Evaluate the interpolant of `values` (one per node) at direction `x`.
    pub fn interpolate<T>(&self, values: &[T], x: &Vec3) -> T
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::iter::Sum<T>,
    {
        self.interp_weights(x).iter().map(|&(i, w)| values[i] * w).sum()
    }
}
