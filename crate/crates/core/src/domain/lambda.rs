//! Polar grid in the spectral variable λ: nodes on the unit circle `T`,
//! rings in the punctured disk `D₊` and rings in the exterior `D₋`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

use super::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Inner,
    Outer,
}

#[derive(Debug, Clone)]
pub struct LambdaGrid {
    pub n_circle: usize,
    pub n_radial: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub eps_t: f64,
    pub circle_nodes: Vec<Complex64>,
    /// Ring radii in `[λ_min, 1-ε_T]`, ascending.
    pub inner_radii: Vec<f64>,
    /// Ring radii in `[1+ε_T, λ_max]`, ascending.
    pub outer_radii: Vec<f64>,
    /// Inner nodes (ring-major), then outer nodes.
    pub nodes: Vec<Complex64>,
    pub area_weights: Vec<f64>,
}

impl LambdaGrid {
    pub fn new(
        n_circle: usize,
        n_radial: usize,
        lambda_min: f64,
        lambda_max: f64,
        eps_t: f64,
    ) -> Result<Self> {
        if n_circle < 4 || n_radial < 1 {
            return Err(Error::config("n_lambda_circle", "grid resolutions must be >= 4"));
        }
        if !(0.0 < lambda_min && lambda_min < 1.0 - eps_t && 1.0 + eps_t < lambda_max) {
            return Err(Error::config("lambda_min", "inconsistent λ-grid bounds"));
        }
        let dth = std::f64::consts::TAU / n_circle as f64;
        let circle_nodes: Vec<Complex64> =
            (0..n_circle).map(|j| Complex64::from_polar(1.0, dth * j as f64)).collect();

        let inner = gauss_legendre(n_radial, lambda_min, 1.0 - eps_t);
        // outer rings: Gauss in s = 1/|λ|, so dA = ds dθ / s³
        let outer_s = gauss_legendre(n_radial, 1.0 / lambda_max, 1.0 / (1.0 + eps_t));

        let mut nodes = Vec::with_capacity(2 * n_radial * n_circle);
        let mut area_weights = Vec::with_capacity(2 * n_radial * n_circle);
        for &(r, w) in &inner {
            for u in &circle_nodes {
                nodes.push(u * r);
                area_weights.push(w * r * dth);
            }
        }
        let mut outer: Vec<(f64, f64)> = outer_s.iter().map(|&(s, w)| (1.0 / s, w / s.powi(3))).collect();
        outer.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(r, w) in &outer {
            for u in &circle_nodes {
                nodes.push(u * r);
                area_weights.push(w * dth);
            }
        }
        Ok(LambdaGrid {
            n_circle,
            n_radial,
            lambda_min,
            lambda_max,
            eps_t,
            circle_nodes,
            inner_radii: inner.iter().map(|x| x.0).collect(),
            outer_radii: outer.iter().map(|x| x.0).collect(),
            nodes,
            area_weights,
        })
    }

    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        Self::new(
            cfg.n_lambda_circle,
            cfg.n_lambda_radial,
            cfg.lambda_min,
            cfg.lambda_max,
            cfg.eps_t,
        )
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_inner(&self) -> usize {
        self.n_radial * self.n_circle
    }

    pub fn side(&self, idx: usize) -> Side {
        if idx < self.n_inner() {
            Side::Inner
        } else {
            Side::Outer
        }
    }

    pub fn range(&self, side: Side) -> std::ops::Range<usize> {
        match side {
            Side::Inner => 0..self.n_inner(),
            Side::Outer => self.n_inner()..self.len(),
        }
    }

    fn index(&self, side: Side, ring: usize, angle: usize) -> usize {
        let base = match side {
            Side::Inner => 0,
            Side::Outer => self.n_inner(),
        };
        base + ring * self.n_circle + angle
    }

    /// Log-polar bilinear interpolation weights at `z`. Points between the
    /// outermost inner ring and `T` (or beyond the last ring) are clamped to
    /// the nearest ring on the same side of `T`.
    pub fn interp_weights(&self, z: Complex64) -> [(usize, f64); 4] {
        let r = z.norm();
        let (side, radii) = if r < 1.0 {
            (Side::Inner, &self.inner_radii)
        } else {
            (Side::Outer, &self.outer_radii)
        };
        let lr = r.max(1e-300).ln();
        let n = radii.len();
        let (i0, i1, t) = if n == 1 || lr <= radii[0].ln() {
            (0, 0, 0.0)
        } else if lr >= radii[n - 1].ln() {
            (n - 1, n - 1, 0.0)
        } else {
            let i = radii.partition_point(|&x| x.ln() <= lr) - 1;
            let (a, b) = (radii[i].ln(), radii[i + 1].ln());
            (i, i + 1, (lr - a) / (b - a))
        };
        let dth = std::f64::consts::TAU / self.n_circle as f64;
        let s = z.arg().rem_euclid(std::f64::consts::TAU) / dth;
        let j0 = (s.floor() as usize) % self.n_circle;
        let j1 = (j0 + 1) % self.n_circle;
        let u = s - s.floor();
        [
            (self.index(side, i0, j0), (1.0 - t) * (1.0 - u)),
            (self.index(side, i0, j1), (1.0 - t) * u),
            (self.index(side, i1, j0), t * (1.0 - u)),
            (self.index(side, i1, j1), t * u),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_area_matches_annulus() {
        let g = LambdaGrid::new(16, 6, 0.05, 20.0, 0.02).unwrap();
        let a: f64 = g.range(Side::Inner).map(|i| g.area_weights[i]).sum();
        let pi = std::f64::consts::PI;
        let exact = pi * 0.98f64.powi(2) - pi * 0.05f64.powi(2);
        assert!((a - exact).abs() < 1e-6 * exact);
        for z in &g.nodes {
            assert!((z.norm() - 1.0).abs() >= 0.02 - 1e-12 && z.norm() > 0.0);
        }
    }

    #[test]
    fn outer_quadrature_integrates_decaying_functions() {
        // ∫∫_{1+ε<|ζ|<20} |ζ|^-4 dA = π((1+ε)^-2 - 20^-2)
        let g = LambdaGrid::new(8, 8, 0.05, 20.0, 0.02).unwrap();
        let s: f64 = g
            .range(Side::Outer)
            .map(|i| g.area_weights[i] * g.nodes[i].norm().powi(-4))
            .sum();
        let exact = std::f64::consts::PI * (1.02f64.powi(-2) - 400f64.recip());
        assert!((s - exact).abs() < 1e-8);
    }

    #[test]
    fn interpolation_hits_nodes() {
        let g = LambdaGrid::new(12, 5, 0.05, 20.0, 0.02).unwrap();
        for idx in [0, 7, 30, 59, 60, 100] {
            let w = g.interp_weights(g.nodes[idx]);
            let hit: f64 = w.iter().filter(|e| e.0 == idx).map(|e| e.1).sum();
            assert!((hit - 1.0).abs() < 1e-9, "{idx}");
        }
    }
}
