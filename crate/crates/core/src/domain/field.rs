use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::vec3::Vec3;

use super::sphere::SphereGrid;

/// Complex values on (row-node, p-node) pairs, stored row-major. Rows are
/// λ-grid nodes for fields on `C \ T` or circle nodes for boundary data.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField2D {
    pub n_rows: usize,
    pub n_p: usize,
    pub values: Vec<Complex64>,
}

impl ComplexField2D {
    pub fn zeros(n_rows: usize, n_p: usize) -> Self {
        ComplexField2D { n_rows, n_p, values: vec![Complex64::new(0.0, 0.0); n_rows * n_p] }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(n_rows: usize, n_p: usize, mut f: F) -> Self {
        let mut values = Vec::with_capacity(n_rows * n_p);
        for r in 0..n_rows {
            for p in 0..n_p {
                values.push(f(r, p));
            }
        }
        ComplexField2D { n_rows, n_p, values }
    }

    #[inline]
    pub fn get(&self, row: usize, p: usize) -> Complex64 {
        self.values[row * self.n_p + p]
    }

    #[inline]
    pub fn set(&mut self, row: usize, p: usize, v: Complex64) {
        self.values[row * self.n_p + p] = v;
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.values[row * self.n_p..(row + 1) * self.n_p]
    }

    pub fn column(&self, p: usize) -> Vec<Complex64> {
        (0..self.n_rows).map(|r| self.get(r, p)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ComplexField2D { values: self.values.iter().map(|v| v * c).collect(), ..*self }
    }

    pub fn zip_with<F: Fn(Complex64, Complex64) -> Complex64>(&self, o: &Self, f: F) -> Result<Self> {
        if self.n_rows != o.n_rows || self.n_p != o.n_p {
            return Err(Error::GridMismatch(format!(
                "field shapes {}x{} and {}x{}",
                self.n_rows, self.n_p, o.n_rows, o.n_p
            )));
        }
        let values = self.values.iter().zip(&o.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(ComplexField2D { values, ..*self })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.zip_with(o, |a, b| a - b)
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.zip_with(o, |a, b| a + b)
    }
}

/// Scattering amplitude samples `f(k,l)` on grid-node pairs, row index `k`.
#[derive(Debug, Clone)]
pub struct ScatteringData {
    pub e: f64,
    pub grid: SphereGrid,
    pub f: Vec<Complex64>,
}

impl ScatteringData {
    pub fn new(grid: SphereGrid, f: Vec<Complex64>) -> Result<Self> {
        let n = grid.len();
        if f.len() != n * n {
            return Err(Error::GridMismatch(format!(
                "{} samples for a {n}-node sphere grid",
                f.len()
            )));
        }
        Ok(ScatteringData { e: grid.energy(), grid, f })
    }

    pub fn from_fn<F: FnMut(&Vec3, &Vec3) -> Complex64>(grid: SphereGrid, mut f: F) -> Self {
        let mut vals = Vec::with_capacity(grid.len() * grid.len());
        for k in &grid.nodes {
            for l in &grid.nodes {
                vals.push(f(k, l));
            }
        }
        ScatteringData { e: grid.energy(), grid, f: vals }
    }

    pub fn n(&self) -> usize {
        self.grid.len()
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> Complex64 {
        self.f[k * self.n() + l]
    }

    pub fn row(&self, k: usize) -> &[Complex64] {
        let n = self.n();
        &self.f[k * n..(k + 1) * n]
    }

    pub fn map<F: Fn(&Vec3, &Vec3, Complex64) -> Complex64>(&self, f: F) -> Self {
        let n = self.n();
        let vals = self
            .f
            .iter()
            .enumerate()
            .map(|(i, &v)| f(&self.grid.nodes[i / n], &self.grid.nodes[i % n], v))
            .collect();
        ScatteringData { e: self.e, grid: self.grid.clone(), f: vals }
    }

    /// `f(k, ·)` at an arbitrary on-shell `k`, by interpolating rows.
    pub fn row_at(&self, k: &Vec3) -> Vec<Complex64> {
        let n = self.n();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (i, w) in self.grid.interp_weights(k) {
            for (o, v) in out.iter_mut().zip(self.row(i)) {
                *o += v * w;
            }
        }
        out
    }

    /// `f(·, l)` at an arbitrary on-shell `l`, by interpolating columns.
    pub fn column_at(&self, l: &Vec3) -> Vec<Complex64> {
        let n = self.n();
        let w = self.grid.interp_weights(l);
        (0..n)
            .map(|k| {
                let row = self.row(k);
                w.iter().map(|&(i, w)| row[i] * w).sum()
            })
            .collect()
    }

    /// `f(k, l)` at arbitrary on-shell `k`, `l`.
    pub fn value_at(&self, k: &Vec3, l: &Vec3) -> Complex64 {
        let wk = self.grid.interp_weights(k);
        let wl = self.grid.interp_weights(l);
        wk.iter()
            .map(|&(i, a)| {
                let row = self.row(i);
                wl.iter().map(|&(j, b)| row[j] * (a * b)).sum::<Complex64>()
            })
            .sum()
    }
}
