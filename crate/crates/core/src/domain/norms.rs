//! Discrete weighted sup-norms over grid nodes.

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::{ComplexField2D, PGrid, ScatteringData};

fn checked_max<I: Iterator<Item = (f64, Complex64)>>(it: I) -> Result<f64> {
    let mut best = 0.0f64;
    for (w, v) in it {
        if !v.is_finite() {
            return Err(Error::GridMismatch("corrupt field: non-finite entry".into()));
        }
        best = best.max(w * v.norm());
    }
    Ok(best)
}

/// `max_p (1+|p|)^mu0 |w(p)|`.
pub fn weighted_sup_norm_p(w: &[Complex64], grid: &PGrid, mu0: f64) -> Result<f64> {
    if w.len() != grid.len() {
        return Err(Error::GridMismatch(format!("{} values for {} p-nodes", w.len(), grid.len())));
    }
    checked_max(grid.nodes.iter().zip(w).map(|(p, &v)| ((1.0 + p.norm()).powf(mu0), v)))
}

/// `max_{λ,p} (1+|p|)^mu |U(λ,p)|`.
pub fn triple_norm(u: &ComplexField2D, grid: &PGrid, mu: f64) -> Result<f64> {
    if u.n_p != grid.len() {
        return Err(Error::GridMismatch(format!("{} columns for {} p-nodes", u.n_p, grid.len())));
    }
    let weights: Vec<f64> = grid.nodes.iter().map(|p| (1.0 + p.norm()).powf(mu)).collect();
    checked_max(u.values.iter().enumerate().map(|(i, &v)| (weights[i % u.n_p], v)))
}

/// `max_{k,l} (1+|k-l|²)^{mu/2} |f(k,l)|`.
pub fn sup_norm_me(f: &ScatteringData, mu: f64) -> Result<f64> {
    let n = f.n();
    let nodes = &f.grid.nodes;
    checked_max(f.f.iter().enumerate().map(|(i, &v)| {
        let d = nodes[i / n] - nodes[i % n];
        ((1.0 + d.norm2()).powf(mu / 2.0), v)
    }))
}
