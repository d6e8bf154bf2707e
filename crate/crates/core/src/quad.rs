//! One-dimensional quadrature helpers shared by the grids and solvers.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights mapped to `[a, b]`, ascending.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n).expect("at least one node");
    let rule = GaussLegendre::new(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut out: Vec<(f64, f64)> = rule
        .iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect();
    out.sort_by(|l, r| l.0.total_cmp(&r.0));
    out
}

/// Uniform periodic nodes `start + 2πj/n` with equal weights `2π/n`.
pub fn periodic(n: usize, start: f64) -> Vec<(f64, f64)> {
    let h = std::f64::consts::TAU / n as f64;
    (0..n).map(|j| (start + h * j as f64, h)).collect()
}

/// Adaptive double-exponential integral of a smooth function on `[a, b]`.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    quadrature::double_exponential::integrate(f, a, b, abs_tol).integral
}

/// As [`adaptive`], but fails when the error estimate exceeds `abs_tol`.
pub fn adaptive_checked<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let out = quadrature::double_exponential::integrate(f, a, b, abs_tol);
    if !out.integral.is_finite() || out.error_estimate > abs_tol.max(1e-14 * out.integral.abs()) {
        return Err(Error::NotConverged {
            what: "quadrature",
            iterations: out.num_function_evaluations as usize,
            increment: out.error_estimate,
        });
    }
    Ok(out.integral)
}

/// Lagrange basis weights for evaluating at `x` from the nodes `xs`.
pub fn lagrange_weights(xs: &[f64], x: f64) -> Vec<f64> {
    (0..xs.len())
        .map(|i| {
            xs.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| (x - xj) / (xs[i] - xj))
                .product()
        })
        .collect()
}
