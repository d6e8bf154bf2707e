//! From `f` on the energy shell to Faddeev's `h_γ(k,l)` by the equation
//! `h_γ(k,·) = f(k,·) + B_γ(k) h_γ(k,·)`, and from there to the boundary
//! values `H±(λ,p)` on the unit circle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coords::{frame_of, gamma_pm, k_from_lambda};
use crate::domain::{ComplexField2D, LambdaGrid, PGrid, RunConfig, ScatteringData};
use crate::error::{Error, Result};
use crate::vec3::Vec3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `h_γ(k, ·)` on the sphere grid for one `(k, γ)`.
#[derive(Debug, Clone)]
pub struct FaddeevSlice {
    pub k: Vec3,
    pub gamma: Vec3,
    pub h: Vec<Complex64>,
    pub iterations: usize,
    pub last_increment: f64,
    /// `(πi/√E) w_m χ((m-k)·γ)` per node.
    coeffs: Vec<Complex64>,
}

fn sup(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// `γ` is a unit vector orthogonal to `k`, or `k/|k|` itself (where `B_γ`
/// vanishes and `h = f`).
fn check_gamma(k: &Vec3, gamma: &Vec3) -> Result<()> {
    let along = (*gamma - k.unit()).norm() < 1e-10;
    if (gamma.norm() - 1.0).abs() > 1e-10 || (!along && gamma.dot(k).abs() > 1e-10 * k.norm()) {
        return Err(Error::Degenerate(format!("γ = {:?} is neither orthogonal to k nor k/|k|", gamma.0)));
    }
    Ok(())
}

/// Quadrature coefficients of `B_γ(k)`: the step function is 1 where
/// `(m-k)·γ > 0`.
pub fn b_coefficients(f: &ScatteringData, gamma: &Vec3, k: &Vec3) -> Vec<Complex64> {
    let pref = Complex64::new(0.0, PI / f.e.sqrt());
    f.grid
        .nodes
        .iter()
        .zip(&f.grid.weights)
        .map(|(m, w)| if (*m - *k).dot(gamma) > 0.0 { pref * *w } else { ZERO })
        .collect()
}

fn apply_coeffs(f: &ScatteringData, coeffs: &[Complex64], u: &[Complex64]) -> Vec<Complex64> {
    let n = f.n();
    let mut out = vec![ZERO; n];
    for (m, (c, um)) in coeffs.iter().zip(u).enumerate() {
        let a = c * um;
        if a == ZERO {
            continue;
        }
        for (o, fv) in out.iter_mut().zip(f.row(m)) {
            *o += a * fv;
        }
    }
    out
}

/// `(B_γ(k)U)(l) = (πi/√E) ∫_{S²} U(m) χ((m-k)·γ) f(m,l) dm`.
pub fn apply_b_gamma(f: &ScatteringData, gamma: &Vec3, k: &Vec3, u: &[Complex64]) -> Vec<Complex64> {
    apply_coeffs(f, &b_coefficients(f, gamma, k), u)
}

/// Successive approximations for `h = rhs + B h`, stopping on a relative
/// increment below `tol`.
fn iterate(
    f: &ScatteringData,
    coeffs: &[Complex64],
    rhs: &[Complex64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<Complex64>, usize, f64)> {
    let scale = sup(rhs);
    let mut h = rhs.to_vec();
    if scale == 0.0 {
        return Ok((h, 1, 0.0));
    }
    let mut term = rhs.to_vec();
    let mut prev = scale;
    let mut growing = 0;
    for it in 1..=max_iter {
        term = apply_coeffs(f, coeffs, &term);
        for (a, b) in h.iter_mut().zip(&term) {
            *a += b;
        }
        let inc = sup(&term);
        if inc <= tol * scale {
            return Ok((h, it, inc));
        }
        if inc >= prev {
            growing += 1;
            if growing >= 3 {
                return Err(Error::Diverged { what: "Faddeev", iterations: it, ratio: inc / prev });
            }
        } else {
            growing = 0;
        }
        prev = inc;
    }
    Err(Error::NotConverged { what: "Faddeev", iterations: max_iter, increment: prev })
}

/// Solve for `h_γ(k, ·)`. `k` must lie on the sphere; off-grid `k` uses an
/// interpolated row of `f`.
pub fn solve_h_gamma(f: &ScatteringData, gamma: &Vec3, k: &Vec3, cfg: &RunConfig) -> Result<FaddeevSlice> {
    check_gamma(k, gamma)?;
    let row = f.row_at(k);
    solve_with_row(f, gamma, k, &row, cfg)
}

fn solve_with_row(
    f: &ScatteringData,
    gamma: &Vec3,
    k: &Vec3,
    row: &[Complex64],
    cfg: &RunConfig,
) -> Result<FaddeevSlice> {
    let coeffs = b_coefficients(f, gamma, k);
    let (h, iterations, last_increment) = iterate(f, &coeffs, row, cfg.fp_tol, cfg.fp_max_iter)?;
    Ok(FaddeevSlice { k: *k, gamma: *gamma, h, iterations, last_increment, coeffs })
}

impl FaddeevSlice {
    /// `h_γ(k, l)` at an arbitrary on-shell `l` from the equation itself:
    /// `f(k,l) + (πi/√E) Σ_m w_m χ h(k,m) f(m,l)`.
    pub fn eval_at(&self, f: &ScatteringData, l: &Vec3) -> Complex64 {
        let col = f.column_at(l);
        self.eval_with(f.value_at(&self.k, l), &col)
    }

    fn eval_with(&self, f_kl: Complex64, col: &[Complex64]) -> Complex64 {
        f_kl + self
            .coeffs
            .iter()
            .zip(&self.h)
            .zip(col)
            .map(|((c, h), fm)| c * h * fm)
            .sum::<Complex64>()
    }
}

/// `h^{(n)} = Σ_{j≤n} B^j f(k,·)`.
pub fn h_series(f: &ScatteringData, gamma: &Vec3, k: &Vec3, n: usize) -> Vec<Complex64> {
    let coeffs = b_coefficients(f, gamma, k);
    let mut term = f.row_at(k);
    let mut h = term.clone();
    for _ in 0..n {
        term = apply_coeffs(f, &coeffs, &term);
        for (a, b) in h.iter_mut().zip(&term) {
            *a += b;
        }
    }
    h
}

/// Remainder `t^{(n)} = h - h^{(n)}`, solved from `t = B^{n+1} f + B t`.
pub fn remainder_t(f: &ScatteringData, gamma: &Vec3, k: &Vec3, n: usize, cfg: &RunConfig) -> Result<Vec<Complex64>> {
    check_gamma(k, gamma)?;
    let coeffs = b_coefficients(f, gamma, k);
    let mut term = f.row_at(k);
    for _ in 0..=n {
        term = apply_coeffs(f, &coeffs, &term);
    }
    Ok(iterate(f, &coeffs, &term, cfg.fp_tol, cfg.fp_max_iter)?.0)
}

/// Weighted sup-norm operator bound of `B_γ(k)`:
/// `max_l Σ_m (1+|k-l|²)^{μ/2} (1+|k-m|²)^{-μ/2} |c_m f(m,l)|`.
pub fn b_gamma_norm(f: &ScatteringData, gamma: &Vec3, k: &Vec3, mu: f64) -> f64 {
    let coeffs = b_coefficients(f, gamma, k);
    let nodes = &f.grid.nodes;
    let wt: Vec<f64> = nodes.iter().map(|m| (1.0 + (*k - *m).norm2()).powf(mu / 2.0)).collect();
    let mut col_sums = vec![0.0; f.n()];
    for (m, c) in coeffs.iter().enumerate() {
        if *c == ZERO {
            continue;
        }
        let a = c.norm() / wt[m];
        for (s, fv) in col_sums.iter_mut().zip(f.row(m)) {
            *s += a * fv.norm();
        }
    }
    col_sums.iter().zip(&wt).fold(0.0f64, |acc, (s, w)| acc.max(s * w))
}

/// `H±(λ,p) = h_{γ±}(k, k-p)` with `k = k(λ,p)` real for `λ ∈ T`.
pub fn h_pm_on_t(f: &ScatteringData, lambda: Complex64, p: &Vec3, cfg: &RunConfig) -> Result<(Complex64, Complex64)> {
    let frame = frame_of(p, &cfg.nu())?;
    let k = k_from_lambda(lambda, f.e, &frame)?.re();
    let (gp, gm) = gamma_pm(lambda, f.e, &frame)?;
    let l = k - *p;
    let row = f.row_at(&k);
    let col = f.column_at(&l);
    let f_kl = f.value_at(&k, &l);
    let plus = solve_with_row(f, &gp, &k, &row, cfg)?.eval_with(f_kl, &col);
    let minus = solve_with_row(f, &gm, &k, &row, cfg)?.eval_with(f_kl, &col);
    Ok((plus, minus))
}

/// `H±` on every (circle node, p-node) pair.
pub fn boundary_data(
    f: &ScatteringData,
    lgrid: &LambdaGrid,
    pgrid: &PGrid,
    cfg: &RunConfig,
) -> Result<(ComplexField2D, ComplexField2D)> {
    let nc = lgrid.n_circle;
    let np = pgrid.len();
    let cols: Vec<Vec<(Complex64, Complex64)>> = pgrid
        .nodes
        .par_iter()
        .map(|p| {
            lgrid
                .circle_nodes
                .iter()
                .map(|&z| h_pm_on_t(f, z, p, cfg))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let plus = ComplexField2D::from_fn(nc, np, |c, p| cols[p][c].0);
    let minus = ComplexField2D::from_fn(nc, np, |c, p| cols[p][c].1);
    Ok((plus, minus))
}

/// Piecewise-linear cutoff: 1 on `[0,s1]`, linear to 0 on `[s1,s2]`.
pub fn taper_u(s: f64, s1: f64, s2: f64) -> f64 {
    if s <= s1 {
        1.0
    } else if s >= s2 {
        0.0
    } else {
        (s2 - s) / (s2 - s1)
    }
}

/// `f̃(k,l) = f(k,l) u(|k-l|, 2τ₀√E, 2τ√E)`.
pub fn taper_f(f: &ScatteringData, tau0: f64, tau: f64) -> Result<ScatteringData> {
    if !(0.0 < tau0 && tau0 < tau && tau < 1.0) {
        return Err(Error::config("tau0", "need 0 < tau0 < tau < 1"));
    }
    let k0 = f.e.sqrt();
    let (s1, s2) = (2.0 * tau0 * k0, 2.0 * tau * k0);
    Ok(f.map(|k, l, v| v * taper_u((*k - *l).norm(), s1, s2)))
}
