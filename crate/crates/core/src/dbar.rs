//! The nonlinear ∂̄ problem in λ: the bilinear bracket, the Cauchy data
//! `H⁰` built from boundary values on `T`, the area Cauchy operator `M`
//! and the successive approximations `H̃ = H⁰ + M(H̃)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::coords::{frame_of, k_from_lambda, z_pair, CharCircle, ComplexMomentum};
use crate::domain::{triple_norm, ComplexField2D, LambdaGrid, PGrid, RunConfig, Side};
use crate::error::{Error, Result};
use crate::forward::{complex_k_solver, TorusRule};
use crate::potentials::AnalyticPotential;
use crate::quad::{gauss_legendre, periodic};
use crate::vec3::Vec3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The three grids every ∂̄ operation works on.
#[derive(Debug, Clone)]
pub struct DbarGrids {
    pub cfg: RunConfig,
    pub lgrid: LambdaGrid,
    pub pgrid: PGrid,
}

impl DbarGrids {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(DbarGrids { cfg: cfg.clone(), lgrid: LambdaGrid::from_config(cfg)?, pgrid: PGrid::from_config(cfg)? })
    }

    fn check(&self, u: &ComplexField2D) -> Result<()> {
        if u.n_rows != self.lgrid.len() || u.n_p != self.pgrid.len() {
            return Err(Error::GridMismatch(format!(
                "field {}x{} on a {}x{} λ×p grid",
                u.n_rows,
                u.n_p,
                self.lgrid.len(),
                self.pgrid.len()
            )));
        }
        Ok(())
    }
}

/// A bracket value with the number of φ-nodes dropped as off-chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketValue {
    pub value: Complex64,
    pub skipped: usize,
}

/// `−π/4 · w(φ)` without the `U` factors.
pub fn bracket_weight(lambda: Complex64, p: &Vec3, e: f64, phi: f64) -> Complex64 {
    let r = lambda.norm();
    let sgn = if r > 1.0 { 1.0 } else { -1.0 };
    let chord = (e - p.norm2() / 4.0).max(0.0).sqrt();
    let lb = lambda.conj();
    let (s, c) = phi.sin_cos();
    let w = lb.inv() * (chord * sgn * (r * r + 1.0) / r * (c - 1.0) - p.norm() * s);
    w * (-PI / 4.0)
}

/// φ-intervals where both `|ξ(φ)| ≤ R` and `|p + ξ(φ)| ≤ R`. `None` for
/// the whole circle.
fn phi_windows(circle: &CharCircle, p: &Vec3, radius: f64) -> Option<SmallVec<[(f64, f64); 3]>> {
    let rk = circle.re_k.norm();
    let a = 2.0 * (radius / (2.0 * rk)).min(1.0).asin();
    if a >= PI {
        return None;
    }
    let psi = circle.psi_of(p);
    let mut out = SmallVec::new();
    for shift in [-TAU, 0.0, TAU] {
        let lo = (psi + shift - a).max(-a);
        let hi = (psi + shift + a).min(a);
        if hi > lo {
            out.push((lo, hi));
        }
    }
    Some(out)
}

/// `−π/4 ∫ w(φ) G(ξ(φ)) dφ` where `G` is supplied by `product`, which returns
/// `None` for nodes to skip. With `cutoff = Some(R)` the integral runs over
/// the φ-set where `ξ` and `p+ξ` both lie in the ball of radius `R`.
pub fn bracket_with<F>(
    lambda: Complex64,
    p: &Vec3,
    cfg: &RunConfig,
    cutoff: Option<f64>,
    mut product: F,
) -> Result<BracketValue>
where
    F: FnMut(&ComplexMomentum, &Vec3) -> Option<Complex64>,
{
    let frame = frame_of(p, &cfg.nu())?;
    let k = k_from_lambda(lambda, cfg.e, &frame)?;
    let circle = CharCircle::new(&k)?;
    let windows = cutoff.and_then(|r| phi_windows(&circle, p, r));
    let nodes: Vec<(f64, f64)> = match windows {
        None => periodic(cfg.n_phi.max(4), -PI),
        Some(w) => w.iter().flat_map(|&(a, b)| gauss_legendre(cfg.n_phi, a, b)).collect(),
    };
    let mut value = ZERO;
    let mut skipped = 0;
    for (phi, dw) in nodes {
        let xi = circle.at(phi);
        match product(&k, &xi) {
            Some(g) => value += bracket_weight(lambda, p, cfg.e, phi) * g * dw,
            None => skipped += 1,
        }
    }
    Ok(BracketValue { value, skipped })
}

/// `U(z, q)`: log-polar bilinear in λ, trilinear in `p`, zero outside the ball.
pub fn field_eval(u: &ComplexField2D, grids: &DbarGrids, z: Complex64, q: &Vec3) -> Complex64 {
    let Some(pw) = grids.pgrid.interp_weights(q) else {
        return ZERO;
    };
    let mut out = ZERO;
    for (row, a) in grids.lgrid.interp_weights(z) {
        if a == 0.0 {
            continue;
        }
        let r = u.row(row);
        for &(j, b) in &pw {
            out += r[j] * (a * b);
        }
    }
    out
}

/// `(U₁, U₂)(λ, p)` with the ball cutoffs.
pub fn bilinear_bracket(
    u1: &ComplexField2D,
    u2: &ComplexField2D,
    lambda: Complex64,
    p: &Vec3,
    grids: &DbarGrids,
) -> Result<BracketValue> {
    let nu = grids.cfg.nu();
    bracket_with(lambda, p, &grids.cfg, Some(grids.cfg.ball_radius()), |k, xi| {
        let (z1, z2) = z_pair(k, xi, p, &nu).ok()?;
        let q1 = -*xi;
        let q2 = *p + *xi;
        Some(field_eval(u1, grids, z1, &q1) * field_eval(u2, grids, z2, &q2))
    })
}

/// The bracket at every (λ-node, p-node). Returns the field and the total
/// number of skipped φ-nodes.
pub fn bracket_field(u1: &ComplexField2D, u2: &ComplexField2D, grids: &DbarGrids) -> Result<(ComplexField2D, usize)> {
    grids.check(u1)?;
    grids.check(u2)?;
    let n_p = grids.pgrid.len();
    let vals: Vec<BracketValue> = (0..grids.lgrid.len() * n_p)
        .into_par_iter()
        .map(|i| {
            let lambda = grids.lgrid.nodes[i / n_p];
            let p = grids.pgrid.nodes[i % n_p];
            bilinear_bracket(u1, u2, lambda, &p, grids).unwrap_or(BracketValue { value: ZERO, skipped: 1 })
        })
        .collect();
    let skipped = vals.iter().map(|b| b.skipped).sum();
    let values = vals.into_iter().map(|b| b.value).collect();
    Ok((ComplexField2D { n_rows: grids.lgrid.len(), n_p, values }, skipped))
}

/// Fourier coefficients `c_m` of samples on equispaced circle nodes,
/// returned in FFT order (`m = 0..N/2`, then negative `m`).
fn fourier_coefficients(samples: &[Complex64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().map(|c| c / n as f64).collect()
}

/// Cauchy integral of trigonometric data, one side of `T`.
#[derive(Debug, Clone)]
pub struct CircleSeries {
    coeffs: Vec<Complex64>,
}

impl CircleSeries {
    pub fn new(samples: &[Complex64]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::GridMismatch("need at least two circle samples".into()));
        }
        Ok(CircleSeries { coeffs: fourier_coefficients(samples) })
    }

    fn n(&self) -> usize {
        self.coeffs.len()
    }

    /// `c_m` for `-N/2 ≤ m ≤ N/2`, the Nyquist mode split between `±N/2`.
    fn coeff(&self, m: i64) -> Complex64 {
        let n = self.n() as i64;
        let idx = m.rem_euclid(n) as usize;
        if n % 2 == 0 && m.abs() == n / 2 {
            self.coeffs[idx] * 0.5
        } else {
            self.coeffs[idx]
        }
    }

    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// `(1/2πi) ∮ g dζ/(ζ-λ)` for `|λ| < 1`, or `-(λ/2πi) ∮ g dζ/(ζ(ζ-λ))`
    /// for `|λ| > 1`.
    pub fn cauchy(&self, lambda: Complex64) -> Complex64 {
        let half = self.n() as i64 / 2;
        if lambda.norm() < 1.0 {
            let mut acc = ZERO;
            for m in (0..=half).rev() {
                acc = acc * lambda + self.coeff(m);
            }
            acc
        } else {
            let inv = lambda.inv();
            let mut acc = ZERO;
            for m in (0..=half).rev() {
                acc = acc * inv + self.coeff(-m);
            }
            acc
        }
    }
}

/// Cauchy data `H⁰(λ, p)` off `T`: from `H₊` samples inside, `H₋` outside.
pub fn cauchy_boundary_h0(
    hplus: &[Complex64],
    hminus: &[Complex64],
    lambda: Complex64,
    eps_t: f64,
) -> Result<Complex64> {
    let r = lambda.norm();
    if (r - 1.0).abs() < eps_t || r == 0.0 {
        return Err(Error::Degenerate(format!("|λ| = {r} too close to T or 0, use boundary-limit op")));
    }
    let samples = if r < 1.0 { hplus } else { hminus };
    Ok(CircleSeries::new(samples)?.cauchy(lambda))
}

/// `H⁰` on every λ-node from boundary fields with rows = circle nodes.
pub fn h0_field(hplus: &ComplexField2D, hminus: &ComplexField2D, grids: &DbarGrids) -> Result<ComplexField2D> {
    let lg = &grids.lgrid;
    let n_p = grids.pgrid.len();
    for h in [hplus, hminus] {
        if h.n_rows != lg.n_circle || h.n_p != n_p {
            return Err(Error::GridMismatch(format!(
                "boundary field {}x{} for {} circle nodes and {} p-nodes",
                h.n_rows, h.n_p, lg.n_circle, n_p
            )));
        }
    }
    let cols: Vec<Vec<Complex64>> = (0..n_p)
        .into_par_iter()
        .map(|j| -> Result<Vec<Complex64>> {
            let sp = CircleSeries::new(&hplus.column(j))?;
            let sm = CircleSeries::new(&hminus.column(j))?;
            Ok(lg
                .nodes
                .iter()
                .enumerate()
                .map(|(i, &z)| match lg.side(i) {
                    Side::Inner => sp.cauchy(z),
                    Side::Outer => sm.cauchy(z),
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(ComplexField2D::from_fn(lg.len(), n_p, |i, j| cols[j][i]))
}

/// Boundary value of `H⁰` at circle node `t0` from the given side, from
/// samples `g` on the `N` circle nodes:
/// inside `½g + P`, outside `½g - (P - c₀)`, where
/// `P = (1/2πi) p.v.∮ g dζ/(ζ-λ₀)` and `c₀` is the mean of `g`.
///
/// The principal value is taken on the arc `|ζ-λ₀| ≤ E^{-1/2}` by pairing
/// `t₀ ± u`; the rest of the circle uses a regular Gauss rule. Off-node
/// values come from the trigonometric interpolant.
pub fn boundary_limit_h0(samples: &[Complex64], t0: usize, side: Side, e: f64) -> Result<Complex64> {
    let n = samples.len();
    if t0 >= n {
        return Err(Error::GridMismatch(format!("circle node {t0} of {n}")));
    }
    let series = CircleSeries::new(samples)?;
    let th0 = TAU * t0 as f64 / n as f64;
    let half = n as i64 / 2;
    let g = |t: f64| -> Complex64 {
        (-half..=half).map(|m| series.coeff(m) * Complex64::from_polar(1.0, m as f64 * t)).sum()
    };
    // (1/2πi) dζ/(ζ-λ₀) = (1/2π)(½ - (i/2)cot(u/2)) du
    let arc = 2.0 * (0.5 / e.sqrt()).min(1.0).asin();
    let order = (n + 8).max(16);
    let mut pv = ZERO;
    for (u, w) in gauss_legendre(order, 0.0, arc) {
        let (gp, gm) = (g(th0 + u), g(th0 - u));
        let cot = (u / 2.0).tan().recip();
        pv += ((gp + gm) * 0.5 + (gp - gm) * Complex64::new(0.0, -0.5 * cot)) * w;
    }
    if arc < PI {
        for (u, w) in gauss_legendre(2 * order, arc, TAU - arc) {
            let cot = (u / 2.0).tan().recip();
            pv += g(th0 + u) * Complex64::new(0.5, -0.5 * cot) * w;
        }
    }
    pv /= TAU;
    let g0 = samples[t0];
    Ok(match side {
        Side::Inner => g0 * 0.5 + pv,
        Side::Outer => g0 * 0.5 - (pv - series.mean()),
    })
}

/// Coefficient of `(1+|p|)^{-μ}` in the `H⁰` cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapBound {
    /// Data norm `N`.
    pub n: f64,
    pub eta: f64,
    pub delta: f64,
}

impl CapBound {
    pub fn coefficient(&self, cfg: &RunConfig) -> f64 {
        let base = 2f64.powf(cfg.mu / 2.0) * self.n;
        if cfg.c7 == 0.0 {
            return base;
        }
        let denom = (1.0 - self.eta).powi(2) * (1.0 - self.delta) * cfg.e.powf(cfg.beta / 2.0);
        base + cfg.c7 * self.n * self.n / denom
    }
}

/// Rescale values above `B(p)` to magnitude `B(p)`, keeping their phase.
/// Returns the capped field and the number of changed values.
pub fn cap_h0(h0: &ComplexField2D, bound: &CapBound, pgrid: &PGrid, cfg: &RunConfig) -> (ComplexField2D, usize) {
    let coef = bound.coefficient(cfg);
    let b: Vec<f64> = pgrid.nodes.iter().map(|p| coef * (1.0 + p.norm()).powf(-cfg.mu)).collect();
    let mut out = h0.clone();
    let mut changed = 0;
    for (i, v) in out.values.iter_mut().enumerate() {
        let bp = b[i % h0.n_p];
        let m = v.norm();
        if m > bp * (1.0 + 1e-12) {
            *v *= bp / m;
            changed += 1;
        }
    }
    (out, changed)
}

/// `∫∫ dA/(ζ-λ)` over the annulus `r_lo < |ζ| < r_hi` containing `λ`.
fn annulus_cauchy(lambda: Complex64, r_lo: f64) -> Complex64 {
    -PI * lambda.conj() + PI * r_lo * r_lo / lambda
}

/// Area Cauchy transform of a bracket field: `-(1/π)∫∫_{D₊} g/(ζ-λ)` on
/// inner nodes and `-(1/π)∫∫_{D₋} g λ/(ζ(ζ-λ))` on outer nodes. The pole is
/// removed by subtracting `g(λ)` and adding it back through the closed
/// form over the quadrature annulus.
pub fn area_cauchy(g: &ComplexField2D, grids: &DbarGrids) -> Result<ComplexField2D> {
    grids.check(g)?;
    let lg = &grids.lgrid;
    let n_p = g.n_p;
    let n_lam = lg.len();
    let r_lo = |side| match side {
        Side::Inner => lg.lambda_min,
        Side::Outer => 1.0 + lg.eps_t,
    };
    let rows: Vec<Vec<Complex64>> = (0..n_lam)
        .into_par_iter()
        .map(|i| {
            let lam = lg.nodes[i];
            let side = lg.side(i);
            let range = lg.range(side);
            let mut acc = vec![ZERO; n_p];
            let mut diag = ZERO;
            for j in range {
                let zeta = lg.nodes[j];
                let extra = match side {
                    Side::Inner => ZERO,
                    Side::Outer => zeta.inv() * lg.area_weights[j],
                };
                let kern = if j == i { ZERO } else { (zeta - lam).inv() * lg.area_weights[j] };
                diag += kern;
                let row = g.row(j);
                for (a, &v) in acc.iter_mut().zip(row) {
                    *a += v * (kern - extra);
                }
            }
            // Σ_j w_j (g_j - g_i)/(ζ_j - λ) + g_i I(λ)
            let corr = annulus_cauchy(lam, r_lo(side)) - diag;
            let gi = g.row(i);
            acc.iter().zip(gi).map(|(a, &v)| -(a + v * corr) / PI).collect()
        })
        .collect();
    Ok(ComplexField2D::from_fn(n_lam, n_p, |i, j| rows[i][j]))
}

/// `M(U)` with the bracket `(U, U)`.
pub fn apply_m(u: &ComplexField2D, grids: &DbarGrids) -> Result<ComplexField2D> {
    let (b, _) = bracket_field(u, u, grids)?;
    area_cauchy(&b, grids)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DbarDiagnostics {
    pub iterations: usize,
    pub contraction_estimate: f64,
    /// Final increment relative to the norm of `H⁰`.
    pub residual: f64,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    /// Increment norms, one per iteration.
    pub increments: Vec<f64>,
    pub skipped_nodes: usize,
}

#[derive(Debug, Clone)]
pub struct DbarState {
    pub h0: ComplexField2D,
    pub htilde: ComplexField2D,
    /// Bracket `(H̃, H̃)` of the final iterate.
    pub bracket: ComplexField2D,
    pub diagnostics: DbarDiagnostics,
}

/// Successive approximations `H̃ ← H⁰ + M(H̃)` from `H̃ = 0`. Stops when the
/// increment's weighted sup norm drops below `fp_tol` times that of `H⁰`.
pub fn solve_fixed_point(h0: &ComplexField2D, grids: &DbarGrids) -> Result<DbarState> {
    grids.check(h0)?;
    let cfg = &grids.cfg;
    let scale = triple_norm(h0, &grids.pgrid, cfg.mu0)?;
    let mut diag = DbarDiagnostics::default();
    let mut h = ComplexField2D::zeros(h0.n_rows, h0.n_p);
    if scale == 0.0 {
        diag.iterations = 1;
        return Ok(DbarState { h0: h0.clone(), bracket: h.clone(), htilde: h, diagnostics: diag });
    }
    let mut growth = 0;
    let bracket;
    loop {
        let (b, skipped) = bracket_field(&h, &h, grids)?;
        diag.skipped_nodes = skipped;
        let next = h0.add(&area_cauchy(&b, grids)?)?;
        let inc = triple_norm(&next.sub(&h)?, &grids.pgrid, cfg.mu0)?;
        h = next;
        diag.iterations += 1;
        if let Some(&prev) = diag.increments.last() {
            if prev > 0.0 && diag.increments.len() >= 2 {
                let q = inc / prev;
                diag.contraction_estimate = q;
                growth = if q >= 1.0 { growth + 1 } else { 0 };
            }
        }
        diag.increments.push(inc);
        diag.residual = inc / scale;
        if growth >= 3 {
            return Err(Error::Diverged {
                what: "dbar",
                iterations: diag.iterations,
                ratio: diag.contraction_estimate,
            });
        }
        if diag.residual < cfg.fp_tol {
            let (b, _) = bracket_field(&h, &h, grids)?;
            bracket = b;
            break;
        }
        if diag.iterations >= cfg.fp_max_iter {
            return Err(Error::NotConverged { what: "dbar", iterations: diag.iterations, increment: diag.residual });
        }
    }
    Ok(DbarState { h0: h0.clone(), htilde: h, bracket, diagnostics: diag })
}

/// `r₂ = 2^{μ/2}N/(1-η)` and the empirical `r₁`.
pub fn radii(n: f64, eta: f64, c4: f64, c5: f64, cfg: &RunConfig) -> (f64, f64) {
    let a = 2f64.powf(cfg.mu / 2.0) * n;
    let r2 = a / (1.0 - eta);
    let cap = CapBound { n, eta, delta: 0.0 }.coefficient(cfg) - a;
    let tail = 3.0 * c5 * c4 * 2f64.powf(cfg.mu) * n * n
        / ((1.0 - eta).powi(2) * (1.0 + 2.0 * cfg.tau * cfg.k0()).powf(cfg.mu - cfg.mu0));
    (2.0 * (a + cap + tail), r2)
}

/// `sup_{λ ∈ D₊} (1/π) ∫∫_{D₊} dA / ((1+|ζ|²)|ζ-λ|)`, by polar coordinates
/// centred at `λ` (which cancel the singularity) and a radial scan.
pub fn c5_quadrature(n: usize) -> f64 {
    let inner = |r0: f64| -> f64 {
        let mut acc = 0.0;
        for (th, wt) in periodic(2 * n, 0.0) {
            let (s, c) = th.sin_cos();
            let b = r0 * c;
            let rho_max = -b + (b * b + 1.0 - r0 * r0).sqrt();
            for (rho, wr) in gauss_legendre(n, 0.0, rho_max) {
                let x = r0 + rho * c;
                let y = rho * s;
                acc += wt * wr / (1.0 + x * x + y * y);
            }
        }
        acc / PI
    };
    let scan: Vec<f64> = (0..=2 * n).map(|i| i as f64 / (2 * n) as f64 * 0.999).collect();
    scan.iter().map(|&r| inner(r)).fold(0.0, f64::max)
}

/// `max |(U,U)(λ,p)| (1+|p|)^μ (1+|λ|²) / |||U|||²` over grid nodes.
pub fn empirical_c4(u: &ComplexField2D, bracket: &ComplexField2D, grids: &DbarGrids) -> Result<f64> {
    let nu = triple_norm(u, &grids.pgrid, grids.cfg.mu)?;
    if nu == 0.0 {
        return Ok(0.0);
    }
    let n_p = bracket.n_p;
    let m = bracket
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let lam = grids.lgrid.nodes[i / n_p];
            let p = grids.pgrid.nodes[i % n_p];
            v.norm() * (1.0 + p.norm()).powf(grids.cfg.mu) * (1.0 + lam.norm_sqr())
        })
        .fold(0.0, f64::max);
    Ok(m / (nu * nu))
}

/// Finite-difference `∂H/∂λ̄` of the exact `H(k(λ,p), p)` against the
/// uncut bracket of the exact `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbarResidual {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub skipped: usize,
}

impl DbarResidual {
    pub fn residual(&self) -> Complex64 {
        self.lhs - self.rhs
    }
}

pub fn dbar_residual(
    pot: &AnalyticPotential,
    lambda: Complex64,
    p: &Vec3,
    step: f64,
    cfg: &RunConfig,
    rule: &TorusRule,
) -> Result<DbarResidual> {
    let r = lambda.norm();
    if r - step <= 0.0 || (r - 1.0).abs() <= step * std::f64::consts::SQRT_2 {
        return Err(Error::Degenerate(format!("finite-difference stencil at |λ| = {r} crosses T or 0")));
    }
    let frame = frame_of(p, &cfg.nu())?;
    let h_at = |l: Complex64| -> Result<Complex64> {
        let k = k_from_lambda(l, cfg.e, &frame)?;
        Ok(complex_k_solver(pot, &k, cfg, rule)?.eval(pot, p))
    };
    let dx = (h_at(lambda + step)? - h_at(lambda - step)?) / (2.0 * step);
    let dy = (h_at(lambda + Complex64::new(0.0, step))? - h_at(lambda - Complex64::new(0.0, step))?) / (2.0 * step);
    let lhs = (dx + Complex64::new(0.0, 1.0) * dy) * 0.5;

    let k = k_from_lambda(lambda, cfg.e, &frame)?;
    let base = complex_k_solver(pot, &k, cfg, rule)?;
    let mut err = None;
    let b = bracket_with(lambda, p, cfg, None, |k, xi| {
        let k2 = ComplexMomentum { k: k.k.add_real(xi), e: k.e };
        let u1 = base.eval(pot, &(-*xi));
        match complex_k_solver(pot, &k2, cfg, rule) {
            Ok(s) => Some(u1 * s.eval(pot, &(*p + *xi))),
            Err(e) => {
                err.get_or_insert(e);
                None
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(DbarResidual { lhs, rhs: b.value, skipped: b.skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn circle(n: usize) -> Vec<Complex64> {
        (0..n).map(|j| Complex64::from_polar(1.0, TAU * j as f64 / n as f64)).collect()
    }

    fn cfg() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.n_lambda_circle = 8;
        cfg.n_lambda_radial = 4;
        cfg.n_p = 4;
        cfg
    }

    #[test]
    fn cauchy_data_reproduces_holomorphic_parts() {
        let t = circle(16);
        let k = c(0.3, -1.2);
        let cst = vec![k; 16];
        for lam in [c(0.3, 0.2), c(-0.5, 0.6), c(2.0, -1.0), c(0.0, 7.0)] {
            assert!((cauchy_boundary_h0(&cst, &cst, lam, 0.02).unwrap() - k).norm() < 1e-13);
        }
        let sq: Vec<_> = t.iter().map(|z| z * z).collect();
        let inv: Vec<_> = t.iter().map(|z| z.inv()).collect();
        let lam = c(0.4, -0.3);
        assert!((cauchy_boundary_h0(&sq, &inv, lam, 0.02).unwrap() - lam * lam).norm() < 1e-13);
        let lam = c(1.5, 0.9);
        assert!((cauchy_boundary_h0(&sq, &inv, lam, 0.02).unwrap() - lam.inv()).norm() < 1e-13);
        // the other halves are annihilated
        assert!(cauchy_boundary_h0(&inv, &sq, c(0.2, 0.1), 0.02).unwrap().norm() < 1e-13);
        assert!(cauchy_boundary_h0(&inv, &sq, c(3.0, 0.1), 0.02).unwrap().norm() < 1e-13);
        assert!(cauchy_boundary_h0(&sq, &sq, c(0.99, 0.0), 0.02).is_err());
    }

    #[test]
    fn boundary_limits_follow_plemelj() {
        let t = circle(16);
        let k = c(0.7, 0.4);
        for side in [Side::Inner, Side::Outer] {
            let v = boundary_limit_h0(&vec![k; 16], 5, side, 4.0).unwrap();
            assert!((v - k).norm() < 1e-12, "{side:?} {v}");
        }
        for m in 0..5 {
            let g: Vec<_> = t.iter().map(|z| z.powi(m)).collect();
            let v = boundary_limit_h0(&g, 3, Side::Inner, 4.0).unwrap();
            assert!((v - t[3].powi(m)).norm() < 1e-10, "m={m}");
            let w = boundary_limit_h0(&g, 3, Side::Outer, 4.0).unwrap();
            let expect = if m == 0 { t[3].powi(0) } else { ZERO };
            assert!((w - expect).norm() < 1e-10, "m={m}");
        }
        // negative modes go outside
        let g: Vec<_> = t.iter().map(|z| z.powi(-2)).collect();
        let w = boundary_limit_h0(&g, 6, Side::Outer, 4.0).unwrap();
        assert!((w - t[6].powi(-2)).norm() < 1e-10);
    }

    #[test]
    fn interior_values_approach_the_boundary_limit() {
        let t = circle(32);
        let g: Vec<_> = t.iter().map(|z| (z * 0.5).exp() + z.conj() * 0.3).collect();
        let s = CircleSeries::new(&g).unwrap();
        let lim = boundary_limit_h0(&g, 4, Side::Inner, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for eps in [0.1, 0.01, 0.001] {
            let err = (s.cauchy(t[4] * (1.0 - eps)) - lim).norm();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-3);
        let out = boundary_limit_h0(&g, 4, Side::Outer, 1.0).unwrap();
        assert!((s.cauchy(t[4] * 1.0001) - out).norm() < 1e-3);
        assert!((lim + out - g[4] - s.mean()).norm() < 1e-10);
    }

    #[test]
    fn pv_of_symmetric_real_data_is_real() {
        let t = circle(24);
        // symmetric about node 0
        let g: Vec<_> = t.iter().map(|z| Complex64::new(1.0 + 0.5 * z.re + 0.2 * (2.0 * z.arg()).cos(), 0.0)).collect();
        let v = boundary_limit_h0(&g, 0, Side::Inner, 9.0).unwrap();
        assert!(v.im.abs() < 1e-12, "{v}");
    }

    #[test]
    fn constant_bracket_closed_form() {
        let cfg = cfg();
        let p = Vec3::new(0.4, -0.2, 0.3);
        for lam in [c(0.5, 0.2), c(-1.5, 2.0)] {
            let b = bracket_with(lam, &p, &cfg, None, |_, _| Some(Complex64::new(1.0, 0.0))).unwrap();
            let r = lam.norm();
            let sgn = if r > 1.0 { 1.0 } else { -1.0 };
            let s = (cfg.e - p.norm2() / 4.0).sqrt() * sgn * (r * r + 1.0) / (lam.conj() * r);
            let expect = s * (-PI / 4.0) * (-TAU);
            assert!((b.value - expect).norm() < 1e-12 * expect.norm());
            let zero = bracket_with(lam, &p, &cfg, None, |_, _| Some(ZERO)).unwrap();
            assert_eq!(zero.value, ZERO);
        }
    }

    #[test]
    fn windows_keep_both_points_in_the_ball() {
        let cfg = cfg();
        let p = Vec3::new(0.3, 0.1, 0.2);
        let frame = frame_of(&p, &cfg.nu()).unwrap();
        for lam in [c(0.3, 0.1), c(3.0, 1.0), c(0.9, 0.1)] {
            let k = k_from_lambda(lam, cfg.e, &frame).unwrap();
            let circle = CharCircle::new(&k).unwrap();
            let r = 0.8;
            let w = phi_windows(&circle, &p, r).unwrap();
            for i in 0..2000 {
                let phi = -PI + TAU * i as f64 / 2000.0;
                let inside = circle.at(phi).norm() <= r && (p + circle.at(phi)).norm() <= r;
                let covered = w.iter().any(|&(a, b)| a <= phi && phi <= b);
                if (circle.at(phi).norm() - r).abs() > 1e-6 && ((p + circle.at(phi)).norm() - r).abs() > 1e-6 {
                    assert_eq!(inside, covered, "λ={lam} φ={phi}");
                }
            }
        }
    }

    #[test]
    fn area_cauchy_of_constant_matches_closed_form() {
        let cfg = cfg();
        let grids = DbarGrids::new(&cfg).unwrap();
        let g0 = c(0.6, -0.3);
        let g = ComplexField2D::from_fn(grids.lgrid.len(), grids.pgrid.len(), |_, _| g0);
        let m = area_cauchy(&g, &grids).unwrap();
        let lg = &grids.lgrid;
        for i in lg.range(Side::Inner) {
            let lam = lg.nodes[i];
            let expect = g0 * (lam.conj() - lg.lambda_min.powi(2) / lam);
            assert!((m.get(i, 0) - expect).norm() < 1e-12, "{i}");
        }
        // outer: -(1/π)(∫∫ dA/(ζ-λ) - ∫∫ dA/ζ), the latter vanishes
        for i in lg.range(Side::Outer) {
            let lam = lg.nodes[i];
            let expect = g0 * (lam.conj() - (1.0 + lg.eps_t).powi(2) / lam);
            assert!((m.get(i, 2) - expect).norm() < 1e-9 * expect.norm(), "{i} {} {expect}", m.get(i, 2));
        }
    }

    #[test]
    fn area_cauchy_of_smooth_data_converges() {
        // g = ζ̄: on the ring |ζ| = r, ∮ ζ̄/(ζ-λ) dθ = -2π r²/λ² for r < |λ|
        // and 0 for r > |λ|
        let target = c(0.35, 0.2);
        let mut errs = vec![];
        for (nc, nr) in [(16, 8), (32, 16)] {
            let cfg = RunConfig { n_lambda_circle: nc, n_lambda_radial: nr, ..cfg() };
            let grids = DbarGrids::new(&cfg).unwrap();
            let lg = &grids.lgrid;
            let g = ComplexField2D::from_fn(lg.len(), grids.pgrid.len(), |i, _| lg.nodes[i].conj());
            let m = area_cauchy(&g, &grids).unwrap();
            let i = lg
                .range(Side::Inner)
                .min_by(|&a, &b| (lg.nodes[a] - target).norm().total_cmp(&(lg.nodes[b] - target).norm()))
                .unwrap();
            let l = lg.nodes[i];
            let rho = l.norm();
            let exact = (rho.powi(4) - lg.lambda_min.powi(4)) / (2.0 * l * l);
            errs.push((m.get(i, 0) - exact).norm());
        }
        assert!(errs[1] < errs[0], "{errs:?}");
        assert!(errs[1] < 2e-2, "{errs:?}");
    }

    #[test]
    fn cap_is_a_projection() {
        let cfg = cfg();
        let pg = PGrid::from_config(&cfg).unwrap();
        let bound = CapBound { n: 0.5, eta: 0.1, delta: 0.0 };
        let coef = bound.coefficient(&cfg);
        let b = |j: usize| coef * (1.0 + pg.nodes[j].norm()).powf(-cfg.mu);
        let h = ComplexField2D::from_fn(3, pg.len(), |r, j| {
            let ph = Complex64::from_polar(1.0, 0.3 * r as f64 + j as f64);
            ph * b(j) * if (r + j) % 2 == 0 { 0.5 } else { 2.0 }
        });
        let (capped, n) = cap_h0(&h, &bound, &pg, &cfg);
        assert!(n > 0);
        for r in 0..3 {
            for j in 0..pg.len() {
                let (v, w) = (h.get(r, j), capped.get(r, j));
                if (r + j) % 2 == 0 {
                    assert_eq!(v, w);
                } else {
                    assert!((w - v * 0.5).norm() < 1e-12 * v.norm());
                }
            }
        }
        let (again, m) = cap_h0(&capped, &bound, &pg, &cfg);
        assert_eq!(m, 0);
        assert_eq!(again, capped);
    }

    #[test]
    fn c5_is_finite_and_stable() {
        let a = c5_quadrature(24);
        let b = c5_quadrature(48);
        assert!(a.is_finite() && (a - b).abs() < 0.02 * b, "{a} {b}");
        assert!(b >= PI / 2.0 - 1e-6);
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let grids = DbarGrids::new(&cfg()).unwrap();
        let h0 = ComplexField2D::zeros(grids.lgrid.len(), grids.pgrid.len());
        let st = solve_fixed_point(&h0, &grids).unwrap();
        assert_eq!(st.diagnostics.iterations, 1);
        assert!(st.htilde.values.iter().all(|v| *v == ZERO));
        assert!(apply_m(&h0, &grids).unwrap().values.iter().all(|v| *v == ZERO));
    }
}
