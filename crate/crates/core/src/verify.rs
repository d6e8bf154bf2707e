//! Numerical certification: the closed-form kernel bounds, the
//! Cauchy-Green identity, coordinate round trips and the runtime
//! contraction diagnostics.

use std::f64::consts::{PI, SQRT_2, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coords::{frame_of, gamma_pm, im_k_norm, k_from_lambda, lambda_from_k, re_k_norm};
use crate::dbar::{
    bilinear_bracket, boundary_limit_h0, cauchy_boundary_h0, dbar_residual, radii, DbarGrids,
};
use crate::domain::{sup_norm_me, ComplexField2D, LambdaGrid, PGrid, RunConfig, ScatteringData, Side};
use crate::error::{Error, Result};
use crate::faddeev::{apply_b_gamma, b_coefficients, b_gamma_norm};
use crate::forward::{complex_k_rate, TorusRule};
use crate::potentials::AnalyticPotential;
use crate::quad::adaptive_checked;
use crate::vec3::Vec3;

/// Quadrature tolerance of the bound checks.
pub const BOUND_TOL: f64 = 1e-8;

/// One checked inequality `value ≤ limit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, limit, pass: value.is_finite() && value <= limit }
    }

    /// `value ≤ limit` up to the quadrature slack.
    fn bound(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, limit, pass: value.is_finite() && value <= limit + BOUND_TOL }
    }

    pub fn margin(&self) -> f64 {
        self.limit - self.value
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub checks: Vec<Check>,
}

impl BoundReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn min_margin(&self) -> f64 {
        self.checks.iter().map(Check::margin).fold(f64::INFINITY, f64::min)
    }
}

fn w_denominator(r: f64, psi: f64, alpha: f64, beta: f64, phi: f64) -> f64 {
    (1.0 + 2.0 * r * (phi / 2.0).sin().abs()).powf(alpha) * (1.0 + 2.0 * r * ((phi - psi) / 2.0).sin().abs()).powf(beta)
}

/// `∫_a^b g(φ)/den(φ) dφ` split at the kinks of the denominator.
fn kernel_integral<G: Fn(f64) -> f64>(g: G, r: f64, psi: f64, alpha: f64, beta: f64, a: f64, b: f64) -> Result<f64> {
    let mut cuts = vec![a, b];
    for k in [-1.0, 0.0, 1.0] {
        for c in [TAU * k, psi + TAU * k] {
            if a < c && c < b {
                cuts.push(c);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| adaptive_checked(|phi| g(phi) / w_denominator(r, psi, alpha, beta, phi), w[0], w[1], BOUND_TOL / 8.0))
        .sum()
}

/// The kernel integrals `A`, `B` over the circle and their pieces
/// `A_j`, `B_j` on `[0, ψ/2]`, `[ψ/2, ψ]`, `[ψ, min(3ψ/2, π)]`, `[min(3ψ/2, π), π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelIntegrals {
    pub a: f64,
    pub b: f64,
    pub a_parts: [f64; 4],
    pub b_parts: [f64; 4],
}

pub fn kernel_integrals(r: f64, psi: f64, alpha: f64, beta: f64) -> Result<KernelIntegrals> {
    let w1 = |phi: f64| 1.0 - phi.cos();
    let w2 = |phi: f64| phi.sin().abs();
    let a = kernel_integral(w1, r, psi, alpha, beta, -PI, PI)?;
    let b = kernel_integral(w2, r, psi, alpha, beta, -PI, PI)?;
    let s = psi.abs();
    let edges = [0.0, s / 2.0, s, (1.5 * s).min(PI), PI];
    let mut a_parts = [0.0; 4];
    let mut b_parts = [0.0; 4];
    for j in 0..4 {
        a_parts[j] = 2.0 * kernel_integral(w1, r, s, alpha, beta, edges[j], edges[j + 1])?;
        b_parts[j] = 2.0 * kernel_integral(|phi: f64| phi.sin(), r, s, alpha, beta, edges[j], edges[j + 1])?;
    }
    Ok(KernelIntegrals { a, b, a_parts, b_parts })
}

/// Right-hand sides of the eight piece bounds, written through
/// `s = |sin(ψ/2)|` so that `r = 0` stays finite.
fn kernel_bound_values(r: f64, psi: f64, alpha: f64, beta: f64) -> ([f64; 4], [f64; 4]) {
    let s = (psi / 2.0).sin().abs();
    let rho = 2.0 * r * s;
    let h = 1.0 + rho / 2.0;
    let inv_r2 = |x: f64| if r == 0.0 { f64::INFINITY } else { x / (r * r) };
    let a = [
        (8.0 * s.powi(3) / 6.0).min(inv_r2(2.0 * s)) / h.powf(beta),
        8.0 * s.powi(3) / h.powf(alpha + 1.0),
        32.0 * s.powi(3) / ((1.0 + rho).powf(alpha) * h),
        (3.0 / (1.0 + r * r) + TAU / (1.0 + SQRT_2 * r).powf(alpha)) / h.powf(beta),
    ];
    let b = [
        (2.0 * s * s).min(if r == 0.0 { f64::INFINITY } else { 2.0 * SQRT_2 * s / r }) / h.powf(beta),
        8.0 * s * s / h.powf(alpha + 1.0),
        16.0 * s * s / ((1.0 + rho).powf(alpha) * h),
        (5.0 / (1.0 + r) + 3.0 / (1.0 + SQRT_2 * r).powf(alpha)) / h.powf(beta),
    ];
    (a, b)
}

fn check_ranges(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha >= 2.0 && beta >= 2.0) {
        return Err(Error::config("alpha", "kernel bounds need alpha, beta >= 2"));
    }
    Ok(())
}

/// `A ≤ Σ A_j`, `B ≤ Σ B_j` and each piece against its closed-form bound.
pub fn kernel_bound_check(r: f64, psi: f64, alpha: f64, beta: f64) -> Result<BoundReport> {
    check_ranges(alpha, beta)?;
    if !(r >= 0.0) || psi.abs() > PI + 1e-12 {
        return Err(Error::config("r", "need r >= 0 and psi in [-pi, pi]"));
    }
    let k = kernel_integrals(r, psi, alpha, beta)?;
    let (ab, bb) = kernel_bound_values(r, psi, alpha, beta);
    let mut checks = vec![
        Check::bound("A <= sum A_j", k.a, k.a_parts.iter().sum()),
        Check::bound("B <= sum B_j", k.b, k.b_parts.iter().sum()),
    ];
    for j in 0..4 {
        checks.push(Check::bound(format!("A_{}", j + 1), k.a_parts[j], ab[j]));
        checks.push(Check::bound(format!("B_{}", j + 1), k.b_parts[j], bb[j]));
    }
    Ok(BoundReport { checks })
}

/// `r` and `ψ ∈ [0, π]` of the chart at `|λ|`, `ρ = |p|`.
pub fn chart_geometry(lambda_abs: f64, rho: f64, e: f64) -> (f64, f64) {
    let l = lambda_abs + lambda_abs.recip();
    let r = ((e - rho * rho / 4.0) * l * l + rho * rho).sqrt() / 2.0;
    let psi = if r == 0.0 { 0.0 } else { 2.0 * (rho / (2.0 * r)).min(1.0).asin() };
    (r, psi)
}

/// The eight scaled piece bounds on the chart.
pub fn chart_bound_check(lambda_abs: f64, rho: f64, e: f64, tau: f64, alpha: f64, beta: f64) -> Result<BoundReport> {
    check_ranges(alpha, beta)?;
    if !(lambda_abs > 0.0 && e > 0.0 && 0.0 < tau && tau < 1.0 && (0.0..=2.0 * tau * e.sqrt() + 1e-12).contains(&rho)) {
        return Err(Error::config("lambda", "need |λ| > 0, E > 0, 0 < τ < 1, 0 <= ρ <= 2τ√E"));
    }
    let (r, psi) = chart_geometry(lambda_abs, rho, e);
    let k = kernel_integrals(r, psi, alpha, beta)?;
    let z = (1.0 - tau * tau) / (4.0 * tau * tau);
    let l2 = lambda_abs * lambda_abs;
    let scale_a = (e - rho * rho / 4.0).sqrt() * (l2 + 1.0) / l2;
    let scale_b = rho / lambda_abs;
    let q = lambda_abs / ((l2 + 1.0).powi(2) * z);
    let h = 1.0 + rho / 2.0;
    let a_rhs = [
        4.0 * q / h.powf(beta),
        16.0 * q / h.powf(alpha),
        64.0 * q / (1.0 + rho).powf(alpha),
        4.0 * SQRT_2 * (3.0 + PI) / ((l2 + 1.0) * e.sqrt() * (2.0 * z.sqrt()).min(1.0) * h.powf(beta)),
    ];
    let b_rhs = [
        4.0 * SQRT_2 * q / h.powf(beta),
        16.0 * q / h.powf(alpha),
        32.0 * q / (1.0 + rho).powf(alpha),
        15.0 / ((l2 + 1.0) * z.sqrt() * h.powf(beta)),
    ];
    let mut checks = Vec::with_capacity(8);
    for j in 0..4 {
        checks.push(Check::bound(format!("scaled A_{}", j + 1), scale_a * k.a_parts[j], a_rhs[j]));
    }
    for j in 0..4 {
        checks.push(Check::bound(format!("scaled B_{}", j + 1), scale_b * k.b_parts[j], b_rhs[j]));
    }
    Ok(BoundReport { checks })
}

/// Largest defect of `u(λ) = (1/2πi)∮ u dζ/(ζ-λ) - (1/π)∫∫ ∂̄u/(ζ-λ) dA`
/// on the unit disk, for `u = ζ̄`, `|ζ|²`, `ζ²` and `e^{ζ̄}`, at a few
/// interior points. The area rule is the polar midpoint rule with the
/// cell holding `λ` left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyGreenReport {
    pub n_radial: usize,
    pub defect: f64,
    /// Defect of the holomorphic test function, whose area term vanishes.
    pub holomorphic_defect: f64,
}

pub fn cauchy_green_check(n_radial: usize) -> CauchyGreenReport {
    type Fun = fn(Complex64) -> Complex64;
    let tests: [(Fun, Fun); 4] = [
        (|z| z.conj(), |_| Complex64::new(1.0, 0.0)),
        (|z| Complex64::new(z.norm_sqr(), 0.0), |z| z),
        (|z| z * z, |_| Complex64::new(0.0, 0.0)),
        (|z| z.conj().exp(), |z| z.conj().exp()),
    ];
    let n_theta = 4 * n_radial;
    let dr = 1.0 / n_radial as f64;
    let dth = TAU / n_theta as f64;
    let circle: Vec<Complex64> = (0..n_theta).map(|j| Complex64::from_polar(1.0, dth * j as f64)).collect();
    let points = [Complex64::new(0.0, 0.0), Complex64::new(0.31, 0.17), Complex64::new(-0.2, -0.55)];
    let mut defect = 0.0f64;
    let mut holomorphic_defect = 0.0f64;
    for (t, (u, dbar_u)) in tests.iter().enumerate() {
        for &lam in &points {
            // ∮ u dζ/(ζ-λ) / 2πi with ζ = e^{iθ}: (1/2π)∫ u ζ/(ζ-λ) dθ
            let contour: Complex64 = circle.iter().map(|&z| u(z) * z / (z - lam)).sum::<Complex64>() * (dth / TAU);
            let (i0, j0) = ((lam.norm() / dr) as usize, (lam.arg().rem_euclid(TAU) / dth) as usize);
            let mut area = Complex64::new(0.0, 0.0);
            for i in 0..n_radial {
                let r = (i as f64 + 0.5) * dr;
                for j in 0..n_theta {
                    if i == i0 && (j == j0 || i == 0) {
                        continue;
                    }
                    let z = Complex64::from_polar(r, (j as f64 + 0.5) * dth);
                    area += dbar_u(z) / (z - lam) * (r * dr * dth);
                }
            }
            let d = (contour - area / PI - u(lam)).norm();
            if t == 2 {
                holomorphic_defect = holomorphic_defect.max(d);
            } else {
                defect = defect.max(d);
            }
        }
    }
    CauchyGreenReport { n_radial, defect, holomorphic_defect }
}

/// Runtime surrogates for the contraction constants of the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `sup (1+|k-l|²)^{μ/2}|f|`.
    pub n_data: f64,
    /// Contraction ratio of the complex-k iteration (needs the potential).
    pub eta_hat: Option<f64>,
    /// Largest sampled contraction ratio of the iteration `u ← B_γ(k) u`
    /// in the weighted sup norm.
    pub delta1_hat: f64,
    /// Largest sampled weighted operator norm of `B_γ(k)`, an upper bound
    /// for `δ̂₁`.
    pub b_norm_bound: f64,
    /// Largest sampled `‖B_γ(k) - B_γ'(k')‖ / |k-k'|^α`.
    pub delta2_hat: f64,
    /// Exact from `N` and `η` (`η̂`, or `δ̂₁` without a potential).
    pub r2: Option<f64>,
    /// Surrogate: needs the empirical bracket constant.
    pub r1: Option<f64>,
    pub contraction_ok: bool,
}

/// Sample `(γ±, k)` pairs on the boundary chart: a few p-nodes times a few
/// circle nodes, in a fixed order.
fn boundary_samples(cfg: &RunConfig, e: f64) -> Result<Vec<(Vec3, Vec3, Vec3, Vec3)>> {
    let pg = PGrid::from_config(cfg)?;
    let lg = LambdaGrid::from_config(cfg)?;
    let stride_p = (pg.len() / 6).max(1);
    let stride_c = (lg.n_circle / 4).max(1);
    let mut out = vec![];
    for p in pg.nodes.iter().step_by(stride_p) {
        let frame = frame_of(p, &cfg.nu())?;
        for c in (0..lg.n_circle).step_by(stride_c) {
            let z = lg.circle_nodes[c];
            let z2 = lg.circle_nodes[(c + 1) % lg.n_circle];
            let k = k_from_lambda(z, e, &frame)?.re();
            let k2 = k_from_lambda(z2, e, &frame)?.re();
            let (g, _) = gamma_pm(z, e, &frame)?;
            let (g2, _) = gamma_pm(z2, e, &frame)?;
            out.push((g, k, g2, k2));
        }
    }
    Ok(out)
}

/// Weighted norm of `B_γ(k) - B_γ'(k')` in the weights of `k`.
fn b_difference_norm(f: &ScatteringData, g: &Vec3, k: &Vec3, g2: &Vec3, k2: &Vec3, mu: f64) -> f64 {
    let c1 = b_coefficients(f, g, k);
    let c2 = b_coefficients(f, g2, k2);
    let wt: Vec<f64> = f.grid.nodes.iter().map(|m| (1.0 + (*k - *m).norm2()).powf(mu / 2.0)).collect();
    let mut col = vec![0.0; f.n()];
    for m in 0..f.n() {
        let a = (c1[m] - c2[m]).norm() / wt[m];
        if a == 0.0 {
            continue;
        }
        for (s, fv) in col.iter_mut().zip(f.row(m)) {
            *s += a * fv.norm();
        }
    }
    col.iter().zip(&wt).fold(0.0, |acc, (s, w)| acc.max(s * w))
}

/// Tail ratio `‖B^n u‖ / ‖B^{n-1} u‖` from `u = f(k, ·)`, weighted by
/// `(1+|k-l|²)^{μ/2}`.
fn measured_contraction(f: &ScatteringData, g: &Vec3, k: &Vec3, mu: f64) -> f64 {
    let wt: Vec<f64> = f.grid.nodes.iter().map(|l| (1.0 + (*k - *l).norm2()).powf(mu / 2.0)).collect();
    let norm = |u: &[Complex64]| u.iter().zip(&wt).fold(0.0f64, |a, (v, w)| a.max(v.norm() * w));
    let mut u = f.row_at(k);
    let mut prev = norm(&u);
    let mut ratio = 0.0;
    for _ in 0..8 {
        if prev == 0.0 {
            return 0.0;
        }
        u = apply_b_gamma(f, g, k, &u);
        let n = norm(&u);
        ratio = n / prev;
        prev = n;
    }
    ratio
}

/// `η̂`: the largest contraction ratio of the complex-k iteration at a few
/// points `λ = ½ e^{iθ}` over sampled p-nodes.
pub fn eta_hat(pot: &AnalyticPotential, cfg: &RunConfig) -> Result<f64> {
    if pot.is_zero() {
        return Ok(0.0);
    }
    let pg = PGrid::from_config(cfg)?;
    let rule = TorusRule { n_s: 8, n_alpha: 10, n_theta: 14, radius: None };
    let mut eta = 0.0f64;
    for p in pg.nodes.iter().step_by((pg.len() / 2).max(1)) {
        let frame = frame_of(p, &cfg.nu())?;
        let k = k_from_lambda(Complex64::new(0.5, 0.0), cfg.e, &frame)?;
        eta = eta.max(complex_k_rate(pot, &k, &rule)?);
    }
    Ok(eta)
}

pub fn diagnostics_report(
    f: &ScatteringData,
    pot: Option<&AnalyticPotential>,
    cfg: &RunConfig,
    c4: Option<f64>,
) -> Result<Diagnostics> {
    let n_data = sup_norm_me(f, cfg.mu)?;
    let eta = pot.map(|p| eta_hat(p, cfg)).transpose()?;
    let mut delta1 = 0.0f64;
    let mut delta2 = 0.0f64;
    let mut bound = 0.0f64;
    if n_data > 0.0 {
        for (g, k, g2, k2) in boundary_samples(cfg, f.e)? {
            bound = bound.max(b_gamma_norm(f, &g, &k, cfg.mu));
            delta1 = delta1.max(measured_contraction(f, &g, &k, cfg.mu));
            let dk = (k - k2).norm();
            if dk > 0.0 {
                delta2 = delta2.max(b_difference_norm(f, &g, &k, &g2, &k2, cfg.mu) / dk.powf(cfg.alpha));
            }
        }
    }
    let eta_used = eta.unwrap_or(delta1);
    let contraction_ok = eta_used < 1.0 && delta1 < 1.0;
    let (r1, r2) = if eta_used < 1.0 {
        let c5 = crate::dbar::c5_quadrature(24);
        let (r1, r2) = radii(n_data, eta_used, c4.unwrap_or(0.0), c5, cfg);
        (c4.map(|_| r1), Some(r2))
    } else {
        (None, None)
    };
    Ok(Diagnostics { n_data, eta_hat: eta, delta1_hat: delta1, b_norm_bound: bound, delta2_hat: delta2, r2, r1, contraction_ok })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Coords,
    Cauchy,
    Bounds,
    Dbar,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coords" => Ok(Suite::Coords),
            "cauchy" => Ok(Suite::Cauchy),
            "bounds" => Ok(Suite::Bounds),
            "dbar" => Ok(Suite::Dbar),
            "all" => Ok(Suite::All),
            _ => Err(Error::config("suite", format!("unknown suite `{s}` (coords|cauchy|bounds|dbar|all)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: Suite, checks: Vec<Check>) -> Self {
        SuiteReport { suite, pass: checks.iter().all(|c| c.pass), checks }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

pub fn run_suite(suite: Suite, cfg: &RunConfig) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Coords => coords_suite(cfg, 1000)?,
        Suite::Cauchy => cauchy_suite(cfg)?,
        Suite::Bounds => bounds_suite(cfg, 200)?,
        Suite::Dbar => dbar_suite(cfg)?,
        Suite::All => {
            let mut all = coords_suite(cfg, 1000)?;
            all.extend(cauchy_suite(cfg)?);
            all.extend(bounds_suite(cfg, 200)?);
            all.extend(dbar_suite(cfg)?);
            all
        }
    };
    Ok(SuiteReport::new(suite, checks))
}

/// A random `p` in the ball, away from the excluded axis.
fn random_p<R: Rng>(rng: &mut R, radius: f64, nu: &Vec3) -> Vec3 {
    loop {
        let p = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = p.norm();
        if n > 0.05 && n < 1.0 && nu.cross(&p).norm() > 0.05 * n {
            return p.scale(radius * 0.999);
        }
    }
}

fn random_lambda<R: Rng>(rng: &mut R) -> Complex64 {
    let r = 10f64.powf(rng.gen_range(-1.2..1.2));
    Complex64::from_polar(r, rng.gen_range(-PI..PI))
}

/// Round trips `λ → k → λ`, the variety equations, reality on `T` and the
/// closed forms of `|Re k|`, `|Im k|`.
pub fn coords_suite(cfg: &RunConfig, samples: usize) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c00d);
    let e = cfg.e;
    let nu = cfg.nu();
    let (mut round, mut variety, mut real, mut closed) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..samples {
        let p = random_p(&mut rng, cfg.ball_radius(), &nu);
        let frame = frame_of(&p, &nu)?;
        let lam = if i % 10 == 0 { Complex64::from_polar(1.0, rng.gen_range(-PI..PI)) } else { random_lambda(&mut rng) };
        let k = k_from_lambda(lam, e, &frame)?;
        round = round.max((lambda_from_k(&k, &frame)? - lam).norm() / lam.norm());
        let kk = k.k.dot(&k.k);
        let kp = k.k.dot_real(&p) * 2.0;
        variety = variety.max((kk - e).norm() / e).max((kp - p.norm2()).norm() / e);
        if i % 10 == 0 {
            real = real.max(k.im().norm() / e.sqrt());
        }
        let re_err = (k.re().norm() - re_k_norm(lam, &p, e)).abs() / k.re().norm();
        let im_err = (k.im().norm() - im_k_norm(lam, &p, e)).abs() / k.re().norm();
        closed = closed.max(re_err).max(im_err);
    }
    Ok(vec![
        Check::new("lambda round trip (relative)", round, 1e-9),
        Check::new("variety equations (relative)", variety, 1e-9),
        Check::new("|Im k| / sqrt(E) on T", real, 1e-10),
        Check::new("closed forms of |Re k|, |Im k|", closed, 1e-10),
    ])
}

/// Cauchy data and boundary limits of constants and monomials on 512
/// circle nodes, and first-order convergence of the Cauchy-Green identity.
pub fn cauchy_suite(cfg: &RunConfig) -> Result<Vec<Check>> {
    let n = 512;
    let t: Vec<Complex64> = (0..n).map(|j| Complex64::from_polar(1.0, TAU * j as f64 / n as f64)).collect();
    let c = Complex64::new(0.7, -0.2);
    let cst = vec![c; n];
    let inside = [Complex64::new(0.3, 0.4), Complex64::new(-0.6, 0.1), Complex64::new(0.05, -0.9)];
    let outside = [Complex64::new(1.3, 0.4), Complex64::new(-2.0, 3.0), Complex64::new(0.1, -12.0)];
    let mut interior = 0.0f64;
    for m in 0..4 {
        let pos: Vec<Complex64> = t.iter().map(|z| z.powi(m)).collect();
        let neg: Vec<Complex64> = t.iter().map(|z| z.powi(-m)).collect();
        for &l in &inside {
            interior = interior.max((cauchy_boundary_h0(&pos, &neg, l, cfg.eps_t)? - l.powi(m)).norm());
            interior = interior.max((cauchy_boundary_h0(&cst, &cst, l, cfg.eps_t)? - c).norm());
        }
        for &l in &outside {
            interior = interior.max((cauchy_boundary_h0(&pos, &neg, l, cfg.eps_t)? - l.powi(-m)).norm());
            interior = interior.max((cauchy_boundary_h0(&cst, &cst, l, cfg.eps_t)? - c).norm());
        }
    }
    let mut boundary = 0.0f64;
    for j in [0, 77, 300] {
        for side in [Side::Inner, Side::Outer] {
            boundary = boundary.max((boundary_limit_h0(&cst, j, side, cfg.e)? - c).norm());
        }
        for m in 1..4 {
            let pos: Vec<Complex64> = t.iter().map(|z| z.powi(m)).collect();
            let neg: Vec<Complex64> = t.iter().map(|z| z.powi(-m)).collect();
            boundary = boundary.max((boundary_limit_h0(&pos, j, Side::Inner, cfg.e)? - t[j].powi(m)).norm());
            boundary = boundary.max(boundary_limit_h0(&pos, j, Side::Outer, cfg.e)?.norm());
            boundary = boundary.max((boundary_limit_h0(&neg, j, Side::Outer, cfg.e)? - t[j].powi(-m)).norm());
            boundary = boundary.max(boundary_limit_h0(&neg, j, Side::Inner, cfg.e)?.norm());
        }
    }
    let coarse = cauchy_green_check(16);
    let fine = cauchy_green_check(32);
    Ok(vec![
        Check::new("Cauchy data of monomials and constants", interior, 1e-8),
        Check::new("boundary limits of monomials and constants", boundary, 1e-8),
        Check::new("Cauchy-Green defect ratio under 2x refinement", fine.defect / coarse.defect, 0.6),
        Check::new("Cauchy-Green holomorphic defect", fine.holomorphic_defect, 1e-8),
    ])
}

pub fn bounds_suite(cfg: &RunConfig, samples: usize) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xb0_0d5);
    let mut worst12 = f64::INFINITY;
    let mut worst13 = f64::INFINITY;
    let mut fail12 = 0usize;
    let mut fail13 = 0usize;
    for i in 0..samples {
        let r = if i == 0 { 0.0 } else { 10f64.powf(rng.gen_range(-2.0..1.5)) };
        let psi = if i == 1 { 0.0 } else { rng.gen_range(-PI..PI) };
        let (alpha, beta) = if i % 2 == 0 { (2.0, 2.0) } else { (rng.gen_range(2.0..6.0), rng.gen_range(2.0..6.0)) };
        let rep = kernel_bound_check(r, psi, alpha, beta)?;
        worst12 = worst12.min(rep.min_margin());
        fail12 += usize::from(!rep.pass());

        let e = 10f64.powf(rng.gen_range(0.0..1.3));
        let tau = rng.gen_range(0.05..0.95);
        let rho = if i == 2 { 0.0 } else { rng.gen_range(0.0..2.0 * tau * e.sqrt()) };
        let mut la = 10f64.powf(rng.gen_range(-1.5..1.5));
        if (la - 1.0).abs() < 1e-3 {
            la = 2.0;
        }
        let rep = chart_bound_check(la, rho, e, tau, alpha, beta)?;
        worst13 = worst13.min(rep.min_margin());
        fail13 += usize::from(!rep.pass());
    }
    let _ = cfg;
    Ok(vec![
        Check::new("kernel-bound samples failing", fail12 as f64, 0.0),
        Check::new("kernel-bound worst margin (negated)", -worst12, BOUND_TOL),
        Check::new("chart-bound samples failing", fail13 as f64, 0.0),
        Check::new("chart-bound worst margin (negated)", -worst13, BOUND_TOL),
    ])
}

/// Bracket identities on a small field and the ∂̄ residual of the exact
/// `H` at two points for a weak Gaussian.
pub fn dbar_suite(cfg: &RunConfig) -> Result<Vec<Check>> {
    let small = RunConfig { n_lambda_circle: 8, n_lambda_radial: 4, n_p: 4, ..cfg.clone() };
    let grids = DbarGrids::new(&small)?;
    let (nl, np) = (grids.lgrid.len(), grids.pgrid.len());
    let u1 = ComplexField2D::from_fn(nl, np, |i, j| Complex64::new((i as f64 * 0.37).sin(), (j as f64 * 0.11).cos()));
    let u2 = ComplexField2D::from_fn(nl, np, |i, j| Complex64::new((j as f64 * 0.5).cos(), (i as f64 * 0.21).sin()));
    let d = u1.sub(&u2)?;
    let mut defect = 0.0f64;
    let mut scale = 0.0f64;
    for (li, pj) in [(1usize, 0usize), (nl - 3, np - 1), (nl / 2, np / 2)] {
        let lam = grids.lgrid.nodes[li];
        let p = grids.pgrid.nodes[pj];
        let b = |a: &ComplexField2D, c: &ComplexField2D| bilinear_bracket(a, c, lam, &p, &grids).map(|v| v.value);
        let lhs = b(&u1, &u1)? - b(&u2, &u2)?;
        let rhs = b(&d, &u1)? + b(&u2, &d)?;
        defect = defect.max((lhs - rhs).norm());
        scale = scale.max(b(&u1, &u1)?.norm());
    }
    let pot = AnalyticPotential::gaussian(0.2, 1.0, [0.0; 3]);
    let rule = TorusRule { n_s: 10, n_alpha: 12, n_theta: 16, radius: None };
    let res_cfg = RunConfig { n_phi: 16, ..cfg.clone() };
    let p = random_p(&mut ChaCha8Rng::seed_from_u64(7), cfg.ball_radius(), &cfg.nu());
    let mut worst = 0.0f64;
    for lam in [Complex64::new(0.5, 0.2), Complex64::new(1.8, -0.7)] {
        let r = dbar_residual(&pot, lam, &p, 1e-2, &res_cfg, &rule)?;
        worst = worst.max(r.residual().norm() / r.lhs.norm().max(r.rhs.norm()));
    }
    Ok(vec![
        Check::new("bracket difference identity (relative)", defect / scale.max(1e-300), 1e-12),
        Check::new("dbar residual of exact H (relative)", worst, 0.1),
    ])
}
