//! Synthetic data: the Lippmann-Schwinger equation for `f` on the energy
//! shell, and the equation for `H(k,·)` at complex `k`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coords::ComplexMomentum;
use crate::domain::{RunConfig, ScatteringData, SphereGrid};
use crate::error::{Error, Result};
use crate::potentials::AnalyticPotential;
use crate::quad::{gauss_legendre, periodic};
use crate::vec3::Vec3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn sup(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Quadrature for `∫_{|m|<R} F(m) / (m² - E - i0) dm` on shells of the
/// sphere grid's directions.
///
/// The energy shell itself comes first (its points are exactly the sphere
/// grid nodes) and carries the singular part: the subtracted principal value
/// plus the half residue `iπ/(2√E)`. The remaining shells are Gauss nodes on
/// `[0, 2√E]`, which is symmetric about `√E` with no node on the shell, and
/// on `[2√E, R]`.
#[derive(Debug, Clone)]
pub struct RadialGrid3D {
    pub r_max: f64,
    pub radii: Vec<f64>,
    pub points: Vec<Vec3>,
    pub weights: Vec<Complex64>,
    /// Number of on-shell points (the first ones).
    pub n_shell: usize,
}

impl RadialGrid3D {
    pub fn new(grid: &SphereGrid, r_max: f64, n_radial: usize) -> Result<Self> {
        let k0 = grid.radius;
        let e = grid.energy();
        if !(r_max > 2.0 * k0) {
            return Err(Error::config("ls_rmax", "radial truncation must exceed 2√E"));
        }
        if n_radial < 4 {
            return Err(Error::config("ls_radial", "grid resolutions must be >= 4"));
        }
        // an even count keeps the middle Gauss node off the shell
        let n_in = 2 * n_radial.div_ceil(4);
        let n_out = n_radial.saturating_sub(n_in).max(2);
        let mut radial = gauss_legendre(n_in, 0.0, 2.0 * k0);
        radial.extend(gauss_legendre(n_out, 2.0 * k0, r_max));

        let mut subtracted = 0.0;
        let dirs: Vec<(Vec3, f64)> =
            grid.nodes.iter().zip(&grid.weights).map(|(m, w)| (m.scale(1.0 / k0), w / e)).collect();
        let mut points: Vec<Vec3> = grid.nodes.clone();
        let mut weights = Vec::with_capacity((radial.len() + 1) * dirs.len());
        let mut off = Vec::new();
        for &(r, w) in &radial {
            let den = r * r - e;
            subtracted += w / den;
            for &(d, wd) in &dirs {
                points.push(d.scale(r));
                off.push(Complex64::new(w * r * r / den * wd, 0.0));
            }
        }
        let pv_rest = ((r_max - k0) / (r_max + k0)).ln() / (2.0 * k0);
        let shell = Complex64::new(k0 * k0 * (pv_rest - subtracted), k0 * k0 * PI / (2.0 * k0));
        weights.extend(dirs.iter().map(|&(_, wd)| shell * wd));
        weights.extend(off);
        let mut radii = vec![k0];
        radii.extend(radial.iter().map(|x| x.0));
        Ok(RadialGrid3D { r_max, radii, points, weights, n_shell: grid.len() })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Default radial truncation `√E + 8/w_min`.
pub fn default_r_max(pot: &AnalyticPotential, e: f64) -> f64 {
    let k0 = e.sqrt();
    (k0 + 8.0 / pot.min_width()).max(2.0 * k0 + 1.0)
}

/// Dense discretized operator `(A g)(l) = Σ_m W_m v̂(m - l) g(m)`, row-major.
#[derive(Debug, Clone)]
pub struct LsOperator {
    pub rgrid: RadialGrid3D,
    a: Vec<Complex64>,
}

impl LsOperator {
    pub fn new(pot: &AnalyticPotential, rgrid: RadialGrid3D) -> Self {
        let n = rgrid.len();
        let mut a = vec![ZERO; n * n];
        a.par_chunks_mut(n).enumerate().for_each(|(l, row)| {
            let pl = rgrid.points[l];
            for (m, slot) in row.iter_mut().enumerate() {
                *slot = rgrid.weights[m] * pot.vhat(&(rgrid.points[m] - pl));
            }
        });
        LsOperator { rgrid, a }
    }

    pub fn dim(&self) -> usize {
        self.rgrid.len()
    }

    /// `out = -A x` for a row-major `dim × cols` block.
    pub fn apply_neg(&self, x: &[Complex64], cols: usize) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(x.len(), n * cols);
        let mut out = vec![ZERO; n * cols];
        // SAFETY: Complex64 is repr(C) with two f64 fields, which is the
        // layout matrixmultiply expects for its complex type.
        unsafe {
            matrixmultiply::zgemm(
                matrixmultiply::CGemmOption::Standard,
                matrixmultiply::CGemmOption::Standard,
                n,
                n,
                cols,
                [-1.0, 0.0],
                self.a.as_ptr() as *const [f64; 2],
                n as isize,
                1,
                x.as_ptr() as *const [f64; 2],
                cols as isize,
                1,
                [0.0, 0.0],
                out.as_mut_ptr() as *mut [f64; 2],
                cols as isize,
                1,
            );
        }
        out
    }
}

/// Neumann series of the Lippmann-Schwinger equation at unit amplitude:
/// for the potential scaled by `s`, `f = Σ_n s^{n+1} T_n` on the shell.
#[derive(Debug, Clone)]
pub struct BornSeries {
    pub e: f64,
    pub grid: SphereGrid,
    /// On-shell terms in `ScatteringData` layout (`k`-major).
    pub terms: Vec<Vec<Complex64>>,
    /// Full sup norm of each term over all grid points.
    pub term_norms: Vec<f64>,
}

impl BornSeries {
    /// Terms until `s_max^n ‖T_n‖ < tol ‖T_0‖`.
    pub fn build(pot: &AnalyticPotential, grid: &SphereGrid, cfg: &RunConfig, s_max: f64) -> Result<Self> {
        let n = grid.len();
        let mut series = BornSeries { e: grid.energy(), grid: grid.clone(), terms: Vec::new(), term_norms: Vec::new() };
        if pot.is_zero() || s_max == 0.0 {
            series.terms.push(vec![ZERO; n * n]);
            series.term_norms.push(0.0);
            return Ok(series);
        }
        let r_max = cfg.ls_rmax.unwrap_or_else(|| default_r_max(pot, grid.energy()));
        let op = LsOperator::new(pot, RadialGrid3D::new(grid, r_max, cfg.ls_radial)?);
        let dim = op.dim();
        // column k of the block is g_k(l) = v̂(k - l) over all points l
        let mut t = vec![ZERO; dim * n];
        t.par_chunks_mut(n).enumerate().for_each(|(l, row)| {
            let pl = op.rgrid.points[l];
            for (k, slot) in row.iter_mut().enumerate() {
                *slot = pot.vhat(&(grid.nodes[k] - pl));
            }
        });
        let base = sup(&t);
        let mut growing = 0;
        let mut prev = base;
        for it in 0..=cfg.ls_max_iter {
            let norm = sup(&t);
            series.terms.push(on_shell(&t, n));
            series.term_norms.push(norm);
            if norm * s_max.powi(it as i32) <= cfg.ls_tol * base {
                return Ok(series);
            }
            if it > 0 {
                if norm * s_max >= prev {
                    growing += 1;
                    if growing >= 3 {
                        return Err(Error::Diverged { what: "LS", iterations: it, ratio: norm * s_max / prev });
                    }
                } else {
                    growing = 0;
                }
            }
            prev = norm;
            t = op.apply_neg(&t, n);
        }
        Err(Error::NotConverged { what: "LS", iterations: cfg.ls_max_iter, increment: prev / base })
    }

    pub fn order(&self) -> usize {
        self.terms.len()
    }

    /// `f` for the potential scaled by `s`.
    pub fn sum(&self, s: f64) -> ScatteringData {
        let n = self.grid.len();
        let mut f = vec![ZERO; n * n];
        let mut sp = s;
        for t in &self.terms {
            for (a, b) in f.iter_mut().zip(t) {
                *a += b * sp;
            }
            sp *= s;
        }
        ScatteringData { e: self.e, grid: self.grid.clone(), f }
    }

    /// Sum of the first `count` terms at amplitude `s`.
    pub fn partial(&self, s: f64, count: usize) -> ScatteringData {
        let trimmed = BornSeries { terms: self.terms[..count.min(self.terms.len())].to_vec(), ..self.clone() };
        trimmed.sum(s)
    }

    /// Ratio of successive term norms at unit amplitude, taken at the tail.
    pub fn contraction(&self) -> f64 {
        let t = &self.term_norms;
        match t.len() {
            0 | 1 => 0.0,
            n if t[n - 2] > 0.0 => t[n - 1] / t[n - 2],
            _ => 0.0,
        }
    }
}

fn on_shell(t: &[Complex64], n: usize) -> Vec<Complex64> {
    // block rows are l, columns are k; ScatteringData wants k-major
    let mut out = vec![ZERO; n * n];
    for l in 0..n {
        for k in 0..n {
            out[k * n + l] = t[l * n + k];
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct LsSolution {
    pub data: ScatteringData,
    pub iterations: usize,
    pub contraction: f64,
    /// `max |f(k,l) - f(-l,-k)|` over node pairs.
    pub reciprocity_defect: f64,
}

/// Solve the Lippmann-Schwinger equation for `f` on all node pairs.
pub fn solve_f_ls(pot: &AnalyticPotential, grid: &SphereGrid, cfg: &RunConfig) -> Result<LsSolution> {
    let series = BornSeries::build(pot, grid, cfg, 1.0)?;
    let data = series.sum(1.0);
    let reciprocity_defect = reciprocity_defect(&data);
    Ok(LsSolution { iterations: series.order(), contraction: series.contraction(), data, reciprocity_defect })
}

/// `max |f(k,l) - f(-l,-k)|`, or 0 when the grid has no antipodes.
pub fn reciprocity_defect(f: &ScatteringData) -> f64 {
    let n = f.n();
    let mut worst = 0.0f64;
    for k in 0..n {
        let Some(ak) = f.grid.antipode(k) else { return 0.0 };
        for l in 0..n {
            let al = f.grid.antipode(l).expect("antipodes exist");
            worst = worst.max((f.get(k, l) - f.get(al, ak)).norm());
        }
    }
    worst
}

/// Node counts of the complex-k quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusRule {
    pub n_s: usize,
    pub n_alpha: usize,
    pub n_theta: usize,
    /// Integration ball radius in ξ; `None` means `7/w_min`.
    pub radius: Option<f64>,
}

impl Default for TorusRule {
    fn default() -> Self {
        TorusRule { n_s: 12, n_alpha: 16, n_theta: 20, radius: None }
    }
}

/// Nyström solution of `H(k,p) = v̂(p) - ∫ v̂(p+ξ) H(k,-ξ) / (ξ² + 2k·ξ) dξ`
/// for one complex `k`.
///
/// The kernel is singular on the circle `ξ² + 2Re k·ξ = 0, Im k·ξ = 0`.
/// Coordinates `(θ, s, α)` around that circle turn `1/(ξ²+2kξ)` times the
/// volume element into a bounded function, after which plain Gauss rules
/// apply.
#[derive(Debug, Clone)]
pub struct ComplexKSolution {
    pub k: ComplexMomentum,
    /// Quadrature points `ξ_j` with kernel weights `w_j / (ξ_j² + 2k·ξ_j)`.
    pub nodes: Vec<Vec3>,
    pub weights: Vec<Complex64>,
    /// `H(k, -ξ_j)`.
    pub values: Vec<Complex64>,
    pub iterations: usize,
    /// Ratio of the last two increments of the successive approximations.
    pub contraction: f64,
}

impl ComplexKSolution {
    /// `H(k, p)` at any `p` from the equation itself.
    pub fn eval(&self, pot: &AnalyticPotential, p: &Vec3) -> Complex64 {
        pot.vhat(p)
            - self
                .nodes
                .iter()
                .zip(&self.weights)
                .zip(&self.values)
                .map(|((xi, w), u)| w * pot.vhat(&(*p + *xi)) * u)
                .sum::<Complex64>()
    }
}

/// Quadrature points and kernel weights for `∫_{|ξ|<R} g(ξ)/(ξ²+2k·ξ) dξ`.
pub fn torus_quadrature(k: &ComplexMomentum, rule: &TorusRule, radius: f64) -> Result<(Vec<Vec3>, Vec<Complex64>)> {
    let a = k.re();
    let b = k.im();
    let (an, bn) = (a.norm(), b.norm());
    if bn <= 1e-14 * k.e.sqrt() {
        return Err(Error::Degenerate("k is real; the complex-k equation needs Im k ≠ 0".into()));
    }
    let e3 = b.scale(1.0 / bn);
    // Re k ⟂ Im k on the variety; a = 0 only when |λ| = 1 is impossible here
    let e1 = if an > 0.0 { a.scale(1.0 / an) } else { any_perp(&e3) };
    let e2 = e3.cross(&e1);
    let theta_half = if radius >= an { PI } else { (radius / an).asin() };
    let thetas = if theta_half >= PI {
        periodic(rule.n_theta, -PI)
    } else {
        gauss_legendre(rule.n_theta, -theta_half, theta_half)
    };
    let alphas = periodic(rule.n_alpha, -PI);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for &(th, wt) in &thetas {
        let rho_hat = e1.scale(th.cos()) + e2.scale(th.sin());
        let c = rho_hat.scale(an) - a;
        for &(al, wa) in &alphas {
            let (sa, ca) = al.sin_cos();
            let d = rho_hat.scale(ca) + e3.scale(sa);
            // ray c + s d inside the ball
            let cd = c.dot(&d);
            let disc = cd * cd - c.norm2() + radius * radius;
            if disc <= 0.0 {
                continue;
            }
            let root = disc.sqrt();
            let lo = (-cd - root).max(0.0);
            let mut hi = -cd + root;
            if ca < 0.0 {
                hi = hi.min(an / -ca);
            }
            if hi <= lo {
                continue;
            }
            for (s, ws) in gauss_legendre(rule.n_s, lo, hi) {
                let rho = an + s * ca;
                let den = Complex64::new(2.0 * an * ca + s, 2.0 * bn * sa);
                nodes.push(c + d.scale(s));
                weights.push(Complex64::new(rho * ws * wa * wt, 0.0) / den);
            }
        }
    }
    Ok((nodes, weights))
}

fn any_perp(v: &Vec3) -> Vec3 {
    let t = if v.0[0].abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
    v.cross(&t).unit()
}

struct TorusSystem {
    nodes: Vec<Vec3>,
    weights: Vec<Complex64>,
    rhs: Vec<Complex64>,
    kernel: Vec<Complex64>,
}

impl TorusSystem {
    fn new(pot: &AnalyticPotential, k: &ComplexMomentum, rule: &TorusRule) -> Result<Self> {
        let radius = rule.radius.unwrap_or(7.0 / pot.min_width());
        let (nodes, weights) = torus_quadrature(k, rule, radius)?;
        let n = nodes.len();
        let rhs = nodes.iter().map(|xi| pot.vhat(&-*xi)).collect();
        // K[i][j] = W_j v̂(ξ_j - ξ_i)
        let kernel = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let (nodes, weights) = (&nodes, &weights);
                (0..n).map(move |j| weights[j] * pot.vhat(&(nodes[j] - nodes[i])))
            })
            .collect();
        Ok(TorusSystem { nodes, weights, rhs, kernel })
    }

    fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        self.kernel.par_chunks(u.len()).map(|row| row.iter().zip(u).map(|(a, b)| a * b).sum()).collect()
    }
}

/// Spectral radius estimate of the complex-k operator: the geometric mean of
/// increment ratios over a fixed number of power steps from the right-hand
/// side. It is homogeneous in the potential's amplitude, which the last
/// Neumann ratio of a converged solve is not.
pub fn complex_k_rate(pot: &AnalyticPotential, k: &ComplexMomentum, rule: &TorusRule) -> Result<f64> {
    const STEPS: usize = 40;
    if pot.is_zero() {
        return Ok(0.0);
    }
    let sys = TorusSystem::new(pot, k, rule)?;
    let mut term = sys.rhs.clone();
    let mut log_sum = 0.0;
    for _ in 0..STEPS {
        let norm = sup(&term);
        if norm == 0.0 {
            return Ok(0.0);
        }
        term.iter_mut().for_each(|z| *z /= norm);
        term = sys.apply(&term);
        log_sum += sup(&term).ln();
    }
    Ok((log_sum / STEPS as f64).exp())
}

pub fn complex_k_solver(
    pot: &AnalyticPotential,
    k: &ComplexMomentum,
    cfg: &RunConfig,
    rule: &TorusRule,
) -> Result<ComplexKSolution> {
    let sys = TorusSystem::new(pot, k, rule)?;
    let (nodes, weights, rhs) = (sys.nodes.clone(), sys.weights.clone(), sys.rhs.clone());
    let scale = sup(&rhs);
    let mut values = rhs.clone();
    if scale == 0.0 {
        return Ok(ComplexKSolution { k: *k, nodes, weights, values, iterations: 1, contraction: 0.0 });
    }
    let mut term = rhs.clone();
    let mut prev = scale;
    let mut growing = 0;
    for it in 1..=cfg.ls_max_iter {
        term = sys.apply(&term).into_iter().map(|z| -z).collect();
        for (v, t) in values.iter_mut().zip(&term) {
            *v += t;
        }
        let inc = sup(&term);
        let contraction = inc / prev;
        if inc <= cfg.ls_tol * scale {
            return Ok(ComplexKSolution { k: *k, nodes, weights, values, iterations: it, contraction });
        }
        if inc >= prev {
            growing += 1;
            if growing >= 3 {
                return Err(Error::Diverged { what: "complex-k", iterations: it, ratio: contraction });
            }
        } else {
            growing = 0;
        }
        prev = inc;
    }
    Err(Error::NotConverged { what: "complex-k", iterations: cfg.ls_max_iter, increment: prev / scale })
}

/// `H(k, p)` for each `p` in `ps`.
pub fn solve_h_complex(
    pot: &AnalyticPotential,
    k: &ComplexMomentum,
    ps: &[Vec3],
    cfg: &RunConfig,
) -> Result<Vec<Complex64>> {
    let sol = complex_k_solver(pot, k, cfg, &TorusRule::default())?;
    Ok(ps.iter().map(|p| sol.eval(pot, p)).collect())
}
