//! The chart `(λ, p) ↦ k(λ,p)` of the variety `k² = E, p² = 2k·p`, the
//! frame `θ(p), ω(p)`, and the characteristic circle `ξ(φ)` of the
//! ∂̄-kernel.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::vec3::{CVec3, Vec3};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub theta: Vec3,
    pub omega: Vec3,
    pub p: Vec3,
}

/// A point of `Σ_E = {k ∈ C³ : k·k = E}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMomentum {
    pub k: CVec3,
    pub e: f64,
}

impl ComplexMomentum {
    pub fn re(&self) -> Vec3 {
        self.k.re()
    }

    pub fn im(&self) -> Vec3 {
        self.k.im()
    }
}

/// `θ = ν×p/|ν×p|`, `ω = p×θ/|p|`.
pub fn frame_of(p: &Vec3, nu: &Vec3) -> Result<Frame> {
    let c = nu.cross(p);
    let pn = p.norm();
    if pn == 0.0 || c.norm() <= 1e-12 * pn.max(1e-300) {
        return Err(Error::Degenerate(format!("degenerate frame at p = {:?}", p.0)));
    }
    let theta = c.unit();
    let omega = p.cross(&theta).scale(1.0 / pn);
    Ok(Frame { theta, omega, p: *p })
}

fn half_chord(p: &Vec3, e: f64) -> Result<f64> {
    let s = e - p.norm2() / 4.0;
    if s <= 0.0 {
        return Err(Error::Degenerate(format!("p outside ball: |p| = {} >= 2√E", p.norm())));
    }
    Ok(s.sqrt())
}

/// `k = κ₁θ + κ₂ω + p/2`.
pub fn k_from_lambda(lambda: Complex64, e: f64, frame: &Frame) -> Result<ComplexMomentum> {
    if lambda == Complex64::new(0.0, 0.0) {
        return Err(Error::Degenerate("λ = 0".into()));
    }
    let c = half_chord(&frame.p, e)?;
    let inv = lambda.inv();
    let k1 = (lambda + inv) * (c / 2.0);
    let k2 = (inv - lambda) * I * (c / 2.0);
    let k = CVec3([0, 1, 2].map(|i| k1 * frame.theta.0[i] + k2 * frame.omega.0[i] + frame.p.0[i] / 2.0));
    Ok(ComplexMomentum { k, e })
}

/// `λ = k·(θ + iω) / (E - p²/4)^{1/2}`.
pub fn lambda_from_k(k: &ComplexMomentum, frame: &Frame) -> Result<Complex64> {
    let c = half_chord(&frame.p, k.e)?;
    Ok((k.k.dot_real(&frame.theta) + I * k.k.dot_real(&frame.omega)) / c)
}

/// `|Im k|` in closed form.
pub fn im_k_norm(lambda: Complex64, p: &Vec3, e: f64) -> f64 {
    let r = lambda.norm();
    (e - p.norm2() / 4.0).sqrt() / 2.0 * (r - 1.0 / r).abs()
}

/// `|Re k|` in closed form.
pub fn re_k_norm(lambda: Complex64, p: &Vec3, e: f64) -> f64 {
    let r = lambda.norm();
    ((e - p.norm2() / 4.0) / 4.0 * (r + 1.0 / r).powi(2) + p.norm2() / 4.0).sqrt()
}

/// The circle `{ξ ∈ R³ : ξ² + 2k·ξ = 0}` through the origin, parametrized
/// by `ξ(φ) = Re k (cos φ - 1) + k⊥ sin φ`, `k⊥ = Im k × Re k / |Im k|`.
#[derive(Debug, Clone, Copy)]
pub struct CharCircle {
    pub re_k: Vec3,
    pub k_perp: Vec3,
}

impl CharCircle {
    pub fn new(k: &ComplexMomentum) -> Result<Self> {
        let im = k.im();
        let n = im.norm();
        if n <= 1e-14 * k.e.sqrt() {
            return Err(Error::Degenerate("k real, k⊥ undefined".into()));
        }
        let re = k.re();
        Ok(CharCircle { re_k: re, k_perp: im.cross(&re).scale(1.0 / n) })
    }

    pub fn at(&self, phi: f64) -> Vec3 {
        let (s, c) = phi.sin_cos();
        self.re_k.scale(c - 1.0) + self.k_perp.scale(s)
    }

    /// Angle ψ with `ξ(ψ) = -p`, for `p` on the circle.
    pub fn psi_of(&self, p: &Vec3) -> f64 {
        let r2 = self.re_k.norm2();
        let c = 1.0 - p.dot(&self.re_k) / r2;
        let s = -p.dot(&self.k_perp) / r2;
        s.atan2(c)
    }
}

pub fn xi_circle(lambda: Complex64, e: f64, phi: f64, frame: &Frame) -> Result<Vec3> {
    let k = k_from_lambda(lambda, e, frame)?;
    Ok(CharCircle::new(&k)?.at(phi))
}

/// λ-coordinates of `(k, -ξ)` and `(k+ξ, p+ξ)`.
pub fn z1_z2(lambda: Complex64, p: &Vec3, e: f64, phi: f64, nu: &Vec3) -> Result<(Complex64, Complex64)> {
    let frame = frame_of(p, nu)?;
    let k = k_from_lambda(lambda, e, &frame)?;
    let xi = CharCircle::new(&k)?.at(phi);
    z_pair(&k, &xi, p, nu)
}

/// As [`z1_z2`] for a precomputed `k` and circle point `ξ`.
pub fn z_pair(k: &ComplexMomentum, xi: &Vec3, p: &Vec3, nu: &Vec3) -> Result<(Complex64, Complex64)> {
    let q1 = -*xi;
    let q2 = *p + *xi;
    let f1 = frame_of(&q1, nu).map_err(|_| Error::Degenerate("arg off chart".into()))?;
    let f2 = frame_of(&q2, nu).map_err(|_| Error::Degenerate("arg off chart".into()))?;
    let z1 = lambda_from_k(k, &f1)?;
    let k2 = ComplexMomentum { k: k.k.add_real(xi), e: k.e };
    let z2 = lambda_from_k(&k2, &f2)?;
    Ok((z1, z2))
}

/// `γ^± = ±p×(k-p/2)/(|p||k-p/2|)` for real `k = k(λ,p)`, `λ ∈ T`.
pub fn gamma_pm(lambda: Complex64, e: f64, frame: &Frame) -> Result<(Vec3, Vec3)> {
    if frame.p.norm() == 0.0 {
        return Err(Error::Degenerate("p = 0".into()));
    }
    let k = k_from_lambda(lambda, e, frame)?.re();
    let d = k - frame.p.scale(0.5);
    let g = frame.p.cross(&d).unit();
    Ok((g, -g))
}
