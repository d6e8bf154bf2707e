//! Sums of Gaussians `v(x) = Σ aᵢ exp(-|x-cᵢ|²/wᵢ²)` with closed-form
//! Fourier transforms, the Born baseline, and band-limited inversion.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{PGrid, ScatteringData, SphereGrid};
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianTerm {
    pub amplitude: f64,
    pub width: f64,
    pub center: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnalyticPotential {
    pub terms: Vec<GaussianTerm>,
}

impl AnalyticPotential {
    pub fn new(terms: Vec<GaussianTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::config("potential", "needs at least one term"));
        }
        if let Some(t) = terms.iter().find(|t| !(t.width > 0.0) || !t.amplitude.is_finite()) {
            return Err(Error::config("potential", format!("bad term {t:?}")));
        }
        Ok(AnalyticPotential { terms })
    }

    pub fn gaussian(amplitude: f64, width: f64, center: [f64; 3]) -> Self {
        Self::new(vec![GaussianTerm { amplitude, width, center }]).expect("valid gaussian")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let pot: AnalyticPotential = serde_json::from_str(text)?;
        Self::new(pot.terms)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let terms = self.terms.iter().map(|t| GaussianTerm { amplitude: t.amplitude * s, ..*t }).collect();
        AnalyticPotential { terms }
    }

    pub fn min_width(&self) -> f64 {
        self.terms.iter().map(|t| t.width).fold(f64::INFINITY, f64::min)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.amplitude == 0.0)
    }

    pub fn v(&self, x: &Vec3) -> f64 {
        self.terms
            .iter()
            .map(|t| t.amplitude * (-(*x - Vec3(t.center)).norm2() / (t.width * t.width)).exp())
            .sum()
    }

    /// `v̂(p) = (2π)^{-3} ∫ e^{ip·x} v(x) dx`.
    pub fn vhat(&self, p: &Vec3) -> Complex64 {
        let p2 = p.norm2();
        self.terms
            .iter()
            .map(|t| {
                let mag = t.amplitude * (t.width / (2.0 * PI.sqrt())).powi(3)
                    * (-t.width * t.width * p2 / 4.0).exp();
                Complex64::from_polar(mag, p.dot(&Vec3(t.center)))
            })
            .sum()
    }

    /// Upper bound for `|v̂(p)|` depending only on `|p|`.
    pub fn vhat_envelope(&self, r: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.amplitude.abs() * (t.width / (2.0 * PI.sqrt())).powi(3) * (-t.width * t.width * r * r / 4.0).exp())
            .sum()
    }

    /// `∫_{|p|>radius} |v̂(p)| dp`, bounded through the envelope.
    pub fn tail_integral(&self, radius: f64) -> f64 {
        let wmin = self.min_width();
        let upper = radius + 14.0 / wmin;
        gauss_legendre(64, radius, upper)
            .iter()
            .map(|&(r, w)| w * 4.0 * PI * r * r * self.vhat_envelope(r))
            .sum()
    }
}

/// `f(k,l) = v̂(k-l)` on all node pairs.
pub fn born_f(pot: &AnalyticPotential, grid: &SphereGrid) -> ScatteringData {
    ScatteringData::from_fn(grid.clone(), |k, l| pot.vhat(&(*k - *l)))
}

#[derive(Debug, Clone)]
pub struct RealField {
    pub points: Vec<Vec3>,
    pub values: Vec<f64>,
    /// Largest imaginary part seen before taking the real part.
    pub max_imag: f64,
}

/// `v_appr(x) = ∫_{|p|<R} e^{-ip·x} v̂(p) dp` over the p-grid's ball
/// quadrature; tube cells take the value of their nearest node.
pub fn band_limited_ift(vhat: &[Complex64], grid: &PGrid, xs: &[Vec3]) -> Result<RealField> {
    if grid.is_empty() {
        return Err(Error::GridMismatch("empty p-grid".into()));
    }
    if vhat.len() != grid.len() {
        return Err(Error::GridMismatch(format!("{} samples for {} p-nodes", vhat.len(), grid.len())));
    }
    let quad = grid.ball_quadrature();
    let mut values = Vec::with_capacity(xs.len());
    let mut max_imag = 0.0f64;
    for x in xs {
        let s: Complex64 = quad
            .iter()
            .map(|(p, owner, w)| Complex64::from_polar(*w, -p.dot(x)) * vhat[*owner])
            .sum();
        max_imag = max_imag.max(s.im.abs());
        values.push(s.re);
    }
    Ok(RealField { points: xs.to_vec(), values, max_imag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_legendre;

    #[test]
    fn vhat_matches_direct_quadrature() {
        let pot = AnalyticPotential::gaussian(1.0, 1.0, [0.0; 3]);
        let expect = PI.powf(1.5) / (8.0 * PI.powi(3));
        assert!((pot.vhat(&Vec3::ZERO).re - expect).abs() < 1e-15);
        // separable 1D Gauss quadrature of (2π)^{-3}∫ e^{ipx} v(x) dx
        let pot = AnalyticPotential::gaussian(1.3, 0.8, [0.2, -0.1, 0.3]);
        let p = Vec3::new(0.7, -0.4, 1.1);
        let rule = gauss_legendre(60, -7.0, 7.0);
        let one_d = |a: usize| -> Complex64 {
            let c = pot.terms[0].center[a];
            rule.iter()
                .map(|&(x, w)| Complex64::from_polar(w * (-(x - c).powi(2) / 0.64).exp(), p.0[a] * x))
                .sum()
        };
        let direct = one_d(0) * one_d(1) * one_d(2) * 1.3 / (8.0 * PI.powi(3));
        assert!((direct - pot.vhat(&p)).norm() < 1e-6 * direct.norm());
    }

    #[test]
    fn symmetry_and_modulation() {
        let even = AnalyticPotential::gaussian(2.0, 1.5, [0.0; 3]);
        let p = Vec3::new(0.3, 0.9, -0.4);
        assert!(even.vhat(&p).im.abs() < 1e-16);
        assert_eq!(even.vhat(&p), even.vhat(&-p));
        let shifted = AnalyticPotential::gaussian(2.0, 1.5, [1.0, 2.0, 0.5]);
        assert!((shifted.vhat(&p).norm() - even.vhat(&p).norm()).abs() < 1e-15);
    }

    #[test]
    fn born_data_properties() {
        let grid = SphereGrid::new(4.0, 6).unwrap();
        let zero = born_f(&AnalyticPotential::gaussian(0.0, 1.0, [0.0; 3]), &grid);
        assert!(zero.f.iter().all(|v| v.norm() == 0.0));
        // reciprocity f(k,l) = f(-l,-k) holds for any real potential,
        // f(k,l) = f(-k,-l) only for even ones
        let shifted = born_f(&AnalyticPotential::gaussian(1.0, 1.2, [0.3, 0.0, -0.2]), &grid);
        let even = born_f(&AnalyticPotential::gaussian(1.0, 1.2, [0.0; 3]), &grid);
        let mut odd_part = 0.0f64;
        for i in 0..grid.len() {
            let a = grid.antipode(i).unwrap();
            for j in 0..grid.len() {
                let b = grid.antipode(j).unwrap();
                assert!((shifted.get(i, j) - shifted.get(b, a)).norm() < 1e-15);
                assert!((even.get(i, j) - even.get(a, b)).norm() < 1e-15);
                odd_part = odd_part.max((shifted.get(i, j) - shifted.get(a, b)).norm());
            }
        }
        assert!(odd_part > 1e-3);
    }

    #[test]
    fn inversion_of_wide_gaussian() {
        let pot = AnalyticPotential::gaussian(1.0, 2.0, [0.0; 3]);
        let grid = PGrid::new(4.0, Vec3::new(0.0, 0.0, 1.0), 0.05, 24).unwrap();
        let vh: Vec<Complex64> = grid.nodes.iter().map(|p| pot.vhat(p)).collect();
        let xs = [Vec3::ZERO, Vec3::new(0.5, 0.2, -0.3)];
        let rec = band_limited_ift(&vh, &grid, &xs).unwrap();
        let tail = pot.tail_integral(4.0);
        for (x, v) in xs.iter().zip(&rec.values) {
            assert!((v - pot.v(x)).abs() < tail + 2e-3, "{v} vs {}", pot.v(x));
        }
        assert!(rec.max_imag < 1e-8);
        let zero = band_limited_ift(&vec![Complex64::new(0.0, 0.0); grid.len()], &grid, &xs).unwrap();
        assert!(zero.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn potential_json() {
        let pot = AnalyticPotential::from_json(r#"[{"amplitude":0.5,"width":1.5,"center":[0,0,0]}]"#).unwrap();
        assert_eq!(pot.terms.len(), 1);
        assert!(AnalyticPotential::from_json("[]").is_err());
        assert!(AnalyticPotential::from_json(r#"[{"amplitude":1,"width":0,"center":[0,0,0]}]"#).is_err());
    }
}
