//! `v̂_±` from the limits `λ → 0` and `λ → ∞` of the solved `H̃`, and the
//! band-limited real-space reconstruction.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dbar::{DbarGrids, DbarState};
use crate::domain::{weighted_sup_norm_p, ComplexField2D, PGrid, Side};
use crate::error::{Error, Result};
use crate::potentials::{band_limited_ift, AnalyticPotential, RealField};
use crate::vec3::Vec3;

/// `v̂₊` and `v̂₋` on the p-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VhatPair {
    pub plus: Vec<Complex64>,
    pub minus: Vec<Complex64>,
}

impl VhatPair {
    pub fn average(&self) -> Vec<Complex64> {
        self.plus.iter().zip(&self.minus).map(|(a, b)| (a + b) * 0.5).collect()
    }
}

fn mean(xs: &[Complex64]) -> Complex64 {
    xs.iter().sum::<Complex64>() / xs.len() as f64
}

/// `v̂₊ = ⟨H₊⟩ - (1/π)∫∫_{D₊} (H̃,H̃)/ζ` and `v̂₋ = ⟨H₋⟩ + (1/π)∫∫_{D₋} (H̃,H̃)/ζ`,
/// where `⟨·⟩` is the mean over `T`.
pub fn vhat_pm(state: &DbarState, hplus: &ComplexField2D, hminus: &ComplexField2D, grids: &DbarGrids) -> Result<VhatPair> {
    let lg = &grids.lgrid;
    let n_p = grids.pgrid.len();
    if state.bracket.n_rows != lg.len() || state.bracket.n_p != n_p {
        return Err(Error::GridMismatch("state was not solved on these grids".into()));
    }
    for h in [hplus, hminus] {
        if h.n_rows != lg.n_circle || h.n_p != n_p {
            return Err(Error::GridMismatch(format!("boundary field {}x{}", h.n_rows, h.n_p)));
        }
    }
    let area = |side: Side, j: usize| -> Complex64 {
        lg.range(side).map(|i| state.bracket.get(i, j) * lg.area_weights[i] / lg.nodes[i]).sum::<Complex64>() / PI
    };
    let plus = (0..n_p).map(|j| mean(&hplus.column(j)) - area(Side::Inner, j)).collect();
    let minus = (0..n_p).map(|j| mean(&hminus.column(j)) + area(Side::Outer, j)).collect();
    Ok(VhatPair { plus, minus })
}

/// `sup_p (1+|p|)^{μ₀} |v̂₊ - v̂₋|`.
pub fn consistency_gap(vp: &[Complex64], vm: &[Complex64], grid: &PGrid, mu0: f64) -> Result<f64> {
    if vp.len() != vm.len() {
        return Err(Error::GridMismatch(format!("{} vs {} samples", vp.len(), vm.len())));
    }
    let d: Vec<Complex64> = vp.iter().zip(vm).map(|(a, b)| a - b).collect();
    weighted_sup_norm_p(&d, grid, mu0)
}

/// Error bookkeeping of a real-space reconstruction against a known
/// potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionErrors {
    /// `∫_{|p|<R} |v̂_appr - v̂| dp`.
    pub in_band: f64,
    /// `∫_{|p|>R} |v̂| dp`.
    pub tail: f64,
    /// `max_x |v_appr(x) - v(x)|` over the requested points.
    pub max_error: f64,
}

impl ReconstructionErrors {
    pub fn bound(&self) -> f64 {
        self.in_band + self.tail
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub field: RealField,
    pub errors: Option<ReconstructionErrors>,
}

/// `v_appr(x) = ∫_{|p|<R} e^{-ipx} v̂(p) dp`, with the error split when the
/// true potential is known.
pub fn reconstruct_v(vhat: &[Complex64], grid: &PGrid, xs: &[Vec3], pot: Option<&AnalyticPotential>) -> Result<Reconstruction> {
    let field = band_limited_ift(vhat, grid, xs)?;
    let errors = pot.map(|pot| {
        let in_band = grid
            .ball_quadrature()
            .iter()
            .map(|(p, owner, w)| w * (vhat[*owner] - pot.vhat(p)).norm())
            .sum();
        let max_error = xs.iter().zip(&field.values).map(|(x, v)| (v - pot.v(x)).abs()).fold(0.0, f64::max);
        ReconstructionErrors { in_band, tail: pot.tail_integral(grid.radius), max_error }
    });
    Ok(Reconstruction { field, errors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::RunConfig;

    fn grids() -> DbarGrids {
        let cfg = RunConfig { n_lambda_circle: 8, n_lambda_radial: 4, n_p: 4, ..RunConfig::default() };
        DbarGrids::new(&cfg).unwrap()
    }

    fn state(g: &DbarGrids, bracket: Complex64) -> DbarState {
        let z = ComplexField2D::zeros(g.lgrid.len(), g.pgrid.len());
        DbarState {
            h0: z.clone(),
            htilde: z.clone(),
            bracket: ComplexField2D::from_fn(z.n_rows, z.n_p, |_, _| bracket),
            diagnostics: Default::default(),
        }
    }

    #[test]
    fn constant_boundary_data_gives_the_constant() {
        let g = grids();
        let c = Complex64::new(0.3, -0.1);
        let h = ComplexField2D::from_fn(g.lgrid.n_circle, g.pgrid.len(), |_, _| c);
        let v = vhat_pm(&state(&g, Complex64::new(0.0, 0.0)), &h, &h, &g).unwrap();
        assert!(v.plus.iter().chain(&v.minus).all(|x| (x - c).norm() < 1e-15));
        // a constant bracket integrates to zero against 1/ζ on annuli
        let v = vhat_pm(&state(&g, Complex64::new(2.0, 1.0)), &h, &h, &g).unwrap();
        assert!(v.plus.iter().chain(&v.minus).all(|x| (x - c).norm() < 1e-12));
    }

    #[test]
    fn gap_of_a_weight_is_one() {
        let g = grids();
        let vm: Vec<Complex64> = g.pgrid.nodes.iter().map(|p| Complex64::new(p.0[0], 1.0)).collect();
        let vp: Vec<Complex64> =
            vm.iter().zip(&g.pgrid.nodes).map(|(v, p)| v + (1.0 + p.norm()).powf(-2.0)).collect();
        assert_eq!(consistency_gap(&vm, &vm, &g.pgrid, 2.0).unwrap(), 0.0);
        assert!((consistency_gap(&vp, &vm, &g.pgrid, 2.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_field_reconstructs_zero() {
        let g = grids();
        let z = vec![Complex64::new(0.0, 0.0); g.pgrid.len()];
        let r = reconstruct_v(&z, &g.pgrid, &[Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0)], None).unwrap();
        assert!(r.field.values.iter().all(|v| *v == 0.0));
    }
}
