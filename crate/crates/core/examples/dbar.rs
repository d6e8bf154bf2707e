//! The d-bar stage on its own: boundary data, the Cauchy part `H⁰`, and the
//! fixed point `H̃ = H⁰ + M(H̃)`.

use isct::dbar::{h0_field, solve_fixed_point, DbarGrids};
use isct::domain::{RunConfig, SphereGrid};
use isct::faddeev::boundary_data;
use isct::potentials::{born_f, AnalyticPotential};

fn main() -> isct::Result<()> {
    let cfg = RunConfig { n_sphere: 10, n_lambda_circle: 12, n_lambda_radial: 4, n_p: 6, ..RunConfig::default() };
    let grids = DbarGrids::new(&cfg)?;
    let pot = AnalyticPotential::gaussian(0.5, 1.0, [0.0; 3]);
    let f = born_f(&pot, &SphereGrid::new(cfg.e, cfg.n_sphere)?);

    let (hplus, hminus) = boundary_data(&f, &grids.lgrid, &grids.pgrid, &cfg)?;
    let h0 = h0_field(&hplus, &hminus, &grids)?;
    let state = solve_fixed_point(&h0, &grids)?;
    let d = &state.diagnostics;
    println!(
        "{} λ-nodes x {} p-nodes: {} iterations, contraction {:.3e}, residual {:.1e}, {} skipped bracket nodes",
        grids.lgrid.len(),
        grids.pgrid.len(),
        d.iterations,
        d.contraction_estimate,
        d.residual,
        d.skipped_nodes
    );
    for (i, inc) in d.increments.iter().enumerate() {
        println!("  step {i}: increment {inc:.3e}");
    }
    Ok(())
}
