//! Forward problem: the Lippmann-Schwinger amplitude of a Gaussian well on
//! the sphere grid, compared with the Born approximation.

use isct::domain::{RunConfig, SphereGrid};
use isct::forward::solve_f_ls;
use isct::potentials::{born_f, AnalyticPotential};

fn main() -> isct::Result<()> {
    let cfg = RunConfig { n_sphere: 10, ls_radial: 12, ..RunConfig::default() };
    let grid = SphereGrid::new(cfg.e, cfg.n_sphere)?;

    for amp in [0.1, 0.4, 1.6] {
        let pot = AnalyticPotential::gaussian(amp, 1.0, [0.0; 3]);
        let sol = solve_f_ls(&pot, &grid, &cfg)?;
        let born = born_f(&pot, &grid);
        let dev = sol.data.f.iter().zip(&born.f).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        println!(
            "amplitude {amp}: {} Neumann terms, contraction {:.3}, |f - f_Born| = {dev:.3e}, reciprocity defect {:.1e}",
            sol.iterations, sol.contraction, sol.reciprocity_defect
        );
    }
    Ok(())
}
