//! Faddeev functions from scattering data: `h_γ` with `γ = k/|k|` gives
//! back `f`, and `H±` on the unit circle feed the d-bar stage.

use isct::domain::{RunConfig, SphereGrid};
use isct::faddeev::{h_pm_on_t, solve_h_gamma};
use isct::potentials::{born_f, AnalyticPotential};
use isct::Vec3;
use num_complex::Complex64;

fn main() -> isct::Result<()> {
    let cfg = RunConfig { n_sphere: 10, ..RunConfig::default() };
    let grid = SphereGrid::new(cfg.e, cfg.n_sphere)?;
    let pot = AnalyticPotential::gaussian(0.4, 1.0, [0.0; 3]);
    let f = born_f(&pot, &grid);

    let k = grid.nodes[7];
    let slice = solve_h_gamma(&f, &k.unit(), &k, &cfg)?;
    let dev = slice.h.iter().zip(f.row(7)).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    println!("γ = k/|k|: {} iterations, max |h - f| = {dev:.2e}", slice.iterations);

    let p = Vec3::new(0.5, 0.2, 0.1);
    for t in [0.0, 1.0, 2.0] {
        let (hp, hm) = h_pm_on_t(&f, Complex64::from_polar(1.0, t), &p, &cfg)?;
        println!("H±(e^{{i{t}}}, p) = {hp:.5}, {hm:.5}   v̂(p) = {:.5}", pot.vhat(&p));
    }
    Ok(())
}
