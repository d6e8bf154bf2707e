//! Faddeev functions from data: identities, linearity and taper bounds.

use isct::domain::{sup_norm_me, RunConfig, ScatteringData, SphereGrid};
use isct::faddeev::{apply_b_gamma, h_series, remainder_t, solve_h_gamma, taper_f};
use isct::potentials::{born_f, AnalyticPotential};
use isct::Vec3;
use num_complex::Complex64;
use proptest::prelude::*;

fn data(amp: f64) -> ScatteringData {
    born_f(&AnalyticPotential::gaussian(amp, 1.2, [0.1, -0.2, 0.0]), &SphereGrid::new(4.0, 8).unwrap())
}

fn perp(k: &Vec3, t: f64) -> Vec3 {
    let a = k.cross(&Vec3::new(0.3, 1.0, 0.2)).unit();
    let b = k.unit().cross(&a);
    a.scale(t.cos()) + b.scale(t.sin())
}

fn sup(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn b_gamma_is_linear(node in 0usize..64, t in 0.0f64..6.28, a in -3.0f64..3.0) {
        let f = data(0.5);
        let k = f.grid.nodes[node];
        let g = perp(&k, t);
        let u: Vec<Complex64> = (0..f.n()).map(|i| Complex64::new((i as f64).sin(), 0.1 * i as f64)).collect();
        let v = f.row(node).to_vec();
        let c = Complex64::new(a, 1.0);
        let comb: Vec<Complex64> = u.iter().zip(&v).map(|(x, y)| x * c + y).collect();
        let lhs = apply_b_gamma(&f, &g, &k, &comb);
        let (bu, bv) = (apply_b_gamma(&f, &g, &k, &u), apply_b_gamma(&f, &g, &k, &v));
        let d: Vec<Complex64> = lhs.iter().zip(bu.iter().zip(&bv)).map(|(l, (x, y))| l - (x * c + y)).collect();
        prop_assert!(sup(&d) <= 1e-12 * sup(&lhs).max(1e-300));
    }

    #[test]
    fn series_and_remainder_add_up(node in 0usize..64, t in 0.0f64..6.28, n in 1usize..5) {
        let f = data(0.5);
        let cfg = RunConfig::default();
        let k = f.grid.nodes[node];
        let g = perp(&k, t);
        let h = solve_h_gamma(&f, &g, &k, &cfg).unwrap().h;
        let s = h_series(&f, &g, &k, n);
        let r = remainder_t(&f, &g, &k, n, &cfg).unwrap();
        let d: Vec<Complex64> = h.iter().zip(s.iter().zip(&r)).map(|(a, (b, c))| a - b - c).collect();
        prop_assert!(sup(&d) <= 1e-9 * sup(&h));
    }

    #[test]
    fn taper_bounds(tau0 in 0.05f64..0.5, gap in 0.05f64..0.45) {
        let f = data(1.0);
        let tau = tau0 + gap;
        let (mu, mu0) = (4.0, 2.0);
        let t = taper_f(&f, tau0, tau).unwrap();
        let n = sup_norm_me(&f, mu).unwrap();
        prop_assert!(sup_norm_me(&t, mu).unwrap() <= n);
        let diff = ScatteringData::new(f.grid.clone(), f.f.iter().zip(&t.f).map(|(a, b)| a - b).collect()).unwrap();
        let bound = n / (1.0 + 4.0 * tau0 * tau0 * f.e).powf((mu - mu0) / 2.0);
        prop_assert!(sup_norm_me(&diff, mu0).unwrap() <= bound);
    }
}

#[test]
fn deviation_from_data_is_quadratic() {
    let cfg = RunConfig::default();
    let dev = |amp: f64| {
        let f = data(amp);
        let k = f.grid.nodes[20];
        let h = solve_h_gamma(&f, &perp(&k, 0.4), &k, &cfg).unwrap();
        let d: Vec<Complex64> = h.h.iter().zip(f.row(20)).map(|(a, b)| a - b).collect();
        sup(&d)
    };
    let (a, b, c) = (dev(0.2), dev(0.1), dev(0.05));
    for r in [a / b, b / c] {
        assert!((r.log2() - 2.0).abs() < 0.1, "{a} {b} {c}");
    }
}
