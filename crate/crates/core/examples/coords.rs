//! The λ ↔ k chart: a round trip, the real locus `|λ| = 1`, and the
//! closed forms of `|Re k|`, `|Im k|`.

use isct::coords::{frame_of, im_k_norm, k_from_lambda, lambda_from_k, re_k_norm};
use isct::Vec3;
use num_complex::Complex64;

fn main() -> isct::Result<()> {
    let e = 4.0;
    let p = Vec3::new(0.7, -0.4, 0.3);
    let frame = frame_of(&p, &Vec3::new(0.0, 0.0, 1.0))?;

    for lambda in [Complex64::new(0.3, 0.2), Complex64::from_polar(1.0, 0.8), Complex64::new(-2.5, 1.1)] {
        let k = k_from_lambda(lambda, e, &frame)?;
        let back = lambda_from_k(&k, &frame)?;
        println!(
            "λ = {lambda:.3}: |Im k| = {:.4} (closed form {:.4}), |Re k| = {:.4} (closed form {:.4}), round trip {:.1e}",
            k.im().norm(),
            im_k_norm(lambda, &p, e),
            k.re().norm(),
            re_k_norm(lambda, &p, e),
            (back - lambda).norm()
        );
    }
    Ok(())
}
