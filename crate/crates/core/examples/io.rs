//! Artifacts: scattering files in both encodings, and a manifest whose
//! hashes can be re-checked.

use isct::domain::{RunConfig, SphereGrid};
use isct::io_formats::{read_scattering, write_manifest, write_scattering, Encoding, Manifest};
use isct::potentials::{born_f, AnalyticPotential};

fn main() -> isct::Result<()> {
    let dir = std::env::temp_dir().join("isct-io-example");
    std::fs::create_dir_all(&dir).map_err(|e| isct::Error::Io { path: dir.clone(), source: e })?;
    let cfg = RunConfig { n_sphere: 6, ..RunConfig::default() };
    let f = born_f(&AnalyticPotential::gaussian(0.3, 1.0, [0.0; 3]), &SphereGrid::new(cfg.e, cfg.n_sphere)?);

    let bin = dir.join("data.scat");
    let csv = dir.join("data-csv.scat");
    write_scattering(&bin, &f, Encoding::F64le)?;
    write_scattering(&csv, &f, Encoding::Csv)?;
    let (a, b) = (read_scattering(&bin)?, read_scattering(&csv)?);
    let bit_exact = a.f == f.f;
    let csv_dev = b.f.iter().zip(&f.f).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    println!("binary round trip exact: {bit_exact}, csv deviation {csv_dev:.1e}");

    let manifest = Manifest::new("example", &serde_json::to_string(&cfg)?, &[], &[&bin, &csv])?;
    write_manifest(&dir.join("manifest.json"), &manifest)?;
    for h in &manifest.outputs {
        println!("{} {} ok={}", h.sha256, h.path.display(), h.verify()?);
    }
    Ok(())
}
