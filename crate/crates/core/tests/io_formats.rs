//! Round trips, malformed input and manifests.

use std::path::Path;

use isct::domain::{RunConfig, ScatteringData, SphereGrid};
use isct::io_formats::{
    decode_scattering, encode_rec, encode_scattering, read_rec, read_scattering, write_manifest, write_rec,
    write_scattering, Encoding, Manifest, RecFile, RecHeader, FORMAT_VERSION, REC_MAGIC,
};
use isct::{Error, Vec3};
use num_complex::Complex64;
use proptest::prelude::*;

fn data(seed: u64) -> ScatteringData {
    let grid = SphereGrid::new(4.0, 4).unwrap();
    let mut x = seed as f64 * 0.618;
    ScatteringData::from_fn(grid, |k, l| {
        x = (x * 997.0 + 0.31).fract();
        Complex64::new((k.dot(l) + x).sin() * 1e-3, (x * 40.0).exp() * 1e-17)
    })
}

fn is_format_error(r: Result<ScatteringData, Error>, needle: &str) -> bool {
    matches!(r, Err(Error::Format { ref reason, .. }) if reason.contains(needle))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn binary_is_bit_exact_and_csv_close(seed in 0u64..1000, scale in -30i32..30) {
        let f = data(seed);
        let f = f.map(|_, _, v| v * 10f64.powi(scale));
        let p = Path::new("mem.scat");
        let bin = decode_scattering(p, &encode_scattering(&f, Encoding::F64le).unwrap()).unwrap();
        prop_assert_eq!(&bin.f, &f.f);
        let csv = decode_scattering(p, &encode_scattering(&f, Encoding::Csv).unwrap()).unwrap();
        for (a, b) in csv.f.iter().zip(&bin.f) {
            prop_assert!((a - b).norm() <= 1e-15 * b.norm());
        }
    }

    #[test]
    fn truncated_files_are_rejected(cut in 1usize..200) {
        let bytes = encode_scattering(&data(3), Encoding::F64le).unwrap();
        let cut = cut.min(bytes.len() - 1);
        let r = decode_scattering(Path::new("t.scat"), &bytes[..bytes.len() - cut]);
        let typed = matches!(r, Err(Error::Format { .. }));
        prop_assert!(typed);
    }
}

#[test]
fn version_and_dimension_mismatches_are_typed() {
    let bytes = encode_scattering(&data(1), Encoding::Csv).unwrap();
    let text = String::from_utf8(bytes).unwrap();
    let bumped = text.replacen(&format!("\"version\":{FORMAT_VERSION}"), "\"version\":99", 1);
    assert!(is_format_error(decode_scattering(Path::new("v.scat"), bumped.as_bytes()), "version mismatch"));
    let resized = text.replacen("\"n_sphere\":4", "\"n_sphere\":5", 1);
    assert!(matches!(decode_scattering(Path::new("d.scat"), resized.as_bytes()), Err(Error::Format { .. })));
    assert!(matches!(decode_scattering(Path::new("e.scat"), b"no header"), Err(Error::Format { .. })));
}

#[test]
fn files_round_trip_and_energy_is_checked() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.scat");
    let f = data(9);
    write_scattering(&path, &f, Encoding::F64le).unwrap();
    let g = read_scattering(&path).unwrap();
    assert_eq!(g.f, f.f);
    let err = isct::io_formats::check_scattering(&g, 9.0, 4, &path).unwrap_err();
    assert!(err.to_string().contains("energy mismatch"), "{err}");
    assert!(matches!(read_scattering(&dir.path().join("missing.scat")), Err(Error::Io { .. })));
}

#[test]
fn rec_round_trip_is_exact() {
    let rec = RecFile {
        header: RecHeader {
            format: REC_MAGIC.into(),
            version: FORMAT_VERSION,
            e: 4.0,
            tau: 0.5,
            mu0: 2.0,
            mode: "full".into(),
            norm_plus: 0.1,
            norm_minus: 0.2,
            gap: 1e-5,
            n_p: 2,
            n_x: 1,
        },
        p: vec![Vec3::new(0.1, 0.2, 0.3), Vec3::new(-1.0 / 3.0, 0.0, 2.0)],
        plus: vec![Complex64::new(1e-300, -0.7), Complex64::new(std::f64::consts::PI, 0.0)],
        minus: vec![Complex64::new(0.5, 0.5), Complex64::new(-1e10, 1.0 / 7.0)],
        x: vec![Vec3::new(1.0, 2.0, 3.0)],
        v: vec![-0.123456789012345],
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.rec");
    write_rec(&path, &rec).unwrap();
    assert_eq!(read_rec(&path).unwrap(), rec);
    let mut short = encode_rec(&rec).unwrap();
    short.truncate(short.len() - 10);
    std::fs::write(&path, &short).unwrap();
    assert!(matches!(read_rec(&path), Err(Error::Format { .. })));
}

#[test]
fn manifests_are_reproducible_and_resolve() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.scat");
    write_scattering(&out, &data(2), Encoding::Csv).unwrap();
    let cfg = RunConfig::default();
    let json = serde_json::to_string(&cfg).unwrap();
    let m1 = Manifest::new("simulate", &json, &[], &[&out]).unwrap();
    let m2 = Manifest::new("simulate", &json, &[], &[&out]).unwrap();
    assert_eq!(m1, m2);
    let other = serde_json::to_string(&RunConfig { tau: 0.6, ..cfg }).unwrap();
    assert_ne!(Manifest::new("simulate", &other, &[], &[&out]).unwrap().config_sha256, m1.config_sha256);

    let mpath = dir.path().join("manifest.json");
    write_manifest(&mpath, &m1).unwrap();
    let back: Manifest = serde_json::from_str(&std::fs::read_to_string(&mpath).unwrap()).unwrap();
    assert!(back.outputs.iter().all(|h| h.verify().unwrap()));
    write_scattering(&out, &data(5), Encoding::Csv).unwrap();
    assert!(!back.outputs[0].verify().unwrap());
}
