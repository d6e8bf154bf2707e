//! On-disk formats. Every file starts with a one-line JSON header.
//!
//! - `.scat`: scattering data, body either little-endian `f64` pairs
//!   (`k`-major) or CSV rows `k,l,re,im`.
//! - `.rec`: reconstruction, CSV sections for `v̂_±` on the p-grid and for
//!   `v_appr` on real-space points.
//! - `.json`: reports and run manifests.
//!
//! Writers go through a temporary file and a rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{ScatteringData, SphereGrid, SphereScheme};
use crate::error::{Error, Result};
use crate::vec3::Vec3;

pub const SCAT_MAGIC: &str = "isct-scat";
pub const REC_MAGIC: &str = "isct-rec";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    F64le,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatHeader {
    pub format: String,
    pub version: u32,
    #[serde(rename = "E")]
    pub e: f64,
    pub n_sphere: usize,
    pub scheme: SphereScheme,
    pub encoding: Encoding,
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), reason: reason.into() }
}

/// Write `bytes` to `path` via a sibling temporary file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| format_err(path, "not a file path"))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(bytes).and_then(|_| file.sync_all()).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Split off the header line.
fn split_header<'a>(path: &Path, bytes: &'a [u8]) -> Result<(&'a str, &'a [u8])> {
    let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| format_err(path, "missing header line"))?;
    let head = std::str::from_utf8(&bytes[..nl]).map_err(|_| format_err(path, "header is not UTF-8"))?;
    Ok((head, &bytes[nl + 1..]))
}

pub fn encode_scattering(data: &ScatteringData, encoding: Encoding) -> Result<Vec<u8>> {
    if data.f.iter().any(|v| !v.is_finite()) {
        return Err(Error::GridMismatch("refusing to write non-finite scattering data".into()));
    }
    let header = ScatHeader {
        format: SCAT_MAGIC.into(),
        version: FORMAT_VERSION,
        e: data.e,
        n_sphere: data.grid.n_polar,
        scheme: SphereScheme::GlProduct,
        encoding,
    };
    let mut out = serde_json::to_vec(&header)?;
    out.push(b'\n');
    let n = data.n();
    match encoding {
        Encoding::F64le => {
            out.reserve(16 * data.f.len());
            for v in &data.f {
                out.extend_from_slice(&v.re.to_le_bytes());
                out.extend_from_slice(&v.im.to_le_bytes());
            }
        }
        Encoding::Csv => {
            let mut s = String::from("k,l,re,im\n");
            for (i, v) in data.f.iter().enumerate() {
                s.push_str(&format!("{},{},{:e},{:e}\n", i / n, i % n, v.re, v.im));
            }
            out.extend_from_slice(s.as_bytes());
        }
    }
    Ok(out)
}

pub fn write_scattering(path: &Path, data: &ScatteringData, encoding: Encoding) -> Result<()> {
    write_atomic(path, &encode_scattering(data, encoding)?)
}

pub fn decode_scattering(path: &Path, bytes: &[u8]) -> Result<ScatteringData> {
    let (head, body) = split_header(path, bytes)?;
    let header: ScatHeader =
        serde_json::from_str(head).map_err(|e| format_err(path, format!("bad header: {e}")))?;
    if header.format != SCAT_MAGIC {
        return Err(format_err(path, format!("not a scattering file (format `{}`)", header.format)));
    }
    if header.version != FORMAT_VERSION {
        return Err(format_err(path, format!("version mismatch: file {} vs supported {FORMAT_VERSION}", header.version)));
    }
    let grid = SphereGrid::new(header.e, header.n_sphere)?;
    let n = grid.len();
    let count = n * n;
    let f = match header.encoding {
        Encoding::F64le => {
            if body.len() != 16 * count {
                return Err(format_err(path, format!("truncated body: {} bytes, expected {}", body.len(), 16 * count)));
            }
            body.chunks_exact(16)
                .map(|c| {
                    let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                    let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                    Complex64::new(re, im)
                })
                .collect::<Vec<_>>()
        }
        Encoding::Csv => {
            let text = std::str::from_utf8(body).map_err(|_| format_err(path, "body is not UTF-8"))?;
            let mut lines = text.lines();
            if lines.next() != Some("k,l,re,im") {
                return Err(format_err(path, "missing CSV column header"));
            }
            let mut f = vec![Complex64::new(0.0, 0.0); count];
            let mut seen = 0usize;
            for (row, line) in lines.enumerate() {
                let bad = || format_err(path, format!("bad CSV row {}", row + 1));
                let cols: Vec<&str> = line.split(',').collect();
                if cols.len() != 4 {
                    return Err(bad());
                }
                let k: usize = cols[0].parse().map_err(|_| bad())?;
                let l: usize = cols[1].parse().map_err(|_| bad())?;
                let re: f64 = cols[2].parse().map_err(|_| bad())?;
                let im: f64 = cols[3].parse().map_err(|_| bad())?;
                if k >= n || l >= n || k * n + l != row {
                    return Err(format_err(path, format!("dimension mismatch at CSV row {}", row + 1)));
                }
                f[row] = Complex64::new(re, im);
                seen += 1;
            }
            if seen != count {
                return Err(format_err(path, format!("truncated body: {seen} rows, expected {count}")));
            }
            f
        }
    };
    if f.iter().any(|v| !v.is_finite()) {
        return Err(format_err(path, "non-finite sample"));
    }
    ScatteringData::new(grid, f)
}

pub fn read_scattering(path: &Path) -> Result<ScatteringData> {
    decode_scattering(path, &read_bytes(path)?)
}

/// Check a data file against the run's energy and sphere resolution.
pub fn check_scattering(data: &ScatteringData, e: f64, n_sphere: usize, path: &Path) -> Result<()> {
    if (data.e - e).abs() > 1e-12 * e.abs().max(1.0) {
        return Err(format_err(path, format!("energy mismatch: file E = {}, config E = {e}", data.e)));
    }
    if data.grid.n_polar != n_sphere {
        return Err(format_err(path, format!("dimension mismatch: file n_sphere = {}, config {n_sphere}", data.grid.n_polar)));
    }
    Ok(())
}

/// Header of a `.rec` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecHeader {
    pub format: String,
    pub version: u32,
    #[serde(rename = "E")]
    pub e: f64,
    pub tau: f64,
    pub mu0: f64,
    pub mode: String,
    /// `sup (1+|p|)^{μ₀}|v̂_±|`.
    pub norm_plus: f64,
    pub norm_minus: f64,
    pub gap: f64,
    pub n_p: usize,
    pub n_x: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecFile {
    pub header: RecHeader,
    pub p: Vec<Vec3>,
    pub plus: Vec<Complex64>,
    pub minus: Vec<Complex64>,
    pub x: Vec<Vec3>,
    pub v: Vec<f64>,
}

const REC_P_COLUMNS: &str = "p_x,p_y,p_z,re_vhat_plus,im_vhat_plus,re_vhat_minus,im_vhat_minus";
const REC_X_COLUMNS: &str = "x,y,z,v_appr";

pub fn encode_rec(rec: &RecFile) -> Result<Vec<u8>> {
    if rec.p.len() != rec.plus.len() || rec.p.len() != rec.minus.len() || rec.x.len() != rec.v.len() {
        return Err(Error::GridMismatch("reconstruction columns differ in length".into()));
    }
    let mut s = serde_json::to_string(&rec.header)?;
    s.push('\n');
    s.push_str(REC_P_COLUMNS);
    s.push('\n');
    for ((p, a), b) in rec.p.iter().zip(&rec.plus).zip(&rec.minus) {
        s.push_str(&format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
            p.0[0], p.0[1], p.0[2], a.re, a.im, b.re, b.im
        ));
    }
    s.push_str(REC_X_COLUMNS);
    s.push('\n');
    for (x, v) in rec.x.iter().zip(&rec.v) {
        s.push_str(&format!("{:e},{:e},{:e},{:e}\n", x.0[0], x.0[1], x.0[2], v));
    }
    Ok(s.into_bytes())
}

pub fn write_rec(path: &Path, rec: &RecFile) -> Result<()> {
    write_atomic(path, &encode_rec(rec)?)
}

fn parse_row(path: &Path, line: &str, width: usize) -> Result<Vec<f64>> {
    let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(str::parse).collect();
    match vals {
        Ok(v) if v.len() == width => Ok(v),
        _ => Err(format_err(path, format!("bad row `{line}`"))),
    }
}

pub fn read_rec(path: &Path) -> Result<RecFile> {
    let bytes = read_bytes(path)?;
    let (head, body) = split_header(path, &bytes)?;
    let header: RecHeader = serde_json::from_str(head).map_err(|e| format_err(path, format!("bad header: {e}")))?;
    if header.format != REC_MAGIC || header.version != FORMAT_VERSION {
        return Err(format_err(path, "not a supported reconstruction file"));
    }
    let text = std::str::from_utf8(body).map_err(|_| format_err(path, "body is not UTF-8"))?;
    // every row is newline-terminated, so a missing final newline means a cut row
    if !text.ends_with('\n') {
        return Err(format_err(path, "truncated last row"));
    }
    let mut lines = text.lines();
    if lines.next() != Some(REC_P_COLUMNS) {
        return Err(format_err(path, "missing p-section header"));
    }
    let (mut p, mut plus, mut minus) = (vec![], vec![], vec![]);
    for _ in 0..header.n_p {
        let r = parse_row(path, lines.next().ok_or_else(|| format_err(path, "truncated p-section"))?, 7)?;
        p.push(Vec3::new(r[0], r[1], r[2]));
        plus.push(Complex64::new(r[3], r[4]));
        minus.push(Complex64::new(r[5], r[6]));
    }
    if lines.next() != Some(REC_X_COLUMNS) {
        return Err(format_err(path, "missing x-section header"));
    }
    let (mut x, mut v) = (vec![], vec![]);
    for _ in 0..header.n_x {
        let r = parse_row(path, lines.next().ok_or_else(|| format_err(path, "truncated x-section"))?, 4)?;
        x.push(Vec3::new(r[0], r[1], r[2]));
        v.push(r[3]);
    }
    if lines.next().is_some() {
        return Err(format_err(path, "trailing data"));
    }
    Ok(RecFile { header, p, plus, minus, x, v })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileHash {
    pub fn of(path: &Path) -> Result<Self> {
        Ok(FileHash { path: path.to_path_buf(), sha256: sha256_hex(&read_bytes(path)?) })
    }

    /// Recompute the hash and compare.
    pub fn verify(&self) -> Result<bool> {
        Ok(sha256_hex(&read_bytes(&self.path)?) == self.sha256)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config_sha256: String,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
}

impl Manifest {
    pub fn new(command: &str, config_json: &str, inputs: &[&Path], outputs: &[&Path]) -> Result<Self> {
        Ok(Manifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_sha256: sha256_hex(config_json.as_bytes()),
            inputs: inputs.iter().map(|p| FileHash::of(p)).collect::<Result<_>>()?,
            outputs: outputs.iter().map(|p| FileHash::of(p)).collect::<Result<_>>()?,
        })
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    write_json(path, manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ScatteringData {
        let grid = SphereGrid::new(4.0, 5).unwrap();
        ScatteringData::from_fn(grid, |k, l| Complex64::new(k.dot(l).sin() / 3.0, (k.0[0] - l.0[2]).cos() * 1e-7))
    }

    #[test]
    fn both_encodings_round_trip() {
        let d = sample();
        let p = Path::new("mem.scat");
        let bin = decode_scattering(p, &encode_scattering(&d, Encoding::F64le).unwrap()).unwrap();
        assert_eq!(bin.f, d.f);
        let csv = decode_scattering(p, &encode_scattering(&d, Encoding::Csv).unwrap()).unwrap();
        for (a, b) in csv.f.iter().zip(&d.f) {
            assert!((a - b).norm() <= 1e-15 * b.norm().max(1.0));
        }
    }

    #[test]
    fn malformed_files_are_rejected() {
        let d = sample();
        let p = Path::new("mem.scat");
        let bytes = encode_scattering(&d, Encoding::F64le).unwrap();
        let err = decode_scattering(p, &bytes[..bytes.len() - 8]).unwrap_err();
        assert!(err.to_string().contains("truncated"), "{err}");
        let text = String::from_utf8_lossy(&bytes[..60]).replace("\"version\":1", "\"version\":7");
        assert!(text.contains("\"version\":7"));
        let mut bumped = text.into_bytes();
        bumped.extend_from_slice(&bytes[60..]);
        assert!(decode_scattering(p, &bumped).unwrap_err().to_string().contains("version mismatch"));
        assert!(decode_scattering(p, b"no header").is_err());
        let err = check_scattering(&d, 9.0, 5, p).unwrap_err();
        assert!(err.to_string().contains("energy mismatch"));
    }
}
