//! End-to-end runs: simulate data from a potential, reconstruct `v̂_±` and
//! `v` from data, and run verification suites. The `cmd_*` functions add
//! file handling on top and back the `isct` binary.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coords::{frame_of, k_from_lambda};
use crate::dbar::{
    c5_quadrature, cap_h0, empirical_c4, h0_field, radii, solve_fixed_point, CapBound, DbarDiagnostics, DbarGrids, DbarState,
};
use crate::domain::{weighted_sup_norm_p, ComplexField2D, PGrid, RunConfig, ScatteringData, SphereGrid};
use crate::error::{Error, Result};
use crate::extract::{consistency_gap, reconstruct_v, vhat_pm, ReconstructionErrors, VhatPair};
use crate::faddeev::{boundary_data, taper_f};
use crate::forward::solve_f_ls;
use crate::io_formats::{
    check_scattering, read_scattering, write_json, write_manifest, write_rec, write_scattering, Encoding, Manifest,
    RecFile, RecHeader, REC_MAGIC, FORMAT_VERSION,
};
use crate::potentials::AnalyticPotential;
use crate::verify::{diagnostics_report, run_suite, Diagnostics, Suite, SuiteReport};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Full,
    Born,
    Restricted,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Mode::Full),
            "born" => Ok(Mode::Born),
            "restricted" => Ok(Mode::Restricted),
            _ => Err(Error::config("mode", format!("unknown mode `{s}` (full|born|restricted)"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::Born => "born",
            Mode::Restricted => "restricted",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    #[serde(rename = "E")]
    pub e: f64,
    pub n_sphere: usize,
    pub iterations: usize,
    pub contraction: f64,
    pub reciprocity_defect: f64,
}

/// Scattering data of `pot` on the configured sphere grid.
pub fn simulate(pot: &AnalyticPotential, cfg: &RunConfig) -> Result<(ScatteringData, SimulateReport)> {
    cfg.validate()?;
    let grid = SphereGrid::new(cfg.e, cfg.n_sphere)?;
    let sol = solve_f_ls(pot, &grid, cfg)?;
    let report = SimulateReport {
        e: cfg.e,
        n_sphere: cfg.n_sphere,
        iterations: sol.iterations,
        contraction: sol.contraction,
        reciprocity_defect: sol.reciprocity_defect,
    };
    Ok((sol.data, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: Mode,
    #[serde(rename = "E")]
    pub e: f64,
    pub tau: f64,
    pub mu0: f64,
    pub diagnostics: Option<Diagnostics>,
    pub dbar: Option<DbarDiagnostics>,
    /// Empirical bracket constant of the final iterate.
    pub c4_hat: Option<f64>,
    pub c5: Option<f64>,
    /// Values of `H⁰` changed by the cap.
    pub capped: usize,
    pub gap: f64,
    /// `sup (1+|p|)^{μ₀} |v̂_avg - v̂|` when the potential is known.
    pub weighted_error: Option<f64>,
    pub weighted_error_plus: Option<f64>,
    pub weighted_error_minus: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RecOutput {
    pub pgrid: PGrid,
    pub vhat: VhatPair,
    pub report: RunReport,
}

impl RecOutput {
    pub fn average(&self) -> Vec<Complex64> {
        self.vhat.average()
    }
}

/// `v̂(p) ≈ f(k, k-p)` averaged over the on-shell circle of `k` with
/// `k² = (k-p)² = E`.
pub fn born_vhat(f: &ScatteringData, grids: &DbarGrids) -> Result<Vec<Complex64>> {
    let nu = grids.cfg.nu();
    grids
        .pgrid
        .nodes
        .iter()
        .map(|p| {
            let frame = frame_of(p, &nu)?;
            let mut acc = Complex64::new(0.0, 0.0);
            for &z in &grids.lgrid.circle_nodes {
                let k = k_from_lambda(z, f.e, &frame)?.re();
                acc += f.value_at(&k, &(k - *p));
            }
            Ok(acc / grids.lgrid.n_circle as f64)
        })
        .collect()
}

fn weighted_errors(v: &VhatPair, grid: &PGrid, pot: &AnalyticPotential, mu0: f64) -> Result<(f64, f64, f64)> {
    let truth: Vec<Complex64> = grid.nodes.iter().map(|p| pot.vhat(p)).collect();
    let err = |w: &[Complex64]| -> Result<f64> {
        let d: Vec<Complex64> = w.iter().zip(&truth).map(|(a, b)| a - b).collect();
        weighted_sup_norm_p(&d, grid, mu0)
    };
    Ok((err(&v.average())?, err(&v.plus)?, err(&v.minus)?))
}

/// Intermediate results of the full-mode stages.
#[derive(Debug, Clone)]
pub struct FullRun {
    pub diagnostics: Diagnostics,
    pub hplus: ComplexField2D,
    pub hminus: ComplexField2D,
    /// `H⁰` after the cap.
    pub h0: ComplexField2D,
    pub capped: usize,
    pub state: DbarState,
    pub vhat: VhatPair,
    pub c4: f64,
    pub c5: f64,
}

/// Diagnostics, `H±`, capped `H⁰`, the fixed point and `v̂_±` for data that
/// is already tapered if need be. Refuses to run when the diagnostics do not
/// show a contraction.
pub fn solve_full(data: &ScatteringData, cfg: &RunConfig, pot: Option<&AnalyticPotential>, grids: &DbarGrids) -> Result<FullRun> {
    let diag = diagnostics_report(data, pot, cfg, None).map_err(|e| e.at_stage("diagnostics"))?;
    if !diag.contraction_ok {
        let factor = diag.eta_hat.unwrap_or(0.0).max(diag.delta1_hat);
        return Err(Error::NotContractive { factor }.at_stage("diagnostics"));
    }
    let (hplus, hminus) = boundary_data(data, &grids.lgrid, &grids.pgrid, cfg).map_err(|e| e.at_stage("faddeev"))?;
    let h0 = h0_field(&hplus, &hminus, grids).map_err(|e| e.at_stage("cauchy"))?;
    let eta = diag.eta_hat.unwrap_or(diag.delta1_hat);
    let (h0, capped) = cap_h0(&h0, &CapBound { n: diag.n_data, eta, delta: diag.delta1_hat }, &grids.pgrid, cfg);
    let mut state = solve_fixed_point(&h0, grids).map_err(|e| e.at_stage("dbar"))?;
    let vhat = vhat_pm(&state, &hplus, &hminus, grids).map_err(|e| e.at_stage("extract"))?;
    let c4 = empirical_c4(&state.htilde, &state.bracket, grids)?;
    let c5 = c5_quadrature(24);
    let (r1, r2) = radii(diag.n_data, eta, c4, c5, cfg);
    state.diagnostics.r1 = Some(r1);
    state.diagnostics.r2 = Some(r2);
    let diagnostics = Diagnostics { r1: Some(r1), ..diag };
    Ok(FullRun { diagnostics, hplus, hminus, h0, capped, state, vhat, c4, c5 })
}

/// Reconstruct `v̂_±` on the p-grid from scattering data. With `pot` the
/// report carries the true weighted errors and the complex-k contraction
/// ratio.
pub fn reconstruct(f: &ScatteringData, cfg: &RunConfig, mode: Mode, pot: Option<&AnalyticPotential>) -> Result<RecOutput> {
    let grids = DbarGrids::new(cfg)?;
    if (f.e - cfg.e).abs() > 1e-12 * cfg.e {
        return Err(Error::GridMismatch(format!("energy mismatch: data E = {}, config E = {}", f.e, cfg.e)));
    }
    let mut report = RunReport {
        mode,
        e: cfg.e,
        tau: cfg.tau,
        mu0: cfg.mu0,
        diagnostics: None,
        dbar: None,
        c4_hat: None,
        c5: None,
        capped: 0,
        gap: 0.0,
        weighted_error: None,
        weighted_error_plus: None,
        weighted_error_minus: None,
    };
    let vhat = match mode {
        Mode::Born => {
            let v = born_vhat(f, &grids).map_err(|e| e.at_stage("born"))?;
            VhatPair { plus: v.clone(), minus: v }
        }
        Mode::Full | Mode::Restricted => {
            let tapered;
            let data = if mode == Mode::Restricted {
                tapered = taper_f(f, cfg.tau0, cfg.tau).map_err(|e| e.at_stage("taper"))?;
                &tapered
            } else {
                f
            };
            let run = solve_full(data, cfg, pot, &grids)?;
            report.capped = run.capped;
            report.c4_hat = Some(run.c4);
            report.c5 = Some(run.c5);
            report.dbar = Some(run.state.diagnostics.clone());
            report.diagnostics = Some(run.diagnostics);
            run.vhat
        }
    };
    report.gap = consistency_gap(&vhat.plus, &vhat.minus, &grids.pgrid, cfg.mu0)?;
    if let Some(pot) = pot {
        let (avg, plus, minus) = weighted_errors(&vhat, &grids.pgrid, pot, cfg.mu0)?;
        report.weighted_error = Some(avg);
        report.weighted_error_plus = Some(plus);
        report.weighted_error_minus = Some(minus);
    }
    Ok(RecOutput { pgrid: grids.pgrid, vhat, report })
}

/// Real-space sample points: a cubic lattice of 9 points per axis spaced
/// by half the shortest resolved wavelength.
pub fn x_grid(cfg: &RunConfig) -> Vec<Vec3> {
    let h = std::f64::consts::PI / cfg.ball_radius();
    let idx = -4..=4;
    idx.clone()
        .flat_map(|i| {
            let idx = idx.clone();
            idx.clone().flat_map(move |j| idx.clone().map(move |k| Vec3::new(i as f64 * h, j as f64 * h, k as f64 * h)))
        })
        .collect()
}

/// The `.rec` payload of a reconstruction.
pub fn rec_file(out: &RecOutput, cfg: &RunConfig, pot: Option<&AnalyticPotential>) -> Result<(RecFile, Option<ReconstructionErrors>)> {
    let xs = x_grid(cfg);
    let rec = reconstruct_v(&out.average(), &out.pgrid, &xs, pot)?;
    let header = RecHeader {
        format: REC_MAGIC.into(),
        version: FORMAT_VERSION,
        e: cfg.e,
        tau: cfg.tau,
        mu0: cfg.mu0,
        mode: out.report.mode.to_string(),
        norm_plus: weighted_sup_norm_p(&out.vhat.plus, &out.pgrid, cfg.mu0)?,
        norm_minus: weighted_sup_norm_p(&out.vhat.minus, &out.pgrid, cfg.mu0)?,
        gap: out.report.gap,
        n_p: out.pgrid.len(),
        n_x: xs.len(),
    };
    let file = RecFile {
        header,
        p: out.pgrid.nodes.clone(),
        plus: out.vhat.plus.clone(),
        minus: out.vhat.minus.clone(),
        x: xs,
        v: rec.field.values,
    };
    Ok((file, rec.errors))
}

fn load_config(path: Option<&Path>) -> Result<(RunConfig, String)> {
    let cfg = match path {
        Some(p) => {
            if !p.exists() {
                return Err(Error::io(p, std::io::Error::new(std::io::ErrorKind::NotFound, "config not found")));
            }
            RunConfig::load(p)?
        }
        None => RunConfig::default(),
    };
    cfg.validate()?;
    let json = cfg.to_json();
    Ok((cfg, json))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Paths written by a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Written {
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

/// Writes `data.scat`, `simulate.json` and `manifest.json` into `out`.
pub fn cmd_simulate(config: Option<&Path>, potential: &Path, out: &Path) -> Result<(Written, SimulateReport)> {
    let (cfg, cfg_json) = load_config(config)?;
    if !potential.exists() {
        return Err(Error::io(potential, std::io::Error::new(std::io::ErrorKind::NotFound, "potential not found")));
    }
    let pot = AnalyticPotential::load(potential)?;
    let (data, report) = simulate(&pot, &cfg).map_err(|e| e.at_stage("simulate"))?;
    ensure_dir(out)?;
    let scat = out.join("data.scat");
    let rep = out.join("simulate.json");
    write_scattering(&scat, &data, Encoding::F64le)?;
    write_json(&rep, &report)?;
    let manifest = out.join("manifest.json");
    let mut inputs = vec![potential];
    inputs.extend(config);
    write_manifest(&manifest, &Manifest::new("simulate", &cfg_json, &inputs, &[&scat, &rep])?)?;
    Ok((Written { files: vec![scat, rep], manifest }, report))
}

/// Writes `<mode>.rec`, `<mode>.json` and `manifest.json` into `out`.
pub fn cmd_reconstruct(config: Option<&Path>, data: &Path, out: &Path, mode: Mode) -> Result<(Written, RunReport)> {
    let (cfg, cfg_json) = load_config(config)?;
    if !data.exists() {
        return Err(Error::io(data, std::io::Error::new(std::io::ErrorKind::NotFound, "data not found")));
    }
    let f = read_scattering(data)?;
    check_scattering(&f, cfg.e, cfg.n_sphere, data)?;
    let res = reconstruct(&f, &cfg, mode, None)?;
    let (rec, _) = rec_file(&res, &cfg, None)?;
    ensure_dir(out)?;
    let rec_path = out.join(format!("{mode}.rec"));
    let rep_path = out.join(format!("{mode}.json"));
    write_rec(&rec_path, &rec)?;
    write_json(&rep_path, &res.report)?;
    let manifest = out.join("manifest.json");
    let mut inputs = vec![data];
    inputs.extend(config);
    write_manifest(&manifest, &Manifest::new("reconstruct", &cfg_json, &inputs, &[&rec_path, &rep_path])?)?;
    Ok((Written { files: vec![rec_path, rep_path], manifest }, res.report))
}

/// Writes `verify-<suite>.json` into `out`.
pub fn cmd_verify(config: Option<&Path>, suite: Suite, out: &Path) -> Result<(PathBuf, SuiteReport)> {
    let (cfg, _) = load_config(config)?;
    let report = run_suite(suite, &cfg)?;
    ensure_dir(out)?;
    let name = serde_json::to_value(suite)?.as_str().unwrap_or("suite").to_owned();
    let path = out.join(format!("verify-{name}.json"));
    write_json(&path, &report)?;
    Ok((path, report))
}
