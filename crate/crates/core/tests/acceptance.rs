//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! fails. Runs without the libtest harness so the lines are always shown.

use std::path::Path;
use std::time::{Duration, Instant};

use isct::dbar::{dbar_residual, DbarGrids};
use isct::domain::{sup_norm_me, triple_norm, weighted_sup_norm_p, RunConfig, ScatteringData, SphereGrid};
use isct::faddeev::{solve_h_gamma, taper_f};
use isct::forward::{BornSeries, TorusRule};
use isct::pipeline::{cmd_reconstruct, cmd_simulate, reconstruct, simulate, solve_full, Mode};
use isct::potentials::AnalyticPotential;
use isct::verify::{run_suite, Suite};
use isct::Vec3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), isct::Error>;

fn unit() -> AnalyticPotential {
    AnalyticPotential::gaussian(1.0, 1.0, [0.0; 3])
}

/// Least-squares slope of `log y` against `log x`.
fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn suite(s: Suite) -> Outcome {
    let report = run_suite(s, &RunConfig::default())?;
    let worst = report
        .checks
        .iter()
        .map(|c| format!("{} {:.2e}/{:.0e}", c.name, c.value, c.limit))
        .collect::<Vec<_>>()
        .join("; ");
    Ok((report.pass, worst))
}

fn criterion_3(series: &BornSeries) -> Outcome {
    let cfg = RunConfig::default();
    let f = series.sum(0.4);
    let mut along = 0.0f64;
    for (i, k) in f.grid.nodes.iter().enumerate() {
        let s = solve_h_gamma(&f, &k.unit(), k, &cfg)?;
        along = along.max(s.h.iter().zip(f.row(i)).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
    }

    let (mu, mu0) = (cfg.mu, cfg.mu0);
    let n = sup_norm_me(&f, mu)?;
    let t = taper_f(&f, cfg.tau0, cfg.tau)?;
    let diff = ScatteringData::new(f.grid.clone(), f.f.iter().zip(&t.f).map(|(a, b)| a - b).collect())?;
    let norm_ok = sup_norm_me(&t, mu)? <= n;
    let tail_bound = n / (1.0 + 4.0 * cfg.tau0 * cfg.tau0 * cfg.e).powf((mu - mu0) / 2.0);
    let tail = sup_norm_me(&diff, mu0)?;

    let amps = [0.2, 0.1, 0.05, 0.025];
    let mut gaps = Vec::new();
    for &s in &amps {
        let f = series.sum(s);
        let mut g = 0.0f64;
        for i in [5usize, 60, 101, 170] {
            let k = f.grid.nodes[i];
            let gamma = k.cross(&Vec3::new(0.3, 1.0, 0.2)).unit();
            let h = solve_h_gamma(&f, &gamma, &k, &cfg)?;
            g = g.max(h.h.iter().zip(f.row(i)).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
        }
        gaps.push(g);
    }
    let slope = loglog_slope(&amps, &gaps);
    let scale = f.f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pass = along <= 1e-12 * scale && norm_ok && tail <= tail_bound && (slope - 2.0).abs() <= 0.2;
    Ok((
        pass,
        format!(
            "max |h_k/|k| - f| = {along:.1e}; taper norm ok {norm_ok}, tail {tail:.3e} <= {tail_bound:.3e}; \
             ||h_γ - f|| slope {slope:.3}"
        ),
    ))
}

fn criterion_5() -> Outcome {
    let cfg = RunConfig::default();
    let pot = unit().scaled(0.2);
    let points: Vec<(Complex64, Vec3)> = (0..20)
        .map(|i| {
            let t = i as f64;
            let r = [0.3, 0.45, 2.2, 3.0][i % 4];
            let p = Vec3::new(0.9 * (0.5 * t).cos(), 0.9 * (0.5 * t).sin(), 0.3 * (0.9 * t).sin());
            (Complex64::from_polar(r, 0.7 + 1.3 * t), p)
        })
        .collect();
    let levels = [
        (4e-2, TorusRule { n_s: 8, n_alpha: 10, n_theta: 12, radius: None }, 12),
        (2e-2, TorusRule { n_s: 10, n_alpha: 12, n_theta: 16, radius: None }, 16),
    ];
    let mut stats = Vec::new();
    for (step, rule, n_phi) in levels {
        let c = RunConfig { n_phi, ..cfg.clone() };
        let mut rel = Vec::new();
        for (lam, p) in &points {
            let r = dbar_residual(&pot, *lam, p, step, &c, &rule)?;
            rel.push(r.residual().norm() / r.lhs.norm().max(r.rhs.norm()));
        }
        let max = rel.iter().copied().fold(0.0, f64::max);
        let mean = rel.iter().sum::<f64>() / rel.len() as f64;
        stats.push((max, mean));
    }
    let (coarse, fine) = (stats[0], stats[1]);
    let pass = fine.0 <= 0.1 && fine.0 < coarse.0 && fine.1 < coarse.1;
    Ok((
        pass,
        format!(
            "20 points: max/mean relative residual {:.3e}/{:.3e} at step 4e-2, {:.3e}/{:.3e} at step 2e-2",
            coarse.0, coarse.1, fine.0, fine.1
        ),
    ))
}

fn criterion_6(series: &BornSeries) -> Outcome {
    let cfg = RunConfig::default();
    let amps = [1.6, 0.8, 0.4, 0.2];
    let mut full = Vec::new();
    let mut born0 = 0.0;
    for (i, &s) in amps.iter().enumerate() {
        let pot = unit().scaled(s);
        let f = series.sum(s);
        let e = reconstruct(&f, &cfg, Mode::Full, Some(&pot))?.report.weighted_error.unwrap_or(f64::NAN);
        full.push(e);
        if i == 0 {
            born0 = reconstruct(&f, &cfg, Mode::Born, Some(&pot))?.report.weighted_error.unwrap_or(f64::NAN);
        }
    }
    let slope = loglog_slope(&amps, &full);
    let pass = (slope - 2.0).abs() <= 0.3 && full[0] <= born0;
    let errs: Vec<String> = full.iter().map(|e| format!("{e:.3e}")).collect();
    Ok((
        pass,
        format!("full errors {} -> slope {slope:.3}; at amplitude 1.6 full {:.3e} vs born {born0:.3e}", errs.join(", "), full[0]),
    ))
}

fn criterion_7() -> Outcome {
    let pot = unit().scaled(0.4);
    let mut errs = Vec::new();
    // sphere nodes and p-nodes per axis grow like √E
    for (e, n_sphere, n_p) in [(4.0, 14, 8), (9.0, 21, 12), (16.0, 28, 16)] {
        let cfg = RunConfig { e, n_sphere, n_p, ls_radial: 8, ls_tol: 1e-8, ..RunConfig::default() };
        let (f, _) = simulate(&pot, &cfg)?;
        errs.push(reconstruct(&f, &cfg, Mode::Full, Some(&pot))?.report.weighted_error.unwrap_or(f64::NAN));
    }
    let pass = errs.windows(2).all(|w| w[1] <= 1.2 * w[0]);
    Ok((pass, format!("weighted errors at E = 4, 9, 16: {:.3e}, {:.3e}, {:.3e}", errs[0], errs[1], errs[2])))
}

fn max_ratio(inc: &[f64]) -> f64 {
    inc.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).fold(0.0, f64::max)
}

fn criterion_8(series: &BornSeries) -> Outcome {
    let cfg = RunConfig::default();
    let grids = DbarGrids::new(&cfg)?;
    let f = series.sum(0.4);
    let base = solve_full(&f, &cfg, None, &grids)?;
    let mut dv = Vec::new();
    let mut pass = true;
    let mut lines = Vec::new();
    for eps in [1e-3, 1e-2] {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut noisy = f.clone();
        for v in noisy.f.iter_mut() {
            *v *= Complex64::new(1.0, 0.0) + Complex64::from_polar(eps * rng.gen::<f64>(), rng.gen_range(-3.2..3.2));
        }
        let run = solve_full(&noisy, &cfg, None, &grids)?;
        let dh0 = triple_norm(&run.h0.sub(&base.h0)?, &grids.pgrid, cfg.mu0)?;
        let dht = triple_norm(&run.state.htilde.sub(&base.state.htilde)?, &grids.pgrid, cfg.mu0)?;
        let dist = |a: &[Complex64], b: &[Complex64]| {
            let d: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            weighted_sup_norm_p(&d, &grids.pgrid, cfg.mu0)
        };
        let d = dist(&run.vhat.plus, &base.vhat.plus)?.max(dist(&run.vhat.minus, &base.vhat.minus)?);
        let q = max_ratio(&run.state.diagnostics.increments).max(max_ratio(&base.state.diagnostics.increments));
        let bound = dh0 / (1.0 - q);
        pass &= q < 1.0 && dht <= bound && d <= bound;
        lines.push(format!("ε={eps:.0e}: Δv̂ {d:.3e}, ΔH̃ {dht:.3e} <= {bound:.3e} (q {q:.2e})"));
        dv.push(d);
    }
    pass &= dv[0] < dv[1];
    Ok((pass, lines.join("; ")))
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_default()
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| isct::Error::Io { path: "tempdir".into(), source: e })?;
    let pot = dir.path().join("potential.json");
    std::fs::write(&pot, r#"[{"amplitude": 0.4, "width": 1.0, "center": [0.1, 0.0, -0.2]}]"#)
        .map_err(|e| isct::Error::Io { path: pot.clone(), source: e })?;
    let (sim_dir, rec_dir) = (dir.path().join("sim"), dir.path().join("rec"));
    let mut runs = Vec::new();
    for _ in 0..2 {
        let (w, _) = cmd_simulate(None, &pot, &sim_dir)?;
        let sim = (read(&w.files[0]), read(&w.manifest));
        let (w, _) = cmd_reconstruct(None, &sim_dir.join("data.scat"), &rec_dir, Mode::Full)?;
        runs.push((sim, read(&w.files[0]), read(&w.manifest)));
    }
    let (a, b) = (&runs[0], &runs[1]);
    let same_scat = a.0 == b.0 && !a.0 .0.is_empty();
    let same_rec = a.1 == b.1 && !a.1.is_empty();
    let same_manifest = a.2 == b.2 && !a.2.is_empty();
    Ok((
        same_scat && same_rec && same_manifest,
        format!("identical data+manifest {same_scat}, .rec {same_rec}, manifest {same_manifest}"),
    ))
}

fn report(n: usize, budget: Option<Duration>, run: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let out = run();
    let dt = t.elapsed();
    let in_time = budget.map_or(true, |b| dt <= b);
    let (pass, detail) = match out {
        Ok((p, d)) => (p && in_time, d),
        Err(e) => (false, format!("error: {e}")),
    };
    let budget = budget.map_or(String::new(), |b| format!(" / {}s", b.as_secs()));
    println!("{} criterion {n}: {detail} [{:.1}s{budget}]", if pass { "PASS" } else { "FAIL" }, dt.as_secs_f64());
    pass
}

fn main() {
    let secs = Duration::from_secs;
    let cfg = RunConfig::default();
    let series = SphereGrid::new(cfg.e, cfg.n_sphere).and_then(|g| BornSeries::build(&unit(), &g, &cfg, 1.6));
    let series = match series {
        Ok(s) => s,
        Err(e) => {
            println!("FAIL setup: {e}");
            std::process::exit(1);
        }
    };
    let results = [
        report(1, Some(secs(5)), || suite(Suite::Coords)),
        report(2, Some(secs(30)), || suite(Suite::Cauchy)),
        report(3, Some(secs(120)), || criterion_3(&series)),
        report(4, Some(secs(60)), || suite(Suite::Bounds)),
        report(5, Some(secs(600)), criterion_5),
        report(6, Some(secs(900)), || criterion_6(&series)),
        report(7, None, criterion_7),
        report(8, None, || criterion_8(&series)),
        report(9, None, criterion_9),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
