use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use isct::pipeline::{cmd_reconstruct, cmd_simulate, cmd_verify, Mode};
use isct::verify::Suite;
use isct::Error;

#[derive(Parser)]
#[command(name = "isct", version, about = "Fixed-energy inverse scattering via Faddeev functions and a d-bar fixed point")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Run configuration (JSON); defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the forward problem for a potential and write `data.scat`.
    Simulate {
        /// Potential spec (JSON list of Gaussian terms).
        #[arg(long)]
        potential: PathBuf,
    },
    /// Reconstruct v̂± and v from scattering data.
    Reconstruct {
        #[arg(long)]
        data: PathBuf,
        /// full | born | restricted
        #[arg(long, default_value = "full")]
        mode: String,
    },
    /// Run a verification suite: coords | cauchy | bounds | dbar | all.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

/// 2 for usage and I/O problems, 1 for failed checks and solvers.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Stage { source, .. } => exit_code(source),
        Error::Config { .. } | Error::Io { .. } | Error::Format { .. } | Error::Json(_) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    let config = cli.config.as_deref();
    match cli.cmd {
        Cmd::Simulate { potential } => {
            let (written, report) = cmd_simulate(config, &potential, &cli.out)?;
            println!(
                "simulate: {} Neumann terms, contraction {:.3e}, reciprocity defect {:.3e}",
                report.iterations, report.contraction, report.reciprocity_defect
            );
            println!("wrote {}", written.files[0].display());
            Ok(true)
        }
        Cmd::Reconstruct { data, mode } => {
            let mode: Mode = mode.parse()?;
            let (written, report) = cmd_reconstruct(config, &data, &cli.out, mode)?;
            println!("reconstruct ({mode}): gap {:.3e}", report.gap);
            if let Some(d) = &report.dbar {
                println!(
                    "dbar: {} iterations, contraction {:.3e}, residual {:.3e}",
                    d.iterations, d.contraction_estimate, d.residual
                );
            }
            println!("wrote {}", written.files[0].display());
            Ok(true)
        }
        Cmd::Verify { suite } => {
            let suite: Suite = suite.parse()?;
            let (path, report) = cmd_verify(config, suite, &cli.out)?;
            for c in &report.checks {
                println!("{} {}: {:.3e} (limit {:.3e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.limit);
            }
            println!("wrote {}", path.display());
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
