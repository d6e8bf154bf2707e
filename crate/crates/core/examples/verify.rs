//! Built-in verification suites. The d-bar suite takes several seconds, so
//! it only runs when asked: `cargo run --example verify -- dbar`.

use isct::domain::RunConfig;
use isct::verify::{run_suite, Suite};

fn main() -> isct::Result<()> {
    let names: Vec<String> = std::env::args().skip(1).collect();
    let names = if names.is_empty() { vec!["coords".into(), "cauchy".into(), "bounds".into()] } else { names };
    let cfg = RunConfig::default();
    for name in names {
        let report = run_suite(name.parse::<Suite>()?, &cfg)?;
        println!("{name}: {}", if report.pass { "pass" } else { "FAIL" });
        for c in &report.checks {
            println!("  {:<4} {}: {:.3e} (limit {:.3e})", if c.pass { "ok" } else { "bad" }, c.name, c.value, c.limit);
        }
    }
    Ok(())
}
