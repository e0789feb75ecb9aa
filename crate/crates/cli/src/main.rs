mod output;
mod run;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qe_core::qe::Tolerances;
use sha2::{Digest, Sha256};

use run::{Flags, REGISTRY};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Check quasi-Einstein identities on the manifold or Lie algebra described
/// by a spec file.
///
/// Exit status: 0 all checks pass, 1 a tolerance failed, 2 input or parse
/// error, 3 a solver did not converge.
#[derive(Debug, Parser)]
#[command(name = "qecheck", version)]
struct Cli {
    /// Spec file (sections [manifold] or [algebra], [field], [params], [checks], [grid]).
    #[arg(required_unless_present = "list_checks")]
    spec: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Grid resolution per axis, overriding [grid].
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    /// Override a tolerance for every check, e.g. --tol solution=1e-9. Wins over [checks] values.
    #[arg(long = "tol", value_name = "NAME=VALUE", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    /// Print the check registry and tolerance names, then exit.
    #[arg(long)]
    list_checks: bool,
    /// Include wall-clock seconds per check (makes the output run-dependent).
    #[arg(long)]
    timings: bool,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let v: f64 = v.trim().parse().map_err(|_| format!("'{v}' is not a number"))?;
    Ok((k.trim().to_string(), v))
}

fn list_checks() {
    println!("checks:");
    for c in &REGISTRY {
        let scope = if c.algebra { "manifold, algebra" } else { "manifold" };
        println!("  {:<17} [{scope}] {} (bare value sets '{}')", c.name, c.about, c.primary);
    }
    println!("tolerances:");
    for (name, value, about) in Tolerances::describe() {
        println!("  {name:<9} {value:<8e} {about}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_checks {
        list_checks();
        return ExitCode::SUCCESS;
    }
    let path = cli.spec.expect("required by clap");
    let bytes = match std::fs::read(&path) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("qecheck: cannot read {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    let Ok(text) = String::from_utf8(bytes.clone()) else {
        eprintln!("qecheck: {} is not UTF-8", path.display());
        return ExitCode::from(2);
    };
    let hash = hex::encode(Sha256::digest(&bytes));
    let flags = Flags { grid: cli.grid, tolerances: cli.tol, timings: cli.timings };

    let report = match run::run(&text, hash, &flags) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("qecheck: {}: {e}", path.display());
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let rendered = match cli.format {
        Format::Json => output::json(&report),
        Format::Csv => output::csv(&report),
    };
    match &cli.out {
        Some(out) => {
            if let Err(e) = std::fs::write(out, rendered) {
                eprintln!("qecheck: cannot write {}: {e}", out.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{rendered}"),
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        for c in report.checks.iter().filter(|c| !c.report.passed()) {
            for e in c.report.failures() {
                eprintln!(
                    "qecheck: {} / {} [{}] failed: residual {:e} > tolerance {:e}",
                    c.name,
                    e.check,
                    e.tag,
                    e.residual.unwrap_or(f64::NAN),
                    e.tolerance
                );
            }
        }
        ExitCode::from(1)
    }
}

