//! `semislant` — checks semi-slant structure of maps between coordinate
//! manifolds and reports which classical conditions hold.

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use semislant_cli::{build_options, parse_params, render, resolve_spec};
use semislant_core::analyze::{analyze, analyze_builtin, run_check};
use semislant_core::catalog;
use semislant_core::report::Verdict;
use std::io::Write;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "semislant",
    version,
    about = "Numerical verification of semi-slant structure for Riemannian maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Repeated parameter bindings, e.g. --param alpha=0.5235987755982988
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Number of quasi-random sample points in the box
    #[arg(long, default_value_t = 25)]
    samples: usize,
    /// Seed for the random test vectors
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Base check tolerance; the tiered profile scales proportionally
    /// (default first-order tier 1e-6)
    #[arg(long)]
    tol: Option<f64>,
    /// Base finite-difference step (default 1e-5; derivative-of-derivative
    /// quantities use ten times the base)
    #[arg(long = "fd-step")]
    fd_step: Option<f64>,
    /// One level of Richardson extrapolation on central differences
    #[arg(long)]
    richardson: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write the report here instead of standard output
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// List or export the built-in catalog
    Catalog {
        #[command(subcommand)]
        what: CatalogCommand,
    },
    /// Run every check against a catalog entry or a JSON map description
    Analyze {
        /// Catalog name or path to a map description file
        target: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a single named check
    Verify {
        /// Check name (see `semislant catalog checks`)
        check: String,
        /// Catalog name or path to a map description file
        target: String,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Subcommand)]
enum CatalogCommand {
    /// Names, dimensions, and expected structure of the built-in maps
    List {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Names of the checks `verify` accepts
    Checks,
}

fn emit(run: &RunArgs, text: String) -> Result<()> {
    match &run.out {
        Some(path) => {
            let mut f = std::fs::File::create(path)
                .with_context(|| format!("cannot create `{}`", path.display()))?;
            f.write_all(text.as_bytes())?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn catalog_list(format: Format) -> Result<()> {
    match format {
        Format::Text => {
            println!("name              m    n  params     description");
            for e in catalog::entries() {
                let spec = e.build(&Default::default())?;
                let params: Vec<&str> = e.defaults.iter().map(|(k, _)| *k).collect();
                println!(
                    "{:<14} {:>4} {:>4}  {:<10} {}",
                    e.name,
                    spec.dim_source,
                    spec.dim_target,
                    if params.is_empty() {
                        "-".to_string()
                    } else {
                        params.join(",")
                    },
                    e.description
                );
            }
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = catalog::entries()
                .iter()
                .map(|e| {
                    let spec = e.build(&Default::default()).expect("catalog entry builds");
                    serde_json::json!({
                        "name": e.name,
                        "dim_source": spec.dim_source,
                        "dim_target": spec.dim_target,
                        "params": e.defaults.iter().map(|(k, v)| (k.to_string(), v)).collect::<std::collections::BTreeMap<_, _>>(),
                        "description": e.description,
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&rows)?);
        }
    }
    Ok(())
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Catalog { what } => {
            match what {
                CatalogCommand::List { format } => catalog_list(format)?,
                CatalogCommand::Checks => {
                    for name in semislant_cli::check_names() {
                        println!("{name}");
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze { target, run } => {
            let params = parse_params(&run.params)?;
            let opts = build_options(run.samples, run.seed, run.tol, run.fd_step, run.richardson);
            let report = if catalog::entry(&target).is_ok() {
                analyze_builtin(&target, &params, &opts)?
            } else {
                let (spec, _) = resolve_spec(&target, &params)?;
                analyze(&spec, &opts)?
            };
            let text = match run.format {
                Format::Text => render::render_report(&report),
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&report)?),
            };
            emit(&run, text)?;
            Ok(if report.any_failed() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Verify { check, target, run } => {
            let params = parse_params(&run.params)?;
            let opts = build_options(run.samples, run.seed, run.tol, run.fd_step, run.richardson);
            let (spec, _) = resolve_spec(&target, &params)?;
            let report = run_check(&spec, &check, &opts)?;
            let text = match run.format {
                Format::Text => render::render_check(&report),
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&report)?),
            };
            emit(&run, text)?;
            Ok(if report.verdict == Verdict::Fail {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
