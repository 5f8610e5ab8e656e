//! `offcenter` — verification suites and propagator scans.
//!
//! Exit codes: 0 pass, 1 tolerance failure, 2 usage or computation error.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{resolve, CircleArgs, IdentityArgs, KernelArgs, PropagateArgs, SqueezedArgs};
use output::{emit, Format};

#[derive(Parser)]
#[command(name = "offcenter", version, about = "Off-center coherent-state resolutions and λ-family propagators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Matrix elements of an off-center resolution of unity in the number basis.
    VerifyIdentity(IdentityArgs),
    /// Reproducing property of the primary and secondary kernel ladders.
    VerifyKernels(KernelArgs),
    /// Semiclassical propagator rows against exact kernels, or a caustic scan.
    Propagate(PropagateArgs),
    /// Number states from the unit circle and circle-operator norm sequences.
    CircleRep(CircleArgs),
    /// Squeezed-state norms through the complex-λ resolution.
    SqueezedNorm(SqueezedArgs),
}

fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var("OFFCENTER_THREADS") {
        let n: usize = value
            .trim()
            .parse()
            .with_context(|| format!("OFFCENTER_THREADS must be a positive integer, got {value:?}"))?;
        if n == 0 {
            anyhow::bail!("OFFCENTER_THREADS must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    configure_threads()?;
    let (report, out, format) = match cli.command {
        Command::VerifyIdentity(a) => {
            let io = a.io.clone();
            (commands::verify_identity(resolve(a, &io)?)?, io.out, Format::Json)
        }
        Command::VerifyKernels(a) => {
            let io = a.io.clone();
            (commands::verify_kernels(resolve(a, &io)?)?, io.out, Format::Json)
        }
        Command::Propagate(a) => {
            let io = a.io.clone();
            (commands::propagate(resolve(a, &io)?)?, io.out, Format::Csv)
        }
        Command::CircleRep(a) => {
            let io = a.io.clone();
            (commands::circle_rep(resolve(a, &io)?)?, io.out, Format::Json)
        }
        Command::SqueezedNorm(a) => {
            let io = a.io.clone();
            (commands::squeezed_norm(resolve(a, &io)?)?, io.out, Format::Json)
        }
    };
    emit(&report, out.as_deref(), format)?;
    eprintln!("{}", report.summary);
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
