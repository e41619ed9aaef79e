//! `limcyc`: return maps, limit cycles, semistable folds and proposition
//! harnesses for planar polynomial vector fields.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use run::{Failure, Which};

#[derive(Parser, Debug)]
#[command(name = "limcyc", version, about = "Limit cycle laboratory for planar polynomial vector fields")]
struct Cli {
    /// JSON run configuration; all blocks are optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides `prop1.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Integrate one orbit and write `t,x,y,s` rows.
    Integrate,
    /// Sample the return map on the positive y-axis.
    Retmap,
    /// Detect, refine and classify cycles crossing the section.
    Cycles,
    /// Locate the double cycle of the quintic Lienard family.
    Semistable,
    /// Tabulate the fold parameter over a (b, c) grid.
    Phi,
    /// Track cycles across the rotation parameter.
    Sweep,
    /// Run a proposition harness.
    Verify {
        #[arg(value_enum)]
        which: Which,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match dispatch(&cli) {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            2
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {}: {e}", e.tag());
            1
        }
    };
    ExitCode::from(code as u8)
}

fn dispatch(cli: &Cli) -> run::Outcome {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(|e| Failure::Config(format!("{e:#}")))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.prop1.seed = seed;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Config(e.to_string()))?;
    }
    cfg.integrator.validate()?;
    let ctx = run::prepare(cfg, &cli.out)?;
    match cli.cmd {
        Cmd::Integrate => run::integrate(&ctx),
        Cmd::Retmap => run::retmap(&ctx),
        Cmd::Cycles => run::cycles(&ctx),
        Cmd::Semistable => run::semistable(&ctx),
        Cmd::Phi => run::phi(&ctx),
        Cmd::Sweep => run::sweep(&ctx),
        Cmd::Verify { which } => run::verify(&ctx, which),
    }
}
