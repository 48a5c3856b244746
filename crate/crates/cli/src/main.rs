//! `catrep`: analytic rates, oracle checks, Monte Carlo timing and parameter search for
//! entangled-coherent-state repeaters.

mod commands;
mod config;
mod figures;
mod table;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::RunConfig;
use figures::Figure;

#[derive(Parser, Debug)]
#[command(name = "catrep", version, about = "Entangled-coherent-state repeater calculator")]
struct Cli {
    /// TOML file with [link], [chain], [search] and [output] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides chain.rng_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides output.dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Elementary-link fidelity, success probability and time.
    Link {
        /// Also tabulate this many taps over (0, 0.5].
        #[arg(long)]
        sweep: Option<usize>,
    },
    /// Swap probabilities and fidelities per nesting level.
    Swap,
    /// Monte Carlo delivery time of the configured chain.
    Chain,
    /// Fastest (|alpha|^2, tap) above a fidelity floor.
    Optimize {
        /// Overrides search.fidelity_floor.
        #[arg(long)]
        floor: Option<f64>,
    },
    /// Tabulate one figure's curves.
    Figures {
        /// fig2, fig3, fig5 or fig6.
        #[arg(long)]
        figure: Figure,
    },
    /// Compare the closed forms with the Fock-space circuits.
    Verify {
        /// Scale the detector efficiency seen by the closed forms (fault injection).
        #[arg(long, default_value_t = 1.0)]
        corrupt_eta: f64,
    },
}

enum Status {
    Ok,
    VerificationFailed,
}

fn run(cli: Cli) -> Result<Status> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.chain.rng_seed = seed;
    }
    if let Some(dir) = cli.out {
        cfg.output.dir = Some(dir);
    }
    if let Command::Optimize { floor: Some(f) } = cli.command {
        cfg.search.fidelity_floor = f;
    }
    cfg.validate()?;
    let out = cfg.output.dir.clone();
    if let Some(d) = &out {
        std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
    }
    let out = out.as_deref();
    if cfg.is_zero_length() && !matches!(cli.command, Command::Link { .. }) {
        anyhow::bail!("[link] length_km = 0 is only meaningful for `link`");
    }

    match cli.command {
        Command::Link { sweep } => commands::link(&cfg, sweep, out)?,
        Command::Swap => commands::swap(&cfg, out)?,
        Command::Chain => commands::chain(&cfg, out)?,
        Command::Optimize { .. } => commands::optimize_cmd(&cfg, out)?,
        Command::Figures { figure } => {
            let t = figures::figure(figure, &cfg.link_params())?;
            t.emit(out)?;
            if out.is_some() {
                println!("wrote {}.csv ({} rows)", t.name, t.len());
            }
        }
        Command::Verify { corrupt_eta } => {
            let checks = verify::run(&cfg.link_params(), corrupt_eta).context("refusing to verify")?;
            for c in &checks {
                println!(
                    "{}: {} (worst {:.3} of tolerance)",
                    c.name,
                    if c.pass { "PASS" } else { "FAIL" },
                    c.worst_ratio
                );
            }
            if out.is_some() {
                verify::table(&checks).emit(out)?;
            }
            if checks.iter().any(|c| !c.pass) {
                return Ok(Status::VerificationFailed);
            }
        }
    }
    Ok(Status::Ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are validation errors; exit code 2 is reserved for failed checks
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::VerificationFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
