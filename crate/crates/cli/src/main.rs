//! `pinsync`: certify, select and simulate input nodes for pinned Kuramoto
//! networks.
//!
//! Exit status: 0 on success, 1 when a certificate or selection fails, 2 on
//! usage, I/O or parse errors.

mod commands;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "pinsync",
    version,
    about = "Input selection for pinned Kuramoto networks"
)]
struct Cli {
    /// Base seed; overrides the seed in the spec file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Report file, or output directory for `simulate` and `sweep`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run both level-iteration certificates for a given input set.
    Verify {
        network: PathBuf,
        spec: PathBuf,
        /// Comma-separated 1-based node ids; empty for no inputs.
        #[arg(long, default_value = "")]
        inputs: String,
    },
    /// Select input nodes greedily.
    Select {
        network: PathBuf,
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Min)]
        mode: Mode,
        /// Budget for `--mode max`.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Integrate the pinned dynamics from random initial states.
    Simulate {
        network: PathBuf,
        spec: PathBuf,
        #[arg(long, default_value = "")]
        inputs: String,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 200.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        #[arg(long, default_value_t = 10)]
        record_every: usize,
    },
    /// Input-set size over a parameter grid.
    Sweep(SweepArgs),
    /// Write a network or spec file.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    Line,
    Geometric,
    Ieee14,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Param {
    /// Variance of the intrinsic frequencies.
    Variance,
    /// Coupling strength (a factor on the file couplings for `ieee14` and
    /// `file`).
    Coupling,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub scenario: Scenario,
    #[arg(long, value_enum)]
    pub param: Param,
    /// Comma-separated grid values.
    #[arg(long)]
    pub grid: String,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// Network file for `--scenario file`.
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// Spec file; scenario defaults otherwise.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Node count for `line` and `geometric`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Coupling when it is not the swept parameter.
    #[arg(long, default_value_t = 1.0)]
    pub coupling: f64,
    /// Frequency variance when it is not the swept parameter.
    #[arg(long, default_value_t = 1.0)]
    pub variance: f64,
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// Path graph with the given frequencies.
    Line {
        #[arg(long)]
        omegas: String,
        #[arg(long, default_value_t = 1.0)]
        coupling: f64,
    },
    /// Connected random geometric graph (range 100, mean degree 3).
    Geometric {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        coupling: f64,
        #[arg(long, default_value_t = 1.0)]
        variance: f64,
    },
    /// IEEE 14-bus topology with Gaussian frequencies.
    Ieee14 {
        #[arg(long, default_value_t = 1.0)]
        variance: f64,
    },
    /// Spec with uniform boxes; angles accept `pi` expressions.
    Spec {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        init: String,
        #[arg(long)]
        bound: String,
        #[arg(long)]
        gamma: String,
        #[arg(long, default_value = "node")]
        mode: String,
        #[arg(long, default_value_t = pinsync::netmodel::DEFAULT_LEVELS)]
        levels: usize,
        #[arg(long, default_value_t = pinsync::netmodel::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = pinsync::netmodel::DEFAULT_EPSILON)]
        epsilon: f64,
    },
}

/// Outcome of a command that ran to completion.
pub enum Status {
    Ok,
    Failed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let ctx = commands::Context {
        seed: cli.seed,
        out: cli.out,
    };
    let result = match cli.command {
        Command::Verify {
            network,
            spec,
            inputs,
        } => commands::verify(&ctx, &network, &spec, &inputs),
        Command::Select {
            network,
            spec,
            mode,
            k,
        } => match (mode, k) {
            (Mode::Min, _) => commands::select(&ctx, &network, &spec, None),
            (Mode::Max, Some(k)) => commands::select(&ctx, &network, &spec, Some(k)),
            (Mode::Max, None) => {
                eprintln!("error: --mode max requires --k");
                return ExitCode::from(2);
            }
        },
        Command::Simulate {
            network,
            spec,
            inputs,
            trials,
            horizon,
            dt,
            record_every,
        } => commands::simulate(
            &ctx,
            &network,
            &spec,
            &inputs,
            trials,
            pinsync::dynamics::SimOptions {
                horizon,
                dt,
                record_every,
            },
        ),
        Command::Sweep(args) => sweep::run(&ctx, &args),
        Command::Gen { what } => match what {
            GenCommand::Line { omegas, coupling } => commands::gen_line(&ctx, &omegas, coupling),
            GenCommand::Geometric {
                n,
                coupling,
                variance,
            } => commands::gen_geometric(&ctx, n, coupling, variance),
            GenCommand::Ieee14 { variance } => commands::gen_ieee14(&ctx, variance),
            GenCommand::Spec {
                n,
                init,
                bound,
                gamma,
                mode,
                levels,
                samples,
                epsilon,
            } => commands::gen_spec(
                &ctx, n, &init, &bound, &gamma, &mode, levels, samples, epsilon,
            ),
        },
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
