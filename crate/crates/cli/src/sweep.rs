//! Input-set size over a grid of frequency variances or couplings.
//!
//! Repetition `r` uses the same topology and standard-normal frequency
//! draws at every grid point, so grid points are paired per repetition.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use anyhow::{bail, Result};
use rayon::prelude::*;

use pinsync::netmodel::{
    gaussian_frequencies, gen_geometric, gen_line, ieee14, load_network, load_spec, GeometricParams,
};
use pinsync::selection::select_min_inputs;
use pinsync::{derive_seed, Network, ProblemSpec, SyncMode};

use crate::commands::{header, parse_grid, write_file, Context};
use crate::{Param, Scenario, Status, SweepArgs};

/// One selection run at one grid point.
#[derive(Debug, Clone)]
struct Row {
    value: f64,
    rep: usize,
    /// `None` when generation or selection failed.
    outcome: Option<Outcome>,
    status: String,
}

#[derive(Debug, Clone)]
struct Outcome {
    size: usize,
    certified: bool,
    g_bound: f64,
    inputs: String,
}

fn default_spec(scenario: Scenario, n: usize) -> Result<ProblemSpec> {
    let spec = match scenario {
        Scenario::Ieee14 => {
            let mut s = ProblemSpec::uniform(n, PI / 8.0, PI / 4.0, PI / 6.0)?;
            s.mode = SyncMode::Edge;
            s.gamma = PI / 3.0;
            s
        }
        Scenario::Geometric => ProblemSpec::uniform(n, PI / 8.0, PI / 4.0, PI / 5.0)?,
        Scenario::Line | Scenario::File => ProblemSpec::uniform(n, PI / 8.0, PI / 4.0, PI / 6.0)?,
    };
    spec.validate(n)?;
    Ok(spec)
}

fn build_network(
    args: &SweepArgs,
    base: Option<&Network>,
    value: f64,
    seed: u64,
) -> pinsync::Result<Network> {
    let (variance, coupling) = match args.param {
        Param::Variance => (value, args.coupling),
        Param::Coupling => (args.variance, value),
    };
    let stddev = variance.sqrt();
    match args.scenario {
        Scenario::Line => {
            let n = args.n.unwrap_or(10);
            gen_line(&gaussian_frequencies(n, stddev, seed)?, coupling)
        }
        Scenario::Geometric => gen_geometric(
            GeometricParams {
                n: args.n.unwrap_or(20),
                range: 100.0,
                density_target: 3.0,
                coupling,
                freq_stddev: stddev,
            },
            seed,
        ),
        Scenario::Ieee14 => {
            let net = ieee14(&gaussian_frequencies(14, stddev, seed)?)?;
            net.scaled_coupling(coupling)
        }
        Scenario::File => {
            let base = base.expect("file scenario loads its network");
            let net = match args.param {
                Param::Variance => {
                    base.with_omega(gaussian_frequencies(base.n(), stddev, seed)?)?
                }
                Param::Coupling => base.clone(),
            };
            net.scaled_coupling(coupling)
        }
    }
}

fn node_count(args: &SweepArgs, base: Option<&Network>) -> usize {
    match args.scenario {
        Scenario::Line => args.n.unwrap_or(10),
        Scenario::Geometric => args.n.unwrap_or(20),
        Scenario::Ieee14 => 14,
        Scenario::File => base.map_or(0, Network::n),
    }
}

fn run_point(
    args: &SweepArgs,
    base: Option<&Network>,
    spec: &ProblemSpec,
    seed: u64,
    value: f64,
    rep: usize,
) -> Row {
    let draw = derive_seed(seed, &[rep as u64]);
    let mut spec = spec.clone();
    spec.seed = derive_seed(seed, &[rep as u64, 1]);
    let failed = |status: String| Row {
        value,
        rep,
        outcome: None,
        status,
    };
    let net = match build_network(args, base, value, draw) {
        Ok(net) => net,
        Err(e) => return failed(format!("generation: {e}")),
    };
    match select_min_inputs(&net, &spec) {
        Ok(r) => Row {
            value,
            rep,
            status: if r.convergence_verdict {
                "ok".into()
            } else {
                "uncertified".into()
            },
            outcome: Some(Outcome {
                size: r.inputs.len(),
                certified: r.convergence_verdict,
                g_bound: r.g_bound.map_or(f64::NAN, |g| g.max),
                inputs: r.inputs.to_string(),
            }),
        },
        Err(e) => failed(format!("infeasible: {e}")),
    }
}

pub fn run(ctx: &Context, args: &SweepArgs) -> Result<Status> {
    let grid = parse_grid(&args.grid)?;
    if args.reps == 0 {
        bail!("--reps must be positive");
    }
    let base = match (args.scenario, &args.network) {
        (Scenario::File, Some(path)) => Some(load_network(path)?),
        (Scenario::File, None) => bail!("--scenario file requires --network"),
        _ => None,
    };
    let n = node_count(args, base.as_ref());
    let spec = match &args.spec {
        Some(path) => load_spec(path, n)?,
        None => default_spec(args.scenario, n)?,
    };
    let seed = ctx.seed_or(spec.seed);

    let jobs: Vec<(f64, usize)> = grid
        .iter()
        .flat_map(|&v| (0..args.reps).map(move |r| (v, r)))
        .collect();
    let rows: Vec<Row> = jobs
        .par_iter()
        .map(|&(v, r)| run_point(args, base.as_ref(), &spec, seed, v, r))
        .collect();

    let head = header(seed);
    let mut detail = head.clone();
    detail.push_str("param,rep,size,certified,g_bound,inputs,status\n");
    for row in &rows {
        match &row.outcome {
            Some(o) => {
                let _ = writeln!(
                    detail,
                    "{:?},{},{},{},{:.9},\"{}\",{}",
                    row.value, row.rep, o.size, o.certified, o.g_bound, o.inputs, row.status
                );
            }
            None => {
                let _ = writeln!(detail, "{:?},{},,,,,\"{}\"", row.value, row.rep, row.status);
            }
        }
    }

    let mut summary = head;
    summary.push_str("param,reps,feasible,mean_size,min_size,max_size,mode_size,mean_g_bound\n");
    for &v in &grid {
        let sizes: Vec<usize> = rows
            .iter()
            .filter(|r| r.value == v)
            .filter_map(|r| r.outcome.as_ref().map(|o| o.size))
            .collect();
        let bounds: Vec<f64> = rows
            .iter()
            .filter(|r| r.value == v)
            .filter_map(|r| r.outcome.as_ref().map(|o| o.g_bound))
            .collect();
        if sizes.is_empty() {
            let _ = writeln!(summary, "{v:?},{},0,,,,,", args.reps);
            continue;
        }
        let mean = sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &s in &sizes {
            *counts.entry(s).or_default() += 1;
        }
        // most frequent size, smallest on ties
        let mode = counts
            .iter()
            .fold(
                (0, 0),
                |best, (&s, &c)| if c > best.1 { (s, c) } else { best },
            )
            .0;
        let mean_g = bounds.iter().sum::<f64>() / bounds.len() as f64;
        let _ = writeln!(
            summary,
            "{v:?},{},{},{mean:.6},{},{},{mode},{mean_g:.9}",
            args.reps,
            sizes.len(),
            sizes.iter().min().unwrap(),
            sizes.iter().max().unwrap(),
        );
    }

    let dir = ctx.out_dir()?;
    write_file(&dir.join("sweep.csv"), &detail)?;
    write_file(&dir.join("summary.csv"), &summary)?;
    print!("{summary}");
    Ok(Status::Ok)
}
