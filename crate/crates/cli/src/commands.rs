use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context as _, Result};
use rayon::prelude::*;

use pinsync::dynamics::{
    check_practical_sync, random_initial_state, simulate as integrate, SimOptions, SyncReport,
    DEFAULT_FREQ_TOL,
};
use pinsync::invariance::certify;
use pinsync::netmodel::{
    format_network, format_spec, gaussian_frequencies, gen_geometric as geometric,
    gen_line as line, ieee14, load_network, load_spec, parse_angle, GeometricParams,
};
use pinsync::selection::{select_max_cohesiveness, select_min_inputs};
use pinsync::{derive_seed, Error, InputSet, Network, PhaseBox, ProblemSpec, SyncMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::Status;

type TrialRun = std::result::Result<(SyncReport, String), Error>;

pub struct Context {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Context {
    pub fn seed_or(&self, fallback: u64) -> u64 {
        self.seed.unwrap_or(fallback)
    }

    /// Writes `text` to `--out` when given, stdout otherwise.
    pub fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => write_file(path, text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    pub fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir)
            .with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(dir)
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Reproduction header; the timestamp is confined to the last line.
pub fn header(seed: u64) -> String {
    let args: Vec<String> = std::env::args().collect();
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!(
        "# pinsync {}\n# args: {}\n# seed: {seed}\n# time: {now}\n",
        env!("CARGO_PKG_VERSION"),
        args.join(" ")
    )
}

/// Comma-separated 1-based ids; blank means no inputs.
pub fn parse_inputs(text: &str, n: usize) -> Result<InputSet> {
    let mut a = InputSet::empty(n);
    for field in text.split(',').map(str::trim).filter(|f| !f.is_empty()) {
        let id: usize = field
            .parse()
            .with_context(|| format!("bad node id `{field}`"))?;
        if id == 0 || id > n {
            bail!(Error::NodeOutOfRange { node: id, n });
        }
        a.insert(id - 1);
    }
    Ok(a)
}

pub fn load(network: &Path, spec: &Path, ctx: &Context) -> Result<(Network, ProblemSpec)> {
    let net = load_network(network)?;
    let mut spec = load_spec(spec, net.n())?;
    spec.seed = ctx.seed_or(spec.seed);
    Ok((net, spec))
}

fn tuple<T: std::fmt::Display>(xs: &[T]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

fn angles(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.12}")).collect();
    format!("({})", parts.join(", "))
}

fn over_pi(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{:.6}", x / PI)).collect();
    format!("({})", parts.join(", "))
}

fn one_based(xs: &[usize]) -> String {
    let parts: Vec<String> = xs.iter().map(|v| (v + 1).to_string()).collect();
    format!("[{}]", parts.join(","))
}

pub fn verify(ctx: &Context, network: &Path, spec: &Path, inputs: &str) -> Result<Status> {
    let (net, spec) = load(network, spec, ctx)?;
    let a = parse_inputs(inputs, net.n())?;
    let cert = certify(&net, &a, &spec);
    let mut out = header(spec.seed);
    let _ = writeln!(out, "inputs = {a}");
    let pi = &cert.pi;
    let _ = writeln!(out, "pi_found = {}", pi.found);
    let _ = writeln!(out, "pi_initial_levels = {}", tuple(&pi.initial_levels));
    let _ = writeln!(out, "pi_levels = {}", tuple(&pi.levels));
    let _ = writeln!(out, "pi_iterations = {}", pi.iterations);
    let _ = writeln!(out, "pi_trace = {}", one_based(&pi.trace));
    if pi.found {
        let _ = writeln!(out, "theta_bar = {}", angles(pi.pi_box.as_slice()));
        let _ = writeln!(out, "theta_bar_over_pi = {}", over_pi(pi.pi_box.as_slice()));
    }
    match &cert.convergence {
        Some(c) => {
            let _ = writeln!(
                out,
                "convergence_initial_levels = {}",
                tuple(&c.initial_levels)
            );
            let _ = writeln!(out, "convergence_levels = {}", tuple(&c.final_levels));
            let _ = writeln!(out, "target_levels = {}", tuple(&c.target_levels));
            let _ = writeln!(out, "convergence_iterations = {}", c.iterations);
            let _ = writeln!(out, "convergence_trace = {}", one_based(&c.trace));
            let _ = writeln!(out, "convergence_verdict = {}", c.verdict);
        }
        None => {
            let _ = writeln!(out, "convergence_verdict = false");
        }
    }
    let _ = writeln!(out, "certified = {}", cert.certified());
    ctx.emit(&out)?;
    Ok(if cert.certified() {
        Status::Ok
    } else {
        Status::Failed
    })
}

pub fn select(ctx: &Context, network: &Path, spec: &Path, k: Option<usize>) -> Result<Status> {
    let (net, spec) = load(network, spec, ctx)?;
    let result = match k {
        None => select_min_inputs(&net, &spec),
        Some(k) => select_max_cohesiveness(&net, &spec, k),
    };
    let mut out = header(spec.seed);
    let _ = writeln!(out, "mode = {}", if k.is_some() { "max" } else { "min" });
    if let Some(k) = k {
        let _ = writeln!(out, "k = {k}");
    }
    match result {
        Ok(r) => {
            out.push_str(&r.to_report());
            // budget mode only promises the invariant box
            let passed = match k {
                None => r.convergence_verdict,
                Some(_) => r.pi_certificate.found,
            };
            let _ = writeln!(out, "recertified = {passed}");
            ctx.emit(&out)?;
            Ok(if passed { Status::Ok } else { Status::Failed })
        }
        Err(Error::Infeasible(why)) => {
            let _ = writeln!(out, "infeasible = {why}");
            ctx.emit(&out)?;
            Ok(Status::Failed)
        }
        Err(e) => Err(e.into()),
    }
}

fn report_line(i: usize, r: &SyncReport) -> String {
    let exit = r
        .first_exit_time
        .map_or_else(|| "none".to_string(), |t| format!("{t:?}"));
    format!(
        "trial {i}: freq_sync={} freq_residual={:e} node_cohesive_at={:.9} edge_cohesive_at={:.9} stayed_in_bound={} first_exit_time={exit}",
        r.freq_sync, r.freq_residual, r.node_cohesive_at, r.edge_cohesive_at, r.stayed_in_bound
    )
}

pub fn simulate(
    ctx: &Context,
    network: &Path,
    spec: &Path,
    inputs: &str,
    trials: usize,
    opts: SimOptions,
) -> Result<Status> {
    let (net, spec) = load(network, spec, ctx)?;
    let a = parse_inputs(inputs, net.n())?;
    let dir = ctx.out_dir()?;
    let runs: Vec<(usize, TrialRun)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[i as u64]));
            let theta0 = random_initial_state(&spec.init, &a, &mut rng);
            let run = integrate(&net, &a, &theta0, &opts).map(|traj| {
                let report = check_practical_sync(&traj, &net, &spec.bound, DEFAULT_FREQ_TOL);
                (report, traj.to_csv())
            });
            (i + 1, run)
        })
        .collect();
    let head = header(spec.seed);
    let mut summary = head.clone();
    let _ = writeln!(summary, "inputs = {a}");
    let _ = writeln!(summary, "trials = {trials}");
    let _ = writeln!(
        summary,
        "horizon = {:?}\ndt = {:?}\nrecord_every = {}",
        opts.horizon, opts.dt, opts.record_every
    );
    let mut reports = Vec::new();
    for (i, run) in &runs {
        match run {
            Ok((report, csv)) => {
                let path = dir.join(format!("trial_{i:03}.csv"));
                write_file(&path, &format!("{head}{csv}"))?;
                let _ = writeln!(summary, "{}", report_line(*i, report));
                reports.push(report);
            }
            Err(e) => {
                let _ = writeln!(summary, "trial {i}: failed: {e}");
            }
        }
    }
    let all_in = reports.iter().all(|r| r.stayed_in_bound);
    let all_sync = reports.iter().all(|r| r.freq_sync);
    let worst = |f: fn(&SyncReport) -> f64| reports.iter().map(|r| f(r)).fold(0.0, f64::max);
    let _ = writeln!(summary, "completed = {}", reports.len());
    let _ = writeln!(summary, "all_stayed_in_bound = {all_in}");
    let _ = writeln!(summary, "all_freq_sync = {all_sync}");
    let _ = writeln!(
        summary,
        "max_node_cohesive_at = {:.9}",
        worst(|r| r.node_cohesive_at)
    );
    let _ = writeln!(
        summary,
        "max_edge_cohesive_at = {:.9}",
        worst(|r| r.edge_cohesive_at)
    );
    write_file(&dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(Status::Ok)
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|f| !f.is_empty())
        .map(|f| {
            f.parse::<f64>()
                .with_context(|| format!("bad number `{f}`"))
        })
        .collect()
}

pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let grid = parse_list(text)?;
    if grid.is_empty() {
        bail!("empty grid");
    }
    Ok(grid)
}

fn emit_network(ctx: &Context, seed: u64, net: &Network) -> Result<Status> {
    ctx.emit(&format!("{}{}", header(seed), format_network(net)))?;
    Ok(Status::Ok)
}

pub fn gen_line(ctx: &Context, omegas: &str, coupling: f64) -> Result<Status> {
    let net = line(&parse_list(omegas)?, coupling)?;
    emit_network(ctx, ctx.seed_or(0), &net)
}

pub fn gen_geometric(ctx: &Context, n: usize, coupling: f64, variance: f64) -> Result<Status> {
    let seed = ctx.seed_or(0);
    let p = GeometricParams {
        n,
        range: 100.0,
        density_target: 3.0,
        coupling,
        freq_stddev: variance.sqrt(),
    };
    emit_network(ctx, seed, &geometric(p, seed)?)
}

pub fn gen_ieee14(ctx: &Context, variance: f64) -> Result<Status> {
    let seed = ctx.seed_or(0);
    let omega = gaussian_frequencies(14, variance.sqrt(), seed)?;
    emit_network(ctx, seed, &ieee14(&omega)?)
}

#[allow(clippy::too_many_arguments)]
pub fn gen_spec(
    ctx: &Context,
    n: usize,
    init: &str,
    bound: &str,
    gamma: &str,
    mode: &str,
    levels: usize,
    samples: usize,
    epsilon: f64,
) -> Result<Status> {
    let angle = |s: &str| parse_angle(s).with_context(|| format!("bad angle `{s}`"));
    let mode = match mode {
        "node" => SyncMode::Node,
        "edge" => SyncMode::Edge,
        other => bail!("unknown mode `{other}`"),
    };
    let spec = ProblemSpec {
        init: PhaseBox::uniform(n, angle(init)?)?,
        bound: PhaseBox::uniform(n, angle(bound)?)?,
        gamma: angle(gamma)?,
        mode,
        levels,
        epsilon,
        samples,
        seed: ctx.seed_or(0),
    };
    spec.validate(n)?;
    ctx.emit(&format!("{}{}", header(spec.seed), format_spec(&spec)))?;
    Ok(Status::Ok)
}
