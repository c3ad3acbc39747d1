//! Pinned Kuramoto dynamics in the reference frame.
//!
//! Free nodes follow `dθ_v/dt = -Σ K_uv sin(θ_v - θ_u) + ω_v`; input nodes
//! stay at zero.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::netmodel::{InputSet, Network, PhaseBox};
use crate::trigbound::principal_angle;

/// `σ : [-2π, 2π] -> [-π, π]`.
pub fn wrap_angle(x: f64) -> Result<f64> {
    if !(-TAU..=TAU).contains(&x) {
        return Err(Error::AngleDomain(x));
    }
    Ok(if x < -PI {
        x + TAU
    } else if x < PI {
        x
    } else {
        x - TAU
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub horizon: f64,
    pub dt: f64,
    /// Record one sample every this many steps (the last step is always kept).
    pub record_every: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            horizon: 200.0,
            dt: 1e-2,
            record_every: 10,
        }
    }
}

pub const DEFAULT_FREQ_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Unwrapped phases, one row per recorded instant.
    pub phases: Vec<Vec<f64>>,
    /// Phase velocities at the recorded phases.
    pub freqs: Vec<Vec<f64>>,
    pub inputs: InputSet,
}

impl Trajectory {
    /// Columns `t, theta_1..theta_n, freq_1..freq_n`.
    pub fn to_csv(&self) -> String {
        let n = self.inputs.n();
        let mut out = String::from("t");
        for v in 1..=n {
            let _ = write!(out, ",theta_{v}");
        }
        for v in 1..=n {
            let _ = write!(out, ",freq_{v}");
        }
        out.push('\n');
        for (i, t) in self.times.iter().enumerate() {
            let _ = write!(out, "{t:?}");
            for x in self.phases[i].iter().chain(&self.freqs[i]) {
                let _ = write!(out, ",{x:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn final_phases(&self) -> &[f64] {
        self.phases.last().expect("trajectory is nonempty")
    }

    pub fn final_freqs(&self) -> &[f64] {
        self.freqs.last().expect("trajectory is nonempty")
    }
}

/// Right-hand side of the pinned dynamics.
pub fn vector_field(net: &Network, a: &InputSet, theta: &[f64], out: &mut [f64]) {
    for v in 0..net.n() {
        out[v] = if a.contains(v) {
            0.0
        } else {
            let pull: f64 = net
                .neighbors(v)
                .iter()
                .map(|&(u, k)| k * (theta[v] - theta[u]).sin())
                .sum();
            net.omega()[v] - pull
        };
    }
}

pub fn simulate(
    net: &Network,
    a: &InputSet,
    theta0: &[f64],
    opts: &SimOptions,
) -> Result<Trajectory> {
    let n = net.n();
    if theta0.len() != n {
        return Err(Error::InvalidSimulation(format!(
            "initial state has {} entries for {n} nodes",
            theta0.len()
        )));
    }
    if let Some(v) = a.iter().find(|&v| theta0[v] != 0.0) {
        return Err(Error::InvalidSimulation(format!(
            "input node {} must start at phase 0",
            v + 1
        )));
    }
    let valid = opts.dt > 0.0 && opts.horizon >= opts.dt && opts.record_every > 0;
    if !valid {
        return Err(Error::InvalidSimulation(format!(
            "need dt > 0, horizon >= dt, record_every >= 1 (got {opts:?})"
        )));
    }
    let steps = (opts.horizon / opts.dt).round() as usize;
    let h = opts.dt;

    let mut theta = theta0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    let mut traj = Trajectory {
        times: Vec::with_capacity(steps / opts.record_every + 2),
        phases: Vec::new(),
        freqs: Vec::new(),
        inputs: a.clone(),
    };
    let record = |traj: &mut Trajectory, t: f64, theta: &[f64], f: &mut [f64]| {
        vector_field(net, a, theta, f);
        traj.times.push(t);
        traj.phases.push(theta.to_vec());
        traj.freqs.push(f.to_vec());
    };
    record(&mut traj, 0.0, &theta, &mut k1);

    for step in 1..=steps {
        vector_field(net, a, &theta, &mut k1);
        for v in 0..n {
            tmp[v] = theta[v] + 0.5 * h * k1[v];
        }
        vector_field(net, a, &tmp, &mut k2);
        for v in 0..n {
            tmp[v] = theta[v] + 0.5 * h * k2[v];
        }
        vector_field(net, a, &tmp, &mut k3);
        for v in 0..n {
            tmp[v] = theta[v] + h * k3[v];
        }
        vector_field(net, a, &tmp, &mut k4);
        for v in 0..n {
            theta[v] += h / 6.0 * (k1[v] + 2.0 * k2[v] + 2.0 * k3[v] + k4[v]);
        }
        let t = step as f64 * h;
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence { time: t });
        }
        if step % opts.record_every == 0 || step == steps {
            record(&mut traj, t, &theta, &mut k1);
        }
    }
    Ok(traj)
}

/// Uniform draw from the box, with input nodes at zero.
pub fn random_initial_state<R: Rng>(init: &PhaseBox, a: &InputSet, rng: &mut R) -> Vec<f64> {
    (0..init.len())
        .map(|v| {
            let b = init.get(v);
            if a.contains(v) || b == 0.0 {
                0.0
            } else {
                rng.random_range(-b..=b)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncReport {
    pub freq_sync: bool,
    /// `max_v |dθ_v/dt|` at the final sample.
    pub freq_residual: f64,
    /// `max_v |θ_v|` at the final sample.
    pub node_cohesive_at: f64,
    /// `max over edges |σ(θ_v - θ_u)|` at the final sample.
    pub edge_cohesive_at: f64,
    pub stayed_in_bound: bool,
    pub first_exit_time: Option<f64>,
}

impl SyncReport {
    /// `key = value` lines.
    pub fn to_text(&self) -> String {
        let exit = self
            .first_exit_time
            .map_or_else(|| "none".to_string(), |t| format!("{t:?}"));
        format!(
            "freq_sync = {}\nfreq_residual = {:e}\nnode_cohesive_at = {:.9}\nedge_cohesive_at = {:.9}\nstayed_in_bound = {}\nfirst_exit_time = {}\n",
            self.freq_sync,
            self.freq_residual,
            self.node_cohesive_at,
            self.edge_cohesive_at,
            self.stayed_in_bound,
            exit
        )
    }
}

pub fn check_practical_sync(
    traj: &Trajectory,
    net: &Network,
    bound: &PhaseBox,
    freq_tol: f64,
) -> SyncReport {
    let last = traj.final_phases();
    let freq_residual = traj
        .final_freqs()
        .iter()
        .fold(0.0_f64, |acc, f| acc.max(f.abs()));
    let node_cohesive_at = last.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let edge_cohesive_at = net
        .edges()
        .iter()
        .map(|e| principal_angle(last[e.v] - last[e.u]).abs())
        .fold(0.0_f64, f64::max);
    let first_exit_time = traj
        .times
        .iter()
        .zip(&traj.phases)
        .find(|(_, theta)| !bound.contains(theta))
        .map(|(t, _)| *t);
    SyncReport {
        freq_sync: freq_residual <= freq_tol,
        freq_residual,
        node_cohesive_at,
        edge_cohesive_at,
        stayed_in_bound: first_exit_time.is_none(),
        first_exit_time,
    }
}
