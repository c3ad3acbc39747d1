//! Line-oriented text formats for networks and problem specifications.
//!
//! Blank lines and anything after `#` are ignored. Node ids are 1-based.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use super::{
    Edge, Network, PhaseBox, ProblemSpec, Reference, SyncMode, DEFAULT_EPSILON, DEFAULT_LEVELS,
    DEFAULT_SAMPLES,
};
use crate::error::{Error, Result};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_network(path: impl AsRef<Path>) -> Result<Network> {
    parse_network(&read(path.as_ref())?)
}

pub fn load_spec(path: impl AsRef<Path>, n: usize) -> Result<ProblemSpec> {
    parse_spec(&read(path.as_ref())?, n)
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn expect_arity(line: usize, fields: &[&str], arity: usize) -> Result<()> {
    if fields.len() != arity {
        return Err(perr(
            line,
            format!(
                "`{}` takes {} field(s), got {}",
                fields[0],
                arity - 1,
                fields.len() - 1
            ),
        ));
    }
    Ok(())
}

fn number(line: usize, field: &str, what: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| perr(line, format!("{what}: cannot parse `{field}` as a number")))
}

fn node_id(line: usize, field: &str, n: Option<usize>) -> Result<usize> {
    let id: usize = field
        .parse()
        .map_err(|_| perr(line, format!("node id: cannot parse `{field}`")))?;
    let n = n.ok_or_else(|| perr(line, "node referenced before `nodes` header"))?;
    if id == 0 || id > n {
        return Err(perr(line, format!("node id {id} out of range 1..={n}")));
    }
    Ok(id - 1)
}

pub fn parse_network(text: &str) -> Result<Network> {
    let mut n: Option<usize> = None;
    let mut omega: Vec<Option<f64>> = Vec::new();
    let mut edges = Vec::new();
    let mut reference = None;
    for (line, f) in lines(text) {
        match f[0] {
            "nodes" => {
                expect_arity(line, &f, 2)?;
                if n.is_some() {
                    return Err(perr(line, "repeated `nodes` header"));
                }
                let count: usize = f[1]
                    .parse()
                    .map_err(|_| perr(line, format!("node count: cannot parse `{}`", f[1])))?;
                if count == 0 {
                    return Err(perr(line, "node count must be positive"));
                }
                n = Some(count);
                omega = vec![None; count];
            }
            "omega" => {
                expect_arity(line, &f, 3)?;
                let v = node_id(line, f[1], n)?;
                if omega[v].is_some() {
                    return Err(perr(line, format!("repeated omega for node {}", v + 1)));
                }
                omega[v] = Some(number(line, f[2], "omega")?);
            }
            "edge" => {
                expect_arity(line, &f, 4)?;
                let u = node_id(line, f[1], n)?;
                let v = node_id(line, f[2], n)?;
                let k = number(line, f[3], "coupling")?;
                edges.push(Edge { u, v, k });
            }
            "ref" => {
                expect_arity(line, &f, 3)?;
                reference = Some(Reference {
                    omega0: number(line, f[1], "reference frequency")?,
                    theta0: number(line, f[2], "reference phase")?,
                });
            }
            other => return Err(perr(line, format!("unknown keyword `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| perr(0, "missing `nodes` header"))?;
    let omega = omega
        .into_iter()
        .enumerate()
        .map(|(v, w)| w.ok_or_else(|| perr(0, format!("missing omega for node {}", v + 1))))
        .collect::<Result<Vec<_>>>()?;
    let net = Network::new(n, edges, omega)?;
    Ok(match reference {
        Some(r) => net.with_reference(r),
        None => net,
    })
}

/// Writes a network in the file format, restoring the original frame.
pub fn format_network(net: &Network) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "nodes {}", net.n());
    if let Some(r) = net.reference() {
        let _ = writeln!(out, "ref {:?} {:?}", r.omega0, r.theta0);
    }
    for (v, w) in net.original_omega().iter().enumerate() {
        let _ = writeln!(out, "omega {} {:?}", v + 1, w);
    }
    for e in net.edges() {
        let _ = writeln!(out, "edge {} {} {:?}", e.u + 1, e.v + 1, e.k);
    }
    out
}

/// Parses an angle: a plain number, or a product involving `pi` with an
/// optional divisor, e.g. `pi/5`, `17*pi/80`, `-pi/4`, `0.5*pi`.
pub fn parse_angle(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(x) = s.parse::<f64>() {
        return x.is_finite().then_some(x);
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s),
    };
    let mut parts = body.split('/');
    let numerator = parts.next()?;
    let mut value = 1.0;
    for factor in numerator.split('*') {
        value *= match factor.trim() {
            "pi" | "PI" | "Pi" => PI,
            other => other.parse::<f64>().ok()?,
        };
    }
    for divisor in parts {
        let d: f64 = divisor.trim().parse().ok()?;
        if d == 0.0 {
            return None;
        }
        value /= d;
    }
    let value = sign * value;
    value.is_finite().then_some(value)
}

fn angle(line: usize, field: &str) -> Result<f64> {
    parse_angle(field).ok_or_else(|| perr(line, format!("cannot parse angle `{field}`")))
}

/// Parses a spec file for an `n`-node network and validates it.
pub fn parse_spec(text: &str, n: usize) -> Result<ProblemSpec> {
    let mut gamma = None;
    let mut mode = SyncMode::Node;
    let mut levels = DEFAULT_LEVELS;
    let mut epsilon = DEFAULT_EPSILON;
    let mut samples = DEFAULT_SAMPLES;
    let mut seed = 0u64;
    let mut init: Vec<Option<f64>> = vec![None; n];
    let mut bound: Vec<Option<f64>> = vec![None; n];
    for (line, f) in lines(text) {
        match f[0] {
            "gamma" => {
                expect_arity(line, &f, 2)?;
                gamma = Some(angle(line, f[1])?);
            }
            "mode" => {
                expect_arity(line, &f, 2)?;
                mode = match f[1] {
                    "node" => SyncMode::Node,
                    "edge" => SyncMode::Edge,
                    other => return Err(perr(line, format!("unknown mode `{other}`"))),
                };
            }
            "M" => {
                expect_arity(line, &f, 2)?;
                levels = f[1]
                    .parse()
                    .map_err(|_| perr(line, format!("M: cannot parse `{}`", f[1])))?;
            }
            "epsilon" => {
                expect_arity(line, &f, 2)?;
                epsilon = number(line, f[1], "epsilon")?;
            }
            "N" => {
                expect_arity(line, &f, 2)?;
                samples = f[1]
                    .parse()
                    .map_err(|_| perr(line, format!("N: cannot parse `{}`", f[1])))?;
            }
            "seed" => {
                expect_arity(line, &f, 2)?;
                seed = f[1]
                    .parse()
                    .map_err(|_| perr(line, format!("seed: cannot parse `{}`", f[1])))?;
            }
            key @ ("init" | "bound") => {
                expect_arity(line, &f, 3)?;
                let value = angle(line, f[2])?;
                let target = if key == "init" { &mut init } else { &mut bound };
                if f[1] == "*" {
                    target.iter_mut().for_each(|x| *x = Some(value));
                } else {
                    target[node_id(line, f[1], Some(n))?] = Some(value);
                }
            }
            other => return Err(perr(line, format!("unknown key `{other}`"))),
        }
    }
    let complete = |name: &str, xs: Vec<Option<f64>>| -> Result<Vec<f64>> {
        xs.into_iter()
            .enumerate()
            .map(|(v, x)| x.ok_or_else(|| perr(0, format!("missing {name} for node {}", v + 1))))
            .collect()
    };
    let spec = ProblemSpec {
        init: PhaseBox::new(complete("init", init)?)?,
        bound: PhaseBox::new(complete("bound", bound)?)?,
        gamma: gamma.ok_or_else(|| perr(0, "missing `gamma`"))?,
        mode,
        levels,
        epsilon,
        samples,
        seed,
    };
    spec.validate(n)?;
    Ok(spec)
}

pub fn format_spec(spec: &ProblemSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "gamma {:?}", spec.gamma);
    let _ = writeln!(out, "mode {}", spec.mode);
    let _ = writeln!(out, "M {}", spec.levels);
    let _ = writeln!(out, "epsilon {:?}", spec.epsilon);
    let _ = writeln!(out, "N {}", spec.samples);
    let _ = writeln!(out, "seed {}", spec.seed);
    for (v, x) in spec.init.as_slice().iter().enumerate() {
        let _ = writeln!(out, "init {} {:?}", v + 1, x);
    }
    for (v, x) in spec.bound.as_slice().iter().enumerate() {
        let _ = writeln!(out, "bound {} {:?}", v + 1, x);
    }
    out
}
