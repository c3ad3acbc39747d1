use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library. Node ids in messages are 1-based, as in
/// the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),

    #[error("edge {u}-{v} has nonpositive coupling {k}")]
    NonPositiveCoupling { u: usize, v: usize, k: f64 },

    #[error("node id {node} out of range 1..={n}")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("network is disconnected; components: {}", format_components(.0))]
    Disconnected(Vec<Vec<usize>>),

    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),

    #[error("angle {0} outside [-2pi, 2pi]")]
    AngleDomain(f64),

    #[error("non-finite state at t = {time}")]
    Divergence { time: f64 },

    #[error("invalid simulation request: {0}")]
    InvalidSimulation(String),

    #[error("generator failed: {0}")]
    Generation(String),

    #[error("singular absorption system ({0} transient copies)")]
    SingularSystem(usize),

    #[error("infeasible selection: {0}")]
    Infeasible(String),
}

fn format_components(components: &[Vec<usize>]) -> String {
    components
        .iter()
        .map(|c| {
            let ids: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            format!("{{{}}}", ids.join(","))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub type Result<T> = std::result::Result<T, Error>;
