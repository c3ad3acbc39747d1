//! Oscillator networks, per-node phase boxes and problem specifications.
//!
//! All node ids are 0-based inside the library. The text formats and every
//! user-facing message use 1-based ids.

mod generate;
mod io;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;

use crate::error::{Error, Result};

pub use generate::{
    gaussian_frequencies, gen_geometric, gen_line, ieee14, GeometricParams, IEEE14_NETWORK,
};
pub use io::{
    format_network, format_spec, load_network, load_spec, parse_angle, parse_network, parse_spec,
};

/// One undirected coupling, stored once with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub k: f64,
}

/// Reference trajectory `omega0 * t + theta0` of the input nodes as given in
/// an input file. Internally every network is expressed in the rotating
/// frame where the reference is identically zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Reference {
    pub omega0: f64,
    pub theta0: f64,
}

/// Weighted undirected oscillator graph with intrinsic frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n: usize,
    edges: Vec<Edge>,
    omega: Vec<f64>,
    adjacency: Vec<Vec<(usize, f64)>>,
    reference: Option<Reference>,
}

impl Network {
    /// Builds and validates a network. Edges may be given in either
    /// orientation; they are normalized to `u < v` and sorted.
    pub fn new(n: usize, edges: Vec<Edge>, omega: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec(
                "network must have at least one node".into(),
            ));
        }
        if omega.len() != n {
            return Err(Error::InvalidSpec(format!(
                "expected {n} intrinsic frequencies, got {}",
                omega.len()
            )));
        }
        if let Some(w) = omega.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidSpec(format!("non-finite frequency {w}")));
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for e in edges {
            for node in [e.u, e.v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node: node + 1, n });
                }
            }
            if e.u == e.v {
                return Err(Error::SelfLoop(e.u + 1));
            }
            if e.k <= 0.0 || !e.k.is_finite() {
                return Err(Error::NonPositiveCoupling {
                    u: e.u + 1,
                    v: e.v + 1,
                    k: e.k,
                });
            }
            let (u, v) = if e.u < e.v { (e.u, e.v) } else { (e.v, e.u) };
            normalized.push(Edge { u, v, k: e.k });
        }
        normalized.sort_by_key(|e| (e.u, e.v));
        for pair in normalized.windows(2) {
            if pair[0].u == pair[1].u && pair[0].v == pair[1].v {
                return Err(Error::DuplicateEdge(pair[0].u + 1, pair[0].v + 1));
            }
        }

        let mut adjacency = vec![Vec::new(); n];
        for e in &normalized {
            adjacency[e.u].push((e.v, e.k));
            adjacency[e.v].push((e.u, e.k));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(u, _)| u);
        }

        let components = components(&adjacency);
        if components.len() > 1 {
            let named = components
                .into_iter()
                .map(|c| c.into_iter().map(|v| v + 1).collect())
                .collect();
            return Err(Error::Disconnected(named));
        }

        Ok(Self {
            n,
            edges: normalized,
            omega,
            adjacency,
            reference: None,
        })
    }

    /// Shifts the frequencies into the frame of the given reference and
    /// keeps the original reference as metadata.
    pub fn with_reference(mut self, reference: Reference) -> Self {
        for w in &mut self.omega {
            *w -= reference.omega0;
        }
        self.reference = Some(reference);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Intrinsic frequencies in the shifted frame.
    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// Neighbors of `v` with their coupling, sorted by neighbor id.
    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn reference(&self) -> Option<Reference> {
        self.reference
    }

    /// Intrinsic frequencies as they appeared before the frame shift.
    pub fn original_omega(&self) -> Vec<f64> {
        let shift = self.reference.map_or(0.0, |r| r.omega0);
        self.omega.iter().map(|w| w + shift).collect()
    }

    /// Copy of this network with every coupling multiplied by `factor`.
    pub fn scaled_coupling(&self, factor: f64) -> Result<Self> {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                k: e.k * factor,
                ..*e
            })
            .collect();
        let mut net = Network::new(self.n, edges, self.omega.clone())?;
        net.reference = self.reference;
        Ok(net)
    }

    /// Copy of this network with new (already shifted) frequencies.
    pub fn with_omega(&self, omega: Vec<f64>) -> Result<Self> {
        let mut net = Network::new(self.n, self.edges.clone(), omega)?;
        net.reference = self.reference;
        Ok(net)
    }
}

fn components(adjacency: &[Vec<(usize, f64)>]) -> Vec<Vec<usize>> {
    let n = adjacency.len();
    let mut label = vec![usize::MAX; n];
    let mut out = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![start];
        label[start] = id;
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for &(y, _) in &adjacency[x] {
                if label[y] == usize::MAX {
                    label[y] = id;
                    members.push(y);
                    stack.push(y);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Per-node symmetric phase bounds `{theta : |theta_v| <= bound_v}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseBox {
    bound: Vec<f64>,
}

impl PhaseBox {
    pub fn new(bound: Vec<f64>) -> Result<Self> {
        for (v, &b) in bound.iter().enumerate() {
            if !(0.0..=FRAC_PI_2).contains(&b) {
                return Err(Error::InvalidSpec(format!(
                    "bound {b} for node {} outside [0, pi/2]",
                    v + 1
                )));
            }
        }
        Ok(Self { bound })
    }

    pub fn uniform(n: usize, half_width: f64) -> Result<Self> {
        Self::new(vec![half_width; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            bound: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.bound.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bound.is_empty()
    }

    pub fn get(&self, v: usize) -> f64 {
        self.bound[v]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.bound
    }

    pub fn min(&self) -> f64 {
        self.bound.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `self ⊆ other`, componentwise.
    pub fn is_subset_of(&self, other: &PhaseBox) -> bool {
        self.bound.len() == other.bound.len()
            && self.bound.iter().zip(&other.bound).all(|(a, b)| a <= b)
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.bound.len() && theta.iter().zip(&self.bound).all(|(t, b)| t.abs() <= *b)
    }
}

/// Which cohesiveness notion the final set must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncMode {
    Node,
    Edge,
}

impl fmt::Display for SyncMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyncMode::Node => f.write_str("node"),
            SyncMode::Edge => f.write_str("edge"),
        }
    }
}

/// Parameters of one certification / selection problem on a fixed network.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub init: PhaseBox,
    pub bound: PhaseBox,
    /// Target cohesiveness in the units of `mode`.
    pub gamma: f64,
    pub mode: SyncMode,
    /// Discretization levels per node.
    pub levels: usize,
    /// Strictness margin in every threshold inequality.
    pub epsilon: f64,
    /// Number of sampled subgraphs per ensemble.
    pub samples: usize,
    pub seed: u64,
}

pub const DEFAULT_LEVELS: usize = 20;
pub const DEFAULT_SAMPLES: usize = 20;
pub const DEFAULT_EPSILON: f64 = 1e-3;

impl ProblemSpec {
    /// Uniform boxes with the default discretization.
    pub fn uniform(n: usize, init: f64, bound: f64, gamma: f64) -> Result<Self> {
        let spec = Self {
            init: PhaseBox::uniform(n, init)?,
            bound: PhaseBox::uniform(n, bound)?,
            gamma,
            mode: SyncMode::Node,
            levels: DEFAULT_LEVELS,
            epsilon: DEFAULT_EPSILON,
            samples: DEFAULT_SAMPLES,
            seed: 0,
        };
        spec.validate(n)?;
        Ok(spec)
    }

    /// The per-node radius that the certificates must establish. Edge mode
    /// is certified through node cohesiveness of half the radius.
    pub fn node_gamma(&self) -> f64 {
        match self.mode {
            SyncMode::Node => self.gamma,
            SyncMode::Edge => self.gamma / 2.0,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.init.len() != n || self.bound.len() != n {
            return bad(format!(
                "boxes have {} / {} entries for a {n}-node network",
                self.init.len(),
                self.bound.len()
            ));
        }
        if !self.init.is_subset_of(&self.bound) {
            return bad("init box is not contained in bound box".into());
        }
        if let Some(v) = (0..n).find(|&v| self.bound.get(v) <= 0.0) {
            return bad(format!("bound for node {} must be positive", v + 1));
        }
        let max_gamma = match self.mode {
            SyncMode::Node => FRAC_PI_4,
            SyncMode::Edge => FRAC_PI_2,
        };
        if !(0.0..=max_gamma).contains(&self.gamma) {
            return bad(format!(
                "gamma {} outside [0, {max_gamma}] for {} mode",
                self.gamma, self.mode
            ));
        }
        if self.node_gamma() > self.bound.min() {
            return bad(format!(
                "node radius {} exceeds the smallest bound {}",
                self.node_gamma(),
                self.bound.min()
            ));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.levels < 2 {
            return bad(format!("M must be at least 2, got {}", self.levels));
        }
        if self.samples == 0 {
            return bad("N must be positive".into());
        }
        Ok(())
    }
}

/// A set of input (pinned) nodes, stored as a membership mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InputSet {
    mask: Vec<bool>,
}

impl InputSet {
    pub fn empty(n: usize) -> Self {
        Self {
            mask: vec![false; n],
        }
    }

    pub fn all(n: usize) -> Self {
        Self {
            mask: vec![true; n],
        }
    }

    pub fn from_nodes(n: usize, nodes: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::empty(n);
        for v in nodes {
            set.insert(v);
        }
        set
    }

    pub fn n(&self) -> usize {
        self.mask.len()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.mask[v]
    }

    pub fn insert(&mut self, v: usize) {
        self.mask[v] = true;
    }

    pub fn with(&self, v: usize) -> Self {
        let mut out = self.clone();
        out.insert(v);
        out
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_subset_of(&self, other: &InputSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(a, b)| !a || *b)
    }

    pub fn union(&self, other: &InputSet) -> Self {
        Self {
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(a, b)| *a || *b)
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(v, _)| v)
    }

    pub fn nodes(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Display for InputSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.iter().map(|v| (v + 1).to_string()).collect();
        write!(f, "{{{}}}", ids.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(u: usize, v: usize, k: f64) -> Edge {
        Edge { u, v, k }
    }

    #[test]
    fn rejects_self_loop() {
        let err = Network::new(2, vec![edge(0, 0, 1.0), edge(0, 1, 1.0)], vec![0.0; 2]);
        assert!(matches!(err, Err(Error::SelfLoop(1))));
    }

    #[test]
    fn rejects_duplicate_in_either_orientation() {
        let err = Network::new(2, vec![edge(0, 1, 1.0), edge(1, 0, 2.0)], vec![0.0; 2]);
        assert!(matches!(err, Err(Error::DuplicateEdge(1, 2))));
    }

    #[test]
    fn rejects_nonpositive_coupling() {
        let err = Network::new(2, vec![edge(0, 1, 0.0)], vec![0.0; 2]);
        assert!(matches!(err, Err(Error::NonPositiveCoupling { .. })));
    }

    #[test]
    fn names_components_of_disconnected_graph() {
        let err =
            Network::new(4, vec![edge(0, 1, 1.0), edge(2, 3, 1.0)], vec![0.0; 4]).unwrap_err();
        match &err {
            Error::Disconnected(c) => assert_eq!(c, &vec![vec![1, 2], vec![3, 4]]),
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("{1,2} {3,4}"));
    }

    #[test]
    fn reference_shift_is_applied_and_remembered() {
        let net = Network::new(2, vec![edge(0, 1, 1.0)], vec![1.0, 2.0])
            .unwrap()
            .with_reference(Reference {
                omega0: 0.5,
                theta0: 0.1,
            });
        assert_eq!(net.omega(), &[0.5, 1.5]);
        assert_eq!(net.original_omega(), vec![1.0, 2.0]);
    }

    #[test]
    fn phase_box_partial_order() {
        let a = PhaseBox::new(vec![0.1, 0.2]).unwrap();
        let b = PhaseBox::new(vec![0.1, 0.3]).unwrap();
        assert!(a.is_subset_of(&b));
        assert!(!b.is_subset_of(&a));
        assert!(PhaseBox::new(vec![2.0]).is_err());
    }

    #[test]
    fn spec_validation() {
        use std::f64::consts::PI;
        assert!(ProblemSpec::uniform(3, PI / 5.0, PI / 4.0, PI / 6.0).is_ok());
        // init outside bound
        assert!(ProblemSpec::uniform(3, PI / 3.0, PI / 4.0, PI / 6.0).is_err());
        // node gamma above pi/4
        assert!(ProblemSpec::uniform(3, 0.1, PI / 2.0, PI / 3.0).is_err());
        let mut spec = ProblemSpec::uniform(3, 0.1, PI / 4.0, PI / 6.0).unwrap();
        spec.mode = SyncMode::Edge;
        spec.gamma = PI / 3.0;
        assert!(spec.validate(3).is_ok());
        assert!((spec.node_gamma() - PI / 6.0).abs() < 1e-15);
        spec.levels = 1;
        assert!(spec.validate(3).is_err());
    }

    #[test]
    fn input_set_display_is_one_based() {
        let a = InputSet::from_nodes(4, [0, 2]);
        assert_eq!(a.to_string(), "{1,3}");
        assert_eq!(a.len(), 2);
        assert!(a.is_subset_of(&a.with(3)));
    }
}
