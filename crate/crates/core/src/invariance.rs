//! Level-iteration certificates.
//!
//! [`identify_pi_set`] raises per-node levels until the box they describe is
//! positive invariant; [`check_convergence`] then lowers them while the
//! dynamics provably pull each node inward, and compares the stall point
//! with the target radius.

use crate::netmodel::{InputSet, Network, PhaseBox, ProblemSpec};
use crate::trigbound::{WeightKind, WeightTable};
use crate::{snapped_ceil, snapped_floor};

/// Per-node level in `0..=M`.
pub type LevelVector = Vec<usize>;

/// Picks one node among the eligible ones (given in increasing id order).
pub type OrderHook<'a> = &'a mut dyn FnMut(&[usize]) -> usize;

fn lowest(eligible: &[usize]) -> usize {
    eligible[0]
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiCertificate {
    pub found: bool,
    /// Half-widths of the invariant box; meaningful only when `found`.
    pub pi_box: PhaseBox,
    pub initial_levels: LevelVector,
    pub levels: LevelVector,
    pub iterations: usize,
    /// Node raised at each iteration.
    pub trace: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub verdict: bool,
    pub initial_levels: LevelVector,
    pub final_levels: LevelVector,
    /// `floor(M * gamma / bound_v)`, the largest level inside the target box.
    pub target_levels: LevelVector,
    pub iterations: usize,
    /// Node lowered at each iteration.
    pub trace: Vec<usize>,
}

/// Both certificates for one input set.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub pi: PiCertificate,
    pub convergence: Option<ConvergenceReport>,
}

impl Certificate {
    pub fn certified(&self) -> bool {
        self.pi.found && self.convergence.as_ref().is_some_and(|c| c.verdict)
    }
}

/// `ceil(M * x_v / bound_v)` per node, 0 on inputs.
pub fn ceil_levels(x: &PhaseBox, bound: &PhaseBox, levels: usize, a: &InputSet) -> LevelVector {
    (0..x.len())
        .map(|v| {
            if a.contains(v) {
                0
            } else {
                let r = snapped_ceil(levels as f64 * x.get(v) / bound.get(v));
                r.clamp(0, levels as i64) as usize
            }
        })
        .collect()
}

/// `floor(M * gamma / bound_v)` per node.
pub fn target_levels(gamma: f64, bound: &PhaseBox, levels: usize) -> LevelVector {
    (0..bound.len())
        .map(|v| {
            let r = snapped_floor(levels as f64 * gamma / bound.get(v));
            r.clamp(0, levels as i64) as usize
        })
        .collect()
}

fn levels_to_box(levels: &[usize], bound: &PhaseBox, m: usize) -> PhaseBox {
    PhaseBox::new(
        levels
            .iter()
            .enumerate()
            .map(|(v, &x)| (bound.get(v) * x as f64 / m as f64).min(bound.get(v)))
            .collect(),
    )
    .expect("levels scale a valid box")
}

/// `sum_u K sin-bound` seen by `v` at level `x[v]` under class-T weights:
/// `sum K - sum alpha~(x_v, x_u)`.
fn invariance_margin(table: &WeightTable, coupling: f64, v: usize, x: &[usize]) -> f64 {
    let penalty: f64 = table
        .slot_range(v)
        .map(|s| table.alpha(s, x[v], x[table.slot(s).0]))
        .sum();
    coupling - penalty
}

/// `sum_u alpha(x_v, x_u)` under class-U weights.
fn contraction_margin(table: &WeightTable, v: usize, x: &[usize]) -> f64 {
    table
        .slot_range(v)
        .map(|s| table.alpha(s, x[v], x[table.slot(s).0]))
        .sum()
}

pub fn identify_pi_set(net: &Network, a: &InputSet, spec: &ProblemSpec) -> PiCertificate {
    identify_pi_set_with(net, a, spec, &mut lowest)
}

/// As [`identify_pi_set`], choosing among simultaneously violating nodes
/// with `order`.
pub fn identify_pi_set_with(
    net: &Network,
    a: &InputSet,
    spec: &ProblemSpec,
    order: OrderHook<'_>,
) -> PiCertificate {
    let table = WeightTable::build(
        net,
        &spec.bound,
        spec.levels,
        spec.epsilon,
        WeightKind::ClassT,
    );
    identify_with_table(net, a, spec, &table, order)
}

pub(crate) fn identify_with_table(
    net: &Network,
    a: &InputSet,
    spec: &ProblemSpec,
    table: &WeightTable,
    order: OrderHook<'_>,
) -> PiCertificate {
    let m = spec.levels;
    let coupling: Vec<f64> = (0..net.n())
        .map(|v| net.neighbors(v).iter().map(|&(_, k)| k).sum())
        .collect();
    let initial = ceil_levels(&spec.init, &spec.bound, m, a);
    let mut x = initial.clone();
    let mut trace = Vec::new();
    let mut found = true;
    loop {
        let eligible: Vec<usize> = (0..net.n())
            .filter(|&v| !a.contains(v))
            .filter(|&v| {
                invariance_margin(table, coupling[v], v, &x) <= net.omega()[v].abs() + spec.epsilon
            })
            .collect();
        if eligible.is_empty() {
            break;
        }
        let v = order(&eligible);
        if x[v] + 1 >= m {
            found = false;
            break;
        }
        x[v] += 1;
        trace.push(v);
    }
    PiCertificate {
        found,
        pi_box: levels_to_box(&x, &spec.bound, m),
        initial_levels: initial,
        levels: x,
        iterations: trace.len(),
        trace,
    }
}

pub fn check_convergence(
    net: &Network,
    a: &InputSet,
    pi_box: &PhaseBox,
    spec: &ProblemSpec,
) -> ConvergenceReport {
    check_convergence_with(net, a, pi_box, spec, &mut lowest)
}

pub fn check_convergence_with(
    net: &Network,
    a: &InputSet,
    pi_box: &PhaseBox,
    spec: &ProblemSpec,
    order: OrderHook<'_>,
) -> ConvergenceReport {
    let table = WeightTable::build(
        net,
        &spec.bound,
        spec.levels,
        spec.epsilon,
        WeightKind::ClassU,
    );
    converge_with_table(net, a, pi_box, spec, &table, order)
}

pub(crate) fn converge_with_table(
    net: &Network,
    a: &InputSet,
    pi_box: &PhaseBox,
    spec: &ProblemSpec,
    table: &WeightTable,
    order: OrderHook<'_>,
) -> ConvergenceReport {
    let m = spec.levels;
    let initial = ceil_levels(pi_box, &spec.bound, m, a);
    let target = target_levels(spec.node_gamma(), &spec.bound, m);
    let (x, trace) = stall_point(net, a, spec.epsilon, table, initial.clone(), order);
    ConvergenceReport {
        verdict: x.iter().zip(&target).all(|(xv, tv)| xv <= tv),
        initial_levels: initial,
        final_levels: x,
        target_levels: target,
        iterations: trace.len(),
        trace,
    }
}

/// Lowers levels from `x` until no node satisfies the decrement rule.
pub(crate) fn stall_point(
    net: &Network,
    a: &InputSet,
    epsilon: f64,
    table: &WeightTable,
    mut x: LevelVector,
    order: OrderHook<'_>,
) -> (LevelVector, Vec<usize>) {
    let mut trace = Vec::new();
    loop {
        let eligible: Vec<usize> = (0..net.n())
            .filter(|&v| !a.contains(v) && x[v] >= 1)
            .filter(|&v| contraction_margin(table, v, &x) > net.omega()[v].abs() + epsilon)
            .collect();
        if eligible.is_empty() {
            return (x, trace);
        }
        let v = order(&eligible);
        x[v] -= 1;
        trace.push(v);
    }
}

/// Runs both certificates; convergence is only attempted when a positive
/// invariant box was found.
pub fn certify(net: &Network, a: &InputSet, spec: &ProblemSpec) -> Certificate {
    let pi = identify_pi_set(net, a, spec);
    let convergence = pi
        .found
        .then(|| check_convergence(net, a, &pi.pi_box, spec));
    Certificate { pi, convergence }
}

/// Re-evaluates the positive-invariance inequality directly at `pi_box`
/// and returns the smallest slack `sum K min sin - |omega| - epsilon` over
/// non-input nodes (positive when the box is certified).
pub fn invariance_slack(net: &Network, a: &InputSet, pi_box: &PhaseBox, epsilon: f64) -> f64 {
    use crate::trigbound::interval_min_sin;
    (0..net.n())
        .filter(|&v| !a.contains(v))
        .map(|v| {
            let tv = pi_box.get(v);
            let s: f64 = net
                .neighbors(v)
                .iter()
                .map(|&(u, k)| k * interval_min_sin(tv - pi_box.get(u), tv + pi_box.get(u)))
                .sum();
            s - net.omega()[v].abs() - epsilon
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::gen_line;
    use std::f64::consts::PI;

    fn line_instance() -> (Network, ProblemSpec) {
        let net = gen_line(&[0.0705, 0.0709, 0.0336], 1.0).unwrap();
        let spec = ProblemSpec::uniform(3, PI / 5.0, PI / 4.0, PI / 6.0).unwrap();
        (net, spec)
    }

    #[test]
    fn line_invariant_box() {
        let (net, spec) = line_instance();
        let a = InputSet::from_nodes(3, [0]);
        let pi = identify_pi_set(&net, &a, &spec);
        assert!(pi.found);
        assert_eq!(pi.initial_levels, vec![0, 16, 16]);
        assert_eq!(pi.levels, vec![0, 16, 17]);
        assert_eq!(pi.trace, vec![2]);
        let expect = [0.0, PI / 5.0, 17.0 * PI / 80.0];
        for (v, e) in expect.iter().enumerate() {
            assert!((pi.pi_box.get(v) - e).abs() < 1e-12);
        }
        assert!(invariance_slack(&net, &a, &pi.pi_box, spec.epsilon) > 0.0);
    }

    #[test]
    fn line_convergence_levels() {
        // Frozen from the decrement rule as implemented; both free nodes end
        // well inside the target level 13.
        let (net, spec) = line_instance();
        let a = InputSet::from_nodes(3, [0]);
        let pi = identify_pi_set(&net, &a, &spec);
        let conv = check_convergence(&net, &a, &pi.pi_box, &spec);
        assert!(conv.verdict);
        assert_eq!(conv.initial_levels, vec![0, 16, 17]);
        assert_eq!(conv.target_levels, vec![13, 13, 13]);
        assert_eq!(conv.final_levels, vec![0, 4, 5]);
        assert!(conv.final_levels[1] <= 5 && conv.final_levels[2] <= 8);
    }

    #[test]
    fn line_decrements_alternate() {
        let (net, spec) = line_instance();
        let a = InputSet::from_nodes(3, [0]);
        let pi = identify_pi_set(&net, &a, &spec);
        let conv = check_convergence(&net, &a, &pi.pi_box, &spec);
        let mut runs: Vec<usize> = conv.trace.clone();
        runs.dedup();
        assert!(runs.len() >= 4, "{:?}", conv.trace);
        assert!(runs.windows(2).all(|w| w[0] != w[1]));
        assert!(runs.iter().all(|&v| v == 1 || v == 2));
    }

    #[test]
    fn all_pinned_is_vacuous() {
        let (net, spec) = line_instance();
        let a = InputSet::all(3);
        let cert = certify(&net, &a, &spec);
        assert!(cert.certified());
        assert_eq!(cert.pi.iterations, 0);
        assert_eq!(cert.pi.pi_box.as_slice(), &[0.0, 0.0, 0.0]);
        assert_eq!(cert.convergence.unwrap().final_levels, vec![0, 0, 0]);
    }

    #[test]
    fn large_frequency_has_no_box() {
        let net = gen_line(&[0.0, 5.0], 1.0).unwrap();
        let spec = ProblemSpec::uniform(2, 0.1, PI / 4.0, 0.1).unwrap();
        let pi = identify_pi_set(&net, &InputSet::from_nodes(2, [0]), &spec);
        assert!(!pi.found);
    }

    #[test]
    fn empty_input_fails_on_line() {
        let (net, spec) = line_instance();
        assert!(!certify(&net, &InputSet::empty(3), &spec).certified());
    }
}
