//! Greedy input selection.
//!
//! Stage one cuts every walk from V' to V'' in a sampled class-T subgraph
//! (h1 = 0). Stage two either covers all target copies of a class-U
//! ensemble (h2 = n, minimum-size mode) or spends the remaining budget on
//! the expected number of reachable copies (h3, budget mode). Returned sets
//! are re-checked with the exact level-iteration certificates.

use std::collections::VecDeque;
use std::fmt;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::augraph::{
    absorption_probability, lowest_reached_levels, path_to_sinks, reachable, sample_subgraph,
    stall_witness, AugmentedGraph, SubgraphSample,
};
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::invariance::{
    ceil_levels, certify, identify_pi_set, stall_point, Certificate, ConvergenceReport,
    PiCertificate,
};
use crate::netmodel::{InputSet, Network, PhaseBox, ProblemSpec};
use crate::trigbound::WeightKind;

const TAG_CLASS_T: u64 = 1;
const TAG_CLASS_U: u64 = 2;

/// h1 values closer than this count as a tie (lowest id wins).
const TIE: f64 = 1e-12;

/// Largest network accepted by [`brute_force_min_inputs`].
pub const BRUTE_FORCE_MAX_N: usize = 8;

/// Sampled subgraphs sharing one augmented graph; the distribution over
/// subgraphs is uniform over the samples.
#[derive(Clone)]
pub struct Ensemble {
    aug: AugmentedGraph,
    samples: Vec<SubgraphSample>,
}

impl fmt::Debug for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ensemble")
            .field("kind", &self.aug.kind())
            .field("n", &self.aug.n())
            .field("levels", &self.aug.levels())
            .field("samples", &self.samples.len())
            .finish()
    }
}

impl Ensemble {
    /// `spec.samples` class-T subgraphs drawn with no inputs.
    pub fn class_t(net: &Network, spec: &ProblemSpec) -> Self {
        let aug = AugmentedGraph::class_t(net, spec);
        Self::draw(aug, spec, &[TAG_CLASS_T])
    }

    /// `spec.samples` class-U subgraphs for the invariant box `pi_box`.
    /// `stream` separates ensembles built for different boxes.
    pub fn class_u(net: &Network, spec: &ProblemSpec, pi_box: &PhaseBox, stream: u64) -> Self {
        let aug = AugmentedGraph::class_u(net, spec, pi_box);
        Self::draw(aug, spec, &[TAG_CLASS_U, stream])
    }

    fn draw(aug: AugmentedGraph, spec: &ProblemSpec, tags: &[u64]) -> Self {
        let empty = InputSet::empty(aug.n());
        let samples = (0..spec.samples)
            .into_par_iter()
            .map(|i| {
                let mut t = tags.to_vec();
                t.push(i as u64);
                sample_subgraph(&aug, &empty, derive_seed(spec.seed, &t))
            })
            .collect();
        Self { aug, samples }
    }

    pub fn from_samples(aug: AugmentedGraph, samples: Vec<SubgraphSample>) -> Self {
        assert!(samples.iter().all(|s| s.kind() == aug.kind()));
        Self { aug, samples }
    }

    pub fn aug(&self) -> &AugmentedGraph {
        &self.aug
    }

    pub fn samples(&self) -> &[SubgraphSample] {
        &self.samples
    }

    pub fn kind(&self) -> WeightKind {
        self.aug.kind()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn push(&mut self, sample: SubgraphSample) {
        assert_eq!(sample.kind(), self.aug.kind());
        self.samples.push(sample);
    }
}

/// Which quantity a greedy step optimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Absorption probability into V'' (minimized).
    H1,
    /// Expected number of V' copies reached (maximized).
    H2,
    /// Expected number of copies reached (maximized).
    H3,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::H1 => "h1",
            Objective::H2 => "h2",
            Objective::H3 => "h3",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyStep {
    pub objective: Objective,
    pub node: usize,
    /// Objective value after adding `node`.
    pub value: f64,
}

/// Approximation guarantees of the greedy stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// `1 + ln n` on the stage-one size.
    pub stage_one_ratio: f64,
    /// `1 + ln(n / (h2(A) - h2(A minus the last greedy node)))` on the
    /// stage-two size; absent when stage two added nothing.
    pub stage_two_ratio: Option<f64>,
    /// `1 - 1/e` on the stage-two h3 gain (budget mode only).
    pub budget_ratio: Option<f64>,
}

/// Upper bound on the input cohesiveness read off an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct CohesivenessBound {
    /// Least level connected to V'' in every sample, per node (`M` when
    /// some sample leaves the node unreached).
    pub levels: Vec<usize>,
    pub per_node: Vec<f64>,
    pub max: f64,
}

/// One distinct candidate set considered by a selector.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSummary {
    pub stage_one: InputSet,
    pub inputs: InputSet,
    /// h2 (minimum mode) or h3 (budget mode) of `inputs` on its ensemble.
    pub value: f64,
    pub certified: bool,
}

#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub inputs: InputSet,
    pub stage_one: InputSet,
    pub pi_certificate: PiCertificate,
    pub convergence: Option<ConvergenceReport>,
    pub convergence_verdict: bool,
    pub greedy_trace: Vec<GreedyStep>,
    pub bound_report: BoundReport,
    pub g_bound: Option<CohesivenessBound>,
    /// Stall witnesses added to the class-U ensemble before h2 = n matched
    /// the exact convergence check.
    pub counterexamples: usize,
    pub candidates: Vec<CandidateSummary>,
    /// Class-U ensemble the returned set was chosen on.
    pub ensemble: Ensemble,
}

impl SelectionResult {
    /// `key = value` lines with 1-based node ids.
    pub fn to_report(&self) -> String {
        let mut out = String::new();
        let levels = |x: &[usize]| {
            x.iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let _ = writeln!(out, "inputs = {}", self.inputs);
        let _ = writeln!(out, "size = {}", self.inputs.len());
        let _ = writeln!(out, "stage_one = {}", self.stage_one);
        let _ = writeln!(out, "pi_found = {}", self.pi_certificate.found);
        let _ = writeln!(out, "pi_levels = ({})", levels(&self.pi_certificate.levels));
        let _ = writeln!(
            out,
            "pi_box = ({})",
            self.pi_certificate
                .pi_box
                .as_slice()
                .iter()
                .map(|x| format!("{x:.12}"))
                .collect::<Vec<_>>()
                .join(",")
        );
        if let Some(c) = &self.convergence {
            let _ = writeln!(out, "convergence_levels = ({})", levels(&c.final_levels));
            let _ = writeln!(out, "target_levels = ({})", levels(&c.target_levels));
        }
        let _ = writeln!(out, "convergence_verdict = {}", self.convergence_verdict);
        let _ = writeln!(out, "counterexamples = {}", self.counterexamples);
        let _ = writeln!(
            out,
            "bound_stage_one = {:.6}",
            self.bound_report.stage_one_ratio
        );
        if let Some(r) = self.bound_report.stage_two_ratio {
            let _ = writeln!(out, "bound_stage_two = {r:.6}");
        }
        if let Some(r) = self.bound_report.budget_ratio {
            let _ = writeln!(out, "bound_budget = {r:.6}");
        }
        if let Some(g) = &self.g_bound {
            let _ = writeln!(out, "g_bound = {:.12}", g.max);
            let _ = writeln!(out, "g_bound_levels = ({})", levels(&g.levels));
        }
        for (i, step) in self.greedy_trace.iter().enumerate() {
            let _ = writeln!(
                out,
                "step {} = {} {} {:.12}",
                i + 1,
                step.objective,
                step.node + 1,
                step.value
            );
        }
        for (i, c) in self.candidates.iter().enumerate() {
            let _ = writeln!(
                out,
                "candidate {} = {} {} value={:.6} certified={}",
                i + 1,
                c.stage_one,
                c.inputs,
                c.value,
                c.certified
            );
        }
        out
    }
}

pub fn h1_eval(aug: &AugmentedGraph, sample: &SubgraphSample, a: &InputSet) -> Result<f64> {
    absorption_probability(aug, sample, a)
}

fn covered(aug: &AugmentedGraph, sample: &SubgraphSample, a: &InputSet) -> Vec<bool> {
    let mut sources = aug.sinks();
    sources.extend(aug.input_copies(a));
    reachable(sample, &sources, &[])
}

fn count(aug: &AugmentedGraph, seen: &[bool], objective: Objective) -> usize {
    match objective {
        Objective::H2 => (0..aug.n())
            .filter(|&v| seen[aug.copy(v, aug.source_levels()[v])])
            .count(),
        _ => seen.iter().filter(|&&b| b).count(),
    }
}

/// Expected number of V' copies reachable from V'' and the copies of `a`.
pub fn h2_eval(ensemble: &Ensemble, a: &InputSet) -> f64 {
    Coverage::new(ensemble, a).mean(ensemble, Objective::H2)
}

/// Expected number of copies reachable from V'' and the copies of `a`.
pub fn h3_eval(ensemble: &Ensemble, a: &InputSet) -> f64 {
    Coverage::new(ensemble, a).mean(ensemble, Objective::H3)
}

/// Per-sample reached sets for the current input set, extended in place as
/// nodes are added.
struct Coverage {
    seen: Vec<Vec<bool>>,
    inputs: InputSet,
}

impl Coverage {
    fn new(ens: &Ensemble, a: &InputSet) -> Self {
        let seen = ens
            .samples
            .par_iter()
            .map(|s| covered(&ens.aug, s, a))
            .collect();
        Self {
            seen,
            inputs: a.clone(),
        }
    }

    fn total(&self, ens: &Ensemble, objective: Objective) -> usize {
        self.seen
            .iter()
            .map(|seen| count(&ens.aug, seen, objective))
            .sum()
    }

    fn mean(&self, ens: &Ensemble, objective: Objective) -> f64 {
        ens.mean(self.total(ens, objective))
    }

    /// Copies newly reached in `sample` when every copy of `v` becomes a
    /// source; calls `visit` on each.
    fn spread(
        aug: &AugmentedGraph,
        sample: &SubgraphSample,
        seen: &[bool],
        v: usize,
        mut visit: impl FnMut(usize),
    ) {
        let mut fresh = vec![false; seen.len()];
        let mut queue = VecDeque::new();
        for m in 0..=aug.levels() {
            let c = aug.copy(v, m);
            if !seen[c] {
                fresh[c] = true;
                queue.push_back(c);
            }
        }
        while let Some(c) = queue.pop_front() {
            visit(c);
            for &d in sample.successors(c) {
                let d = d as usize;
                if !seen[d] && !fresh[d] {
                    fresh[d] = true;
                    queue.push_back(d);
                }
            }
        }
    }

    fn gain(&self, ens: &Ensemble, v: usize, objective: Objective) -> usize {
        let aug = &ens.aug;
        let mut gain = 0;
        for (sample, seen) in ens.samples.iter().zip(&self.seen) {
            Self::spread(aug, sample, seen, v, |c| {
                let (u, m) = aug.split(c);
                if objective != Objective::H2 || m == aug.source_levels()[u] {
                    gain += 1;
                }
            });
        }
        gain
    }

    fn add(&mut self, ens: &Ensemble, v: usize) {
        for (sample, seen) in ens.samples.iter().zip(self.seen.iter_mut()) {
            let mut newly = Vec::new();
            Self::spread(&ens.aug, sample, seen, v, |c| newly.push(c));
            for c in newly {
                seen[c] = true;
            }
        }
        self.inputs.insert(v);
    }

    /// Node with the largest gain, lowest id on ties.
    fn best(&self, ens: &Ensemble, objective: Objective) -> Option<(usize, usize)> {
        let gains: Vec<(usize, usize)> = (0..ens.aug.n())
            .into_par_iter()
            .filter(|&v| !self.inputs.contains(v))
            .map(|v| (v, self.gain(ens, v, objective)))
            .collect();
        gains
            .into_iter()
            .fold(None, |best: Option<(usize, usize)>, (v, g)| match best {
                Some((_, bg)) if bg >= g => best,
                _ => Some((v, g)),
            })
    }
}

impl Ensemble {
    fn mean(&self, total: usize) -> f64 {
        total as f64 / self.samples.len() as f64
    }
}

/// Greedy stage one on one class-T sample: add the node with the smallest
/// resulting h1 until no V' copy reaches V''.
///
/// h1 is supermodular, so the decrease a node offers can only shrink as the
/// set grows; stale decreases serve as upper bounds and only candidates
/// that could still win are re-evaluated.
pub fn cut_greedy(
    aug: &AugmentedGraph,
    sample: &SubgraphSample,
) -> Result<(InputSet, Vec<GreedyStep>)> {
    let n = aug.n();
    let mut a = InputSet::empty(n);
    let mut trace = Vec::new();
    let mut current = h1_eval(aug, sample, &a)?;
    let mut bound = vec![f64::INFINITY; n];
    while path_to_sinks(aug, sample, &a) {
        let mut fresh: Vec<Option<f64>> = vec![None; n];
        let (v, h) = loop {
            // best evaluated candidate so far, lowest id among ties
            let best = (0..n).filter_map(|v| fresh[v].map(|h| (v, h))).fold(
                None,
                |best: Option<(usize, f64)>, (v, h)| match best {
                    Some((_, bh)) if h >= bh - TIE => best,
                    _ => Some((v, h)),
                },
            );
            // a stale candidate still matters if its bound could beat or
            // tie `best` while having the lower id
            let pending = (0..n)
                .filter(|&v| !a.contains(v) && fresh[v].is_none())
                .filter(|&v| match best {
                    None => true,
                    Some((bv, bh)) => {
                        let dec = current - bh;
                        bound[v] > dec + TIE || (v < bv && bound[v] >= dec - TIE)
                    }
                })
                .max_by(|&x, &y| bound[x].total_cmp(&bound[y]).then(y.cmp(&x)));
            match pending {
                Some(v) => {
                    let h = h1_eval(aug, sample, &a.with(v))?;
                    bound[v] = current - h;
                    fresh[v] = Some(h);
                }
                None => break best.expect("a nonempty path leaves a free node"),
            }
        };
        a.insert(v);
        current = h;
        trace.push(GreedyStep {
            objective: Objective::H1,
            node: v,
            value: h,
        });
    }
    Ok((a, trace))
}

struct StageOne {
    sets: Vec<(InputSet, Vec<GreedyStep>)>,
}

impl StageOne {
    fn run(net: &Network, spec: &ProblemSpec) -> Result<Self> {
        let ens = Ensemble::class_t(net, spec);
        let sets = ens
            .samples
            .par_iter()
            .map(|s| cut_greedy(&ens.aug, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { sets })
    }

    /// Distinct stage-one sets with the index of the first sample that
    /// produced each.
    fn distinct(&self) -> Vec<(usize, &InputSet, &[GreedyStep])> {
        let mut out: Vec<(usize, &InputSet, &[GreedyStep])> = Vec::new();
        for (i, (a, trace)) in self.sets.iter().enumerate() {
            if !out.iter().any(|(_, b, _)| *b == a) {
                out.push((i, a, trace));
            }
        }
        out
    }
}

/// Greedy on h2 from `start` until every V' copy is reached in every sample.
fn cover_greedy(ens: &Ensemble, start: &InputSet, trace: &mut Vec<GreedyStep>) -> InputSet {
    let full = ens.aug.n() * ens.len();
    let mut cov = Coverage::new(ens, start);
    let mut total = cov.total(ens, Objective::H2);
    while total < full {
        let (v, g) = cov
            .best(ens, Objective::H2)
            .expect("uncovered targets leave a free node");
        cov.add(ens, v);
        total += g;
        trace.push(GreedyStep {
            objective: Objective::H2,
            node: v,
            value: ens.mean(total),
        });
    }
    cov.inputs
}

/// Greedy on h3 from `start` until `a` has `k` nodes.
pub fn budget_greedy(ens: &Ensemble, start: &InputSet, k: usize) -> (InputSet, Vec<GreedyStep>) {
    let mut cov = Coverage::new(ens, start);
    let mut total = cov.total(ens, Objective::H3);
    let mut trace = Vec::new();
    while cov.inputs.len() < k {
        let Some((v, g)) = cov.best(ens, Objective::H3) else {
            break;
        };
        cov.add(ens, v);
        total += g;
        trace.push(GreedyStep {
            objective: Objective::H3,
            node: v,
            value: ens.mean(total),
        });
    }
    (cov.inputs, trace)
}

struct Completed {
    summary: CandidateSummary,
    trace: Vec<GreedyStep>,
    cert: Certificate,
    ensemble: Ensemble,
    counterexamples: usize,
    stage_two_ratio: Option<f64>,
}

/// Stage two of the minimum-size selector for one stage-one set. After h2
/// reaches n, the stall point of the decrement rule is checked; a stall
/// outside the target box is added to the ensemble as a witness subgraph
/// and the greedy continues.
fn complete_min(net: &Network, spec: &ProblemSpec, a0: &InputSet, stream: u64) -> Completed {
    let n = net.n();
    let pi = identify_pi_set(net, a0, spec);
    let mut ens = Ensemble::class_u(net, spec, &pi.pi_box, stream);
    let mut trace = Vec::new();
    let mut a = a0.clone();
    let mut counterexamples = 0;
    if pi.found {
        let table = ens.aug.table().clone();
        loop {
            a = cover_greedy(&ens, &a, &mut trace);
            let start = ceil_levels(&pi.pi_box, &spec.bound, spec.levels, &a);
            let (stall, _) = stall_point(net, &a, spec.epsilon, &table, start, &mut |e| e[0]);
            let inside = stall
                .iter()
                .zip(ens.aug.source_levels())
                .all(|(s, t)| s <= t);
            if inside || a.len() == n {
                break;
            }
            let witness = stall_witness(&ens.aug, &ens.samples[0], &stall);
            ens.push(witness);
            counterexamples += 1;
        }
    }
    let value = h2_eval(&ens, &a);
    let stage_two_ratio = trace
        .iter()
        .rev()
        .find(|s| s.objective == Objective::H2)
        .map(|last| {
            let before = a.iter().filter(|&v| v != last.node);
            let prev = InputSet::from_nodes(n, before);
            let step = value - h2_eval(&ens, &prev);
            1.0 + (n as f64 / step).ln()
        });
    let cert = certify(net, &a, spec);
    Completed {
        summary: CandidateSummary {
            stage_one: a0.clone(),
            inputs: a,
            value,
            certified: cert.certified(),
        },
        trace,
        cert,
        ensemble: ens,
        counterexamples,
        stage_two_ratio,
    }
}

/// Least level connected to V'' (and the copies of `a`) in every sample,
/// scaled to an angle per node.
pub fn cohesiveness_bound(a: &InputSet, ensemble: &Ensemble) -> CohesivenessBound {
    let aug = &ensemble.aug;
    let m = aug.levels();
    let mut levels = vec![0; aug.n()];
    for s in &ensemble.samples {
        for (v, l) in lowest_reached_levels(aug, s, a).into_iter().enumerate() {
            levels[v] = levels[v].max(l.min(m));
        }
    }
    let bound = aug.bound();
    let per_node: Vec<f64> = levels
        .iter()
        .enumerate()
        .map(|(v, &l)| l as f64 * bound.get(v) / m as f64)
        .collect();
    let max = per_node.iter().copied().fold(0.0, f64::max);
    CohesivenessBound {
        levels,
        per_node,
        max,
    }
}

fn by_size(a: &InputSet, b: &InputSet) -> std::cmp::Ordering {
    a.len()
        .cmp(&b.len())
        .then_with(|| a.nodes().cmp(&b.nodes()))
}

/// Minimum-size selection: stage one per class-T sample, stage two on h2,
/// and the smallest candidate that passes both exact certificates.
pub fn select_min_inputs(net: &Network, spec: &ProblemSpec) -> Result<SelectionResult> {
    spec.validate(net.n())?;
    let n = net.n();
    let stage_one = StageOne::run(net, spec)?;
    let distinct = stage_one.distinct();
    let mut done: Vec<(Completed, &[GreedyStep])> = distinct
        .par_iter()
        .map(|&(i, a, t)| (complete_min(net, spec, a, i as u64), t))
        .collect();
    done.sort_by(|x, y| {
        by_size(&x.0.summary.inputs, &y.0.summary.inputs)
            .then_with(|| by_size(&x.0.summary.stage_one, &y.0.summary.stage_one))
    });
    let candidates: Vec<CandidateSummary> = done.iter().map(|(c, _)| c.summary.clone()).collect();
    let pick = done
        .iter()
        .position(|(c, _)| c.summary.certified)
        .unwrap_or(0);
    let (chosen, t1) = done.swap_remove(pick);
    let mut greedy_trace = t1.to_vec();
    greedy_trace.extend(chosen.trace);
    let g_bound = Some(cohesiveness_bound(&chosen.summary.inputs, &chosen.ensemble));
    Ok(SelectionResult {
        inputs: chosen.summary.inputs,
        stage_one: chosen.summary.stage_one,
        convergence_verdict: chosen.cert.certified(),
        pi_certificate: chosen.cert.pi,
        convergence: chosen.cert.convergence,
        greedy_trace,
        bound_report: BoundReport {
            stage_one_ratio: 1.0 + (n as f64).ln(),
            stage_two_ratio: chosen.stage_two_ratio,
            budget_ratio: None,
        },
        g_bound,
        counterexamples: chosen.counterexamples,
        candidates,
        ensemble: chosen.ensemble,
    })
}

/// Budget selection: stage one per class-T sample, then fill up to `k`
/// nodes greedily on h3 and keep the candidate with the largest h3.
pub fn select_max_cohesiveness(
    net: &Network,
    spec: &ProblemSpec,
    k: usize,
) -> Result<SelectionResult> {
    spec.validate(net.n())?;
    let n = net.n();
    if !(1..=n).contains(&k) {
        return Err(Error::InvalidSpec(format!(
            "budget k = {k} outside 1..={n}"
        )));
    }
    let stage_one = StageOne::run(net, spec)?;
    let distinct: Vec<_> = stage_one
        .distinct()
        .into_iter()
        .filter(|(_, a, _)| a.len() <= k)
        .collect();
    if distinct.is_empty() {
        let smallest = stage_one
            .sets
            .iter()
            .map(|(a, _)| a.len())
            .min()
            .unwrap_or(0);
        return Err(Error::Infeasible(format!(
            "no sampled class-T subgraph is cut by {k} inputs (smallest stage-one set has {smallest})"
        )));
    }
    let mut done: Vec<_> = distinct
        .par_iter()
        .map(|&(i, a0, t1)| {
            let pi = identify_pi_set(net, a0, spec);
            let ens = Ensemble::class_u(net, spec, &pi.pi_box, i as u64);
            let (a, t2) = budget_greedy(&ens, a0, k);
            let value = h3_eval(&ens, &a);
            let cert = certify(net, &a, spec);
            let summary = CandidateSummary {
                stage_one: a0.clone(),
                inputs: a,
                value,
                certified: cert.pi.found,
            };
            let mut trace = t1.to_vec();
            trace.extend(t2);
            (summary, trace, cert, ens)
        })
        .collect();
    done.sort_by(|x, y| {
        y.0.value
            .total_cmp(&x.0.value)
            .then_with(|| by_size(&x.0.inputs, &y.0.inputs))
            .then_with(|| by_size(&x.0.stage_one, &y.0.stage_one))
    });
    let candidates: Vec<CandidateSummary> = done.iter().map(|c| c.0.clone()).collect();
    let pick = done.iter().position(|c| c.0.certified).unwrap_or(0);
    let (summary, greedy_trace, cert, ens) = done.swap_remove(pick);
    let g_bound = Some(cohesiveness_bound(&summary.inputs, &ens));
    Ok(SelectionResult {
        inputs: summary.inputs,
        stage_one: summary.stage_one,
        convergence_verdict: cert.certified(),
        pi_certificate: cert.pi,
        convergence: cert.convergence,
        greedy_trace,
        bound_report: BoundReport {
            stage_one_ratio: 1.0 + (n as f64).ln(),
            stage_two_ratio: None,
            budget_ratio: Some(1.0 - (-1.0f64).exp()),
        },
        g_bound,
        counterexamples: 0,
        candidates,
        ensemble: ens,
    })
}

/// `k`-subsets of `0..n` in lexicographic order.
pub fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            if n - v < k - cur.len() {
                break;
            }
            cur.push(v);
            rec(n, k, v + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Smallest input set passing both exact certificates, by exhaustive search
/// in size order (lexicographic within a size).
pub fn brute_force_min_inputs(net: &Network, spec: &ProblemSpec) -> Result<InputSet> {
    let n = net.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::InvalidSpec(format!(
            "brute force needs n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    spec.validate(n)?;
    for k in 0..=n {
        let hit = subsets_of_size(n, k)
            .into_iter()
            .map(|s| InputSet::from_nodes(n, s))
            .find(|a| certify(net, a, spec).certified());
        if let Some(a) = hit {
            return Ok(a);
        }
    }
    Ok(InputSet::all(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::gen_line;
    use std::f64::consts::PI;

    fn line() -> (Network, ProblemSpec) {
        let net = gen_line(&[0.0705, 0.0709, 0.0336], 1.0).unwrap();
        let spec = ProblemSpec::uniform(3, PI / 5.0, PI / 4.0, PI / 6.0).unwrap();
        (net, spec)
    }

    #[test]
    fn subsets_in_lexicographic_order() {
        assert_eq!(
            subsets_of_size(4, 2),
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(subsets_of_size(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn brute_force_on_line() {
        let (net, spec) = line();
        let a = brute_force_min_inputs(&net, &spec).unwrap();
        assert_eq!(a, InputSet::from_nodes(3, [0]));
    }

    #[test]
    fn brute_force_needs_everything_when_pinning_is_the_only_way() {
        let net = gen_line(&[3.0, -3.0, 3.0], 1.0).unwrap();
        let spec = ProblemSpec::uniform(3, PI / 4.0, PI / 4.0, PI / 4.0).unwrap();
        assert_eq!(
            brute_force_min_inputs(&net, &spec).unwrap(),
            InputSet::all(3)
        );
    }

    #[test]
    fn trivial_objective_values() {
        let (net, spec) = line();
        let all = InputSet::all(3);
        let t = Ensemble::class_t(&net, &spec);
        for s in t.samples() {
            assert_eq!(h1_eval(t.aug(), s, &all).unwrap(), 0.0);
        }
        let pi = identify_pi_set(&net, &InputSet::from_nodes(3, [0]), &spec);
        let u = Ensemble::class_u(&net, &spec, &pi.pi_box, 0);
        assert_eq!(h2_eval(&u, &all), 3.0);
        assert_eq!(h3_eval(&u, &all), 63.0);
        let g = cohesiveness_bound(&all, &u);
        assert_eq!(g.max, 0.0);
    }

    #[test]
    fn min_selection_on_line() {
        let (net, spec) = line();
        let r = select_min_inputs(&net, &spec).unwrap();
        assert_eq!(r.inputs, InputSet::from_nodes(3, [0]));
        assert!(r.convergence_verdict);
        assert!(r.pi_certificate.found);
        let h1: Vec<f64> = r
            .greedy_trace
            .iter()
            .filter(|s| s.objective == Objective::H1)
            .map(|s| s.value)
            .collect();
        assert!(h1.windows(2).all(|w| w[1] <= w[0]));
        let h2: Vec<f64> = r
            .greedy_trace
            .iter()
            .filter(|s| s.objective == Objective::H2)
            .map(|s| s.value)
            .collect();
        assert!(h2.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn full_budget_pins_everything() {
        let (net, spec) = line();
        let r = select_max_cohesiveness(&net, &spec, 3).unwrap();
        assert_eq!(r.inputs, InputSet::all(3));
        assert_eq!(r.g_bound.unwrap().max, 0.0);
        assert!(select_max_cohesiveness(&net, &spec, 0).is_err());
    }

    #[test]
    fn budget_equal_to_stage_one_adds_nothing() {
        let (net, spec) = line();
        let r = select_max_cohesiveness(&net, &spec, 1).unwrap();
        assert_eq!(r.inputs, r.stage_one);
        assert_eq!(r.inputs.len(), 1);
    }

    #[test]
    fn selection_is_deterministic() {
        let (net, spec) = line();
        let a = select_min_inputs(&net, &spec).unwrap().to_report();
        let b = select_min_inputs(&net, &spec).unwrap().to_report();
        assert_eq!(a, b);
    }
}
