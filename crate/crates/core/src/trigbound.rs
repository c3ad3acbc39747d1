//! Exact interval minima of `sin` and the level-pair weights of the
//! augmented graph.
//!
//! Node `v` at level `m` stands for the phase band ending at
//! `m * bound_v / M`. For each directed slot `(u -> v)` and each level pair
//! `(m, l)` the table stores a coupling-scaled sine bound `alpha` and its
//! first difference `beta` in `l`. Per `(v, m)` it stores the threshold `tau`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::netmodel::{Network, PhaseBox};

/// `min { sin x : lo <= x <= hi }`.
pub fn interval_min_sin(lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi, "empty interval [{lo}, {hi}]");
    if hi - lo >= TAU {
        return -1.0;
    }
    // smallest x = -pi/2 + 2 pi k with x >= lo
    let k = ((lo + FRAC_PI_2) / TAU).ceil();
    if -FRAC_PI_2 + TAU * k <= hi {
        return -1.0;
    }
    lo.sin().min(hi.sin())
}

/// Which certificate the table serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    /// Positive invariance: `alpha` grows with `l`, `beta = alpha(l+1) - alpha(l)`.
    ClassT,
    /// Convergence: `alpha` shrinks with `l`, `beta = alpha(l) - alpha(l+1)`.
    ClassU,
}

#[derive(Debug, Clone)]
pub struct WeightTable {
    kind: WeightKind,
    levels: usize,
    /// `slot_start[v]` is the first slot of node `v`; slots follow the
    /// neighbor order of [`Network::neighbors`].
    slot_start: Vec<usize>,
    /// `(neighbor u, v)` per slot.
    slots: Vec<(usize, usize)>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    tau: Vec<f64>,
    /// `sum_u sum_{l<M} beta(m, l)` per `(v, m)`.
    beta_total: Vec<f64>,
}

impl WeightTable {
    pub fn build(
        net: &Network,
        bound: &PhaseBox,
        levels: usize,
        epsilon: f64,
        kind: WeightKind,
    ) -> Self {
        let n = net.n();
        let side = levels + 1;
        let mut slot_start = Vec::with_capacity(n + 1);
        let mut slots = Vec::new();
        for v in 0..n {
            slot_start.push(slots.len());
            slots.extend(net.neighbors(v).iter().map(|&(u, _)| (u, v)));
        }
        slot_start.push(slots.len());

        let step: Vec<f64> = (0..n).map(|v| bound.get(v) / levels as f64).collect();

        // alpha and beta per slot, computed in parallel over nodes
        let per_node: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|v| {
                let nbrs = net.neighbors(v);
                let mut alpha = vec![0.0; nbrs.len() * side * side];
                let mut beta = vec![0.0; nbrs.len() * side * side];
                for (i, &(u, k)) in nbrs.iter().enumerate() {
                    let block = i * side * side;
                    for m in 0..side {
                        let row = block + m * side;
                        for l in 0..side {
                            let du = l as f64 * step[u];
                            alpha[row + l] = match kind {
                                WeightKind::ClassT => {
                                    let c = m as f64 * step[v];
                                    k * (1.0 - interval_min_sin(c - du, c + du))
                                }
                                WeightKind::ClassU => {
                                    let lo = (m as f64 - 1.0) * step[v];
                                    let hi = m as f64 * step[v];
                                    k * interval_min_sin(lo - du, hi + du)
                                }
                            };
                        }
                        for l in 0..levels {
                            let d = match kind {
                                WeightKind::ClassT => alpha[row + l + 1] - alpha[row + l],
                                WeightKind::ClassU => alpha[row + l] - alpha[row + l + 1],
                            };
                            // clamp roundoff; the exact difference is nonnegative
                            beta[row + l] = d.max(0.0);
                        }
                    }
                }
                (alpha, beta)
            })
            .collect();

        let mut alpha = Vec::with_capacity(slots.len() * side * side);
        let mut beta = Vec::with_capacity(slots.len() * side * side);
        for (a, b) in per_node {
            alpha.extend(a);
            beta.extend(b);
        }

        let mut table = Self {
            kind,
            levels,
            slot_start,
            slots,
            alpha,
            beta,
            tau: vec![0.0; n * side],
            beta_total: vec![0.0; n * side],
        };

        for (v, w) in net.omega().iter().enumerate() {
            let coupling: f64 = net.neighbors(v).iter().map(|&(_, k)| k).sum();
            for m in 0..side {
                let total: f64 = table
                    .slot_range(v)
                    .map(|s| (0..levels).map(|l| table.beta(s, m, l)).sum::<f64>())
                    .sum();
                let tau = match kind {
                    WeightKind::ClassT => {
                        let base: f64 = table.slot_range(v).map(|s| table.alpha(s, m, 0)).sum();
                        coupling - w.abs() - epsilon - base
                    }
                    WeightKind::ClassU => {
                        let top: f64 = table.slot_range(v).map(|s| table.alpha(s, m, levels)).sum();
                        total - (w.abs() + epsilon - top)
                    }
                };
                table.tau[v * side + m] = tau;
                table.beta_total[v * side + m] = total;
            }
        }
        table
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn n(&self) -> usize {
        self.slot_start.len() - 1
    }

    /// Slots whose target is `v`.
    pub fn slot_range(&self, v: usize) -> std::ops::Range<usize> {
        self.slot_start[v]..self.slot_start[v + 1]
    }

    /// `(u, v)` of a slot.
    pub fn slot(&self, s: usize) -> (usize, usize) {
        self.slots[s]
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    fn index(&self, s: usize, m: usize, l: usize) -> usize {
        let side = self.levels + 1;
        s * side * side + m * side + l
    }

    pub fn alpha(&self, s: usize, m: usize, l: usize) -> f64 {
        self.alpha[self.index(s, m, l)]
    }

    pub fn beta(&self, s: usize, m: usize, l: usize) -> f64 {
        self.beta[self.index(s, m, l)]
    }

    pub fn tau(&self, v: usize, m: usize) -> f64 {
        self.tau[v * (self.levels + 1) + m]
    }

    pub fn beta_total(&self, v: usize, m: usize) -> f64 {
        self.beta_total[v * (self.levels + 1) + m]
    }

    /// CSV with columns `u,v,m,l,alpha,beta` (1-based node ids).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,v,m,l,alpha,beta\n");
        for s in 0..self.slots.len() {
            let (u, v) = self.slots[s];
            for m in 0..=self.levels {
                for l in 0..=self.levels {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{:?},{:?}",
                        u + 1,
                        v + 1,
                        m,
                        l,
                        self.alpha(s, m, l),
                        self.beta(s, m, l)
                    );
                }
            }
        }
        out
    }
}

/// Reduces an arbitrary angle to `(-pi, pi]`.
pub(crate) fn principal_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::gen_line;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid_min(lo: f64, hi: f64, points: usize) -> f64 {
        (0..points)
            .map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).sin())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn point_and_wide_intervals() {
        assert_eq!(interval_min_sin(0.0, 0.0), 0.0);
        assert_eq!(interval_min_sin(-PI, PI), -1.0);
        assert_eq!(interval_min_sin(0.0, TAU), -1.0);
        assert!((interval_min_sin(PI / 6.0, PI / 3.0) - 0.5).abs() < 1e-15);
        // contains 3pi/2
        assert_eq!(interval_min_sin(PI, 2.0 * PI), -1.0);
    }

    #[test]
    fn matches_grid_on_random_intervals() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a = rng.random_range(-TAU..TAU);
            let b = rng.random_range(-TAU..TAU);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let exact = interval_min_sin(lo, hi);
            let grid = grid_min(lo, hi, 10_000);
            assert!(exact <= grid + 1e-12);
            assert!(
                (exact - grid).abs() < 1e-6,
                "[{lo}, {hi}]: {exact} vs {grid}"
            );
        }
    }

    fn line_table(kind: WeightKind) -> (Network, PhaseBox, WeightTable) {
        let net = gen_line(&[0.0705, 0.0709, 0.0336], 1.0).unwrap();
        let bound = PhaseBox::uniform(3, PI / 4.0).unwrap();
        let table = WeightTable::build(&net, &bound, 20, 1e-3, kind);
        (net, bound, table)
    }

    #[test]
    fn class_t_zero_level_pins_neighbor() {
        let (_, _, t) = line_table(WeightKind::ClassT);
        let a = PI / 4.0 / 20.0;
        for s in 0..t.slot_count() {
            for m in 0..=20 {
                let expect = 1.0 - (m as f64 * a).sin();
                assert!((t.alpha(s, m, 0) - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn class_t_row_matches_grid_oracle() {
        let (_, _, t) = line_table(WeightKind::ClassT);
        let a = PI / 4.0 / 20.0;
        // slot for edge 1 -> 2
        let s = t.slot_range(1).find(|&s| t.slot(s).0 == 0).unwrap();
        let m = 16;
        let tv = m as f64 * a;
        for l in 0..=20 {
            let w = l as f64 * a;
            let oracle = 1.0 - grid_min(tv - w, tv + w, 10_000);
            assert!((t.alpha(s, m, l) - oracle).abs() < 1e-6, "l = {l}");
        }
    }

    #[test]
    fn monotone_and_telescoping() {
        for kind in [WeightKind::ClassT, WeightKind::ClassU] {
            let (_, _, t) = line_table(kind);
            for s in 0..t.slot_count() {
                for m in 0..=20 {
                    let mut sum = 0.0;
                    for l in 0..20 {
                        let b = t.beta(s, m, l);
                        assert!(b >= 0.0);
                        sum += b;
                        match kind {
                            WeightKind::ClassT => {
                                assert!(t.alpha(s, m, l + 1) >= t.alpha(s, m, l) - 1e-15)
                            }
                            WeightKind::ClassU => {
                                assert!(t.alpha(s, m, l + 1) <= t.alpha(s, m, l) + 1e-15)
                            }
                        }
                    }
                    assert_eq!(t.beta(s, m, 20), 0.0);
                    let span = match kind {
                        WeightKind::ClassT => t.alpha(s, m, 20) - t.alpha(s, m, 0),
                        WeightKind::ClassU => t.alpha(s, m, 0) - t.alpha(s, m, 20),
                    };
                    assert!((sum - span).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn thresholds_follow_definitions() {
        let (net, _, t) = line_table(WeightKind::ClassT);
        let v = 1;
        let m = 16;
        let base: f64 = t.slot_range(v).map(|s| t.alpha(s, m, 0)).sum();
        let expect = 2.0 - net.omega()[v].abs() - 1e-3 - base;
        assert!((t.tau(v, m) - expect).abs() < 1e-15);

        let (net, _, u) = line_table(WeightKind::ClassU);
        let top: f64 = u.slot_range(v).map(|s| u.alpha(s, m, 20)).sum();
        let expect = u.beta_total(v, m) - (net.omega()[v].abs() + 1e-3 - top);
        assert!((u.tau(v, m) - expect).abs() < 1e-15);
    }

    #[test]
    fn csv_dump_has_every_pair() {
        let (_, _, t) = line_table(WeightKind::ClassT);
        let rows = t.to_csv().lines().count();
        assert_eq!(rows, 1 + 4 * 21 * 21);
    }

    #[test]
    fn principal_angle_range() {
        assert!((principal_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((principal_angle(-7.0 * PI) - PI).abs() < 1e-12);
        assert_eq!(principal_angle(0.3), 0.3);
    }
}
