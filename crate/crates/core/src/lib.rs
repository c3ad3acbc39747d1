//! Input-node selection for pinned Kuramoto oscillator networks.
//!
//! The crate certifies that a set of pinned oscillators drives a network to
//! practical synchronization (positive-invariant box plus convergence to a
//! target box), and selects such sets greedily through submodular
//! surrogates on an augmented level graph.
//!
//! Module map:
//! - [`netmodel`]: networks, phase boxes, problem specs, file formats, generators.
//! - [`dynamics`]: RK4 integration of the pinned dynamics and empirical sync checks.
//! - [`trigbound`]: exact interval minima of sine and the augmented-graph weights.
//! - [`invariance`]: the level-iteration certificates.
//! - [`augraph`]: augmented copy graph, subgraph sampling, reachability, absorption.
//! - [`selection`]: objectives, greedy selection, bounds and brute-force oracles.

pub mod augraph;
pub mod dynamics;
pub mod error;
pub mod invariance;
pub mod netmodel;
pub mod selection;
pub mod trigbound;

pub use error::{Error, Result};
pub use netmodel::{InputSet, Network, PhaseBox, ProblemSpec, SyncMode};

/// Mixes a base seed with a stream tag into an independent 64-bit seed
/// (splitmix64 finalizer applied to each word).
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix(base ^ 0x243f_6a88_85a3_08d3);
    for &t in tags {
        state = splitmix(state ^ splitmix(t.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    state
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `ceil(x)`, treating values within 1e-9 of an integer as that integer so
/// that ratios such as `20 * (pi/5) / (pi/4)` land on 16 and not 17.
pub fn snapped_ceil(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 {
        r as i64
    } else {
        x.ceil() as i64
    }
}

/// `floor(x)` with the same integer snapping as [`snapped_ceil`].
pub fn snapped_floor(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 {
        r as i64
    } else {
        x.floor() as i64
    }
}
