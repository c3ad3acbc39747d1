#![allow(dead_code)]

use std::f64::consts::PI;

use pinsync::netmodel::Edge;
use pinsync::{Network, ProblemSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random connected network with 3..=6 nodes (random tree plus extra
/// edges), couplings in [0.5, 2), frequencies in [-0.3, 0.3), and a spec
/// with M in 4..=6.
pub fn small_instance(seed: u64) -> (Network, ProblemSpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(3..=6);
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.push(Edge {
            u,
            v,
            k: rng.random_range(0.5..2.0),
        });
    }
    for u in 0..n {
        for v in u + 1..n {
            let present = edges.iter().any(|e| e.u == u && e.v == v);
            if !present && rng.random_bool(0.2) {
                edges.push(Edge {
                    u,
                    v,
                    k: rng.random_range(0.5..2.0),
                });
            }
        }
    }
    let omega = (0..n).map(|_| rng.random_range(-0.3..0.3)).collect();
    let net = Network::new(n, edges, omega).unwrap();
    let mut spec = ProblemSpec::uniform(n, PI / 8.0, PI / 4.0, PI / 6.0).unwrap();
    spec.levels = rng.random_range(4..=6);
    spec.samples = 4;
    spec.seed = seed;
    (net, spec)
}

pub fn line() -> (Network, ProblemSpec) {
    let net = pinsync::netmodel::gen_line(&[0.0705, 0.0709, 0.0336], 1.0).unwrap();
    let spec = ProblemSpec::uniform(3, PI / 5.0, PI / 4.0, PI / 6.0).unwrap();
    (net, spec)
}
