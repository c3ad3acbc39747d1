mod common;

use common::{line, small_instance};
use pinsync::dynamics::{
    check_practical_sync, random_initial_state, simulate, SimOptions, DEFAULT_FREQ_TOL,
};
use pinsync::invariance::certify;
use pinsync::selection::brute_force_min_inputs;
use pinsync::{InputSet, Network, ProblemSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn assert_sound(net: &Network, a: &InputSet, spec: &ProblemSpec, trials: usize, seed: u64) {
    let cert = certify(net, a, spec);
    assert!(cert.certified());
    let pi = &cert.pi.pi_box;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let theta0 = random_initial_state(&spec.init, a, &mut rng);
        let traj = simulate(net, a, &theta0, &SimOptions::default()).unwrap();
        let report = check_practical_sync(&traj, net, pi, DEFAULT_FREQ_TOL);
        assert!(
            report.stayed_in_bound,
            "left {pi:?} at {:?}",
            report.first_exit_time
        );
        assert!(report.freq_sync, "residual {}", report.freq_residual);
        assert!(report.node_cohesive_at <= spec.gamma + 0.02);
    }
}

#[test]
fn line_with_first_node_pinned() {
    let (net, spec) = line();
    assert_sound(&net, &InputSet::from_nodes(3, [0]), &spec, 10, 1);
}

#[test]
fn minimal_sets_of_small_instances() {
    for seed in 0..5 {
        let (net, spec) = small_instance(seed);
        let a = brute_force_min_inputs(&net, &spec).unwrap();
        assert_sound(&net, &a, &spec, 4, seed);
    }
}
