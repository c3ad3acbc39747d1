use pinsync::dynamics::{simulate, SimOptions};
use pinsync::netmodel::gen_line;
use pinsync::InputSet;

fn final_state(dt: f64) -> Vec<f64> {
    let net = gen_line(&[0.0, 0.4, -0.3, 0.2], 1.3).unwrap();
    let a = InputSet::from_nodes(4, [0]);
    let opts = SimOptions {
        horizon: 2.0,
        dt,
        record_every: 1_000_000,
    };
    let traj = simulate(&net, &a, &[0.0, 0.5, -0.4, 0.3], &opts).unwrap();
    traj.final_phases().to_vec()
}

fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[test]
fn global_error_is_fourth_order() {
    let reference = final_state(1e-4);
    let coarse = distance(&final_state(0.2), &reference);
    let fine = distance(&final_state(0.1), &reference);
    let ratio = coarse / fine;
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
}
