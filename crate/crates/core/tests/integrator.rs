use biharm::dynamics::{rhs, seed_unstable};
use biharm::{integrate_adaptive, Guards, PhaseState, StopReason, Vec4};

fn linear(y: &Vec4) -> Vec4 {
    [y[1], y[2], y[3], -9.0 * y[0] + 10.0 * y[2]]
}

fn gap(a: &Vec4, b: &Vec4) -> f64 {
    (0..4).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

#[test]
fn halving_tolerance_does_not_increase_the_error() {
    let start = PhaseState::new(0.0, [1.0, -0.5, 0.25, 2.0]);
    let run = |tol: f64| *integrate_adaptive(linear, start, 3.0, tol, &Guards::default()).unwrap().last();
    let mut tol = 1e-6;
    let mut last = f64::INFINITY;
    while tol >= 1e-10 {
        let reference = run(tol / 100.0);
        let g = gap(&run(tol).phi, &reference.phi);
        assert!(g <= last, "tol {tol}: {g} > {last}");
        last = g;
        tol /= 2.0;
    }
}

#[test]
fn dense_output_at_step_ends() {
    let tol = 1e-10;
    let t = integrate_adaptive(rhs, seed_unstable(1e-3, 2e-3).unwrap(), 30.0, tol, &Guards::blowup(1e6)).unwrap();
    assert_eq!(t.stop_reason(), StopReason::BlowupGuard);
    for st in t.states() {
        let q = t.state_at(st.s).unwrap();
        assert!(gap(&q, &st.phi) <= 10.0 * tol * st.phi.iter().fold(1.0f64, |m, v| m.max(v.abs())));
    }
    let (s0, s1) = t.s_range();
    assert!(t.state_at(s0 - 1.0).is_none() && t.state_at(s1 + 1.0).is_none());
}

#[test]
fn bad_arguments_are_rejected() {
    let start = PhaseState::new(0.0, [0.0; 4]);
    assert!(integrate_adaptive(linear, start, 1.0, 0.0, &Guards::default()).is_err());
    assert!(integrate_adaptive(linear, start, -1.0, 1e-8, &Guards::default()).is_err());
}
