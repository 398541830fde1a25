use std::f64::consts::PI;

use biharm::certificates::{cone_membership, q_func};
use biharm::dynamics::rhs;
use biharm::flow::flow_rhs;
use biharm::io::{fmt_f64, parse_f64, Table};
use biharm::reduction::tangential_part;
use biharm::{integrate_adaptive, Guards, PhaseState};
use proptest::prelude::*;

fn state() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-5.0..5.0f64)
}

/// Small integers so cone boundaries (b = 2a) are hit exactly.
fn lattice_state() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4((-4i32..=4).prop_map(f64::from))
}

proptest! {
    #[test]
    fn rhs_is_odd(phi in state()) {
        let neg = rhs(&phi.map(|v| -v));
        prop_assert_eq!(neg, rhs(&phi).map(|v| -v));
    }

    #[test]
    fn star_cones_sit_inside_plain_cones(x in prop_oneof![state(), lattice_state()]) {
        let t = cone_membership(&x);
        prop_assert!(!t.in_w_plus_star || t.in_w_plus);
        prop_assert!(!t.in_w_minus_star || t.in_w_minus);
        let n = cone_membership(&x.map(|v| -v));
        prop_assert_eq!(t.in_w_plus, n.in_w_minus);
        prop_assert_eq!(t.in_w_plus_star, n.in_w_minus_star);
        prop_assert_eq!(t.in_w_minus_star, n.in_w_plus_star);
    }

    #[test]
    fn q_has_period_pi(x in -10.0..10.0f64, fy in -2.0..2.0f64, k in -3i32..=3) {
        let shifted = q_func(x + f64::from(k) * PI, fy);
        prop_assert!((shifted - q_func(x, fy)).abs() < 1e-14 * (1.0 + x.abs()));
    }

    #[test]
    fn tangential_projection_is_idempotent(v0 in -3.0..3.0f64, v1 in -3.0..3.0f64, psi in -7.0..7.0f64) {
        let u = (psi.sin(), psi.cos());
        let t = tangential_part((v0, v1), u);
        prop_assert!((t.0 * u.0 + t.1 * u.1).abs() < 1e-10);
        let again = tangential_part((-t.0, -t.1), u);
        prop_assert!((again.0 - t.0).abs() < 1e-12 && (again.1 - t.1).abs() < 1e-12);
    }

    #[test]
    fn flow_rhs_is_odd(vals in prop::collection::vec(-3.0..3.0f64, 9..20), a1 in -2.0..2.0f64) {
        let mut v = vals;
        v[0] = 0.0;
        let h = 1.0 / (v.len() - 1) as f64;
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let a = flow_rhs(&v, a1, h, 4);
        let b = flow_rhs(&neg, -a1, h, 4);
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn floats_round_trip_through_text(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(!x.is_nan());
        prop_assert_eq!(parse_f64(&fmt_f64(x)).unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn csv_tables_round_trip(rows in prop::collection::vec(prop::array::uniform3(any::<f64>().prop_filter("finite", |v| v.is_finite())), 0..20)) {
        let mut t = Table::new(["a", "b", "c"]);
        for r in rows {
            t.push(r.to_vec()).unwrap();
        }
        prop_assert_eq!(Table::from_csv(&t.to_csv()).unwrap(), t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn orbits_are_deterministic_and_mirror_exactly(p1 in -1e-3..1e-3f64, p3 in -1e-2..1e-2f64) {
        let start = PhaseState::new(0.0, [p1, 0.5 * p1, p3, 0.0]);
        let guards = Guards::blowup(1e6);
        let a = integrate_adaptive(rhs, start, 20.0, 1e-10, &guards).unwrap();
        let b = integrate_adaptive(rhs, start, 20.0, 1e-10, &guards).unwrap();
        prop_assert_eq!(a.states(), b.states());
        let m = integrate_adaptive(rhs, PhaseState::new(0.0, start.phi.map(|v| -v)), 20.0, 1e-10, &guards).unwrap();
        prop_assert_eq!(a.states().len(), m.states().len());
        for (x, y) in a.states().iter().zip(m.states()) {
            prop_assert_eq!(x.s, y.s);
            prop_assert_eq!(x.phi, y.phi.map(|v| -v));
        }
    }
}
