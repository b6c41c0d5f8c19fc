mod common;

use common::{random_operating_point, turbine};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use windshape::equilibrium::{scaled_residual, Region};
use windshape::linalg::Mat;
use windshape::linearize::linearize_at;
use windshape::model::{dynamics, integrate_step, output_map, InputVec, StateVec, TurbineParams};

#[test]
fn region_two_equilibria_are_steady() {
    let t = turbine();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let v = rng.random_range(3.0..10.0);
        let op = t.region2(v).unwrap();
        assert!(scaled_residual(&t.params, &op).unwrap() < 1e-8, "v = {v}");
        assert_eq!(op.u0.theta, t.optimum.theta);
    }
}

#[test]
fn region_three_equilibria_hit_the_reference() {
    let t = turbine();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut n = 0;
    while n < 50 {
        let v = rng.random_range(8.0..16.0);
        let p = rng.random_range(2e5..3.4e6);
        if p > t.available_power(v) {
            continue;
        }
        let op = match t.operating_point(Region::Three, v, p) {
            Ok(op) => op,
            Err(windshape::Error::Envelope(_)) => continue,
            Err(e) => panic!("v = {v}, p = {p}: {e}"),
        };
        assert!(scaled_residual(&t.params, &op).unwrap() < 1e-8);
        assert_eq!(op.y0.p, p);
        let y = output_map(&t.params, op.x0, op.u0, v).unwrap();
        assert!(((y.p - p) / p).abs() < 4.0 * f64::EPSILON, "{} vs {p}", y.p);
        n += 1;
    }
}

#[test]
fn infeasible_reference_is_reported() {
    let t = turbine();
    let p = t.available_power(8.0) * 1.01;
    assert!(t.region3(8.0, p).is_err());
}

type Fd<'a> = dyn Fn(StateVec, InputVec) -> Vec<f64> + 'a;

fn fd_jacobian(f: &Fd<'_>, x: StateVec, u: InputVec) -> (Mat, Mat) {
    let xs = x.to_array();
    let us = u.to_array();
    let rows = f(x, u).len();
    let mut jx = Mat::zeros(rows, 3);
    let mut ju = Mat::zeros(rows, 2);
    for j in 0..3 {
        let h = 1e-5 * xs[j].abs().max(1e-2);
        let (mut p, mut m) = (xs, xs);
        p[j] += h;
        m[j] -= h;
        let (fp, fm) = (f(StateVec::from_array(p), u), f(StateVec::from_array(m), u));
        for i in 0..rows {
            jx[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    for j in 0..2 {
        let h = 1e-5 * us[j].abs().max(1e-2);
        let (mut p, mut m) = (us, us);
        p[j] += h;
        m[j] -= h;
        let (fp, fm) = (f(x, InputVec::from_array(p)), f(x, InputVec::from_array(m)));
        for i in 0..rows {
            ju[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    (jx, ju)
}

/// Entrywise relative error, floored by the row magnitude.
fn rel_err(a: &Mat, b: &Mat) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        let row_scale = (0..a.ncols()).map(|j| a[(i, j)].abs()).fold(0.0, f64::max);
        for j in 0..a.ncols() {
            let scale = a[(i, j)].abs().max(1e-6 * row_scale).max(1e-300);
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs() / scale);
        }
    }
    worst
}

#[test]
fn analytic_jacobians_match_central_differences() {
    let t = turbine();
    let p = &t.params;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for i in 0..20 {
        let op = random_operating_point(&mut rng, i);
        // keep pitch off the clamp boundary of the surrogate
        let op = if op.u0.theta == 0.0 {
            let mut o = op;
            o.u0.theta = 0.5;
            o
        } else {
            op
        };
        let v = op.v0;
        let g = linearize_at(p, &op).unwrap();
        let f = move |x: StateVec, u: InputVec| dynamics(p, x, u, v).unwrap().to_array().to_vec();
        let h = move |x: StateVec, u: InputVec| output_map(p, x, u, v).unwrap().to_array().to_vec();
        let (a, b) = fd_jacobian(&f, op.x0, op.u0);
        let (c, d) = fd_jacobian(&h, op.x0, op.u0);
        for (name, an, fd) in [("A", &g.a, &a), ("B", &g.b, &b), ("C", &g.c, &c), ("D", &g.d, &d)] {
            let e = rel_err(an, fd);
            assert!(e < 1e-5, "{name} at point {i} ({:?}): rel err {e:e}", op.region);
        }
    }
}

#[test]
fn rk4_is_fourth_order() {
    let p = TurbineParams::default();
    let t = turbine();
    let op = t.region2(8.0).unwrap();
    let x0 = StateVec { omega: op.x0.omega * 1.1, xt: op.x0.xt + 0.2, vt: 0.1 };
    let u = op.u0;
    let run = |dt: f64| {
        let n = (2.0 / dt).round() as usize;
        (0..n).fold(x0, |x, _| integrate_step(&p, x, u, 8.0, dt).unwrap())
    };
    let reference = run(0.0005);
    let err = |dt: f64| {
        let x = run(dt);
        (x.xt - reference.xt).abs() + (x.vt - reference.vt).abs()
    };
    let (e1, e2) = (err(0.04), err(0.02));
    let order = (e1 / e2).log2();
    assert!((3.5..4.5).contains(&order), "observed order {order} ({e1:e}, {e2:e})");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn region_three_power_is_exact(v in 9.0f64..18.0, frac in 0.1f64..0.95) {
        let t = turbine();
        let p = frac * t.available_power(v).min(t.params.p_rated);
        if let Ok(op) = t.region3(v, p) {
            prop_assert_eq!(op.y0.p, p);
            prop_assert!(scaled_residual(&t.params, &op).unwrap() < 1e-8);
            prop_assert!(op.u0.theta >= t.params.theta_range[0] && op.u0.theta <= t.params.theta_range[1]);
        }
    }

    #[test]
    fn region_two_speed_scales_with_wind(v in 3.0f64..10.0) {
        let t = turbine();
        let op = t.region2(v).unwrap();
        let lambda = t.params.tip_speed_ratio(op.x0.omega, v);
        prop_assert!((lambda - t.optimum.lambda).abs() < 1e-10);
    }
}
