mod common;

use std::f64::consts::PI;

use common::{designs, repo_scenario, turbine};
use proptest::prelude::*;
use windshape::equilibrium::Region;
use windshape::loopshape::robust::MarginPoint;
use windshape::model::{wind_sample, WindScenario};
use windshape::pipeline::{read_margin_map, write_margin_map};
use windshape::sim::io::{read_json, read_switches, read_trace, write_json, write_switches, write_trace};
use windshape::sim::rainflow::del_from_cycles;
use windshape::sim::*;

fn calm(v: f64, p_ref: f64, duration: f64) -> Scenario {
    Scenario {
        name: "calm".into(),
        duration,
        p_ref,
        wind: WindScenario { mean_speed: v, ..Default::default() },
        ..Default::default()
    }
}

#[test]
fn region2_equilibrium_is_a_fixed_point() {
    let t = turbine();
    let sc = Scenario { initial_mode: Some(Region::Two), ..calm(7.5, 3.4e6, 60.0) };
    let trace = run(t, &sc, &designs().controllers(), 0).unwrap();
    assert!(trace.fault.is_none() && trace.switches.is_empty());
    let op = t.region2(7.5).unwrap();
    for r in &trace.records {
        assert!((r.x.omega - op.x0.omega).abs() < 1e-8 * op.x0.omega, "omega {} at t = {}", r.x.omega, r.t);
        assert!((r.x.xt - op.x0.xt).abs() < 1e-8 * op.x0.xt.abs().max(1.0));
        assert!((r.u.mg - op.u0.mg).abs() < 1e-8 * op.u0.mg);
        assert!((r.u.theta - op.u0.theta).abs() < 1e-8);
    }
}

#[test]
fn tracking_is_offset_free() {
    let t = turbine();
    let sc = repo_scenario("tracking");
    let trace = run(t, &sc, &designs().controllers(), 0).unwrap();
    assert!(trace.fault.is_none());
    let tail = &trace.records[trace.records.len() * 4 / 5..];
    let worst = tail.iter().map(|r| ((r.y.p - r.p_ref) / r.p_ref).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-3, "relative error {worst}");
    assert!(tail.iter().all(|r| r.mode == Region::Three));
}

#[test]
fn reference_step_does_not_switch() {
    let t = turbine();
    let sc = Scenario {
        p_ref_steps: vec![RefStep { t: 40.0, p_ref: 1.6e6 }],
        ..calm(14.0, 2.0e6, 120.0)
    };
    let trace = run(t, &sc, &designs().controllers(), 0).unwrap();
    assert!(trace.fault.is_none());
    assert!(trace.switches.is_empty());
    assert!(trace.records.iter().all(|r| r.mode == Region::Three));
}

#[test]
fn small_reference_step_settles() {
    let t = turbine();
    let sc = Scenario {
        p_ref_steps: vec![RefStep { t: 40.0, p_ref: 1.9e6 }],
        ..calm(14.0, 2.0e6, 120.0)
    };
    let trace = run(t, &sc, &designs().controllers(), 0).unwrap();
    let tail = &trace.records[trace.records.len() * 4 / 5..];
    assert!(tail.iter().all(|r| ((r.y.p - 1.9e6) / 1.9e6).abs() < 1e-3));
}

#[test]
fn inputs_respect_bounds_and_slew() {
    let t = turbine();
    let p = &t.params;
    for name in ["falling_wind", "low_wind", "high_wind"] {
        let sc = repo_scenario(name);
        let sc = Scenario { duration: 150.0, ..sc };
        let trace = run(t, &sc, &designs().controllers(), 1).unwrap();
        let tol = 1e-9;
        for r in &trace.records {
            assert!(r.u.theta >= p.theta_range[0] - tol && r.u.theta <= p.theta_range[1] + tol);
            assert!(r.u.mg >= p.mg_range[0] - tol && r.u.mg <= p.mg_range[1] + tol);
        }
        for w in trace.records.windows(2) {
            assert!((w[1].u.theta - w[0].u.theta).abs() <= p.theta_rate * sc.dt * (1.0 + 1e-9) + tol);
            assert!((w[1].u.mg - w[0].u.mg).abs() <= p.mg_rate * sc.dt * (1.0 + 1e-9) + tol);
        }
    }
}

#[test]
fn switched_loads_stay_close_to_frozen_inputs_in_calm_wind() {
    let t = turbine();
    let base = Scenario {
        wind: WindScenario { mean_speed: 8.0, turbulence_intensity: 0.02, ..Default::default() },
        ..calm(8.0, 3.4e6, 200.0)
    };
    let switched = run(t, &base, &designs().controllers(), 0).unwrap();
    let hold = Scenario { control: ControlLaw::Hold, ..base.clone() };
    let frozen = run(t, &hold, &designs().controllers(), 0).unwrap();
    let m_s = compute_metrics(&switched, &t.params, &base);
    let m_h = compute_metrics(&frozen, &t.params, &hold);
    assert!(m_s.fault.is_none() && m_h.fault.is_none());
    assert!(m_s.del_tower <= 1.5 * m_h.del_tower, "{} vs {}", m_s.del_tower, m_h.del_tower);
}

#[test]
fn wind_statistics() {
    let w = WindScenario {
        mean_speed: 10.0,
        turbulence_intensity: 0.1,
        correlation_time: 5.0,
        duration: 20_000.0,
        seed: 3,
        ..Default::default()
    };
    let grid: Vec<f64> = (0..=200_000).map(|k| k as f64 * 0.1).collect();
    let v = wind_sample(&w, &grid).unwrap();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    assert!((mean - 10.0).abs() < 0.05, "mean {mean}");
    assert!((std - 1.0).abs() < 0.05, "std {std}");
    assert_eq!(v, wind_sample(&w, &grid).unwrap());
}

fn sine_block(amplitude: f64, cycles: usize) -> Vec<f64> {
    let per = 40;
    (0..cycles * per).map(|k| amplitude * (2.0 * PI * k as f64 / per as f64).cos()).collect()
}

#[test]
fn rainflow_sinusoid_closed_form() {
    let (a, n, m, n_ref) = (3.0, 500, 4.0, 1e3);
    let mut s = sine_block(a, n);
    s.push(a);
    let expected = (n as f64 * (2.0 * a).powf(m) / n_ref).powf(1.0 / m);
    let got = del(&s, m, n_ref);
    assert!((got / expected - 1.0).abs() < 1e-3, "{got} vs {expected}");
}

#[test]
fn rainflow_two_block_closed_form() {
    let (a1, n1, a2, n2, m, n_ref) = (2.0, 800, 0.5, 1200, 3.0, 1e4);
    let mut s = sine_block(a1, n1);
    s.extend(sine_block(a2, n2));
    s.push(a2);
    let damage = n1 as f64 * (2.0 * a1).powf(m) + n2 as f64 * (2.0 * a2).powf(m);
    let expected = (damage / n_ref).powf(1.0 / m);
    let got = del(&s, m, n_ref);
    assert!((got / expected - 1.0).abs() < 1e-3, "{got} vs {expected}");
}

#[test]
fn rainflow_constant_series_has_no_damage() {
    assert_eq!(del(&[4.2; 1000], 4.0, 1e7), 0.0);
}

proptest! {
    #[test]
    fn rainflow_invariants(xs in prop::collection::vec(-100.0f64..100.0, 3..200), c in 0.1f64..10.0, shift in -50.0f64..50.0) {
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let cycles = rainflow(&xs);
        for cy in &cycles {
            prop_assert!(cy.range >= 0.0 && cy.range <= hi - lo + 1e-12);
            prop_assert!(cy.count == 1.0 || cy.count == 0.5);
        }
        // the largest range always appears
        let top = cycles.iter().map(|c| c.range).fold(0.0, f64::max);
        prop_assert!((top - (hi - lo)).abs() < 1e-9);
        let d = del_from_cycles(&cycles, 4.0, 1e3);
        let scaled: Vec<f64> = xs.iter().map(|x| c * x + shift).collect();
        prop_assert!((del(&scaled, 4.0, 1e3) - c * d).abs() <= 1e-9 * (1.0 + c * d));
    }
}

#[test]
fn outputs_round_trip() {
    let t = turbine();
    let sc = Scenario { duration: 60.0, ..repo_scenario("falling_wind") };
    let trace = run(t, &sc, &designs().controllers(), 2).unwrap();
    let metrics = compute_metrics(&trace, &t.params, &sc);
    let dir = tempfile::tempdir().unwrap();

    let p = dir.path().join("trace.csv");
    write_trace(&p, &trace).unwrap();
    assert_eq!(read_trace(&p).unwrap(), trace.records);

    let p = dir.path().join("switches.csv");
    write_switches(&p, &trace.switches).unwrap();
    assert_eq!(read_switches(&p).unwrap(), trace.switches);

    let p = dir.path().join("metrics.json");
    write_json(&p, &metrics).unwrap();
    assert_eq!(read_json::<Metrics>(&p).unwrap(), metrics);

    let pt = |v: f64, margin: Option<f64>, certified: bool, stable: Option<bool>| MarginPoint { v, p: 1e6, margin, certified, stable };
    let k2 = vec![pt(5.0, Some(0.37), true, Some(true)), pt(6.0, None, false, None), pt(7.0, Some(f64::INFINITY), false, Some(false))];
    let k3 = vec![pt(5.0, Some(0.12), false, Some(true)), pt(6.0, None, false, None), pt(7.0, Some(0.9), true, Some(true))];
    let p = dir.path().join("margin_map.csv");
    write_margin_map(&p, &k2, &k3).unwrap();
    let rows = read_margin_map(&p).unwrap();
    assert_eq!(rows.len(), 3);
    for (r, (a, b)) in rows.iter().zip(k2.iter().zip(&k3)) {
        assert_eq!((r.k2, r.k3), (*a, *b));
    }
}

#[test]
fn runs_are_deterministic() {
    let t = turbine();
    let sc = Scenario { duration: 60.0, ..repo_scenario("low_wind") };
    let a = run(t, &sc, &designs().controllers(), 4).unwrap();
    let b = run(t, &sc, &designs().controllers(), 4).unwrap();
    assert_eq!(a, b);
}
