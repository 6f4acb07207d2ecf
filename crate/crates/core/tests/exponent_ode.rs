use std::f64::consts::LN_2;

use qhyper_core::hyperc::{r0_bound, solve_exponent, standard_exponent, weak_exponent, HcParams};

fn h(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        -s * s.ln() - (1.0 - s) * (1.0 - s).ln()
    }
}

/// alpha(xi) from a plain bisection for h^{-1}; valid away from xi = 0.
fn alpha_oracle(xi: f64) -> f64 {
    let target = LN_2 - xi;
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    (0.5 - (r * (1.0 - r)).sqrt()) / xi
}

/// RK4 in u-time with the oracle right-hand side; returns u at s = 4 * horizon.
fn oracle_u(p0: f64, r0: f64, horizon: f64, steps: usize) -> f64 {
    let f = |u: f64| alpha_oracle((r0 * (1.0 + (-u).exp())).min(LN_2));
    let hstep = 4.0 * horizon / steps as f64;
    let mut u = (p0 - 1.0).ln();
    for _ in 0..steps {
        let k1 = f(u);
        let k2 = f(u + 0.5 * hstep * k1);
        let k3 = f(u + 0.5 * hstep * k2);
        let k4 = f(u + hstep * k3);
        u += hstep / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    u
}

#[test]
fn default_step_matches_fine_oracle() {
    for (p0, r0) in [(2.0, 0.2), (1.5, 0.1), (3.0, 0.4)] {
        let horizon = 0.5;
        let path = solve_exponent(&HcParams::new(p0, r0, 1e-3, horizon).unwrap()).unwrap();
        let last = path.samples().last().unwrap();
        let reference = 1.0 + oracle_u(p0, r0, horizon, 40_000).exp();
        assert!(
            (last.p - reference).abs() <= 1e-8 * reference,
            "p0={p0} r0={r0}: {} vs {reference}",
            last.p
        );
    }
}

#[test]
fn rk4_converges_at_fourth_order() {
    let (p0, r0, horizon) = (2.0, 0.25, 0.25);
    let reference = solve_exponent(&HcParams::new(p0, r0, 1e-4, horizon).unwrap())
        .unwrap()
        .samples()
        .last()
        .unwrap()
        .u;
    let err = |step: f64| {
        let u = solve_exponent(&HcParams::new(p0, r0, step, horizon).unwrap())
            .unwrap()
            .samples()
            .last()
            .unwrap()
            .u;
        (u - reference).abs()
    };
    let (e1, e2) = (err(0.1), err(0.05));
    let ratio = e1 / e2;
    assert!(
        (10.0..24.0).contains(&ratio),
        "ratio {ratio} ({e1:e}, {e2:e})"
    );
}

#[test]
fn ordering_against_weak_and_standard() {
    for p0 in [1.5, 2.0, 3.0] {
        for frac in [0.25, 0.5, 0.9, 1.0] {
            let r0 = frac * r0_bound(p0);
            let path = solve_exponent(&HcParams::new(p0, r0, 1e-3, 2.0).unwrap()).unwrap();
            for s in path.samples().iter().step_by(50) {
                let weak = weak_exponent(p0, r0, s.t).unwrap();
                let standard = standard_exponent(p0, s.t);
                assert!(s.p >= weak * (1.0 - 1e-12), "p0={p0} r0={r0} t={}", s.t);
                assert!(weak >= standard * (1.0 - 1e-15));
            }
        }
    }
}
