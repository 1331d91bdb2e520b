//! Solver output against closed-form linear solutions.

mod common;

use common::{bc1_determinant, lambda_star_det, linear_u, solve3, zero_spacing, LinearBasis};
use lyap3::bvp::{shoot, solve_bc1, solve_bc2, Bc1Config, Bc2Config};
use lyap3::equation::{Coefficient, Component, Equation, IvpConfig};
use lyap3::error::Error;
use lyap3::lyapunov::{lhs_bc1, threshold_power, verify_bc1, verify_bc2, zero_count_bound, Verdict};

fn linear(lambda: f64) -> Equation {
    Equation::linear(Coefficient::constant(lambda))
}

fn tight() -> IvpConfig {
    IvpConfig {
        tol: 1e-11,
        ..IvpConfig::default()
    }
}

/// `[u, u', u'']` at `x` for the linear problem with the given start data.
fn linear_jet(lambda: f64, slope: f64, curvature: f64, x: f64) -> [f64; 3] {
    let basis = LinearBasis::new(lambda);
    let c = solve3(basis.jet(0.0), [0.0, slope, curvature]);
    let j = basis.jet(x);
    [0, 1, 2].map(|r| c[0] * j[r][0] + c[1] * j[r][1] + c[2] * j[r][2])
}

#[test]
fn shot_tracks_closed_form() {
    let t = shoot(&linear(10.0), 0.0, 1.0, 0.5, 3.0, &tight()).unwrap();
    for i in 0..=60 {
        let x = 0.05 * i as f64;
        let exact = linear_u(10.0, 1.0, 0.5, x);
        assert!((t.u_at(x) - exact).abs() < 1e-8 * (1.0 + exact.abs()), "x = {x}");
    }
}

#[test]
fn zero_gaps_approach_asymptotic_spacing() {
    let lambda = 50.0;
    let t = shoot(&linear(lambda), 0.0, 1.0, 0.0, 12.0, &tight()).unwrap();
    let z: Vec<f64> = t.events_of(Component::V1).collect();
    assert!(z.len() > 10);
    let last = z[z.len() - 1] - z[z.len() - 2];
    assert!((last - zero_spacing(lambda)).abs() < 1e-6, "gap {last}");
}

#[test]
fn bc1_solution_matches_oracle_curvature_and_xi() {
    let lambda = 40.0;
    let sol = solve_bc1(&linear(lambda), 0.0, 1.0, &Bc1Config { ivp: tight(), ..Bc1Config::default() }).unwrap();
    // u(1) is affine in the curvature
    let u0 = linear_jet(lambda, 1.0, 0.0, 1.0)[0];
    let u1 = linear_jet(lambda, 1.0, 1.0, 1.0)[0];
    let m = -u0 / (u1 - u0);
    assert!((sol.curvature - m).abs() < 1e-6 * m.abs().max(1.0), "{} vs {m}", sol.curvature);

    let (mut lo, mut hi) = (0.0, 1.0);
    assert!(linear_jet(lambda, 1.0, m, lo)[2] > 0.0 && linear_jet(lambda, 1.0, m, hi)[2] < 0.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if linear_jet(lambda, 1.0, m, mid)[2] > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((sol.xi - lo).abs() < 1e-6, "xi {} vs {lo}", sol.xi);

    // identity operators give Phi = 1, so the left side is lambda (b - xi)
    let lhs = lhs_bc1(&sol, sol.xi, &linear(lambda)).unwrap();
    assert!((lhs.value - lambda * (1.0 - sol.xi)).abs() < 1e-8 * lambda);
    let r = verify_bc1(&sol, &linear(lambda)).unwrap();
    assert_eq!(r.verdict, Verdict::Holds);
    assert_eq!(r.threshold, 4.0);
}

#[test]
fn half_critical_scale_has_no_inflection() {
    let lambda = 0.5 * lambda_star_det(1.0);
    assert!(bc1_determinant(lambda, 1.0).abs() > 1e-6);
    let r = solve_bc1(&linear(lambda), 0.0, 1.0, &Bc1Config::default());
    assert!(matches!(r, Err(Error::NoXi { .. })), "{r:?}");
}

#[test]
fn bc2_zeros_match_oracle() {
    let lambda = 100.0;
    let cfg = Bc2Config {
        horizon: 4.0,
        ivp: tight(),
        ..Bc2Config::default()
    };
    let sol = solve_bc2(&linear(lambda), 0.0, &cfg).unwrap();
    for z in [sol.b, sol.c] {
        assert!(linear_u(lambda, cfg.slope, cfg.curvature, z).abs() < 1e-8, "zero {z}");
    }
    let reports = verify_bc2(&sol, &linear(lambda), 257).unwrap();
    assert_eq!(reports.len(), 3);
    assert!(reports.iter().any(|r| r.verdict == Verdict::Holds));
}

#[test]
fn zero_count_constant_q() {
    let lambda = 200.0;
    let t = shoot(&linear(lambda), 0.0, 1.0, 0.0, 6.0, &tight()).unwrap();
    let r = zero_count_bound(&t, 0.0, 6.0, &linear(lambda), 257).unwrap();
    assert!(r.holds());
    // zeros are close to the asymptotic spacing apart
    let min_gap = r.zeros.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    assert!(min_gap > 0.8 * zero_spacing(lambda));
    assert_eq!(r.threshold, threshold_power(0.0, 6.0, 1.0, 1.0).unwrap());
}
