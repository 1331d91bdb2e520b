//! Shooting for nontrivial solutions with two zeros and an inflection of
//! `psi1(u')` (BC1), or with three consecutive zeros (BC2).

use rayon::prelude::*;

use crate::equation::{integrate_ivp, Component, Equation, IvpConfig, SystemState, Trajectory};
use crate::error::{Error, Result};
use crate::search::bisect_bracket;

/// Bisection iterations spent refining a zero on the dense output.
const REFINE_ITERS: usize = 200;

/// Initial data `(a; 0, psi1(slope), psi2(curvature))`.
pub fn shoot(eq: &Equation, a: f64, slope: f64, curvature: f64, x_end: f64, cfg: &IvpConfig) -> Result<Trajectory> {
    if slope == 0.0 {
        return Err(Error::Config("shooting slope must be nonzero".into()));
    }
    let init = SystemState::new(a, 0.0, eq.psi1.eval(slope), eq.psi2.eval(curvature));
    integrate_ivp(eq, init, x_end, cfg)
}

/// Boundary tolerance, relative to the solution's scale.
pub fn tau_bc(max_u: f64) -> f64 {
    1e-8 * max_u.max(1.0)
}

/// Interior nonvanishing threshold.
pub fn delta_int(max_u: f64) -> f64 {
    1e-6 * max_u
}

#[derive(Debug, Clone)]
pub struct SolutionBC1 {
    pub trajectory: Trajectory,
    pub a: f64,
    pub b: f64,
    /// First zero of `v3` in `[a, b]`.
    pub xi: f64,
    /// All zeros of `v3` found in `[a, b]`.
    pub xi_candidates: Vec<f64>,
    /// Sign of `u` on `(a, b)`.
    pub sign: f64,
    pub curvature: f64,
    pub max_u: f64,
}

#[derive(Debug, Clone)]
pub struct SolutionBC2 {
    pub trajectory: Trajectory,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub sign_ab: f64,
    pub sign_bc: f64,
    pub curvature: f64,
    pub max_u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bc1Config {
    pub slope: f64,
    pub ivp: IvpConfig,
    /// Curvature parameters `±2^k` for `k` in this range are swept.
    pub sweep_k: (i32, i32),
}

impl Default for Bc1Config {
    fn default() -> Self {
        Bc1Config {
            slope: 1.0,
            ivp: IvpConfig::default(),
            sweep_k: (-10, 20),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bc2Config {
    pub slope: f64,
    pub curvature: f64,
    pub horizon: f64,
    pub ivp: IvpConfig,
}

impl Default for Bc2Config {
    fn default() -> Self {
        Bc2Config {
            slope: 1.0,
            curvature: 0.0,
            horizon: 10.0,
            ivp: IvpConfig::default(),
        }
    }
}

fn sweep_values(k: (i32, i32)) -> Vec<f64> {
    let pos: Vec<f64> = (k.0..=k.1).map(|e| 2f64.powi(e)).collect();
    let mut v: Vec<f64> = pos.iter().rev().map(|m| -m).collect();
    v.push(0.0);
    v.extend(pos);
    v
}

/// Continuous shooting target: `sign * u(b)` while `u` keeps its sign on
/// `(a, b)`, otherwise minus the distance from the first interior zero to
/// `b` (minus `|u(b)|`).
fn bc1_target(traj: &Trajectory, b: f64, sign: f64) -> f64 {
    let ub = sign * traj.u_at(b);
    match traj.events_of(Component::V1).find(|&z| z < b) {
        Some(z) => -(b - z) - ub.abs(),
        None => ub,
    }
}

/// Finds the curvature parameter giving `u(b) = 0` with `u` of one sign on
/// `(a, b)` (slope fixed), then locates `xi`.
pub fn solve_bc1(eq: &Equation, a: f64, b: f64, cfg: &Bc1Config) -> Result<SolutionBC1> {
    if !(a < b) {
        return Err(Error::DegenerateInterval { a, b });
    }
    let sign = cfg.slope.signum();
    let target = |m: f64| -> Result<f64> {
        let traj = shoot(eq, a, cfg.slope, m, b, &cfg.ivp)?;
        Ok(bc1_target(&traj, b, sign))
    };

    let ms = sweep_values(cfg.sweep_k);
    // shots that blow up (superlinear f) drop out of the sweep
    let shots: Vec<Result<f64>> = ms.par_iter().map(|&m| target(m)).collect();
    let mut first_err = None;
    let finite: Vec<(f64, f64)> = ms
        .iter()
        .zip(shots)
        .filter_map(|(&m, g)| match g {
            Ok(g) => Some((m, g)),
            Err(e) => {
                first_err.get_or_insert(e);
                None
            }
        })
        .collect();
    if finite.is_empty() {
        return Err(first_err.unwrap_or(Error::NoBracket));
    }
    let pair = finite
        .windows(2)
        .find(|w| (w[0].1 < 0.0) != (w[1].1 < 0.0))
        .ok_or(Error::NoBracket)?;

    // keep a nonnegative-target end so the certified solution has no
    // interior crossing
    let (lo, hi) = if pair[0].1 >= 0.0 { (pair[1].0, pair[0].0) } else { (pair[0].0, pair[1].0) };
    let mut failure = None;
    let (_, good) = bisect_bracket(
        |m| match target(m) {
            Ok(g) => g,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        lo,
        hi,
        REFINE_ITERS,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let traj = shoot(eq, a, cfg.slope, good, b, &cfg.ivp)?;
    certify_bc1(traj, a, b, sign, good)
}

/// Certifies a single shot from `a` with the given start data as a (BC1)
/// solution on `[a, b]`.
pub fn certify_bc1_shot(eq: &Equation, a: f64, b: f64, slope: f64, curvature: f64, ivp: &IvpConfig) -> Result<SolutionBC1> {
    let traj = shoot(eq, a, slope, curvature, b, ivp)?;
    certify_bc1(traj, a, b, slope.signum(), curvature)
}

fn check_interior(traj: &Trajectory, lo: f64, hi: f64, sign: f64, max_u: f64) -> Result<()> {
    if let Some(z) = traj.events_of(Component::V1).find(|&z| z > lo && z < hi) {
        return Err(Error::InteriorZero { x: z });
    }
    let margin = 1e-3 * (hi - lo);
    let delta = delta_int(max_u);
    for x in traj.fine_grid(10).into_iter().filter(|&x| x > lo && x < hi) {
        let v = sign * traj.u_at(x);
        let inner = x >= lo + margin && x <= hi - margin;
        if !(v > 0.0) || (inner && v < delta) {
            return Err(Error::InteriorZero { x });
        }
    }
    Ok(())
}

fn certify_bc1(traj: Trajectory, a: f64, b: f64, sign: f64, curvature: f64) -> Result<SolutionBC1> {
    let max_u = traj.max_abs_u_on(a, b).1;
    let tau = tau_bc(max_u);
    if traj.u_at(a).abs() > tau || traj.u_at(b).abs() > tau {
        return Err(Error::NoBracket);
    }
    check_interior(&traj, a, b, sign, max_u)?;
    let xi_candidates = locate_xi_all(&traj, a, b, tau);
    let xi = *xi_candidates.first().ok_or(Error::NoXi { a, b })?;
    Ok(SolutionBC1 {
        trajectory: traj,
        a,
        b,
        xi,
        xi_candidates,
        sign,
        curvature,
        max_u,
    })
}

/// Takes the first two zeros after `a` of the trajectory shot from `a` as
/// `b` and `c`.
pub fn solve_bc2(eq: &Equation, a: f64, cfg: &Bc2Config) -> Result<SolutionBC2> {
    let ivp = IvpConfig {
        stop_after_v1_events: Some(2),
        ..cfg.ivp
    };
    let traj = shoot(eq, a, cfg.slope, cfg.curvature, cfg.horizon, &ivp)?;
    let zeros: Vec<f64> = traj.events_of(Component::V1).take(2).collect();
    if zeros.len() < 2 {
        return Err(Error::InsufficientZeros {
            found: zeros.len(),
            needed: 2,
        });
    }
    let (b, c) = (zeros[0], zeros[1]);
    let max_u = traj.max_abs_u_on(a, c).1;
    let sign_ab = traj.u_at(0.5 * (a + b)).signum();
    let sign_bc = traj.u_at(0.5 * (b + c)).signum();
    check_interior(&traj, a, b, sign_ab, max_u)?;
    check_interior(&traj, b, c, sign_bc, max_u)?;
    Ok(SolutionBC2 {
        trajectory: traj,
        a,
        b,
        c,
        sign_ab,
        sign_bc,
        curvature: cfg.curvature,
        max_u,
    })
}

/// Bisection on the interpolated component over a sign-change bracket.
pub fn refine_zero(traj: &Trajectory, bracket: (f64, f64), component: Component) -> Result<f64> {
    let (lo, hi) = bracket;
    let (fl, fh) = (traj.component_at(lo, component), traj.component_at(hi, component));
    if fl == 0.0 {
        return Ok(lo);
    }
    if fh == 0.0 {
        return Ok(hi);
    }
    if (fl > 0.0) == (fh > 0.0) {
        return Err(Error::NoSignChange { lo, hi });
    }
    Ok(traj.bisect_component(component, lo, hi, REFINE_ITERS))
}

/// All zeros of `v3` in `[a, b]`, endpoints included when `|v3| <= tau`.
pub fn locate_xi_all(traj: &Trajectory, a: f64, b: f64, tau: f64) -> Vec<f64> {
    let mut xs = Vec::new();
    if traj.component_at(a, Component::V3).abs() <= tau {
        xs.push(a);
    }
    xs.extend(traj.events_of(Component::V3).filter(|&x| x >= a && x <= b));
    if traj.component_at(b, Component::V3).abs() <= tau {
        xs.push(b);
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|p, q| (*p - *q).abs() <= 1e-14 * (1.0 + p.abs()));
    xs
}

/// A zero of `v3` (i.e. of `(psi1(u'))'`) in `[a, b]`.
pub fn locate_xi(traj: &Trajectory, a: f64, b: f64) -> Result<f64> {
    if !traj.covers(a, b) {
        return Err(Error::DomainExceeded {
            x: if a < traj.x_start() { a } else { b },
            lo: traj.x_start(),
            hi: traj.x_end(),
        });
    }
    let tau = tau_bc(traj.max_abs_u_on(a, b).1);
    locate_xi_all(traj, a, b, tau)
        .first()
        .copied()
        .ok_or(Error::NoXi { a, b })
}

/// Smallest `k` in `[k_lo, k_hi]` for which `k * q` admits a (BC1)
/// solution on `[a, b]`, by bisection on solvability. `k_lo` must fail and
/// `k_hi` succeed.
pub fn critical_scale_bc1(eq: &Equation, a: f64, b: f64, (k_lo, k_hi): (f64, f64), cfg: &Bc1Config, iters: usize) -> Result<(f64, SolutionBC1)> {
    let attempt = |k: f64| solve_bc1(&eq.with_q(eq.q.scaled(k)), a, b, cfg);
    let fatal = |e: &Error| !e.is_no_solution() && !matches!(e, Error::NoBracket);
    match attempt(k_lo) {
        Ok(_) => return Err(Error::Config(format!("scale {k_lo} already admits a solution"))),
        Err(e) if fatal(&e) => return Err(e),
        Err(_) => {}
    }
    let mut best = attempt(k_hi)?;
    let (mut lo, mut hi) = (k_lo, k_hi);
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match attempt(mid) {
            Ok(sol) => {
                hi = mid;
                best = sol;
            }
            Err(e) if fatal(&e) => return Err(e),
            Err(_) => lo = mid,
        }
    }
    Ok((hi, best))
}
