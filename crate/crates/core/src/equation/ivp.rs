//! Dormand–Prince 5(4) integration of the reduced system with cubic
//! Hermite dense output and sign-change events on `v1` and `v3`.

use super::{Equation, SystemState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpConfig {
    /// Mixed relative/absolute local error target per step.
    pub tol: f64,
    /// Smallest step the controller may take; steps rejected at this size
    /// are forced through.
    pub h_min: f64,
    /// Largest step; `None` means `(x_end - x0) / 64`.
    pub h_max: Option<f64>,
    pub max_steps: usize,
    /// Stop once this many sign changes of `v1` have been recorded.
    pub stop_after_v1_events: Option<usize>,
}

impl Default for IvpConfig {
    fn default() -> Self {
        IvpConfig {
            tol: 1e-9,
            h_min: 1e-12,
            h_max: None,
            max_steps: 5_000_000,
            stop_after_v1_events: None,
        }
    }
}

/// Consecutive forced steps tolerated before giving up.
const MAX_FORCED_RUN: usize = 10_000;
const EVENT_BISECTIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    V1,
    V2,
    V3,
}

impl Component {
    fn index(self) -> usize {
        match self {
            Component::V1 => 0,
            Component::V2 => 1,
            Component::V3 => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub component: Component,
    pub x: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub forced: usize,
    pub rhs_evals: usize,
}

/// Dense numerical solution on `[nodes[0].x, nodes.last().x]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    nodes: Vec<SystemState>,
    slopes: Vec<[f64; 3]>,
    events: Vec<Event>,
    pub stats: StepStats,
    pub config: IvpConfig,
}

// Dormand–Prince tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy(y: &[f64; 3], h: f64, terms: &[(f64, &[f64; 3])]) -> [f64; 3] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..3 {
            out[i] += h * c * k[i];
        }
    }
    out
}

struct Stepper<'a> {
    eq: &'a Equation,
    evals: usize,
}

impl Stepper<'_> {
    fn f(&mut self, x: f64, y: [f64; 3]) -> Result<[f64; 3]> {
        self.evals += 1;
        self.eq.rhs(x, y)
    }

    /// One DP step from `(x, y)` with FSAL slope `k1`; returns the new state,
    /// its slope and the weighted error norm.
    fn step(&mut self, x: f64, y: &[f64; 3], k1: &[f64; 3], h: f64, tol: f64) -> Result<([f64; 3], [f64; 3], f64)> {
        let k2 = self.f(x + C2 * h, axpy(y, h, &[(A21, k1)]))?;
        let k3 = self.f(x + C3 * h, axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
        let k4 = self.f(x + C4 * h, axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = self.f(
            x + C5 * h,
            axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = self.f(
            x + h,
            axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        )?;
        let y_new = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = self.f(x + h, y_new)?;
        let mut err: f64 = 0.0;
        for i in 0..3 {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = tol * (1.0 + y[i].abs().max(y_new[i].abs()));
            err = err.max((e / scale).abs());
        }
        if !y_new.iter().all(|v| v.is_finite()) {
            err = f64::INFINITY;
        }
        Ok((y_new, k7, err))
    }
}

#[derive(Clone, Copy)]
struct SignTracker {
    sign: f64,
    x: f64,
}

/// Integrates from `init.x` to `x_end`, recording sign changes of `v1`
/// and `v3` refined by bisection on the dense output.
pub fn integrate_ivp(eq: &Equation, init: SystemState, x_end: f64, cfg: &IvpConfig) -> Result<Trajectory> {
    if !(init.x < x_end) {
        return Err(Error::IntervalEmpty { l: init.x, r: x_end });
    }
    eq.q.check_domain(init.x)?;
    eq.q.check_domain(x_end)?;

    let span = x_end - init.x;
    let h_max = cfg.h_max.unwrap_or(span / 64.0).min(span);
    let mut stepper = Stepper { eq, evals: 0 };
    let mut x = init.x;
    let mut y = init.values();
    let mut k1 = stepper.f(x, y)?;
    let mut h = (span * 1e-3).clamp(cfg.h_min, h_max);

    let mut nodes = vec![init];
    let mut slopes = vec![k1];
    let mut stats = StepStats::default();
    let mut forced_run = 0usize;

    let tracked = [Component::V1, Component::V3];
    let mut trackers: [Option<SignTracker>; 2] = [None, None];
    for (t, c) in trackers.iter_mut().zip(tracked) {
        let v = y[c.index()];
        if v != 0.0 {
            *t = Some(SignTracker { sign: v.signum(), x });
        }
    }
    let mut brackets: Vec<(Component, f64, f64)> = Vec::new();
    let mut v1_events = 0usize;

    while x < x_end {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(Error::StepUnderflow { x, h });
        }
        let last = x + h >= x_end || x_end - (x + h) < cfg.h_min;
        let h_try = if last { x_end - x } else { h };
        let (y_new, k_new, err) = stepper.step(x, &y, &k1, h_try, cfg.tol)?;

        let accept = if err <= 1.0 {
            forced_run = 0;
            true
        } else if h_try <= cfg.h_min * (1.0 + 1e-9) && err.is_finite() {
            // non-Lipschitz corner: keep marching at the floor step
            forced_run += 1;
            stats.forced += 1;
            if forced_run > MAX_FORCED_RUN {
                return Err(Error::StepUnderflow { x, h: h_try });
            }
            true
        } else {
            false
        };

        let factor = if err == 0.0 {
            5.0
        } else if err.is_finite() {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            0.1
        };

        if !accept {
            stats.rejected += 1;
            h = (h_try * factor).max(cfg.h_min);
            if h_try <= cfg.h_min && !err.is_finite() {
                return Err(Error::StepUnderflow { x, h: h_try });
            }
            continue;
        }

        stats.accepted += 1;
        let x_new = if last { x_end } else { x + h_try };
        for (t, c) in trackers.iter_mut().zip(tracked) {
            let v = y_new[c.index()];
            if v == 0.0 {
                continue;
            }
            match t {
                Some(prev) if prev.sign != v.signum() => {
                    brackets.push((c, prev.x, x_new));
                    if c == Component::V1 {
                        v1_events += 1;
                    }
                    *t = Some(SignTracker { sign: v.signum(), x: x_new });
                }
                Some(prev) => prev.x = x_new,
                None => *t = Some(SignTracker { sign: v.signum(), x: x_new }),
            }
        }

        x = x_new;
        y = y_new;
        k1 = k_new;
        nodes.push(SystemState::from_values(x, y));
        slopes.push(k1);
        h = (h_try * factor).clamp(cfg.h_min, h_max);

        if cfg.stop_after_v1_events.is_some_and(|n| v1_events >= n) {
            break;
        }
    }
    stats.rhs_evals = stepper.evals;

    let mut traj = Trajectory {
        nodes,
        slopes,
        events: Vec::new(),
        stats,
        config: *cfg,
    };
    let mut events: Vec<Event> = brackets
        .into_iter()
        .map(|(component, lo, hi)| Event {
            component,
            x: traj.bisect_component(component, lo, hi, EVENT_BISECTIONS),
        })
        .collect();
    events.sort_by(|a, b| a.x.total_cmp(&b.x));
    traj.events = events;
    Ok(traj)
}

impl Trajectory {
    /// Builds a trajectory from explicit nodes and slopes (no events).
    pub fn from_nodes(nodes: Vec<SystemState>, slopes: Vec<[f64; 3]>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != slopes.len() {
            return Err(Error::Config("trajectory needs >= 2 nodes with slopes".into()));
        }
        if nodes.windows(2).any(|w| !(w[1].x > w[0].x)) {
            return Err(Error::Config("trajectory nodes must increase in x".into()));
        }
        Ok(Trajectory {
            nodes,
            slopes,
            events: Vec::new(),
            stats: StepStats::default(),
            config: IvpConfig::default(),
        })
    }

    pub fn nodes(&self) -> &[SystemState] {
        &self.nodes
    }

    pub fn node_xs(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.x).collect()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn events_of(&self, component: Component) -> impl Iterator<Item = f64> + '_ {
        self.events
            .iter()
            .filter(move |e| e.component == component)
            .map(|e| e.x)
    }

    pub fn x_start(&self) -> f64 {
        self.nodes[0].x
    }

    pub fn x_end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].x
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        lo >= self.x_start() - slack && hi <= self.x_end() + slack
    }

    /// Cubic Hermite interpolation of all three components.
    pub fn state_at(&self, x: f64) -> SystemState {
        let n = self.nodes.len();
        let i = self.nodes.partition_point(|s| s.x <= x).clamp(1, n - 1);
        let (a, b) = (&self.nodes[i - 1], &self.nodes[i]);
        if x == a.x {
            return *a;
        }
        if x == b.x {
            return *b;
        }
        let (ka, kb) = (&self.slopes[i - 1], &self.slopes[i]);
        let h = b.x - a.x;
        let t = (x - a.x) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let (va, vb) = (a.values(), b.values());
        let mut v = [0.0; 3];
        for c in 0..3 {
            v[c] = h00 * va[c] + h * h10 * ka[c] + h01 * vb[c] + h * h11 * kb[c];
        }
        SystemState::from_values(x, v)
    }

    #[inline]
    pub fn u_at(&self, x: f64) -> f64 {
        self.component_at(x, Component::V1)
    }

    pub fn component_at(&self, x: f64, component: Component) -> f64 {
        self.state_at(x).values()[component.index()]
    }

    /// Bisection on the interpolant; assumes a sign change on `[lo, hi]`.
    pub(crate) fn bisect_component(&self, component: Component, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
        let mut f_lo = self.component_at(lo, component);
        for _ in 0..iters {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let f_mid = self.component_at(mid, component);
            if f_mid == 0.0 {
                return mid;
            }
            if (f_mid > 0.0) == (f_lo > 0.0) {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Sample points with `per_interval` points per node interval.
    pub fn fine_grid(&self, per_interval: usize) -> Vec<f64> {
        let per = per_interval.max(1);
        let mut xs = Vec::with_capacity(self.nodes.len() * per);
        for w in self.nodes.windows(2) {
            for j in 0..per {
                xs.push(w[0].x + (w[1].x - w[0].x) * j as f64 / per as f64);
            }
        }
        xs.push(self.x_end());
        xs
    }

    /// `max |u|` over `[lo, hi]`, sampled at ten points per node interval.
    pub fn max_abs_u_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut best = (lo, self.u_at(lo).abs());
        for x in self.fine_grid(10).into_iter().filter(|&x| x >= lo && x <= hi) {
            let v = self.u_at(x).abs();
            if v > best.1 {
                best = (x, v);
            }
        }
        let v = self.u_at(hi).abs();
        if v > best.1 {
            best = (hi, v);
        }
        best
    }

    pub fn max_abs_u(&self) -> f64 {
        self.max_abs_u_on(self.x_start(), self.x_end()).1
    }

    /// Nontrivial when `max |u| >= 1e-6 * (interval length)`.
    pub fn is_nontrivial(&self) -> bool {
        self.max_abs_u() >= 1e-6 * (self.x_end() - self.x_start())
    }

    /// Negated copy, as produced by negating the initial data of an odd system.
    pub fn negated(&self) -> Trajectory {
        let mut t = self.clone();
        for n in &mut t.nodes {
            n.v1 = -n.v1;
            n.v2 = -n.v2;
            n.v3 = -n.v3;
        }
        for s in &mut t.slopes {
            for v in s.iter_mut() {
                *v = -*v;
            }
        }
        t
    }

    /// `x,u,v2,v3` rows at the nodes.
    pub fn to_csv(&self) -> String {
        use crate::report::fmt_num;
        let mut out = String::from("x,u,v2,v3\n");
        for n in &self.nodes {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_num(n.x),
                fmt_num(n.v1),
                fmt_num(n.v2),
                fmt_num(n.v3)
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::{Coefficient, Nonlinearity};
    use crate::psi::power_psi;

    fn free() -> Equation {
        Equation::linear(Coefficient::constant(0.0))
    }

    #[test]
    fn linear_growth_is_exact() {
        let t = integrate_ivp(&free(), SystemState::new(0.0, 0.0, 1.0, 0.0), 2.0, &IvpConfig::default()).unwrap();
        for x in [0.1, 0.77, 1.3, 2.0] {
            assert!((t.u_at(x) - x).abs() < 1e-13);
        }
        assert_eq!(t.events().len(), 0);
    }

    #[test]
    fn quadratic_zero_event() {
        let t = integrate_ivp(&free(), SystemState::new(0.0, 0.0, 1.0, -2.0), 1.5, &IvpConfig::default()).unwrap();
        let zeros: Vec<f64> = t.events_of(Component::V1).collect();
        assert_eq!(zeros.len(), 1);
        assert!((zeros[0] - 1.0).abs() < 1e-8);
        assert_eq!(t.events_of(Component::V3).count(), 0);
        assert!(t.nodes().iter().all(|n| n.v3 == -2.0));
    }

    #[test]
    fn square_root_singularity() {
        let eq = Equation::new(
            power_psi(2.0).unwrap(),
            power_psi(1.5).unwrap(),
            Coefficient::constant(0.0),
            Nonlinearity::identity(),
        );
        let init = SystemState::new(0.0, 0.0, 0.0, 1.0);
        let t = integrate_ivp(&eq, init, 1.0, &IvpConfig::default()).unwrap();
        assert!((t.u_at(1.0) - 2.0 / 3.0).abs() < 1e-6, "{}", t.u_at(1.0));
    }

    #[test]
    fn stop_after_events() {
        let eq = Equation::linear(Coefficient::constant(100.0));
        let cfg = IvpConfig {
            stop_after_v1_events: Some(2),
            ..IvpConfig::default()
        };
        let t = integrate_ivp(&eq, SystemState::new(0.0, 0.0, 1.0, 0.0), 50.0, &cfg).unwrap();
        assert_eq!(t.events_of(Component::V1).count(), 2);
        assert!(t.x_end() < 50.0);
    }

    #[test]
    fn empty_interval_rejected() {
        let r = integrate_ivp(&free(), SystemState::new(1.0, 0.0, 1.0, 0.0), 1.0, &IvpConfig::default());
        assert!(matches!(r, Err(Error::IntervalEmpty { .. })));
    }

    #[test]
    fn domain_exceeded() {
        let q = Coefficient::constant(1.0).with_domain(0.0, 1.0).unwrap();
        let r = integrate_ivp(&Equation::linear(q), SystemState::new(0.0, 0.0, 1.0, 0.0), 2.0, &IvpConfig::default());
        assert!(matches!(r, Err(Error::DomainExceeded { .. })));
    }
}
