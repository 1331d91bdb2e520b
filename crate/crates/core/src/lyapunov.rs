//! Thresholds, `q±`-weighted integrals and verification of the
//! Lyapunov-type inequalities against certified solutions.

use std::cell::Cell;

use crate::bvp::{tau_bc, SolutionBC1, SolutionBC2};
use crate::equation::{
    integrate_simpson, panel_quadrature, Component, Equation, NonlinearityRepr, Quadrature, Rule, Trajectory,
};
use crate::error::{Error, Result};
use crate::psi::PsiFunction;
use crate::search::golden_section_max;

/// Default number of points in a `xi` scan.
pub const DEFAULT_SCAN_N: usize = 257;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InequalityKind {
    /// Two-point condition with an inflection `xi`.
    Thm21,
    /// Three-point condition, left subinterval `[a, b]`.
    Thm22Left,
    /// Three-point condition, right subinterval `[b, c]`.
    Thm22Right,
    /// Three-point condition over `[a, c]`.
    Thm22Full,
    /// `|q|`-weighted variant.
    Cor21Abs,
    ZeroCount,
    SupNorm,
}

impl InequalityKind {
    pub fn name(self) -> &'static str {
        match self {
            InequalityKind::Thm21 => "thm21",
            InequalityKind::Thm22Left => "thm22_left",
            InequalityKind::Thm22Right => "thm22_right",
            InequalityKind::Thm22Full => "thm22_full",
            InequalityKind::Cor21Abs => "cor21_abs",
            InequalityKind::ZeroCount => "zero_count",
            InequalityKind::SupNorm => "sup_norm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// `margin > quadrature_error`
    Holds,
    /// `margin < -quadrature_error`
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub kind: InequalityKind,
    pub a: f64,
    pub b: f64,
    pub c: Option<f64>,
    pub xi: Option<f64>,
    pub lhs: f64,
    pub threshold: f64,
    pub margin: f64,
    pub holds: bool,
    pub verdict: Verdict,
    pub quadrature_error: f64,
}

impl InequalityReport {
    pub fn new(
        kind: InequalityKind,
        (a, b, c): (f64, f64, Option<f64>),
        xi: Option<f64>,
        lhs: f64,
        threshold: f64,
        quadrature_error: f64,
    ) -> Self {
        let margin = lhs - threshold;
        let verdict = if margin > quadrature_error {
            Verdict::Holds
        } else if margin < -quadrature_error {
            Verdict::Fails
        } else {
            Verdict::Inconclusive
        };
        InequalityReport {
            kind,
            a,
            b,
            c,
            xi,
            lhs,
            threshold,
            margin,
            holds: verdict == Verdict::Holds,
            verdict,
            quadrature_error,
        }
    }

    fn or_violation(self) -> Result<Self> {
        if self.verdict == Verdict::Fails {
            Err(Error::InvariantViolation(Box::new(self)))
        } else {
            Ok(self)
        }
    }
}

/// `psi2((2/(b-a)) / psi1((b-a)/2))`
pub fn threshold(a: f64, b: f64, psi1: &PsiFunction, psi2: &PsiFunction) -> Result<f64> {
    if !(a < b) {
        return Err(Error::DegenerateInterval { a, b });
    }
    let half = 0.5 * (b - a);
    let denom = psi1.eval(half);
    if !(denom > 0.0) {
        return Err(Error::DegenerateInterval { a, b });
    }
    Ok(psi2.eval((2.0 / (b - a)) / denom))
}

/// Power-operator closed form `(2/(b-a))^(a2 (a1 + 1))`.
pub fn threshold_power(a: f64, b: f64, alpha1: f64, alpha2: f64) -> Result<f64> {
    if !(a < b) {
        return Err(Error::DegenerateInterval { a, b });
    }
    Ok((2.0 / (b - a)).powf(alpha2 * (alpha1 + 1.0)))
}

/// Limit of `Phi(u)` as `u -> 0`, when one is implied by the data.
///
/// Signed-power operators with `f` a signed power or a declared power
/// sandwich of exponent `p` give `|u|^(p - a1 a2)` behaviour: limit 1 in the
/// balanced case, 0 when `p > a1 a2`, and rejection when `p < a1 a2`.
pub fn phi_limit_at_zero(eq: &Equation) -> Result<Option<f64>> {
    if eq.is_balanced_power() {
        return Ok(Some(1.0));
    }
    let k = match (eq.psi1.power_exponent(), eq.psi2.power_exponent()) {
        (Some(a1), Some(a2)) => a1 * a2,
        _ => return Ok(None),
    };
    let p = match (&eq.f.repr, eq.f.sandwich) {
        (NonlinearityRepr::SignedPower(p), _) => *p,
        (_, Some(sw)) => sw.p,
        _ => return Ok(None),
    };
    if p > k {
        Ok(Some(0.0))
    } else if p < k {
        Err(Error::OutOfHypothesis(format!(
            "Phi(u) is unbounded at u = 0 (p = {p} < alpha1*alpha2 = {k})"
        )))
    } else {
        Ok(None)
    }
}

/// `Phi(u) = f(u) / psi2(psi1(u))`.
pub fn phi_weight(u: f64, eq: &Equation) -> Result<f64> {
    if eq.is_balanced_power() {
        return Ok(1.0);
    }
    if u == 0.0 {
        return phi_limit_at_zero(eq)?.ok_or(Error::UndefinedAtZero);
    }
    Ok(eq.f.eval(u) / eq.psi2.eval(eq.psi1.eval(u)))
}

/// Evaluates `Phi(u(x))` along a trajectory; zeros of `u` without a
/// declared limit are recorded and surfaced after integration.
pub(crate) struct PhiAlong<'a> {
    eq: &'a Equation,
    traj: &'a Trajectory,
    balanced: bool,
    limit: Option<f64>,
    undefined: Cell<bool>,
}

impl<'a> PhiAlong<'a> {
    pub(crate) fn new(eq: &'a Equation, traj: &'a Trajectory) -> Result<Self> {
        Ok(PhiAlong {
            eq,
            traj,
            balanced: eq.is_balanced_power(),
            limit: phi_limit_at_zero(eq)?,
            undefined: Cell::new(false),
        })
    }

    #[inline]
    pub(crate) fn at(&self, x: f64) -> f64 {
        if self.balanced {
            return 1.0;
        }
        let u = self.traj.u_at(x);
        if u == 0.0 {
            return match self.limit {
                Some(l) => l,
                None => {
                    self.undefined.set(true);
                    0.0
                }
            };
        }
        self.eq.f.eval(u) / self.eq.psi2.eval(self.eq.psi1.eval(u))
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.undefined.get() {
            Err(Error::UndefinedAtZero)
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Part {
    Plus,
    Minus,
    Abs,
}

/// Running integral of `w(x) = part(q)(x) Phi(u(x))` over breakpoints
/// inherited from the trajectory nodes and refined to a minimum density.
pub(crate) struct Cumulative {
    breaks: Vec<f64>,
    values: Vec<f64>,
    errors: Vec<f64>,
}

const MIN_PANELS: usize = 256;

fn breakpoints(nodes: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let max_len = (hi - lo) / MIN_PANELS as f64;
    let mut b = vec![lo];
    for x in nodes.iter().copied().filter(|&x| x > lo && x < hi).chain(std::iter::once(hi)) {
        let prev = *b.last().unwrap();
        let len = x - prev;
        if len <= 0.0 {
            continue;
        }
        let pieces = (len / max_len).ceil().max(1.0) as usize;
        for j in 1..pieces {
            b.push(prev + len * j as f64 / pieces as f64);
        }
        b.push(x);
    }
    b
}

impl Cumulative {
    fn build<W: Fn(f64) -> f64>(w: &W, nodes: &[f64], lo: f64, hi: f64) -> Self {
        let breaks = breakpoints(nodes, lo, hi);
        let mut values = Vec::with_capacity(breaks.len());
        let mut errors = Vec::with_capacity(breaks.len());
        let (mut v, mut e) = (0.0, 0.0);
        values.push(0.0);
        errors.push(0.0);
        for p in breaks.windows(2) {
            let q = panel_quadrature(w, p[0], p[1], Rule::Gauss2);
            v += q.value;
            e += q.error;
            values.push(v);
            errors.push(e);
        }
        Cumulative { breaks, values, errors }
    }

    /// `∫_lo^x w`
    fn to<W: Fn(f64) -> f64>(&self, w: &W, x: f64) -> Quadrature {
        let n = self.breaks.len();
        let j = self.breaks.partition_point(|&b| b <= x).clamp(1, n) - 1;
        let base = Quadrature {
            value: self.values[j],
            error: self.errors[j],
        };
        let xj = self.breaks[j];
        if x > xj {
            base + panel_quadrature(w, xj, x, Rule::Gauss2)
        } else {
            base
        }
    }

    fn total(&self) -> Quadrature {
        let n = self.values.len() - 1;
        Quadrature {
            value: self.values[n],
            error: self.errors[n],
        }
    }
}

/// Weighted integrals of one trajectory over a fixed interval `[lo, hi]`.
pub(crate) struct Profile<'a> {
    phi: PhiAlong<'a>,
    lo: f64,
    hi: f64,
    minus: Cumulative,
    plus: Cumulative,
}

impl<'a> Profile<'a> {
    pub(crate) fn new(eq: &'a Equation, traj: &'a Trajectory, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::DegenerateInterval { a: lo, b: hi });
        }
        if !traj.covers(lo, hi) {
            return Err(Error::DomainExceeded {
                x: hi,
                lo: traj.x_start(),
                hi: traj.x_end(),
            });
        }
        let phi = PhiAlong::new(eq, traj)?;
        let nodes = traj.node_xs();
        let minus = Cumulative::build(&|x| weight(eq, &phi, Part::Minus, x), &nodes, lo, hi);
        let plus = Cumulative::build(&|x| weight(eq, &phi, Part::Plus, x), &nodes, lo, hi);
        phi.check()?;
        Ok(Profile {
            phi,
            lo,
            hi,
            minus,
            plus,
        })
    }

    /// `∫_lo^xi q- Phi + ∫_xi^hi q+ Phi`
    pub(crate) fn expression(&self, xi: f64) -> Quadrature {
        let xi = xi.clamp(self.lo, self.hi);
        let eq = self.phi.eq;
        let wm = |x| weight(eq, &self.phi, Part::Minus, x);
        let wp = |x| weight(eq, &self.phi, Part::Plus, x);
        let m = self.minus.to(&wm, xi);
        let p_to = self.plus.to(&wp, xi);
        let total = self.plus.total();
        Quadrature {
            value: m.value + (total.value - p_to.value),
            error: m.error + total.error,
        }
    }

    /// Maximum of [`Self::expression`] over `[lo, hi]`: uniform scan then
    /// golden-section refinement around the best scan point.
    pub(crate) fn scan_max(&self, scan_n: usize) -> (f64, Quadrature) {
        let n = scan_n.max(3);
        let h = (self.hi - self.lo) / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|i| if i == n - 1 { self.hi } else { self.lo + h * i as f64 }).collect();
        let (mut best_i, mut best) = (0, self.expression(xs[0]));
        for (i, &x) in xs.iter().enumerate().skip(1) {
            let e = self.expression(x);
            if e.value > best.value {
                best_i = i;
                best = e;
            }
        }
        let lo = xs[best_i.saturating_sub(1)];
        let hi = xs[(best_i + 1).min(n - 1)];
        let (xg, _) = golden_section_max(|x| self.expression(x).value, lo, hi, 1e-12 * (1.0 + hi.abs()), 200);
        let eg = self.expression(xg);
        if eg.value > best.value {
            (xg, eg)
        } else {
            (xs[best_i], best)
        }
    }
}

#[inline]
fn weight(eq: &Equation, phi: &PhiAlong<'_>, part: Part, x: f64) -> f64 {
    let q = eq.q.eval(x);
    let qp = match part {
        Part::Plus => q.max(0.0),
        Part::Minus => (-q).max(0.0),
        Part::Abs => q.abs(),
    };
    if qp == 0.0 {
        0.0
    } else {
        qp * phi.at(x)
    }
}

/// `∫_lo^hi part(q) Phi(u)` on the trajectory grid.
pub(crate) fn weighted_integral(eq: &Equation, traj: &Trajectory, part: Part, lo: f64, hi: f64) -> Result<Quadrature> {
    if lo == hi {
        return Ok(Quadrature { value: 0.0, error: 0.0 });
    }
    let phi = PhiAlong::new(eq, traj)?;
    let c = Cumulative::build(&|x| weight(eq, &phi, part, x), &traj.node_xs(), lo, hi);
    phi.check()?;
    Ok(c.total())
}

/// `∫_a^xi q- Phi(u) + ∫_xi^b q+ Phi(u)`.
pub fn lhs_bc1(sol: &SolutionBC1, xi: f64, eq: &Equation) -> Result<Quadrature> {
    if !(xi >= sol.a && xi <= sol.b) {
        return Err(Error::DomainExceeded {
            x: xi,
            lo: sol.a,
            hi: sol.b,
        });
    }
    let m = weighted_integral(eq, &sol.trajectory, Part::Minus, sol.a, xi)?;
    let p = weighted_integral(eq, &sol.trajectory, Part::Plus, xi, sol.b)?;
    Ok(m + p)
}

/// Two-point inequality, checked at every `xi` candidate; the weakest
/// margin is reported.
pub fn verify_bc1(sol: &SolutionBC1, eq: &Equation) -> Result<InequalityReport> {
    let thr = threshold(sol.a, sol.b, &eq.psi1, &eq.psi2)?;
    let mut worst: Option<InequalityReport> = None;
    for &xi in &sol.xi_candidates {
        let lhs = lhs_bc1(sol, xi, eq)?;
        let r = InequalityReport::new(
            InequalityKind::Thm21,
            (sol.a, sol.b, None),
            Some(xi),
            lhs.value,
            thr,
            lhs.error,
        );
        if worst.as_ref().is_none_or(|w| r.margin < w.margin) {
            worst = Some(r);
        }
    }
    worst.ok_or(Error::NoXi { a: sol.a, b: sol.b })?.or_violation()
}

/// Scanned maximum of the bracketed expression on `[lo, hi]` against
/// `threshold(lo, hi)`.
fn scanned_report(
    eq: &Equation,
    traj: &Trajectory,
    kind: InequalityKind,
    (lo, hi): (f64, f64),
    abc: (f64, f64, Option<f64>),
    scan_n: usize,
) -> Result<InequalityReport> {
    let prof = Profile::new(eq, traj, lo, hi)?;
    let (xi, val) = prof.scan_max(scan_n);
    let thr = threshold(lo, hi, &eq.psi1, &eq.psi2)?;
    Ok(InequalityReport::new(kind, abc, Some(xi), val.value, thr, val.error))
}

/// Three-point inequalities: `[a, b]`, `[b, c]` and `[a, c]`, in that order.
pub fn verify_bc2(sol: &SolutionBC2, eq: &Equation, scan_n: usize) -> Result<Vec<InequalityReport>> {
    if scan_n < 3 {
        return Err(Error::Config(format!("scan_n must be at least 3, got {scan_n}")));
    }
    let (a, b, c) = (sol.a, sol.b, sol.c);
    let t = &sol.trajectory;
    let left = scanned_report(eq, t, InequalityKind::Thm22Left, (a, b), (a, b, None), scan_n)?;
    let right = scanned_report(eq, t, InequalityKind::Thm22Right, (b, c), (b, c, None), scan_n)?;
    let full = scanned_report(eq, t, InequalityKind::Thm22Full, (a, c), (a, b, Some(c)), scan_n)?;
    if full.verdict == Verdict::Fails {
        return Err(Error::InvariantViolation(Box::new(full)));
    }
    if left.verdict == Verdict::Fails && right.verdict == Verdict::Fails {
        let weaker = if left.margin < right.margin { left } else { right };
        return Err(Error::InvariantViolation(Box::new(weaker)));
    }
    Ok(vec![left, right, full])
}

fn abs_report(eq: &Equation, traj: &Trajectory, lo: f64, hi: f64, abc: (f64, f64, Option<f64>)) -> Result<InequalityReport> {
    let lhs = weighted_integral(eq, traj, Part::Abs, lo, hi)?;
    let thr = threshold(lo, hi, &eq.psi1, &eq.psi2)?;
    InequalityReport::new(InequalityKind::Cor21Abs, abc, None, lhs.value, thr, lhs.error).or_violation()
}

/// `∫_a^b |q| Phi(u)` against the two-point threshold.
pub fn verify_abs_bc1(sol: &SolutionBC1, eq: &Equation) -> Result<InequalityReport> {
    abs_report(eq, &sol.trajectory, sol.a, sol.b, (sol.a, sol.b, None))
}

/// `|q|` variants on `[a, b]`, `[b, c]` and `[a, c]`.
pub fn verify_abs_bc2(sol: &SolutionBC2, eq: &Equation) -> Result<Vec<InequalityReport>> {
    let t = &sol.trajectory;
    Ok(vec![
        abs_report(eq, t, sol.a, sol.b, (sol.a, sol.b, None))?,
        abs_report(eq, t, sol.b, sol.c, (sol.b, sol.c, None))?,
        abs_report(eq, t, sol.a, sol.c, (sol.a, sol.b, Some(sol.c)))?,
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripleMax {
    pub lo: f64,
    pub hi: f64,
    pub xi: f64,
    pub value: f64,
    pub error: f64,
}

/// Summed bound in the form stated for signed-power data, logged only.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSumDiagnostic {
    /// `(2/(b-a))^e N^(e+1)` with `e = a2 (a1 + 1)`.
    pub value: f64,
    /// Whether the observed sum exceeds it.
    pub exceeded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroCountReport {
    pub a: f64,
    pub b: f64,
    pub zeros: Vec<f64>,
    pub n: usize,
    pub per_triple: Vec<TripleMax>,
    pub sum: f64,
    pub threshold: f64,
    pub n_bound: f64,
    pub quadrature_error: f64,
    pub power_sum: Option<PowerSumDiagnostic>,
}

impl ZeroCountReport {
    pub fn holds(&self) -> bool {
        self.to_report().holds
    }

    /// As an inequality `n_bound > N`.
    pub fn to_report(&self) -> InequalityReport {
        InequalityReport::new(
            InequalityKind::ZeroCount,
            (self.a, self.b, None),
            None,
            self.n_bound,
            self.n as f64,
            self.quadrature_error,
        )
    }
}

/// Zeros of `u` in `[a, b]`, the start point included when `u` vanishes there.
pub fn zeros_in(traj: &Trajectory, a: f64, b: f64) -> Vec<f64> {
    let tau = tau_bc(traj.max_abs_u_on(a, b).1);
    let mut zs = Vec::new();
    if traj.u_at(a).abs() <= tau {
        zs.push(a);
    }
    zs.extend(traj.events_of(Component::V1).filter(|&z| z > a && z <= b));
    zs
}

/// Upper bound on `N` from `2N + 1` consecutive zeros in `[a, b]`.
pub fn zero_count_bound(traj: &Trajectory, a: f64, b: f64, eq: &Equation, scan_n: usize) -> Result<ZeroCountReport> {
    let zeros = zeros_in(traj, a, b);
    if zeros.len() < 3 {
        return Err(Error::TooFewZeros {
            found: zeros.len(),
            needed: 3,
        });
    }
    let n = (zeros.len() - 1) / 2;
    let per_triple = (0..n)
        .map(|k| {
            let (lo, hi) = (zeros[2 * k], zeros[2 * k + 2]);
            let prof = Profile::new(eq, traj, lo, hi)?;
            let (xi, q) = prof.scan_max(scan_n);
            Ok(TripleMax {
                lo,
                hi,
                xi,
                value: q.value,
                error: q.error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sum: f64 = per_triple.iter().map(|t| t.value).sum();
    let err: f64 = per_triple.iter().map(|t| t.error).sum();
    let thr = threshold(a, b, &eq.psi1, &eq.psi2)?;
    let power_sum = match (eq.psi1.power_exponent(), eq.psi2.power_exponent()) {
        (Some(a1), Some(a2)) => {
            let e = a2 * (a1 + 1.0);
            let value = (2.0 / (b - a)).powf(e) * (n as f64).powf(e + 1.0);
            Some(PowerSumDiagnostic {
                value,
                exceeded: sum > value,
            })
        }
        _ => None,
    };
    Ok(ZeroCountReport {
        a,
        b,
        zeros,
        n,
        per_triple,
        sum,
        threshold: thr,
        n_bound: sum / thr,
        quadrature_error: err / thr,
        power_sum,
    })
}

fn abs_q_integral(eq: &Equation, a: f64, b: f64) -> Result<f64> {
    Ok(integrate_simpson(|x| eq.q.eval(x).abs(), a, b, 1024)?.value)
}

/// Lower bound `M_min` on `max |u|` for signed-power operators and
/// `|f(s)| <= c2 |s|^p`.
pub fn min_sup_norm(a: f64, b: f64, abs_q_integral: f64, c2: f64, p: f64, alpha1: f64, alpha2: f64) -> Result<f64> {
    let e = p - alpha1 * alpha2;
    if !(e > 0.0) {
        return Err(Error::ExponentNotPositive(e));
    }
    if !(abs_q_integral > 0.0) {
        return Err(Error::ZeroCoefficient);
    }
    let thr = threshold_power(a, b, alpha1, alpha2)?;
    Ok((thr / (c2 * abs_q_integral)).powf(1.0 / e))
}

/// Whether `d` can be the location of `max |u| = big_m`:
/// `psi1(M) [1/psi1(d-a) + 1/psi1(b-d)] <= (b-a) psi2^{-1}(c2 M^p ∫|q|)`.
#[allow(clippy::too_many_arguments)]
pub fn max_location_feasible(
    d: f64,
    big_m: f64,
    a: f64,
    b: f64,
    abs_q_integral: f64,
    c2: f64,
    p: f64,
    psi1: &PsiFunction,
    psi2: &PsiFunction,
) -> Result<bool> {
    if !(a < d && d < b) {
        return Err(Error::DegenerateInterval { a, b });
    }
    let left = psi1.eval(big_m) * (1.0 / psi1.eval(d - a) + 1.0 / psi1.eval(b - d));
    let right = (b - a) * psi2.inverse(c2 * big_m.powf(p) * abs_q_integral)?;
    Ok(left <= right)
}

fn power_data(eq: &Equation) -> Result<(f64, f64, f64, f64)> {
    let (a1, a2) = match (eq.psi1.power_exponent(), eq.psi2.power_exponent()) {
        (Some(a1), Some(a2)) => (a1, a2),
        _ => {
            return Err(Error::OutOfHypothesis(
                "sup-norm bound needs signed-power operators".into(),
            ))
        }
    };
    let sw = eq
        .f
        .sandwich
        .ok_or_else(|| Error::OutOfHypothesis("sup-norm bound needs a power sandwich for f".into()))?;
    Ok((a1, a2, sw.c2, sw.p))
}

/// `max |u| > M_min` for a certified two-point solution.
pub fn verify_sup_norm(sol: &SolutionBC1, eq: &Equation) -> Result<InequalityReport> {
    let (a1, a2, c2, p) = power_data(eq)?;
    let m_min = min_sup_norm(sol.a, sol.b, abs_q_integral(eq, sol.a, sol.b)?, c2, p, a1, a2)?;
    let (_, max_u) = sol.trajectory.max_abs_u_on(sol.a, sol.b);
    InequalityReport::new(
        InequalityKind::SupNorm,
        (sol.a, sol.b, None),
        None,
        max_u,
        m_min,
        tau_bc(max_u),
    )
    .or_violation()
}

/// Feasibility of the observed maximiser of a certified solution.
pub fn observed_max_feasible(sol: &SolutionBC1, eq: &Equation) -> Result<bool> {
    let (_, _, c2, p) = power_data(eq)?;
    let (d, m) = sol.trajectory.max_abs_u_on(sol.a, sol.b);
    let iq = abs_q_integral(eq, sol.a, sol.b)?;
    max_location_feasible(d, m, sol.a, sol.b, iq, c2, p, &eq.psi1, &eq.psi2)
}

/// `∫_a^b |q|` by composite Simpson.
pub fn integral_abs_q(eq: &Equation, a: f64, b: f64) -> Result<f64> {
    abs_q_integral(eq, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::{Coefficient, Nonlinearity, NonlinearityRepr, Sandwich};
    use crate::expr::Expr;
    use crate::psi::power_psi;

    #[test]
    fn threshold_constants() {
        let id = PsiFunction::identity();
        let p2 = power_psi(2.0).unwrap();
        assert!((threshold(0.0, 1.0, &id, &id).unwrap() - 4.0).abs() < 1e-12);
        assert!((threshold(0.0, 1.0, &p2, &id).unwrap() - 8.0).abs() < 1e-12);
        for (a1, a2) in [(1.0, 1.0), (2.0, 0.5), (0.7, 3.0)] {
            let t = threshold(0.0, 2.0, &power_psi(a1).unwrap(), &power_psi(a2).unwrap()).unwrap();
            assert!((t - 1.0).abs() < 1e-12);
        }
        assert!(matches!(threshold(1.0, 1.0, &id, &id), Err(Error::DegenerateInterval { .. })));
    }

    #[test]
    fn phi_examples() {
        let eq = Equation::new(
            power_psi(2.0).unwrap(),
            power_psi(1.5).unwrap(),
            Coefficient::constant(1.0),
            Nonlinearity::signed_power(3.0).unwrap(),
        );
        assert_eq!(phi_weight(0.37, &eq).unwrap(), 1.0);
        let cubic = Equation::new(
            PsiFunction::identity(),
            PsiFunction::identity(),
            Coefficient::constant(1.0),
            Nonlinearity::signed_power(3.0).unwrap(),
        );
        assert_eq!(phi_weight(2.0, &cubic).unwrap(), 4.0);
        assert_eq!(phi_weight(0.0, &cubic).unwrap(), 0.0);

        let custom_f = Equation::new(
            PsiFunction::identity(),
            PsiFunction::identity(),
            Coefficient::constant(1.0),
            Nonlinearity::new(NonlinearityRepr::Custom(Expr::parse("u + u^3").unwrap()), None).unwrap(),
        );
        assert!(matches!(phi_weight(0.0, &custom_f), Err(Error::UndefinedAtZero)));

        let sqrt_f = Equation::new(
            PsiFunction::identity(),
            PsiFunction::identity(),
            Coefficient::constant(1.0),
            Nonlinearity::new(NonlinearityRepr::SignedPower(0.5), Some(Sandwich { c1: 1.0, c2: 1.0, p: 0.5 })).unwrap(),
        );
        assert!(matches!(phi_weight(0.0, &sqrt_f), Err(Error::OutOfHypothesis(_))));
    }

    #[test]
    fn sup_norm_arithmetic() {
        let m = min_sup_norm(0.0, 1.0, 8.0, 1.0, 2.0, 1.0, 1.0).unwrap();
        assert!((m - 0.5).abs() < 1e-15);
        let m = min_sup_norm(0.0, 1.0, 8.0, 1.0, 3.0, 1.0, 1.0).unwrap();
        assert!((m - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            min_sup_norm(0.0, 1.0, 8.0, 1.0, 1.0, 1.0, 1.0),
            Err(Error::ExponentNotPositive(_))
        ));
        assert!(matches!(
            min_sup_norm(0.0, 1.0, 0.0, 1.0, 3.0, 1.0, 1.0),
            Err(Error::ZeroCoefficient)
        ));
    }

    #[test]
    fn max_location_examples() {
        let id = PsiFunction::identity();
        assert!(!max_location_feasible(1e-9, 1.0, 0.0, 1.0, 10.0, 1.0, 3.0, &id, &id).unwrap());
        assert!(max_location_feasible(0.5, 1.0, 0.0, 1.0, 1e3, 1.0, 3.0, &id, &id).unwrap());
        assert!(max_location_feasible(0.0, 1.0, 0.0, 1.0, 1e3, 1.0, 3.0, &id, &id).is_err());
    }

    #[test]
    fn verdict_classification() {
        let r = InequalityReport::new(InequalityKind::Thm21, (0.0, 1.0, None), Some(0.0), 5.0, 4.0, 0.1);
        assert_eq!(r.verdict, Verdict::Holds);
        let r = InequalityReport::new(InequalityKind::Thm21, (0.0, 1.0, None), Some(0.0), 4.05, 4.0, 0.1);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(!r.holds);
        let r = InequalityReport::new(InequalityKind::Thm21, (0.0, 1.0, None), Some(0.0), 3.0, 4.0, 0.1);
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(matches!(r.or_violation(), Err(Error::InvariantViolation(_))));
    }
}
