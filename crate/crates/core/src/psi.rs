//! Odd increasing operators and grid-based checks of their structural
//! hypotheses (sub/super-multiplicativity, convexity of the reciprocal).
//!
//! The checks falsify on a sample grid; they cannot prove a property.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Oddness/inverse tolerance for signed powers.
pub const TAU_POWER: f64 = 1e-10;
/// Oddness/inverse tolerance for registry expressions (root-find limited).
pub const TAU_CUSTOM: f64 = 1e-8;
/// Relative slack allowed by the property checkers.
pub const TAU_PROP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum PsiKind {
    Power { alpha: f64 },
    Custom { expr: Expr },
}

/// An operator `psi` from the hypotheses: odd, increasing, `psi(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiFunction {
    kind: PsiKind,
    pub declared_odd: bool,
    pub declared_increasing: bool,
}

/// Serialized form used in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PsiSpec {
    Power { alpha: f64 },
    Custom { expr: String },
}

/// Signed power `|s|^(alpha-1) s`.
pub fn power_psi(alpha: f64) -> Result<PsiFunction> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::NonPositiveExponent(alpha));
    }
    Ok(PsiFunction {
        kind: PsiKind::Power { alpha },
        declared_odd: true,
        declared_increasing: true,
    })
}

pub(crate) fn signed_pow(s: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        s
    } else if s == 0.0 {
        0.0
    } else {
        s.signum() * s.abs().powf(alpha)
    }
}

impl PsiFunction {
    pub fn identity() -> Self {
        PsiFunction {
            kind: PsiKind::Power { alpha: 1.0 },
            declared_odd: true,
            declared_increasing: true,
        }
    }

    pub fn custom(expr: Expr) -> Self {
        PsiFunction {
            kind: PsiKind::Custom { expr },
            declared_odd: true,
            declared_increasing: true,
        }
    }

    pub fn from_spec(spec: &PsiSpec) -> Result<Self> {
        match spec {
            PsiSpec::Power { alpha } => power_psi(*alpha),
            PsiSpec::Custom { expr } => Ok(Self::custom(Expr::parse(expr)?)),
        }
    }

    pub fn to_spec(&self) -> PsiSpec {
        match &self.kind {
            PsiKind::Power { alpha } => PsiSpec::Power { alpha: *alpha },
            PsiKind::Custom { expr } => PsiSpec::Custom {
                expr: expr.source().to_string(),
            },
        }
    }

    pub fn kind(&self) -> &PsiKind {
        &self.kind
    }

    /// Exponent of a signed power, `None` for registry expressions.
    pub fn power_exponent(&self) -> Option<f64> {
        match self.kind {
            PsiKind::Power { alpha } => Some(alpha),
            PsiKind::Custom { .. } => None,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.power_exponent() == Some(1.0)
    }

    pub fn tolerance(&self) -> f64 {
        match self.kind {
            PsiKind::Power { .. } => TAU_POWER,
            PsiKind::Custom { .. } => TAU_CUSTOM,
        }
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        match &self.kind {
            PsiKind::Power { alpha } => signed_pow(s, *alpha),
            PsiKind::Custom { expr } => expr.eval(s),
        }
    }

    /// Preimage of `y`. Exact for signed powers; bisection on an expanding
    /// bracket `[0, 2^k]` for registry expressions, extended by oddness.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        match &self.kind {
            PsiKind::Power { alpha } => Ok(signed_pow(y, 1.0 / alpha)),
            PsiKind::Custom { expr } => {
                if y == 0.0 {
                    return Ok(0.0);
                }
                let target = y.abs();
                let mut hi = 1.0_f64;
                let mut k = 0;
                while expr.eval(hi) < target {
                    hi *= 2.0;
                    k += 1;
                    if k > 1100 || !hi.is_finite() {
                        return Err(Error::BracketNotFound(y));
                    }
                }
                let mut lo = if k == 0 { 0.0 } else { hi / 2.0 };
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if expr.eval(mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let x = if (expr.eval(lo) - target).abs() <= (expr.eval(hi) - target).abs() {
                    lo
                } else {
                    hi
                };
                Ok(y.signum() * x)
            }
        }
    }
}

/// `psi^{-1}(y)` as a free function.
pub fn eval_inverse(psi: &PsiFunction, y: f64) -> Result<f64> {
    psi.inverse(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiProperty {
    Submultiplicative,
    Supermultiplicative,
    ReciprocalConvex,
    Jensen,
    Odd,
    Increasing,
}

impl PsiProperty {
    pub fn name(self) -> &'static str {
        match self {
            PsiProperty::Submultiplicative => "submultiplicative",
            PsiProperty::Supermultiplicative => "supermultiplicative",
            PsiProperty::ReciprocalConvex => "reciprocal_convex",
            PsiProperty::Jensen => "jensen",
            PsiProperty::Odd => "odd",
            PsiProperty::Increasing => "increasing",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub inputs: Vec<f64>,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsiPropertyReport {
    pub property: PsiProperty,
    pub holds: bool,
    /// Largest positive excess found, if any.
    pub worst_violation: Option<Violation>,
    pub grid_spec: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyGrid {
    pub points: Vec<f64>,
    pub description: String,
}

impl PropertyGrid {
    pub fn log_spaced(n: usize, lo: f64, hi: f64) -> Self {
        let points = if n == 1 {
            vec![lo]
        } else {
            let (llo, lhi) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
                .collect()
        };
        PropertyGrid {
            points,
            description: format!("{n} log-spaced points in [{lo:e}, {hi:e}]"),
        }
    }

    pub fn from_points(points: Vec<f64>) -> Self {
        let description = format!("{} explicit points", points.len());
        PropertyGrid {
            points,
            description,
        }
    }
}

impl Default for PropertyGrid {
    fn default() -> Self {
        Self::log_spaced(64, 1e-3, 1e3)
    }
}

struct Worst {
    tol: f64,
    best: Option<Violation>,
}

impl Worst {
    fn new(tol: f64) -> Self {
        Worst { tol, best: None }
    }

    fn offer(&mut self, magnitude: f64, inputs: &[f64]) {
        let magnitude = if magnitude.is_nan() { f64::INFINITY } else { magnitude };
        if magnitude > self.tol && self.best.as_ref().is_none_or(|w| magnitude > w.magnitude) {
            self.best = Some(Violation {
                inputs: inputs.to_vec(),
                magnitude,
            });
        }
    }

    fn finish(self, property: PsiProperty, grid_spec: String) -> PsiPropertyReport {
        PsiPropertyReport {
            property,
            holds: self.best.is_none(),
            worst_violation: self.best,
            grid_spec,
        }
    }
}

fn positive_grid(grid: &PropertyGrid) -> Result<()> {
    if grid.points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(&x) = grid.points.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::NonPositiveGridPoint { x });
    }
    Ok(())
}

fn relative_excess(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs) / rhs.abs().max(1.0)
}

/// `psi(xy) <= psi(x) psi(y)` on all grid pairs.
pub fn check_submultiplicative(psi: &PsiFunction, grid: &PropertyGrid) -> Result<PsiPropertyReport> {
    positive_grid(grid)?;
    let mut worst = Worst::new(TAU_PROP);
    for &x in &grid.points {
        for &y in &grid.points {
            let excess = relative_excess(psi.eval(x * y), psi.eval(x) * psi.eval(y));
            worst.offer(excess, &[x, y]);
        }
    }
    Ok(worst.finish(PsiProperty::Submultiplicative, grid.description.clone()))
}

/// `psi(xy) >= psi(x) psi(y)` on all grid pairs.
pub fn check_supermultiplicative(psi: &PsiFunction, grid: &PropertyGrid) -> Result<PsiPropertyReport> {
    positive_grid(grid)?;
    let mut worst = Worst::new(TAU_PROP);
    for &x in &grid.points {
        for &y in &grid.points {
            let excess = relative_excess(psi.eval(x) * psi.eval(y), psi.eval(x * y));
            worst.offer(excess, &[x, y]);
        }
    }
    Ok(worst.finish(PsiProperty::Supermultiplicative, grid.description.clone()))
}

/// Midpoint convexity of `1/psi` on the grid.
pub fn check_reciprocal_convex(psi: &PsiFunction, grid: &PropertyGrid) -> Result<PsiPropertyReport> {
    positive_grid(grid)?;
    for &x in &grid.points {
        let value = psi.eval(x);
        if !(value > 0.0) {
            return Err(Error::NonPositiveValue { x, value });
        }
    }
    let mut worst = Worst::new(TAU_PROP);
    for (i, &x) in grid.points.iter().enumerate() {
        for &y in &grid.points[i..] {
            let lhs = 1.0 / psi.eval(0.5 * (x + y));
            let rhs = 0.5 * (1.0 / psi.eval(x) + 1.0 / psi.eval(y));
            worst.offer(relative_excess(lhs, rhs), &[x, y]);
        }
    }
    Ok(worst.finish(PsiProperty::ReciprocalConvex, grid.description.clone()))
}

/// `psi(-x) = -psi(x)` and `psi(0) = 0`, with the operator's own tolerance.
pub fn check_odd(psi: &PsiFunction, grid: &PropertyGrid) -> Result<PsiPropertyReport> {
    if grid.points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut worst = Worst::new(psi.tolerance());
    worst.offer(psi.eval(0.0).abs(), &[0.0]);
    for &x in &grid.points {
        worst.offer((psi.eval(-x) + psi.eval(x)).abs(), &[x]);
    }
    Ok(worst.finish(PsiProperty::Odd, grid.description.clone()))
}

/// Strict increase across the symmetric grid `-points ∪ {0} ∪ points`.
pub fn check_increasing(psi: &PsiFunction, grid: &PropertyGrid) -> Result<PsiPropertyReport> {
    if grid.points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut pts: Vec<f64> = grid.points.iter().flat_map(|&x| [x, -x]).collect();
    pts.push(0.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    // any non-increase is a violation, including ties
    let mut worst = Worst::new(f64::NEG_INFINITY);
    for w in pts.windows(2) {
        let (a, b) = (psi.eval(w[0]), psi.eval(w[1]));
        if !(b > a) {
            worst.offer(a - b, &[w[0], w[1]]);
        }
    }
    Ok(worst.finish(PsiProperty::Increasing, grid.description.clone()))
}

/// Two-point and N-point Jensen inequalities for a function declared convex.
pub fn check_jensen<G: Fn(f64) -> f64>(
    g: G,
    pairs: &[(f64, f64, f64)],
    tuples: &[Vec<f64>],
) -> PsiPropertyReport {
    let mut worst = Worst::new(TAU_PROP);
    for &(t, x1, x2) in pairs {
        let lhs = g(t * x1 + (1.0 - t) * x2);
        let rhs = t * g(x1) + (1.0 - t) * g(x2);
        worst.offer(relative_excess(lhs, rhs), &[t, x1, x2]);
    }
    for xs in tuples.iter().filter(|xs| !xs.is_empty()) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let lhs = g(mean);
        let rhs = xs.iter().map(|&x| g(x)).sum::<f64>() / n;
        worst.offer(relative_excess(lhs, rhs), xs);
    }
    worst.finish(
        PsiProperty::Jensen,
        format!("{} weighted pairs, {} tuples", pairs.len(), tuples.len()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn custom(src: &str) -> PsiFunction {
        PsiFunction::custom(Expr::parse(src).unwrap())
    }

    #[test]
    fn power_eval_and_inverse() {
        let p2 = power_psi(2.0).unwrap();
        assert_eq!(p2.eval(3.0), 9.0);
        assert_eq!(p2.eval(-3.0), -9.0);
        assert_eq!(eval_inverse(&p2, 9.0).unwrap(), 3.0);
        let p3 = power_psi(3.0).unwrap();
        assert!((p3.inverse(-8.0).unwrap() + 2.0).abs() < 1e-15);
        assert!(matches!(power_psi(0.0), Err(Error::NonPositiveExponent(_))));
        assert!(matches!(power_psi(-1.5), Err(Error::NonPositiveExponent(_))));
    }

    #[test]
    fn custom_inverse_by_bisection() {
        let psi = custom("s*(1+abs(s))");
        let x = psi.inverse(2.0).unwrap();
        assert!((x - 1.0).abs() < 1e-12);
        assert_eq!(psi.inverse(0.0).unwrap(), 0.0);
        assert_eq!(psi.inverse(-2.0).unwrap(), -x);
        let small = psi.inverse(1e-9).unwrap();
        assert!((psi.eval(small) - 1e-9).abs() <= TAU_CUSTOM);
    }

    #[test]
    fn bounded_custom_has_no_bracket() {
        // s/(1+|s|) < 1 everywhere
        let psi = custom("s/(1+abs(s))");
        assert!(matches!(psi.inverse(2.0), Err(Error::BracketNotFound(_))));
    }

    #[test]
    fn multiplicativity_classification() {
        let grid = PropertyGrid::default();
        for alpha in [0.5, 1.0, 2.0, 3.0] {
            let p = power_psi(alpha).unwrap();
            assert!(check_submultiplicative(&p, &grid).unwrap().holds, "alpha={alpha}");
            assert!(check_supermultiplicative(&p, &grid).unwrap().holds, "alpha={alpha}");
        }
        let grow = custom("s*(1+abs(s))");
        assert!(check_submultiplicative(&grow, &grid).unwrap().holds);
        let r = check_supermultiplicative(&grow, &grid).unwrap();
        assert!(!r.holds && r.worst_violation.is_some());

        let sat = custom("s/(1+abs(s))");
        assert!(check_supermultiplicative(&sat, &grid).unwrap().holds);
        let r = check_submultiplicative(&sat, &grid).unwrap();
        assert!(!r.holds);
        let w = r.worst_violation.unwrap();
        let (x, y) = (w.inputs[0], w.inputs[1]);
        assert!(sat.eval(x * y) > sat.eval(x) * sat.eval(y));
    }

    #[test]
    fn reciprocal_convexity() {
        let grid = PropertyGrid::default();
        for alpha in [0.5, 1.0, 2.0, 3.0, 5.0] {
            let p = power_psi(alpha).unwrap();
            assert!(check_reciprocal_convex(&p, &grid).unwrap().holds, "alpha={alpha}");
        }
        assert!(check_reciprocal_convex(&custom("s*(1+abs(s))"), &grid).unwrap().holds);
        let single = PropertyGrid::from_points(vec![1.0]);
        let r = check_reciprocal_convex(&power_psi(2.0).unwrap(), &single).unwrap();
        assert!(r.holds);
        // 1/(s - s^2) fails positivity beyond s = 1
        let bad = custom("s - s^2");
        assert!(matches!(
            check_reciprocal_convex(&bad, &grid),
            Err(Error::NonPositiveValue { .. })
        ));
    }

    #[test]
    fn grid_errors() {
        let p = power_psi(2.0).unwrap();
        let empty = PropertyGrid::from_points(vec![]);
        assert!(matches!(check_submultiplicative(&p, &empty), Err(Error::EmptyGrid)));
        let neg = PropertyGrid::from_points(vec![-1.0, 2.0]);
        assert!(matches!(
            check_supermultiplicative(&p, &neg),
            Err(Error::NonPositiveGridPoint { .. })
        ));
    }

    #[test]
    fn jensen_examples() {
        let sq = |x: f64| x * x;
        assert!(check_jensen(sq, &[(0.5, 0.0, 2.0)], &[]).holds);
        assert!(check_jensen(sq, &[], &[vec![1.0, 2.0, 3.0]]).holds);
        let r = check_jensen(f64::sqrt, &[(0.5, 0.0, 4.0)], &[]);
        assert!(!r.holds);
        let w = r.worst_violation.unwrap();
        assert!((w.magnitude - (2f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn odd_and_increasing() {
        let grid = PropertyGrid::default();
        assert!(check_odd(&custom("s*(1+abs(s))"), &grid).unwrap().holds);
        assert!(!check_odd(&custom("s + s^2"), &grid).unwrap().holds);
        assert!(check_increasing(&power_psi(0.5).unwrap(), &grid).unwrap().holds);
        assert!(!check_increasing(&custom("sin(s)"), &grid).unwrap().holds);
    }
}
