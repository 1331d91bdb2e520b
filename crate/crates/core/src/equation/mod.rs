//! The equation `(psi2((psi1(u'))'))' + q(x) f(u) = 0` and its first-order
//! reduction
//!
//! ```text
//! v1 = u,  v2 = psi1(u'),  v3 = psi2((psi1(u'))')
//! v1' = psi1^{-1}(v2),  v2' = psi2^{-1}(v3),  v3' = -q(x) f(v1)
//! ```

mod ivp;
mod quadrature;

pub use ivp::{integrate_ivp, Component, Event, IvpConfig, StepStats, Trajectory};
pub(crate) use quadrature::panel_quadrature;
pub use quadrature::{integrate_simpson, integrate_weighted, QuadGrid, Quadrature, Rule};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::psi::{signed_pow, PsiFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub freq: f64,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientRepr {
    Constant(f64),
    /// Ascending powers of `x`.
    Polynomial(Vec<f64>),
    /// `offset + sum(cos_k cos(freq_k x) + sin_k sin(freq_k x))`
    TrigPoly { offset: f64, terms: Vec<TrigTerm> },
    /// Piecewise-linear interpolation of `(xs, values)`.
    Samples { xs: Vec<f64>, values: Vec<f64> },
    Expression(Expr),
    Scaled(f64, Box<CoefficientRepr>),
    PositivePart(Box<CoefficientRepr>),
    NegativePart(Box<CoefficientRepr>),
}

impl CoefficientRepr {
    fn eval(&self, x: f64) -> f64 {
        match self {
            CoefficientRepr::Constant(c) => *c,
            CoefficientRepr::Polynomial(cs) => cs.iter().rev().fold(0.0, |acc, &c| acc * x + c),
            CoefficientRepr::TrigPoly { offset, terms } => {
                terms.iter().fold(*offset, |acc, t| {
                    let (s, c) = (t.freq * x).sin_cos();
                    acc + t.cos * c + t.sin * s
                })
            }
            CoefficientRepr::Samples { xs, values } => {
                let i = xs.partition_point(|&p| p <= x);
                if i == 0 {
                    values[0]
                } else if i >= xs.len() {
                    values[xs.len() - 1]
                } else {
                    let (x0, x1) = (xs[i - 1], xs[i]);
                    let t = (x - x0) / (x1 - x0);
                    values[i - 1] + t * (values[i] - values[i - 1])
                }
            }
            CoefficientRepr::Expression(e) => e.eval(x),
            CoefficientRepr::Scaled(k, inner) => k * inner.eval(x),
            CoefficientRepr::PositivePart(inner) => inner.eval(x).max(0.0),
            CoefficientRepr::NegativePart(inner) => (-inner.eval(x)).max(0.0),
        }
    }
}

/// The weight `q(x)` on a closed domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub repr: CoefficientRepr,
    pub lo: f64,
    pub hi: f64,
}

impl Coefficient {
    pub fn new(repr: CoefficientRepr) -> Result<Self> {
        let (lo, hi) = match &repr {
            CoefficientRepr::Samples { xs, values } => {
                if xs.len() < 2 || xs.len() != values.len() {
                    return Err(Error::Config(
                        "samples need at least two points and matching lengths".into(),
                    ));
                }
                if xs.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Config("sample abscissae must increase strictly".into()));
                }
                (xs[0], xs[xs.len() - 1])
            }
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        };
        Ok(Coefficient { repr, lo, hi })
    }

    pub fn constant(c: f64) -> Self {
        Coefficient {
            repr: CoefficientRepr::Constant(c),
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn with_domain(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::DegenerateInterval { a: lo, b: hi });
        }
        self.lo = self.lo.max(lo);
        self.hi = self.hi.min(hi);
        Ok(self)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.repr.eval(x)
    }

    pub fn eval_checked(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(self.repr.eval(x))
    }

    pub fn check_domain(&self, x: f64) -> Result<()> {
        // allow rounding at the closed ends
        let slack = 1e-12 * (1.0 + x.abs());
        if x < self.lo - slack || x > self.hi + slack || x.is_nan() {
            return Err(Error::DomainExceeded {
                x,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(())
    }

    pub fn scaled(&self, k: f64) -> Self {
        let repr = match &self.repr {
            CoefficientRepr::Constant(c) => CoefficientRepr::Constant(k * c),
            other => CoefficientRepr::Scaled(k, Box::new(other.clone())),
        };
        Coefficient {
            repr,
            lo: self.lo,
            hi: self.hi,
        }
    }
}

/// Positive and negative parts, `q = q+ - q-`.
pub fn q_split(q: &Coefficient) -> (Coefficient, Coefficient) {
    let part = |repr| Coefficient {
        repr,
        lo: q.lo,
        hi: q.hi,
    };
    (
        part(CoefficientRepr::PositivePart(Box::new(q.repr.clone()))),
        part(CoefficientRepr::NegativePart(Box::new(q.repr.clone()))),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearityRepr {
    /// `|s|^(p-1) s`
    SignedPower(f64),
    Custom(Expr),
}

/// Power bounds `c1 |s|^p <= |f(s)| <= c2 |s|^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub c1: f64,
    pub c2: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    pub repr: NonlinearityRepr,
    pub sandwich: Option<Sandwich>,
}

fn construction_grid() -> Vec<f64> {
    crate::psi::PropertyGrid::default().points
}

impl Nonlinearity {
    /// Builds `f` and checks oddness, `s f(s) > 0` and the declared
    /// sandwich on the default sample grid.
    pub fn new(repr: NonlinearityRepr, sandwich: Option<Sandwich>) -> Result<Self> {
        if let NonlinearityRepr::SignedPower(p) = repr {
            if !(p > 0.0) {
                return Err(Error::NonPositiveExponent(p));
            }
        }
        if let Some(sw) = sandwich {
            if !(sw.c1 > 0.0 && sw.c2 >= sw.c1 && sw.p > 0.0) {
                return Err(Error::Config(format!(
                    "sandwich needs 0 < c1 <= c2 and p > 0, got {sw:?}"
                )));
            }
        }
        let f = Nonlinearity { repr, sandwich };
        for s in construction_grid() {
            let (fp, fm) = (f.eval(s), f.eval(-s));
            if !(s * fp > 0.0 && -s * fm > 0.0) {
                return Err(Error::OutOfHypothesis(format!(
                    "f violates s f(s) > 0 at s = ±{s}"
                )));
            }
            if (fp + fm).abs() > 1e-12 * fp.abs().max(1.0) {
                return Err(Error::OutOfHypothesis(format!("f is not odd at s = {s}")));
            }
            if let Some(sw) = sandwich {
                let bound = s.powf(sw.p);
                let slack = 1e-9 * bound.max(f64::MIN_POSITIVE);
                if fp.abs() < sw.c1 * bound - slack || fp.abs() > sw.c2 * bound + slack {
                    return Err(Error::OutOfHypothesis(format!(
                        "f leaves the declared power sandwich at s = {s}"
                    )));
                }
            }
        }
        Ok(f)
    }

    pub fn identity() -> Self {
        Nonlinearity {
            repr: NonlinearityRepr::SignedPower(1.0),
            sandwich: None,
        }
    }

    pub fn signed_power(p: f64) -> Result<Self> {
        Self::new(
            NonlinearityRepr::SignedPower(p),
            Some(Sandwich { c1: 1.0, c2: 1.0, p }),
        )
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        match &self.repr {
            NonlinearityRepr::SignedPower(p) => signed_pow(s, *p),
            NonlinearityRepr::Custom(e) => e.eval(s),
        }
    }
}

/// A point of the reduced system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemState {
    pub x: f64,
    /// `u`
    pub v1: f64,
    /// `psi1(u')`
    pub v2: f64,
    /// `psi2((psi1(u'))')`
    pub v3: f64,
}

impl SystemState {
    pub fn new(x: f64, v1: f64, v2: f64, v3: f64) -> Self {
        SystemState { x, v1, v2, v3 }
    }

    pub fn values(&self) -> [f64; 3] {
        [self.v1, self.v2, self.v3]
    }

    pub(crate) fn from_values(x: f64, v: [f64; 3]) -> Self {
        SystemState {
            x,
            v1: v[0],
            v2: v[1],
            v3: v[2],
        }
    }
}

/// Operators, weight and nonlinearity of one problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Equation {
    pub psi1: PsiFunction,
    pub psi2: PsiFunction,
    pub q: Coefficient,
    pub f: Nonlinearity,
}

impl Equation {
    pub fn new(psi1: PsiFunction, psi2: PsiFunction, q: Coefficient, f: Nonlinearity) -> Self {
        Equation { psi1, psi2, q, f }
    }

    /// `u''' + q(x) u = 0`.
    pub fn linear(q: Coefficient) -> Self {
        Equation {
            psi1: PsiFunction::identity(),
            psi2: PsiFunction::identity(),
            q,
            f: Nonlinearity::identity(),
        }
    }

    pub fn with_q(&self, q: Coefficient) -> Self {
        Equation { q, ..self.clone() }
    }

    /// True when `psi1, psi2, f` are signed powers with `f = phi_{a1 a2}`,
    /// which makes `Phi(u) = 1`.
    pub fn is_balanced_power(&self) -> bool {
        match (
            self.psi1.power_exponent(),
            self.psi2.power_exponent(),
            &self.f.repr,
        ) {
            (Some(a1), Some(a2), NonlinearityRepr::SignedPower(p)) => {
                (p - a1 * a2).abs() <= 1e-14 * p.abs().max(1.0)
            }
            _ => false,
        }
    }

    #[inline]
    pub(crate) fn rhs(&self, x: f64, v: [f64; 3]) -> Result<[f64; 3]> {
        Ok([
            self.psi1.inverse(v[1])?,
            self.psi2.inverse(v[2])?,
            -self.q.eval(x) * self.f.eval(v[0]),
        ])
    }
}

/// Right-hand side of the reduced system at `s`.
pub fn system_derivative(eq: &Equation, s: &SystemState) -> Result<(f64, f64, f64)> {
    eq.q.check_domain(s.x)?;
    let d = eq.rhs(s.x, s.values())?;
    Ok((d[0], d[1], d[2]))
}

/// Serialized weight specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CoefficientSpec {
    Constant {
        value: f64,
    },
    Polynomial {
        coeffs: Vec<f64>,
    },
    Trig {
        #[serde(default)]
        offset: f64,
        terms: Vec<TrigTerm>,
    },
    Samples {
        xs: Vec<f64>,
        values: Vec<f64>,
    },
    Expr {
        expr: String,
    },
}

impl CoefficientSpec {
    pub fn build(&self) -> Result<Coefficient> {
        Coefficient::new(match self {
            CoefficientSpec::Constant { value } => CoefficientRepr::Constant(*value),
            CoefficientSpec::Polynomial { coeffs } => CoefficientRepr::Polynomial(coeffs.clone()),
            CoefficientSpec::Trig { offset, terms } => CoefficientRepr::TrigPoly {
                offset: *offset,
                terms: terms.clone(),
            },
            CoefficientSpec::Samples { xs, values } => CoefficientRepr::Samples {
                xs: xs.clone(),
                values: values.clone(),
            },
            CoefficientSpec::Expr { expr } => CoefficientRepr::Expression(Expr::parse(expr)?),
        })
    }
}

/// Serialized nonlinearity specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NonlinearityKind {
    Power { p: f64 },
    Custom { expr: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    #[serde(flatten)]
    pub kind: NonlinearityKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sandwich: Option<Sandwich>,
}

impl NonlinearitySpec {
    pub fn build(&self) -> Result<Nonlinearity> {
        let repr = match &self.kind {
            NonlinearityKind::Power { p } => NonlinearityRepr::SignedPower(*p),
            NonlinearityKind::Custom { expr } => NonlinearityRepr::Custom(Expr::parse(expr)?),
        };
        let sandwich = match (&repr, self.sandwich) {
            (_, Some(sw)) => Some(sw),
            (NonlinearityRepr::SignedPower(p), None) => Some(Sandwich { c1: 1.0, c2: 1.0, p: *p }),
            _ => None,
        };
        Nonlinearity::new(repr, sandwich)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi::power_psi;
    use std::f64::consts::PI;

    #[test]
    fn derivative_examples() {
        let eq = Equation::linear(Coefficient::new(CoefficientRepr::Polynomial(vec![0.0, 1.0])).unwrap());
        let d = system_derivative(&eq, &SystemState::new(1.0, 2.0, 3.0, 4.0)).unwrap();
        assert_eq!(d, (3.0, 4.0, -2.0));

        let eq = Equation::new(
            power_psi(2.0).unwrap(),
            power_psi(3.0).unwrap(),
            Coefficient::constant(0.0),
            Nonlinearity::identity(),
        );
        let d = system_derivative(&eq, &SystemState::new(0.0, 0.0, 9.0, -8.0)).unwrap();
        assert!((d.0 - 3.0).abs() < 1e-15);
        assert!((d.1 + 2.0).abs() < 1e-15);
    }

    #[test]
    fn domain_is_enforced() {
        let q = Coefficient::new(CoefficientRepr::Samples {
            xs: vec![0.0, 1.0],
            values: vec![1.0, 3.0],
        })
        .unwrap();
        assert_eq!(q.eval(0.5), 2.0);
        let eq = Equation::linear(q);
        assert!(matches!(
            system_derivative(&eq, &SystemState::new(1.5, 0.0, 0.0, 0.0)),
            Err(Error::DomainExceeded { .. })
        ));
    }

    #[test]
    fn split_examples() {
        let (p, m) = q_split(&Coefficient::constant(-5.0));
        assert_eq!((p.eval(0.3), m.eval(0.3)), (0.0, 5.0));
        let sin = Coefficient::new(CoefficientRepr::TrigPoly {
            offset: 0.0,
            terms: vec![TrigTerm { freq: 1.0, cos: 0.0, sin: 1.0 }],
        })
        .unwrap();
        let (p, m) = q_split(&sin);
        assert_eq!(p.eval(1.5 * PI), 0.0);
        assert!((m.eval(1.5 * PI) - 1.0).abs() < 1e-15);
        let int = integrate_simpson(|x| p.eval(x), 0.0, 2.0 * PI, 512).unwrap();
        assert!((int.value - 2.0).abs() < 1e-6, "{}", int.value);
    }

    #[test]
    fn nonlinearity_hypotheses() {
        assert!(Nonlinearity::signed_power(3.0).is_ok());
        let cubic_plus = Nonlinearity::new(
            NonlinearityRepr::Custom(Expr::parse("u + u^3").unwrap()),
            None,
        );
        assert!(cubic_plus.is_ok());
        // even function violates the sign condition for s < 0
        let even = Nonlinearity::new(NonlinearityRepr::Custom(Expr::parse("u^2").unwrap()), None);
        assert!(matches!(even, Err(Error::OutOfHypothesis(_))));
        let bad_sw = Nonlinearity::new(
            NonlinearityRepr::SignedPower(3.0),
            Some(Sandwich { c1: 1.0, c2: 2.0, p: 1.0 }),
        );
        assert!(matches!(bad_sw, Err(Error::OutOfHypothesis(_))));
    }

    #[test]
    fn polynomial_horner() {
        let q = Coefficient::new(CoefficientRepr::Polynomial(vec![1.0, -2.0, 3.0])).unwrap();
        assert_eq!(q.eval(2.0), 1.0 - 4.0 + 12.0);
    }
}
