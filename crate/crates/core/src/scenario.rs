//! TOML scenario files, the defaults table and the hypothesis gate.
//!
//! | key                       | default |
//! |---------------------------|---------|
//! | `tolerances.tol`          | 1e-9    |
//! | `tolerances.h_min`        | 1e-12   |
//! | `tolerances.max_steps`    | 5000000 |
//! | `bc1.slope`               | 1       |
//! | `bc1.sweep_k_lo/hi`       | -10, 20 |
//! | `bc2.slope`               | 1       |
//! | `bc2.curvature`           | 0       |
//! | `bc2.horizon`             | 10      |
//! | `verify.scan_n`           | 257     |
//! | `verify.problem`          | bc1     |
//! | `oscillation.x0`          | 0       |
//! | `oscillation.slope`       | 1       |
//! | `oscillation.curvature`   | 0       |
//! | `oscillation.horizon`     | 20      |
//! | `oscillation.sigma`       | 2       |
//! | `oscillation.window`      | 10 x mean gap |
//! | `zero_count.slope`        | 1       |
//! | `zero_count.curvature`    | 0       |
//!
//! `psi1`, `psi2` and `f` default to the identity / `f(u) = u`;
//! `interval` defaults to `[0, 1]`.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bvp::{Bc1Config, Bc2Config};
use crate::equation::{CoefficientSpec, Equation, IvpConfig, NonlinearityKind, NonlinearitySpec, TrigTerm};
use crate::error::{Error, Result};
use crate::lyapunov::DEFAULT_SCAN_N;
use crate::oscillation::{OscillationParams, DEFAULT_SIGMA};
use crate::psi::{
    check_increasing, check_odd, check_reciprocal_convex, check_submultiplicative, check_supermultiplicative,
    PropertyGrid, PsiFunction, PsiPropertyReport, PsiSpec,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "identity_psi")]
    pub psi1: PsiSpec,
    #[serde(default = "identity_psi")]
    pub psi2: PsiSpec,
    #[serde(default = "linear_f")]
    pub f: NonlinearitySpec,
    pub q: CoefficientSpec,
    #[serde(default)]
    pub interval: Interval,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub bc1: Bc1Section,
    #[serde(default)]
    pub bc2: Bc2Section,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub oscillation: OscillationSection,
    #[serde(default)]
    pub zero_count: ZeroCountSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

fn identity_psi() -> PsiSpec {
    PsiSpec::Power { alpha: 1.0 }
}

fn linear_f() -> NonlinearitySpec {
    NonlinearitySpec {
        kind: NonlinearityKind::Power { p: 1.0 },
        sandwich: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Default for Interval {
    fn default() -> Self {
        Interval { a: 0.0, b: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub tol: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        let c = IvpConfig::default();
        Tolerances {
            tol: c.tol,
            h_min: c.h_min,
            max_steps: c.max_steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bc1Section {
    pub slope: f64,
    pub sweep_k_lo: i32,
    pub sweep_k_hi: i32,
}

impl Default for Bc1Section {
    fn default() -> Self {
        let c = Bc1Config::default();
        Bc1Section {
            slope: c.slope,
            sweep_k_lo: c.sweep_k.0,
            sweep_k_hi: c.sweep_k.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bc2Section {
    pub slope: f64,
    pub curvature: f64,
    pub horizon: f64,
}

impl Default for Bc2Section {
    fn default() -> Self {
        let c = Bc2Config::default();
        Bc2Section {
            slope: c.slope,
            curvature: c.curvature,
            horizon: c.horizon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub scan_n: usize,
    pub problem: Problem,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            scan_n: DEFAULT_SCAN_N,
            problem: Problem::Bc1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillationSection {
    pub x0: f64,
    pub slope: f64,
    pub curvature: f64,
    pub horizon: f64,
    pub sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
}

impl Default for OscillationSection {
    fn default() -> Self {
        OscillationSection {
            x0: 0.0,
            slope: 1.0,
            curvature: 0.0,
            horizon: 20.0,
            sigma: DEFAULT_SIGMA,
            window: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZeroCountSection {
    pub slope: f64,
    pub curvature: f64,
}

impl Default for ZeroCountSection {
    fn default() -> Self {
        ZeroCountSection {
            slope: 1.0,
            curvature: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    #[default]
    Bc1,
    Bc2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepSection {
    /// `q` multiplied by `steps` equally spaced factors in `[from, to]`.
    QScale {
        from: f64,
        to: f64,
        steps: usize,
        #[serde(default)]
        problem: Problem,
    },
    /// Random trigonometric `q` that change sign on the interval.
    RandomTrig {
        count: usize,
        #[serde(default = "default_terms")]
        terms: usize,
        #[serde(default = "default_offset")]
        offset: [f64; 2],
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        problem: Problem,
    },
}

fn default_terms() -> usize {
    3
}

fn default_offset() -> [f64; 2] {
    [20.0, 120.0]
}

fn default_amplitude() -> f64 {
    60.0
}

/// Draws a trig polynomial `offset + sum c_j cos(2 pi j x / L) + s_j sin(...)`
/// that is negative somewhere and positive somewhere on `[a, b]`.
pub fn random_trig_q<R: Rng>(rng: &mut R, a: f64, b: f64, terms: usize, offset: [f64; 2], amplitude: f64) -> CoefficientSpec {
    let omega = 2.0 * std::f64::consts::PI / (b - a);
    loop {
        let off = rng.random_range(offset[0]..=offset[1]);
        let ts: Vec<TrigTerm> = (1..=terms.max(1))
            .map(|j| TrigTerm {
                freq: omega * j as f64,
                cos: rng.random_range(-amplitude..=amplitude),
                sin: rng.random_range(-amplitude..=amplitude),
            })
            .collect();
        let spec = CoefficientSpec::Trig { offset: off, terms: ts };
        let q = spec.build().expect("trig coefficients always build");
        let vals: Vec<f64> = (0..=256).map(|i| q.eval(a + (b - a) * i as f64 / 256.0)).collect();
        if vals.iter().any(|&v| v < 0.0) && vals.iter().any(|&v| v > 0.0) {
            return spec;
        }
    }
}

impl SweepSection {
    pub fn problem(&self) -> Problem {
        match self {
            SweepSection::QScale { problem, .. } | SweepSection::RandomTrig { problem, .. } => *problem,
        }
    }

    /// The swept coefficients with a parameter label, in sweep order.
    /// `seed_override` replaces the configured seed.
    pub fn instances(&self, base: &CoefficientSpec, interval: Interval, seed_override: Option<u64>) -> Result<Vec<(f64, CoefficientSpec)>> {
        match self {
            SweepSection::QScale { from, to, steps, .. } => {
                if *steps == 0 {
                    return Err(Error::Config("sweep.steps must be positive".into()));
                }
                let base = base.build()?;
                Ok((0..*steps)
                    .map(|i| {
                        let k = if *steps == 1 {
                            *from
                        } else {
                            from + (to - from) * i as f64 / (*steps - 1) as f64
                        };
                        (k, ScaledSpec(k, base.clone()).into_spec())
                    })
                    .collect())
            }
            SweepSection::RandomTrig {
                count,
                terms,
                offset,
                amplitude,
                seed,
                ..
            } => {
                if !(offset[0] <= offset[1]) || !(*amplitude >= 0.0) {
                    return Err(Error::Config("sweep.offset must be ordered and amplitude nonnegative".into()));
                }
                // |sum of terms| <= sqrt(2) * terms * amplitude; beyond that no draw changes sign
                if offset[0] >= std::f64::consts::SQRT_2 * (*terms).max(1) as f64 * amplitude {
                    return Err(Error::Config("sweep.offset too large for q to change sign".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed_override.unwrap_or(*seed));
                Ok((0..*count)
                    .map(|i| (i as f64, random_trig_q(&mut rng, interval.a, interval.b, *terms, *offset, *amplitude)))
                    .collect())
            }
        }
    }
}

/// Scaling re-expressed as a spec where the representation allows it.
struct ScaledSpec(f64, crate::equation::Coefficient);

impl ScaledSpec {
    fn into_spec(self) -> CoefficientSpec {
        use crate::equation::CoefficientRepr as R;
        let k = self.0;
        match &self.1.repr {
            R::Constant(c) => CoefficientSpec::Constant { value: k * c },
            R::Polynomial(cs) => CoefficientSpec::Polynomial {
                coeffs: cs.iter().map(|c| k * c).collect(),
            },
            R::TrigPoly { offset, terms } => CoefficientSpec::Trig {
                offset: k * offset,
                terms: terms
                    .iter()
                    .map(|t| TrigTerm {
                        freq: t.freq,
                        cos: k * t.cos,
                        sin: k * t.sin,
                    })
                    .collect(),
            },
            R::Samples { xs, values } => CoefficientSpec::Samples {
                xs: xs.clone(),
                values: values.iter().map(|v| k * v).collect(),
            },
            R::Expression(e) => CoefficientSpec::Expr {
                expr: format!("({k:e})*({})", e.source()),
            },
            _ => unreachable!("specs never build wrapper representations"),
        }
    }
}

/// One line of the hypothesis gate.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    /// `H1` .. `H5`
    pub id: &'static str,
    pub subject: &'static str,
    pub property: String,
    pub holds: bool,
    pub worst_magnitude: Option<f64>,
    pub detail: String,
}

impl HypothesisCheck {
    fn from_psi(id: &'static str, subject: &'static str, r: Result<PsiPropertyReport>) -> Self {
        match r {
            Ok(r) => HypothesisCheck {
                id,
                subject,
                property: r.property.name().into(),
                holds: r.holds,
                worst_magnitude: r.worst_violation.as_ref().map(|v| v.magnitude),
                detail: match &r.worst_violation {
                    Some(v) => format!("witness {:?} on {}", v.inputs, r.grid_spec),
                    None => r.grid_spec,
                },
            },
            Err(e) => HypothesisCheck {
                id,
                subject,
                property: "evaluation".into(),
                holds: false,
                worst_magnitude: None,
                detail: e.to_string(),
            },
        }
    }
}

impl Scenario {
    pub fn from_toml(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)?;
        Self::from_toml(&src)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario fields are TOML-representable")
    }

    pub fn ivp(&self) -> IvpConfig {
        IvpConfig {
            tol: self.tolerances.tol,
            h_min: self.tolerances.h_min,
            max_steps: self.tolerances.max_steps,
            ..IvpConfig::default()
        }
    }

    pub fn bc1_config(&self) -> Bc1Config {
        Bc1Config {
            slope: self.bc1.slope,
            ivp: self.ivp(),
            sweep_k: (self.bc1.sweep_k_lo, self.bc1.sweep_k_hi),
        }
    }

    pub fn bc2_config(&self) -> Bc2Config {
        Bc2Config {
            slope: self.bc2.slope,
            curvature: self.bc2.curvature,
            horizon: self.bc2.horizon,
            ivp: self.ivp(),
        }
    }

    pub fn oscillation_params(&self) -> OscillationParams {
        let o = self.oscillation;
        OscillationParams {
            x0: o.x0,
            slope: o.slope,
            curvature: o.curvature,
            horizon: o.horizon,
            sigma: o.sigma,
            window: o.window,
        }
    }

    fn validate(&self) -> Result<()> {
        let t = self.tolerances;
        if !(t.tol > 0.0) || !(t.h_min > 0.0) || t.max_steps == 0 {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !(self.interval.a < self.interval.b) {
            return Err(Error::DegenerateInterval {
                a: self.interval.a,
                b: self.interval.b,
            });
        }
        if self.bc1.sweep_k_lo > self.bc1.sweep_k_hi {
            return Err(Error::Config("bc1.sweep_k_lo exceeds bc1.sweep_k_hi".into()));
        }
        if self.verify.scan_n < 3 {
            return Err(Error::Config("verify.scan_n must be at least 3".into()));
        }
        if !(self.oscillation.sigma > 1.0) {
            return Err(Error::Config("oscillation.sigma must exceed 1".into()));
        }
        Ok(())
    }

    /// Builds the equation without running the gate.
    pub fn equation(&self) -> Result<Equation> {
        self.validate()?;
        Ok(Equation::new(
            PsiFunction::from_spec(&self.psi1)?,
            PsiFunction::from_spec(&self.psi2)?,
            self.q.build()?,
            self.f.build()?,
        ))
    }

    /// Every hypothesis check, including those of parts that fail to build.
    pub fn hypothesis_checks(&self) -> Vec<HypothesisCheck> {
        let grid = PropertyGrid::default();
        let mut out = Vec::new();
        let psis = [
            ("psi1", PsiFunction::from_spec(&self.psi1)),
            ("psi2", PsiFunction::from_spec(&self.psi2)),
        ];
        for (name, psi) in &psis {
            match psi {
                Ok(p) => {
                    out.push(HypothesisCheck::from_psi("H1", name, check_odd(p, &grid)));
                    out.push(HypothesisCheck::from_psi("H1", name, check_increasing(p, &grid)));
                }
                Err(e) => out.push(build_failure("H1", name, e)),
            }
        }
        if let Ok(p1) = &psis[0].1 {
            out.push(HypothesisCheck::from_psi("H2", "psi1", check_submultiplicative(p1, &grid)));
            out.push(HypothesisCheck::from_psi("H2", "psi1", check_reciprocal_convex(p1, &grid)));
        }
        if let Ok(p2) = &psis[1].1 {
            out.push(HypothesisCheck::from_psi("H3", "psi2", check_supermultiplicative(p2, &grid)));
        }
        out.push(self.check_q());
        out.push(match self.f.build() {
            Ok(_) => HypothesisCheck {
                id: "H5",
                subject: "f",
                property: "odd, s f(s) > 0".into(),
                holds: true,
                worst_magnitude: None,
                detail: "checked on construction grid".into(),
            },
            Err(e) => build_failure("H5", "f", &e),
        });
        out
    }

    fn check_q(&self) -> HypothesisCheck {
        const SUBJECT: &str = "q";
        let (a, b) = (self.interval.a, self.interval.b);
        let q = match self.q.build() {
            Ok(q) => q,
            Err(e) => return build_failure("H4", SUBJECT, &e),
        };
        if let Err(e) = q.check_domain(a).and_then(|_| q.check_domain(b)) {
            return build_failure("H4", SUBJECT, &e);
        }
        let n = 1024;
        let bad = (0..=n)
            .map(|i| a + (b - a) * i as f64 / n as f64)
            .find(|&x| !q.eval(x).is_finite());
        HypothesisCheck {
            id: "H4",
            subject: SUBJECT,
            property: "finite on [a, b]".into(),
            holds: bad.is_none(),
            worst_magnitude: None,
            detail: match bad {
                Some(x) => format!("non-finite at x = {x}"),
                None => format!("{} points on [{a}, {b}]", n + 1),
            },
        }
    }

    /// The equation, provided every hypothesis check passes.
    pub fn gated_equation(&self) -> Result<Equation> {
        self.validate()?;
        let failed: Vec<String> = self
            .hypothesis_checks()
            .into_iter()
            .filter(|c| !c.holds)
            .map(|c| format!("{} {} {}: {}", c.id, c.subject, c.property, c.detail))
            .collect();
        if !failed.is_empty() {
            return Err(Error::OutOfHypothesis(failed.join("; ")));
        }
        self.equation()
    }
}

fn build_failure(id: &'static str, subject: &'static str, e: &Error) -> HypothesisCheck {
    HypothesisCheck {
        id,
        subject,
        property: "construction".into(),
        holds: false,
        worst_magnitude: None,
        detail: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[q]
kind = "constant"
value = 30.0
"#;

    #[test]
    fn defaults_fill_in() {
        let s = Scenario::from_toml(MINIMAL).unwrap();
        assert_eq!(s.verify.scan_n, 257);
        assert_eq!(s.oscillation.sigma, 2.0);
        assert_eq!(s.interval, Interval { a: 0.0, b: 1.0 });
        assert_eq!(s.ivp(), IvpConfig::default());
        assert!(s.gated_equation().is_ok());
    }

    #[test]
    fn round_trip() {
        let src = r#"
[psi1]
kind = "power"
alpha = 2.0
[psi2]
kind = "custom"
expr = "s*(1+abs(s))"
[f]
kind = "power"
p = 3.0
[f.sandwich]
c1 = 1.0
c2 = 1.0
p = 3.0
[q]
kind = "trig"
offset = 1.5
terms = [{ freq = 6.283185307179586, cos = 2.0, sin = -1.0 }]
[interval]
a = 0.0
b = 2.0
[oscillation]
window = 4.0
[sweep]
mode = "random_trig"
count = 7
seed = 11
problem = "bc2"
"#;
        let s = Scenario::from_toml(src).unwrap();
        let again = Scenario::from_toml(&s.to_toml()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = format!("{MINIMAL}\n[verify]\nscan = 3\n");
        assert!(matches!(Scenario::from_toml(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn gate_reports_failures() {
        let src = r#"
[psi1]
kind = "custom"
expr = "s/(1+abs(s))"
[q]
kind = "constant"
value = 1.0
"#;
        let s = Scenario::from_toml(src).unwrap();
        let checks = s.hypothesis_checks();
        assert!(checks.iter().any(|c| c.id == "H2" && !c.holds));
        assert!(matches!(s.gated_equation(), Err(Error::OutOfHypothesis(_))));
    }

    #[test]
    fn random_trig_changes_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let q = random_trig_q(&mut rng, 0.0, 1.0, 3, [20.0, 120.0], 60.0).build().unwrap();
            let v: Vec<f64> = (0..=256).map(|i| q.eval(i as f64 / 256.0)).collect();
            assert!(v.iter().any(|&x| x < 0.0) && v.iter().any(|&x| x > 0.0));
        }
    }

    #[test]
    fn q_scale_instances() {
        let s = Scenario::from_toml(MINIMAL).unwrap();
        let sw = SweepSection::QScale {
            from: 1.0,
            to: 2.0,
            steps: 3,
            problem: Problem::Bc1,
        };
        let inst = sw.instances(&s.q, s.interval, None).unwrap();
        assert_eq!(inst.len(), 3);
        assert_eq!(inst[1].1, CoefficientSpec::Constant { value: 45.0 });
    }
}
