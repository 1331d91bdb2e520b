//! Composite quadrature with Richardson error estimates.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Closed Simpson per panel.
    Simpson,
    /// Two-point Gauss–Legendre per panel; never evaluates panel ends, so
    /// integrands singular at the interval ends are admissible.
    Gauss2,
}

#[derive(Debug, Clone, Copy)]
pub enum QuadGrid<'a> {
    /// `n` equal panels.
    Uniform(usize),
    /// Breakpoints (typically trajectory nodes), refined so that no panel is
    /// longer than `(r - l) / min_panels`.
    Nodes { xs: &'a [f64], min_panels: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Richardson estimate plus a rounding floor.
    pub error: f64,
}

impl std::ops::Add for Quadrature {
    type Output = Quadrature;
    fn add(self, rhs: Quadrature) -> Quadrature {
        Quadrature {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // 1/(2 sqrt 3)

#[inline]
fn panel<W: Fn(f64) -> f64>(w: &W, lo: f64, hi: f64, rule: Rule) -> (f64, f64) {
    let h = hi - lo;
    let mid = 0.5 * (lo + hi);
    match rule {
        Rule::Simpson => {
            let (a, m, b) = (w(lo), w(mid), w(hi));
            (h / 6.0 * (a + 4.0 * m + b), h / 6.0 * (a.abs() + 4.0 * m.abs() + b.abs()))
        }
        Rule::Gauss2 => {
            let (a, b) = (w(mid - GAUSS_OFFSET * h), w(mid + GAUSS_OFFSET * h));
            (0.5 * h * (a + b), 0.5 * h * (a.abs() + b.abs()))
        }
    }
}

/// One panel with its own Richardson correction (panel vs. two halves).
pub(crate) fn panel_quadrature<W: Fn(f64) -> f64>(w: &W, lo: f64, hi: f64, rule: Rule) -> Quadrature {
    let mid = 0.5 * (lo + hi);
    let coarse = panel(w, lo, hi, rule).0;
    let (l, la) = panel(w, lo, mid, rule);
    let (r, ra) = panel(w, mid, hi, rule);
    let richardson = (l + r - coarse) / 15.0;
    Quadrature {
        value: l + r + richardson,
        error: richardson.abs() + 32.0 * f64::EPSILON * (la + ra),
    }
}

fn accumulate<W: Fn(f64) -> f64>(w: &W, breaks: &[f64], rule: Rule) -> Quadrature {
    let mut coarse = 0.0;
    let mut fine = 0.0;
    let mut abs_mass = 0.0;
    for p in breaks.windows(2) {
        let (lo, hi) = (p[0], p[1]);
        let mid = 0.5 * (lo + hi);
        coarse += panel(w, lo, hi, rule).0;
        let (l, la) = panel(w, lo, mid, rule);
        let (r, ra) = panel(w, mid, hi, rule);
        fine += l + r;
        abs_mass += la + ra;
    }
    let richardson = (fine - coarse) / 15.0;
    Quadrature {
        value: fine + richardson,
        error: richardson.abs() + 32.0 * f64::EPSILON * abs_mass,
    }
}

/// `∫_l^r w(x) dx` over the given grid.
pub fn integrate_weighted<W: Fn(f64) -> f64>(w: W, l: f64, r: f64, grid: QuadGrid<'_>, rule: Rule) -> Result<Quadrature> {
    if !(l < r) {
        if l == r {
            return Ok(Quadrature { value: 0.0, error: 0.0 });
        }
        return Err(Error::IntervalEmpty { l, r });
    }
    let breaks = match grid {
        QuadGrid::Uniform(n) => {
            if n < 1 {
                return Err(Error::IntervalEmpty { l, r });
            }
            let h = (r - l) / n as f64;
            let mut b: Vec<f64> = (0..n).map(|i| l + h * i as f64).collect();
            b.push(r);
            b
        }
        QuadGrid::Nodes { xs, min_panels } => {
            let max_len = (r - l) / min_panels.max(1) as f64;
            let mut b = vec![l];
            let inner = xs.iter().copied().filter(|&x| x > l && x < r);
            for x in inner.chain(std::iter::once(r)) {
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
    };
    Ok(accumulate(&w, &breaks, rule))
}

/// Uniform composite Simpson with `n` panels.
pub fn integrate_simpson<W: Fn(f64) -> f64>(w: W, l: f64, r: f64, n: usize) -> Result<Quadrature> {
    integrate_weighted(w, l, r, QuadGrid::Uniform(n), Rule::Simpson)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_examples() {
        let q = integrate_simpson(|_| 1.0, 0.0, 3.0, 4).unwrap();
        assert!((q.value - 3.0).abs() < 1e-15);
        let q = integrate_simpson(|x| x * x, 0.0, 1.0, 2).unwrap();
        assert!((q.value - 1.0 / 3.0).abs() < 1e-15);
        let q = integrate_simpson(|x| (1.0 + x).powi(-2), 0.0, 1.0, 128).unwrap();
        assert!((q.value - 0.5).abs() < 1e-8);
        assert!(q.error < 1e-8);
    }

    #[test]
    fn open_rule_skips_endpoints() {
        // 1/sqrt(x) is infinite at 0; Gauss2 never evaluates there
        let q = integrate_weighted(|x| x.sqrt().recip(), 0.0, 1.0, QuadGrid::Uniform(64), Rule::Gauss2).unwrap();
        assert!(q.value.is_finite());
        assert!((q.value - 2.0).abs() < 0.1);
    }

    #[test]
    fn node_grid_refines() {
        let xs = [0.0, 0.5, 1.0];
        let q = integrate_weighted(
            |x: f64| x.sin(),
            0.0,
            1.0,
            QuadGrid::Nodes { xs: &xs, min_panels: 64 },
            Rule::Simpson,
        )
        .unwrap();
        assert!((q.value - (1.0 - 1f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn reversed_interval_is_error() {
        assert!(matches!(
            integrate_simpson(|x| x, 1.0, 0.0, 8),
            Err(Error::IntervalEmpty { .. })
        ));
        assert_eq!(integrate_simpson(|x| x, 1.0, 1.0, 8).unwrap().value, 0.0);
    }
}
