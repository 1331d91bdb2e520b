//! Zero sequences of long trajectories, gap series `t_{k+2} - t_k`,
//! windowed `|q|^sigma` norms and the Hölder step behind the zero-gap bound.

use rayon::prelude::*;

use crate::bvp::shoot;
use crate::equation::{integrate_simpson, integrate_weighted, Component, Equation, IvpConfig, QuadGrid, Rule, Trajectory};
use crate::error::{Error, Result};
use crate::lyapunov::{threshold, weighted_integral, Part, PhiAlong};
use crate::search::theil_sen_slope;

pub const DEFAULT_SIGMA: f64 = 2.0;
/// Default window is this multiple of the mean gap.
pub const DEFAULT_WINDOW_FACTOR: f64 = 10.0;

const WINDOW_PANELS: usize = 512;
const HOLDER_PANELS: usize = 256;

/// Zeros of `u` on `[x0, horizon]` for the trajectory started at `x0`
/// with `u(x0) = 0`; `x0` itself is the first entry.
pub fn zero_sequence(
    eq: &Equation,
    x0: f64,
    slope: f64,
    curvature: f64,
    horizon: f64,
    cfg: &IvpConfig,
) -> Result<(Vec<f64>, Trajectory)> {
    if !(horizon > x0) {
        return Err(Error::IntervalEmpty { l: x0, r: horizon });
    }
    let traj = shoot(eq, x0, slope, curvature, horizon, cfg)?;
    Ok((zeros_of(&traj), traj))
}

pub fn zeros_of(traj: &Trajectory) -> Vec<f64> {
    let x0 = traj.x_start();
    let mut zs = vec![x0];
    zs.extend(traj.events_of(Component::V1).filter(|&z| z > x0));
    zs
}

/// `t_{k+2} - t_k` for every valid `k`.
pub fn gap_series(zeros: &[f64]) -> Result<Vec<f64>> {
    if zeros.len() < 3 {
        return Err(Error::TooFewZeros {
            found: zeros.len(),
            needed: 3,
        });
    }
    Ok(zeros.windows(3).map(|w| w[2] - w[0]).collect())
}

/// `∫_t^{t+M} |q|^sigma`.
pub fn window_norm(eq: &Equation, t: f64, m: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 1.0) {
        return Err(Error::Config(format!("sigma must exceed 1, got {sigma}")));
    }
    if !(m > 0.0) {
        return Err(Error::Config(format!("window must be positive, got {m}")));
    }
    eq.q.check_domain(t)?;
    eq.q.check_domain(t + m)?;
    Ok(integrate_simpson(|x| eq.q.eval(x).abs().powf(sigma), t, t + m, WINDOW_PANELS)?.value)
}

/// Both sides of the Hölder estimate on one triple of consecutive zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderRecord {
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
    pub sigma: f64,
    pub threshold: f64,
    /// `∫ |q| Phi(u)`
    pub lhs: f64,
    /// `(∫ |q|^sigma)^(1/sigma)`
    pub q_factor: f64,
    /// `(∫ |Phi|^(sigma/(sigma-1)))^((sigma-1)/sigma)`
    pub phi_factor: f64,
    pub rhs: f64,
    pub quadrature_error: f64,
}

impl HolderRecord {
    pub fn dominated(&self) -> bool {
        self.lhs <= self.rhs + self.quadrature_error
    }
}

pub fn holder_gap_check(triple: (f64, f64, f64), eq: &Equation, sigma: f64, traj: &Trajectory) -> Result<HolderRecord> {
    let (t0, t1, t2) = triple;
    if !(t0 < t1 && t1 < t2) {
        return Err(Error::TooFewZeros { found: 0, needed: 3 });
    }
    if !(sigma > 1.0) {
        return Err(Error::Config(format!("sigma must exceed 1, got {sigma}")));
    }
    let nodes = traj.node_xs();
    let grid = QuadGrid::Nodes {
        xs: &nodes,
        min_panels: HOLDER_PANELS,
    };
    let thr = threshold(t0, t2, &eq.psi1, &eq.psi2)?;
    let lhs = weighted_integral(eq, traj, Part::Abs, t0, t2)?;
    let qn = integrate_weighted(|x| eq.q.eval(x).abs().powf(sigma), t0, t2, grid, Rule::Gauss2)?;
    let conj = sigma / (sigma - 1.0);
    let phi = PhiAlong::new(eq, traj)?;
    let pn = integrate_weighted(|x| phi.at(x).abs().powf(conj), t0, t2, grid, Rule::Gauss2)?;
    phi.check()?;
    let q_factor = qn.value.powf(1.0 / sigma);
    let phi_factor = pn.value.powf(1.0 / conj);
    // first-order propagation of the two quadrature errors through the powers
    let dq = if qn.value > 0.0 { q_factor * qn.error / (sigma * qn.value) } else { 0.0 };
    let dp = if pn.value > 0.0 { phi_factor * pn.error / (conj * pn.value) } else { 0.0 };
    Ok(HolderRecord {
        t0,
        t1,
        t2,
        sigma,
        threshold: thr,
        lhs: lhs.value,
        q_factor,
        phi_factor,
        rhs: q_factor * phi_factor,
        quadrature_error: lhs.error + dq * phi_factor + dp * q_factor,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapTrend {
    pub mean_gap: f64,
    pub min_gap: f64,
    pub max_gap: f64,
    /// Theil–Sen slope of the gaps against their index.
    pub slope: Option<f64>,
    pub consistent_with_divergence: bool,
}

/// Finite-horizon contrapositive of the zero-gap bound: a triple of span at
/// most `M` starting at `t` needs `∫_t^{t+M}|q|^sigma` above `required`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowCheck {
    pub t: f64,
    pub norm: f64,
    pub required: f64,
    /// The window is too weak to carry a short triple.
    pub decayed: bool,
    /// `t_{k+2} - t_k <= M` for the triple starting at `t`, if one exists.
    pub short_triple: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroGapReport {
    pub x0: f64,
    pub horizon: f64,
    pub zeros: Vec<f64>,
    pub gaps: Vec<f64>,
    pub window_norms: Vec<(f64, f64)>,
    pub sigma: f64,
    pub window: f64,
    pub trend: GapTrend,
    pub windows: Vec<WindowCheck>,
    pub holder: Vec<HolderRecord>,
}

impl ZeroGapReport {
    /// Windows that decayed yet hold a short triple; must be empty.
    pub fn contradictions(&self) -> Vec<&WindowCheck> {
        self.windows.iter().filter(|w| w.decayed && w.short_triple).collect()
    }

    pub fn decayed_windows(&self) -> usize {
        self.windows.iter().filter(|w| w.decayed).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationParams {
    pub x0: f64,
    pub slope: f64,
    pub curvature: f64,
    pub horizon: f64,
    pub sigma: f64,
    /// `None` selects `DEFAULT_WINDOW_FACTOR` times the mean gap.
    pub window: Option<f64>,
}

pub fn analyze(eq: &Equation, p: &OscillationParams, cfg: &IvpConfig) -> Result<ZeroGapReport> {
    let (zeros, traj) = zero_sequence(eq, p.x0, p.slope, p.curvature, p.horizon, cfg)?;
    let gaps = gap_series(&zeros)?;
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let m = p.window.unwrap_or(DEFAULT_WINDOW_FACTOR * mean_gap);
    let sigma = p.sigma;
    if !(m > 0.0) {
        return Err(Error::Config(format!("window must be positive, got {m}")));
    }

    let starts: Vec<usize> = (0..zeros.len()).filter(|&k| zeros[k] + m <= p.horizon).collect();
    let windows = starts
        .par_iter()
        .map(|&k| {
            let t = zeros[k];
            let norm = window_norm(eq, t, m, sigma)?;
            let phi = PhiAlong::new(eq, &traj)?;
            let conj = sigma / (sigma - 1.0);
            let nodes = traj.node_xs();
            let grid = QuadGrid::Nodes {
                xs: &nodes,
                min_panels: HOLDER_PANELS,
            };
            let pn = integrate_weighted(|x| phi.at(x).abs().powf(conj), t, t + m, grid, Rule::Gauss2)?;
            phi.check()?;
            // triples inside the window have threshold at least thr(t, t+M)
            let thr = threshold(t, t + m, &eq.psi1, &eq.psi2)?;
            let phi_factor = pn.value.powf(1.0 / conj);
            let required = if phi_factor > 0.0 { (thr / phi_factor).powf(sigma) } else { f64::INFINITY };
            let short_triple = k + 2 < zeros.len() && zeros[k + 2] - t <= m;
            Ok(WindowCheck {
                t,
                norm,
                required,
                decayed: norm < required,
                short_triple,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let window_norms = windows.iter().map(|w| (w.t, w.norm)).collect();

    let holder = (0..zeros.len() - 2)
        .into_par_iter()
        .map(|k| holder_gap_check((zeros[k], zeros[k + 1], zeros[k + 2]), eq, sigma, &traj))
        .collect::<Result<Vec<_>>>()?;

    let slope = theil_sen_slope(&gaps);
    let trend = GapTrend {
        mean_gap,
        min_gap: gaps.iter().copied().fold(f64::INFINITY, f64::min),
        max_gap: gaps.iter().copied().fold(0.0, f64::max),
        slope,
        consistent_with_divergence: slope.is_some_and(|s| s > 0.0),
    };
    Ok(ZeroGapReport {
        x0: p.x0,
        horizon: p.horizon,
        zeros,
        gaps,
        window_norms,
        sigma,
        window: m,
        trend,
        windows,
        holder,
    })
}
