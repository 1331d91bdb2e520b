//! Closed-form oracle for `u''' + lambda u = 0`, independent of the solver.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Real basis `e^{-kx}`, `e^{ax} cos(bx)`, `e^{ax} sin(bx)` with
/// `k = lambda^(1/3)`, `a = k/2`, `b = sqrt(3) k/2`.
#[derive(Debug, Clone, Copy)]
pub struct LinearBasis {
    pub k: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl LinearBasis {
    pub fn new(lambda: f64) -> Self {
        let k = lambda.cbrt();
        LinearBasis {
            k,
            alpha: 0.5 * k,
            beta: 0.5 * 3f64.sqrt() * k,
        }
    }

    /// Basis values and their first two derivatives at `x`.
    pub fn jet(&self, x: f64) -> [[f64; 3]; 3] {
        let LinearBasis { k, alpha: a, beta: b } = *self;
        let e = (-k * x).exp();
        let g = (a * x).exp();
        let (s, c) = (b * x).sin_cos();
        [
            [e, g * c, g * s],
            [-k * e, g * (a * c - b * s), g * (a * s + b * c)],
            [k * k * e, g * ((a * a - b * b) * c - 2.0 * a * b * s), g * ((a * a - b * b) * s + 2.0 * a * b * c)],
        ]
    }
}

pub fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Cramer's rule for `m c = rhs`.
pub fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> [f64; 3] {
    let d = det3(m);
    let mut out = [0.0; 3];
    for (j, o) in out.iter_mut().enumerate() {
        let mut mj = m;
        for i in 0..3 {
            mj[i][j] = rhs[i];
        }
        *o = det3(mj) / d;
    }
    out
}

/// Exact `u(x)` with `u(0) = 0`, `u'(0) = slope`, `u''(0) = curvature`.
pub fn linear_u(lambda: f64, slope: f64, curvature: f64, x: f64) -> f64 {
    let basis = LinearBasis::new(lambda);
    let c = solve3(basis.jet(0.0), [0.0, slope, curvature]);
    let v = basis.jet(x)[0];
    c[0] * v[0] + c[1] * v[1] + c[2] * v[2]
}

/// Determinant of `u(0) = u''(0) = u(L) = 0` on the real basis.
pub fn bc1_determinant(lambda: f64, length: f64) -> f64 {
    let basis = LinearBasis::new(lambda);
    let j0 = basis.jet(0.0);
    let jl = basis.jet(length);
    det3([j0[0], j0[2], jl[0]])
}

/// First root above `from` of [`bc1_determinant`] on `[0, 1]`, by scan and bisection.
pub fn lambda_star_det(from: f64) -> f64 {
    let step = 0.05;
    let mut lo = from;
    let mut flo = bc1_determinant(lo, 1.0);
    loop {
        let hi = lo + step;
        let fhi = bc1_determinant(hi, 1.0);
        if flo.signum() != fhi.signum() {
            let (mut l, mut h) = (lo, hi);
            for _ in 0..200 {
                let m = 0.5 * (l + h);
                if m <= l || m >= h {
                    break;
                }
                if bc1_determinant(m, 1.0).signum() == flo.signum() {
                    l = m;
                } else {
                    h = m;
                }
            }
            return 0.5 * (l + h);
        }
        lo = hi;
        flo = fhi;
        assert!(lo < 1e4, "no determinant root found");
    }
}

/// Asymptotic zero spacing `2 pi / (sqrt(3) lambda^(1/3))`.
pub fn zero_spacing(lambda: f64) -> f64 {
    2.0 * PI / (3f64.sqrt() * lambda.cbrt())
}

pub fn scenario_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}
