//! Shooting solver, inequality checks and oscillation diagnostics for
//! `(psi2((psi1(u'))'))' + q(x) f(u) = 0`.

// `!(a < b)` is used on purpose so NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bvp;
pub mod cli;
pub mod equation;
pub mod error;
pub mod expr;
pub mod lyapunov;
pub mod oscillation;
pub mod psi;
pub mod report;
pub mod scenario;
pub mod search;

pub use bvp::{solve_bc1, solve_bc2, Bc1Config, Bc2Config, SolutionBC1, SolutionBC2};
pub use equation::{Coefficient, Equation, IvpConfig, Nonlinearity, Trajectory};
pub use error::{Error, Result};
pub use lyapunov::{threshold, threshold_power, InequalityKind, InequalityReport, Verdict};
pub use psi::{power_psi, PsiFunction};
pub use scenario::Scenario;
