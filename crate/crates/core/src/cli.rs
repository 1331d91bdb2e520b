//! Command dispatch for the `lyap3` binary.
//!
//! Exit codes: 0 success, 1 an inequality failed beyond numerical error,
//! 2 no solution in the searched family, 3 invalid configuration or a
//! failed hypothesis gate, 4 any other runtime failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::bvp::{shoot, solve_bc1, solve_bc2, SolutionBC1, SolutionBC2};
use crate::equation::Equation;
use crate::error::{Error, Result};
use crate::lyapunov::{
    observed_max_feasible, verify_abs_bc1, verify_abs_bc2, verify_bc1, verify_bc2, verify_sup_norm, zero_count_bound,
    InequalityReport, Verdict,
};
use crate::oscillation::analyze;
use crate::report::{emit_report, render, Field, Format, Record, SolutionSummary, ZeroCountRow};
use crate::scenario::{HypothesisCheck, Problem, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_NO_SOLUTION: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LYAP3_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "lyap3", version, about = "Lyapunov-type inequality experiments for third-order quasilinear equations")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for report artifacts; records go to stdout when absent.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Overrides the sweep seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Verb {
    /// Check the operator and nonlinearity hypotheses on sample grids
    CheckHypotheses,
    /// Solve the two-point problem by curvature shooting
    SolveBc1,
    /// Shoot from a and take the next two zeros
    SolveBc2,
    /// Solve, then check the inequalities on the solution
    Verify,
    /// Zero count along a long shot, against its bound
    ZeroCount,
    /// Zero gaps, window norms and Hölder dominance
    Oscillation,
    /// Run the configured sweep in parallel
    Sweep,
}

impl Verb {
    fn name(self) -> &'static str {
        match self {
            Verb::CheckHypotheses => "check-hypotheses",
            Verb::SolveBc1 => "solve-bc1",
            Verb::SolveBc2 => "solve-bc2",
            Verb::Verify => "verify",
            Verb::ZeroCount => "zero-count",
            Verb::Oscillation => "oscillation",
            Verb::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Csv,
    Jsonl,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Csv => Format::Csv,
            FormatArg::Jsonl => Format::Jsonl,
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if matches!(e, Error::InvariantViolation(_)) {
        EXIT_VIOLATION
    } else if e.is_no_solution() {
        EXIT_NO_SOLUTION
    } else if e.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_RUNTIME
    }
}

/// Collects artifacts and the human summary of one command.
struct Sink {
    format: Format,
    out: Option<PathBuf>,
    summary: Vec<String>,
}

impl Sink {
    fn note(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    fn records<R: Record>(&mut self, name: &str, records: &[R]) -> Result<()> {
        match &self.out {
            Some(dir) => {
                let path = dir.join(format!("{name}.{}", self.format.extension()));
                let mut f = fs::File::create(&path)?;
                emit_report(records, self.format, &mut f)?;
                self.note(format!("wrote {}", path.display()));
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                emit_report(records, self.format, &mut stdout)?;
            }
        }
        Ok(())
    }

    fn file(&mut self, name: &str, contents: &str) -> Result<()> {
        if let Some(dir) = &self.out {
            let path = dir.join(name);
            fs::write(&path, contents)?;
            self.note(format!("wrote {}", path.display()));
        }
        Ok(())
    }

    fn flush(&self) {
        let text = self.summary.join("\n");
        if text.is_empty() {
            return;
        }
        if self.out.is_some() {
            println!("{text}");
        } else {
            eprintln!("{text}");
        }
    }
}

/// Parses arguments, runs the verb and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    run(&cli)
}

pub fn run(cli: &Cli) -> i32 {
    let mut sink = Sink {
        format: cli.format.into(),
        out: cli.out.clone(),
        summary: Vec::new(),
    };
    let code = match dispatch(cli, &mut sink) {
        Ok(code) => code,
        Err(e) => {
            let code = exit_code(&e);
            sink.note(format!("error: {e}"));
            code
        }
    };
    sink.flush();
    code
}

fn load(cli: &Cli) -> Result<Scenario> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    Scenario::load(path).map_err(|e| match e {
        Error::Io(io) => Error::Config(format!("{}: {io}", path.display())),
        other => other,
    })
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn dispatch(cli: &Cli, sink: &mut Sink) -> Result<i32> {
    let scenario = load(cli)?;
    if let Some(dir) = &sink.out {
        prepare_out(dir)?;
    }
    sink.file("effective.toml", &scenario.to_toml())?;
    sink.note(format!("{}: {}", cli.verb.name(), cli.config.as_deref().unwrap_or(Path::new("")).display()));
    if cli.verb == Verb::CheckHypotheses {
        return check_hypotheses(&scenario, sink);
    }
    let eq = scenario.gated_equation()?;
    match cli.verb {
        Verb::CheckHypotheses => unreachable!(),
        Verb::SolveBc1 => {
            let sol = solve_bc1(&eq, scenario.interval.a, scenario.interval.b, &scenario.bc1_config())?;
            emit_bc1(&sol, sink)?;
            Ok(EXIT_OK)
        }
        Verb::SolveBc2 => {
            let sol = solve_bc2(&eq, scenario.interval.a, &scenario.bc2_config())?;
            emit_bc2(&sol, sink)?;
            Ok(EXIT_OK)
        }
        Verb::Verify => verify(&scenario, &eq, sink),
        Verb::ZeroCount => zero_count(&scenario, &eq, sink),
        Verb::Oscillation => oscillation(&scenario, &eq, sink),
        Verb::Sweep => sweep(cli, &scenario, sink),
    }
}

impl Record for HypothesisCheck {
    fn header() -> &'static [&'static str] {
        &["hypothesis", "subject", "property", "holds", "worst_magnitude", "detail"]
    }

    fn fields(&self) -> Vec<Field> {
        vec![
            Field::Text(self.id.into()),
            Field::Text(self.subject.into()),
            Field::Text(self.property.clone()),
            Field::Bool(self.holds),
            Field::Opt(self.worst_magnitude),
            Field::Text(self.detail.clone()),
        ]
    }
}

fn check_hypotheses(s: &Scenario, sink: &mut Sink) -> Result<i32> {
    let checks = s.hypothesis_checks();
    let failed = checks.iter().filter(|c| !c.holds).count();
    for c in &checks {
        sink.note(format!(
            "  {} {:<5} {:<22} {}",
            c.id,
            c.subject,
            c.property,
            if c.holds { "pass" } else { "FAIL" }
        ));
    }
    sink.note(format!("{} checks, {failed} failed", checks.len()));
    sink.records("hypotheses", &checks)?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_CONFIG })
}

fn emit_bc1(sol: &SolutionBC1, sink: &mut Sink) -> Result<()> {
    let summary = SolutionSummary {
        a: sol.a,
        b: sol.b,
        c: None,
        xi: Some(sol.xi),
        sign: sol.sign,
        max_u: sol.max_u,
    };
    sink.note(format!(
        "BC1 solution on [{}, {}]: xi = {}, max|u| = {}, {} xi candidate(s)",
        sol.a,
        sol.b,
        sol.xi,
        sol.max_u,
        sol.xi_candidates.len()
    ));
    sink.records("solution", &[summary])?;
    sink.file("trajectory.csv", &sol.trajectory.to_csv())
}

fn emit_bc2(sol: &SolutionBC2, sink: &mut Sink) -> Result<()> {
    let summary = SolutionSummary {
        a: sol.a,
        b: sol.b,
        c: Some(sol.c),
        xi: None,
        sign: sol.sign_ab,
        max_u: sol.max_u,
    };
    sink.note(format!("BC2 solution: zeros {}, {}, {}; max|u| = {}", sol.a, sol.b, sol.c, sol.max_u));
    sink.records("solution", &[summary])?;
    sink.file("trajectory.csv", &sol.trajectory.to_csv())
}

fn note_reports(sink: &mut Sink, reports: &[InequalityReport]) {
    for r in reports {
        sink.note(format!(
            "  {:<12} lhs = {:.6e} threshold = {:.6e} margin = {:+.6e} ({})",
            r.kind.name(),
            r.lhs,
            r.threshold,
            r.margin,
            match r.verdict {
                Verdict::Holds => "holds",
                Verdict::Fails => "FAILS",
                Verdict::Inconclusive => "inconclusive",
            }
        ));
    }
}

fn bc1_reports(s: &Scenario, eq: &Equation) -> Result<(SolutionBC1, Vec<InequalityReport>)> {
    let sol = solve_bc1(eq, s.interval.a, s.interval.b, &s.bc1_config())?;
    let mut reports = vec![verify_bc1(&sol, eq)?, verify_abs_bc1(&sol, eq)?];
    match verify_sup_norm(&sol, eq) {
        Ok(r) => reports.push(r),
        Err(Error::OutOfHypothesis(_) | Error::ExponentNotPositive(_)) => {}
        Err(e) => return Err(e),
    }
    Ok((sol, reports))
}

/// Every inequality that applies to the scenario's boundary value problem.
pub fn verify_reports(s: &Scenario, eq: &Equation, problem: Problem) -> Result<Vec<InequalityReport>> {
    match problem {
        Problem::Bc1 => Ok(bc1_reports(s, eq)?.1),
        Problem::Bc2 => {
            let sol = solve_bc2(eq, s.interval.a, &s.bc2_config())?;
            let mut reports = verify_bc2(&sol, eq, s.verify.scan_n)?;
            reports.extend(verify_abs_bc2(&sol, eq)?);
            Ok(reports)
        }
    }
}

fn verify(s: &Scenario, eq: &Equation, sink: &mut Sink) -> Result<i32> {
    let reports = match s.verify.problem {
        Problem::Bc1 => {
            let (sol, reports) = bc1_reports(s, eq)?;
            note_reports(sink, &reports);
            if let Ok(feasible) = observed_max_feasible(&sol, eq) {
                sink.note(format!("  observed maximiser feasible: {feasible}"));
            }
            reports
        }
        Problem::Bc2 => {
            let reports = verify_reports(s, eq, Problem::Bc2)?;
            note_reports(sink, &reports);
            reports
        }
    };
    sink.records("inequalities", &reports)?;
    Ok(EXIT_OK)
}

fn zero_count(s: &Scenario, eq: &Equation, sink: &mut Sink) -> Result<i32> {
    let (a, b) = (s.interval.a, s.interval.b);
    let traj = shoot(eq, a, s.zero_count.slope, s.zero_count.curvature, b, &s.ivp())?;
    let r = zero_count_bound(&traj, a, b, eq, s.verify.scan_n)?;
    sink.note(format!(
        "{} zeros on [{a}, {b}], N = {}, sum of maxima = {:.6e}, threshold = {:.6e}, N_bound = {:.6e}",
        r.zeros.len(),
        r.n,
        r.sum,
        r.threshold,
        r.n_bound
    ));
    if let Some(d) = &r.power_sum {
        sink.note(format!(
            "  diagnostic (not asserted): summed bound with power N^(e+1) = {:.6e}, exceeded by sum: {}",
            d.value, d.exceeded
        ));
    }
    sink.records("zero_count", &[ZeroCountRow::from(&r)])?;
    sink.records("zero_count_triples", &r.per_triple)?;
    let report = r.to_report();
    if report.verdict == Verdict::Fails {
        return Err(Error::InvariantViolation(Box::new(report)));
    }
    Ok(EXIT_OK)
}

fn oscillation(s: &Scenario, eq: &Equation, sink: &mut Sink) -> Result<i32> {
    let r = analyze(eq, &s.oscillation_params(), &s.ivp())?;
    let t = &r.trend;
    sink.note(format!(
        "{} zeros on [{}, {}]; gaps mean {:.6e}, min {:.6e}, max {:.6e}; Theil-Sen slope {}",
        r.zeros.len(),
        r.x0,
        r.horizon,
        t.mean_gap,
        t.min_gap,
        t.max_gap,
        t.slope.map_or("n/a".to_string(), |x| format!("{x:.6e}"))
    ));
    sink.note(format!(
        "  trend consistent with divergence: {} (finite horizon {}, not a proof)",
        t.consistent_with_divergence, r.horizon
    ));
    sink.note(format!(
        "  window M = {:.6e}, sigma = {}: {} of {} windows too weak for a triple of span <= M; {} contradiction(s)",
        r.window,
        r.sigma,
        r.decayed_windows(),
        r.windows.len(),
        r.contradictions().len()
    ));
    let undominated = r.holder.iter().filter(|h| !h.dominated()).count();
    sink.note(format!("  Hölder step: {} of {} triples dominated", r.holder.len() - undominated, r.holder.len()));
    sink.records("zero_gaps", &r.rows())?;
    sink.records("holder", &r.holder)?;
    Ok(if undominated == 0 && r.contradictions().is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

/// One instance of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub param: f64,
    pub status: String,
    pub report: Option<InequalityReport>,
}

impl Record for SweepRow {
    fn header() -> &'static [&'static str] {
        &["index", "param", "status", "kind", "lhs", "threshold", "margin", "holds", "quadrature_error"]
    }

    fn fields(&self) -> Vec<Field> {
        let r = self.report.as_ref();
        vec![
            Field::Int(self.index),
            Field::Num(self.param),
            Field::Text(self.status.clone()),
            Field::Text(r.map(|r| r.kind.name().to_string()).unwrap_or_default()),
            Field::Opt(r.map(|r| r.lhs)),
            Field::Opt(r.map(|r| r.threshold)),
            Field::Opt(r.map(|r| r.margin)),
            Field::Text(r.map(|r| r.holds.to_string()).unwrap_or_default()),
            Field::Opt(r.map(|r| r.quadrature_error)),
        ]
    }
}

fn status_name(e: &Error) -> String {
    let name = match e {
        Error::NoBracket => "no_bracket",
        Error::NoXi { .. } => "no_xi",
        Error::InsufficientZeros { .. } => "insufficient_zeros",
        Error::InteriorZero { .. } => "interior_zero",
        Error::TooFewZeros { .. } => "too_few_zeros",
        Error::InvariantViolation(_) => "violation",
        Error::StepUnderflow { .. } => "step_underflow",
        _ => "error",
    };
    name.to_string()
}

/// Runs the configured sweep and returns rows in parameter order.
pub fn run_sweep(s: &Scenario, workers: Option<usize>, seed: Option<u64>) -> Result<Vec<SweepRow>> {
    let sweep = s
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("scenario has no [sweep] table".into()))?;
    let instances = sweep.instances(&s.q, s.interval, seed)?;
    let problem = sweep.problem();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(Error::Config("--workers must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    let per_instance: Vec<Result<Vec<SweepRow>>> = pool.install(|| {
        instances
            .par_iter()
            .enumerate()
            .map(|(index, (param, q))| {
                let mut inst = s.clone();
                inst.q = q.clone();
                inst.sweep = None;
                let eq = inst.gated_equation()?;
                Ok(match verify_reports(&inst, &eq, problem) {
                    Ok(reports) => reports
                        .into_iter()
                        .map(|r| SweepRow {
                            index,
                            param: *param,
                            status: "certified".into(),
                            report: Some(r),
                        })
                        .collect(),
                    Err(Error::InvariantViolation(r)) => vec![SweepRow {
                        index,
                        param: *param,
                        status: "violation".into(),
                        report: Some(*r),
                    }],
                    Err(e) if e.is_no_solution() || matches!(e, Error::StepUnderflow { .. }) => vec![SweepRow {
                        index,
                        param: *param,
                        status: status_name(&e),
                        report: None,
                    }],
                    Err(e) => return Err(e),
                })
            })
            .collect()
    });
    let mut rows = Vec::new();
    for r in per_instance {
        rows.extend(r?);
    }
    Ok(rows)
}

fn sweep(cli: &Cli, s: &Scenario, sink: &mut Sink) -> Result<i32> {
    let rows = run_sweep(s, cli.workers, cli.seed)?;
    let instances = rows.iter().map(|r| r.index).max().map_or(0, |m| m + 1);
    let certified = {
        let mut idx: Vec<usize> = rows.iter().filter(|r| r.status == "certified").map(|r| r.index).collect();
        idx.dedup();
        idx.len()
    };
    let violations = rows.iter().filter(|r| r.status == "violation").count();
    let inconclusive = rows
        .iter()
        .filter(|r| r.report.as_ref().is_some_and(|r| r.verdict == Verdict::Inconclusive))
        .count();
    sink.note(format!(
        "{instances} instances, {certified} certified, {violations} violation(s), {inconclusive} inconclusive report(s)"
    ));
    sink.records("sweep", &rows)?;
    Ok(if violations == 0 { EXIT_OK } else { EXIT_VIOLATION })
}

/// Renders a sweep to a string; used for determinism checks.
pub fn render_sweep(rows: &[SweepRow], format: Format) -> String {
    render(rows, format)
}
