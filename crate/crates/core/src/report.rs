//! Deterministic report emission: text summaries, CSV and JSON lines.

use std::io::Write;

use crate::error::Result;
use crate::lyapunov::{InequalityReport, TripleMax, Verdict, ZeroCountReport};
use crate::oscillation::{HolderRecord, ZeroGapReport};
use crate::psi::PsiPropertyReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Text => "txt",
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

/// Twelve significant digits; non-finite values become empty strings.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        String::new()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Opt(Option<f64>),
    Int(usize),
    Bool(bool),
    Text(String),
}

impl Field {
    fn csv(&self) -> String {
        match self {
            Field::Num(x) => fmt_num(*x),
            Field::Opt(x) => x.map(fmt_num).unwrap_or_default(),
            Field::Int(n) => n.to_string(),
            Field::Bool(b) => b.to_string(),
            Field::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> String {
        match self {
            Field::Num(x) | Field::Opt(Some(x)) if x.is_finite() => fmt_num(*x),
            Field::Num(_) | Field::Opt(_) => "null".into(),
            Field::Int(n) => n.to_string(),
            Field::Bool(b) => b.to_string(),
            Field::Text(s) => json_string(s),
        }
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// A flat record with a fixed column order.
pub trait Record {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<Field>;
}

pub fn emit_report<R: Record, W: Write>(records: &[R], format: Format, mut out: W) -> Result<()> {
    let header = R::header();
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
            w.write_record(header).map_err(csv_error)?;
            for r in records {
                w.write_record(r.fields().iter().map(Field::csv)).map_err(csv_error)?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            for r in records {
                let body: Vec<String> = header
                    .iter()
                    .zip(r.fields())
                    .map(|(k, v)| format!("{}:{}", json_string(k), v.json()))
                    .collect();
                writeln!(out, "{{{}}}", body.join(","))?;
            }
        }
        Format::Text => {
            for r in records {
                let body: Vec<String> = header
                    .iter()
                    .zip(r.fields())
                    .map(|(k, v)| format!("{k}={}", v.csv()))
                    .collect();
                writeln!(out, "{}", body.join(" "))?;
            }
        }
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => crate::error::Error::Config(format!("{other:?}")),
    }
}

pub fn render<R: Record>(records: &[R], format: Format) -> String {
    let mut buf = Vec::new();
    emit_report(records, format, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("reports are utf-8")
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Fails => "fails",
        Verdict::Inconclusive => "inconclusive",
    }
}

impl Record for InequalityReport {
    fn header() -> &'static [&'static str] {
        &["kind", "a", "b", "c", "xi", "lhs", "threshold", "margin", "holds", "quadrature_error", "verdict"]
    }

    fn fields(&self) -> Vec<Field> {
        vec![
            Field::Text(self.kind.name().into()),
            Field::Num(self.a),
            Field::Num(self.b),
            Field::Opt(self.c),
            Field::Opt(self.xi),
            Field::Num(self.lhs),
            Field::Num(self.threshold),
            Field::Num(self.margin),
            Field::Bool(self.holds),
            Field::Num(self.quadrature_error),
            Field::Text(verdict_name(self.verdict).into()),
        ]
    }
}

/// One line per zero of a [`ZeroGapReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroGapRow {
    pub k: usize,
    pub t: f64,
    pub gap: Option<f64>,
    pub window_norm: Option<f64>,
}

impl ZeroGapReport {
    pub fn rows(&self) -> Vec<ZeroGapRow> {
        self.zeros
            .iter()
            .enumerate()
            .map(|(k, &t)| ZeroGapRow {
                k,
                t,
                gap: self.gaps.get(k).copied(),
                window_norm: self.window_norms.iter().find(|w| w.0 == t).map(|w| w.1),
            })
            .collect()
    }
}

impl Record for ZeroGapRow {
    fn header() -> &'static [&'static str] {
        &["k", "t_k", "gap_k", "window_norm_k"]
    }

    fn fields(&self) -> Vec<Field> {
        vec![Field::Int(self.k), Field::Num(self.t), Field::Opt(self.gap), Field::Opt(self.window_norm)]
    }
}

impl Record for HolderRecord {
    fn header() -> &'static [&'static str] {
        &["t0", "t1", "t2", "sigma", "threshold", "lhs", "q_factor", "phi_factor", "rhs", "quadrature_error", "dominated"]
    }

    fn fields(&self) -> Vec<Field> {
        vec![
            Field::Num(self.t0),
            Field::Num(self.t1),
            Field::Num(self.t2),
            Field::Num(self.sigma),
            Field::Num(self.threshold),
            Field::Num(self.lhs),
            Field::Num(self.q_factor),
            Field::Num(self.phi_factor),
            Field::Num(self.rhs),
            Field::Num(self.quadrature_error),
            Field::Bool(self.dominated()),
        ]
    }
}

impl Record for TripleMax {
    fn header() -> &'static [&'static str] {
        &["lo", "hi", "xi", "max", "quadrature_error"]
    }

    fn fields(&self) -> Vec<Field> {
        vec![
            Field::Num(self.lo),
            Field::Num(self.hi),
            Field::Num(self.xi),
            Field::Num(self.value),
            Field::Num(self.error),
        ]
    }
}

impl Record for PsiPropertyReport {
    fn header() -> &'static [&'static str] {
        &["property", "holds", "worst_inputs", "worst_magnitude", "grid"]
    }

    fn fields(&self) -> Vec<Field> {
        let (inputs, mag) = match &self.worst_violation {
            Some(v) => (
                v.inputs.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(" "),
                Some(v.magnitude),
            ),
            None => (String::new(), None),
        };
        vec![
            Field::Text(self.property.name().into()),
            Field::Bool(self.holds),
            Field::Text(inputs),
            Field::Opt(mag),
            Field::Text(self.grid_spec.clone()),
        ]
    }
}

/// Endpoint summary of a certified boundary value solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSummary {
    pub a: f64,
    pub b: f64,
    pub c: Option<f64>,
    pub xi: Option<f64>,
    pub sign: f64,
    pub max_u: f64,
}

impl Record for SolutionSummary {
    fn header() -> &'static [&'static str] {
        &["a", "b", "c", "xi", "sign", "max_u"]
    }

    fn fields(&self) -> Vec<Field> {
        vec![
            Field::Num(self.a),
            Field::Num(self.b),
            Field::Opt(self.c),
            Field::Opt(self.xi),
            Field::Num(self.sign),
            Field::Num(self.max_u),
        ]
    }
}

/// Scalar summary of a zero-count bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroCountRow {
    pub a: f64,
    pub b: f64,
    pub zeros: usize,
    pub n: usize,
    pub sum: f64,
    pub threshold: f64,
    pub n_bound: f64,
    pub holds: bool,
    pub power_sum_bound: Option<f64>,
    pub power_sum_exceeded: Option<bool>,
}

impl From<&ZeroCountReport> for ZeroCountRow {
    fn from(r: &ZeroCountReport) -> Self {
        ZeroCountRow {
            a: r.a,
            b: r.b,
            zeros: r.zeros.len(),
            n: r.n,
            sum: r.sum,
            threshold: r.threshold,
            n_bound: r.n_bound,
            holds: r.holds(),
            power_sum_bound: r.power_sum.as_ref().map(|d| d.value),
            power_sum_exceeded: r.power_sum.as_ref().map(|d| d.exceeded),
        }
    }
}

impl Record for ZeroCountRow {
    fn header() -> &'static [&'static str] {
        &["a", "b", "zeros", "n", "sum", "threshold", "n_bound", "holds", "power_sum_bound", "power_sum_exceeded"]
    }

    fn fields(&self) -> Vec<Field> {
        vec![
            Field::Num(self.a),
            Field::Num(self.b),
            Field::Int(self.zeros),
            Field::Int(self.n),
            Field::Num(self.sum),
            Field::Num(self.threshold),
            Field::Num(self.n_bound),
            Field::Bool(self.holds),
            Field::Opt(self.power_sum_bound),
            Field::Text(self.power_sum_exceeded.map(|b| b.to_string()).unwrap_or_default()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lyapunov::InequalityKind;

    fn sample() -> InequalityReport {
        InequalityReport::new(InequalityKind::Thm21, (0.0, 1.0, None), Some(0.25), 5.5, 4.0, 1e-9)
    }

    #[test]
    fn fmt_is_twelve_digits() {
        assert_eq!(fmt_num(4.0), "4.00000000000e0");
        assert_eq!(fmt_num(-0.001234), "-1.23400000000e-3");
        assert_eq!(fmt_num(f64::NAN), "");
    }

    #[test]
    fn empty_csv_is_header() {
        let s = render::<InequalityReport>(&[], Format::Csv);
        assert_eq!(s, "kind,a,b,c,xi,lhs,threshold,margin,holds,quadrature_error,verdict\n");
        assert_eq!(render::<InequalityReport>(&[], Format::Jsonl), "");
    }

    #[test]
    fn one_record() {
        let s = render(&[sample()], Format::Csv);
        let row = s.lines().nth(1).unwrap();
        assert!(row.starts_with("thm21,0.00000000000e0,1.00000000000e0,,2.50000000000e-1,5.50000000000e0,4.00000000000e0,"));
        assert!(row.ends_with(",true,1.00000000000e-9,holds"));
        let j = render(&[sample()], Format::Jsonl);
        assert!(j.starts_with("{\"kind\":\"thm21\",\"a\":0.00000000000e0,"));
        assert!(j.contains("\"c\":null"));
    }

    #[test]
    fn deterministic() {
        let r = vec![sample(), sample()];
        for f in [Format::Text, Format::Csv, Format::Jsonl] {
            assert_eq!(render(&r, f), render(&r, f));
        }
    }

    #[test]
    fn csv_quotes_text() {
        let rows = vec![SolutionSummary { a: 0.0, b: 1.0, c: None, xi: None, sign: 1.0, max_u: 2.0 }];
        assert!(render(&rows, Format::Csv).starts_with("a,b,c,xi,sign,max_u\n"));
        assert_eq!(json_string("x\"y"), "\"x\\\"y\"");
    }
}
