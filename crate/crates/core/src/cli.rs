//! `permtri` command-line front end.
//!
//! Exit codes: 0 success, 1 verified false, 2 verifier disagreement,
//! 3 inapplicable method or failed construction condition, 4 I/O error,
//! 64 usage error.

use std::fmt;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::catalog::{append_records, query, CatalogFilter, CatalogRecord, Source};
use crate::construct::{default_grid, enumerate_triples, SparsePoly};
use crate::field::{make_field, MAX_HALF_DEGREE};
use crate::fixtures::{check_table2, table2_rows, FractionOutcome};
use crate::invert::{inverse_params_special, verify_roundtrip};
use crate::unit_circle::UnitCircle;
use crate::verify::{verify_with, Method, VerifyError};

pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VERIFIED_FALSE: i32 = 1;
    pub const DISAGREEMENT: i32 = 2;
    pub const INAPPLICABLE: i32 = 3;
    pub const IO: i32 = 4;
    pub const USAGE: i32 = 64;
}

/// `a..b` (inclusive), `a..=b`, or a single value `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntRange<T> {
    pub start: T,
    pub end: T,
}

impl<T: Copy> IntRange<T> {
    pub fn to_range(self) -> RangeInclusive<T> {
        self.start..=self.end
    }
}

impl<T> FromStr for IntRange<T>
where
    T: FromStr + Copy,
    T::Err: fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |v: &str| {
            v.trim()
                .parse::<T>()
                .map_err(|e| format!("bad range bound {v:?}: {e}"))
        };
        match s.split_once("..") {
            Some((a, b)) => Ok(IntRange {
                start: parse(a)?,
                end: parse(b.strip_prefix('=').unwrap_or(b))?,
            }),
            None => {
                let v = parse(s)?;
                Ok(IntRange { start: v, end: v })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Parser)]
#[command(
    name = "permtri",
    version,
    about = "All-ones permutation trinomials over GF(2^(2m))"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate and verify trinomials from a parameter grid.
    Construct(ConstructArgs),
    /// Verify one all-ones polynomial with up to three terms.
    Verify(VerifyArgs),
    /// Closed-form inverse for i = j + m - 1.
    Invert(InvertArgs),
    /// Check the fractional permutations of the unit circle.
    Fractions(FractionsArgs),
    /// Filter catalog files.
    Query(QueryArgs),
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long)]
    pub m: u32,
    /// Defaults to 1..2m.
    #[arg(long)]
    pub i: Option<IntRange<u32>>,
    /// Defaults to 1..2m.
    #[arg(long)]
    pub j: Option<IntRange<u32>>,
    /// Defaults to 0..2^m.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<IntRange<i64>>,
    #[arg(long, value_delimiter = ',', default_value = "exhaustive")]
    pub verify: Vec<Method>,
    /// Catalog file to append to.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Flips every verdict of the last listed method.
    #[arg(long, hide = true)]
    pub inject_disagreement: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub m: u32,
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    pub exponents: Vec<i128>,
    #[arg(long, default_value = "exhaustive")]
    pub method: Method,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub j: u32,
    /// Defaults to the smallest usable u in 0..2^m.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<i64>,
    /// Check the inverse on U and round-trip it on the field.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Args)]
pub struct FractionsArgs {
    #[arg(long, default_value = "2..8")]
    pub m: IntRange<u32>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long, required = true)]
    pub catalog: Vec<PathBuf>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub source: Option<Source>,
    /// Exponents of any member of the Frobenius class, e.g. 4,13,7.
    #[arg(long, value_delimiter = ',')]
    pub canonical: Option<Vec<u64>>,
    #[arg(long)]
    pub dedup: bool,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Inapplicable(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Inapplicable(_) => exit::INAPPLICABLE,
            CliError::Io(_) => exit::IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(s) | CliError::Inapplicable(s) | CliError::Io(s) => s,
        }
    }
}

/// A command's result: `report` is printed as JSON, `rows` as CSV or a table.
struct Outcome {
    report: Value,
    rows: Vec<Value>,
    code: i32,
}

fn check_m(m: u32) -> Result<(), CliError> {
    if (1..=MAX_HALF_DEGREE).contains(&m) {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "m = {m} outside 1..={MAX_HALF_DEGREE}"
        )))
    }
}

fn inapplicable(e: VerifyError) -> CliError {
    CliError::Inapplicable(e.to_string())
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn cmd_construct(a: &ConstructArgs) -> Result<Outcome, CliError> {
    check_m(a.m)?;
    if a.verify.is_empty() {
        return Err(CliError::Usage("--verify needs at least one method".into()));
    }
    let field = make_field(a.m).map_err(|e| CliError::Usage(e.to_string()))?;
    let (di, dj, du) = default_grid(a.m);
    let i_range = a.i.map_or(di, IntRange::to_range);
    let j_range = a.j.map_or(dj, IntRange::to_range);
    let u_range = a.u.map_or(du, IntRange::to_range);
    let enumeration = enumerate_triples(a.m, i_range, j_range, u_range);

    let methods = &a.verify;
    let verdicts: Vec<Vec<bool>> = enumeration
        .triples
        .par_iter()
        .map(|t| {
            let poly = t.as_polynomial().to_sparse();
            methods
                .iter()
                .enumerate()
                .map(|(k, &method)| {
                    let v = verify_with(method, &field, &poly)?.verdict;
                    Ok(v ^ (a.inject_disagreement && k + 1 == methods.len()))
                })
                .collect::<Result<Vec<bool>, VerifyError>>()
        })
        .collect::<Result<_, _>>()
        .map_err(inapplicable)?;

    let mut records = Vec::new();
    let mut rows = Vec::new();
    let (mut verified, mut not_permutation, mut disagreements) = (0u64, 0u64, 0u64);
    for (t, v) in enumeration.triples.iter().zip(&verdicts) {
        let agree = v.iter().all(|&x| x == v[0]);
        if !agree {
            disagreements += 1;
            for (&method, &verdict) in methods.iter().zip(v) {
                records.push(CatalogRecord::from_triple(t, vec![method], verdict));
            }
        } else {
            if v[0] {
                verified += 1;
            } else {
                not_permutation += 1;
            }
            records.push(CatalogRecord::from_triple(t, methods.clone(), v[0]));
        }
        let mut row = json!({
            "i": t.params.i,
            "j": t.params.j,
            "u": t.params.u,
            "d1": t.normalized[0],
            "d2": t.normalized[1],
            "d3": t.normalized[2],
            "canonical": join(&t.canonical()),
        });
        for (method, verdict) in methods.iter().zip(v) {
            row[method.as_str()] = json!(verdict);
        }
        row["agree"] = json!(agree);
        rows.push(row);
    }

    let s = enumeration.summary;
    let mut notes = Vec::new();
    if s.diagonal > 0 {
        notes.push(format!(
            "{} grid points with i = j skipped: the construction requires i != j",
            s.diagonal
        ));
    }
    if let Some(path) = &a.output {
        append_records(path, &records)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    let code = if disagreements > 0 {
        exit::DISAGREEMENT
    } else if not_permutation > 0 {
        exit::VERIFIED_FALSE
    } else {
        exit::SUCCESS
    };
    let report = json!({
        "m": a.m,
        "methods": methods,
        "summary": {
            "total": s.total,
            "diagonal": s.diagonal,
            "yielded": s.yielded,
            "c1_failed": s.c1_failed,
            "c2_failed": s.c2_failed,
            "degenerate": s.degenerate(),
            "verified": verified,
            "not_permutation": not_permutation,
            "disagreements": disagreements,
        },
        "notes": notes,
        "catalog": a.output.as_ref().map(|p| p.display().to_string()),
        "records_written": if a.output.is_some() { records.len() } else { 0 },
    });
    Ok(Outcome { report, rows, code })
}

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome, CliError> {
    check_m(a.m)?;
    if !(1..=3).contains(&a.exponents.len()) {
        return Err(CliError::Usage(format!(
            "expected 1 to 3 exponents, got {}",
            a.exponents.len()
        )));
    }
    let field = make_field(a.m).map_err(|e| CliError::Usage(e.to_string()))?;
    let poly = SparsePoly::new(&field, &a.exponents).map_err(|e| CliError::Usage(e.to_string()))?;
    let rep = verify_with(a.method, &field, &poly).map_err(inapplicable)?;
    let mut report = json!({
        "m": a.m,
        "exponents": poly.exponents(),
        "canonical": crate::construct::canonicalize(poly.exponents(), field.n()),
        "is_permutation": rep.verdict,
    });
    if let (Value::Object(out), Value::Object(extra)) = (
        &mut report,
        serde_json::to_value(&rep).expect("report serializes"),
    ) {
        out.extend(extra);
    }
    let row = json!({
        "m": a.m,
        "exponents": join(poly.exponents()),
        "method": a.method,
        "is_permutation": rep.verdict,
        "witness": rep.witness.as_ref().map(|w| serde_json::to_string(w).expect("witness serializes")),
        "elapsed_secs": rep.elapsed.as_secs_f64(),
    });
    let code = if rep.verdict {
        exit::SUCCESS
    } else {
        exit::VERIFIED_FALSE
    };
    Ok(Outcome {
        report,
        rows: vec![row],
        code,
    })
}

fn cmd_invert(a: &InvertArgs) -> Result<Outcome, CliError> {
    check_m(a.m)?;
    let p = match inverse_params_special(a.m, a.j, a.u) {
        Ok(p) => p,
        Err(e) => {
            let report = json!({
                "m": a.m,
                "j": a.j,
                "i": a.j + a.m - 1,
                "status": "condition_failure",
                "error": e.to_string(),
            });
            let rows = vec![report.clone()];
            return Ok(Outcome {
                report,
                rows,
                code: exit::INAPPLICABLE,
            });
        }
    };
    let mut report = json!({
        "m": p.m,
        "i": p.i,
        "j": p.j,
        "u": p.u,
        "d1": p.triple.normalized[0],
        "d2": p.triple.normalized[1],
        "d3": p.triple.normalized[2],
        "q_circle": p.q_circle,
        "r1": p.r1,
        "r2": p.r2,
        "g_inverse_exponent": p.g_inverse_exponent,
        "r3": p.r3,
        "r_prime": p.r_prime,
        "s": p.s,
        "status": "ok",
    });
    let mut code = exit::SUCCESS;
    if a.check {
        let field = make_field(p.m).map_err(|e| CliError::Usage(e.to_string()))?;
        let circle = UnitCircle::new(&field);
        let on_circle = circle.elements().iter().all(|&x| {
            p.g_inverse_on_circle(&circle, p.g_on_circle(&circle, x)) == x
                && p.g_on_circle(&circle, p.g_inverse_on_circle(&circle, x)) == x
        });
        let poly = p.triple.as_polynomial();
        let inv = p
            .full_inverse(&field)
            .map_err(|e| CliError::Inapplicable(e.to_string()))?;
        let rt = verify_roundtrip(&field, |x| poly.eval(&field, x), |x| inv.eval(x));
        if !(on_circle && rt.verdict) {
            code = exit::VERIFIED_FALSE;
        }
        report["circle_inverse"] = json!(on_circle);
        report["roundtrip"] = json!(rt.verdict);
        report["roundtrip_exhaustive"] = json!(rt.exhaustive);
        report["roundtrip_points"] = json!(rt.points_checked);
        if let Some(w) = rt.witness {
            report["roundtrip_witness"] = serde_json::to_value(w).expect("witness serializes");
        }
    }
    let rows = vec![report.clone()];
    Ok(Outcome { report, rows, code })
}

fn cmd_fractions(a: &FractionsArgs) -> Result<Outcome, CliError> {
    let range = a.m.to_range();
    if !range.is_empty() {
        check_m(*range.start())?;
        check_m(*range.end())?;
    }
    let table = table2_rows();
    let checks: Vec<_> = range.flat_map(|m| check_table2(&table, m)).collect();
    let failures = checks.iter().filter(|c| c.is_failure()).count();
    let rows = checks
        .iter()
        .map(|c| {
            let (status, detail) = match &c.outcome {
                FractionOutcome::NotApplicable => ("not_applicable", String::new()),
                FractionOutcome::Permutes => ("permutes", String::new()),
                FractionOutcome::NotPermutation {
                    collision,
                    off_circle,
                } => (
                    "not_permutation",
                    match (collision, off_circle) {
                        (Some((x, y)), _) => format!("collision {x} {y}"),
                        (None, Some(x)) => format!("off circle at {x}"),
                        (None, None) => String::new(),
                    },
                ),
                FractionOutcome::Pole { point } => ("pole", format!("at {point}")),
            };
            json!({
                "label": c.label,
                "m": c.m,
                "k": c.k,
                "asserted": c.asserted,
                "status": status,
                "detail": detail,
                "failure": c.is_failure(),
            })
        })
        .collect();
    let report = json!({ "checks": checks, "failures": failures });
    let code = if failures == 0 {
        exit::SUCCESS
    } else {
        exit::VERIFIED_FALSE
    };
    Ok(Outcome { report, rows, code })
}

fn cmd_query(a: &QueryArgs, err: &mut dyn Write) -> Result<Outcome, CliError> {
    let filter = CatalogFilter {
        m: a.m,
        source: a.source,
        canonical: a.canonical.clone(),
        dedup: a.dedup,
    };
    let paths: Vec<&Path> = a.catalog.iter().map(PathBuf::as_path).collect();
    let contents =
        query(&paths, &filter).map_err(|e| CliError::Io(format!("cannot read catalog: {e}")))?;
    if contents.malformed > 0 {
        let _ = writeln!(
            err,
            "warning: skipped {} malformed catalog lines",
            contents.malformed
        );
    }
    let rows = contents
        .records
        .iter()
        .map(|r| {
            json!({
                "m": r.m,
                "i": r.i,
                "j": r.j,
                "u": r.u,
                "d1": r.d1,
                "d2": r.d2,
                "d3": r.d3,
                "canonical": join(&r.canonical),
                "source": r.source,
                "verified_by": join(&r.verified_by),
                "is_permutation": r.is_permutation,
                "timestamp": r.timestamp,
            })
        })
        .collect();
    let report = json!({
        "count": contents.records.len(),
        "malformed": contents.malformed,
        "records": contents.records,
    });
    Ok(Outcome {
        report,
        rows,
        code: exit::SUCCESS,
    })
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn header(rows: &[Value]) -> Vec<String> {
    rows.first()
        .and_then(Value::as_object)
        .map(|o| o.keys().cloned().collect())
        .unwrap_or_default()
}

fn row_cells(row: &Value, header: &[String]) -> Vec<String> {
    let empty = Map::new();
    let obj = row.as_object().unwrap_or(&empty);
    header
        .iter()
        .map(|k| obj.get(k).map(cell).unwrap_or_default())
        .collect()
}

fn render(outcome: &Outcome, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Json => writeln!(out, "{}", outcome.report),
        Format::Csv => {
            let header = header(&outcome.rows);
            let mut w = csv::Writer::from_writer(out);
            if !header.is_empty() {
                w.write_record(&header)?;
            }
            for row in &outcome.rows {
                w.write_record(row_cells(row, &header))?;
            }
            w.flush()
        }
        Format::Table => {
            let header = header(&outcome.rows);
            let cells: Vec<Vec<String>> =
                outcome.rows.iter().map(|r| row_cells(r, &header)).collect();
            let widths: Vec<usize> = header
                .iter()
                .enumerate()
                .map(|(c, h)| {
                    cells
                        .iter()
                        .map(|r| r[c].chars().count())
                        .chain([h.chars().count()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            for line in std::iter::once(&header).chain(&cells) {
                let padded: Vec<String> = line
                    .iter()
                    .zip(&widths)
                    .map(|(s, &w)| format!("{s:<w$}"))
                    .collect();
                writeln!(out, "{}", padded.join("  ").trim_end())?;
            }
            if outcome.rows.is_empty() {
                writeln!(out, "(no rows)")?;
            }
            Ok(())
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() {
                exit::USAGE
            } else {
                exit::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Construct(a) => cmd_construct(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Invert(a) => cmd_invert(a),
        Command::Fractions(a) => cmd_fractions(a),
        Command::Query(a) => cmd_query(a, err),
    };
    match result {
        Ok(outcome) => {
            if let Err(e) = render(&outcome, cli.format, out) {
                let _ = writeln!(err, "error: cannot write output: {e}");
                return exit::IO;
            }
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.code()
        }
    }
}
