//! Command-line front end for the `liesym` library.
//!
//! [`run`] parses arguments, dispatches a subcommand and writes the report to
//! `out`. Exit codes: 0 success, 1 audit mismatch or failed check, 2 usage or
//! input error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use liesym::adjoint::{adjoint_table, normalize, AdjointMatrix, ClassId, DIM, PRINTED_MATRICES};
use liesym::expr::{parse, Context, Expr};
use liesym::flows::{flow_map, sample_flow, FlowPoint};
use liesym::reduction::{
    characteristic_invariants, reduce_pde, term_diff, verify_reduction, ReducedPde, PRINTED_CHART_GENERATORS, PRINTED_REDUCTIONS,
    REDUCTION_TOLERANCE,
};
use liesym::symmetry::{commutator_table, determining_equations, verify_symmetry, Generator, PdeInstance, VerifyMethod};
use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Markdown,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "liesym", version, about = "Lie point symmetries of the 2D viscoelastic equation")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, env = "LIESYM_FORMAT", default_value = "json")]
    pub format: Format,
    /// Seed for every randomized check.
    #[arg(long, global = true, env = "LIESYM_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Replace the parameter `a` by a constant expression, e.g. `3/2`.
    #[arg(long, global = true)]
    pub a: Option<String>,
    /// Replace the parameter `b` by a constant expression.
    #[arg(long, global = true)]
    pub b: Option<String>,
    /// Pass threshold for `verify-reduction`.
    #[arg(long, global = true, default_value_t = REDUCTION_TOLERANCE)]
    pub tolerance: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Commutator table of X1..X5.
    Table,
    /// Adjoint table compared with the printed one.
    AdjointTable,
    /// Matrix of Ad(exp(s X_t)) compared with the printed one.
    AdjointMatrix {
        #[arg(long = "t", value_parser = clap::value_parser!(u8).range(1..=5))]
        t: u8,
    },
    /// Checks the infinitesimal invariance criterion for a generator.
    Verify {
        #[arg(long)]
        generator: String,
    },
    /// Determining equations of the general point-symmetry ansatz.
    Determining,
    /// Optimal-system representative of a5-vector of coefficients.
    Optimal {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        coeffs: Vec<f64>,
    },
    /// Similarity invariants and reduced equation.
    Reduce {
        #[arg(long)]
        generator: String,
    },
    /// Randomized check of a reduction; without a generator, audits every printed row.
    VerifyReduction {
        #[arg(long)]
        generator: Option<String>,
    },
    /// Samples the flow of a generator on (x, y, t).
    Flow {
        #[arg(long)]
        generator: String,
        /// JSON array of `[x, y, t]` triples or CSV with three columns.
        #[arg(long)]
        seeds: PathBuf,
        /// `LO:HI:N`.
        #[arg(long, allow_hyphen_values = true)]
        eps: String,
        /// Drop `t` (project onto the plane t = 0).
        #[arg(long)]
        project_xy: bool,
    },
}

#[derive(Debug)]
pub struct Failure(pub String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(e.to_string())
    }
}

/// Output of one subcommand in every format it supports.
struct Report {
    json: Value,
    markdown: Option<String>,
    csv: Option<String>,
    mismatch: bool,
}

impl Report {
    fn new(json: Value) -> Report {
        Report { json, markdown: None, csv: None, mismatch: false }
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let body = match cli.format {
                Format::Json => Some(format!("{}\n", report.json)),
                Format::Markdown => report.markdown,
                Format::Csv => report.csv,
            };
            let Some(body) = body else {
                let _ = writeln!(err, "error: format {:?} is not available for this subcommand", cli.format);
                return EXIT_USAGE;
            };
            if out.write_all(body.as_bytes()).is_err() {
                return EXIT_USAGE;
            }
            if report.mismatch {
                EXIT_MISMATCH
            } else {
                EXIT_OK
            }
        }
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn execute(cli: &Cli) -> Result<Report, Failure> {
    let pde = pde_instance(cli)?;
    match &cli.command {
        Command::Table => table(),
        Command::AdjointTable => adjoint_audit(),
        Command::AdjointMatrix { t } => adjoint_matrix(*t as usize),
        Command::Verify { generator } => verify(&parse_generator(generator)?, &pde, cli.seed),
        Command::Determining => determining(&pde),
        Command::Optimal { coeffs } => optimal(coeffs),
        Command::Reduce { generator } => reduce(&parse_generator(generator)?, &pde),
        Command::VerifyReduction { generator: Some(g) } => verify_one_reduction(&parse_generator(g)?, &pde, cli.seed, cli.tolerance),
        Command::VerifyReduction { generator: None } => audit_all_rows(&pde, cli.seed, cli.tolerance),
        Command::Flow { generator, seeds, eps, project_xy } => flow(&parse_generator(generator)?, seeds, eps, *project_xy),
    }
}

fn pde_instance(cli: &Cli) -> Result<PdeInstance, Failure> {
    let constant = |name: &str, text: &Option<String>| -> Result<Expr, Failure> {
        let Some(text) = text else { return Ok(Expr::param(name)) };
        let e = parse(text, &Context::empty())?;
        if !e.free_symbols().is_empty() {
            return Err(Failure(format!("--{name} must be a numeric constant, got `{text}`")));
        }
        Ok(e)
    };
    let (a, b) = (constant("a", &cli.a)?, constant("b", &cli.b)?);
    if cli.a.is_none() && cli.b.is_none() {
        return Ok(PdeInstance::viscoelastic());
    }
    Ok(PdeInstance::viscoelastic_with(a, b))
}

/// A basis combination (`X1 + 2*X3`), a JSON object with keys
/// `xi1, xi2, xi3, phi1, phi2`, or five `;`-separated expressions.
pub fn parse_generator(text: &str) -> Result<Generator, Failure> {
    let ctx = Context::default();
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        let obj: serde_json::Map<String, Value> = serde_json::from_str(trimmed)?;
        let keys = ["xi1", "xi2", "xi3", "phi1", "phi2"];
        if let Some(k) = obj.keys().find(|k| !keys.contains(&k.as_str())) {
            return Err(Failure(format!("unexpected key `{k}`; expected {}", keys.join(", "))));
        }
        let mut parts = [""; 5];
        for (p, k) in parts.iter_mut().zip(keys) {
            *p = match obj.get(k) {
                Some(Value::String(s)) => s,
                Some(_) => return Err(Failure(format!("`{k}` must be a string"))),
                None => "0",
            };
        }
        return Ok(Generator::from_strings(parts, &ctx)?.labelled(trimmed));
    }
    if trimmed.contains(';') {
        let parts: Vec<&str> = trimmed.split(';').collect();
        let parts: [&str; 5] = parts.try_into().map_err(|p: Vec<&str>| Failure(format!("expected 5 expressions, got {}", p.len())))?;
        return Ok(Generator::from_strings(parts, &ctx)?.labelled(trimmed));
    }
    Ok(Generator::parse_combination(trimmed, &ctx)?)
}

fn label(g: &Generator) -> String {
    g.label.clone().unwrap_or_else(|| g.to_string())
}

/// Integral values print without a fractional part; `-0` prints as `0`.
fn number(x: f64) -> Value {
    if x == 0.0 {
        return json!(0);
    }
    if x.fract() == 0.0 && x.abs() < 9.0e15 {
        return json!(x as i64);
    }
    json!(x)
}

fn md_escape(s: &str) -> String {
    s.replace('|', "\\|")
}

fn csv_string<S: Serialize>(rows: &[S]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Failure(e.to_string()))?)?)
}

fn table() -> Result<Report, Failure> {
    let sc = commutator_table(&Generator::basis_all())?;
    let n = sc.dim();
    let entries: Vec<Vec<String>> = (0..n).map(|i| (0..n).map(|j| sc.entry(i, j).to_string()).collect()).collect();
    let mut r = Report::new(json!({ "labels": sc.labels, "entries": entries }));
    r.markdown = Some(sc.to_markdown());
    Ok(r)
}

#[derive(Serialize)]
struct CellRow {
    t: usize,
    r: usize,
    expected_from_series: String,
    printed: String,
    #[serde(rename = "match")]
    matches: bool,
}

fn adjoint_audit() -> Result<Report, Failure> {
    let cells: Vec<CellRow> = adjoint_table()
        .into_iter()
        .map(|c| CellRow {
            t: c.t,
            r: c.r,
            expected_from_series: c.expected_from_series.to_string(),
            printed: c.printed.to_string(),
            matches: c.matches,
        })
        .collect();
    let mismatches = cells.iter().filter(|c| !c.matches).count();
    let mut md = String::from("| Ad | X1 | X2 | X3 | X4 | X5 |\n|---|---|---|---|---|---|\n");
    for t in 1..=DIM {
        md.push_str(&format!("| X{t} |"));
        for c in cells.iter().filter(|c| c.t == t) {
            let cell = if c.matches {
                md_escape(&c.expected_from_series)
            } else {
                format!("{} (printed: {})", md_escape(&c.expected_from_series), md_escape(&c.printed))
            };
            md.push_str(&format!(" {cell} |"));
        }
        md.push('\n');
    }
    let mut r = Report::new(json!({ "cells": cells, "mismatches": mismatches }));
    r.csv = Some(csv_string(&cells)?);
    r.markdown = Some(md);
    r.mismatch = mismatches > 0;
    Ok(r)
}

fn adjoint_matrix(t: usize) -> Result<Report, Failure> {
    let m = AdjointMatrix::new(t, "s")?;
    let ctx = Context::default();
    let computed: Vec<Vec<String>> = m.m.iter().map(|row| row.iter().map(|e| e.to_string()).collect()).collect();
    let printed: Vec<Vec<String>> = PRINTED_MATRICES[t - 1].iter().map(|row| row.iter().map(|s| s.to_string()).collect()).collect();
    let mut diffs = Vec::new();
    for (i, row) in PRINTED_MATRICES[t - 1].iter().enumerate() {
        for (k, s) in row.iter().enumerate() {
            let p = parse(s, &ctx)?;
            if p != m.m[i][k] {
                diffs.push(json!({ "row": i + 1, "col": k + 1, "computed": m.m[i][k].to_string(), "printed": p.to_string() }));
            }
        }
    }
    let mut md = String::from("| | X1 | X2 | X3 | X4 | X5 |\n|---|---|---|---|---|---|\n");
    for (i, row) in computed.iter().enumerate() {
        md.push_str(&format!("| X{} | {} |\n", i + 1, row.iter().map(|c| md_escape(c)).collect::<Vec<_>>().join(" | ")));
    }
    let mismatch = !diffs.is_empty();
    let mut r = Report::new(json!({ "t": t, "param": "s", "matrix": computed, "printed": printed, "mismatches": diffs }));
    r.markdown = Some(md);
    r.mismatch = mismatch;
    Ok(r)
}

fn verify(g: &Generator, pde: &PdeInstance, seed: u64) -> Result<Report, Failure> {
    let rep = verify_symmetry(g, pde, seed)?;
    let method = match rep.method {
        VerifyMethod::Canonical => "canonical",
        VerifyMethod::Numeric => "numeric",
    };
    let residual = rep.residual.to_string();
    let mut r = Report::new(json!({
        "generator": label(g),
        "field": g.to_string(),
        "is_symmetry": rep.is_symmetry,
        "residual": residual,
        "method": method,
        "max_abs": rep.max_abs,
    }));
    r.markdown = Some(format!(
        "| generator | symmetry | residual | method |\n|---|---|---|---|\n| {} | {} | {} | {method} |\n",
        md_escape(&label(g)),
        rep.is_symmetry,
        md_escape(&residual)
    ));
    r.mismatch = !rep.is_symmetry;
    Ok(r)
}

#[derive(Serialize)]
struct EquationRow {
    monomial: String,
    coefficient: String,
}

fn determining(pde: &PdeInstance) -> Result<Report, Failure> {
    let sys = determining_equations(&Generator::ansatz(), pde)?;
    let defs = Generator::general_solution().into_iter().collect();
    let solved = sys.evaluate_at(&defs)?.iter().all(Expr::is_zero);
    let rows: Vec<EquationRow> =
        sys.equations.iter().map(|e| EquationRow { monomial: e.monomial.clone(), coefficient: e.coefficient.to_string() }).collect();
    let mut md = String::from("| monomial | coefficient |\n|---|---|\n");
    for row in &rows {
        md.push_str(&format!("| {} | {} |\n", md_escape(&row.monomial), md_escape(&row.coefficient)));
    }
    let mut r = Report::new(json!({
        "count": sys.len(),
        "raw_count": sys.raw_count,
        "solved_by_general_solution": solved,
        "equations": rows,
    }));
    r.csv = Some(csv_string(&rows)?);
    r.markdown = Some(md);
    r.mismatch = !solved;
    Ok(r)
}

fn optimal(coeffs: &[f64]) -> Result<Report, Failure> {
    let v: [f64; DIM] = coeffs.try_into().map_err(|_| Failure(format!("expected 5 coefficients, got {}", coeffs.len())))?;
    let n = normalize(&v)?;
    let class = match n.class.id {
        ClassId::FourB => json!("4b"),
        id => json!(id.label().parse::<u8>().expect("numeric label")),
    };
    let word: Vec<Value> = n.word.iter().map(|&(t, s)| json!({ "t": t, "s": number(s) })).collect();
    let mut obj = serde_json::Map::new();
    obj.insert("class".into(), class);
    obj.insert("c1".into(), number(n.class.c1));
    obj.insert("c2".into(), number(n.class.c2));
    obj.insert("word".into(), Value::Array(word.clone()));
    let words: Vec<String> = n.word.iter().map(|(t, s)| format!("Ad(exp({s} X{t}))")).collect();
    let md = format!(
        "| class | c1 | c2 | word |\n|---|---|---|---|\n| {} | {} | {} | {} |\n",
        n.class.id,
        number(n.class.c1),
        number(n.class.c2),
        if words.is_empty() { "identity".to_string() } else { words.join(", ") }
    );
    let mut r = Report::new(Value::Object(obj));
    r.markdown = Some(md);
    Ok(r)
}

fn reduce(g: &Generator, pde: &PdeInstance) -> Result<Report, Failure> {
    let chart = characteristic_invariants(g)?;
    let red = reduce_pde(pde, &chart)?;
    let [x, y, t] = chart.inverse.clone().map(|e| e.to_string());
    let mut r = Report::new(json!({
        "generator": label(g),
        "xi": chart.xi.to_string(),
        "eta": chart.eta.to_string(),
        "inverse": { "x": x, "y": y, "t": t },
        "reduced": red.residual.to_string(),
    }));
    r.markdown = Some(format!(
        "| generator | xi | eta | reduced equation |\n|---|---|---|---|\n| {} | {} | {} | {} = 0 |\n",
        md_escape(&label(g)),
        md_escape(&chart.xi.to_string()),
        md_escape(&chart.eta.to_string()),
        md_escape(&red.residual.to_string())
    ));
    Ok(r)
}

/// Index of the printed row whose generator equals `g`.
fn printed_row_of(g: &Generator) -> Result<Option<usize>, Failure> {
    for (i, spec) in PRINTED_CHART_GENERATORS.iter().enumerate() {
        if Generator::parse_combination(spec, &Context::default())?.coefficients() == g.coefficients() {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

fn row_audit(row: usize, computed: &Expr, pde: &PdeInstance, seed: u64, tol: f64) -> Result<(Value, bool), Failure> {
    let g = Generator::parse_combination(PRINTED_CHART_GENERATORS[row], &Context::default())?;
    let chart = characteristic_invariants(&g)?;
    let printed = parse(PRINTED_REDUCTIONS[row], &Context::default())?;
    let diff: Vec<Value> = term_diff(computed, &printed)
        .into_iter()
        .map(|d| json!({ "term": d.term, "computed": d.computed.to_string(), "printed": d.printed.to_string() }))
        .collect();
    let duplicate_of: Vec<usize> =
        (0..PRINTED_REDUCTIONS.len()).filter(|&j| j != row && PRINTED_REDUCTIONS[j] == PRINTED_REDUCTIONS[row]).map(|j| j + 1).collect();
    let pv = verify_reduction(pde, &chart, &ReducedPde { residual: printed.clone() }, seed);
    let differs = !diff.is_empty();
    Ok((
        json!({
            "row": row + 1,
            "generator": PRINTED_CHART_GENERATORS[row],
            "printed": printed.to_string(),
            "diff": diff,
            "duplicate_of": duplicate_of,
            "printed_passes": pv.max_discrepancy < tol,
            "printed_max_discrepancy": pv.max_discrepancy,
        }),
        differs,
    ))
}

fn verify_one_reduction(g: &Generator, pde: &PdeInstance, seed: u64, tol: f64) -> Result<Report, Failure> {
    let chart = characteristic_invariants(g)?;
    let red = reduce_pde(pde, &chart)?;
    let rep = verify_reduction(pde, &chart, &red, seed);
    let passed = rep.max_discrepancy < tol;
    let mut obj = json!({
        "generator": label(g),
        "reduced": red.residual.to_string(),
        "passed": passed,
        "max_discrepancy": rep.max_discrepancy,
        "tolerance": tol,
        "seed": seed,
        "functions": rep.functions,
        "points": rep.points,
    });
    let mut mismatch = !passed;
    let mut md = format!(
        "| generator | reduced equation | passed | max discrepancy |\n|---|---|---|---|\n| {} | {} = 0 | {passed} | {:e} |\n",
        md_escape(&label(g)),
        md_escape(&red.residual.to_string()),
        rep.max_discrepancy
    );
    // printed rows are only compared for the unmodified equation
    let symbolic = pde.residual() == PdeInstance::viscoelastic().residual();
    if let (true, Some(row)) = (symbolic, printed_row_of(g)?) {
        let (audit, differs) = row_audit(row, &red.residual, pde, seed, tol)?;
        md.push_str(&format!(
            "\nprinted row {}: {} = 0 ({} differing terms)\n",
            row + 1,
            md_escape(audit["printed"].as_str().unwrap_or("")),
            audit["diff"].as_array().map_or(0, Vec::len)
        ));
        obj["printed_row"] = audit;
        mismatch |= differs;
    }
    let mut r = Report::new(obj);
    r.markdown = Some(md);
    r.mismatch = mismatch;
    Ok(r)
}

fn audit_all_rows(pde: &PdeInstance, seed: u64, tol: f64) -> Result<Report, Failure> {
    if pde.residual() != PdeInstance::viscoelastic().residual() {
        return Err(Failure("the printed-row audit uses the symbolic parameters; drop --a/--b".into()));
    }
    let mut rows = Vec::new();
    let mut mismatch = false;
    let mut md = String::from("| row | generator | computed | printed | differing terms | duplicate of |\n|---|---|---|---|---|---|\n");
    for (i, spec) in PRINTED_CHART_GENERATORS.iter().enumerate() {
        let g = Generator::parse_combination(spec, &Context::default())?;
        let chart = characteristic_invariants(&g)?;
        let red = reduce_pde(pde, &chart)?;
        let rep = verify_reduction(pde, &chart, &red, seed);
        let (mut audit, differs) = row_audit(i, &red.residual, pde, seed, tol)?;
        mismatch |= differs || rep.max_discrepancy >= tol;
        md.push_str(&format!(
            "| {} | {spec} | {} | {} | {} | {:?} |\n",
            i + 1,
            md_escape(&red.residual.to_string()),
            md_escape(audit["printed"].as_str().unwrap_or("")),
            audit["diff"].as_array().map_or(0, Vec::len),
            audit["duplicate_of"].as_array().map(|a| a.iter().filter_map(Value::as_u64).collect::<Vec<_>>()).unwrap_or_default()
        ));
        audit["computed"] = json!(red.residual.to_string());
        audit["computed_passes"] = json!(rep.max_discrepancy < tol);
        rows.push(audit);
    }
    let mut r = Report::new(json!({ "seed": seed, "tolerance": tol, "rows": rows }));
    r.markdown = Some(md);
    r.mismatch = mismatch;
    Ok(r)
}

/// `LO:HI:N`.
pub fn parse_range(text: &str) -> Result<(f64, f64, usize), Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(Failure(format!("expected LO:HI:N, got `{text}`")));
    };
    let value = |s: &str| -> Result<f64, Failure> {
        let e = parse(s, &Context::empty().with_param("pi"))?;
        Ok(liesym::expr::eval_numeric(&e, &liesym::expr::Assignment::new())?)
    };
    Ok((value(lo)?, value(hi)?, n.trim().parse::<usize>()?))
}

/// Seeds as a JSON array of triples, or CSV rows of three numbers with an
/// optional header line.
pub fn parse_seeds(text: &str) -> Result<Vec<[f64; 3]>, Failure> {
    if text.trim_start().starts_with('[') {
        return Ok(serde_json::from_str(text)?);
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let vals: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match vals {
            Ok(v) if v.len() == 3 => out.push([v[0], v[1], v[2]]),
            Err(_) if i == 0 => continue,
            _ => return Err(Failure(format!("seed line {} must hold three numbers", i + 1))),
        }
    }
    Ok(out)
}

fn flow(g: &Generator, seeds: &PathBuf, eps: &str, project_xy: bool) -> Result<Report, Failure> {
    let text = std::fs::read_to_string(seeds).map_err(|e| Failure(format!("{}: {e}", seeds.display())))?;
    let seeds = parse_seeds(&text)?;
    let range = parse_range(eps)?;
    let fm = flow_map(g)?;
    let points: Vec<FlowPoint> = sample_flow(&fm, &seeds, range, project_xy)?;
    let [x, y, t] = fm.components.clone().map(|e| e.to_string());
    let mut r = Report::new(json!({
        "generator": label(g),
        "map": { "x": x, "y": y, "t": t },
        "project_xy": project_xy,
        "points": points,
    }));
    r.csv = Some(csv_string(&points)?);
    Ok(r)
}
