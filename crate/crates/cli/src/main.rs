//! `qjacobi`: tables and verification for the 2x2 matrix-valued little
//! q-Jacobi family, with exact rationals across the CLI boundary.
//!
//! Exit codes: 0 success, 1 failed verification, 2 invalid parameters.

mod emit;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qjacobi_core::error::Error;
use qjacobi_core::lqjacobi::{
    lqj_eigenvalue, lqj_moment_ratio, lqj_norm_ratio, lqj_poly, lqj_recurrence, ScalarParams,
};
use qjacobi_core::mvlqj::{Family, FamilyParams};
use qjacobi_core::scalar::{parse_decimal, parse_rational, rat_str, ExactScalar, Rat};
use qjacobi_core::verify;
use qjacobi_core::{MatPoly, QBase};

#[derive(Parser)]
#[command(
    name = "qjacobi",
    version,
    about = "Exact tables and cross-validation for matrix-valued little q-Jacobi polynomials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Base of the q-lattice as an exact rational p/q, 0 < q < 1.
    #[arg(long, default_value = "1/2", global = true, allow_hyphen_values = true)]
    q: String,

    /// Parameter a as p/q, with 0 < a < 1/q.
    #[arg(long, default_value = "1/4", global = true, allow_hyphen_values = true)]
    a: String,

    /// Parameter b as p/q, with b < 1/q.
    #[arg(long, default_value = "1/2", global = true, allow_hyphen_values = true)]
    b: String,

    /// Parameter v as p/q or p/q+r/si (e.g. 0/1+1/1i for the imaginary unit).
    #[arg(long, default_value = "1/1", global = true, allow_hyphen_values = true)]
    v: String,

    /// Largest degree (or lattice depth) in emitted tables.
    #[arg(long, default_value_t = 6, global = true)]
    nmax: usize,

    /// Single index to emit instead of the whole table.
    #[arg(long, global = true)]
    n: Option<usize>,

    /// exact emits rationals only; certified adds enclosure columns.
    #[arg(long, value_enum, default_value_t = Mode::Exact, global = true)]
    mode: Mode,

    /// Tolerance for certified enclosures, as a decimal such as 1e-12.
    #[arg(long, default_value = "1e-12", global = true)]
    tol: String,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Certified,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the parameter domain (and compute m_0 in certified mode).
    Check,
    /// Weight matrices W(q^x) for x = 0..=nmax.
    Weight,
    /// Normalized moment matrices (series enclosures in certified mode).
    Moments,
    /// Monic polynomials from moments alone (Gram-Schmidt).
    Gram,
    /// Monic polynomials from the explicit closed form.
    Explicit,
    /// Operator eigenvalue matrices Lambda_n.
    Eigen,
    /// Three-term recurrence coefficients (A_n, B_n, C_n) for n >= 1.
    Recurrence,
    /// Rodrigues-formula polynomials with their leading constants.
    Rodrigues,
    /// Terminating 2eta1 row representations of the tilde polynomials.
    Eta,
    /// Pointwise symmetry report of the operator against the weight.
    Symmetry,
    /// Scalar little q-Jacobi tables at (q, a, b).
    Scalar,
    /// Run the full cross-validation suite; exit 0 iff all checks pass.
    Verify,
    /// Adjudicate the product-form vs displayed-form weight candidates.
    DiagnoseWeight,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(Error::DomainViolation(msg)) => {
            eprintln!("parameter error: {msg}");
            ExitCode::from(2)
        }
        Err(Error::Parse(msg)) => {
            eprintln!("parse error: {msg}");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> qjacobi_core::Result<ExitCode> {
    let base = QBase::new(parse_rational(&cli.q)?)?;
    let a = parse_rational(&cli.a)?;
    let b = parse_rational(&cli.b)?;
    let v = ExactScalar::parse(&cli.v)?;
    let tol = parse_decimal(&cli.tol)?;
    let family = Family::new(FamilyParams::new(base.clone(), a.clone(), b.clone(), v)?);
    let scalar_params = ScalarParams::new(base, a, b)?;
    let indices: Vec<usize> = match cli.n {
        Some(n) => vec![n],
        None => (0..=cli.nmax).collect(),
    };

    let mut exit = ExitCode::SUCCESS;
    let report: Report = match &cli.command {
        Command::Check => {
            let mut obj = serde_json::json!({
                "q": cli.q, "a": cli.a, "b": cli.b, "v": cli.v,
                "valid": true,
            });
            if cli.mode == Mode::Certified {
                let m0 = family.m0_enclosure(&tol)?;
                obj["m0"] = emit::certified_to_json(&m0);
            }
            Report::Value(obj)
        }
        Command::Weight => Report::Table(
            indices
                .iter()
                .map(|&x| TableEntry {
                    index: x,
                    label: "x",
                    items: vec![("W", Item::Matrix(family.weight_profile(x)))],
                })
                .collect(),
        ),
        Command::Moments => {
            let mut rows = Vec::new();
            for &n in &indices {
                let mut items = vec![("M", Item::Matrix(family.moment_matrix(n)))];
                if cli.mode == Mode::Certified {
                    let series = qjacobi_core::weights::inner_product_series(
                        &MatPoly::monomial(n, qjacobi_core::Mat::identity(2)),
                        &MatPoly::identity(2),
                        &family.qweight(),
                        &tol,
                        family.base_ref(),
                    )?;
                    items.push(("series", Item::CertifiedMatrix(series)));
                }
                rows.push(TableEntry {
                    index: n,
                    label: "n",
                    items,
                });
            }
            Report::Table(rows)
        }
        Command::Gram => {
            let moments = family.moment_provider()?;
            let polys =
                qjacobi_core::weights::gram_schmidt_monic(*indices.last().unwrap(), &moments)?;
            Report::Table(
                indices
                    .iter()
                    .map(|&n| TableEntry {
                        index: n,
                        label: "n",
                        items: vec![("poly", Item::Poly(polys[n].clone()))],
                    })
                    .collect(),
            )
        }
        Command::Explicit => Report::Table(
            indices
                .iter()
                .map(|&n| TableEntry {
                    index: n,
                    label: "n",
                    items: vec![("poly", Item::Poly(family.explicit_monic(n)))],
                })
                .collect(),
        ),
        Command::Eigen => {
            if let Some(n) = cli.n {
                Report::Value(emit::matrix_to_json(&family.eigenvalue(n)))
            } else {
                Report::Table(
                    indices
                        .iter()
                        .map(|&n| TableEntry {
                            index: n,
                            label: "n",
                            items: vec![("Lambda", Item::Matrix(family.eigenvalue(n)))],
                        })
                        .collect(),
                )
            }
        }
        Command::Recurrence => Report::Table(
            indices
                .iter()
                .filter(|&&n| n >= 1)
                .map(|&n| -> qjacobi_core::Result<TableEntry> {
                    let (a_n, b_n, c_n) = family.recurrence_coeffs(n)?;
                    Ok(TableEntry {
                        index: n,
                        label: "n",
                        items: vec![
                            ("A", Item::Matrix(a_n)),
                            ("B", Item::Matrix(b_n)),
                            ("C", Item::Matrix(c_n)),
                        ],
                    })
                })
                .collect::<qjacobi_core::Result<_>>()?,
        ),
        Command::Rodrigues => Report::Table(
            indices
                .iter()
                .map(|&n| -> qjacobi_core::Result<TableEntry> {
                    let rod = family.rodrigues(n)?;
                    Ok(TableEntry {
                        index: n,
                        label: "n",
                        items: vec![
                            ("poly", Item::Poly(rod.poly)),
                            ("L", Item::Matrix(rod.leading)),
                            ("R", Item::Matrix(rod.r_matrix)),
                            ("matches_monic", Item::Flag(rod.matches_monic)),
                            (
                                "printed_R_admissible",
                                Item::Flag(!rod.admissible_printed.is_empty()),
                            ),
                        ],
                    })
                })
                .collect::<qjacobi_core::Result<_>>()?,
        ),
        Command::Eta => {
            let mut rows = Vec::new();
            for &n in &indices {
                for row in [1usize, 2] {
                    let rep = family.eta_representation(n, row)?;
                    rows.push(TableEntry {
                        index: n,
                        label: "n",
                        items: vec![
                            ("row", Item::Index(row)),
                            ("F0", Item::Matrix(rep.f0)),
                            ("A", Item::Matrix(rep.a_param)),
                            ("B", Item::Matrix(rep.b_param)),
                            ("C", Item::Matrix(rep.c_param)),
                            ("poly", Item::Poly(rep.row_poly)),
                        ],
                    });
                }
            }
            Report::Table(rows)
        }
        Command::Symmetry => {
            let x_max = cli.n.unwrap_or(cli.nmax.max(1));
            let report = family.operator().symmetry_check(&family.qweight(), x_max)?;
            if !report.passed() {
                exit = ExitCode::from(1);
            }
            Report::Value(report.to_json())
        }
        Command::Scalar => Report::Table(
            indices
                .iter()
                .map(|&n| {
                    let (a_n, c_n) = lqj_recurrence(n, &scalar_params);
                    TableEntry {
                        index: n,
                        label: "n",
                        items: vec![
                            ("poly", Item::Poly(lqj_poly(n as i64, &scalar_params))),
                            (
                                "moment_ratio",
                                Item::Rational(lqj_moment_ratio(n, &scalar_params)),
                            ),
                            (
                                "norm_ratio",
                                Item::Rational(lqj_norm_ratio(n, &scalar_params)),
                            ),
                            ("A", Item::Rational(a_n)),
                            ("C", Item::Rational(c_n)),
                            (
                                "lambda",
                                Item::Rational(lqj_eigenvalue(n, &scalar_params)),
                            ),
                        ],
                    }
                })
                .collect(),
        ),
        Command::Verify => {
            let results = verify::run_full_suite(&family, cli.nmax)?;
            if results.iter().any(|r| !r.pass) {
                exit = ExitCode::from(1);
            }
            Report::Checks(results)
        }
        Command::DiagnoseWeight => {
            let diagnosis = verify::diagnose_weight(&family, cli.nmax.max(8), 2)?;
            Report::Value(diagnosis.to_json())
        }
    };

    let rendered = render(&report, cli.format);
    match &cli.out {
        Some(path) => {
            std::fs::write(path, rendered.as_bytes())
                .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(rendered.as_bytes())
                .and_then(|_| stdout.write_all(b"\n"))
                .map_err(|e| Error::Parse(format!("cannot write stdout: {e}")))?;
        }
    }
    Ok(exit)
}

enum Item {
    Matrix(qjacobi_core::Mat),
    CertifiedMatrix(qjacobi_core::CertifiedMat),
    Poly(MatPoly),
    Rational(Rat),
    Flag(bool),
    Index(usize),
}

struct TableEntry {
    index: usize,
    label: &'static str,
    items: Vec<(&'static str, Item)>,
}

enum Report {
    Value(serde_json::Value),
    Table(Vec<TableEntry>),
    Checks(Vec<verify::CheckResult>),
}

fn item_to_json(item: &Item) -> serde_json::Value {
    match item {
        Item::Matrix(m) => emit::matrix_to_json(m),
        Item::CertifiedMatrix(c) => serde_json::Value::Array(
            (0..c.rows())
                .map(|i| {
                    serde_json::Value::Array(
                        (0..c.cols())
                            .map(|j| emit::certified_scalar_to_json(c.entry(i, j)))
                            .collect(),
                    )
                })
                .collect(),
        ),
        Item::Poly(p) => emit::poly_to_json(p),
        Item::Rational(r) => serde_json::Value::String(rat_str(r)),
        Item::Flag(b) => serde_json::Value::Bool(*b),
        Item::Index(n) => serde_json::Value::Number((*n).into()),
    }
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => render_json(report).to_string(),
        Format::Csv => render_csv(report),
        Format::Pretty => render_pretty(report),
    }
}

fn render_json(report: &Report) -> serde_json::Value {
    match report {
        Report::Value(v) => v.clone(),
        Report::Table(entries) => serde_json::Value::Array(
            entries
                .iter()
                .map(|e| {
                    let mut obj = serde_json::Map::new();
                    obj.insert(e.label.to_string(), serde_json::Value::Number(e.index.into()));
                    for (key, item) in &e.items {
                        obj.insert(key.to_string(), item_to_json(item));
                    }
                    serde_json::Value::Object(obj)
                })
                .collect(),
        ),
        Report::Checks(results) => serde_json::Value::Array(
            results
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "check": r.name,
                        "pass": r.pass,
                        "detail": r.detail,
                    })
                })
                .collect(),
        ),
    }
}

fn render_csv(report: &Report) -> String {
    let mut lines: Vec<String> = Vec::new();
    match report {
        Report::Value(v) => {
            // A bare matrix renders as header-free rows; other values render
            // as one JSON field per line.
            if let Ok(m) = emit::matrix_from_json(v) {
                lines.extend(emit::matrix_to_csv(&m));
            } else {
                lines.push(emit::csv_field(&v.to_string()));
            }
        }
        Report::Table(entries) => {
            for e in entries {
                for (key, item) in &e.items {
                    match item {
                        Item::Matrix(m) => {
                            for (i, row) in emit::matrix_to_csv(m).into_iter().enumerate() {
                                lines.push(format!(
                                    "{},{},{},{}",
                                    e.index,
                                    emit::csv_field(key),
                                    i,
                                    row
                                ));
                            }
                        }
                        other => lines.push(emit::csv_row(&[
                            e.index.to_string(),
                            key.to_string(),
                            item_scalar_string(other),
                        ])),
                    }
                }
            }
        }
        Report::Checks(results) => {
            for r in results {
                lines.push(emit::csv_row(&[
                    r.name.clone(),
                    if r.pass { "pass" } else { "fail" }.to_string(),
                    r.detail.clone(),
                ]));
            }
        }
    }
    lines.join("\n")
}

fn item_scalar_string(item: &Item) -> String {
    match item {
        Item::Rational(r) => rat_str(r),
        Item::Flag(b) => b.to_string(),
        Item::Index(n) => n.to_string(),
        Item::Poly(p) => p.to_json().to_string(),
        Item::Matrix(m) => emit::matrix_to_json(m).to_string(),
        Item::CertifiedMatrix(_) => item_to_json(item).to_string(),
    }
}

fn render_pretty(report: &Report) -> String {
    match report {
        Report::Value(v) => {
            if let Ok(m) = emit::matrix_from_json(v) {
                emit::matrix_to_pretty(&m)
            } else {
                serde_json::to_string_pretty(v).expect("valid JSON")
            }
        }
        Report::Table(entries) => {
            let mut out = String::new();
            for e in entries {
                out.push_str(&format!("{} = {}\n", e.label, e.index));
                for (key, item) in &e.items {
                    match item {
                        Item::Matrix(m) => {
                            out.push_str(&format!("  {key}:\n"));
                            for line in emit::matrix_to_pretty(m).lines() {
                                out.push_str(&format!("    {line}\n"));
                            }
                        }
                        other => {
                            out.push_str(&format!("  {key}: {}\n", item_scalar_string(other)))
                        }
                    }
                }
            }
            out
        }
        Report::Checks(results) => results
            .iter()
            .map(|r| {
                format!(
                    "{} {} - {}",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                )
            })
            .collect::<Vec<_>>()
            .join("\n"),
    }
}
