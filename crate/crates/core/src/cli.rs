//! The `gx` command-line tool.
//!
//! Exit codes: 0 success, 1 parse/type/usage error, 2 infeasible observation,
//! 3 I/O error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::dsl::{self, DslError, PosteriorReport};
use crate::gaussex::ExtendedGaussian;
use crate::linalg::{Matrix, Vector};
use crate::subspace::{Subspace, Tolerance};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROGRAM: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Environment variable overriding the default equality tolerance.
pub const TOL_ENV: &str = "GX_TOL";

#[derive(Debug, Parser)]
#[command(name = "gx", version, about = "Exact inference for extended Gaussian programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a program and print its posterior.
    Run {
        file: PathBuf,
        /// Equality tolerance (overrides GX_TOL).
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, conflicts_with = "pretty")]
        json: bool,
        #[arg(long)]
        pretty: bool,
    },
    /// Parse and check a program without running it.
    Check { file: PathBuf },
    /// Run a built-in example and compare against its known answer.
    Demo { name: DemoName },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoName {
    #[value(name = "example-2-1")]
    Example21,
    ExactEquality,
    Uninformative,
}

impl DemoName {
    pub const ALL: [DemoName; 3] = [Self::Example21, Self::ExactEquality, Self::Uninformative];

    pub fn name(self) -> &'static str {
        match self {
            Self::Example21 => "example-2-1",
            Self::ExactEquality => "exact-equality",
            Self::Uninformative => "uninformative",
        }
    }

    pub fn source(self) -> &'static str {
        match self {
            Self::Example21 => include_str!("../programs/example-2-1.gx"),
            Self::ExactEquality => include_str!("../programs/exact-equality.gx"),
            Self::Uninformative => include_str!("../programs/uninformative.gx"),
        }
    }

    /// The known answer, built directly from the distribution API.
    pub fn expected(self, tol: Tolerance) -> PosteriorReport {
        let (variables, dist) = match self {
            Self::Example21 => {
                let diag = Subspace::span(2, &[Vector::from_vec(vec![1.0, 1.0])], tol)
                    .expect("diagonal in R^2");
                let cov = Matrix::from_diagonal(&Vector::from_vec(vec![0.0, 2.0]));
                (
                    vec!["z1", "z2"],
                    ExtendedGaussian::new(Vector::zeros(2), cov, diag, tol).expect("valid prior"),
                )
            }
            Self::ExactEquality => (
                vec!["x"],
                ExtendedGaussian::gaussian(Vector::zeros(1), Matrix::from_element(1, 1, 0.5), tol)
                    .expect("valid posterior"),
            ),
            Self::Uninformative => (vec!["x"], ExtendedGaussian::standard_normal(1)),
        };
        PosteriorReport {
            variables: variables.into_iter().map(String::from).collect(),
            dist,
            tolerance: tol,
            feasible: true,
        }
    }
}

/// Resolves the tolerance: flag, then environment, then default.
pub fn resolve_tolerance(flag: Option<f64>, env: Option<&str>) -> Result<Tolerance, String> {
    let eq = match (flag, env) {
        (Some(t), _) => t,
        (None, Some(s)) => s
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("{TOL_ENV}={s:?} is not a number"))?,
        (None, None) => return Ok(Tolerance::default()),
    };
    Tolerance::default().with_eq(eq).map_err(|e| e.to_string())
}

/// Entry point reading `GX_TOL` from the process environment.
pub fn run_cli<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let env = std::env::var(TOL_ENV).ok();
    run_cli_with_env(args, env.as_deref(), out, err)
}

pub fn run_cli_with_env<I, S>(args: I, env_tol: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PROGRAM } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run {
            file,
            tol,
            json,
            pretty: _,
        } => run(&file, tol, env_tol, json, out, err),
        Command::Check { file } => check(&file, out, err),
        Command::Demo { name } => demo(name, env_tol, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_IO
        }
    }
}

fn read(file: &PathBuf, err: &mut dyn Write) -> std::io::Result<Option<String>> {
    match std::fs::read_to_string(file) {
        Ok(text) => Ok(Some(text)),
        Err(e) => {
            writeln!(err, "error: cannot read {}: {e}", file.display())?;
            Ok(None)
        }
    }
}

fn report_error(file: &str, e: &DslError, err: &mut dyn Write) -> std::io::Result<i32> {
    let (span, code) = match e {
        DslError::Parse { span, .. } | DslError::Type { span, .. } => (Some(*span), EXIT_PROGRAM),
        DslError::Infeasible { span, .. } => (Some(*span), EXIT_INFEASIBLE),
        DslError::Numeric(_) => (None, EXIT_PROGRAM),
    };
    match span {
        Some(s) => writeln!(err, "{file}:{}:{}: {e}", s.line, s.col)?,
        None => writeln!(err, "{file}: {e}")?,
    }
    Ok(code)
}

fn run(
    file: &PathBuf,
    tol: Option<f64>,
    env_tol: Option<&str>,
    json: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> std::io::Result<i32> {
    let tol = match resolve_tolerance(tol, env_tol) {
        Ok(t) => t,
        Err(msg) => {
            writeln!(err, "error: {msg}")?;
            return Ok(EXIT_PROGRAM);
        }
    };
    let Some(text) = read(file, err)? else {
        return Ok(EXIT_IO);
    };
    let name = file.display().to_string();
    let report = match dsl::parse(&text).and_then(|p| dsl::interpret(&p, tol)) {
        Ok(r) => r,
        Err(e) => return report_error(&name, &e, err),
    };
    if json {
        writeln!(out, "{}", to_json_line(&report))?;
    } else {
        write!(out, "{}", report.to_pretty())?;
    }
    Ok(EXIT_OK)
}

fn check(file: &PathBuf, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    let Some(text) = read(file, err)? else {
        return Ok(EXIT_IO);
    };
    let name = file.display().to_string();
    match dsl::parse(&text) {
        Ok(p) => {
            writeln!(out, "{name}: ok ({} statements, returns {})", p.stmts.len(), p.returns.join(", "))?;
            Ok(EXIT_OK)
        }
        Err(e) => report_error(&name, &e, err),
    }
}

fn to_json_line(r: &PosteriorReport) -> String {
    serde_json::to_string(&r.to_json()).expect("report serializes")
}

fn demo(name: DemoName, env_tol: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    let tol = match resolve_tolerance(None, env_tol) {
        Ok(t) => t,
        Err(msg) => {
            writeln!(err, "error: {msg}")?;
            return Ok(EXIT_PROGRAM);
        }
    };
    let program = dsl::parse(name.source()).expect("built-in program parses");
    let report = match dsl::interpret(&program, tol) {
        Ok(r) => r,
        Err(e) => return report_error(name.name(), &e, err),
    };
    let expected = name.expected(tol);
    let agrees = report.variables == expected.variables && report.dist.equals(&expected.dist, tol);

    writeln!(out, "demo {}", name.name())?;
    writeln!(out, "program:")?;
    for line in dsl::pretty_print(&program).lines() {
        writeln!(out, "  {line}")?;
    }
    writeln!(out, "computed: {}", to_json_line(&report))?;
    writeln!(out, "expected: {}", to_json_line(&expected))?;
    match name {
        DemoName::Example21 => {
            let basis = report.dist.nondet().basis_vectors();
            let spans: Vec<String> = basis.iter().map(|b| format!("{:.6?}", b.as_slice())).collect();
            writeln!(out, "nondet_basis: {}", spans.join(", "))?;
            let functional = Vector::from_vec(vec![-1.0, 1.0]);
            let var = (functional.transpose() * report.dist.cov() * &functional)[(0, 0)];
            writeln!(out, "variance of z2 - z1 (spans D^perp): computed {var:.10}, expected 2")?;
        }
        DemoName::ExactEquality => {
            writeln!(out, "variance of x: computed {:.10}, expected 0.5", report.dist.cov()[(0, 0)])?;
        }
        DemoName::Uninformative => {
            writeln!(
                out,
                "x: computed N({:.10}, {:.10}), expected N(0, 1)",
                report.dist.mean()[0],
                report.dist.cov()[(0, 0)]
            )?;
        }
    }
    writeln!(out, "agreement: {}", if agrees { "yes" } else { "no" })?;
    Ok(if agrees { EXIT_OK } else { EXIT_PROGRAM })
}
