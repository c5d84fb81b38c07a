//! A small straight-line language of scalar Gaussian variables with exact
//! observations.
//!
//! ```text
//! x ~ normal(0, 1)
//! y ~ normal(0, 1)
//! observe x == y
//! return x
//! ```
//!
//! Programs are interpreted eagerly over one joint [`ExtendedGaussian`]
//! holding every variable defined so far.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::gaussex::{ExtendedGaussian, ExtendedGaussianMap};
use crate::linalg::{self, Matrix, Vector};
use crate::subspace::{Subspace, Tolerance};

/// A 1-based source position. Spans never take part in AST equality.
#[derive(Debug, Clone, Copy, Default, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Op {
    Add,
    Sub,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Num(f64),
    Var(String, #[serde(skip)] Span),
    /// `c * x`
    Scaled(f64, String, #[serde(skip)] Span),
    Paren(Box<Expr>),
    Neg(Box<Expr>),
    Binary(Box<Expr>, Op, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Dist {
    Normal {
        mean: Expr,
        variance: f64,
        #[serde(skip)]
        variance_span: Span,
    },
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StmtKind {
    Sample(String, Dist),
    Assign(String, Expr),
    Observe(Expr, Expr),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stmt {
    pub kind: StmtKind,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub stmts: Vec<Stmt>,
    pub returns: Vec<String>,
    #[serde(skip)]
    pub return_spans: Vec<Span>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DslError {
    #[error("parse error at {span}: {message}")]
    Parse { span: Span, message: String },
    #[error("type error at {span}: {message}")]
    Type { span: Span, message: String },
    #[error("infeasible observation at {span}: residual {distance:e} exceeds {bound:e}")]
    Infeasible {
        span: Span,
        distance: f64,
        bound: f64,
    },
    #[error("numerical error: {0}")]
    Numeric(#[from] Error),
}

pub type DslResult<T> = std::result::Result<T, DslError>;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Tilde,
    Assign,
    EqEq,
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    Comma,
    Semi,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(x) => write!(f, "number {x}"),
            Tok::Tilde => f.write_str("`~`"),
            Tok::Assign => f.write_str("`=`"),
            Tok::EqEq => f.write_str("`==`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const KEYWORDS: [&str; 4] = ["observe", "return", "normal", "uniform"];

fn lex(text: &str) -> DslResult<Vec<(Tok, Span)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() || c == '.' {
            i = scan_number(&chars, i);
            let s: String = chars[start..i].iter().collect();
            let x = s.parse::<f64>().map_err(|_| DslError::Parse {
                span,
                message: format!("malformed number `{s}`"),
            })?;
            Tok::Number(x)
        } else {
            let next = chars.get(i + 1).copied();
            i += 1;
            match (c, next) {
                ('=', Some('=')) => {
                    i += 1;
                    Tok::EqEq
                }
                ('=', _) => Tok::Assign,
                ('~', _) => Tok::Tilde,
                ('+', _) => Tok::Plus,
                ('-', _) => Tok::Minus,
                ('*', _) => Tok::Star,
                ('(', _) => Tok::LParen,
                (')', _) => Tok::RParen,
                (',', _) => Tok::Comma,
                (';', _) => Tok::Semi,
                _ => {
                    return Err(DslError::Parse {
                        span,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            }
        };
        col += i - start;
        out.push((tok, span));
    }
    out.push((Tok::Eof, Span { line, col }));
    Ok(out)
}

fn scan_number(chars: &[char], mut i: usize) -> usize {
    while i < chars.len() && chars[i].is_ascii_digit() {
        i += 1;
    }
    if i < chars.len() && chars[i] == '.' {
        i += 1;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
        let mut j = i + 1;
        if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
            j += 1;
        }
        if j < chars.len() && chars[j].is_ascii_digit() {
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> DslResult<T> {
        Err(DslError::Parse {
            span: self.span(),
            message: format!("expected {expected}, found {}", self.peek()),
        })
    }

    fn expect(&mut self, tok: Tok) -> DslResult<Span> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            self.error(&tok.to_string())
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> DslResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let span = self.bump().1;
                Ok((s, span))
            }
            Tok::Ident(s) => Err(DslError::Parse {
                span: self.span(),
                message: format!("`{s}` is a reserved word"),
            }),
            _ => self.error("a variable name"),
        }
    }

    fn program(&mut self) -> DslResult<Program> {
        let mut stmts = Vec::new();
        while !self.is_keyword("return") {
            if *self.peek() == Tok::Eof {
                return self.error("`return`");
            }
            stmts.push(self.stmt()?);
            self.skip_semis();
        }
        self.bump();
        let mut returns = Vec::new();
        let mut return_spans = Vec::new();
        loop {
            let (name, span) = self.ident()?;
            returns.push(name);
            return_spans.push(span);
            if *self.peek() != Tok::Comma {
                break;
            }
            self.bump();
        }
        self.skip_semis();
        if *self.peek() != Tok::Eof {
            return self.error("end of input after `return`");
        }
        Ok(Program {
            stmts,
            returns,
            return_spans,
        })
    }

    fn skip_semis(&mut self) {
        while *self.peek() == Tok::Semi {
            self.bump();
        }
    }

    fn stmt(&mut self) -> DslResult<Stmt> {
        let span = self.span();
        if self.is_keyword("observe") {
            self.bump();
            let lhs = self.expr()?;
            self.expect(Tok::EqEq)?;
            let rhs = self.expr()?;
            return Ok(Stmt {
                kind: StmtKind::Observe(lhs, rhs),
                span,
            });
        }
        let (name, _) = self.ident()?;
        let kind = match self.peek() {
            Tok::Tilde => {
                self.bump();
                StmtKind::Sample(name, self.dist()?)
            }
            Tok::Assign => {
                self.bump();
                StmtKind::Assign(name, self.expr()?)
            }
            _ => return self.error("`~` or `=`"),
        };
        Ok(Stmt { kind, span })
    }

    fn dist(&mut self) -> DslResult<Dist> {
        if self.is_keyword("uniform") {
            self.bump();
            self.expect(Tok::LParen)?;
            self.expect(Tok::RParen)?;
            return Ok(Dist::Uniform);
        }
        if !self.is_keyword("normal") {
            return self.error("`normal` or `uniform`");
        }
        self.bump();
        self.expect(Tok::LParen)?;
        let mean = self.expr()?;
        self.expect(Tok::Comma)?;
        let variance_span = self.span();
        let sign = if *self.peek() == Tok::Minus {
            self.bump();
            -1.0
        } else {
            1.0
        };
        let variance = match self.peek() {
            Tok::Number(x) => sign * *x,
            _ => return self.error("a variance literal"),
        };
        self.bump();
        self.expect(Tok::RParen)?;
        Ok(Dist::Normal {
            mean,
            variance,
            variance_span,
        })
    }

    fn expr(&mut self) -> DslResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => Op::Add,
                Tok::Minus => Op::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(Box::new(lhs), op, Box::new(rhs));
        }
    }

    fn term(&mut self) -> DslResult<Expr> {
        match self.peek().clone() {
            Tok::Number(x) => {
                self.bump();
                if *self.peek() == Tok::Star {
                    self.bump();
                    let (name, span) = self.ident()?;
                    Ok(Expr::Scaled(x, name, span))
                } else {
                    Ok(Expr::Num(x))
                }
            }
            Tok::Ident(_) => {
                let (name, span) = self.ident()?;
                Ok(Expr::Var(name, span))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::Paren(Box::new(inner)))
            }
            Tok::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.term()?)))
            }
            _ => self.error("an expression"),
        }
    }
}

/// Parses and checks a program.
pub fn parse(text: &str) -> DslResult<Program> {
    let program = parse_syntax(text)?;
    check(&program)?;
    Ok(program)
}

/// Parses without scope or variance checks.
pub fn parse_syntax(text: &str) -> DslResult<Program> {
    let toks = lex(text)?;
    Parser { toks, pos: 0 }.program()
}

/// Define-before-use, no redefinition, nonnegative variances.
pub fn check(p: &Program) -> DslResult<()> {
    let mut defined: HashMap<&str, Span> = HashMap::new();
    for stmt in &p.stmts {
        match &stmt.kind {
            StmtKind::Sample(name, dist) => {
                if let Dist::Normal {
                    mean,
                    variance,
                    variance_span,
                } = dist
                {
                    check_expr(mean, &defined)?;
                    if !(*variance >= 0.0 && variance.is_finite()) {
                        return Err(DslError::Type {
                            span: *variance_span,
                            message: format!("variance must be a nonnegative number, got {variance}"),
                        });
                    }
                }
                define(name, stmt.span, &mut defined)?;
            }
            StmtKind::Assign(name, e) => {
                check_expr(e, &defined)?;
                define(name, stmt.span, &mut defined)?;
            }
            StmtKind::Observe(a, b) => {
                check_expr(a, &defined)?;
                check_expr(b, &defined)?;
            }
        }
    }
    for (name, span) in p.returns.iter().zip(&p.return_spans) {
        if !defined.contains_key(name.as_str()) {
            return Err(undefined(name, *span));
        }
    }
    Ok(())
}

fn define<'a>(name: &'a str, span: Span, defined: &mut HashMap<&'a str, Span>) -> DslResult<()> {
    if let Some(first) = defined.insert(name, span) {
        return Err(DslError::Type {
            span,
            message: format!("`{name}` is already defined at {first}"),
        });
    }
    Ok(())
}

fn undefined(name: &str, span: Span) -> DslError {
    DslError::Type {
        span,
        message: format!("undefined variable `{name}`"),
    }
}

fn check_expr(e: &Expr, defined: &HashMap<&str, Span>) -> DslResult<()> {
    match e {
        Expr::Num(_) => Ok(()),
        Expr::Var(name, span) | Expr::Scaled(_, name, span) => {
            if defined.contains_key(name.as_str()) {
                Ok(())
            } else {
                Err(undefined(name, *span))
            }
        }
        Expr::Paren(inner) | Expr::Neg(inner) => check_expr(inner, defined),
        Expr::Binary(a, _, b) => {
            check_expr(a, defined)?;
            check_expr(b, defined)
        }
    }
}

/// `coeffs · state + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineForm {
    pub coeffs: Vector,
    pub constant: f64,
}

impl AffineForm {
    fn scaled(&self, k: f64) -> Self {
        Self {
            coeffs: &self.coeffs * k,
            constant: self.constant * k,
        }
    }
}

/// Compiles `e` over variables laid out as `vars`.
pub fn compile_expr(e: &Expr, vars: &[String]) -> DslResult<AffineForm> {
    let n = vars.len();
    let unit = |name: &str, span: Span, k: f64| -> DslResult<AffineForm> {
        let i = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| undefined(name, span))?;
        let mut coeffs = Vector::zeros(n);
        coeffs[i] = k;
        Ok(AffineForm {
            coeffs,
            constant: 0.0,
        })
    };
    match e {
        Expr::Num(x) => Ok(AffineForm {
            coeffs: Vector::zeros(n),
            constant: *x,
        }),
        Expr::Var(name, span) => unit(name, *span, 1.0),
        Expr::Scaled(k, name, span) => unit(name, *span, *k),
        Expr::Paren(inner) => compile_expr(inner, vars),
        Expr::Neg(inner) => Ok(compile_expr(inner, vars)?.scaled(-1.0)),
        Expr::Binary(a, op, b) => {
            let a = compile_expr(a, vars)?;
            let b = compile_expr(b, vars)?;
            let sign = if *op == Op::Add { 1.0 } else { -1.0 };
            Ok(AffineForm {
                coeffs: a.coeffs + b.coeffs * sign,
                constant: a.constant + sign * b.constant,
            })
        }
    }
}

/// Posterior over the returned variables.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorReport {
    pub variables: Vec<String>,
    pub dist: ExtendedGaussian,
    pub tolerance: Tolerance,
    pub feasible: bool,
}

/// Wire form `{"variables", "mean", "cov", "nondet_basis", "tolerance"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorJson {
    pub variables: Vec<String>,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub nondet_basis: Vec<Vec<f64>>,
    pub tolerance: f64,
}

impl PosteriorReport {
    pub fn to_json(&self) -> PosteriorJson {
        let d = self.dist.to_json();
        PosteriorJson {
            variables: self.variables.clone(),
            mean: d.mean,
            cov: d.cov,
            nondet_basis: d.nondet_basis,
            tolerance: self.tolerance.eq_abs_tol,
        }
    }

    pub fn to_pretty(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("variables: {}\n", self.variables.join(", ")));
        out.push_str(&format!("mean: {}\n", fmt_row(self.dist.mean().as_slice())));
        out.push_str("cov:\n");
        for r in linalg::matrix_to_rows(self.dist.cov()) {
            out.push_str(&format!("  {}\n", fmt_row(&r)));
        }
        let basis = self.dist.nondet().basis_vectors();
        if basis.is_empty() {
            out.push_str("nondet_basis: none\n");
        } else {
            out.push_str("nondet_basis:\n");
            for b in basis {
                out.push_str(&format!("  {}\n", fmt_row(b.as_slice())));
            }
        }
        out.push_str(&format!("tolerance: {:e}\n", self.tolerance.eq_abs_tol));
        out
    }
}

fn fmt_row(xs: &[f64]) -> String {
    let cells: Vec<String> = xs
        .iter()
        .map(|x| {
            let x = if x.abs() < 1e-15 { 0.0 } else { *x };
            format!("{x:.6}")
        })
        .collect();
    format!("[{}]", cells.join(", "))
}

fn row(v: &Vector) -> Matrix {
    Matrix::from_row_slice(1, v.len(), v.as_slice())
}

/// Joint state over the variables defined so far.
#[derive(Debug, Clone)]
pub struct State {
    pub vars: Vec<String>,
    pub joint: ExtendedGaussian,
}

impl State {
    pub fn new() -> Self {
        Self {
            vars: Vec::new(),
            joint: ExtendedGaussian::dirac(Vector::zeros(0)),
        }
    }

    /// Appends `form(state) + N(0, variance)` as a new coordinate.
    fn extend(&mut self, name: &str, form: &AffineForm, variance: f64, tol: Tolerance) -> DslResult<()> {
        let n = self.vars.len();
        let a = linalg::vstack(&[&Matrix::identity(n, n), &row(&form.coeffs)]);
        let mean = linalg::concat(&Vector::zeros(n), &Vector::from_element(1, form.constant));
        let mut cov = Matrix::zeros(n + 1, n + 1);
        cov[(n, n)] = variance;
        let step = ExtendedGaussianMap::new(Subspace::zero(n + 1), a, mean, cov, tol)?;
        self.joint = self.joint.push_through(&step, tol)?;
        self.vars.push(name.to_string());
        Ok(())
    }

    pub fn exec(&mut self, stmt: &Stmt, tol: Tolerance) -> DslResult<()> {
        match &stmt.kind {
            StmtKind::Sample(name, Dist::Normal { mean, variance, .. }) => {
                let form = compile_expr(mean, &self.vars)?;
                self.extend(name, &form, *variance, tol)
            }
            StmtKind::Sample(name, Dist::Uniform) => {
                self.joint = self.joint.tensor(&ExtendedGaussian::uniform(1), tol);
                self.vars.push(name.clone());
                Ok(())
            }
            StmtKind::Assign(name, e) => {
                let form = compile_expr(e, &self.vars)?;
                self.extend(name, &form, 0.0, tol)
            }
            StmtKind::Observe(lhs, rhs) => {
                let a = compile_expr(lhs, &self.vars)?;
                let b = compile_expr(rhs, &self.vars)?;
                let l = row(&(a.coeffs - b.coeffs));
                let c = Vector::from_element(1, b.constant - a.constant);
                self.joint = self.joint.observe(&l, &c, tol).map_err(|e| match e {
                    Error::InfeasibleObservation { distance, bound } => DslError::Infeasible {
                        span: stmt.span,
                        distance,
                        bound,
                    },
                    other => DslError::Numeric(other),
                })?;
                Ok(())
            }
        }
    }

    pub fn marginal(&self, names: &[String], tol: Tolerance) -> DslResult<ExtendedGaussian> {
        let coords: Vec<usize> = names
            .iter()
            .map(|n| {
                self.vars
                    .iter()
                    .position(|v| v == n)
                    .ok_or_else(|| undefined(n, Span::default()))
            })
            .collect::<DslResult<_>>()?;
        Ok(self.joint.marginal(&coords, tol)?)
    }
}

impl Default for State {
    fn default() -> Self {
        Self::new()
    }
}

/// Runs a checked program and marginalizes onto its return list.
pub fn interpret(p: &Program, tol: Tolerance) -> DslResult<PosteriorReport> {
    let mut state = State::new();
    for stmt in &p.stmts {
        state.exec(stmt, tol)?;
    }
    Ok(PosteriorReport {
        variables: p.returns.clone(),
        dist: state.marginal(&p.returns, tol)?,
        tolerance: tol,
        feasible: true,
    })
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Var(name, _) => f.write_str(name),
            Expr::Scaled(k, name, _) => write!(f, "{k} * {name}"),
            Expr::Paren(inner) => write!(f, "({inner})"),
            Expr::Neg(inner) => write!(f, "-{inner}"),
            Expr::Binary(a, op, b) => {
                let sym = if *op == Op::Add { '+' } else { '-' };
                write!(f, "{a} {sym} {b}")
            }
        }
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            StmtKind::Sample(name, Dist::Normal { mean, variance, .. }) => {
                write!(f, "{name} ~ normal({mean}, {variance})")
            }
            StmtKind::Sample(name, Dist::Uniform) => write!(f, "{name} ~ uniform()"),
            StmtKind::Assign(name, e) => write!(f, "{name} = {e}"),
            StmtKind::Observe(a, b) => write!(f, "observe {a} == {b}"),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.stmts {
            writeln!(f, "{s}")?;
        }
        writeln!(f, "return {}", self.returns.join(", "))
    }
}

/// Canonical source text for `p`.
pub fn pretty_print(p: &Program) -> String {
    p.to_string()
}
