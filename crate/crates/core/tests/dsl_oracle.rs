//! The interpreter against an independent noise-matrix model, plus parser
//! round trips.

mod common;

use common::*;
use extgauss::cli::DemoName;
use extgauss::dsl::{self, DslError};
use extgauss::{ExtendedGaussian, Matrix, Subspace, Vector};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;

/// Every variable is `constant + G g + U u` with `g` standard normal noise
/// and `u` free nondeterministic parameters.
struct Model {
    names: Vec<String>,
    constant: Vec<f64>,
    gauss: Vec<Vec<f64>>,
    free: Vec<Vec<f64>>,
}

impl Model {
    fn new() -> Self {
        Self {
            names: Vec::new(),
            constant: Vec::new(),
            gauss: Vec::new(),
            free: Vec::new(),
        }
    }

    fn push(&mut self, name: String, constant: f64, gauss: Vec<f64>, free: Vec<f64>) {
        self.names.push(name);
        self.constant.push(constant);
        self.gauss.push(gauss);
        self.free.push(free);
    }

    /// Linear combination of existing rows plus fresh noise.
    fn combine(&self, coeffs: &[(usize, f64)], offset: f64) -> (f64, Vec<f64>, Vec<f64>) {
        let ng = self.gauss.first().map_or(0, Vec::len);
        let nu = self.free.first().map_or(0, Vec::len);
        let mut c = offset;
        let mut g = vec![0.0; ng];
        let mut u = vec![0.0; nu];
        for &(i, k) in coeffs {
            c += k * self.constant[i];
            for (gj, x) in g.iter_mut().zip(&self.gauss[i]) {
                *gj += k * x;
            }
            for (uj, x) in u.iter_mut().zip(&self.free[i]) {
                *uj += k * x;
            }
        }
        (c, g, u)
    }

    fn widen_gauss(&mut self) {
        for row in &mut self.gauss {
            row.push(0.0);
        }
    }

    fn widen_free(&mut self) {
        for row in &mut self.free {
            row.push(0.0);
        }
    }

    fn distribution(&self, names: &[String]) -> ExtendedGaussian {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.names.iter().position(|m| m == n).unwrap())
            .collect();
        let ng = self.gauss.first().map_or(0, Vec::len);
        let nu = self.free.first().map_or(0, Vec::len);
        let g = Matrix::from_fn(idx.len(), ng, |r, c| self.gauss[idx[r]][c]);
        let u = Matrix::from_fn(idx.len(), nu, |r, c| self.free[idx[r]][c]);
        let mean = Vector::from_iterator(idx.len(), idx.iter().map(|&i| self.constant[i]));
        let d = Subspace::column_space(&u, tol());
        // Projecting along D keeps the representative in normal form.
        let q = d.complement_projector();
        ExtendedGaussian::new(&q * mean, &q * &g * g.transpose() * &q, d, tol()).unwrap()
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x:.3}")
}

/// Random affine expression over existing variables, with its coefficients.
fn random_expr(rng: &mut TestRng, names: &[String]) -> (String, Vec<(usize, f64)>, f64) {
    let offset = (rng.random_range(-20..=20) as f64) / 4.0;
    let mut text = fmt_num(offset);
    let mut coeffs = Vec::new();
    for (i, name) in names.iter().enumerate() {
        if rng.random_bool(0.5) {
            let k = (rng.random_range(-12..=12) as f64) / 4.0;
            if k >= 0.0 {
                text.push_str(&format!(" + {} * {name}", fmt_num(k)));
            } else {
                text.push_str(&format!(" - {} * {name}", fmt_num(-k)));
            }
            coeffs.push((i, k));
        }
    }
    (text, coeffs, offset)
}

/// A straight-line program without observations and its exact model.
fn random_program(rng: &mut TestRng) -> (String, Model, Vec<String>) {
    let mut model = Model::new();
    let mut src = String::new();
    let count = rng.random_range(1..=6);
    for i in 0..count {
        let name = format!("v{i}");
        let (expr, coeffs, offset) = random_expr(rng, &model.names);
        match rng.random_range(0..3) {
            0 => {
                let var = (rng.random_range(1..=16) as f64) / 4.0;
                src.push_str(&format!("{name} ~ normal({expr}, {})\n", fmt_num(var)));
                let (c, mut g, u) = model.combine(&coeffs, offset);
                model.widen_gauss();
                g.push(var.sqrt());
                model.push(name, c, g, u);
            }
            1 => {
                src.push_str(&format!("{name} ~ uniform()\n"));
                let (c, g, mut u) = model.combine(&[], 0.0);
                model.widen_free();
                u.push(1.0);
                model.push(name, c, g, u);
            }
            _ => {
                src.push_str(&format!("{name} = {expr}\n"));
                let (c, g, u) = model.combine(&coeffs, offset);
                model.push(name, c, g, u);
            }
        }
    }
    let mut returns: Vec<String> = model.names.iter().filter(|_| rng.random_bool(0.6)).cloned().collect();
    if returns.is_empty() {
        returns.push(model.names[0].clone());
    }
    src.push_str(&format!("return {}\n", returns.join(", ")));
    (src, model, returns)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn interpreter_matches_noise_model(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (src, model, returns) = random_program(&mut r);
        let program = dsl::parse(&src).map_err(|e| TestCaseError::fail(format!("{e}\n{src}")))?;
        let report = dsl::interpret(&program, tol()).unwrap();
        prop_assert_eq!(&report.variables, &returns);
        let expected = model.distribution(&returns);
        prop_assert!(report.dist.equals(&expected, tol()), "program:\n{}", src);
    }

    #[test]
    fn observation_order_does_not_matter(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(2..=4);
        let mut src = String::new();
        for i in 0..n {
            if r.random_bool(0.3) {
                src.push_str(&format!("x{i} ~ uniform()\n"));
            } else {
                src.push_str(&format!("x{i} ~ normal({}, {})\n", r.random_range(-3..=3), r.random_range(1..=4)));
            }
        }
        let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let mut observations: Vec<String> = (0..r.random_range(1..n))
            .map(|_| {
                let (expr, _, _) = random_expr(&mut r, &names);
                format!("observe {expr} == {}\n", fmt_num(r.random_range(-2.0..2.0)))
            })
            .collect();
        let tail = format!("return {}\n", names.join(", "));
        let first = format!("{src}{}{tail}", observations.concat());
        observations.shuffle(&mut r);
        let second = format!("{src}{}{tail}", observations.concat());
        let a = dsl::interpret(&dsl::parse(&first).unwrap(), tol());
        let b = dsl::interpret(&dsl::parse(&second).unwrap(), tol());
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert!(a.dist.equals(&b.dist, tol()), "{}\n---\n{}", first, second),
            (Err(DslError::Infeasible { .. }), Err(DslError::Infeasible { .. })) => {}
            (a, b) => prop_assert!(false, "orders disagree: {:?} vs {:?}", a.is_ok(), b.is_ok()),
        }
    }
}

#[test]
fn example_program_parses_to_known_tree() {
    let program = dsl::parse(DemoName::Example21.source()).unwrap();
    let normal = |name: &str| json!({"Sample": [name, {"Normal": {"mean": {"Num": 0.0}, "variance": 1.0}}]});
    let sum = |name: &str, a: &str| {
        json!({"Assign": [name, {"Binary": [{"Var": [a]}, "Add", {"Var": ["y"]}]}]})
    };
    let expected = json!({
        "stmts": [
            {"kind": normal("x1")},
            {"kind": normal("x2")},
            {"kind": {"Sample": ["y", "Uniform"]}},
            {"kind": sum("z1", "x1")},
            {"kind": sum("z2", "x2")},
        ],
        "returns": ["z1", "z2"],
    });
    assert_eq!(serde_json::to_value(&program).unwrap(), expected);
    assert_eq!(program.stmts.len() + 1, 6, "five statements and a return");
}

#[test]
fn printing_is_a_parse_fixed_point() {
    for demo in DemoName::ALL {
        let once = dsl::parse(demo.source()).unwrap();
        let text = dsl::pretty_print(&once);
        let twice = dsl::parse(&text).unwrap();
        assert_eq!(once, twice, "{}", demo.name());
        assert_eq!(dsl::pretty_print(&twice), text);
    }
}

#[test]
fn infeasible_observation_reports_its_line() {
    let err = dsl::interpret(&dsl::parse("x = 1\ny = 2\n\nobserve x == y\nreturn x").unwrap(), tol()).unwrap_err();
    match err {
        DslError::Infeasible { span, .. } => assert_eq!((span.line, span.col), (4, 1)),
        other => panic!("expected infeasible, got {other:?}"),
    }
}
