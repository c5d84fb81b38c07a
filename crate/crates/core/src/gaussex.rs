//! Extended Gaussian distributions and maps.
//!
//! An extended Gaussian `N(μ, Σ) + D` is a Gaussian on the quotient `R^n / D`:
//! it carries no information along the subspace `D` (its locus of
//! nondeterminism). Values are stored in normal form, with the quotient
//! realized as `D^⊥`: `μ ∈ D^⊥` and `col(Σ) ⊆ D^⊥`. Equality is then a plain
//! comparison of normal forms.
//!
//! Maps `x ↦ A x + N(μ, Σ) + D` form a Markov category; composition and
//! tensor delegate to [`Rel`] over the Gaussian decoration.

use serde::{Deserialize, Serialize};

use crate::decorated::{DecoratedRel, GaussDec, Rel};
use crate::error::{check_dim, Error, Result};
use crate::gauss::GaussianMap;
use crate::linalg::{self, concat, hstack, vstack, Matrix, Vector};
use crate::linrel::graph_decompose;
use crate::subspace::{
    kernel, oblique_projector, pseudoinverse, structured_complement, Subspace, Tolerance,
};

/// `x ↦ A x + N(μ, Σ) + D` in normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedGaussianMap {
    nondet: Subspace,
    a: Matrix,
    mean: Vector,
    cov: Matrix,
}

impl ExtendedGaussianMap {
    /// Validates shapes and PSD-ness, then projects `(A, μ, Σ)` onto `D^⊥`.
    pub fn new(nondet: Subspace, a: Matrix, mean: Vector, cov: Matrix, tol: Tolerance) -> Result<Self> {
        check_dim("nondeterminism subspace", a.nrows(), nondet.ambient_dim())?;
        let g = GaussianMap::new(a, mean, cov, tol)?;
        Ok(Self::normalized(nondet, g.linear_part(), g.mean(), g.cov()))
    }

    fn normalized(nondet: Subspace, a: &Matrix, mean: &Vector, cov: &Matrix) -> Self {
        let p = nondet.complement_projector();
        Self {
            a: &p * a,
            mean: &p * mean,
            cov: linalg::symmetrize(&(&p * cov * p.transpose())),
            nondet,
        }
    }

    pub fn from_gaussian(g: &GaussianMap) -> Self {
        Self {
            nondet: Subspace::zero(g.cod()),
            a: g.linear_part().clone(),
            mean: g.mean().clone(),
            cov: g.cov().clone(),
        }
    }

    /// Noise-free linear map.
    pub fn linear(a: Matrix) -> Self {
        Self::from_gaussian(&GaussianMap::linear(a))
    }

    /// `x ↦ A x + b`.
    pub fn affine(a: Matrix, b: Vector) -> Result<Self> {
        check_dim("affine offset", a.nrows(), b.len())?;
        let m = a.nrows();
        Ok(Self {
            nondet: Subspace::zero(m),
            a,
            mean: b,
            cov: Matrix::zeros(m, m),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_gaussian(&GaussianMap::identity(n))
    }

    pub fn copy(n: usize) -> Self {
        Self::from_gaussian(&GaussianMap::copy(n))
    }

    pub fn delete(n: usize) -> Self {
        Self::from_gaussian(&GaussianMap::delete(n))
    }

    pub fn swap(n: usize, m: usize) -> Self {
        Self::from_gaussian(&GaussianMap::swap(n, m))
    }

    pub fn dom(&self) -> usize {
        self.a.ncols()
    }

    pub fn cod(&self) -> usize {
        self.a.nrows()
    }

    pub fn nondet(&self) -> &Subspace {
        &self.nondet
    }

    pub fn linear_part(&self) -> &Matrix {
        &self.a
    }

    pub fn mean(&self) -> &Vector {
        &self.mean
    }

    pub fn cov(&self) -> &Matrix {
        &self.cov
    }

    /// The Gaussian part `x ↦ A x + N(μ, Σ)` of the normal form.
    pub fn gaussian_part(&self) -> GaussianMap {
        GaussianMap::from_parts(self.a.clone(), self.mean.clone(), self.cov.clone())
    }

    pub fn to_decorated(&self) -> DecoratedRel<(Vector, Matrix)> {
        DecoratedRel {
            nondet: self.nondet.clone(),
            f: self.a.clone(),
            s: (self.mean.clone(), self.cov.clone()),
        }
    }

    pub fn from_decorated(d: DecoratedRel<(Vector, Matrix)>) -> Self {
        let (mean, cov) = d.s;
        Self::normalized(d.nondet, &d.f, &mean, &cov)
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &ExtendedGaussianMap, tol: Tolerance) -> Result<Self> {
        let rel = Rel::new(GaussDec::default(), tol);
        let out = rel.compose(&self.to_decorated(), &first.to_decorated())?;
        Ok(Self::from_decorated(out))
    }

    pub fn tensor(&self, other: &ExtendedGaussianMap, tol: Tolerance) -> Self {
        let rel = Rel::new(GaussDec::default(), tol);
        Self::from_decorated(rel.tensor(&self.to_decorated(), &other.to_decorated()))
    }

    /// Post-composes with the coordinate projection onto the first `nx` outputs.
    pub fn marginal_first(&self, nx: usize, tol: Tolerance) -> Result<Self> {
        if nx > self.cod() {
            return Err(Error::DimensionMismatch {
                context: "marginal split exceeds codomain",
                expected: self.cod(),
                found: nx,
            });
        }
        Self::linear(linalg::select_first(nx, self.cod() - nx)).compose(self, tol)
    }

    /// Conditional `(X × A) → Y` of `self : A → X × Y`, split after `nx` outputs.
    ///
    /// The representative is first moved onto a complement `K = U × W` of `D`
    /// whose X-part complements `D_X`. The Gaussian part is then conditioned
    /// as an ordinary Gaussian map, `D` is split into a slope `h` and fibre `H`,
    /// and the two are recombined as `x ↦ g(P_U x, a) + h(P_{D_X} x) + ψ + H`.
    pub fn conditional(&self, nx: usize, tol: Tolerance) -> Result<Self> {
        if nx > self.cod() {
            return Err(Error::DimensionMismatch {
                context: "conditional split exceeds codomain",
                expected: self.cod(),
                found: nx,
            });
        }
        let ny = self.cod() - nx;
        let na = self.dom();
        let sc = structured_complement(&self.nondet, nx, ny, tol)?;
        let p_k = oblique_projector(&sc.k, &self.nondet, tol)?;
        let moved = GaussianMap::from_parts(
            &p_k * &self.a,
            &p_k * &self.mean,
            &p_k * &self.cov * p_k.transpose(),
        );
        let g = moved.conditional(nx, tol)?;
        let (h, fibre) = graph_decompose(&self.nondet, nx, ny, tol)?;

        let p_u = oblique_projector(&sc.u, &sc.v_x, tol)?;
        let p_dx = Matrix::identity(nx, nx) - &p_u;
        let g_x = linalg::cols(g.linear_part(), 0, nx);
        let g_a = linalg::cols(g.linear_part(), nx, na);
        let lin = hstack(&[&(g_x * p_u + h * p_dx), &g_a]);
        Ok(Self::normalized(fibre, &lin, g.mean(), g.cov()))
    }

    /// Evaluates at a point of the domain, giving a distribution.
    pub fn at(&self, x: &Vector) -> Result<ExtendedGaussian> {
        check_dim("evaluation point", self.dom(), x.len())?;
        Ok(ExtendedGaussian(Self::normalized(
            self.nondet.clone(),
            &Matrix::zeros(self.cod(), 0),
            &(&self.a * x + &self.mean),
            &self.cov,
        )))
    }

    /// Equality of extended Gaussian maps: same `D`, normal forms within `tol.eq_abs_tol`.
    pub fn approx_eq(&self, other: &Self, tol: Tolerance) -> bool {
        self.dom() == other.dom()
            && self.cod() == other.cod()
            && self.nondet.approx_eq(&other.nondet, tol)
            && linalg::max_abs_diff(&self.a, &other.a) <= tol.eq_abs_tol
            && linalg::max_abs_diff_vec(&self.mean, &other.mean) <= tol.eq_abs_tol
            && linalg::max_abs_diff(&self.cov, &other.cov) <= tol.eq_abs_tol
    }
}

/// An extended Gaussian distribution `N(μ, Σ) + D` on R^n.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedGaussian(ExtendedGaussianMap);

impl ExtendedGaussian {
    pub fn new(mean: Vector, cov: Matrix, nondet: Subspace, tol: Tolerance) -> Result<Self> {
        let n = mean.len();
        Ok(Self(ExtendedGaussianMap::new(
            nondet,
            Matrix::zeros(n, 0),
            mean,
            cov,
            tol,
        )?))
    }

    /// An ordinary Gaussian, `D = 0`.
    pub fn gaussian(mean: Vector, cov: Matrix, tol: Tolerance) -> Result<Self> {
        let n = mean.len();
        Self::new(mean, cov, Subspace::zero(n), tol)
    }

    pub fn standard_normal(n: usize) -> Self {
        Self(ExtendedGaussianMap::from_gaussian(&GaussianMap::standard_normal(n)))
    }

    /// The point mass at `x`.
    pub fn dirac(x: Vector) -> Self {
        let n = x.len();
        Self(ExtendedGaussianMap {
            nondet: Subspace::zero(n),
            a: Matrix::zeros(n, 0),
            mean: x,
            cov: Matrix::zeros(n, n),
        })
    }

    /// The uniform distribution: `D = R^n`.
    pub fn uniform(n: usize) -> Self {
        Self(ExtendedGaussianMap {
            nondet: Subspace::full(n),
            a: Matrix::zeros(n, 0),
            mean: Vector::zeros(n),
            cov: Matrix::zeros(n, n),
        })
    }

    pub fn from_map(m: ExtendedGaussianMap) -> Result<Self> {
        check_dim("distribution domain", 0, m.dom())?;
        Ok(Self(m))
    }

    pub fn as_map(&self) -> &ExtendedGaussianMap {
        &self.0
    }

    pub fn into_map(self) -> ExtendedGaussianMap {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.cod()
    }

    pub fn nondet(&self) -> &Subspace {
        &self.0.nondet
    }

    pub fn mean(&self) -> &Vector {
        &self.0.mean
    }

    pub fn cov(&self) -> &Matrix {
        &self.0.cov
    }

    /// `A_*(N(μ, Σ) + D) = N(Aμ, AΣAᵀ) + A[D]`.
    pub fn pushforward(&self, a: &Matrix, tol: Tolerance) -> Result<Self> {
        check_dim("pushforward matrix columns", self.dim(), a.ncols())?;
        let nondet = self.nondet().image(a, tol)?;
        Ok(Self(ExtendedGaussianMap::normalized(
            nondet,
            &Matrix::zeros(a.nrows(), 0),
            &(a * self.mean()),
            &(a * self.cov() * a.transpose()),
        )))
    }

    /// Applies an extended Gaussian map.
    pub fn push_through(&self, f: &ExtendedGaussianMap, tol: Tolerance) -> Result<Self> {
        Ok(Self(f.compose(&self.0, tol)?))
    }

    pub fn tensor(&self, other: &Self, tol: Tolerance) -> Self {
        Self(self.0.tensor(&other.0, tol))
    }

    /// Marginal on the listed coordinates, in the given order.
    pub fn marginal(&self, coords: &[usize], tol: Tolerance) -> Result<Self> {
        let n = self.dim();
        if let Some(&bad) = coords.iter().find(|&&c| c >= n) {
            return Err(Error::DimensionMismatch {
                context: "marginal coordinate out of range",
                expected: n,
                found: bad,
            });
        }
        let mut sel = Matrix::zeros(coords.len(), n);
        for (r, &c) in coords.iter().enumerate() {
            sel[(r, c)] = 1.0;
        }
        self.pushforward(&sel, tol)
    }

    /// Equality of extended Gaussians (same `D`, equal projections onto `D^⊥`).
    pub fn equals(&self, other: &Self, tol: Tolerance) -> bool {
        self.0.approx_eq(&other.0, tol)
    }

    /// Conditions on the exact linear event `L x = c`.
    ///
    /// Introduces `Z = L x - c`, conditions the joint of `(Z, x)` on `Z` and
    /// evaluates the conditional at `Z = 0`. Fails if `c` lies off the affine
    /// support of `L x`.
    pub fn observe(&self, l: &Matrix, c: &Vector, tol: Tolerance) -> Result<Self> {
        check_dim("observation matrix columns", self.dim(), l.ncols())?;
        check_dim("observation value", l.nrows(), c.len())?;
        let n = self.dim();
        let k = l.nrows();

        let z = self.pushforward(l, tol)?;
        let support = z.nondet().sum(&Subspace::column_space(z.cov(), tol), tol)?;
        let gap = support.complement_projector() * (z.mean() - c);
        let distance = gap.norm();
        let bound = tol.eq_abs_tol * (1.0 + c.norm());
        if distance > bound {
            return Err(Error::InfeasibleObservation { distance, bound });
        }

        let lift = ExtendedGaussianMap::affine(
            vstack(&[l, &Matrix::identity(n, n)]),
            concat(&-c, &Vector::zeros(n)),
        )?;
        let joint = lift.compose(&self.0, tol)?;
        joint.conditional(k, tol)?.at(&Vector::zeros(k))
    }

    /// Conditions `(U, V)` on `U = V`, for a distribution on `X × X`.
    pub fn condition_equal(&self, tol: Tolerance) -> Result<Self> {
        if !self.dim().is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                context: "condition_equal needs an even dimension",
                expected: self.dim() + 1,
                found: self.dim(),
            });
        }
        let m = self.dim() / 2;
        let i = Matrix::identity(m, m);
        let l = hstack(&[&i, &(-&i)]);
        self.observe(&l, &Vector::zeros(m), tol)
    }

    /// Precision representation `⟨S, Ω⟩`, with the mean carried alongside.
    pub fn to_precision(&self, tol: Tolerance) -> Result<PrecisionRep> {
        let support = Subspace::column_space(self.cov(), tol).sum(self.nondet(), tol)?;
        let omega = linalg::symmetrize(&pseudoinverse(self.cov(), tol));
        Ok(PrecisionRep {
            support,
            omega,
            mean: self.mean().clone(),
        })
    }

    /// Rebuilds the distribution from `⟨S, Ω⟩`: `D = ker(Ω) ∩ S`, `Σ = Ω⁺` on `D^⊥`.
    pub fn from_precision(p: &PrecisionRep, tol: Tolerance) -> Result<Self> {
        let n = p.support.ambient_dim();
        check_dim("precision form", n, p.omega.nrows())?;
        check_dim("precision mean", n, p.mean.len())?;
        let omega = linalg::clamp_psd(&p.omega, tol.eq_abs_tol)?;
        check_supported(&omega, &p.support, tol)?;
        let nondet = kernel(&omega, tol).intersect(&p.support, tol)?;
        let cov = pseudoinverse(&omega, tol);
        Self::new(p.mean.clone(), cov, nondet, tol)
    }

    /// Covariance representation `⟨F, Σ⟩` with `F = D^⊥`.
    pub fn to_covariance_rep(&self) -> CovarianceRep {
        CovarianceRep {
            functionals: self.nondet().annihilator(),
            sigma: self.cov().clone(),
            mean: self.mean().clone(),
        }
    }

    pub fn from_covariance_rep(c: &CovarianceRep, tol: Tolerance) -> Result<Self> {
        let n = c.functionals.ambient_dim();
        check_dim("covariance form", n, c.sigma.nrows())?;
        check_dim("covariance mean", n, c.mean.len())?;
        let sigma = linalg::clamp_psd(&c.sigma, tol.eq_abs_tol)?;
        check_supported(&sigma, &c.functionals, tol)?;
        Self::new(c.mean.clone(), sigma, c.functionals.annihilator(), tol)
    }

    pub fn to_json(&self) -> ExtendedGaussianJson {
        ExtendedGaussianJson {
            dim: self.dim(),
            mean: self.mean().iter().copied().collect(),
            cov: linalg::matrix_to_rows(self.cov()),
            nondet_basis: self.nondet().to_json().basis,
        }
    }

    pub fn from_json(json: &ExtendedGaussianJson, tol: Tolerance) -> Result<Self> {
        let n = json.dim;
        check_dim("json mean", n, json.mean.len())?;
        let cov = linalg::matrix_from_rows(&json.cov, n)?;
        let basis: Vec<Vector> = json
            .nondet_basis
            .iter()
            .map(|b| Vector::from_column_slice(b))
            .collect();
        let nondet = Subspace::span(n, &basis, tol)?;
        Self::new(Vector::from_column_slice(&json.mean), cov, nondet, tol)
    }
}

/// Wire form `{"dim", "mean", "cov", "nondet_basis"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedGaussianJson {
    pub dim: usize,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub nondet_basis: Vec<Vec<f64>>,
}

/// `⟨S, Ω⟩`: a support subspace and a PSD form on it whose kernel is `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionRep {
    pub support: Subspace,
    pub omega: Matrix,
    pub mean: Vector,
}

/// `⟨F, Σ⟩`: a subspace of functionals (realized in R^n) and a PSD form on it.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceRep {
    pub functionals: Subspace,
    pub sigma: Matrix,
    pub mean: Vector,
}

impl PrecisionRep {
    /// The locus of nondeterminism `ker(Ω) ∩ S`.
    pub fn nondet(&self, tol: Tolerance) -> Result<Subspace> {
        kernel(&self.omega, tol).intersect(&self.support, tol)
    }

    /// Dual data `⟨F, Σ⟩` with `F = D^⊥` and `Σ = Ω⁺`.
    pub fn to_covariance_rep(&self, tol: Tolerance) -> Result<CovarianceRep> {
        let functionals = self.nondet(tol)?.annihilator();
        Ok(CovarianceRep {
            functionals,
            sigma: linalg::symmetrize(&pseudoinverse(&self.omega, tol)),
            mean: self.mean.clone(),
        })
    }
}

impl CovarianceRep {
    /// `K = ker(Σ) ∩ F`.
    pub fn kernel_in_functionals(&self, tol: Tolerance) -> Result<Subspace> {
        kernel(&self.sigma, tol).intersect(&self.functionals, tol)
    }

    /// Dual data `⟨S, Ω⟩` with `S = K^⊥` and `Ω = Σ⁺`.
    pub fn to_precision_rep(&self, tol: Tolerance) -> Result<PrecisionRep> {
        Ok(PrecisionRep {
            support: self.kernel_in_functionals(tol)?.annihilator(),
            omega: linalg::symmetrize(&pseudoinverse(&self.sigma, tol)),
            mean: self.mean.clone(),
        })
    }
}

fn check_supported(form: &Matrix, on: &Subspace, tol: Tolerance) -> Result<()> {
    let leak = linalg::spectral_norm(&(on.complement_projector() * form));
    if leak > tol.eq_abs_tol * (1.0 + linalg::spectral_norm(form)) {
        return Err(Error::Malformed(format!(
            "form is not supported on the given subspace (leak {leak:e})"
        )));
    }
    Ok(())
}

/// Precision representation of `psi`.
pub fn to_precision(psi: &ExtendedGaussian, tol: Tolerance) -> Result<PrecisionRep> {
    psi.to_precision(tol)
}

/// Distribution with precision representation `p`.
pub fn to_covariance(p: &PrecisionRep, tol: Tolerance) -> Result<ExtendedGaussian> {
    ExtendedGaussian::from_precision(p, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn m(r: usize, c: usize, xs: &[f64]) -> Matrix {
        Matrix::from_row_slice(r, c, xs)
    }

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn diagonal() -> Subspace {
        Subspace::span(2, &[v(&[1.0, 1.0])], tol()).unwrap()
    }

    fn eq22_left() -> ExtendedGaussian {
        ExtendedGaussian::new(v(&[0.0, 0.0]), Matrix::identity(2, 2), diagonal(), tol()).unwrap()
    }

    #[test]
    fn normal_form_examples() {
        let left = eq22_left();
        let right = ExtendedGaussian::new(v(&[0.0, 0.0]), m(2, 2, &[0.0, 0.0, 0.0, 2.0]), diagonal(), tol()).unwrap();
        assert!(left.equals(&right, tol()));
        let expected = m(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert!(linalg::max_abs_diff(left.cov(), &expected) < 1e-12);

        let r = Subspace::full(1);
        let a = ExtendedGaussian::new(v(&[10.0]), m(1, 1, &[0.0]), r.clone(), tol()).unwrap();
        let b = ExtendedGaussian::new(v(&[0.0]), m(1, 1, &[10.0]), r, tol()).unwrap();
        assert!(a.equals(&b, tol()));
        assert!(a.equals(&ExtendedGaussian::uniform(1), tol()));

        let n1 = ExtendedGaussian::gaussian(v(&[0.0]), m(1, 1, &[1.0]), tol()).unwrap();
        let n2 = ExtendedGaussian::gaussian(v(&[0.0]), m(1, 1, &[2.0]), tol()).unwrap();
        assert!(!n1.equals(&n2, tol()));
    }

    #[test]
    fn pushforward_examples() {
        let psi = eq22_left();
        assert!(psi.pushforward(&Matrix::identity(2, 2), tol()).unwrap().equals(&psi, tol()));
        let diff = psi.pushforward(&m(1, 2, &[1.0, -1.0]), tol()).unwrap();
        assert!(diff.nondet().is_zero());
        assert!((diff.cov()[(0, 0)] - 2.0).abs() < 1e-12);

        let u = ExtendedGaussian::uniform(2);
        let a = m(3, 2, &[1.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let pushed = u.pushforward(&a, tol()).unwrap();
        assert!(pushed.nondet().approx_eq(&Subspace::column_space(&a, tol()), tol()));
        assert!(psi.pushforward(&Matrix::identity(3, 3), tol()).is_err());
    }

    #[test]
    fn example_construction_by_composition() {
        // two independent N(0, 1) plus uniform noise along the diagonal
        let noise = ExtendedGaussianMap::new(diagonal(), Matrix::identity(2, 2), v(&[0.0, 0.0]), Matrix::zeros(2, 2), tol()).unwrap();
        let xs = ExtendedGaussian::standard_normal(1).tensor(&ExtendedGaussian::standard_normal(1), tol());
        let z = xs.push_through(&noise, tol()).unwrap();
        assert!(z.equals(&eq22_left(), tol()));
        let first = z.marginal(&[0], tol()).unwrap();
        assert!(first.equals(&ExtendedGaussian::uniform(1), tol()));
    }

    #[test]
    fn conditional_of_example() {
        let phi = eq22_left().into_map();
        let c = phi.conditional(1, tol()).unwrap();
        assert_eq!((c.dom(), c.cod()), (1, 1));
        assert!((c.linear_part()[(0, 0)] - 1.0).abs() < 1e-8);
        assert!((c.cov()[(0, 0)] - 2.0).abs() < 1e-8);
        assert!(c.nondet().is_zero());
    }

    #[test]
    fn conditional_without_nondeterminism_is_gaussian() {
        let g = GaussianMap::new(m(3, 1, &[1.0, 2.0, -1.0]), v(&[0.5, 1.0, 2.0]), m(3, 3, &[2.0, 0.5, 0.1, 0.5, 1.0, 0.2, 0.1, 0.2, 3.0]), tol()).unwrap();
        let ext = ExtendedGaussianMap::from_gaussian(&g).conditional(2, tol()).unwrap();
        let plain = ExtendedGaussianMap::from_gaussian(&g.conditional(2, tol()).unwrap());
        assert!(ext.approx_eq(&plain, tol()));
    }

    #[test]
    fn conditional_with_vertical_nondeterminism_is_uniform() {
        let d = Subspace::zero(1).product(&Subspace::full(1));
        let phi = ExtendedGaussian::new(v(&[1.0, 2.0]), m(2, 2, &[1.0, 0.3, 0.3, 1.0]), d, tol()).unwrap();
        let c = phi.into_map().conditional(1, tol()).unwrap();
        assert!(c.nondet().is_full());
        for x in [-1.0, 0.0, 3.0] {
            assert!(c.at(&v(&[x])).unwrap().equals(&ExtendedGaussian::uniform(1), tol()));
        }
    }

    #[test]
    fn exact_equality_of_standard_normals() {
        let joint = ExtendedGaussian::standard_normal(2);
        let post = joint.condition_equal(tol()).unwrap();
        let u = post.marginal(&[0], tol()).unwrap();
        assert!((u.cov()[(0, 0)] - 0.5).abs() < 1e-10);
        assert!(u.mean()[0].abs() < 1e-12);
        assert!(u.nondet().is_zero());
    }

    #[test]
    fn uniform_is_uninformative() {
        let psi = ExtendedGaussian::gaussian(v(&[1.5]), m(1, 1, &[2.0]), tol()).unwrap();
        let joint = psi.tensor(&ExtendedGaussian::uniform(1), tol());
        let post = joint.condition_equal(tol()).unwrap();
        assert!(post.marginal(&[0], tol()).unwrap().equals(&psi, tol()));
        assert!(post.marginal(&[1], tol()).unwrap().equals(&psi, tol()));
    }

    #[test]
    fn infeasible_observation() {
        let dirac = ExtendedGaussian::dirac(v(&[0.0]));
        let err = dirac.observe(&m(1, 1, &[1.0]), &v(&[5.0]), tol()).unwrap_err();
        assert!(matches!(err, Error::InfeasibleObservation { .. }));
        let ok = dirac.observe(&m(1, 1, &[1.0]), &v(&[0.0]), tol()).unwrap();
        assert!(ok.equals(&dirac, tol()));
    }

    #[test]
    fn observation_of_a_uniform_variable() {
        let u = ExtendedGaussian::uniform(1);
        let post = u.observe(&m(1, 1, &[2.0]), &v(&[3.0]), tol()).unwrap();
        assert!(post.equals(&ExtendedGaussian::dirac(v(&[1.5])), tol()));
    }

    #[test]
    fn precision_examples() {
        let u = ExtendedGaussian::uniform(3).to_precision(tol()).unwrap();
        assert!(u.support.is_full());
        assert!(u.omega.iter().all(|x| *x == 0.0));
        let c = ExtendedGaussian::uniform(3).to_covariance_rep();
        assert!(c.functionals.is_zero());

        let psi = ExtendedGaussian::gaussian(v(&[0.0, 0.0]), m(2, 2, &[0.0, 0.0, 0.0, 2.0]), tol()).unwrap();
        let p = psi.to_precision(tol()).unwrap();
        assert!(p.support.approx_eq(&Subspace::span(2, &[v(&[0.0, 1.0])], tol()).unwrap(), tol()));
        assert!(linalg::max_abs_diff(&p.omega, &m(2, 2, &[0.0, 0.0, 0.0, 0.5])) < 1e-12);

        let sigma = m(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let full = ExtendedGaussian::gaussian(v(&[0.0, 0.0]), sigma.clone(), tol()).unwrap();
        let p = full.to_precision(tol()).unwrap();
        assert!(p.support.is_full());
        assert!(linalg::max_abs_diff(&p.omega, &sigma.try_inverse().unwrap()) < 1e-12);
        assert!(to_covariance(&p, tol()).unwrap().equals(&full, tol()));
    }

    #[test]
    fn precision_rejects_indefinite_form() {
        let p = PrecisionRep {
            support: Subspace::full(2),
            omega: m(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            mean: v(&[0.0, 0.0]),
        };
        assert!(matches!(to_covariance(&p, tol()), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn json_field_names() {
        let text = serde_json::to_string(&eq22_left().to_json()).unwrap();
        assert!(text.starts_with("{\"dim\":2,\"mean\":"));
        assert!(text.contains("\"nondet_basis\":"));
        let back = ExtendedGaussian::from_json(&serde_json::from_str(&text).unwrap(), tol()).unwrap();
        assert!(back.equals(&eq22_left(), tol()));
    }
}
