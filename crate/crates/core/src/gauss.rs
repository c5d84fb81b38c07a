//! Gaussian maps `x ↦ A x + N(μ, Σ)` and their Markov-category structure.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, block_diag, concat, vstack, Matrix, Vector};
use crate::linrel::{AffineRelation, LinearRelation};
use crate::subspace::{pseudoinverse, Subspace, Tolerance};

/// A linear map plus independent Gaussian noise. Distributions have `dom() == 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMap {
    a: Matrix,
    mean: Vector,
    cov: Matrix,
}

impl GaussianMap {
    /// Checks shapes, symmetrizes `cov`, and clamps roundoff-level negative eigenvalues.
    pub fn new(a: Matrix, mean: Vector, cov: Matrix, tol: Tolerance) -> Result<Self> {
        check_dim("gaussian map mean", a.nrows(), mean.len())?;
        check_dim("gaussian map covariance", a.nrows(), cov.nrows())?;
        let cov = linalg::clamp_psd(&cov, tol.eq_abs_tol)?;
        Ok(Self { a, mean, cov })
    }

    /// For values that are PSD by construction (sums and congruences of PSD forms).
    pub(crate) fn from_parts(a: Matrix, mean: Vector, cov: Matrix) -> Self {
        debug_assert_eq!(a.nrows(), mean.len());
        debug_assert_eq!(cov.shape(), (mean.len(), mean.len()));
        Self {
            a,
            mean,
            cov: linalg::symmetrize(&cov),
        }
    }

    /// The distribution `N(μ, Σ)` as a map out of R^0.
    pub fn distribution(mean: Vector, cov: Matrix, tol: Tolerance) -> Result<Self> {
        let m = mean.len();
        Self::new(Matrix::zeros(m, 0), mean, cov, tol)
    }

    pub fn standard_normal(n: usize) -> Self {
        Self::from_parts(Matrix::zeros(n, 0), Vector::zeros(n), Matrix::identity(n, n))
    }

    /// Noise-free linear map.
    pub fn linear(a: Matrix) -> Self {
        let m = a.nrows();
        Self::from_parts(a, Vector::zeros(m), Matrix::zeros(m, m))
    }

    pub fn identity(n: usize) -> Self {
        Self::linear(Matrix::identity(n, n))
    }

    /// `x ↦ (x, x)`.
    pub fn copy(n: usize) -> Self {
        let i = Matrix::identity(n, n);
        Self::linear(vstack(&[&i, &i]))
    }

    /// `x ↦ ()`.
    pub fn delete(n: usize) -> Self {
        Self::linear(Matrix::zeros(0, n))
    }

    /// `(x, y) ↦ (y, x)` for `x ∈ R^n`, `y ∈ R^m`.
    pub fn swap(n: usize, m: usize) -> Self {
        Self::linear(crate::linrel::swap(n, m))
    }

    pub fn dom(&self) -> usize {
        self.a.ncols()
    }

    pub fn cod(&self) -> usize {
        self.a.nrows()
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

    /// `self ∘ first`: `A₂A₁x + A₂μ₁ + μ₂`, covariance `A₂Σ₁A₂ᵀ + Σ₂`.
    pub fn compose(&self, first: &GaussianMap) -> Result<Self> {
        check_dim("gaussian composition", first.cod(), self.dom())?;
        Ok(Self::from_parts(
            &self.a * &first.a,
            &self.a * &first.mean + &self.mean,
            &self.a * &first.cov * self.a.transpose() + &self.cov,
        ))
    }

    pub fn tensor(&self, other: &GaussianMap) -> Self {
        Self::from_parts(
            block_diag(&self.a, &other.a),
            concat(&self.mean, &other.mean),
            block_diag(&self.cov, &other.cov),
        )
    }

    /// Pushes a distribution forward along `a`.
    pub fn pushforward(a: &Matrix, dist: &GaussianMap) -> Result<Self> {
        check_dim("pushforward of a distribution", 0, dist.dom())?;
        Self::linear(a.clone()).compose(dist)
    }

    /// Conditional `(X × A) → Y` of `self : A → X × Y`, split after `nx` outputs.
    ///
    /// Uses the Moore-Penrose pseudoinverse of `Σ_XX`, so singular marginals
    /// yield one canonical representative of the conditional.
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
        let a_x = linalg::rows(&self.a, 0, nx);
        let a_y = linalg::rows(&self.a, nx, ny);
        let mu_x = linalg::segment(&self.mean, 0, nx);
        let mu_y = linalg::segment(&self.mean, nx, ny);
        let s_xx = self.cov.view((0, 0), (nx, nx)).into_owned();
        let s_yx = self.cov.view((nx, 0), (ny, nx)).into_owned();
        let s_yy = self.cov.view((nx, nx), (ny, ny)).into_owned();

        let gain = &s_yx * pseudoinverse(&s_xx, tol);
        let mut lin = Matrix::zeros(ny, nx + na);
        lin.view_mut((0, 0), (ny, nx)).copy_from(&gain);
        lin.view_mut((0, nx), (ny, na)).copy_from(&(a_y - &gain * a_x));
        let mean = mu_y - &gain * mu_x;
        let cutoff = tol.rank_rel_tol * linalg::spectral_norm(&self.cov);
        let cov = linalg::clean_psd(&(s_yy - &gain * s_yx.transpose()), cutoff);
        Self::new(lin, mean, cov, tol)
    }

    /// Marginal on the first `nx` outputs.
    pub fn marginal_first(&self, nx: usize) -> Result<Self> {
        if nx > self.cod() {
            return Err(Error::DimensionMismatch {
                context: "marginal split exceeds codomain",
                expected: self.cod(),
                found: nx,
            });
        }
        Self::linear(linalg::select_first(nx, self.cod() - nx)).compose(self)
    }

    /// `x ↦ A x + μ + col(Σ)`.
    pub fn support(&self, tol: Tolerance) -> AffineSupportMap {
        AffineSupportMap {
            a: self.a.clone(),
            offset: self.mean.clone(),
            noise: Subspace::column_space(&self.cov, tol),
        }
    }

    pub fn approx_eq(&self, other: &Self, eps: f64) -> bool {
        linalg::max_abs_diff(&self.a, &other.a) <= eps
            && linalg::max_abs_diff_vec(&self.mean, &other.mean) <= eps
            && linalg::max_abs_diff(&self.cov, &other.cov) <= eps
    }

    pub fn to_json(&self) -> GaussianMapJson {
        GaussianMapJson {
            dom: self.dom(),
            cod: self.cod(),
            a: linalg::matrix_to_rows(&self.a),
            mean: self.mean.iter().copied().collect(),
            cov: linalg::matrix_to_rows(&self.cov),
        }
    }

    pub fn from_json(json: &GaussianMapJson, tol: Tolerance) -> Result<Self> {
        let a = linalg::matrix_from_rows(&json.a, json.dom)?;
        check_dim("json A rows", json.cod, a.nrows())?;
        let cov = linalg::matrix_from_rows(&json.cov, json.cod)?;
        Self::new(a, Vector::from_column_slice(&json.mean), cov, tol)
    }
}

/// Wire form `{"dom", "cod", "A", "mean", "cov"}`, matrices as lists of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMapJson {
    pub dom: usize,
    pub cod: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

/// The support of a Gaussian map: `x ↦ A x + offset + noise`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSupportMap {
    pub a: Matrix,
    pub offset: Vector,
    pub noise: Subspace,
}

impl AffineSupportMap {
    pub fn new(a: Matrix, offset: Vector, noise: Subspace) -> Result<Self> {
        check_dim("support offset", a.nrows(), offset.len())?;
        check_dim("support noise space", a.nrows(), noise.ambient_dim())?;
        Ok(Self { a, offset, noise })
    }

    /// `self ∘ first`: offsets push forward and add, noise spaces push forward and sum.
    pub fn compose(&self, first: &AffineSupportMap, tol: Tolerance) -> Result<Self> {
        check_dim("support composition", first.a.nrows(), self.a.ncols())?;
        let noise = first.noise.image(&self.a, tol)?.sum(&self.noise, tol)?;
        Ok(Self {
            a: &self.a * &first.a,
            offset: &self.a * &first.offset + &self.offset,
            noise,
        })
    }

    /// The left-total affine relation `{(x, A x + offset + n) : n ∈ noise}`.
    pub fn to_affine_relation(&self, tol: Tolerance) -> Result<AffineRelation> {
        let (m, n) = self.a.shape();
        let graph = vstack(&[&Matrix::identity(n, n), &self.a]);
        let noise = vstack(&[&Matrix::zeros(n, self.noise.dim()), self.noise.basis()]);
        let g = Subspace::column_space(&linalg::hstack(&[&graph, &noise]), tol);
        let direction = LinearRelation::new(n, m, g, tol)?;
        AffineRelation::new(&concat(&Vector::zeros(n), &self.offset), direction)
    }
}
