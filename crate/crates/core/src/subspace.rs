//! Subspaces of R^n in a canonical orthonormal form.
//!
//! Every subspace is stored as an `n x k` matrix with orthonormal columns.
//! The basis is derived from the orthogonal projector alone (pivoted
//! Gram-Schmidt over the projector's columns), so two spanning sets of the
//! same subspace produce the same basis up to roundoff. Duals are identified
//! with R^n through the standard inner product: the annihilator of `U` is its
//! orthogonal complement.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, hstack, Matrix, Vector};

const PIVOT_TIE_REL: f64 = 1e-6;

/// Numerical thresholds used for rank decisions and approximate comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Singular values below `rank_rel_tol * scale` count as zero.
    pub rank_rel_tol: f64,
    /// Entrywise bound for approximate equality of projectors, means and covariances.
    pub eq_abs_tol: f64,
}

impl Tolerance {
    pub const DEFAULT_RANK_REL_TOL: f64 = 1e-10;
    pub const DEFAULT_EQ_ABS_TOL: f64 = 1e-8;

    pub fn new(rank_rel_tol: f64, eq_abs_tol: f64) -> Result<Self> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(rank_rel_tol) || !ok(eq_abs_tol) {
            return Err(Error::InvalidTolerance(format!(
                "rank_rel_tol = {rank_rel_tol}, eq_abs_tol = {eq_abs_tol}; both must be positive"
            )));
        }
        Ok(Self {
            rank_rel_tol,
            eq_abs_tol,
        })
    }

    /// Same rank cutoff, different comparison bound.
    pub fn with_eq(self, eq_abs_tol: f64) -> Result<Self> {
        Self::new(self.rank_rel_tol, eq_abs_tol)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_rel_tol: Self::DEFAULT_RANK_REL_TOL,
            eq_abs_tol: Self::DEFAULT_EQ_ABS_TOL,
        }
    }
}

/// A linear subspace of R^n with an orthonormal basis in canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    /// The zero subspace of R^n.
    pub fn zero(n: usize) -> Self {
        Self {
            basis: Matrix::zeros(n, 0),
        }
    }

    /// All of R^n.
    pub fn full(n: usize) -> Self {
        Self::from_projector(&Matrix::identity(n, n), n)
    }

    /// The span of a list of vectors of equal length `n`.
    pub fn span(n: usize, vectors: &[Vector], tol: Tolerance) -> Result<Self> {
        for v in vectors {
            check_dim("span: vector length", n, v.len())?;
        }
        let m = Matrix::from_fn(n, vectors.len(), |r, c| vectors[c][r]);
        Ok(Self::column_space(&m, tol))
    }

    /// Column space of `m`, with the rank cutoff relative to its largest singular value.
    pub fn column_space(m: &Matrix, tol: Tolerance) -> Self {
        let scale = linalg::spectral_norm(m);
        Self::from_spanning(m, scale, tol)
    }

    /// Span of the columns of `m`; singular values at or below `tol.rank_rel_tol * scale` are dropped.
    pub(crate) fn from_spanning(m: &Matrix, scale: f64, tol: Tolerance) -> Self {
        let u = linalg::dominant_left_vectors(m, tol.rank_rel_tol * scale);
        let k = u.ncols();
        Self::from_projector(&(&u * u.transpose()), k)
    }

    /// Canonical orthonormal basis for the range of an orthogonal projector of known rank.
    fn from_projector(p: &Matrix, rank: usize) -> Self {
        let n = p.nrows();
        let mut residual = linalg::symmetrize(p);
        let mut basis = Matrix::zeros(n, rank);
        for j in 0..rank {
            // near-ties go to the lowest index so the pivot order is stable under roundoff
            let norms: Vec<f64> = (0..n).map(|c| residual.column(c).norm_squared()).collect();
            let max = norms.iter().copied().fold(0.0, f64::max);
            let pivot = norms
                .iter()
                .position(|&x| x >= max * (1.0 - PIVOT_TIE_REL))
                .unwrap_or(0);
            let mut q = residual.column(pivot).into_owned();
            // two passes of reorthogonalization against the accepted vectors
            for _ in 0..2 {
                for i in 0..j {
                    let bi = basis.column(i);
                    let c = bi.dot(&q);
                    q.axpy(-c, &bi, 1.0);
                }
            }
            let norm = q.norm();
            if norm == 0.0 {
                // projector rank overstated; keep the basis orthonormal anyway
                q = Vector::zeros(n);
                q[pivot] = 1.0;
            } else {
                q /= norm;
            }
            let lead = q.iter().copied().fold(0.0f64, |best, x| {
                if x.abs() > best.abs() {
                    x
                } else {
                    best
                }
            });
            if lead < 0.0 {
                q.neg_mut();
            }
            let proj = q.transpose() * &residual;
            residual -= &q * proj;
            basis.set_column(j, &q);
        }
        Self { basis }
    }

    /// Builds from a basis, re-canonicalizing it.
    pub fn from_basis(basis: &Matrix, tol: Tolerance) -> Self {
        Self::column_space(basis, tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim()
    }

    /// Orthonormal basis, one column per direction.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Basis vectors as owned columns.
    pub fn basis_vectors(&self) -> Vec<Vector> {
        self.basis.column_iter().map(|c| c.into_owned()).collect()
    }

    /// Orthogonal projector `B Bᵀ`.
    pub fn projector(&self) -> Matrix {
        &self.basis * self.basis.transpose()
    }

    /// Orthogonal projector onto the complement, `I - B Bᵀ`.
    ///
    /// Exactly zero for the full space, so downstream rank decisions never
    /// see a roundoff-sized matrix.
    pub fn complement_projector(&self) -> Matrix {
        let n = self.ambient_dim();
        if self.is_full() {
            return Matrix::zeros(n, n);
        }
        Matrix::identity(n, n) - self.projector()
    }

    /// Orthogonal complement, standing in for the annihilator.
    pub fn annihilator(&self) -> Self {
        let n = self.ambient_dim();
        Self::from_projector(&self.complement_projector(), n - self.dim())
    }

    pub fn sum(&self, other: &Self, tol: Tolerance) -> Result<Self> {
        check_dim("minkowski sum", self.ambient_dim(), other.ambient_dim())?;
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        let stacked = hstack(&[&self.basis, &other.basis]);
        Ok(Self::column_space(&stacked, tol))
    }

    pub fn intersect(&self, other: &Self, tol: Tolerance) -> Result<Self> {
        check_dim("intersection", self.ambient_dim(), other.ambient_dim())?;
        Ok(self
            .annihilator()
            .sum(&other.annihilator(), tol)?
            .annihilator())
    }

    /// Direct image `A[U]`.
    pub fn image(&self, a: &Matrix, tol: Tolerance) -> Result<Self> {
        check_dim("image: matrix columns", self.ambient_dim(), a.ncols())?;
        if self.is_zero() {
            return Ok(Self::zero(a.nrows()));
        }
        let scale = linalg::spectral_norm(a);
        Ok(Self::from_spanning(&(a * &self.basis), scale, tol))
    }

    /// Preimage `{x : A x ∈ V}` of `self = V`.
    pub fn preimage(&self, a: &Matrix, tol: Tolerance) -> Result<Self> {
        check_dim("preimage: matrix rows", self.ambient_dim(), a.nrows())?;
        let scale = linalg::spectral_norm(a);
        let rows = Self::from_spanning(&(a.transpose() * self.complement_projector()), scale, tol);
        Ok(rows.annihilator())
    }

    /// Cartesian product `U × W` inside R^{n+m}.
    pub fn product(&self, other: &Self) -> Self {
        let p = linalg::block_diag(&self.projector(), &other.projector());
        Self::from_projector(&p, self.dim() + other.dim())
    }

    /// Membership test `|(I - P) v| <= eq_abs_tol (1 + |v|)`.
    pub fn contains(&self, v: &Vector, tol: Tolerance) -> bool {
        if v.len() != self.ambient_dim() {
            return false;
        }
        let residual = v - &self.basis * (self.basis.transpose() * v);
        residual.norm() <= tol.eq_abs_tol * (1.0 + v.norm())
    }

    pub fn is_subspace_of(&self, other: &Self, tol: Tolerance) -> bool {
        self.ambient_dim() == other.ambient_dim()
            && self.basis_vectors().iter().all(|b| other.contains(b, tol))
    }

    /// Equality via entrywise comparison of projectors.
    pub fn approx_eq(&self, other: &Self, tol: Tolerance) -> bool {
        self.ambient_dim() == other.ambient_dim()
            && self.dim() == other.dim()
            && linalg::max_abs_diff(&self.projector(), &other.projector()) <= tol.eq_abs_tol
    }

    pub fn to_json(&self) -> SubspaceJson {
        SubspaceJson {
            ambient_dim: self.ambient_dim(),
            basis: self.basis_vectors().iter().map(|c| c.iter().copied().collect()).collect(),
        }
    }

    pub fn from_json(json: &SubspaceJson, tol: Tolerance) -> Result<Self> {
        let cols: Vec<Vector> = json
            .basis
            .iter()
            .map(|c| Vector::from_column_slice(c))
            .collect();
        Self::span(json.ambient_dim, &cols, tol)
            .map_err(|e| Error::Malformed(format!("subspace basis: {e}")))
    }
}

/// Wire form of a subspace: one inner list per basis vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceJson {
    pub ambient_dim: usize,
    pub basis: Vec<Vec<f64>>,
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = SubspaceJson::deserialize(d)?;
        Subspace::from_json(&json, Tolerance::default()).map_err(serde::de::Error::custom)
    }
}

/// Null space `{x : M x = 0}` of an `m x n` matrix.
pub fn kernel(m: &Matrix, tol: Tolerance) -> Subspace {
    Subspace::column_space(&m.transpose(), tol).annihilator()
}

/// Orthogonal projector onto `u`.
pub fn projector(u: &Subspace) -> Matrix {
    u.projector()
}

/// Projector onto `k` along `d`: identity on `k`, zero on `d`.
pub fn oblique_projector(k: &Subspace, d: &Subspace, tol: Tolerance) -> Result<Matrix> {
    let n = k.ambient_dim();
    check_dim("oblique projector", n, d.ambient_dim())?;
    let not_complementary = Error::NotComplementary {
        k: k.dim(),
        d: d.dim(),
        n,
    };
    if k.dim() + d.dim() != n {
        return Err(not_complementary);
    }
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let joint = hstack(&[k.basis(), d.basis()]);
    let sv = linalg::singular_values(&joint);
    let smin = sv.last().copied().unwrap_or(0.0);
    if smin <= tol.rank_rel_tol * sv[0].max(1.0) {
        return Err(not_complementary);
    }
    let inv = joint.try_inverse().ok_or(not_complementary)?;
    Ok(k.basis() * inv.rows(0, k.dim()))
}

/// Moore-Penrose pseudoinverse with the relative rank cutoff of `tol`.
pub fn pseudoinverse(m: &Matrix, tol: Tolerance) -> Matrix {
    linalg::pseudoinverse(m, tol.rank_rel_tol)
}

/// A complement `K = U × W` of `V ⊆ X × Y` whose X-projection complements `V_X`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredComplement {
    /// `U × W`, a complement of `V` in `X × Y`.
    pub k: Subspace,
    /// Orthogonal complement of `v_x` in X.
    pub u: Subspace,
    /// Orthogonal complement of `h` in Y.
    pub w: Subspace,
    /// Projection of `V` onto X.
    pub v_x: Subspace,
    /// Fibre of `V` over zero, `{y : (0, y) ∈ V}`.
    pub h: Subspace,
}

/// Projection of `v ⊆ R^{nx+ny}` onto its first `nx` coordinates.
pub fn project_first(v: &Subspace, nx: usize, ny: usize, tol: Tolerance) -> Result<Subspace> {
    check_dim("projection", nx + ny, v.ambient_dim())?;
    v.image(&linalg::select_first(nx, ny), tol)
}

/// `{y : (0, y) ∈ v}` for `v ⊆ R^{nx+ny}`.
pub fn fibre_over_zero(v: &Subspace, nx: usize, ny: usize, tol: Tolerance) -> Result<Subspace> {
    check_dim("fibre", nx + ny, v.ambient_dim())?;
    let vertical = Subspace::zero(nx).product(&Subspace::full(ny));
    v.intersect(&vertical, tol)?
        .image(&linalg::select_last(nx, ny), tol)
}

pub fn structured_complement(
    v: &Subspace,
    nx: usize,
    ny: usize,
    tol: Tolerance,
) -> Result<StructuredComplement> {
    let v_x = project_first(v, nx, ny, tol)?;
    let h = fibre_over_zero(v, nx, ny, tol)?;
    let u = v_x.annihilator();
    let w = h.annihilator();
    Ok(StructuredComplement {
        k: u.product(&w),
        u,
        w,
        v_x,
        h,
    })
}
