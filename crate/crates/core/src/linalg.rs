//! Dense matrix helpers shared by the subspace and Gaussian layers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Thin singular value decomposition `m = u diag(s) vᵀ`, singular values largest first.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

fn to_faer(m: &Matrix) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Panics only if the decomposition fails to converge, which requires non-finite input.
pub fn svd(m: &Matrix) -> Svd {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Svd {
            u: Matrix::zeros(rows, 0),
            s: Vec::new(),
            v: Matrix::zeros(cols, 0),
        };
    }
    let f = to_faer(m).thin_svd().expect("svd of a finite matrix converges");
    let sd = f.S().column_vector();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sd[b].total_cmp(&sd[a]));
    let (u, v) = (from_faer(f.U()), from_faer(f.V()));
    Svd {
        u: Matrix::from_fn(rows, k, |r, c| u[(r, order[c])]),
        s: order.iter().map(|&i| sd[i]).collect(),
        v: Matrix::from_fn(cols, k, |r, c| v[(r, order[c])]),
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of the symmetric part of `m`.
pub fn sym_eigen(m: &Matrix) -> (Vector, Matrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vector::zeros(0), Matrix::zeros(0, 0));
    }
    let e = to_faer(&symmetrize(m))
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("eigendecomposition of a finite matrix converges");
    let vals = e.S().column_vector();
    (Vector::from_fn(n, |i, _| vals[i]), from_faer(e.U()))
}

/// Singular values of `m`, largest first. Empty for degenerate shapes.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    svd(m).s
}

pub fn spectral_norm(m: &Matrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Left singular vectors of `m` whose singular value exceeds `cutoff`.
pub(crate) fn dominant_left_vectors(m: &Matrix, cutoff: f64) -> Matrix {
    let d = svd(m);
    let keep = d.s.iter().take_while(|&&s| s > cutoff && s > 0.0).count();
    d.u.columns(0, keep).into_owned()
}

/// Moore-Penrose pseudoinverse with a relative singular-value cutoff.
pub fn pseudoinverse(m: &Matrix, rel_tol: f64) -> Matrix {
    let (rows, cols) = m.shape();
    let d = svd(m);
    let cutoff = rel_tol * d.s.first().copied().unwrap_or(0.0);
    let mut out = Matrix::zeros(cols, rows);
    for (i, &s) in d.s.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            out += d.v.column(i) * d.u.column(i).transpose() / s;
        }
    }
    out
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Symmetrizes and clamps small negative eigenvalues to zero.
///
/// Fails with `NotPsd` if the smallest eigenvalue is below `-abs_tol * (1 + ||m||)`.
pub fn clamp_psd(m: &Matrix, abs_tol: f64) -> Result<Matrix> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "covariance must be square",
            expected: n,
            found: m.ncols(),
        });
    }
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let sym = symmetrize(m);
    let (vals, vecs) = sym_eigen(&sym);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = 1.0 + vals.iter().map(|e| e.abs()).fold(0.0, f64::max);
    if min < -abs_tol * scale {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    if min >= 0.0 {
        return Ok(sym);
    }
    let clamped = vals.map(|e| e.max(0.0));
    Ok(symmetrize(&(&vecs * Matrix::from_diagonal(&clamped) * vecs.transpose())))
}

/// Zeroes the eigenvalues of a symmetric form that fall below `cutoff`.
///
/// Used on covariances obtained by subtraction, whose null directions carry
/// roundoff of the size of the inputs rather than of the result.
pub fn clean_psd(m: &Matrix, cutoff: f64) -> Matrix {
    let (vals, vecs) = sym_eigen(m);
    if vals.iter().all(|&e| e > cutoff) {
        return symmetrize(m);
    }
    let kept = vals.map(|e| if e > cutoff { e } else { 0.0 });
    symmetrize(&(&vecs * Matrix::from_diagonal(&kept) * vecs.transpose()))
}

/// Drops singular directions of `m` at or below `cutoff`.
///
/// Products like `P A` with `col(A)` inside `ker P` are pure roundoff and
/// would otherwise look full rank relative to their own tiny norm.
pub fn truncate_rank(m: &Matrix, cutoff: f64) -> Matrix {
    let d = svd(m);
    if d.s.iter().all(|&x| x > cutoff) {
        return m.clone();
    }
    let kept = Vector::from_iterator(d.s.len(), d.s.iter().map(|&x| if x > cutoff { x } else { 0.0 }));
    &d.u * Matrix::from_diagonal(&kept) * d.v.transpose()
}

pub fn hstack(parts: &[&Matrix]) -> Matrix {
    let rows = parts.first().map_or(0, |m| m.nrows());
    let cols: usize = parts.iter().map(|m| m.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut c = 0;
    for p in parts {
        debug_assert_eq!(p.nrows(), rows);
        out.view_mut((0, c), (rows, p.ncols())).copy_from(*p);
        c += p.ncols();
    }
    out
}

pub fn vstack(parts: &[&Matrix]) -> Matrix {
    let cols = parts.first().map_or(0, |m| m.ncols());
    let rows: usize = parts.iter().map(|m| m.nrows()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut r = 0;
    for p in parts {
        debug_assert_eq!(p.ncols(), cols);
        out.view_mut((r, 0), (p.nrows(), cols)).copy_from(*p);
        r += p.nrows();
    }
    out
}

pub fn block_diag(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

pub fn concat(a: &Vector, b: &Vector) -> Vector {
    Vector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

/// Rows `start..start+len` of `m`.
pub fn rows(m: &Matrix, start: usize, len: usize) -> Matrix {
    m.rows(start, len).into_owned()
}

pub fn cols(m: &Matrix, start: usize, len: usize) -> Matrix {
    m.columns(start, len).into_owned()
}

pub fn segment(v: &Vector, start: usize, len: usize) -> Vector {
    v.rows(start, len).into_owned()
}

/// `[I_n | 0]` selecting the first `n` of `n + m` coordinates.
pub fn select_first(n: usize, m: usize) -> Matrix {
    hstack(&[&Matrix::identity(n, n), &Matrix::zeros(n, m)])
}

/// `[0 | I_m]` selecting the last `m` of `n + m` coordinates.
pub fn select_last(n: usize, m: usize) -> Matrix {
    hstack(&[&Matrix::zeros(m, n), &Matrix::identity(m, m)])
}

/// Largest absolute entrywise difference; infinite on shape mismatch.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff_vec(a: &Vector, b: &Vector) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| m.row(r).iter().copied().collect())
        .collect()
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>], ncols: usize) -> Result<Matrix> {
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::Malformed(format!(
            "row of length {} where {} expected",
            bad.len(),
            ncols
        )));
    }
    Ok(Matrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}
