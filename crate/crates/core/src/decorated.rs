//! Decorated linear maps and decorated linear relations.
//!
//! A [`Decoration`] assigns a commutative monoid of "noise data" to every
//! R^m together with a pushforward along matrices. From it we get two
//! categories:
//!
//! * [`Lin`]: morphisms `(f, s)` read as `x ↦ f x + s`, composed by
//!   `(f, t) ∘ (g, s) = (f g, t + f_* s)`.
//! * [`Rel`]: morphisms `(D, f, s)` read as `x ↦ f x + s + D`, where only the
//!   quotient by `D` matters. The quotient `Y/D` is realized as `D^⊥`, so a
//!   morphism is in normal form when `f = P f` and `s = P_* s` with
//!   `P` the orthogonal projector onto `D^⊥`.
//!
//! Instances: [`ZeroDec`] gives linear maps and left-total linear relations,
//! [`PointDec`] affine maps and affine relations, and
//! `PairDec<PointDec, CovDec>` Gaussian maps and extended Gaussian maps.

use std::fmt::Debug;

use crate::error::{check_dim, Result};
use crate::linalg::{self, block_diag, select_first, select_last, vstack, Matrix, Vector};
use crate::subspace::{Subspace, Tolerance};

/// A functor from matrices to commutative monoids.
///
/// Implementations must satisfy the monoid laws for `zero`/`add` and
/// `push(B, push(A, s)) = push(B A, s)`, `push(A, s + t) = push(A, s) + push(A, t)`.
pub trait Decoration {
    type Value: Clone + Debug;

    /// Dimension of the space a value decorates.
    fn dim(&self, s: &Self::Value) -> usize;
    fn zero(&self, dim: usize) -> Self::Value;
    fn add(&self, s: &Self::Value, t: &Self::Value) -> Self::Value;
    fn push(&self, a: &Matrix, s: &Self::Value) -> Self::Value;
    fn approx_eq(&self, s: &Self::Value, t: &Self::Value, tol: Tolerance) -> bool;

    /// Decoration of the product space: `push(i_X, s) + push(i_Y, t)`.
    fn oplus(&self, s: &Self::Value, t: &Self::Value) -> Self::Value {
        let (n, m) = (self.dim(s), self.dim(t));
        let i_x = select_first(n, m).transpose();
        let i_y = select_last(n, m).transpose();
        self.add(&self.push(&i_x, s), &self.push(&i_y, t))
    }
}

/// `S(X) = 0`. Values carry only their dimension.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroDec;

impl Decoration for ZeroDec {
    type Value = usize;

    fn dim(&self, s: &usize) -> usize {
        *s
    }
    fn zero(&self, dim: usize) -> usize {
        dim
    }
    fn add(&self, s: &usize, _t: &usize) -> usize {
        *s
    }
    fn push(&self, a: &Matrix, _s: &usize) -> usize {
        a.nrows()
    }
    fn approx_eq(&self, s: &usize, t: &usize, _tol: Tolerance) -> bool {
        s == t
    }
}

/// `S(X) = X` under vector addition; decorated maps are affine maps.
#[derive(Debug, Clone, Copy, Default)]
pub struct PointDec;

impl Decoration for PointDec {
    type Value = Vector;

    fn dim(&self, s: &Vector) -> usize {
        s.len()
    }
    fn zero(&self, dim: usize) -> Vector {
        Vector::zeros(dim)
    }
    fn add(&self, s: &Vector, t: &Vector) -> Vector {
        s + t
    }
    fn push(&self, a: &Matrix, s: &Vector) -> Vector {
        a * s
    }
    fn approx_eq(&self, s: &Vector, t: &Vector, tol: Tolerance) -> bool {
        linalg::max_abs_diff_vec(s, t) <= tol.eq_abs_tol
    }
    fn oplus(&self, s: &Vector, t: &Vector) -> Vector {
        linalg::concat(s, t)
    }
}

/// Subspaces under Minkowski sum, pushed forward by direct image.
#[derive(Debug, Clone, Copy, Default)]
pub struct SubDec {
    pub tol: Tolerance,
}

impl Decoration for SubDec {
    type Value = Subspace;

    fn dim(&self, s: &Subspace) -> usize {
        s.ambient_dim()
    }
    fn zero(&self, dim: usize) -> Subspace {
        Subspace::zero(dim)
    }
    fn add(&self, s: &Subspace, t: &Subspace) -> Subspace {
        s.sum(t, self.tol).expect("decorations of one space share a dimension")
    }
    fn push(&self, a: &Matrix, s: &Subspace) -> Subspace {
        s.image(a, self.tol).expect("pushforward shape")
    }
    fn approx_eq(&self, s: &Subspace, t: &Subspace, tol: Tolerance) -> bool {
        s.approx_eq(t, tol)
    }
    fn oplus(&self, s: &Subspace, t: &Subspace) -> Subspace {
        s.product(t)
    }
}

/// Covariance forms (PSD matrices) under addition, pushed forward as `A σ Aᵀ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CovDec;

impl Decoration for CovDec {
    type Value = Matrix;

    fn dim(&self, s: &Matrix) -> usize {
        s.nrows()
    }
    fn zero(&self, dim: usize) -> Matrix {
        Matrix::zeros(dim, dim)
    }
    fn add(&self, s: &Matrix, t: &Matrix) -> Matrix {
        s + t
    }
    fn push(&self, a: &Matrix, s: &Matrix) -> Matrix {
        linalg::symmetrize(&(a * s * a.transpose()))
    }
    fn approx_eq(&self, s: &Matrix, t: &Matrix, tol: Tolerance) -> bool {
        linalg::max_abs_diff(s, t) <= tol.eq_abs_tol
    }
    fn oplus(&self, s: &Matrix, t: &Matrix) -> Matrix {
        block_diag(s, t)
    }
}

/// Product of two decorations, componentwise.
#[derive(Debug, Clone, Copy, Default)]
pub struct PairDec<S, T>(pub S, pub T);

impl<S: Decoration, T: Decoration> Decoration for PairDec<S, T> {
    type Value = (S::Value, T::Value);

    fn dim(&self, s: &Self::Value) -> usize {
        self.0.dim(&s.0)
    }
    fn zero(&self, dim: usize) -> Self::Value {
        (self.0.zero(dim), self.1.zero(dim))
    }
    fn add(&self, s: &Self::Value, t: &Self::Value) -> Self::Value {
        (self.0.add(&s.0, &t.0), self.1.add(&s.1, &t.1))
    }
    fn push(&self, a: &Matrix, s: &Self::Value) -> Self::Value {
        (self.0.push(a, &s.0), self.1.push(a, &s.1))
    }
    fn approx_eq(&self, s: &Self::Value, t: &Self::Value, tol: Tolerance) -> bool {
        self.0.approx_eq(&s.0, &t.0, tol) && self.1.approx_eq(&s.1, &t.1, tol)
    }
    fn oplus(&self, s: &Self::Value, t: &Self::Value) -> Self::Value {
        (self.0.oplus(&s.0, &t.0), self.1.oplus(&s.1, &t.1))
    }
}

/// The decoration whose decorated linear maps are Gaussian maps.
pub type GaussDec = PairDec<PointDec, CovDec>;

/// A natural transformation between decorations, given componentwise.
pub trait DecorationMap<S: Decoration, T: Decoration> {
    fn apply(&self, s: &S::Value) -> T::Value;
}

/// The identity transformation.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityMap;

impl<S: Decoration> DecorationMap<S, S> for IdentityMap {
    fn apply(&self, s: &S::Value) -> S::Value {
        s.clone()
    }
}

/// The unique transformation into [`ZeroDec`], forgetting the decoration.
#[derive(Debug, Clone, Copy, Default)]
pub struct Forget<S>(pub S);

impl<S: Decoration> DecorationMap<S, ZeroDec> for Forget<S> {
    fn apply(&self, s: &S::Value) -> usize {
        self.0.dim(s)
    }
}

/// The zero transformation `S → Sub`, sending everything to the zero subspace.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroSub<S>(pub S);

impl<S: Decoration> DecorationMap<S, SubDec> for ZeroSub<S> {
    fn apply(&self, s: &S::Value) -> Subspace {
        Subspace::zero(self.0.dim(s))
    }
}

/// Covariance form to its support `col(σ)`, the annihilator of its kernel.
#[derive(Debug, Clone, Copy, Default)]
pub struct CovToSupport {
    pub tol: Tolerance,
}

impl DecorationMap<CovDec, SubDec> for CovToSupport {
    fn apply(&self, s: &Matrix) -> Subspace {
        Subspace::column_space(s, self.tol)
    }
}

/// Componentwise transformation of a [`PairDec`].
#[derive(Debug, Clone, Copy, Default)]
pub struct PairMap<A, B>(pub A, pub B);

impl<S1, S2, T1, T2, A, B> DecorationMap<PairDec<S1, S2>, PairDec<T1, T2>> for PairMap<A, B>
where
    S1: Decoration,
    S2: Decoration,
    T1: Decoration,
    T2: Decoration,
    A: DecorationMap<S1, T1>,
    B: DecorationMap<S2, T2>,
{
    fn apply(&self, s: &(S1::Value, S2::Value)) -> (T1::Value, T2::Value) {
        (self.0.apply(&s.0), self.1.apply(&s.1))
    }
}

/// A decorated linear map `x ↦ f x + s`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoratedMap<V> {
    pub f: Matrix,
    pub s: V,
}

impl<V> DecoratedMap<V> {
    pub fn dom(&self) -> usize {
        self.f.ncols()
    }
    pub fn cod(&self) -> usize {
        self.f.nrows()
    }
}

/// A decorated linear relation `x ↦ f x + s + D`, kept in normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoratedRel<V> {
    pub nondet: Subspace,
    pub f: Matrix,
    pub s: V,
}

impl<V> DecoratedRel<V> {
    pub fn dom(&self) -> usize {
        self.f.ncols()
    }
    pub fn cod(&self) -> usize {
        self.f.nrows()
    }
}

/// The category of `S`-decorated linear maps.
#[derive(Debug, Clone, Copy, Default)]
pub struct Lin<S> {
    pub dec: S,
}

impl<S: Decoration> Lin<S> {
    pub fn new(dec: S) -> Self {
        Self { dec }
    }

    pub fn morphism(&self, f: Matrix, s: S::Value) -> Result<DecoratedMap<S::Value>> {
        check_dim("decoration dimension", f.nrows(), self.dec.dim(&s))?;
        Ok(DecoratedMap { f, s })
    }

    /// The undecorated map `(f, 0)`.
    pub fn plain(&self, f: Matrix) -> DecoratedMap<S::Value> {
        let s = self.dec.zero(f.nrows());
        DecoratedMap { f, s }
    }

    pub fn identity(&self, n: usize) -> DecoratedMap<S::Value> {
        self.plain(Matrix::identity(n, n))
    }

    pub fn copy(&self, n: usize) -> DecoratedMap<S::Value> {
        let i = Matrix::identity(n, n);
        self.plain(vstack(&[&i, &i]))
    }

    pub fn delete(&self, n: usize) -> DecoratedMap<S::Value> {
        self.plain(Matrix::zeros(0, n))
    }

    pub fn swap(&self, n: usize, m: usize) -> DecoratedMap<S::Value> {
        self.plain(crate::linrel::swap(n, m))
    }

    /// `second ∘ first = (f₂ f₁, t + f₂_* s)`.
    pub fn compose(
        &self,
        second: &DecoratedMap<S::Value>,
        first: &DecoratedMap<S::Value>,
    ) -> Result<DecoratedMap<S::Value>> {
        check_dim("decorated map composition", first.cod(), second.dom())?;
        Ok(DecoratedMap {
            f: &second.f * &first.f,
            s: self.dec.add(&second.s, &self.dec.push(&second.f, &first.s)),
        })
    }

    pub fn tensor(
        &self,
        a: &DecoratedMap<S::Value>,
        b: &DecoratedMap<S::Value>,
    ) -> DecoratedMap<S::Value> {
        DecoratedMap {
            f: block_diag(&a.f, &b.f),
            s: self.dec.oplus(&a.s, &b.s),
        }
    }

    pub fn approx_eq(
        &self,
        a: &DecoratedMap<S::Value>,
        b: &DecoratedMap<S::Value>,
        tol: Tolerance,
    ) -> bool {
        linalg::max_abs_diff(&a.f, &b.f) <= tol.eq_abs_tol && self.dec.approx_eq(&a.s, &b.s, tol)
    }
}

/// The induced functor `Lin_S → Lin_T`, `(f, s) ↦ (f, α(s))`.
pub fn functor_f<S, T, A>(alpha: &A, m: &DecoratedMap<S::Value>) -> DecoratedMap<T::Value>
where
    S: Decoration,
    T: Decoration,
    A: DecorationMap<S, T>,
{
    DecoratedMap {
        f: m.f.clone(),
        s: alpha.apply(&m.s),
    }
}

/// The induced functor `Rel_S → Rel_T`, `(D, f, s) ↦ (D, f, α(s))`.
pub fn functor_g<S, T, A>(
    alpha: &A,
    target: &Rel<T>,
    m: &DecoratedRel<S::Value>,
) -> DecoratedRel<T::Value>
where
    S: Decoration,
    T: Decoration,
    A: DecorationMap<S, T>,
{
    // naturality makes this renormalization a no-op up to roundoff
    target.normalize(m.f.clone(), alpha.apply(&m.s), m.nondet.clone())
}

/// The category of `S`-decorated linear relations.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rel<S> {
    pub dec: S,
    pub tol: Tolerance,
}

impl<S: Decoration> Rel<S> {
    pub fn new(dec: S, tol: Tolerance) -> Self {
        Self { dec, tol }
    }

    /// Brings a representative `(f, s, D)` to normal form.
    pub fn normalize(&self, f: Matrix, s: S::Value, nondet: Subspace) -> DecoratedRel<S::Value> {
        let p = nondet.complement_projector();
        DecoratedRel {
            f: &p * f,
            s: self.dec.push(&p, &s),
            nondet,
        }
    }

    pub fn morphism(
        &self,
        f: Matrix,
        s: S::Value,
        nondet: Subspace,
    ) -> Result<DecoratedRel<S::Value>> {
        check_dim("decoration dimension", f.nrows(), self.dec.dim(&s))?;
        check_dim("nondeterminism subspace", f.nrows(), nondet.ambient_dim())?;
        Ok(self.normalize(f, s, nondet))
    }

    /// The quotient `Lin_{S × Sub} → Rel_S`.
    pub fn quotient(&self, m: &DecoratedMap<(S::Value, Subspace)>) -> DecoratedRel<S::Value> {
        self.normalize(m.f.clone(), m.s.0.clone(), m.s.1.clone())
    }

    /// The inclusion `Lin_S → Rel_S` with `D = 0`.
    pub fn include(&self, m: &DecoratedMap<S::Value>) -> DecoratedRel<S::Value> {
        DecoratedRel {
            nondet: Subspace::zero(m.cod()),
            f: m.f.clone(),
            s: m.s.clone(),
        }
    }

    pub fn identity(&self, n: usize) -> DecoratedRel<S::Value> {
        self.include(&Lin::new(&self.dec).identity(n))
    }

    pub fn copy(&self, n: usize) -> DecoratedRel<S::Value> {
        self.include(&Lin::new(&self.dec).copy(n))
    }

    pub fn delete(&self, n: usize) -> DecoratedRel<S::Value> {
        self.include(&Lin::new(&self.dec).delete(n))
    }

    pub fn swap(&self, n: usize, m: usize) -> DecoratedRel<S::Value> {
        self.include(&Lin::new(&self.dec).swap(n, m))
    }

    /// `(E, f₂, t) ∘ (D, f₁, s)` with composite subspace `F = E + f₂[D]`.
    pub fn compose(
        &self,
        second: &DecoratedRel<S::Value>,
        first: &DecoratedRel<S::Value>,
    ) -> Result<DecoratedRel<S::Value>> {
        check_dim("decorated relation composition", first.cod(), second.dom())?;
        let nondet = second
            .nondet
            .sum(&first.nondet.image(&second.f, self.tol)?, self.tol)?;
        let q = nondet.complement_projector();
        let cutoff = self.tol.rank_rel_tol * linalg::spectral_norm(&second.f);
        let qf = linalg::truncate_rank(&(&q * &second.f), cutoff);
        let s = self
            .dec
            .add(&self.dec.push(&qf, &first.s), &self.dec.push(&q, &second.s));
        Ok(DecoratedRel {
            f: &qf * &first.f,
            s,
            nondet,
        })
    }

    pub fn tensor(
        &self,
        a: &DecoratedRel<S::Value>,
        b: &DecoratedRel<S::Value>,
    ) -> DecoratedRel<S::Value> {
        DecoratedRel {
            nondet: a.nondet.product(&b.nondet),
            f: block_diag(&a.f, &b.f),
            s: self.dec.oplus(&a.s, &b.s),
        }
    }

    /// Equality modulo the congruence: same `D`, and equal after projecting onto `D^⊥`.
    pub fn congruent(
        &self,
        a: &DecoratedRel<S::Value>,
        b: &DecoratedRel<S::Value>,
        tol: Tolerance,
    ) -> bool {
        if a.dom() != b.dom() || a.cod() != b.cod() || !a.nondet.approx_eq(&b.nondet, tol) {
            return false;
        }
        let p = a.nondet.complement_projector();
        linalg::max_abs_diff(&(&p * &a.f), &(&p * &b.f)) <= tol.eq_abs_tol
            && self
                .dec
                .approx_eq(&self.dec.push(&p, &a.s), &self.dec.push(&p, &b.s), tol)
    }
}

impl<S: Decoration> Decoration for &S {
    type Value = S::Value;

    fn dim(&self, s: &Self::Value) -> usize {
        (*self).dim(s)
    }
    fn zero(&self, dim: usize) -> Self::Value {
        (*self).zero(dim)
    }
    fn add(&self, s: &Self::Value, t: &Self::Value) -> Self::Value {
        (*self).add(s, t)
    }
    fn push(&self, a: &Matrix, s: &Self::Value) -> Self::Value {
        (*self).push(a, s)
    }
    fn approx_eq(&self, s: &Self::Value, t: &Self::Value, tol: Tolerance) -> bool {
        (*self).approx_eq(s, t, tol)
    }
    fn oplus(&self, s: &Self::Value, t: &Self::Value) -> Self::Value {
        (*self).oplus(s, t)
    }
}
