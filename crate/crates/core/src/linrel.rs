//! Left-total linear and affine relations.
//!
//! A relation `R ⊆ X × Y` is stored as its graph, a subspace of R^{n+m}
//! (plus a base point in the affine case). Left-total linear relations are in
//! bijection with linear maps into a quotient `X → Y/R(0)`; [`QuotientForm`]
//! is that second view, with `Y/D` realized as the complement `D^⊥`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, block_diag, hstack, vstack, Matrix, Vector};
use crate::subspace::{fibre_over_zero, project_first, Subspace, Tolerance};

/// A left-total linear relation `R ⊆ R^dom × R^cod`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRelation {
    dom: usize,
    cod: usize,
    graph: Subspace,
}

/// A linear map into the quotient `R^cod / D`, with rows in `D^⊥`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientForm {
    nondet: Subspace,
    map: Matrix,
}

impl QuotientForm {
    /// Normalizes `map` so that its columns lie in `nondet^⊥`.
    pub fn new(nondet: Subspace, map: &Matrix) -> Result<Self> {
        check_dim("quotient form", nondet.ambient_dim(), map.nrows())?;
        let map = nondet.complement_projector() * map;
        Ok(Self { nondet, map })
    }

    /// The locus of nondeterminism `D = R(0)`.
    pub fn nondet(&self) -> &Subspace {
        &self.nondet
    }

    pub fn map(&self) -> &Matrix {
        &self.map
    }

    pub fn approx_eq(&self, other: &Self, tol: Tolerance) -> bool {
        self.nondet.approx_eq(&other.nondet, tol)
            && linalg::max_abs_diff(&self.map, &other.map) <= tol.eq_abs_tol
    }
}

impl LinearRelation {
    /// Wraps a graph, rejecting relations that are not left-total.
    pub fn new(dom: usize, cod: usize, graph: Subspace, tol: Tolerance) -> Result<Self> {
        check_dim("relation graph", dom + cod, graph.ambient_dim())?;
        if !project_first(&graph, dom, cod, tol)?.is_full() {
            return Err(Error::NotLeftTotal);
        }
        Ok(Self { dom, cod, graph })
    }

    /// Graph of the linear map `x ↦ A x`.
    pub fn from_map(a: &Matrix, tol: Tolerance) -> Self {
        let (cod, dom) = a.shape();
        let g = vstack(&[&Matrix::identity(dom, dom), a]);
        Self {
            dom,
            cod,
            graph: Subspace::column_space(&g, tol),
        }
    }

    pub fn identity(n: usize, tol: Tolerance) -> Self {
        Self::from_map(&Matrix::identity(n, n), tol)
    }

    pub fn copy(n: usize, tol: Tolerance) -> Self {
        let i = Matrix::identity(n, n);
        Self::from_map(&vstack(&[&i, &i]), tol)
    }

    pub fn delete(n: usize) -> Self {
        Self {
            dom: n,
            cod: 0,
            graph: Subspace::full(n),
        }
    }

    /// The relation relating every input to every output.
    pub fn total(dom: usize, cod: usize) -> Self {
        Self {
            dom,
            cod,
            graph: Subspace::full(dom + cod),
        }
    }

    pub fn dom(&self) -> usize {
        self.dom
    }

    pub fn cod(&self) -> usize {
        self.cod
    }

    pub fn graph(&self) -> &Subspace {
        &self.graph
    }

    pub fn relates(&self, x: &Vector, y: &Vector, tol: Tolerance) -> bool {
        x.len() == self.dom && y.len() == self.cod && self.graph.contains(&linalg::concat(x, y), tol)
    }

    /// `R(0) = {y : (0, y) ∈ R}`.
    pub fn fibre_at_zero(&self, tol: Tolerance) -> Subspace {
        fibre_over_zero(&self.graph, self.dom, self.cod, tol).expect("graph shape checked")
    }

    /// Relational composite `self ∘ first`.
    pub fn compose(&self, first: &LinearRelation, tol: Tolerance) -> Result<Self> {
        check_dim("relation composition", first.cod, self.dom)?;
        let (n, m, p) = (first.dom, first.cod, self.cod);
        let c1 = first.graph.product(&Subspace::full(p));
        let c2 = Subspace::full(n).product(&self.graph);
        let meet = c1.intersect(&c2, tol)?;
        let drop_middle = drop_middle(n, m, p);
        Ok(Self {
            dom: n,
            cod: p,
            graph: meet.image(&drop_middle, tol)?,
        })
    }

    pub fn tensor(&self, other: &LinearRelation) -> Self {
        // graph lives in X × Y × X' × Y'; reorder to X × X' × Y × Y'
        let g = self.graph.product(&other.graph);
        let perm = shuffle(self.dom, self.cod, other.dom, other.cod);
        Self {
            dom: self.dom + other.dom,
            cod: self.cod + other.cod,
            graph: g.image(&perm, Tolerance::default()).expect("permutation shape"),
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: Tolerance) -> bool {
        self.dom == other.dom && self.cod == other.cod && self.graph.approx_eq(&other.graph, tol)
    }

    /// `x ↦ f(x) + R(0)` with `f` the minimum-norm representative.
    pub fn to_quotient_form(&self, tol: Tolerance) -> Result<QuotientForm> {
        if !project_first(&self.graph, self.dom, self.cod, tol)?.is_full() {
            return Err(Error::NotLeftTotal);
        }
        let (h, nondet) = graph_decompose(&self.graph, self.dom, self.cod, tol)?;
        QuotientForm::new(nondet, &h)
    }

    pub fn from_quotient_form(q: &QuotientForm, tol: Tolerance) -> Self {
        let (cod, dom) = q.map.shape();
        let g = vstack(&[&Matrix::identity(dom, dom), &q.map]);
        let g = hstack(&[&g, &vstack(&[&Matrix::zeros(dom, q.nondet.dim()), q.nondet.basis()])]);
        Self {
            dom,
            cod,
            graph: Subspace::column_space(&g, tol),
        }
    }

    /// Conditional `(X × A) → Y` of a relation `A → X × Y`.
    ///
    /// The graph is reordered to `(X × A) × Y`; outside its domain the
    /// relation is extended by the zero function along the orthogonal
    /// complement of the domain, so `(x, a)` there is related to `H`.
    pub fn conditional(&self, nx: usize, tol: Tolerance) -> Result<Self> {
        if nx > self.cod {
            return Err(Error::DimensionMismatch {
                context: "conditional split exceeds codomain",
                expected: self.cod,
                found: nx,
            });
        }
        let (na, ny) = (self.dom, self.cod - nx);
        let reorder = block_diag(&swap(na, nx), &Matrix::identity(ny, ny));
        let g = self.graph.image(&reorder, tol)?;
        let domain = project_first(&g, nx + na, ny, tol)?;
        let extension = domain.annihilator().product(&Subspace::zero(ny));
        Ok(Self {
            dom: nx + na,
            cod: ny,
            graph: g.sum(&extension, tol)?,
        })
    }

    pub fn to_json(&self) -> RelationJson {
        RelationJson {
            dom: self.dom,
            cod: self.cod,
            graph_basis: self.graph.to_json().basis,
        }
    }

    pub fn from_json(json: &RelationJson, tol: Tolerance) -> Result<Self> {
        let n = json.dom + json.cod;
        let cols: Vec<Vector> = json
            .graph_basis
            .iter()
            .map(|c| Vector::from_column_slice(c))
            .collect();
        let graph = Subspace::span(n, &cols, tol)?;
        Self::new(json.dom, json.cod, graph, tol)
    }
}

/// Wire form `{"dom", "cod", "graph_basis"}`; one inner list per basis vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationJson {
    pub dom: usize,
    pub cod: usize,
    pub graph_basis: Vec<Vec<f64>>,
}

/// Splits `D ⊆ X × Y` into a slope `h : X → Y` and fibre `H`, with
/// `D = {(x, h x + η) : x ∈ D_X, η ∈ H}` and `h` zero on `D_X^⊥`.
pub fn graph_decompose(
    d: &Subspace,
    nx: usize,
    ny: usize,
    tol: Tolerance,
) -> Result<(Matrix, Subspace)> {
    check_dim("graph decomposition", nx + ny, d.ambient_dim())?;
    let h_space = fibre_over_zero(d, nx, ny, tol)?;
    let bx = linalg::rows(d.basis(), 0, nx);
    let by = linalg::rows(d.basis(), nx, ny);
    let slope = by * linalg::pseudoinverse(&bx, tol.rank_rel_tol);
    Ok((slope, h_space))
}

/// `(a, x) ↦ (x, a)` as a permutation matrix on R^{na+nx}.
pub(crate) fn swap(na: usize, nx: usize) -> Matrix {
    let mut p = Matrix::zeros(na + nx, na + nx);
    for i in 0..nx {
        p[(i, na + i)] = 1.0;
    }
    for i in 0..na {
        p[(nx + i, i)] = 1.0;
    }
    p
}

/// `(x, y, x', y') ↦ (x, x', y, y')`.
pub(crate) fn shuffle(n1: usize, m1: usize, n2: usize, m2: usize) -> Matrix {
    block_diag(
        &Matrix::identity(n1, n1),
        &block_diag(&swap(m1, n2), &Matrix::identity(m2, m2)),
    )
}

/// `(x, y, z) ↦ (x, z)`.
fn drop_middle(n: usize, m: usize, p: usize) -> Matrix {
    let mut out = Matrix::zeros(n + p, n + m + p);
    for i in 0..n {
        out[(i, i)] = 1.0;
    }
    for i in 0..p {
        out[(n + i, n + m + i)] = 1.0;
    }
    out
}

/// A left-total affine relation `base + direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineRelation {
    base: Vector,
    direction: LinearRelation,
}

/// An affine map into a quotient, `x ↦ map x + offset + D`, with `offset ∈ D^⊥`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineQuotientForm {
    pub linear: QuotientForm,
    pub offset: Vector,
}

impl AffineQuotientForm {
    pub fn new(linear: QuotientForm, offset: &Vector) -> Result<Self> {
        check_dim("affine quotient offset", linear.nondet.ambient_dim(), offset.len())?;
        let offset = linear.nondet.complement_projector() * offset;
        Ok(Self { linear, offset })
    }

    pub fn approx_eq(&self, other: &Self, tol: Tolerance) -> bool {
        self.linear.approx_eq(&other.linear, tol)
            && linalg::max_abs_diff_vec(&self.offset, &other.offset) <= tol.eq_abs_tol
    }
}

impl AffineRelation {
    /// The base point is reduced to its component orthogonal to the direction.
    pub fn new(base: &Vector, direction: LinearRelation) -> Result<Self> {
        check_dim("affine relation base point", direction.dom + direction.cod, base.len())?;
        let base = direction.graph.complement_projector() * base;
        Ok(Self { base, direction })
    }

    /// Graph of `x ↦ A x + b`.
    pub fn from_affine_map(a: &Matrix, b: &Vector, tol: Tolerance) -> Result<Self> {
        check_dim("affine map offset", a.nrows(), b.len())?;
        let base = linalg::concat(&Vector::zeros(a.ncols()), b);
        Self::new(&base, LinearRelation::from_map(a, tol))
    }

    pub fn from_linear(r: LinearRelation) -> Self {
        let n = r.dom + r.cod;
        Self {
            base: Vector::zeros(n),
            direction: r,
        }
    }

    pub fn dom(&self) -> usize {
        self.direction.dom
    }

    pub fn cod(&self) -> usize {
        self.direction.cod
    }

    pub fn base(&self) -> &Vector {
        &self.base
    }

    pub fn direction(&self) -> &LinearRelation {
        &self.direction
    }

    pub fn relates(&self, x: &Vector, y: &Vector, tol: Tolerance) -> bool {
        if x.len() != self.dom() || y.len() != self.cod() {
            return false;
        }
        let p = linalg::concat(x, y) - &self.base;
        self.direction.graph.contains(&p, tol)
    }

    /// Relational composite `self ∘ first`.
    pub fn compose(&self, first: &AffineRelation, tol: Tolerance) -> Result<Self> {
        check_dim("affine relation composition", first.cod(), self.dom())?;
        let (n, m, p) = (first.dom(), first.cod(), self.cod());
        let c1 = first.direction.graph.product(&Subspace::full(p));
        let c2 = Subspace::full(n).product(&self.direction.graph);
        let p1 = linalg::concat(&first.base, &Vector::zeros(p));
        let p2 = linalg::concat(&Vector::zeros(n), &self.base);
        let (point, dir) = affine_intersection(&p1, &c1, &p2, &c2, tol)?;
        let drop = drop_middle(n, m, p);
        let direction = LinearRelation {
            dom: n,
            cod: p,
            graph: dir.image(&drop, tol)?,
        };
        Self::new(&(drop * point), direction)
    }

    pub fn to_quotient_form(&self, tol: Tolerance) -> Result<AffineQuotientForm> {
        let linear = self.direction.to_quotient_form(tol)?;
        // base = (bx, by): the fibre over 0 is by - f(bx) + D
        let bx = linalg::segment(&self.base, 0, self.dom());
        let by = linalg::segment(&self.base, self.dom(), self.cod());
        let offset = by - linear.map() * bx;
        AffineQuotientForm::new(linear, &offset)
    }

    pub fn from_quotient_form(q: &AffineQuotientForm, tol: Tolerance) -> Result<Self> {
        let direction = LinearRelation::from_quotient_form(&q.linear, tol);
        let base = linalg::concat(&Vector::zeros(direction.dom), &q.offset);
        Self::new(&base, direction)
    }

    pub fn approx_eq(&self, other: &Self, tol: Tolerance) -> bool {
        self.direction.approx_eq(&other.direction, tol)
            && self.direction.graph.contains(&(&self.base - &other.base), tol)
    }
}

/// Intersection of `p1 + L1` and `p2 + L2`; fails if they are disjoint.
pub(crate) fn affine_intersection(
    p1: &Vector,
    l1: &Subspace,
    p2: &Vector,
    l2: &Subspace,
    tol: Tolerance,
) -> Result<(Vector, Subspace)> {
    let m = hstack(&[l1.basis(), &(-l2.basis())]);
    let rhs = p2 - p1;
    let c = linalg::pseudoinverse(&m, tol.rank_rel_tol) * &rhs;
    let residual = (&m * &c - &rhs).norm();
    let bound = tol.eq_abs_tol * (1.0 + rhs.norm());
    if residual > bound {
        return Err(Error::EmptyIntersection { residual });
    }
    let point = p1 + l1.basis() * c.rows(0, l1.dim());
    Ok((point, l1.intersect(l2, tol)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn m(r: usize, c: usize, xs: &[f64]) -> Matrix {
        Matrix::from_row_slice(r, c, xs)
    }

    fn span(n: usize, vs: &[&[f64]]) -> Subspace {
        let vs: Vec<Vector> = vs.iter().map(|x| v(x)).collect();
        Subspace::span(n, &vs, tol()).unwrap()
    }

    #[test]
    fn left_totality_is_enforced() {
        let vertical = span(2, &[&[0.0, 1.0]]);
        assert_eq!(
            LinearRelation::new(1, 1, vertical, tol()).unwrap_err(),
            Error::NotLeftTotal
        );
        assert!(LinearRelation::new(1, 1, Subspace::full(2), tol()).is_ok());
    }

    #[test]
    fn compose_with_identity_and_functions() {
        let r = LinearRelation::new(2, 1, span(3, &[&[1.0, 0.0, 2.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]), tol()).unwrap();
        let id = LinearRelation::identity(1, tol());
        assert!(id.compose(&r, tol()).unwrap().approx_eq(&r, tol()));

        let a = m(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        let b = m(1, 2, &[3.0, -1.0]);
        let ga = LinearRelation::from_map(&a, tol());
        let gb = LinearRelation::from_map(&b, tol());
        let expected = LinearRelation::from_map(&(&b * &a), tol());
        assert!(gb.compose(&ga, tol()).unwrap().approx_eq(&expected, tol()));
    }

    #[test]
    fn compose_shape_mismatch() {
        let a = LinearRelation::identity(2, tol());
        let b = LinearRelation::identity(3, tol());
        assert!(a.compose(&b, tol()).is_err());
    }

    #[test]
    fn compose_with_total_relation_is_total() {
        let total = LinearRelation::total(1, 1);
        let r = LinearRelation::from_map(&m(1, 1, &[2.0]), tol());
        let c = total.compose(&r, tol()).unwrap();
        // every grid point is related
        for i in -3..=3 {
            for j in -3..=3 {
                assert!(c.relates(&v(&[i as f64 / 2.0]), &v(&[j as f64 / 3.0]), tol()));
            }
        }
        assert!(c.graph().is_full());
    }

    #[test]
    fn quotient_form_examples() {
        let diag = LinearRelation::identity(1, tol());
        let q = diag.to_quotient_form(tol()).unwrap();
        assert!(q.nondet().is_zero());
        assert!((q.map()[(0, 0)] - 1.0).abs() < 1e-12);

        let total = LinearRelation::total(1, 1);
        let q = total.to_quotient_form(tol()).unwrap();
        assert!(q.nondet().is_full());
        assert!(q.map()[(0, 0)].abs() < 1e-12);

        // R ⊆ R × R²: y - (2x, x) ∈ span{(1, 1)}
        let r = LinearRelation::from_quotient_form(
            &QuotientForm::new(span(2, &[&[1.0, 1.0]]), &m(2, 1, &[2.0, 1.0])).unwrap(),
            tol(),
        );
        let q = r.to_quotient_form(tol()).unwrap();
        assert!(q.nondet().approx_eq(&span(2, &[&[1.0, 1.0]]), tol()));
        for x in [-1.5, 0.0, 0.7, 4.0] {
            for d in [-2.0, 0.0, 3.0] {
                let y = q.map() * v(&[x]) + v(&[d, d]);
                assert!(r.relates(&v(&[x]), &y, tol()));
                let naive = v(&[2.0 * x + d, x + d]);
                assert!(r.relates(&v(&[x]), &naive, tol()));
            }
            assert!(!r.relates(&v(&[x]), &v(&[2.0 * x + 1.0, x]), tol()));
        }
    }

    #[test]
    fn quotient_form_rejects_partial_relation() {
        let partial = LinearRelation {
            dom: 1,
            cod: 1,
            graph: span(2, &[&[0.0, 1.0]]),
        };
        assert_eq!(partial.to_quotient_form(tol()).unwrap_err(), Error::NotLeftTotal);
    }

    #[test]
    fn graph_decompose_examples() {
        let diag = span(2, &[&[1.0, 1.0]]);
        let (h, hs) = graph_decompose(&diag, 1, 1, tol()).unwrap();
        assert!((h[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(hs.is_zero());

        let vertical = Subspace::zero(2).product(&Subspace::full(3));
        let (h, hs) = graph_decompose(&vertical, 2, 3, tol()).unwrap();
        assert!(h.iter().all(|x| x.abs() < 1e-12));
        assert!(hs.is_full());
    }

    #[test]
    fn conditional_of_function_graph() {
        // a ↦ (2a, 3a); conditional on x: (x, a) ↦ 3a on the domain x = 2a
        let r = LinearRelation::from_map(&m(2, 1, &[2.0, 3.0]), tol());
        let c = r.conditional(1, tol()).unwrap();
        assert_eq!((c.dom(), c.cod()), (2, 1));
        for a in [-1.0, 0.5, 2.0] {
            assert!(c.relates(&v(&[2.0 * a, a]), &v(&[3.0 * a]), tol()));
            assert!(!c.relates(&v(&[2.0 * a, a]), &v(&[3.0 * a + 1.0]), tol()));
        }
        assert!(c.to_quotient_form(tol()).is_ok());
    }

    #[test]
    fn conditional_of_diagonal_is_identity_on_x() {
        // R(a) = diagonal of X × Y, for a ∈ R
        let graph = Subspace::full(1).product(&span(2, &[&[1.0, 1.0]]));
        let r = LinearRelation::new(1, 2, graph, tol()).unwrap();
        let c = r.conditional(1, tol()).unwrap();
        for x in [-2.0, 0.0, 1.25] {
            for a in [-1.0, 3.0] {
                assert!(c.relates(&v(&[x, a]), &v(&[x]), tol()));
                assert!(!c.relates(&v(&[x, a]), &v(&[x + 0.5]), tol()));
            }
        }
    }

    #[test]
    fn conditional_of_total_is_total() {
        let r = LinearRelation::total(1, 2);
        let c = r.conditional(1, tol()).unwrap();
        assert!(c.fibre_at_zero(tol()).is_full());
        assert!(c.graph().is_full());
    }

    #[test]
    fn affine_examples() {
        let plus3 = AffineRelation::from_affine_map(&m(1, 1, &[1.0]), &v(&[3.0]), tol()).unwrap();
        let plus4 = AffineRelation::from_affine_map(&m(1, 1, &[1.0]), &v(&[4.0]), tol()).unwrap();
        let plus7 = AffineRelation::from_affine_map(&m(1, 1, &[1.0]), &v(&[7.0]), tol()).unwrap();
        assert!(plus4.compose(&plus3, tol()).unwrap().approx_eq(&plus7, tol()));

        // x ↦ x + 1 + R is the total relation
        let total = AffineRelation::new(&v(&[0.0, 1.0]), LinearRelation::total(1, 1)).unwrap();
        let q = total.to_quotient_form(tol()).unwrap();
        assert!(q.linear.nondet().is_full());
        assert!(q.linear.map()[(0, 0)].abs() < 1e-12);
        assert!(q.offset[0].abs() < 1e-12);
    }

    #[test]
    fn affine_quotient_round_trip() {
        let lin = QuotientForm::new(span(2, &[&[1.0, -1.0]]), &m(2, 2, &[1.0, 0.0, 2.0, 1.0])).unwrap();
        let q = AffineQuotientForm::new(lin, &v(&[3.0, 1.0])).unwrap();
        let r = AffineRelation::from_quotient_form(&q, tol()).unwrap();
        assert!(r.to_quotient_form(tol()).unwrap().approx_eq(&q, tol()));
        assert!(r.relates(&v(&[0.0, 0.0]), &v(&[3.0, 1.0]), tol()));
        assert!(r.relates(&v(&[1.0, 0.0]), &v(&[4.0 + 5.0, 3.0 - 5.0]), tol()));
    }

    #[test]
    fn json_round_trip() {
        let r = LinearRelation::copy(2, tol());
        let text = serde_json::to_string(&r.to_json()).unwrap();
        assert!(text.starts_with("{\"dom\":2,\"cod\":4,\"graph_basis\":"));
        let back = LinearRelation::from_json(&serde_json::from_str(&text).unwrap(), tol()).unwrap();
        assert!(back.approx_eq(&r, tol()));
    }

    #[test]
    fn tensor_of_maps() {
        let a = m(1, 1, &[2.0]);
        let b = m(2, 1, &[1.0, -1.0]);
        let t = LinearRelation::from_map(&a, tol()).tensor(&LinearRelation::from_map(&b, tol()));
        let expected = LinearRelation::from_map(&block_diag(&a, &b), tol());
        assert!(t.approx_eq(&expected, tol()));
    }
}
