//! Seeded random generators shared by the integration suites.
#![allow(dead_code)]

use extgauss::gauss::GaussianMap;
use extgauss::gaussex::{ExtendedGaussian, ExtendedGaussianMap};
use extgauss::{Matrix, Subspace, Tolerance, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn tol() -> Tolerance {
    Tolerance::default()
}

pub fn tol_eq(eps: f64) -> Tolerance {
    Tolerance::default().with_eq(eps).unwrap()
}

pub fn gaussian_matrix(rng: &mut TestRng, r: usize, c: usize) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector(rng: &mut TestRng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Orthonormal `n × n` matrix.
pub fn rotation(rng: &mut TestRng, n: usize) -> Matrix {
    if n == 0 {
        return Matrix::zeros(0, 0);
    }
    gaussian_matrix(rng, n, n).qr().q()
}

/// A random subspace of dimension at most `k`. Half the time the spanning
/// vectors are sparse, which yields coordinate-aligned pieces.
pub fn random_subspace(rng: &mut TestRng, n: usize, k: usize) -> Subspace {
    let sparse = rng.random_bool(0.5);
    let m = Matrix::from_fn(n, k, |_, _| {
        if sparse && rng.random_bool(0.5) {
            0.0
        } else {
            rng.sample(StandardNormal)
        }
    });
    Subspace::column_space(&m, tol())
}

pub fn random_subspace_any_dim(rng: &mut TestRng, n: usize) -> Subspace {
    let k = rng.random_range(0..=n);
    random_subspace(rng, n, k)
}

/// PSD form of rank `rank` supported on the span of the orthonormal columns
/// of `frame`, with eigenvalues in `[0.25, 4]`.
pub fn psd_on(rng: &mut TestRng, frame: &Matrix, rank: usize) -> Matrix {
    let m = frame.ncols();
    let w = frame * rotation(rng, m).columns(0, rank);
    let lambda = Vector::from_fn(rank, |_, _| rng.random_range(0.25..4.0));
    &w * Matrix::from_diagonal(&lambda) * w.transpose()
}

/// Random PSD matrix of random rank, well conditioned on its support.
pub fn random_psd(rng: &mut TestRng, n: usize) -> Matrix {
    let rank = rng.random_range(0..=n);
    psd_on(rng, &Matrix::identity(n, n), rank)
}

/// `(I + E) Σ (I + E)ᵀ` with `E` mapping into `d`: unchanged modulo `d`.
pub fn perturb_cov_in(rng: &mut TestRng, d: &Subspace, cov: &Matrix) -> Matrix {
    let n = d.ambient_dim();
    let e = d.basis() * gaussian_matrix(rng, d.dim(), n);
    let t = Matrix::identity(n, n) + e;
    &t * cov * t.transpose()
}

/// Adds a random element of `d` to each column.
pub fn perturb_cols_in(rng: &mut TestRng, d: &Subspace, m: &Matrix) -> Matrix {
    m + d.basis() * gaussian_matrix(rng, d.dim(), m.ncols())
}

pub fn perturb_vec_in(rng: &mut TestRng, d: &Subspace, v: &Vector) -> Vector {
    v + d.basis() * gaussian_vector(rng, d.dim())
}

/// Raw data `(D, A, μ, Σ)` with `Σ` well conditioned on `D^⊥` and the
/// representative perturbed away from normal form.
pub struct RawExtMap {
    pub nondet: Subspace,
    pub a: Matrix,
    pub mean: Vector,
    pub cov: Matrix,
}

pub fn random_raw_ext_map(rng: &mut TestRng, dom: usize, cod: usize) -> RawExtMap {
    let nondet = random_subspace_any_dim(rng, cod);
    let free = nondet.annihilator();
    let rank = rng.random_range(0..=free.dim());
    let cov = psd_on(rng, free.basis(), rank);
    let a = gaussian_matrix(rng, cod, dom);
    let mean = gaussian_vector(rng, cod);
    RawExtMap {
        a: perturb_cols_in(rng, &nondet, &a),
        mean: perturb_vec_in(rng, &nondet, &mean),
        cov: perturb_cov_in(rng, &nondet, &cov),
        nondet,
    }
}

pub fn random_ext_map(rng: &mut TestRng, dom: usize, cod: usize) -> ExtendedGaussianMap {
    let r = random_raw_ext_map(rng, dom, cod);
    ExtendedGaussianMap::new(r.nondet, r.a, r.mean, r.cov, tol()).unwrap()
}

pub fn random_extended(rng: &mut TestRng, n: usize) -> ExtendedGaussian {
    ExtendedGaussian::from_map(random_ext_map(rng, 0, n)).unwrap()
}

pub fn random_gauss_map(rng: &mut TestRng, dom: usize, cod: usize) -> GaussianMap {
    GaussianMap::new(
        gaussian_matrix(rng, cod, dom),
        gaussian_vector(rng, cod),
        random_psd(rng, cod),
        tol(),
    )
    .unwrap()
}
