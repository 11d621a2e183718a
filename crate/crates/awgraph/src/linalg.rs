//! Dense complex linear algebra helpers shared by the whole pipeline.
//!
//! Every matrix past the integer certification stage is a `DMatrix<Complex<f64>>`,
//! even when its entries happen to be real; this keeps the downstream operator
//! arithmetic on a single code path.  Rank and nullspace decisions go through
//! Hermitian eigendecompositions of Gram matrices rather than a general SVD:
//! at the scale this crate targets (n <= a few hundred) the spectral gaps are
//! enormous and the Gram route is simple and deterministic.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ONE: C64 = Complex::new(1.0, 0.0);
pub const ZERO: C64 = Complex::new(0.0, 0.0);
pub const I: C64 = Complex::new(0.0, 1.0);

/// Frobenius inner product `tr(a† b)`, conjugate-linear in the first slot.
pub fn fro_inner(a: &CMat, b: &CMat) -> C64 {
    debug_assert_eq!(a.shape(), b.shape());
    let mut acc = ZERO;
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * y;
    }
    acc
}

/// Frobenius norm.
pub fn fro_norm(a: &CMat) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Entrywise (Hadamard) product.
pub fn hadamard(a: &CMat, b: &CMat) -> CMat {
    debug_assert_eq!(a.shape(), b.shape());
    CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * b[(i, j)])
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn from_int(m: &DMatrix<i64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| {
        Complex::new(m[(i, j)] as f64, 0.0)
    })
}

/// Principal square root: nonnegative real part, and nonnegative imaginary
/// part when the real part vanishes (so `sqrt(-1) = i`).
pub fn principal_sqrt(z: C64) -> C64 {
    let r = z.sqrt();
    // `Complex::sqrt` already lands in the closed right half-plane; tidy up
    // the boundary so that a roundoff-negative real part cannot flip the
    // branch chosen for purely imaginary results.
    if r.re < 0.0 || (r.re.abs() < 1e-14 * (1.0 + r.im.abs()) && r.im < 0.0) {
        -r
    } else {
        r
    }
}

/// Eigendecomposition of a (numerically) Hermitian matrix.
///
/// The input is symmetrized as `(m + m†)/2` before factoring, so callers may
/// pass matrices that are Hermitian only up to roundoff.  Returns eigenvalues
/// sorted ascending with matching orthonormal eigenvector columns.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "hermitian_eigen needs a square matrix");
    let sym = (m + m.adjoint()) * Complex::new(0.5, 0.0);
    let decomp = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| decomp.eigenvalues[a].total_cmp(&decomp.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| decomp.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &decomp.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Group a sorted slice into runs of values closer than `tol`; returns
/// half-open index ranges.
pub fn cluster_sorted(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || (values[i] - values[i - 1]).abs() > tol {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Orthonormal basis (as columns) of the nullspace of `l`, detected through
/// the spectrum of the normal matrix `l† l`.  `rel_tol` scales the eigenvalue
/// cutoff by the largest eigenvalue.
pub fn nullspace(l: &CMat, rel_tol: f64) -> Vec<CVec> {
    let normal = l.adjoint() * l;
    let (values, vectors) = hermitian_eigen(&normal);
    let top = values.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = rel_tol * (1.0 + top);
    let mut out = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        if v <= cutoff {
            out.push(CVec::from_column_slice(vectors.column(k).as_slice()));
        }
    }
    out
}

/// Number of singular values of `m` exceeding `threshold`, via the Gram
/// matrix on the smaller side.
pub fn rank_with_threshold(m: &CMat, threshold: f64) -> usize {
    let gram = if m.nrows() >= m.ncols() {
        m.adjoint() * m
    } else {
        m * m.adjoint()
    };
    let (values, _) = hermitian_eigen(&gram);
    let cut = threshold * threshold;
    values.iter().filter(|&&v| v > cut).count()
}

/// Largest singular value (spectral norm), again via the Gram matrix.
pub fn spectral_norm(m: &CMat) -> f64 {
    let gram = if m.nrows() >= m.ncols() {
        m.adjoint() * m
    } else {
        m * m.adjoint()
    };
    let (values, _) = hermitian_eigen(&gram);
    values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Incremental Frobenius Gram-Schmidt used to grow matrix-space bases.
///
/// Projects `candidate` against `basis` (assumed orthonormal), and if the
/// remainder is numerically nonzero returns it normalized.  Two projection
/// passes keep the basis orthonormal to roundoff even for nearly dependent
/// candidates.
pub fn orthonormal_complement(basis: &[CMat], candidate: &CMat, tol: f64) -> Option<CMat> {
    let scale = 1.0 + fro_norm(candidate);
    let mut rem = candidate.clone();
    for _ in 0..2 {
        for b in basis {
            let coef = fro_inner(b, &rem);
            rem -= b * coef;
        }
    }
    let norm = fro_norm(&rem);
    if norm > tol * scale {
        Some(rem / Complex::new(norm, 0.0))
    } else {
        None
    }
}

/// Orthogonal projection of `target` onto the span of an orthonormal basis.
pub fn project_onto_span(basis: &[CMat], target: &CMat) -> CMat {
    let mut out = CMat::zeros(target.nrows(), target.ncols());
    for b in basis {
        let coef = fro_inner(b, target);
        out += b * coef;
    }
    out
}

/// Same Gram-Schmidt step for column vectors in C^n.
pub fn orthonormal_complement_vec(basis: &[CVec], candidate: &CVec, tol: f64) -> Option<CVec> {
    let scale = 1.0 + candidate.norm();
    let mut rem = candidate.clone();
    for _ in 0..2 {
        for b in basis {
            let coef = b.dotc(&rem);
            rem -= b * coef;
        }
    }
    let norm = rem.norm();
    if norm > tol * scale {
        Some(rem / Complex::new(norm, 0.0))
    } else {
        None
    }
}

/// Standard-normal complex vector (independent real and imaginary parts).
pub fn gaussian_cvec<R: Rng>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| {
        Complex::new(standard_normal(rng), standard_normal(rng))
    })
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller on the half-open unit interval; good enough for seeding
    // generic spectra, and free of extra dependencies.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
