//! Shared numerical kernels: complex SVD helpers, nullspaces, pseudo-inverses,
//! projective comparison, subspace distances, and seeded random generation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{ProjvarError, Result};

pub type C = Complex64;
pub type CMat = DMatrix<C>;
pub type CVec = DVector<C>;

/// Default tolerance for projective equality and rank decisions.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Relative singular-value threshold for rank decisions.
pub const RANK_RTOL: f64 = 1e-8;
/// Norms below this are treated as identically zero.
pub const NORM_FLOOR: f64 = 1e-300;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn czero() -> C {
    C::new(0.0, 0.0)
}

pub fn cone() -> C {
    C::new(1.0, 0.0)
}

/// Deterministic child generator: one master seed, independent streams per tag.
pub fn child_rng(seed: u64, tag: &str) -> ChaCha12Rng {
    // FNV-1a over the tag, folded into the seed.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in tag.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    ChaCha12Rng::seed_from_u64(seed ^ h)
}

pub fn random_complex<R: Rng>(rng: &mut R) -> C {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C::new(re, im)
}

pub fn random_cvec<R: Rng>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| random_complex(rng))
}

pub fn random_cmat<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| random_complex(rng))
}

/// Singular values of a complex matrix, descending.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    let svd = a.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

/// Numerical rank with a relative threshold.
pub fn rank_with_tol(a: &CMat, rtol: f64) -> usize {
    let s = singular_values(a);
    match s.first() {
        None => 0,
        Some(&smax) if smax <= NORM_FLOOR => 0,
        Some(&smax) => s.iter().filter(|&&x| x > rtol * smax).count(),
    }
}

pub fn rank(a: &CMat) -> usize {
    rank_with_tol(a, RANK_RTOL)
}

/// Orthonormal basis of the right nullspace `{v : A v = 0}`.
///
/// nalgebra computes a thin SVD, so wide matrices are padded with zero rows
/// first to expose the full set of right singular vectors.
pub fn right_nullspace(a: &CMat, rtol: f64) -> Vec<CVec> {
    let (rows, cols) = a.shape();
    let padded = if rows < cols {
        let mut p = CMat::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let mut out = Vec::new();
    for i in 0..v_t.nrows() {
        let sv = if i < svd.singular_values.len() {
            svd.singular_values[i]
        } else {
            0.0
        };
        if smax <= NORM_FLOOR || sv <= rtol * smax {
            out.push(v_t.row(i).adjoint());
        }
    }
    // v_t rows with tiny singular values can be fewer than cols - rank when the
    // thin decomposition truncates; recover any missing directions by padding.
    out
}

/// Orthonormal basis of `{v : v^T A = 0}` (bilinear left kernel).
pub fn left_nullspace_bilinear(a: &CMat, rtol: f64) -> Vec<CVec> {
    right_nullspace(&a.transpose(), rtol)
}

/// Unit-norm kernel vector of a matrix whose nullity is expected to be one.
pub fn kernel_vector(a: &CMat, rtol: f64) -> Result<CVec> {
    let ns = right_nullspace(a, rtol);
    if ns.is_empty() {
        return Err(ProjvarError::RankDeficient(
            "expected a one-dimensional kernel, found none".into(),
        ));
    }
    if ns.len() > 1 {
        return Err(ProjvarError::RankDeficient(format!(
            "kernel has dimension {}, expected 1",
            ns.len()
        )));
    }
    Ok(phase_fix(&ns[0]))
}

/// Moore-Penrose pseudo-inverse (Hermitian convention).
pub fn pinv(a: &CMat, rtol: f64) -> CMat {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let k = svd.singular_values.len();
    let mut sinv = CMat::zeros(k, k);
    for i in 0..k {
        let s = svd.singular_values[i];
        if smax > NORM_FLOOR && s > rtol * smax {
            sinv[(i, i)] = C::new(1.0 / s, 0.0);
        }
    }
    v_t.adjoint() * sinv * u.adjoint()
}

/// Transpose-based right inverse `A^T (A A^T)^{-1}` for full-row-rank `A`.
///
/// Unlike the Hermitian pseudo-inverse, its column space is the bilinear
/// annihilator complement of the kernel, which keeps dual-space formulas free
/// of complex conjugation.
pub fn right_inverse_bilinear(a: &CMat) -> Result<CMat> {
    let gram = a * a.transpose();
    let inv = gram.try_inverse().ok_or_else(|| {
        ProjvarError::SingularMatrix("A A^T is not invertible (bilinearly isotropic rows)".into())
    })?;
    Ok(a.transpose() * inv)
}

/// Minimum-norm least-squares solve via SVD.
pub fn lstsq(a: &CMat, b: &CVec, rtol: f64) -> CVec {
    pinv(a, rtol) * b
}

/// Unit-normalize and rotate the largest-magnitude coordinate to be real
/// positive. Deterministic representative of a projective point.
pub fn phase_fix(v: &CVec) -> CVec {
    let n = v.norm();
    if n <= NORM_FLOOR {
        return v.clone();
    }
    let scaled = v / C::new(n, 0.0);
    let mut best = 0usize;
    let mut mag = 0.0;
    for (i, x) in scaled.iter().enumerate() {
        if x.norm() > mag {
            mag = x.norm();
            best = i;
        }
    }
    let pivot = scaled[best];
    if pivot.norm() <= NORM_FLOOR {
        return scaled;
    }
    let rot = pivot.conj() / C::new(pivot.norm(), 0.0);
    scaled * rot
}

/// Projective equality of coefficient vectors: both are unit-normalized with
/// the largest-magnitude coordinate rotated to be real positive, then compared.
pub fn proj_equal_vec(a: &CVec, b: &CVec, tol: f64) -> Result<bool> {
    if a.len() != b.len() {
        return Err(ProjvarError::DimensionMismatch(format!(
            "projective comparison of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let na = a.norm();
    let nb = b.norm();
    if na <= NORM_FLOOR || nb <= NORM_FLOOR {
        return Err(ProjvarError::ZeroMultivector);
    }
    let ah = a / C::new(na, 0.0);
    let bh = b / C::new(nb, 0.0);
    let mut best = 0usize;
    let mut mag = 0.0;
    for (i, x) in ah.iter().enumerate() {
        if x.norm() > mag {
            mag = x.norm();
            best = i;
        }
    }
    if bh[best].norm() <= tol {
        return Ok(false);
    }
    let ra = ah[best].conj() / C::new(ah[best].norm(), 0.0);
    let rb = bh[best].conj() / C::new(bh[best].norm(), 0.0);
    Ok((ah * ra - bh * rb).norm() < tol)
}

/// Phase-invariant projective distance `min_phi ‖a/‖a‖ - e^{i phi} b/‖b‖‖`,
/// computed through the aligned difference vector so that near-equal inputs
/// keep full absolute precision.
pub fn proj_distance_vec(a: &CVec, b: &CVec) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na <= NORM_FLOOR || nb <= NORM_FLOOR {
        return f64::INFINITY;
    }
    let ah = a / C::new(na, 0.0);
    let bh = b / C::new(nb, 0.0);
    let inner = (ah.adjoint() * &bh)[(0, 0)];
    if inner.norm() <= NORM_FLOOR {
        return 2.0_f64.sqrt();
    }
    let phase = inner.conj() / C::new(inner.norm(), 0.0);
    (ah - bh * phase).norm()
}

/// Projective distance between matrices viewed as flattened vectors.
pub fn proj_distance_mat(a: &CMat, b: &CMat) -> f64 {
    let av = CVec::from_column_slice(a.as_slice());
    let bv = CVec::from_column_slice(b.as_slice());
    proj_distance_vec(&av, &bv)
}

pub fn proj_equal_mat(a: &CMat, b: &CMat, tol: f64) -> Result<bool> {
    if a.shape() != b.shape() {
        return Err(ProjvarError::DimensionMismatch(format!(
            "matrix comparison of shapes {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let av = CVec::from_column_slice(a.as_slice());
    let bv = CVec::from_column_slice(b.as_slice());
    proj_equal_vec(&av, &bv, tol)
}

/// Orthonormal column basis of the span of the given vectors.
pub fn orthonormal_span(vectors: &[CVec], rtol: f64) -> Vec<CVec> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let n = vectors[0].len();
    let a = CMat::from_fn(n, vectors.len(), |i, j| vectors[j][i]);
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("svd u");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let mut out = Vec::new();
    for i in 0..svd.singular_values.len() {
        if smax > NORM_FLOOR && svd.singular_values[i] > rtol * smax {
            out.push(u.column(i).into_owned());
        }
    }
    out
}

/// Largest principal-angle distance (sine) between the spans of two vector
/// families, computed as the spectral norm of the projector difference so the
/// small-angle regime keeps full precision.
pub fn subspace_distance(a: &[CVec], b: &[CVec]) -> f64 {
    let qa = orthonormal_span(a, RANK_RTOL);
    let qb = orthonormal_span(b, RANK_RTOL);
    if qa.len() != qb.len() {
        return 1.0;
    }
    if qa.is_empty() {
        return 0.0;
    }
    let n = qa[0].len();
    let ma = CMat::from_fn(n, qa.len(), |i, j| qa[j][i]);
    let mb = CMat::from_fn(n, qb.len(), |i, j| qb[j][i]);
    let diff = &ma * ma.adjoint() - &mb * mb.adjoint();
    singular_values(&diff).first().copied().unwrap_or(0.0)
}

pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

/// Orthonormal basis of the right nullspace of a real matrix.
pub fn real_right_nullspace(a: &RMat, rtol: f64) -> Vec<RVec> {
    let (rows, cols) = a.shape();
    let padded = if rows < cols {
        let mut p = RMat::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let mut out = Vec::new();
    for i in 0..v_t.nrows() {
        let sv = if i < svd.singular_values.len() {
            svd.singular_values[i]
        } else {
            0.0
        };
        if smax <= NORM_FLOOR || sv <= rtol * smax {
            out.push(v_t.row(i).transpose());
        }
    }
    out
}

/// Singular values of a real matrix, descending.
pub fn real_singular_values(a: &RMat) -> Vec<f64> {
    let svd = a.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

/// Condition number estimate from extreme singular values.
pub fn cond(a: &CMat) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > NORM_FLOOR => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Binomial coefficient as u64; desk-scale arguments only.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}
