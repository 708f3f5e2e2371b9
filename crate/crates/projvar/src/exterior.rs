//! Graded exterior algebra over complex scalars: join, meet, Hodge star,
//! interior product, generalized subspace operators, and decomposability.
//!
//! Conventions fixed here and used everywhere else:
//! - basis of the k-th exterior power indexed by sorted k-subsets of the axis
//!   set, in lexicographic order;
//! - `*(e_S) = sign(S, S^c) e_{S^c}` where the sign is the parity of the
//!   permutation obtained by concatenating `S` and its complement;
//! - `meet(a, b) = *^{-1}( *a ∧ *b )`, which makes `*(x ∧ y) = (*x) ◇ (*y)`
//!   and `*(x ◇ y) = (*x) ∧ (*y)` hold exactly.

use crate::error::{ProjvarError, Result};
use crate::numeric::{
    binomial, czero, orthonormal_span, proj_equal_vec, right_nullspace, CMat, CVec, C, NORM_FLOOR,
    RANK_RTOL,
};

/// Canonical bijection between `{0..C(D,k)-1}` and sorted k-subsets of the
/// axes `{0..D-1}`, in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradeBasis {
    dim: usize,
    grade: usize,
    subsets: Vec<Vec<usize>>,
}

impl GradeBasis {
    pub fn new(dim: usize, grade: usize) -> Result<Self> {
        if grade > dim {
            return Err(ProjvarError::GradeOverflow(grade, 0, dim));
        }
        let mut subsets = Vec::with_capacity(binomial(dim, grade) as usize);
        let mut current = Vec::with_capacity(grade);
        enumerate_subsets(dim, grade, 0, &mut current, &mut subsets);
        Ok(GradeBasis {
            dim,
            grade,
            subsets,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn subset(&self, index: usize) -> &[usize] {
        &self.subsets[index]
    }

    pub fn index_of(&self, subset: &[usize]) -> Option<usize> {
        self.subsets
            .binary_search_by(|probe| probe.as_slice().cmp(subset))
            .ok()
    }

    pub fn subsets(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.subsets.iter().enumerate().map(|(i, s)| (i, s.as_slice()))
    }
}

fn enumerate_subsets(
    dim: usize,
    grade: usize,
    start: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if current.len() == grade {
        out.push(current.clone());
        return;
    }
    let remaining = grade - current.len();
    for axis in start..=dim.saturating_sub(remaining) {
        current.push(axis);
        enumerate_subsets(dim, grade, axis + 1, current, out);
        current.pop();
    }
}

/// Graded element of the exterior algebra: a coefficient vector over one
/// `GradeBasis`. Extensors (decomposable elements) represent projective
/// subspaces of dimension `grade - 1`.
#[derive(Debug, Clone)]
pub struct MultiVector {
    basis: GradeBasis,
    coeffs: CVec,
}

impl MultiVector {
    pub fn new(basis: GradeBasis, coeffs: CVec) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(ProjvarError::DimensionMismatch(format!(
                "coefficient vector of length {} for a basis of size {}",
                coeffs.len(),
                basis.len()
            )));
        }
        Ok(MultiVector { basis, coeffs })
    }

    pub fn zero(dim: usize, grade: usize) -> Result<Self> {
        let basis = GradeBasis::new(dim, grade)?;
        let coeffs = CVec::zeros(basis.len());
        Ok(MultiVector { basis, coeffs })
    }

    /// Grade-1 element from a coordinate vector.
    pub fn from_vector(v: &CVec) -> Result<Self> {
        let basis = GradeBasis::new(v.len(), 1)?;
        Ok(MultiVector {
            basis,
            coeffs: v.clone(),
        })
    }

    /// Grade-0 scalar.
    pub fn scalar(dim: usize, value: C) -> Result<Self> {
        let basis = GradeBasis::new(dim, 0)?;
        Ok(MultiVector {
            basis,
            coeffs: CVec::from_element(1, value),
        })
    }

    /// Basis extensor `e_S` for a sorted axis subset.
    pub fn basis_extensor(dim: usize, subset: &[usize]) -> Result<Self> {
        let basis = GradeBasis::new(dim, subset.len())?;
        let idx = basis.index_of(subset).ok_or_else(|| {
            ProjvarError::DimensionMismatch(format!("subset {subset:?} invalid for dim {dim}"))
        })?;
        let mut coeffs = CVec::zeros(basis.len());
        coeffs[idx] = C::new(1.0, 0.0);
        Ok(MultiVector { basis, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim
    }

    pub fn grade(&self) -> usize {
        self.basis.grade
    }

    pub fn basis(&self) -> &GradeBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &CVec {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> CVec {
        self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    pub fn scale(&self, factor: C) -> Self {
        MultiVector {
            basis: self.basis.clone(),
            coeffs: &self.coeffs * factor,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.basis != other.basis {
            return Err(ProjvarError::DimensionMismatch(
                "multivector addition across different bases".into(),
            ));
        }
        Ok(MultiVector {
            basis: self.basis.clone(),
            coeffs: &self.coeffs + &other.coeffs,
        })
    }
}

fn check_same_space(a: &MultiVector, b: &MultiVector) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(ProjvarError::DimensionMismatch(format!(
            "ambient dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Sign of merging two disjoint sorted subsets: parity of the number of pairs
/// `(s, t)` with `s ∈ left`, `t ∈ right`, `s > t`.
fn merge_sign(left: &[usize], right: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for &t in right {
        inversions += left.iter().filter(|&&s| s > t).count();
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn merge_subsets(left: &[usize], right: &[usize]) -> Vec<usize> {
    let mut merged = Vec::with_capacity(left.len() + right.len());
    merged.extend_from_slice(left);
    merged.extend_from_slice(right);
    merged.sort_unstable();
    merged
}

fn disjoint(left: &[usize], right: &[usize]) -> bool {
    let mut i = 0;
    let mut j = 0;
    while i < left.len() && j < right.len() {
        match left[i].cmp(&right[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

/// Exterior product. On extensors of disjoint subspaces the result represents
/// the projective span of their union; it vanishes iff the subspaces meet.
pub fn join(a: &MultiVector, b: &MultiVector) -> Result<MultiVector> {
    check_same_space(a, b)?;
    let d = a.dim();
    if a.grade() + b.grade() > d {
        return Err(ProjvarError::GradeOverflow(a.grade(), b.grade(), d));
    }
    let out_basis = GradeBasis::new(d, a.grade() + b.grade())?;
    let mut coeffs = CVec::zeros(out_basis.len());
    for (i, s) in a.basis.subsets() {
        let ai = a.coeffs[i];
        if ai.norm() == 0.0 {
            continue;
        }
        for (j, t) in b.basis.subsets() {
            let bj = b.coeffs[j];
            if bj.norm() == 0.0 || !disjoint(s, t) {
                continue;
            }
            let sign = merge_sign(s, t);
            let merged = merge_subsets(s, t);
            let idx = out_basis.index_of(&merged).expect("merged subset in basis");
            coeffs[idx] += ai * bj * C::new(sign, 0.0);
        }
    }
    MultiVector::new(out_basis, coeffs)
}

/// Hodge star `* : ∧^k → ∧^{D-k}`.
pub fn hodge(a: &MultiVector) -> MultiVector {
    let d = a.dim();
    let out_basis = GradeBasis::new(d, d - a.grade()).expect("complement grade valid");
    let mut coeffs = CVec::zeros(out_basis.len());
    for (i, s) in a.basis.subsets() {
        let ai = a.coeffs[i];
        if ai.norm() == 0.0 {
            continue;
        }
        let comp: Vec<usize> = (0..d).filter(|axis| !s.contains(axis)).collect();
        let sign = merge_sign(s, &comp);
        let idx = out_basis.index_of(&comp).expect("complement in basis");
        coeffs[idx] += ai * C::new(sign, 0.0);
    }
    MultiVector {
        basis: out_basis,
        coeffs,
    }
}

/// Inverse of the Hodge star: `hodge(unhodge(x)) = x` exactly.
pub fn unhodge(a: &MultiVector) -> MultiVector {
    let d = a.dim();
    let g = d - a.grade();
    let sign = if (g * (d - g)) % 2 == 0 { 1.0 } else { -1.0 };
    hodge(a).scale(C::new(sign, 0.0))
}

/// Meet (regressive product): `a ◇ b = *^{-1}( *a ∧ *b )`. For extensors whose
/// union spans the whole space it represents the intersection subspace.
pub fn meet(a: &MultiVector, b: &MultiVector) -> Result<MultiVector> {
    check_same_space(a, b)?;
    let d = a.dim();
    if a.grade() + b.grade() < d {
        return Err(ProjvarError::GradeUnderflow(a.grade(), b.grade(), d));
    }
    let sa = hodge(a);
    let sb = hodge(b);
    let w = join(&sa, &sb)?;
    Ok(unhodge(&w))
}

/// Interior product (contraction) of a dual covector against a multivector.
/// Adjoint of wedging by `x` under the bilinear pairing of basis extensors.
pub fn interior(x: &CVec, a: &MultiVector) -> Result<MultiVector> {
    if x.len() != a.dim() {
        return Err(ProjvarError::DimensionMismatch(format!(
            "covector of length {} against ambient dimension {}",
            x.len(),
            a.dim()
        )));
    }
    if a.grade() == 0 {
        return Err(ProjvarError::GradeUnderflow(0, 0, a.dim()));
    }
    let out_basis = GradeBasis::new(a.dim(), a.grade() - 1)?;
    let mut coeffs = CVec::zeros(out_basis.len());
    for (i, s) in a.basis.subsets() {
        let ai = a.coeffs[i];
        if ai.norm() == 0.0 {
            continue;
        }
        for (pos, &axis) in s.iter().enumerate() {
            let xv = x[axis];
            if xv.norm() == 0.0 {
                continue;
            }
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            let reduced: Vec<usize> = s
                .iter()
                .enumerate()
                .filter(|(p, _)| *p != pos)
                .map(|(_, &v)| v)
                .collect();
            let idx = out_basis.index_of(&reduced).expect("reduced subset");
            coeffs[idx] += ai * xv * C::new(sign, 0.0);
        }
    }
    MultiVector::new(out_basis, coeffs)
}

/// Matrix of the map `v ↦ v ∧ a` from grade 1 to grade `a.grade()+1`.
pub fn wedge_map(a: &MultiVector) -> Result<CMat> {
    let d = a.dim();
    if a.grade() + 1 > d {
        return Err(ProjvarError::GradeOverflow(1, a.grade(), d));
    }
    let out_basis = GradeBasis::new(d, a.grade() + 1)?;
    let mut m = CMat::zeros(out_basis.len(), d);
    for axis in 0..d {
        let e = MultiVector::basis_extensor(d, &[axis])?;
        let col = join(&e, a)?;
        m.set_column(axis, col.coeffs());
    }
    Ok(m)
}

/// Dimension of `{v : v ∧ a ≈ 0}` by thresholded singular values.
fn annihilator_dimension(a: &MultiVector, tol: f64) -> Result<usize> {
    let m = wedge_map(a)?;
    Ok(right_nullspace(&m, tol).len())
}

/// Plücker-relation predicate: true iff `dim{v : v ∧ a ≈ 0} = a.grade()`.
pub fn is_decomposable(a: &MultiVector, tol: f64) -> bool {
    if a.norm() <= NORM_FLOOR {
        return false;
    }
    let d = a.dim();
    let k = a.grade();
    if k == 0 || k == 1 || k == d {
        return true;
    }
    match annihilator_dimension(a, tol) {
        Ok(nullity) => nullity == k,
        Err(_) => false,
    }
}

/// Wedge of independent points into the extensor of their span.
pub fn span_to_extensor(points: &[CVec]) -> Result<MultiVector> {
    if points.is_empty() {
        return Err(ProjvarError::DependentPoints);
    }
    let n = points[0].len();
    let mat = CMat::from_fn(n, points.len(), |i, j| points[j][i]);
    let s = crate::numeric::singular_values(&mat);
    let smax = s.first().copied().unwrap_or(0.0);
    let smin = s.last().copied().unwrap_or(0.0);
    if smax <= NORM_FLOOR || smin <= RANK_RTOL * smax {
        return Err(ProjvarError::DependentPoints);
    }
    let mut acc = MultiVector::from_vector(&points[0])?;
    for p in &points[1..] {
        acc = join(&acc, &MultiVector::from_vector(p)?)?;
    }
    Ok(acc)
}

/// Orthonormal basis of the subspace represented by a decomposable extensor.
pub fn extensor_to_span(a: &MultiVector, tol: f64) -> Result<Vec<CVec>> {
    if a.norm() < NORM_FLOOR {
        return Err(ProjvarError::ZeroMultivector);
    }
    if a.grade() == 0 {
        return Ok(Vec::new());
    }
    if a.grade() == a.dim() {
        return Ok((0..a.dim())
            .map(|i| {
                let mut v = CVec::zeros(a.dim());
                v[i] = C::new(1.0, 0.0);
                v
            })
            .collect());
    }
    if !is_decomposable(a, tol) {
        return Err(ProjvarError::NotDecomposable);
    }
    let m = wedge_map(a)?;
    Ok(right_nullspace(&m, tol))
}

/// Generalized join: an extensor representing `A + B`, valid even when the
/// classical join degenerates. Defined up to nonzero scale.
pub fn gen_join(a: &MultiVector, b: &MultiVector, tol: f64) -> Result<MultiVector> {
    check_same_space(a, b)?;
    let mut vectors = extensor_to_span(a, tol)?;
    vectors.extend(extensor_to_span(b, tol)?);
    let basis = orthonormal_span(&vectors, tol);
    if basis.is_empty() {
        return MultiVector::scalar(a.dim(), C::new(1.0, 0.0));
    }
    span_to_extensor(&basis)
}

/// Generalized meet: an extensor representing `A ∩ B`, valid even when the
/// classical meet degenerates. Defined up to nonzero scale; the intersection
/// `{0}` yields the unit scalar.
pub fn gen_meet(a: &MultiVector, b: &MultiVector, tol: f64) -> Result<MultiVector> {
    check_same_space(a, b)?;
    let sa = extensor_to_span(a, tol)?;
    let sb = extensor_to_span(b, tol)?;
    if sa.is_empty() || sb.is_empty() {
        return MultiVector::scalar(a.dim(), C::new(1.0, 0.0));
    }
    let d = a.dim();
    let stacked = CMat::from_fn(d, sa.len() + sb.len(), |i, j| {
        if j < sa.len() {
            sa[j][i]
        } else {
            -sb[j - sa.len()][i]
        }
    });
    let null = right_nullspace(&stacked, tol);
    if null.is_empty() {
        return MultiVector::scalar(d, C::new(1.0, 0.0));
    }
    let points: Vec<CVec> = null
        .iter()
        .map(|w| {
            let mut p = CVec::zeros(d);
            for (j, basis_vec) in sa.iter().enumerate() {
                p += basis_vec * w[j];
            }
            p
        })
        .collect();
    let basis = orthonormal_span(&points, tol);
    if basis.is_empty() {
        return MultiVector::scalar(d, C::new(1.0, 0.0));
    }
    span_to_extensor(&basis)
}

/// Projective equality of multivectors over the same basis.
pub fn proj_equal(a: &MultiVector, b: &MultiVector, tol: f64) -> Result<bool> {
    if a.basis != b.basis {
        return Err(ProjvarError::DimensionMismatch(
            "projective comparison across different graded bases".into(),
        ));
    }
    proj_equal_vec(a.coeffs(), b.coeffs(), tol)
}

/// Bilinear pairing of two multivectors of the same grade.
pub fn pairing(a: &MultiVector, b: &MultiVector) -> Result<C> {
    if a.basis != b.basis {
        return Err(ProjvarError::DimensionMismatch(
            "pairing across different graded bases".into(),
        ));
    }
    let mut acc = czero();
    for i in 0..a.coeffs.len() {
        acc += a.coeffs[i] * b.coeffs[i];
    }
    Ok(acc)
}

/// Signed permutation matrix of the Hodge star on grade `k` coefficients.
pub fn hodge_matrix(dim: usize, grade: usize) -> Result<CMat> {
    let src = GradeBasis::new(dim, grade)?;
    let dst = GradeBasis::new(dim, dim - grade)?;
    let mut m = CMat::zeros(dst.len(), src.len());
    for (i, s) in src.subsets() {
        let comp: Vec<usize> = (0..dim).filter(|axis| !s.contains(axis)).collect();
        let sign = merge_sign(s, &comp);
        let j = dst.index_of(&comp).expect("complement subset");
        m[(j, i)] = C::new(sign, 0.0);
    }
    Ok(m)
}
