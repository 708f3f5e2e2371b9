//! Projection operators `P^m -> P^{m-1}` with center and hyperplane
//! extraction, plus the lifted exterior-power matrices `hat_k` and `tilde_k`.
//!
//! A subspace of projective dimension `j` is always carried by a step-(j+1)
//! extensor. `hat_k` sends step-(m-k) extensors over C^m to the step-(m-k+1)
//! extensors over C^{m+1} of the preimage planes through the center; `tilde_k`
//! sends step-(m-k+1) extensors over C^{m+1} to their images over C^m.

use crate::error::{ProjvarError, Result};
use crate::exterior::{hodge, join, meet, GradeBasis, MultiVector};
use crate::numeric::{
    kernel_vector, phase_fix, right_inverse_bilinear, singular_values, CMat, CVec, C, NORM_FLOOR,
    RANK_RTOL,
};

/// Full-rank `m x (m+1)` complex matrix presenting a projection away from its
/// kernel point onto an embedded hyperplane; rows are the covectors `Γ_i`.
#[derive(Debug, Clone)]
pub struct ProjectionOperator {
    m: usize,
    entries: CMat,
}

/// Linear map between exterior-power coordinate spaces.
#[derive(Debug, Clone)]
pub struct GradedLinearMap {
    pub src: GradeBasis,
    pub dst: GradeBasis,
    pub entries: CMat,
}

impl GradedLinearMap {
    pub fn new(src: GradeBasis, dst: GradeBasis, entries: CMat) -> Result<Self> {
        if entries.shape() != (dst.len(), src.len()) {
            return Err(ProjvarError::DimensionMismatch(format!(
                "graded map of shape {:?} for bases of sizes {} and {}",
                entries.shape(),
                src.len(),
                dst.len()
            )));
        }
        Ok(GradedLinearMap { src, dst, entries })
    }

    pub fn apply(&self, mv: &MultiVector) -> Result<MultiVector> {
        if mv.basis() != &self.src {
            return Err(ProjvarError::DimensionMismatch(
                "multivector basis does not match the map source".into(),
            ));
        }
        MultiVector::new(self.dst.clone(), &self.entries * mv.coeffs())
    }

    pub fn rank(&self) -> usize {
        crate::numeric::rank(&self.entries)
    }
}

impl ProjectionOperator {
    pub fn new(entries: CMat) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if cols != rows + 1 || rows < 2 {
            return Err(ProjvarError::DimensionMismatch(format!(
                "projection operator must be m x (m+1) with m >= 2, got {rows} x {cols}"
            )));
        }
        let s = singular_values(&entries);
        let smax = s.first().copied().unwrap_or(0.0);
        let smin = s.last().copied().unwrap_or(0.0);
        if smax <= NORM_FLOOR || smin / smax <= 1e-10 {
            return Err(ProjvarError::RankDeficient(format!(
                "projection operator singular-value ratio {:.3e}",
                if smax > NORM_FLOOR { smin / smax } else { 0.0 }
            )));
        }
        Ok(ProjectionOperator { m: rows, entries })
    }

    /// `[I | 0]`, the coordinate projection dropping the last coordinate.
    pub fn standard(m: usize) -> Self {
        let mut entries = CMat::zeros(m, m + 1);
        for i in 0..m {
            entries[(i, i)] = C::new(1.0, 0.0);
        }
        ProjectionOperator { m, entries }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    /// Leading `m x m` block and last column.
    pub fn split(&self) -> (CMat, CVec) {
        let bar = self.entries.view((0, 0), (self.m, self.m)).into_owned();
        let last = self.entries.column(self.m).into_owned();
        (bar, last)
    }

    /// Unit-norm kernel vector: the center of projection.
    pub fn center(&self) -> Result<CVec> {
        kernel_vector(&self.entries, RANK_RTOL)
    }

    /// Canonical hyperplane of projection as a dual point, via the kernel of
    /// the transpose of the transpose-based right inverse. It carries the same
    /// coordinates as the center.
    pub fn canonical_hyperplane(&self) -> Result<CVec> {
        let x = right_inverse_bilinear(&self.entries)?;
        kernel_vector(&x.transpose(), RANK_RTOL)
    }

    /// Apply the projection to a point; errors on the center.
    pub fn apply(&self, x: &CVec) -> Result<CVec> {
        if x.len() != self.m + 1 {
            return Err(ProjvarError::DimensionMismatch(format!(
                "point of length {} for ambient dimension {}",
                x.len(),
                self.m
            )));
        }
        let y = &self.entries * x;
        if y.norm() <= 1e-12 * self.entries.norm() * x.norm() {
            return Err(ProjvarError::SingularProjection);
        }
        Ok(y)
    }

    /// Canonical lift: the transpose-based right inverse applied to an image
    /// point. Any two right inverses differ along the center, so every wedge
    /// with the center is independent of this choice.
    pub fn lift(&self, p: &CVec) -> Result<CVec> {
        if p.len() != self.m {
            return Err(ProjvarError::DimensionMismatch(format!(
                "image point of length {} for projection to dimension {}",
                p.len(),
                self.m - 1
            )));
        }
        Ok(right_inverse_bilinear(&self.entries)? * p)
    }

    /// `hat_last = hat_{m-1}`: points of the image hyperplane to the lines
    /// they generate with the center. Column `i` is
    /// `(-1)^{i+1} Γ_1 ◇ ... ◇ skip Γ_i ◇ ... ◇ Γ_m`.
    pub fn hat_last(&self) -> Result<GradedLinearMap> {
        let m = self.m;
        let d = m + 1;
        let src = GradeBasis::new(m, 1)?;
        let dst = GradeBasis::new(d, 2)?;
        let mut entries = CMat::zeros(dst.len(), src.len());
        let mut hyperplanes = Vec::with_capacity(m);
        for i in 0..m {
            let gamma: CVec = self.entries.row(i).transpose();
            hyperplanes.push(hodge(&MultiVector::from_vector(&gamma)?));
        }
        debug_assert_eq!(hyperplanes[0].grade(), d - 1);
        for i in 0..m {
            let mut acc: Option<MultiVector> = None;
            for (j, h) in hyperplanes.iter().enumerate() {
                if j == i {
                    continue;
                }
                acc = Some(match acc {
                    None => h.clone(),
                    Some(prev) => meet(&prev, h)?,
                });
            }
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let col = acc.expect("m >= 2 leaves at least one hyperplane").scale(C::new(sign, 0.0));
            entries.set_column(i, col.coeffs());
        }
        GradedLinearMap::new(src, dst, entries)
    }

    /// `hat_k`: step-(m-k) extensors over C^m to the step-(m-k+1) extensors of
    /// their preimage planes through the center, `1 <= k <= m-1`.
    pub fn hat_k(&self, k: usize) -> Result<GradedLinearMap> {
        let m = self.m;
        if k < 1 || k > m - 1 {
            return Err(ProjvarError::OrderOutOfRange(k, m));
        }
        if k == m - 1 {
            return self.hat_last();
        }
        let step = m - k;
        let src = GradeBasis::new(m, step)?;
        let dst = GradeBasis::new(m + 1, step + 1)?;
        let x = right_inverse_bilinear(&self.entries)?;
        let center = self.center()?;
        let center_mv = MultiVector::from_vector(&center)?;
        let mut entries = CMat::zeros(dst.len(), src.len());
        for (col, subset) in src.subsets() {
            let mut acc: Option<MultiVector> = None;
            for &axis in subset {
                let lift = x.column(axis).into_owned();
                let lifted = MultiVector::from_vector(&lift)?;
                acc = Some(match acc {
                    None => lifted,
                    Some(prev) => join(&prev, &lifted)?,
                });
            }
            let plane = join(&acc.expect("nonempty subset"), &center_mv)?;
            entries.set_column(col, plane.coeffs());
        }
        GradedLinearMap::new(src, dst, entries)
    }

    /// `tilde_k`: step-(m-k+1) extensors over C^{m+1} to their images over
    /// C^m, `2 <= k <= m`. Planes through the center map to zero.
    pub fn tilde_k(&self, k: usize) -> Result<GradedLinearMap> {
        let m = self.m;
        if k < 2 || k > m {
            return Err(ProjvarError::OrderOutOfRange(k, m));
        }
        let step = m - k + 1;
        let src = GradeBasis::new(m + 1, step)?;
        let dst = GradeBasis::new(m, step)?;
        let mut entries = CMat::zeros(dst.len(), src.len());
        for (col, subset) in src.subsets() {
            let mut acc: Option<MultiVector> = None;
            for &axis in subset {
                let image = self.entries.column(axis).into_owned();
                let mv = MultiVector::from_vector(&image)?;
                acc = Some(match acc {
                    None => mv,
                    Some(prev) => join(&prev, &mv)?,
                });
            }
            entries.set_column(col, acc.expect("nonempty subset").coeffs());
        }
        GradedLinearMap::new(src, dst, entries)
    }
}

/// The baseline extensor of two operators: the line joining their centers.
pub fn baseline(p1: &ProjectionOperator, p2: &ProjectionOperator) -> Result<MultiVector> {
    let o1 = p1.center()?;
    let o2 = p2.center()?;
    let line = join(
        &MultiVector::from_vector(&o1)?,
        &MultiVector::from_vector(&o2)?,
    )?;
    if line.norm() < 1e-10 {
        return Err(ProjvarError::CoincidentCenters);
    }
    Ok(line)
}

/// Random full-rank projection operator, resampled until well conditioned.
pub fn random_operator<R: rand::Rng>(rng: &mut R, m: usize) -> ProjectionOperator {
    loop {
        let entries = crate::numeric::random_cmat(rng, m, m + 1);
        let s = singular_values(&entries);
        if s.last().copied().unwrap_or(0.0) > 1e-3 * s.first().copied().unwrap_or(1.0) {
            return ProjectionOperator { m, entries };
        }
    }
}

/// Deterministic unit representative of a projective point.
pub fn normalize_point(v: &CVec) -> CVec {
    phase_fix(v)
}
