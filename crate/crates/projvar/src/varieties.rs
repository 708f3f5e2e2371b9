//! Parametric scene varieties, projections, implicit interpolation, dual
//! quadrics and conics, tangency and class utilities, and degree checks.

use crate::error::{ProjvarError, Result};
use crate::exterior::MultiVector;
use crate::numeric::{
    child_rng, cond, phase_fix, random_cvec, right_nullspace, CMat, CVec, C, NORM_FLOOR,
    RANK_RTOL,
};
use crate::poly::{binary_form_roots, MonomialBasis};
use crate::projection::ProjectionOperator;

/// Homogeneous polynomial map `P^n -> P^m` of degree `d`: one coefficient row
/// per target coordinate over the degree-`d` monomials in `n+1` variables.
#[derive(Debug, Clone)]
pub struct ParametricVariety {
    n: usize,
    m: usize,
    degree: usize,
    coeffs: CMat,
    basis: MonomialBasis,
}

impl ParametricVariety {
    pub fn new(n: usize, m: usize, degree: usize, coeffs: CMat) -> Result<Self> {
        let basis = MonomialBasis::new(n + 1, degree)?;
        if coeffs.shape() != (m + 1, basis.len()) {
            return Err(ProjvarError::DimensionMismatch(format!(
                "coefficient tensor of shape {:?}, expected {}x{}",
                coeffs.shape(),
                m + 1,
                basis.len()
            )));
        }
        Ok(ParametricVariety {
            n,
            m,
            degree,
            coeffs,
            basis,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &CMat {
        &self.coeffs
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    /// Evaluate the map at a parameter point, unit-normalized.
    pub fn sample(&self, t: &CVec) -> Result<CVec> {
        let raw = self.sample_raw(t)?;
        Ok(raw.clone() / C::new(raw.norm(), 0.0))
    }

    /// Evaluate without normalization; errors at base points.
    pub fn sample_raw(&self, t: &CVec) -> Result<CVec> {
        let mono = self.basis.eval(t)?;
        let value = &self.coeffs * mono;
        let scale = self.coeffs.norm() * t.norm().powi(self.degree as i32);
        if value.norm() <= 1e-12 * scale.max(NORM_FLOOR) {
            return Err(ProjvarError::BasePoint);
        }
        Ok(value)
    }

    /// Exact Jacobian of the homogeneous map at `t`: columns are the partial
    /// derivatives with respect to the `n+1` parameters.
    pub fn jacobian(&self, t: &CVec) -> Result<CMat> {
        let mut jac = CMat::zeros(self.m + 1, self.n + 1);
        for var in 0..=self.n {
            for row in 0..=self.m {
                let coeff_row: CVec = self.coeffs.row(row).transpose();
                let (lower, dcoeffs) = self.basis.derivative(&coeff_row, var)?;
                let value = lower.eval_form(&dcoeffs, t)?;
                jac[(row, var)] = value;
            }
        }
        Ok(jac)
    }

    /// Deterministic parameter samples avoiding base points.
    pub fn sample_points(&self, count: usize, seed: u64) -> Result<Vec<CVec>> {
        let mut rng = child_rng(seed, "variety_samples");
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0usize;
        while out.len() < count {
            attempts += 1;
            if attempts > 64 * count + 64 {
                return Err(ProjvarError::GenericityExhausted(
                    attempts,
                    "sampling the parametric variety".into(),
                ));
            }
            let t = random_cvec(&mut rng, self.n + 1);
            if let Ok(p) = self.sample(&t) {
                out.push(p);
            }
        }
        Ok(out)
    }
}

/// Componentwise composition `M ∘ V`; errors when the center lies on the
/// variety (sampled check).
pub fn project_variety(p: &ProjectionOperator, v: &ParametricVariety) -> Result<ParametricVariety> {
    if p.m() != v.m() {
        return Err(ProjvarError::DimensionMismatch(format!(
            "projection in dimension {} applied to a variety in P^{}",
            p.m(),
            v.m()
        )));
    }
    let coeffs = p.entries() * v.coeffs();
    let projected = ParametricVariety::new(v.n(), p.m() - 1, v.degree(), coeffs)?;
    // Sampled detection of a center on the variety: the composed map would
    // vanish there.
    let mut rng = child_rng(0x70726f6a, "center_check");
    for _ in 0..24 {
        let t = random_cvec(&mut rng, v.n() + 1);
        let Ok(x) = v.sample(&t) else { continue };
        let image = p.entries() * &x;
        if image.norm() <= 1e-10 * p.entries().norm() {
            return Err(ProjvarError::CenterOnVariety);
        }
    }
    Ok(projected)
}

/// Homogeneous forms of one degree vanishing on a point set.
#[derive(Debug, Clone)]
pub struct ImplicitVariety {
    dim: usize,
    degree: usize,
    forms: Vec<CVec>,
    basis: MonomialBasis,
}

impl ImplicitVariety {
    pub fn new(dim: usize, degree: usize, forms: Vec<CVec>) -> Result<Self> {
        let basis = MonomialBasis::new(dim + 1, degree)?;
        for f in &forms {
            if f.len() != basis.len() {
                return Err(ProjvarError::DimensionMismatch(format!(
                    "form of length {} over a basis of {} monomials",
                    f.len(),
                    basis.len()
                )));
            }
            if f.norm() <= NORM_FLOOR {
                return Err(ProjvarError::ZeroMultivector);
            }
        }
        Ok(ImplicitVariety {
            dim,
            degree,
            forms,
            basis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn forms(&self) -> &[CVec] {
        &self.forms
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn eval_form(&self, form: &CVec, point: &CVec) -> C {
        self.basis
            .eval_form(form, point)
            .expect("point length matches basis")
    }

    /// Largest normalized evaluation over all forms at the unit representative
    /// of the point.
    pub fn normalized_residual(&self, point: &CVec) -> f64 {
        let n = point.norm();
        if n <= NORM_FLOOR {
            return f64::INFINITY;
        }
        let unit = point / C::new(n, 0.0);
        self.forms
            .iter()
            .map(|f| self.eval_form(f, &unit).norm() / f.norm())
            .fold(0.0, f64::max)
    }
}

/// All independent degree-`degree` forms vanishing on the samples, from the
/// thresholded nullspace of the monomial design matrix.
pub fn implicit_fit(samples: &[CVec], degree: usize, dim: usize) -> Result<ImplicitVariety> {
    let basis = MonomialBasis::new(dim + 1, degree)?;
    let need = 2 * basis.len();
    if samples.len() < need {
        return Err(ProjvarError::InsufficientSamples {
            got: samples.len(),
            need,
        });
    }
    let mut design = CMat::zeros(samples.len(), basis.len());
    for (row, s) in samples.iter().enumerate() {
        if s.len() != dim + 1 {
            return Err(ProjvarError::DimensionMismatch(format!(
                "sample of length {} in P^{dim}",
                s.len()
            )));
        }
        let unit = s / C::new(s.norm().max(NORM_FLOOR), 0.0);
        let values = basis.eval(&unit)?;
        design.row_mut(row).copy_from(&values.transpose());
    }
    let null = right_nullspace(&design, RANK_RTOL);
    if null.is_empty() {
        return Err(ProjvarError::NoForms);
    }
    let forms: Vec<CVec> = null.iter().map(phase_fix).collect();
    ImplicitVariety::new(dim, degree, forms)
}

/// Symmetric complex matrix of a quadric hypersurface.
#[derive(Debug, Clone)]
pub struct Quadric {
    gram: CMat,
}

impl Quadric {
    pub fn new(gram: CMat) -> Result<Self> {
        if gram.nrows() != gram.ncols() {
            return Err(ProjvarError::DimensionMismatch(
                "quadric matrix must be square".into(),
            ));
        }
        let asym = (&gram - gram.transpose()).norm();
        if asym > 1e-12 * gram.norm().max(NORM_FLOOR) {
            return Err(ProjvarError::DimensionMismatch(
                "quadric matrix must be symmetric".into(),
            ));
        }
        Ok(Quadric { gram })
    }

    /// Symmetrized from an arbitrary square matrix.
    pub fn symmetrized(m: &CMat) -> Result<Self> {
        Quadric::new((m + m.transpose()) * C::new(0.5, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows() - 1
    }

    pub fn gram(&self) -> &CMat {
        &self.gram
    }

    pub fn eval(&self, x: &CVec) -> C {
        (x.transpose() * &self.gram * x)[(0, 0)]
    }

    pub fn is_smooth(&self, rtol: f64) -> bool {
        crate::numeric::rank_with_tol(&self.gram, rtol) == self.gram.nrows()
    }

    /// Quadratic form on the degree-2 monomial basis.
    pub fn to_form(&self) -> Result<(MonomialBasis, CVec)> {
        let size = self.gram.nrows();
        let basis = MonomialBasis::new(size, 2)?;
        let mut coeffs = CVec::zeros(basis.len());
        for i in 0..size {
            for j in 0..size {
                let mut exps = vec![0u32; size];
                exps[i] += 1;
                exps[j] += 1;
                let idx = basis.index_of(&exps).expect("degree-2 exponent");
                coeffs[idx] += self.gram[(i, j)];
            }
        }
        Ok((basis, coeffs))
    }
}

/// Adjugate (transposed cofactor matrix) by minor determinants.
pub fn adjugate(m: &CMat) -> CMat {
    let n = m.nrows();
    if n == 1 {
        return CMat::from_element(1, 1, C::new(1.0, 0.0));
    }
    let mut adj = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut minor = CMat::zeros(n - 1, n - 1);
            let mut rr = 0;
            for r in 0..n {
                if r == i {
                    continue;
                }
                let mut cc = 0;
                for cidx in 0..n {
                    if cidx == j {
                        continue;
                    }
                    minor[(rr, cc)] = m[(r, cidx)];
                    cc += 1;
                }
                rr += 1;
            }
            let det = minor.lu().determinant();
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            // Cofactor transposed: adj[j][i] = (-1)^{i+j} det(minor_ij).
            adj[(j, i)] = det * C::new(sign, 0.0);
        }
    }
    adj
}

/// Dual quadric: the adjugate matrix. For an invertible quadric this is
/// proportional to the inverse; a hyperplane `h` is tangent to the quadric iff
/// `h^T C* h = 0`.
pub fn dual_quadric(c: &Quadric) -> Quadric {
    Quadric {
        gram: adjugate(c.gram()),
    }
}

/// Gauss-map value: the tangent space at a smooth parameter point as a
/// step-(n+1) extensor, the wedge of the partial-derivative vectors.
pub fn tangent_extensor(v: &ParametricVariety, t: &CVec) -> Result<MultiVector> {
    let jac = v.jacobian(t)?;
    if crate::numeric::rank_with_tol(&jac, 1e-10) != v.n() + 1 {
        return Err(ProjvarError::SingularJacobian);
    }
    let cols: Vec<CVec> = (0..=v.n()).map(|j| jac.column(j).into_owned()).collect();
    crate::exterior::span_to_extensor(&cols)
}

/// Diagnostics of the class computation on a pencil of hyperplanes.
#[derive(Debug, Clone)]
pub struct ClassCount {
    /// Number of pencil parameters tangent to the quadric, with multiplicity.
    pub count: usize,
    /// True when the two tangency parameters coincide.
    pub double_root: bool,
    pub roots: Vec<(C, C)>,
}

/// Tangent hyperplanes to a smooth quadric inside the pencil
/// `t0 H0 + t1 H1`: the restriction of the dual quadric to the pencil is a
/// binary quadratic form whose roots, counted with multiplicity, give the
/// class. Errors when the restriction vanishes identically.
pub fn class_count_quadric(c: &Quadric, h0: &CVec, h1: &CVec) -> Result<ClassCount> {
    let dual = dual_quadric(c);
    let q = dual.gram();
    let a = (h0.transpose() * q * h0)[(0, 0)];
    let b = (h0.transpose() * q * h1)[(0, 0)] + (h1.transpose() * q * h0)[(0, 0)];
    let cc = (h1.transpose() * q * h1)[(0, 0)];
    let scale = q.norm() * (h0.norm() + h1.norm()).powi(2);
    if a.norm() + b.norm() + cc.norm() <= 1e-12 * scale.max(NORM_FLOOR) {
        return Err(ProjvarError::DegeneratePencil);
    }
    // Binary form a t0^2 + b t0 t1 + cc t1^2.
    let roots = binary_form_roots(&[a, b, cc]);
    let discriminant = b * b - a * cc * C::new(4.0, 0.0);
    let double_root = discriminant.norm() <= 1e-8 * (a.norm() + b.norm() + cc.norm()).powi(2);
    Ok(ClassCount {
        count: roots.len(),
        double_root,
        roots,
    })
}

/// Degree diagnostics of a curve against a hyperplane.
#[derive(Debug, Clone)]
pub struct DegreeCount {
    pub count: usize,
    pub roots: Vec<(C, C)>,
}

/// Number of intersections, with multiplicity, of a parametric curve with a
/// hyperplane: roots of the degree-d binary form `h · V(t, s)`.
pub fn degree_check(v: &ParametricVariety, h: &CVec) -> Result<DegreeCount> {
    if v.n() != 1 {
        return Err(ProjvarError::DimensionMismatch(
            "degree check applies to curves (n = 1)".into(),
        ));
    }
    if h.len() != v.m() + 1 {
        return Err(ProjvarError::DimensionMismatch(format!(
            "hyperplane of length {} in P^{}",
            h.len(),
            v.m()
        )));
    }
    let restricted = (h.transpose() * v.coeffs()).transpose();
    if restricted.norm() <= 1e-12 * h.norm() * v.coeffs().norm() {
        return Err(ProjvarError::HyperplaneContainsCurve);
    }
    // The monomial basis for n = 1 lists t^d, t^{d-1}s, ..., s^d in order.
    let coeffs: Vec<C> = restricted.iter().copied().collect();
    let roots = binary_form_roots(&coeffs);
    Ok(DegreeCount {
        count: roots.len(),
        roots,
    })
}

/// Degree-2 parametrization of a smooth quadric hypersurface by projection
/// from a point on it: `x(u) = (v^T Q v) p0 - 2 (p0^T Q v) v` with `v = N u`
/// for a seeded transversal frame `N`. The map has isolated base points away
/// from generic parameters.
pub fn quadric_parametrization(q: &Quadric, seed: u64) -> Result<ParametricVariety> {
    let size = q.gram().nrows();
    let dim = size - 1;
    let mut rng = child_rng(seed, "quadric_param");
    for _ in 0..64 {
        // A point on the quadric from a random line section.
        let u = random_cvec(&mut rng, size);
        let w = random_cvec(&mut rng, size);
        let a = q.eval(&w);
        let b = (u.transpose() * q.gram() * &w)[(0, 0)] * C::new(2.0, 0.0);
        let cc = q.eval(&u);
        let roots = crate::poly::univariate_roots(&[cc, b, a]);
        let Some(&alpha) = roots.first() else {
            continue;
        };
        let p0 = &u + &w * alpha;
        if q.eval(&p0).norm() > 1e-9 * q.gram().norm() * p0.norm() * p0.norm() {
            continue;
        }
        let frame = crate::numeric::random_cmat(&mut rng, size, dim);
        let basis = MonomialBasis::new(dim, 2)?;
        let mut coeffs = CMat::zeros(size, basis.len());
        for i in 0..dim {
            for j in 0..dim {
                let mut exps = vec![0u32; dim];
                exps[i] += 1;
                exps[j] += 1;
                let idx = basis.index_of(&exps).expect("degree-2 exponent");
                let ni = frame.column(i).into_owned();
                let nj = frame.column(j).into_owned();
                let vqv = (ni.transpose() * q.gram() * &nj)[(0, 0)];
                let pqv = (p0.transpose() * q.gram() * &nj)[(0, 0)];
                let term = &p0 * vqv - &ni * (pqv * C::new(2.0, 0.0));
                let mut col = coeffs.column(idx).into_owned();
                col += term;
                coeffs.set_column(idx, &col);
            }
        }
        let surface = ParametricVariety::new(dim - 1, dim, 2, coeffs)?;
        // Sampled sanity: images lie on the quadric.
        let t = random_cvec(&mut rng, dim);
        let Ok(x) = surface.sample_raw(&t) else {
            continue;
        };
        if q.eval(&x).norm() < 1e-9 * q.gram().norm() * x.norm() * x.norm() {
            return Ok(surface);
        }
    }
    Err(ProjvarError::GenericityExhausted(
        64,
        "parametrizing the quadric hypersurface".into(),
    ))
}

/// Rejection-resampled well-spread parameter draws: resample the whole batch
/// when the design matrix conditioning degrades.
pub fn well_spread_samples(
    v: &ParametricVariety,
    count: usize,
    degree: usize,
    seed: u64,
) -> Result<Vec<CVec>> {
    let basis = MonomialBasis::new(v.m() + 1, degree)?;
    for attempt in 0..16u64 {
        let samples = v.sample_points(count, seed.wrapping_add(attempt << 32))?;
        let mut design = CMat::zeros(samples.len(), basis.len());
        for (row, s) in samples.iter().enumerate() {
            design.row_mut(row).copy_from(&basis.eval(s)?.transpose());
        }
        if cond(&design) < 1e10 {
            return Ok(samples);
        }
    }
    Err(ProjvarError::GenericityExhausted(
        16,
        "well-spread sampling hit ill-conditioned design matrices".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{hodge, proj_equal};
    use crate::numeric::{proj_equal_mat, proj_equal_vec, random_cmat};
    use crate::projection::random_operator;

    /// Rational normal curve of degree d into P^m through a coefficient matrix.
    fn rnc(m: usize, d: usize, a: CMat) -> ParametricVariety {
        ParametricVariety::new(1, m, d, a).unwrap()
    }

    fn twisted_cubic() -> ParametricVariety {
        rnc(3, 3, CMat::identity(4, 4))
    }

    /// The Veronese conic (t^2, ts, s^2) in the plane.
    fn veronese_conic() -> ParametricVariety {
        rnc(2, 2, CMat::identity(3, 3))
    }

    #[test]
    fn sampling_examples() {
        // Rational normal curve d=3 at (1, 0) -> (1, 0, 0, 0).
        let v = twisted_cubic();
        let t = CVec::from_vec(vec![C::new(1.0, 0.0), C::new(0.0, 0.0)]);
        let p = v.sample(&t).unwrap();
        let mut e1 = CVec::zeros(4);
        e1[0] = C::new(1.0, 0.0);
        assert!(proj_equal_vec(&p, &e1, 1e-14).unwrap());

        // Veronese conic at (1, 1) -> (1, 1, 1).
        let conic = veronese_conic();
        let t = CVec::from_vec(vec![C::new(1.0, 0.0), C::new(1.0, 0.0)]);
        let p = conic.sample(&t).unwrap();
        let ones = CVec::from_element(3, C::new(1.0, 0.0));
        assert!(proj_equal_vec(&p, &ones, 1e-14).unwrap());

        // A map with a base point errors there.
        let mut coeffs = CMat::zeros(3, 3);
        coeffs[(0, 0)] = C::new(1.0, 0.0);
        coeffs[(1, 1)] = C::new(1.0, 0.0);
        // third coordinate identically zero; base point at t = 0 for the map
        // (t^2, ts, 0): vanishes at (0 : 1).
        let degenerate = ParametricVariety::new(1, 2, 2, coeffs).unwrap();
        let t0 = CVec::from_vec(vec![C::new(0.0, 0.0), C::new(1.0, 0.0)]);
        assert!(matches!(degenerate.sample(&t0), Err(ProjvarError::BasePoint)));
    }

    #[test]
    fn implicit_fit_residuals_and_counts() {
        let mut rng = child_rng(71, "fit");
        // Plane conic: one quadratic form, Gram matrix matching ground truth.
        let a = random_cmat(&mut rng, 3, 3);
        let conic = rnc(2, 2, a.clone());
        let samples = conic.sample_points(12, 5).unwrap();
        let fitted = implicit_fit(&samples, 2, 2).unwrap();
        assert_eq!(fitted.forms().len(), 1);
        for s in &samples {
            assert!(fitted.normalized_residual(s) < 1e-8);
        }
        // Ground-truth Gram: B^{-T} G0 B^{-1} for the Veronese conic Gram G0.
        // Gram of x0 x2 - x1^2, the Veronese conic.
        let g0 = CMat::from_row_slice(
            3,
            3,
            &[
                C::new(0.0, 0.0),
                C::new(0.0, 0.0),
                C::new(0.5, 0.0),
                C::new(0.0, 0.0),
                C::new(-1.0, 0.0),
                C::new(0.0, 0.0),
                C::new(0.5, 0.0),
                C::new(0.0, 0.0),
                C::new(0.0, 0.0),
            ],
        );
        let g0 = Quadric::new(g0).unwrap();
        let binv = a.clone().try_inverse().unwrap();
        let gram_truth = binv.transpose() * g0.gram() * &binv;
        let truth_quadric = Quadric::symmetrized(&gram_truth).unwrap();
        let (_, truth_form) = truth_quadric.to_form().unwrap();
        assert!(proj_equal_vec(&fitted.forms()[0], &truth_form, 1e-7).unwrap());

        // Samples of a line at degree 1 give the line coordinates back.
        let dir0 = random_cvec(&mut rng, 3);
        let dir1 = random_cvec(&mut rng, 3);
        let line_pts: Vec<CVec> = (0..8)
            .map(|_| {
                let lam = crate::numeric::random_complex(&mut rng);
                let p = &dir0 + &dir1 * lam;
                p.clone() / C::new(p.norm(), 0.0)
            })
            .collect();
        let line = implicit_fit(&line_pts, 1, 2).unwrap();
        assert_eq!(line.forms().len(), 1);
        // The form annihilates both spanning points.
        assert!(line.eval_form(&line.forms()[0], &dir0).norm() < 1e-8 * dir0.norm());
        assert!(line.eval_form(&line.forms()[0], &dir1).norm() < 1e-8 * dir1.norm());

        // Twisted cubic: three independent quadrics.
        let cubic = twisted_cubic();
        let samples = cubic.sample_points(24, 6).unwrap();
        let fitted = implicit_fit(&samples, 2, 3).unwrap();
        assert_eq!(fitted.forms().len(), 3);
        for s in &samples {
            assert!(fitted.normalized_residual(s) < 1e-8);
        }

        assert!(matches!(
            implicit_fit(&samples[..3], 2, 3),
            Err(ProjvarError::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn projection_preserves_degree_and_conic_grams() {
        let mut rng = child_rng(72, "project");
        // [I|0] on the twisted cubic drops the last coordinate.
        let p = ProjectionOperator::standard(3);
        let cubic = twisted_cubic();
        let projected = project_variety(&p, &cubic).unwrap();
        assert_eq!(projected.m(), 2);
        assert_eq!(projected.degree(), 3);
        let t = CVec::from_vec(vec![C::new(2.0, 1.0), C::new(1.0, -1.0)]);
        let x = cubic.sample_raw(&t).unwrap();
        let y = projected.sample_raw(&t).unwrap();
        for i in 0..3 {
            assert!((y[i] - x[i]).norm() < 1e-12 * x.norm());
        }

        // Degree is preserved through projection for conics and cubics.
        for (variety, d) in [(conic_in_p3(&mut rng), 2usize), (twisted_cubic(), 3)] {
            let op = random_operator(&mut rng, 3);
            let projected = project_variety(&op, &variety).unwrap();
            for _ in 0..20 {
                let h = random_cvec(&mut rng, 4);
                let before = degree_check(&variety, &h).unwrap();
                assert_eq!(before.count, d);
                let h2 = random_cvec(&mut rng, 3);
                let after = degree_check(&projected, &h2).unwrap();
                assert_eq!(after.count, d);
            }
            // Generic projection of a conic gives an invertible Gram fit.
            if d == 2 {
                let samples = projected.sample_points(16, 9).unwrap();
                let fitted = implicit_fit(&samples, 2, 2).unwrap();
                assert_eq!(fitted.forms().len(), 1);
                let gram = form_to_gram(&fitted.forms()[0]);
                assert_eq!(crate::numeric::rank(&gram), 3);
            }
        }
    }

    /// Random conic inside a random plane of P^3.
    fn conic_in_p3(rng: &mut rand_chacha::ChaCha12Rng) -> ParametricVariety {
        let embed = random_cmat(rng, 4, 3);
        rnc(3, 2, embed)
    }

    /// Gram matrix of a ternary quadratic form.
    fn form_to_gram(form: &CVec) -> CMat {
        let basis = MonomialBasis::new(3, 2).unwrap();
        let mut gram = CMat::zeros(3, 3);
        for idx in 0..basis.len() {
            let e = basis.exponent(idx);
            let (i, j) = match e {
                [2, 0, 0] => (0, 0),
                [0, 2, 0] => (1, 1),
                [0, 0, 2] => (2, 2),
                [1, 1, 0] => (0, 1),
                [1, 0, 1] => (0, 2),
                [0, 1, 1] => (1, 2),
                _ => unreachable!(),
            };
            if i == j {
                gram[(i, j)] = form[idx];
            } else {
                gram[(i, j)] = form[idx] * C::new(0.5, 0.0);
                gram[(j, i)] = form[idx] * C::new(0.5, 0.0);
            }
        }
        gram
    }

    #[test]
    fn dual_quadric_examples() {
        // Identity conic is self-dual.
        let eye = Quadric::new(CMat::identity(3, 3)).unwrap();
        let dual = dual_quadric(&eye);
        assert!(proj_equal_mat(dual.gram(), eye.gram(), 1e-12).unwrap());

        // diag(1,2,3) duals to ~ diag(6,3,2), the cofactor products.
        let mut d = CMat::zeros(3, 3);
        d[(0, 0)] = C::new(1.0, 0.0);
        d[(1, 1)] = C::new(2.0, 0.0);
        d[(2, 2)] = C::new(3.0, 0.0);
        let dual = dual_quadric(&Quadric::new(d).unwrap());
        let mut expected = CMat::zeros(3, 3);
        expected[(0, 0)] = C::new(6.0, 0.0);
        expected[(1, 1)] = C::new(3.0, 0.0);
        expected[(2, 2)] = C::new(2.0, 0.0);
        assert!(proj_equal_mat(dual.gram(), &expected, 1e-12).unwrap());

        // Tangent line at a sampled point of a random smooth conic satisfies
        // h^T C* h = 0.
        let mut rng = child_rng(73, "dualtan");
        let a = random_cmat(&mut rng, 3, 3);
        let conic = rnc(2, 2, a.clone());
        let binv = a.try_inverse().unwrap();
        let g0 = form_to_gram(&{
            let b = MonomialBasis::new(3, 2).unwrap();
            let mut f = CVec::zeros(b.len());
            f[b.index_of(&[1, 0, 1]).unwrap()] = C::new(1.0, 0.0);
            f[b.index_of(&[0, 2, 0]).unwrap()] = C::new(-1.0, 0.0);
            f
        });
        let gram = Quadric::symmetrized(&(binv.transpose() * g0 * &binv)).unwrap();
        let dual = dual_quadric(&gram);
        let t = CVec::from_vec(vec![C::new(0.3, 0.7), C::new(1.0, -0.2)]);
        let tangent = tangent_extensor(&conic, &t).unwrap();
        let h = hodge(&tangent);
        let hv = h.coeffs().clone();
        let value = (hv.transpose() * dual.gram() * &hv)[(0, 0)];
        assert!(value.norm() < 1e-10 * dual.gram().norm() * hv.norm() * hv.norm());
    }

    #[test]
    fn tangent_extensor_examples() {
        // Plane conic (t^2, ts, s^2) at (1, 0): tangent line (1,0,0) ∧ (0,1,0).
        let conic = veronese_conic();
        let t = CVec::from_vec(vec![C::new(1.0, 0.0), C::new(0.0, 0.0)]);
        let tangent = tangent_extensor(&conic, &t).unwrap();
        let expected = MultiVector::basis_extensor(3, &[0, 1]).unwrap();
        assert!(proj_equal(&tangent, &expected, 1e-12).unwrap());

        // Quadric surface in P^3: tangent plane at a sample is Q x as a dual
        // point, cross-checked through the Hodge dual of the Gauss value.
        let mut rng = child_rng(74, "quadtan");
        let quad_param = stereographic_quadric(&mut rng);
        let (surface, gram) = quad_param;
        let t = random_cvec(&mut rng, 3);
        let x = surface.sample_raw(&t).unwrap();
        assert!(gram.eval(&x).norm() < 1e-10 * gram.gram().norm() * x.norm() * x.norm());
        let tangent = tangent_extensor(&surface, &t).unwrap();
        let dual_point = hodge(&tangent);
        let qx = gram.gram() * &x;
        assert!(proj_equal_vec(&dual_point.coeffs().clone(), &qx, 1e-8).unwrap());

        // Linear varieties have constant Gauss value.
        let mut line_coeffs = CMat::zeros(4, 2);
        line_coeffs[(0, 0)] = C::new(1.0, 0.0);
        line_coeffs[(2, 1)] = C::new(1.0, 0.0);
        line_coeffs[(3, 1)] = C::new(2.0, 0.0);
        let line = ParametricVariety::new(1, 3, 1, line_coeffs).unwrap();
        let t1 = CVec::from_vec(vec![C::new(1.0, 0.0), C::new(0.5, 0.5)]);
        let t2 = CVec::from_vec(vec![C::new(-2.0, 1.0), C::new(0.1, 0.9)]);
        let g1 = tangent_extensor(&line, &t1).unwrap();
        let g2 = tangent_extensor(&line, &t2).unwrap();
        assert!(proj_equal(&g1, &g2, 1e-12).unwrap());
    }

    /// Smooth quadric surface in P^3 via stereographic parametrization from a
    /// point on it, together with its Gram matrix.
    fn stereographic_quadric(rng: &mut rand_chacha::ChaCha12Rng) -> (ParametricVariety, Quadric) {
        loop {
            let g = Quadric::symmetrized(&random_cmat(rng, 4, 4)).unwrap();
            if !g.is_smooth(1e-6) {
                continue;
            }
            // A point on the quadric: solve a quadratic on a random line.
            let u = random_cvec(rng, 4);
            let w = random_cvec(rng, 4);
            let a = g.eval(&w);
            let b = (u.transpose() * g.gram() * &w)[(0, 0)] * C::new(2.0, 0.0);
            let cc = g.eval(&u);
            let roots = crate::poly::univariate_roots(&[cc, b, a]);
            let Some(&alpha) = roots.first() else { continue };
            let p0 = &u + &w * alpha;
            if g.eval(&p0).norm() > 1e-9 * g.gram().norm() * p0.norm() * p0.norm() {
                continue;
            }
            // Directions transverse to p0.
            let n = random_cmat(rng, 4, 3);
            // x(v) = (v^T Q v) p0 - 2 (p0^T Q v) v, degree 2 in v = N u.
            let basis = MonomialBasis::new(3, 2).unwrap();
            let mut coeffs = CMat::zeros(4, basis.len());
            for idx in 0..basis.len() {
                let e = basis.exponent(idx);
                // v = N u: expand both quadratic coefficients explicitly by
                // evaluating on the exponent structure.
                let mut term = CVec::zeros(4);
                // Iterate over pairs (i, j) with u_i u_j matching e.
                for i in 0..3 {
                    for j in 0..3 {
                        let mut exps = vec![0u32; 3];
                        exps[i] += 1;
                        exps[j] += 1;
                        if exps != e {
                            continue;
                        }
                        let ni = n.column(i).into_owned();
                        let nj = n.column(j).into_owned();
                        let vqv = (ni.transpose() * g.gram() * &nj)[(0, 0)];
                        let pqv = (p0.transpose() * g.gram() * &nj)[(0, 0)];
                        term += &p0 * vqv - &ni * (pqv * C::new(2.0, 0.0));
                    }
                }
                coeffs.set_column(idx, &term);
            }
            let Ok(surface) = ParametricVariety::new(2, 3, 2, coeffs) else {
                continue;
            };
            // Sanity: samples lie on the quadric.
            let t = random_cvec(rng, 3);
            let Ok(x) = surface.sample_raw(&t) else { continue };
            if g.eval(&x).norm() < 1e-9 * g.gram().norm() * x.norm() * x.norm() {
                return (surface, g);
            }
        }
    }

    #[test]
    fn class_counts_for_quadrics() {
        let mut rng = child_rng(75, "class");
        // Smooth conics and quadrics in dimensions 2..4 have class 2.
        for dim in 2..=4usize {
            loop {
                let q = Quadric::symmetrized(&random_cmat(&mut rng, dim + 1, dim + 1)).unwrap();
                if !q.is_smooth(1e-6) {
                    continue;
                }
                let h0 = random_cvec(&mut rng, dim + 1);
                let h1 = random_cvec(&mut rng, dim + 1);
                let count = class_count_quadric(&q, &h0, &h1).unwrap();
                assert_eq!(count.count, 2);
                assert!(!count.double_root);
                break;
            }
        }

        // A pencil chosen tangentially produces a multiplicity-2 root.
        let q = Quadric::new(CMat::identity(3, 3)).unwrap();
        // h0 tangent to the unit conic: h0^T C* h0 = 0 at h0 = (1, i, 0)...
        let h0 = CVec::from_vec(vec![C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(0.0, 0.0)]);
        // Pencil direction with vanishing cross term: the restricted form is
        // t1^2 times a constant, a double root at t1 = 0.
        let h1 = CVec::from_vec(vec![C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)]);
        let count = class_count_quadric(&q, &h0, &h1).unwrap();
        assert_eq!(count.count, 2);
        assert!(count.double_root);

        // Degenerate pencil: both generators vanish on the dual and so does
        // the whole restriction.
        let zero0 = CVec::zeros(3);
        assert!(matches!(
            class_count_quadric(&q, &zero0, &CVec::zeros(3)),
            Err(ProjvarError::DegeneratePencil)
        ));
    }

    #[test]
    fn degree_check_examples() {
        let mut rng = child_rng(76, "degree");
        // Twisted cubic against a generic hyperplane: 3 intersections.
        let cubic = twisted_cubic();
        let h = random_cvec(&mut rng, 4);
        let count = degree_check(&cubic, &h).unwrap();
        assert_eq!(count.count, 3);

        // Conic: 2.
        let conic = conic_in_p3(&mut rng);
        let h = random_cvec(&mut rng, 4);
        assert_eq!(degree_check(&conic, &h).unwrap().count, 2);

        // A hyperplane through a sampled curve point recovers that root.
        let t_star = CVec::from_vec(vec![C::new(0.8, 0.1), C::new(1.0, -0.3)]);
        let x = cubic.sample_raw(&t_star).unwrap();
        // Build h with h · x = 0.
        let mut h = random_cvec(&mut rng, 4);
        let correction = (h.transpose() * &x)[(0, 0)] / (x[0].conj() * x[0] + x[1].conj() * x[1] + x[2].conj() * x[2] + x[3].conj() * x[3]);
        h -= x.map(|v| v.conj()) * correction;
        let count = degree_check(&cubic, &h).unwrap();
        assert_eq!(count.count, 3);
        let found = count
            .roots
            .iter()
            .map(|&r| crate::poly::p1_distance(r, (t_star[0], t_star[1])))
            .fold(f64::INFINITY, f64::min);
        assert!(found < 1e-7, "closest root distance {found:.3e}");

        // Hyperplane containing the curve errors out: project the cubic into
        // a plane curve inside P^3 by zeroing a coordinate combination.
        let mut embed = CMat::zeros(4, 3);
        embed[(0, 0)] = C::new(1.0, 0.0);
        embed[(1, 1)] = C::new(1.0, 0.0);
        embed[(2, 2)] = C::new(1.0, 0.0);
        let planar_conic = rnc(3, 2, embed);
        let mut h = CVec::zeros(4);
        h[3] = C::new(1.0, 0.0);
        assert!(matches!(
            degree_check(&planar_conic, &h),
            Err(ProjvarError::HyperplaneContainsCurve)
        ));
    }
}
