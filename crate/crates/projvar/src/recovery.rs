//! The projective-group action on projection pairs, canonical-pair recovery
//! from the reduced fundamental matrix, and the linear lifting solve used by
//! the dimension-induction argument.

use crate::error::{ProjvarError, Result};
use crate::exterior::{hodge, meet, MultiVector};
use crate::numeric::{
    kernel_vector, lstsq, proj_equal_mat, right_nullspace, CMat, CVec, C, NORM_FLOOR, RANK_RTOL,
};
use crate::epipolar::{reduced_fundamental, FundamentalMatrix};
use crate::projection::ProjectionOperator;
use crate::varieties::ImplicitVariety;

/// An ordered pair of projection operators with distinct centers.
#[derive(Debug, Clone)]
pub struct ProjectionPair {
    pub first: ProjectionOperator,
    pub second: ProjectionOperator,
}

impl ProjectionPair {
    pub fn new(first: ProjectionOperator, second: ProjectionOperator) -> Result<Self> {
        if first.m() != second.m() {
            return Err(ProjvarError::DimensionMismatch(
                "projection pair of different ambient dimensions".into(),
            ));
        }
        let o1 = first.center()?;
        let o2 = second.center()?;
        if crate::numeric::proj_distance_vec(&o1, &o2) < 1e-10 {
            return Err(ProjvarError::CoincidentCenters);
        }
        Ok(ProjectionPair { first, second })
    }

    pub fn m(&self) -> usize {
        self.first.m()
    }
}

/// A pair in the normal form `([I|0], [H|e2])`.
#[derive(Debug, Clone)]
pub struct CanonicalPair {
    pub h: CMat,
    pub e2: CVec,
}

impl CanonicalPair {
    pub fn m(&self) -> usize {
        self.e2.len()
    }

    pub fn pair(&self) -> Result<ProjectionPair> {
        let m = self.m();
        let first = ProjectionOperator::standard(m);
        let mut entries = CMat::zeros(m, m + 1);
        entries.view_mut((0, 0), (m, m)).copy_from(&self.h);
        entries.set_column(m, &self.e2);
        let second = ProjectionOperator::new(entries)?;
        ProjectionPair::new(first, second)
    }
}

/// Result of aligning a pair onto its canonical form: `M1 = [I|0] A^{-1}` and
/// `M2 = [H|e2] A^{-1}` hold as exact equalities.
#[derive(Debug, Clone)]
pub struct AlignedPair {
    pub a: CMat,
    pub lambda: C,
    pub v: CVec,
    pub canonical: CanonicalPair,
    pub eq1_residual: f64,
    pub eq2_residual: f64,
}

/// Action of the projective group on pairs: `(M1 A^{-1}, M2 A^{-1})`.
pub fn pgl_act(a: &CMat, pair: &ProjectionPair) -> Result<ProjectionPair> {
    let m = pair.m();
    if a.shape() != (m + 1, m + 1) {
        return Err(ProjvarError::DimensionMismatch(format!(
            "group element must be {}x{}, got {:?}",
            m + 1,
            m + 1,
            a.shape()
        )));
    }
    let inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| ProjvarError::SingularMatrix("group element is singular".into()))?;
    ProjectionPair::new(
        ProjectionOperator::new(pair.first.entries() * &inv)?,
        ProjectionOperator::new(pair.second.entries() * &inv)?,
    )
}

/// The second epipole read off a reduced fundamental matrix: the unique point
/// incident to every output line, i.e. the common kernel of the wedge maps of
/// all columns.
pub fn epipole_from_reduced(f: &FundamentalMatrix) -> Result<CVec> {
    let m = f.m;
    if f.k != m - 1 {
        return Err(ProjvarError::OrderOutOfRange(f.k, m));
    }
    let col_lines = f.entries.ncols();
    let dst = crate::exterior::GradeBasis::new(m, 2)?;
    let wedge_rows = crate::numeric::binomial(m, 3) as usize;
    let mut stacked = CMat::zeros(wedge_rows * col_lines, m);
    for j in 0..col_lines {
        let line = MultiVector::new(dst.clone(), f.entries.column(j).into_owned())?;
        let block = crate::exterior::wedge_map(&line)?;
        stacked
            .view_mut((j * wedge_rows, 0), (wedge_rows, m))
            .copy_from(&block);
    }
    kernel_vector(&stacked, RANK_RTOL).map_err(|_| ProjvarError::AmbiguousEpipole)
}

/// Canonical pair from a reduced fundamental matrix: `e2` from the kernel
/// condition and `H = [*e2]_◇ F`, the meet of each output line with the
/// hyperplane `*e2`, normalized by its largest-magnitude entry.
pub fn canonical_pair(f: &FundamentalMatrix) -> Result<CanonicalPair> {
    let m = f.m;
    if f.k != m - 1 {
        return Err(ProjvarError::OrderOutOfRange(f.k, m));
    }
    let expected = crate::numeric::binomial(m - 1, 1) as usize;
    let observed = crate::numeric::rank(&f.entries);
    if observed != expected {
        return Err(ProjvarError::RankPatternViolated(format!(
            "reduced fundamental matrix has rank {observed}, expected {expected}"
        )));
    }
    let e2 = epipole_from_reduced(f)?;
    let polar = hodge(&MultiVector::from_vector(&e2)?);
    let dst = crate::exterior::GradeBasis::new(m, 2)?;
    let mut h = CMat::zeros(m, m);
    for j in 0..m {
        let line = MultiVector::new(dst.clone(), f.entries.column(j).into_owned())?;
        let point = meet(&polar, &line)?;
        h.set_column(j, point.coeffs());
    }
    let mut scale = C::new(0.0, 0.0);
    let mut best = 0.0;
    for x in h.iter() {
        if x.norm() > best {
            best = x.norm();
            scale = *x;
        }
    }
    if best <= NORM_FLOOR {
        return Err(ProjvarError::RankPatternViolated(
            "canonical H is identically zero".into(),
        ));
    }
    let h = h / scale;
    Ok(CanonicalPair { h, e2 })
}

/// Exact alignment of a pair onto its canonical form. Returns the group
/// element `A` with `M1 = [I|0] A^{-1}` and `M2 = [H|e2] A^{-1}` as plain
/// matrix equalities, together with the scalar and covector of the defining
/// equations.
pub fn align_pair(pair: &ProjectionPair) -> Result<AlignedPair> {
    let m = pair.m();
    let (m1bar, m1last) = pair.first.split();
    let (m2bar, m2last) = pair.second.split();
    let m1inv = m1bar.clone().try_inverse().ok_or_else(|| {
        ProjvarError::SingularMatrix("leading block of the first operator".into())
    })?;
    let transfer = &m2bar * &m1inv;
    let e2 = &m2last - &transfer * &m1last;
    let ip = (e2.transpose() * &e2)[(0, 0)];
    if ip.norm() <= 1e-12 * e2.norm() * e2.norm() {
        return Err(ProjvarError::IsotropicEpipole);
    }
    // H carries the scale fixed by the first defining equation:
    // the bilinear projection of the transfer map along e2.
    let e2t_transfer = e2.transpose() * &transfer;
    let h = &transfer - &e2 * (e2t_transfer / ip);
    let e2t_m2bar = (e2.transpose() * &m2bar) / ip;
    let e2t_h_m1bar = (e2.transpose() * (&h * &m1bar)) / ip;
    let v_t = e2t_m2bar - e2t_h_m1bar;
    let lambda = ((e2.transpose() * &m2last)[(0, 0)] - (e2.transpose() * (&h * &m1last))[(0, 0)]) / ip;

    let mut b = CMat::zeros(m + 1, m + 1);
    b.view_mut((0, 0), (m, m)).copy_from(&m1bar);
    b.view_mut((0, m), (m, 1)).copy_from(&m1last);
    b.view_mut((m, 0), (1, m)).copy_from(&v_t);
    b[(m, m)] = lambda;
    let a = b.clone().try_inverse().ok_or_else(|| {
        ProjvarError::SingularMatrix("assembled change of coordinates".into())
    })?;

    let v = v_t.transpose();
    let eq1 = (&m2bar - &h * &m1bar - &e2 * v.transpose()).norm() / m2bar.norm().max(NORM_FLOOR);
    let eq2 = (&m2last - &h * &m1last - &e2 * lambda).norm() / m2last.norm().max(NORM_FLOOR);
    Ok(AlignedPair {
        a,
        lambda,
        v,
        canonical: CanonicalPair { h, e2 },
        eq1_residual: eq1,
        eq2_residual: eq2,
    })
}

/// Pairs are equivalent iff their reduced fundamental matrices agree
/// projectively.
pub fn pairs_equivalent(pair_a: &ProjectionPair, pair_b: &ProjectionPair, tol: f64) -> Result<bool> {
    let fa = reduced_fundamental(&pair_a.first, &pair_a.second)?;
    let fb = reduced_fundamental(&pair_b.first, &pair_b.second)?;
    proj_equal_mat(&fa.entries, &fb.entries, tol)
}

/// Result of the linear lifting solve.
#[derive(Debug, Clone)]
pub struct LiftedProjection {
    pub operator: ProjectionOperator,
    /// `‖Θ P - Γ‖ / ‖Γ‖`, zero for consistent data.
    pub theta_residual: f64,
    /// `‖P O‖` for the chosen center, zero for consistent data.
    pub center_residual: f64,
    /// Normalized membership residual of the probe point after fixing λ.
    pub probe_residual: f64,
    pub lambda: C,
}

/// Solve `Θ P = Γ` for an m x (m+1) projection. The solutions form an affine
/// family `P0 + ζ c^T` over the kernel direction ζ of Θ; the center of any
/// exact solution lies on the kernel line of Γ. The first point of
/// `center_line` pins the center through a joint least-squares solve, and the
/// remaining one-parameter freedom `c = w + λ v̂` along a fixed direction is
/// resolved by requiring the probe point to land on the given variety.
pub fn lift_projection(
    theta: &CMat,
    gamma: &CMat,
    center_line: (&CVec, &CVec),
    scale_probe: (&CVec, &ImplicitVariety),
) -> Result<LiftedProjection> {
    let m = theta.ncols();
    if theta.nrows() != m - 1 || gamma.shape() != (m - 1, m + 1) {
        return Err(ProjvarError::DimensionMismatch(format!(
            "expected Θ of shape {}x{} and Γ of shape {}x{}",
            m - 1,
            m,
            m - 1,
            m + 1
        )));
    }
    if crate::numeric::rank(theta) != m - 1 || crate::numeric::rank(gamma) != m - 1 {
        return Err(ProjvarError::RankDeficient(
            "Θ and Γ must have full row rank".into(),
        ));
    }
    let zeta = kernel_vector(theta, RANK_RTOL)?;
    let (o, _other) = center_line;

    // Joint least squares over vec(P): Θ P = Γ stacked with P O = 0.
    let unknowns = m * (m + 1);
    let rows = (m - 1) * (m + 1) + m;
    let mut system = CMat::zeros(rows, unknowns);
    let mut rhs = CVec::zeros(rows);
    // Block-diagonal part: Θ acting on each column of P.
    for col in 0..=m {
        for r in 0..m - 1 {
            for cc in 0..m {
                system[(col * (m - 1) + r, col * m + cc)] = theta[(r, cc)];
            }
            rhs[col * (m - 1) + r] = gamma[(r, col)];
        }
    }
    // Center rows: row i of P paired with O.
    let base = (m - 1) * (m + 1);
    for i in 0..m {
        for col in 0..=m {
            system[(base + i, col * m + i)] = o[col];
        }
    }
    let solution = lstsq(&system, &rhs, RANK_RTOL);
    let mut p0 = CMat::zeros(m, m + 1);
    for col in 0..=m {
        for i in 0..m {
            p0[(i, col)] = solution[col * m + i];
        }
    }
    let theta_residual = (theta * &p0 - gamma).norm() / gamma.norm().max(NORM_FLOOR);
    if theta_residual > 1e-1 {
        return Err(ProjvarError::InconsistentSystem(theta_residual));
    }
    // Deterministic direction with v̂^T O = 0 for the remaining parameter.
    let ot_o = (o.transpose() * o)[(0, 0)];
    if ot_o.norm() <= 1e-12 * o.norm() * o.norm() {
        return Err(ProjvarError::IsotropicEpipole);
    }
    let mut pivot = 0usize;
    let mut smallest = f64::INFINITY;
    for i in 0..o.len() {
        if o[i].norm() < smallest {
            smallest = o[i].norm();
            pivot = i;
        }
    }
    let mut vhat = CVec::zeros(m + 1);
    vhat[pivot] = C::new(1.0, 0.0);
    let correction = o * (o[pivot] / ot_o);
    vhat -= correction;

    let p_center = p0;
    let center_residual = (&p_center * o).norm() / (p_center.norm() * o.norm()).max(NORM_FLOOR);

    // Probe: P(λ) Q = q0 + λ q1 is affine in λ; each form of Y restricts to a
    // univariate polynomial whose roots give exact membership.
    let (q, variety) = scale_probe;
    let q0 = &p_center * q;
    let q1 = &zeta * (vhat.transpose() * q)[(0, 0)];
    let membership = |lam: C| -> f64 {
        let point = &q0 + &q1 * lam;
        variety.normalized_residual(&point)
    };
    let lambda = if q1.norm() <= 1e-12 * q0.norm() {
        C::new(0.0, 0.0)
    } else {
        let degree = variety.degree();
        let form = variety.forms()[0].clone();
        // Coefficients of λ ↦ f(q0 + λ q1) by interpolation on degree+1 nodes.
        let nodes: Vec<C> = (0..=degree)
            .map(|t| C::new(1.0 + t as f64, 0.5 * t as f64))
            .collect();
        let values: Vec<C> = nodes
            .iter()
            .map(|&lam| variety.eval_form(&form, &(&q0 + &q1 * lam)))
            .collect();
        let mut vand = CMat::zeros(degree + 1, degree + 1);
        for (row, &node) in nodes.iter().enumerate() {
            let mut pow = C::new(1.0, 0.0);
            for colv in 0..=degree {
                vand[(row, colv)] = pow;
                pow *= node;
            }
        }
        let coeffs = lstsq(&vand, &CVec::from_vec(values), RANK_RTOL);
        let roots = crate::poly::univariate_roots(coeffs.as_slice());
        if roots.is_empty() {
            C::new(0.0, 0.0)
        } else {
            *roots
                .iter()
                .min_by(|x, y| {
                    membership(**x)
                        .partial_cmp(&membership(**y))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .expect("nonempty roots")
        }
    };
    let probe_residual = membership(lambda);
    if probe_residual > 1e-4 {
        return Err(ProjvarError::ProbeOffCone(probe_residual));
    }
    let p_final = &p_center + &zeta * (vhat.transpose() * lambda);
    let operator = ProjectionOperator::new(p_final)?;
    Ok(LiftedProjection {
        operator,
        theta_residual,
        center_residual,
        probe_residual,
        lambda,
    })
}

/// Kernel line of Γ as two spanning points.
pub fn gamma_kernel_line(gamma: &CMat) -> Result<(CVec, CVec)> {
    let ns = right_nullspace(gamma, RANK_RTOL);
    if ns.len() != 2 {
        return Err(ProjvarError::RankDeficient(format!(
            "Γ kernel has dimension {}, expected 2",
            ns.len()
        )));
    }
    Ok((ns[0].clone(), ns[1].clone()))
}
