//! The generalized Kruppa equation: residual evaluation by coefficient
//! extraction with elimination of the free scalar, the classical matrix form,
//! a damped Gauss-Newton solver over (e1, F, e2), and the dimension and
//! isolation diagnostics.
//!
//! The equation couples the dual polynomials of the two projected varieties
//! along a hyperplane slice of the first image space: both sides restrict to
//! degree-c homogeneous polynomials of the slice coordinates and must be
//! proportional. Coefficients are recovered by interpolation on a seeded
//! lattice and compared through pairwise cross products, which removes the
//! scalar without dividing by possibly vanishing coefficients.

use std::collections::BTreeMap;

use crate::error::{ProjvarError, Result};
use crate::exterior::{hodge_matrix, join, MultiVector};
use crate::numeric::{
    binomial, child_rng, cond, lstsq, random_cvec, real_right_nullspace, real_singular_values,
    CMat, CVec, RMat, RVec, C, NORM_FLOOR, RANK_RTOL,
};
use crate::poly::MonomialBasis;
use crate::scene::Scene;
use crate::varieties::Quadric;

/// Homogeneous polynomial of one degree (the class) on a dual space.
#[derive(Debug, Clone)]
pub struct DualPolynomial {
    /// Projective dimension of the underlying image space (m - 1).
    pub dim: usize,
    /// Class: the degree of the dual hypersurface.
    pub degree: usize,
    pub coeffs: CVec,
    basis: MonomialBasis,
}

impl DualPolynomial {
    pub fn new(dim: usize, degree: usize, coeffs: CVec) -> Result<Self> {
        let basis = MonomialBasis::new(dim + 1, degree)?;
        if coeffs.len() != basis.len() {
            return Err(ProjvarError::DimensionMismatch(format!(
                "dual polynomial with {} coefficients over {} monomials",
                coeffs.len(),
                basis.len()
            )));
        }
        if coeffs.norm() <= NORM_FLOOR {
            return Err(ProjvarError::ZeroMultivector);
        }
        Ok(DualPolynomial {
            dim,
            degree,
            coeffs,
            basis,
        })
    }

    /// Dual polynomial of a quadric model: the quadratic form of its dual
    /// (adjugate) matrix.
    pub fn from_dual_quadric(dual: &Quadric) -> Result<Self> {
        let (_, form) = dual.to_form()?;
        DualPolynomial::new(dual.dim(), 2, form)
    }

    pub fn eval(&self, h: &CVec) -> Result<C> {
        self.basis.eval_form(&self.coeffs, h)
    }
}

/// Hyperplane slice of the first image space with its linear parametrization
/// of the (m-3)-planes it contains: `w(x) = interior(x~, h1 ∧ ... ∧ h_{m-1})`
/// expanded as a matrix applied to the slice coordinates x.
#[derive(Debug, Clone)]
pub struct KruppaSlice {
    pub h_basis: Vec<CVec>,
    /// `C(m, m-2) x (m-1)`: columns are the signed omitted wedges.
    pub param_matrix: CMat,
}

impl KruppaSlice {
    pub fn new(h_basis: Vec<CVec>) -> Result<Self> {
        let m = h_basis
            .first()
            .map(|h| h.len())
            .ok_or_else(|| ProjvarError::DependentPoints)?;
        if h_basis.len() != m - 1 {
            return Err(ProjvarError::DimensionMismatch(format!(
                "slice needs m-1 = {} basis points, got {}",
                m - 1,
                h_basis.len()
            )));
        }
        let rows = binomial(m, m - 2) as usize;
        let mut param_matrix = CMat::zeros(rows, m - 1);
        for omit in 0..m - 1 {
            let mut acc: Option<MultiVector> = None;
            for (j, h) in h_basis.iter().enumerate() {
                if j == omit {
                    continue;
                }
                let hv = MultiVector::from_vector(h)?;
                acc = Some(match acc {
                    None => hv,
                    Some(prev) => join(&prev, &hv)?,
                });
            }
            let wedge = match acc {
                Some(w) => w,
                None => MultiVector::scalar(m, C::new(1.0, 0.0))?,
            };
            if wedge.norm() <= 1e-12 {
                return Err(ProjvarError::DependentPoints);
            }
            let sign = if omit % 2 == 0 { 1.0 } else { -1.0 };
            param_matrix.set_column(omit, &(wedge.coeffs() * C::new(sign, 0.0)));
        }
        Ok(KruppaSlice {
            h_basis,
            param_matrix,
        })
    }

    /// The step-(m-2) extensor of the (m-3)-plane of the slice dual to `x`.
    pub fn parametrize(&self, x: &CVec) -> Result<MultiVector> {
        let m = self.h_basis[0].len();
        if x.len() != m - 1 {
            return Err(ProjvarError::DimensionMismatch(format!(
                "slice coordinate of length {}, expected {}",
                x.len(),
                m - 1
            )));
        }
        MultiVector::new(
            crate::exterior::GradeBasis::new(m, m - 2)?,
            &self.param_matrix * x,
        )
    }

    /// Covector of the slice hyperplane.
    pub fn covector(&self) -> Result<CVec> {
        let m = self.h_basis[0].len();
        let mut rows = CMat::zeros(m - 1, m);
        for (i, h) in self.h_basis.iter().enumerate() {
            rows.row_mut(i).copy_from(&h.transpose());
        }
        crate::numeric::kernel_vector(&rows, RANK_RTOL)
    }
}

/// A scene's Kruppa data: dual-polynomial pairs, the slice, and the
/// interpolation lattice with per-class design matrices.
#[derive(Debug, Clone)]
pub struct KruppaSystem {
    pub m: usize,
    pub pairs: Vec<(DualPolynomial, DualPolynomial)>,
    pub slice: KruppaSlice,
    pub lattice: Vec<CVec>,
    hodge_out: CMat,
    designs: BTreeMap<usize, (MonomialBasis, CMat)>,
}

impl KruppaSystem {
    /// Build from a scene with exact dual models; the slice is re-drawn when
    /// the first epipole comes within 1e-6 of it, the lattice when the
    /// interpolation design is ill conditioned.
    pub fn build(scene: &Scene, seed: u64) -> Result<Self> {
        let pairs: Vec<(DualPolynomial, DualPolynomial)> = scene
            .dual_pairs()
            .iter()
            .map(|(d1, d2)| {
                Ok((
                    DualPolynomial::from_dual_quadric(d1)?,
                    DualPolynomial::from_dual_quadric(d2)?,
                ))
            })
            .collect::<Result<_>>()?;
        if pairs.is_empty() {
            return Err(ProjvarError::SceneUnsupported(
                "no components with exact dual polynomials".into(),
            ));
        }
        Self::from_parts(scene.m, pairs, &scene.epipoles.e1, seed)
    }

    pub fn from_parts(
        m: usize,
        pairs: Vec<(DualPolynomial, DualPolynomial)>,
        e1: &CVec,
        seed: u64,
    ) -> Result<Self> {
        for (p1, p2) in &pairs {
            if p1.degree != p2.degree {
                return Err(ProjvarError::DimensionMismatch(
                    "dual polynomials of one pair must share their class".into(),
                ));
            }
            if p1.dim + 1 != m || p2.dim + 1 != m {
                return Err(ProjvarError::DimensionMismatch(
                    "dual polynomials must live on the image spaces".into(),
                ));
            }
        }
        let mut rng = child_rng(seed, "kruppa_system");
        let slice = loop {
            let h_basis: Vec<CVec> = (0..m - 1).map(|_| random_cvec(&mut rng, m)).collect();
            let Ok(slice) = KruppaSlice::new(h_basis) else {
                continue;
            };
            let eta = slice.covector()?;
            let sep = (eta.transpose() * e1)[(0, 0)].norm() / (eta.norm() * e1.norm());
            if sep > 1e-6 {
                break slice;
            }
        };
        let max_count = pairs
            .iter()
            .map(|(p, _)| binomial(m - 2 + p.degree, p.degree) as usize)
            .max()
            .expect("nonempty pairs");
        let lattice_size = 2 * max_count + 2;
        let mut classes: Vec<usize> = pairs.iter().map(|(p, _)| p.degree).collect();
        classes.sort_unstable();
        classes.dedup();
        for attempt in 0..16 {
            let lattice: Vec<CVec> = (0..lattice_size)
                .map(|_| {
                    let x = random_cvec(&mut rng, m - 1);
                    let n = x.norm();
                    x / C::new(n, 0.0)
                })
                .collect();
            let mut designs = BTreeMap::new();
            let mut ok = true;
            for &c in &classes {
                let basis = MonomialBasis::new(m - 1, c)?;
                let mut design = CMat::zeros(lattice.len(), basis.len());
                for (row, x) in lattice.iter().enumerate() {
                    design.row_mut(row).copy_from(&basis.eval(x)?.transpose());
                }
                if cond(&design) > 1e10 {
                    ok = false;
                    break;
                }
                designs.insert(c, (basis, design));
            }
            if ok {
                return Ok(KruppaSystem {
                    m,
                    pairs,
                    slice,
                    lattice,
                    hodge_out: hodge_matrix(m, m - 1)?,
                    designs,
                });
            }
            let _ = attempt;
        }
        Err(ProjvarError::IllConditionedLattice(1e10))
    }

    /// Number of interpolated coefficients for a class-c pair.
    pub fn coefficient_count(&self, c: usize) -> u64 {
        binomial(self.m - 2 + c, c)
    }
}

/// `γ(w) = e1 ∧ w`: vanishes exactly when the subspace of `w` contains `e1`.
pub fn gamma_map(e1: &CVec, w: &MultiVector) -> Result<MultiVector> {
    join(&MultiVector::from_vector(e1)?, w)
}

/// `ξ(w) = F w`.
pub fn xi_map(f: &CMat, w: &MultiVector) -> Result<MultiVector> {
    let m = w.dim();
    if w.grade() != m - 2 {
        return Err(ProjvarError::DimensionMismatch(format!(
            "xi expects step-(m-2) extensors, got grade {}",
            w.grade()
        )));
    }
    MultiVector::new(
        crate::exterior::GradeBasis::new(m, m - 1)?,
        f * w.coeffs(),
    )
}

/// Coefficient vectors of the two sides of the generalized Kruppa equation
/// restricted to the slice: `a` interpolates `x ↦ φ2(ξ(w(x)))` and `b`
/// interpolates `x ↦ φ1(γ(w(x)))`, both homogeneous of degree c in the slice
/// coordinates. For a consistent scene `a ~ b`.
pub fn kruppa_coefficients(
    f: &CMat,
    e1: &CVec,
    phi1: &DualPolynomial,
    phi2: &DualPolynomial,
    system: &KruppaSystem,
) -> Result<(CVec, CVec)> {
    let m = system.m;
    let c = phi1.degree;
    if phi2.degree != c {
        return Err(ProjvarError::DimensionMismatch(
            "the two dual polynomials must share their class".into(),
        ));
    }
    let (_, design) = system
        .designs
        .get(&c)
        .ok_or_else(|| ProjvarError::IllConditionedLattice(0.0))?;
    let gamma_matrix = crate::epipolar::wedge_by_point_matrix(e1, m - 2)?;
    let mut xi_values = CVec::zeros(system.lattice.len());
    let mut gamma_values = CVec::zeros(system.lattice.len());
    for (row, x) in system.lattice.iter().enumerate() {
        let w = &system.slice.param_matrix * x;
        let xi_dual = &system.hodge_out * (f * &w);
        let gamma_dual = &system.hodge_out * (&gamma_matrix * &w);
        xi_values[row] = phi2.eval(&xi_dual)?;
        gamma_values[row] = phi1.eval(&gamma_dual)?;
    }
    let a = lstsq(design, &xi_values, RANK_RTOL);
    let b = lstsq(design, &gamma_values, RANK_RTOL);
    Ok((a, b))
}

/// Normalized cross-product magnitude `‖a ∧ b‖ / (‖a‖ ‖b‖)`.
pub fn cross_residual(a: &CVec, b: &CVec) -> Result<f64> {
    if a.norm() <= NORM_FLOOR || b.norm() <= NORM_FLOOR {
        return Err(ProjvarError::ZeroMultivector);
    }
    let mut acc = 0.0_f64;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            acc += (a[i] * b[j] - a[j] * b[i]).norm_sqr();
        }
    }
    Ok(acc.sqrt() / (a.norm() * b.norm()))
}

/// Sum over scene component pairs of the cross-product residuals: zero at a
/// consistent ground truth, invariant under independent rescaling of every
/// ingredient.
pub fn kruppa_residual(f: &CMat, e1: &CVec, system: &KruppaSystem) -> Result<f64> {
    let mut total = 0.0;
    for (phi1, phi2) in &system.pairs {
        let (a, b) = kruppa_coefficients(f, e1, phi1, phi2, system)?;
        total += cross_residual(&a, &b)?;
    }
    Ok(total)
}

/// Classical form at m = 3: `min_λ ‖[e2]_x C2* [e2]_x^T - λ F C1* F^T‖_F`
/// normalized by the first term.
pub fn classical_kruppa_residual(
    f: &CMat,
    e2: &CVec,
    c1_dual: &Quadric,
    c2_dual: &Quadric,
) -> Result<f64> {
    if f.shape() != (3, 3) || e2.len() != 3 {
        return Err(ProjvarError::DimensionMismatch(
            "classical Kruppa form needs a 3x3 matrix and a 3-vector".into(),
        ));
    }
    let ex = CMat::from_row_slice(
        3,
        3,
        &[
            C::new(0.0, 0.0),
            -e2[2],
            e2[1],
            e2[2],
            C::new(0.0, 0.0),
            -e2[0],
            -e2[1],
            e2[0],
            C::new(0.0, 0.0),
        ],
    );
    let lhs = &ex * c2_dual.gram() * ex.transpose();
    let rhs = f * c1_dual.gram() * f.transpose();
    if lhs.norm() <= NORM_FLOOR || rhs.norm() <= NORM_FLOOR {
        return Err(ProjvarError::ZeroMultivector);
    }
    let num: C = rhs
        .iter()
        .zip(lhs.iter())
        .map(|(r, l)| r.conj() * l)
        .sum();
    let den: f64 = rhs.iter().map(|r| r.norm_sqr()).sum();
    let lambda = num / C::new(den, 0.0);
    Ok((&lhs - &rhs * lambda).norm() / lhs.norm())
}

/// Dimension bookkeeping of the constraint variety.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionReport {
    pub m: usize,
    pub c_total: usize,
    /// Dimension N of the projective space of order-2 fundamental matrices.
    pub n2: i64,
    pub coefficient_count: u64,
    /// `N - C(m-2+c, c) + 1`: the variety has at least this dimension when
    /// non-empty.
    pub lower_bound: i64,
    /// `(m+2)(m+1)/2`: total class at or above which the constraints isolate
    /// the solution up to finitely many points.
    pub class_threshold: u64,
    pub threshold_met: bool,
}

pub fn dimension_report(m: usize, c_total: usize) -> Result<DimensionReport> {
    if m < 3 || c_total < 1 {
        return Err(ProjvarError::InvalidConfig(
            "dimension report needs m >= 3 and c >= 1".into(),
        ));
    }
    let n2 = crate::epipolar::space_dimension(m, 2)?;
    let coefficient_count = binomial(m - 2 + c_total, c_total);
    let lower_bound = n2 - coefficient_count as i64 + 1;
    let class_threshold = ((m + 2) * (m + 1) / 2) as u64;
    Ok(DimensionReport {
        m,
        c_total,
        n2,
        coefficient_count,
        lower_bound,
        class_threshold,
        threshold_met: c_total as u64 >= class_threshold,
    })
}

// ---------------------------------------------------------------------------
// Stacked residual system over (e1, F, e2) and its real parametrization.
// ---------------------------------------------------------------------------

fn pack(e1: &CVec, f: &CMat, e2: &CVec) -> RVec {
    let mut out = Vec::with_capacity(2 * (e1.len() + f.len() + e2.len()));
    for v in e1.iter().chain(f.iter()).chain(e2.iter()) {
        out.push(v.re);
        out.push(v.im);
    }
    RVec::from_vec(out)
}

fn unpack(theta: &RVec, m: usize, f_shape: (usize, usize)) -> (CVec, CMat, CVec) {
    let mut idx = 0usize;
    let mut next = |count: usize| -> Vec<C> {
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(C::new(theta[idx], theta[idx + 1]));
            idx += 2;
        }
        out
    };
    let e1 = CVec::from_vec(next(m));
    let f = CMat::from_vec(f_shape.0, f_shape.1, next(f_shape.0 * f_shape.1));
    let e2 = CVec::from_vec(next(m));
    (e1, f, e2)
}

fn push_complex(out: &mut Vec<f64>, value: C) {
    out.push(value.re);
    out.push(value.im);
}

/// Stacked residual blocks. The Kruppa cross products come first, then the
/// `F [e1] = 0` entries, then the `e2`-annihilation entries; all blocks are
/// normalized to be scale invariant.
fn stacked_residual(
    e1: &CVec,
    f: &CMat,
    e2: &CVec,
    system: &KruppaSystem,
) -> Result<(RVec, usize)> {
    let m = system.m;
    let mut out = Vec::new();
    for (phi1, phi2) in &system.pairs {
        let (a, b) = kruppa_coefficients(f, e1, phi1, phi2, system)?;
        let scale = a.norm() * b.norm();
        if scale <= NORM_FLOOR {
            return Err(ProjvarError::ZeroMultivector);
        }
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                push_complex(&mut out, (a[i] * b[j] - a[j] * b[i]) / C::new(scale, 0.0));
            }
        }
    }
    let kruppa_rows = out.len();
    let e1_map = crate::epipolar::e1_wedge_matrix(e1, m)?;
    let fe1 = f * &e1_map.entries;
    let scale = f.norm() * e1.norm();
    for v in fe1.iter() {
        push_complex(&mut out, v / C::new(scale.max(NORM_FLOOR), 0.0));
    }
    let row = crate::epipolar::epipole_contraction_row(e2)?;
    let annihilation = &row * f;
    let scale = f.norm() * e2.norm();
    for v in annihilation.iter() {
        push_complex(&mut out, v / C::new(scale.max(NORM_FLOOR), 0.0));
    }
    Ok((RVec::from_vec(out), kruppa_rows))
}

fn residual_of_theta(theta: &RVec, system: &KruppaSystem, f_shape: (usize, usize)) -> Result<RVec> {
    let (e1, f, e2) = unpack(theta, system.m, f_shape);
    stacked_residual(&e1, &f, &e2, system).map(|(r, _)| r)
}

fn numeric_jacobian(
    theta: &RVec,
    system: &KruppaSystem,
    f_shape: (usize, usize),
    fd_step: f64,
) -> Result<RMat> {
    let base = residual_of_theta(theta, system, f_shape)?;
    let n = theta.len();
    let mut jac = RMat::zeros(base.len(), n);
    for i in 0..n {
        let h = fd_step * (1.0 + theta[i].abs());
        let mut plus = theta.clone();
        plus[i] += h;
        let mut minus = theta.clone();
        minus[i] -= h;
        let rp = residual_of_theta(&plus, system, f_shape)?;
        let rm = residual_of_theta(&minus, system, f_shape)?;
        for r in 0..base.len() {
            jac[(r, i)] = (rp[r] - rm[r]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Options of the damped Gauss-Newton descent.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub damping: f64,
    pub residual_tol: f64,
    pub patience: usize,
    pub fd_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 60,
            damping: 1e-3,
            residual_tol: 1e-12,
            patience: 6,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverStatus {
    Converged,
    MaxIterations,
    Diverged,
}

/// Per-run convergence record.
#[derive(Debug, Clone)]
pub struct ConvergenceRecord {
    pub status: SolverStatus,
    pub residuals: Vec<f64>,
    pub final_residual: f64,
}

/// Solver output with validity post-filters.
#[derive(Debug, Clone)]
pub struct KruppaSolution {
    pub e1: CVec,
    pub f: CMat,
    pub e2: CVec,
    pub record: ConvergenceRecord,
    /// rank(F) = m-1 and ker(F) = im([e1]) within 1e-6.
    pub valid: bool,
    /// Restricted-Jacobian diagnostics at the final iterate.
    pub isolated: bool,
    pub restricted_smallest: f64,
    pub restricted_largest: f64,
}

/// Damped Gauss-Newton descent on the stacked residuals with per-block
/// renormalization of the iterate; deterministic given the system.
pub fn kruppa_solve(
    init: (&CVec, &CMat, &CVec),
    system: &KruppaSystem,
    options: &SolverOptions,
) -> Result<KruppaSolution> {
    let m = system.m;
    let f_shape = init.1.shape();
    let normalize = |theta: &RVec| -> RVec {
        let (e1, f, e2) = unpack(theta, m, f_shape);
        let e1 = &e1 / C::new(e1.norm().max(NORM_FLOOR), 0.0);
        let f = &f / C::new(f.norm().max(NORM_FLOOR), 0.0);
        let e2 = &e2 / C::new(e2.norm().max(NORM_FLOOR), 0.0);
        pack(&e1, &f, &e2)
    };
    let mut theta = normalize(&pack(init.0, init.1, init.2));
    let mut residuals = Vec::with_capacity(options.max_iterations + 1);
    let mut best = f64::INFINITY;
    let mut stall = 0usize;
    let mut mu = options.damping;
    let mut status = SolverStatus::MaxIterations;

    let mut current = residual_of_theta(&theta, system, f_shape)?;
    residuals.push(current.norm());
    for _ in 0..options.max_iterations {
        let rnorm = current.norm();
        if rnorm < options.residual_tol {
            status = SolverStatus::Converged;
            break;
        }
        if rnorm < best - 1e-16 {
            best = rnorm;
            stall = 0;
        } else {
            stall += 1;
            if stall > options.patience {
                status = SolverStatus::Diverged;
                break;
            }
        }
        let jac = numeric_jacobian(&theta, system, f_shape, options.fd_step)?;
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let jtr = &jt * &current;
        let n = theta.len();
        let mut accepted = false;
        for _ in 0..12 {
            let mut lhs = jtj.clone();
            for i in 0..n {
                lhs[(i, i)] += mu * (1.0 + jtj[(i, i)]);
            }
            let Some(delta) = lhs.lu().solve(&jtr) else {
                mu *= 4.0;
                continue;
            };
            let candidate = normalize(&(&theta - &delta));
            let Ok(next) = residual_of_theta(&candidate, system, f_shape) else {
                mu *= 4.0;
                continue;
            };
            if next.norm() < rnorm {
                theta = candidate;
                current = next;
                mu = (mu / 3.0).max(1e-14);
                accepted = true;
                break;
            }
            mu *= 4.0;
        }
        residuals.push(current.norm());
        if !accepted {
            status = if current.norm() < options.residual_tol {
                SolverStatus::Converged
            } else {
                SolverStatus::Diverged
            };
            break;
        }
    }
    if *residuals.last().expect("at least one residual") < options.residual_tol {
        status = SolverStatus::Converged;
    }

    let (e1, f, e2) = unpack(&theta, m, f_shape);
    let valid = solution_is_valid(&e1, &f);
    let spectrum = restricted_spectrum(&e1, &f, &e2, system)?;
    Ok(KruppaSolution {
        e1,
        f,
        e2,
        record: ConvergenceRecord {
            status,
            final_residual: *residuals.last().expect("nonempty"),
            residuals,
        },
        valid,
        isolated: spectrum.isolated,
        restricted_smallest: spectrum.smallest,
        restricted_largest: spectrum.largest,
    })
}

/// Post-filter of accepted solutions: rank(F) = m-1 and ker(F) = im([e1]).
pub fn solution_is_valid(e1: &CVec, f: &CMat) -> bool {
    let m = e1.len();
    let Ok(map) = crate::epipolar::e1_wedge_matrix(e1, m) else {
        return false;
    };
    let rank = crate::numeric::rank_with_tol(f, 1e-6);
    if rank != m - 1 {
        return false;
    }
    let kernel = crate::numeric::right_nullspace(f, 1e-6);
    let image: Vec<CVec> = (0..map.entries.ncols())
        .map(|j| map.entries.column(j).into_owned())
        .collect();
    if kernel.len() != image.len() {
        return false;
    }
    crate::numeric::subspace_distance(&kernel, &image) < 1e-6
}

/// Restricted singular spectrum of the Kruppa block on the tangent space of
/// the constraint set (the linear-in-F equations plus unit-norm and phase
/// gauges).
#[derive(Debug, Clone)]
pub struct IsolationReport {
    pub smallest: f64,
    pub largest: f64,
    pub isolated: bool,
    pub tangent_dimension: usize,
}

fn restricted_spectrum(
    e1: &CVec,
    f: &CMat,
    e2: &CVec,
    system: &KruppaSystem,
) -> Result<IsolationReport> {
    let m = system.m;
    let f_shape = f.shape();
    let theta = pack(e1, f, e2);
    let (_, kruppa_rows) = stacked_residual(e1, f, e2, system)?;
    let jac = numeric_jacobian(&theta, system, f_shape, 1e-6)?;
    let total_rows = jac.nrows();
    let jac_kruppa = jac.rows(0, kruppa_rows).into_owned();
    let jac_constraints = jac.rows(kruppa_rows, total_rows - kruppa_rows).into_owned();

    // Gauge rows: radial (norm) and phase directions of each block.
    let n = theta.len();
    let blocks = [(0usize, m), (m, f_shape.0 * f_shape.1), (m + f_shape.0 * f_shape.1, m)];
    let mut gauge = RMat::zeros(6, n);
    for (g, (offset, len)) in blocks.iter().enumerate() {
        for i in 0..*len {
            let re = theta[2 * (offset + i)];
            let im = theta[2 * (offset + i) + 1];
            // radial: the block itself.
            gauge[(2 * g, 2 * (offset + i))] = re;
            gauge[(2 * g, 2 * (offset + i) + 1)] = im;
            // phase: multiplication by i.
            gauge[(2 * g + 1, 2 * (offset + i))] = -im;
            gauge[(2 * g + 1, 2 * (offset + i) + 1)] = re;
        }
    }
    let mut stacked = RMat::zeros(jac_constraints.nrows() + 6, n);
    stacked
        .view_mut((0, 0), (jac_constraints.nrows(), n))
        .copy_from(&jac_constraints);
    stacked
        .view_mut((jac_constraints.nrows(), 0), (6, n))
        .copy_from(&gauge);
    let tangent = real_right_nullspace(&stacked, 1e-8);
    if tangent.is_empty() {
        return Ok(IsolationReport {
            smallest: f64::INFINITY,
            largest: f64::INFINITY,
            isolated: true,
            tangent_dimension: 0,
        });
    }
    let t = RMat::from_fn(n, tangent.len(), |i, j| tangent[j][i]);
    let restricted = &jac_kruppa * &t;
    let svals = real_singular_values(&restricted);
    let largest = svals.first().copied().unwrap_or(0.0);
    let smallest = if restricted.nrows() < restricted.ncols() {
        0.0
    } else {
        svals.last().copied().unwrap_or(0.0)
    };
    Ok(IsolationReport {
        smallest,
        largest,
        isolated: largest > 0.0 && smallest > 1e-6 * largest,
        tangent_dimension: tangent.len(),
    })
}

/// Isolation diagnostics at a consistent ground truth: the restricted
/// smallest singular value of the residual Jacobian on the constraint tangent
/// space decides whether the solution is locally rigid.
pub fn isolation_test(
    e1: &CVec,
    f: &CMat,
    e2: &CVec,
    system: &KruppaSystem,
) -> Result<IsolationReport> {
    let (residual, _) = stacked_residual(e1, f, e2, system)?;
    if residual.norm() > 1e-8 {
        return Err(ProjvarError::InconsistentGroundTruth(residual.norm()));
    }
    restricted_spectrum(e1, f, e2, system)
}
