//! Epipoles, the family of fundamental matrices `F_k`, rank and kernel
//! diagnostics, correspondence residuals, and the order conversions `phi_kl`.
//!
//! `F_k` maps step-(m-k) extensors over the first image space to the
//! step-(m-k+1) extensors of the (m-k)-planes they induce through the second
//! epipole. Step-(m-1) extensors are identified with dual points (hyperplanes)
//! through the Hodge convention of the exterior module, which fixes all signs.

use rand_chacha::ChaCha12Rng;

use crate::error::{ProjvarError, Result};
use crate::exterior::{
    gen_join, gen_meet, join, span_to_extensor, GradeBasis, MultiVector,
};
use crate::numeric::{
    binomial, child_rng, proj_distance_vec, random_cvec, right_nullspace, singular_values, CMat,
    CVec, DEFAULT_TOL, NORM_FLOOR,
};
use crate::projection::{GradedLinearMap, ProjectionOperator};

/// Fundamental matrix of order `k` for a pair of projections in ambient
/// dimension `m`: shape `C(m, m-k+1) x C(m, m-k)`, rank `C(m-1, m-k)`.
#[derive(Debug, Clone)]
pub struct FundamentalMatrix {
    pub m: usize,
    pub k: usize,
    pub entries: CMat,
}

/// The two epipoles: images of each center under the other projection.
#[derive(Debug, Clone)]
pub struct EpipolePair {
    pub e1: CVec,
    pub e2: CVec,
}

impl FundamentalMatrix {
    pub fn new(m: usize, k: usize, entries: CMat) -> Result<Self> {
        if k < 2 || k > m - 1 {
            return Err(ProjvarError::OrderOutOfRange(k, m));
        }
        let expected = (binomial(m, m - k + 1) as usize, binomial(m, m - k) as usize);
        if entries.shape() != expected {
            return Err(ProjvarError::DimensionMismatch(format!(
                "fundamental matrix of order {k} in dimension {m} must be {expected:?}, got {:?}",
                entries.shape()
            )));
        }
        Ok(FundamentalMatrix { m, k, entries })
    }

    pub fn src_basis(&self) -> GradeBasis {
        GradeBasis::new(self.m, self.m - self.k).expect("valid source grade")
    }

    pub fn dst_basis(&self) -> GradeBasis {
        GradeBasis::new(self.m, self.m - self.k + 1).expect("valid target grade")
    }

    pub fn apply(&self, w: &MultiVector) -> Result<MultiVector> {
        if w.dim() != self.m || w.grade() != self.m - self.k {
            return Err(ProjvarError::DimensionMismatch(format!(
                "fundamental matrix of order {} expects grade {} over C^{}",
                self.k,
                self.m - self.k,
                self.m
            )));
        }
        MultiVector::new(self.dst_basis(), &self.entries * w.coeffs())
    }

    pub fn expected_rank(&self) -> u64 {
        binomial(self.m - 1, self.m - self.k)
    }
}

/// Rank diagnostics of a fundamental matrix.
#[derive(Debug, Clone)]
pub struct RankProfile {
    pub observed: usize,
    pub expected: u64,
    pub singular_values: Vec<f64>,
}

pub fn rank_profile(f: &FundamentalMatrix) -> RankProfile {
    RankProfile {
        observed: crate::numeric::rank(&f.entries),
        expected: f.expected_rank(),
        singular_values: singular_values(&f.entries),
    }
}

/// Epipoles of an ordered pair of projections with distinct centers.
pub fn epipoles(p1: &ProjectionOperator, p2: &ProjectionOperator) -> Result<EpipolePair> {
    let o1 = p1.center()?;
    let o2 = p2.center()?;
    if proj_distance_vec(&o1, &o2) < 1e-10 {
        return Err(ProjvarError::CoincidentCenters);
    }
    Ok(EpipolePair {
        e1: p1.apply(&o2)?,
        e2: p2.apply(&o1)?,
    })
}

/// `F_k = tilde_k(P2) . hat_k(P1)`.
pub fn fundamental(
    p1: &ProjectionOperator,
    p2: &ProjectionOperator,
    k: usize,
) -> Result<FundamentalMatrix> {
    let m = p1.m();
    if p2.m() != m {
        return Err(ProjvarError::DimensionMismatch(
            "projection operators of different ambient dimension".into(),
        ));
    }
    if k < 2 || k > m - 1 {
        return Err(ProjvarError::OrderOutOfRange(k, m));
    }
    // Reject coincident centers up front.
    let _ = epipoles(p1, p2)?;
    let hat = p1.hat_k(k)?;
    let tilde = p2.tilde_k(k)?;
    FundamentalMatrix::new(m, k, &tilde.entries * &hat.entries)
}

/// Matrix of the join map `w ↦ e ∧ w` from grade `g` to grade `g+1` over C^m.
pub fn wedge_by_point_matrix(e: &CVec, grade: usize) -> Result<CMat> {
    let m = e.len();
    let src = GradeBasis::new(m, grade)?;
    let dst = GradeBasis::new(m, grade + 1)?;
    let e_mv = MultiVector::from_vector(e)?;
    let mut out = CMat::zeros(dst.len(), src.len());
    for (col, subset) in src.subsets() {
        let basis_mv = MultiVector::basis_extensor(m, subset)?;
        let wedged = join(&e_mv, &basis_mv)?;
        out.set_column(col, wedged.coeffs());
    }
    Ok(out)
}

/// `[e1]`: the map `w ↦ e1 ∧ w` from step m-3 to step m-2 over C^m.
/// For m = 3 this is the single column `e1` itself.
pub fn e1_wedge_matrix(e1: &CVec, m: usize) -> Result<GradedLinearMap> {
    if e1.len() != m {
        return Err(ProjvarError::DimensionMismatch(format!(
            "epipole of length {} for image dimension {}",
            e1.len(),
            m
        )));
    }
    if e1.norm() <= NORM_FLOOR {
        return Err(ProjvarError::ZeroMultivector);
    }
    let entries = wedge_by_point_matrix(e1, m - 3)?;
    GradedLinearMap::new(
        GradeBasis::new(m, m - 3)?,
        GradeBasis::new(m, m - 2)?,
        entries,
    )
}

/// Row covector of the contraction `u ↦ coefficient of e ∧ u` on step-(m-1)
/// extensors; `r(e2) F_2 = 0` expresses that every image hyperplane of `F_2`
/// contains the second epipole.
pub fn epipole_contraction_row(e: &CVec) -> Result<CMat> {
    let m = e.len();
    Ok(wedge_by_point_matrix(e, m - 1)?)
}

/// Reduced fundamental matrix (order m-1) in closed form:
/// `F ~ [e2]_∧ M2bar M1bar^{-1}` with `e2 = m2 - M2bar M1bar^{-1} m1`.
/// Falls back to the composed construction when the leading block is singular.
pub fn reduced_fundamental(
    p1: &ProjectionOperator,
    p2: &ProjectionOperator,
) -> Result<FundamentalMatrix> {
    let m = p1.m();
    let (m1bar, m1last) = p1.split();
    let (m2bar, m2last) = p2.split();
    let inv = match m1bar.clone().try_inverse() {
        Some(inv) => inv,
        None => return fundamental(p1, p2, m - 1),
    };
    let transfer = &m2bar * &inv;
    let e2 = &m2last - &transfer * &m1last;
    if e2.norm() <= 1e-12 * (m2last.norm() + transfer.norm() * m1last.norm()) {
        return Err(ProjvarError::CoincidentCenters);
    }
    let wedge = wedge_by_point_matrix(&e2, 1)?;
    FundamentalMatrix::new(m, m - 1, wedge * transfer)
}

/// Outcome of a correspondence check.
#[derive(Debug, Clone)]
pub struct CorrespondenceCheck {
    /// Projective distance between `F w1` and `e2 ∧ w2`.
    pub residual: f64,
    /// `‖w2 ∧ F_{m-1} w1‖` (normalized), reported for the reduced order only.
    pub wedge_residual: Option<f64>,
    /// Set when `F w1 ≈ 0`, i.e. `w1` is an epipolar extensor of the pencil.
    pub epipolar_pencil: bool,
}

/// Residual of the relation `F_k w1 ~ e2 ∧ w2` for projected subspace pairs.
pub fn correspondence_residual(
    f: &FundamentalMatrix,
    w1: &MultiVector,
    w2: &MultiVector,
    e2: &CVec,
) -> Result<CorrespondenceCheck> {
    if w1.norm() <= NORM_FLOOR || w2.norm() <= NORM_FLOOR {
        return Err(ProjvarError::ZeroMultivector);
    }
    let image = f.apply(w1)?;
    let pencil = image.norm() <= 1e-8 * f.entries.norm() * w1.norm();
    let e2_mv = MultiVector::from_vector(e2)?;
    let target = join(&e2_mv, w2)?;
    if target.norm() <= NORM_FLOOR {
        return Err(ProjvarError::ZeroMultivector);
    }
    let residual = if pencil {
        f64::INFINITY
    } else {
        proj_distance_vec(image.coeffs(), target.coeffs())
    };
    let wedge_residual = if f.k == f.m - 1 {
        let w = join(w2, &image)?;
        Some(w.norm() / (w2.norm() * image.norm()).max(NORM_FLOOR))
    } else {
        None
    };
    Ok(CorrespondenceCheck {
        residual,
        wedge_residual,
        epipolar_pencil: pencil,
    })
}

/// Dimension `N_k` of the projective space of order-k fundamental matrices.
pub fn space_dimension(m: usize, k: usize) -> Result<i64> {
    if k < 2 || k > m - 1 {
        return Err(ProjvarError::OrderOutOfRange(k, m));
    }
    let rows = binomial(m, m - k + 1) as i64;
    let cols = binomial(m, m - k) as i64;
    let r = binomial(m - 1, m - k) as i64;
    Ok(rows * cols - (rows - r) * (cols - r) - 1)
}

const CONVERT_RETRIES: usize = 8;

/// Order conversion `phi_{kl}`: computes `F_l` from `F_k` for the same pair.
///
/// Basis extensors of the target order are carried through generic
/// decompositions (intersections for `l > k`, sums for `l < k`) of randomly
/// sampled subspaces, and the matrix is recovered from the correspondences by
/// one joint linear solve that also eliminates the per-sample scales.
pub fn convert(f: &FundamentalMatrix, l: usize, seed: u64) -> Result<FundamentalMatrix> {
    let m = f.m;
    if l < 2 || l > m - 1 {
        return Err(ProjvarError::OrderOutOfRange(l, m));
    }
    if l == f.k {
        return Ok(f.clone());
    }
    let mut rng = child_rng(seed, "phi_kl");
    let mut last_err = ProjvarError::DegenerateDecomposition(CONVERT_RETRIES);
    for _ in 0..CONVERT_RETRIES {
        match convert_attempt(f, l, &mut rng) {
            Ok(out) => return Ok(out),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

fn convert_attempt(
    f: &FundamentalMatrix,
    l: usize,
    rng: &mut ChaCha12Rng,
) -> Result<FundamentalMatrix> {
    let m = f.m;

    let src_len = binomial(m, m - l) as usize;
    let dst_len = binomial(m, m - l + 1) as usize;
    let unknowns = src_len * dst_len;
    // Enough correspondences for the joint solve of entries and scales.
    let samples = (unknowns + 8) / (dst_len.max(2) - 1) + src_len + 4;

    let mut ws: Vec<MultiVector> = Vec::with_capacity(samples);
    let mut images: Vec<MultiVector> = Vec::with_capacity(samples);
    for _ in 0..samples {
        let (w, image) = converted_correspondence(f, l, rng)?;
        ws.push(w);
        images.push(image);
    }

    // Stack F_l w_i - mu_i r_i = 0 over vec(F_l) and the scales mu_i.
    let rows = samples * dst_len;
    let cols = unknowns + samples;
    let mut system = CMat::zeros(rows, cols);
    for (i, (w, r)) in ws.iter().zip(images.iter()).enumerate() {
        for out_row in 0..dst_len {
            let global_row = i * dst_len + out_row;
            for in_col in 0..src_len {
                // vec(F_l) is column-major: entry (out_row, in_col) sits at
                // in_col * dst_len + out_row.
                system[(global_row, in_col * dst_len + out_row)] = w.coeffs()[in_col];
            }
            system[(global_row, unknowns + i)] = -r.coeffs()[out_row];
        }
    }
    let ns = right_nullspace(&system, 1e-10);
    if ns.len() != 1 {
        return Err(ProjvarError::DegenerateDecomposition(ns.len()));
    }
    let solution = &ns[0];
    let mut entries = CMat::zeros(dst_len, src_len);
    for in_col in 0..src_len {
        for out_row in 0..dst_len {
            entries[(out_row, in_col)] = solution[in_col * dst_len + out_row];
        }
    }
    if entries.norm() <= 1e-8 {
        return Err(ProjvarError::DegenerateDecomposition(0));
    }
    FundamentalMatrix::new(m, l, entries)
}

/// One random correspondence `(w, F_l w up to scale)` computed through `F_k`.
fn converted_correspondence(
    f: &FundamentalMatrix,
    l: usize,
    rng: &mut ChaCha12Rng,
) -> Result<(MultiVector, MultiVector)> {
    let m = f.m;
    let k = f.k;
    let target_step = m - l;
    let source_step = m - k;
    let w_points: Vec<CVec> = (0..target_step).map(|_| random_cvec(rng, m)).collect();
    let w = span_to_extensor(&w_points)?;
    let image = if l > k {
        // W is the intersection of p = l - k + 1 ... of spaces of step m-k
        // obtained by extending W with independent random directions; the
        // image of W is the intersection of their images.
        let p = l - k + 1;
        let mut factors = Vec::with_capacity(p);
        for _ in 0..p {
            let mut pts = w_points.clone();
            for _ in 0..(source_step - target_step) {
                pts.push(random_cvec(rng, m));
            }
            factors.push(span_to_extensor(&pts)?);
        }
        let mut acc: Option<MultiVector> = None;
        for factor in &factors {
            let img = f.apply(factor)?;
            if img.norm() <= 1e-10 * f.entries.norm() * factor.norm() {
                return Err(ProjvarError::DegenerateDecomposition(0));
            }
            acc = Some(match acc {
                None => img,
                Some(prev) => gen_meet(&prev, &img, DEFAULT_TOL)?,
            });
        }
        acc.expect("at least one factor")
    } else {
        // W is the sum of subspaces of step m-k sampled inside it; the image
        // of W is the sum of their images.
        let mut acc: Option<MultiVector> = None;
        let mut covered = 0usize;
        while covered < target_step {
            let take = source_step.min(target_step - covered).max(1);
            let mut pts: Vec<CVec> = Vec::with_capacity(source_step);
            for j in 0..take {
                pts.push(w_points[covered + j].clone());
            }
            // Pad with generic combinations of the remaining W directions so
            // every factor has the full source step and stays inside W.
            while pts.len() < source_step {
                let mut combo = CVec::zeros(m);
                for wp in &w_points {
                    combo += wp * crate::numeric::random_complex(rng);
                }
                pts.push(combo);
            }
            let factor = span_to_extensor(&pts)?;
            let img = f.apply(&factor)?;
            if img.norm() <= 1e-10 * f.entries.norm() * factor.norm() {
                return Err(ProjvarError::DegenerateDecomposition(0));
            }
            acc = Some(match acc {
                None => img,
                Some(prev) => gen_join(&prev, &img, DEFAULT_TOL)?,
            });
            covered += take;
        }
        acc.expect("at least one factor")
    };
    if image.grade() != m - l + 1 {
        return Err(ProjvarError::DegenerateDecomposition(image.grade()));
    }
    Ok((w, image))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{extensor_to_span, hodge_matrix, proj_equal};
    use crate::numeric::C;
    use crate::numeric::{proj_equal_mat, proj_equal_vec, random_cmat, subspace_distance};
    use crate::projection::random_operator;

    fn random_pair(rng: &mut ChaCha12Rng, m: usize) -> (ProjectionOperator, ProjectionOperator) {
        (random_operator(rng, m), random_operator(rng, m))
    }

    #[test]
    fn epipole_examples() {
        // P1 = [I|0], P2 = [A|t]: e2 ~ t.
        let mut rng = child_rng(31, "epipoles");
        let p1 = ProjectionOperator::standard(3);
        let a = random_cmat(&mut rng, 3, 3);
        let t = random_cvec(&mut rng, 3);
        let mut entries = CMat::zeros(3, 4);
        entries.view_mut((0, 0), (3, 3)).copy_from(&a);
        entries.set_column(3, &t);
        let p2 = ProjectionOperator::new(entries).unwrap();
        let pair = epipoles(&p1, &p2).unwrap();
        assert!(proj_equal_vec(&pair.e2, &t, 1e-10).unwrap());

        // Swapping the arguments swaps the pair.
        let swapped = epipoles(&p2, &p1).unwrap();
        assert!(proj_equal_vec(&swapped.e1, &pair.e2, 1e-10).unwrap());
        assert!(proj_equal_vec(&swapped.e2, &pair.e1, 1e-10).unwrap());

        // e2 annihilates the image of F2 via the wedge contraction.
        let (q1, q2) = random_pair(&mut rng, 4);
        let f = fundamental(&q1, &q2, 2).unwrap();
        let eps = epipoles(&q1, &q2).unwrap();
        let row = epipole_contraction_row(&eps.e2).unwrap();
        let product = row * &f.entries;
        assert!(product.norm() < 1e-8 * f.entries.norm());

        // Coincident centers are rejected.
        assert!(matches!(
            epipoles(&p1, &p1),
            Err(ProjvarError::CoincidentCenters)
        ));
    }

    #[test]
    fn fundamental_reduces_to_classical_form_in_p3() {
        // m = 3: F ~ [t]_x A after the Hodge identification of step-2
        // extensors with dual line coordinates.
        let mut rng = child_rng(32, "classical");
        let p1 = ProjectionOperator::standard(3);
        let a = random_cmat(&mut rng, 3, 3);
        let t = random_cvec(&mut rng, 3);
        let mut entries = CMat::zeros(3, 4);
        entries.view_mut((0, 0), (3, 3)).copy_from(&a);
        entries.set_column(3, &t);
        let p2 = ProjectionOperator::new(entries).unwrap();

        let f = fundamental(&p1, &p2, 2).unwrap();
        let f_classical = hodge_matrix(3, 2).unwrap() * &f.entries;
        // [t]_x A oracle.
        let tx = CMat::from_row_slice(
            3,
            3,
            &[
                C::new(0.0, 0.0),
                -t[2],
                t[1],
                t[2],
                C::new(0.0, 0.0),
                -t[0],
                -t[1],
                t[0],
                C::new(0.0, 0.0),
            ],
        );
        let oracle = tx * &a;
        assert!(proj_equal_mat(&f_classical, &oracle, 1e-9).unwrap());
    }

    #[test]
    fn fundamental_shapes_and_ranks() {
        let mut rng = child_rng(33, "ranks");
        // m=4, k=2: shape 4x6, rank 3.
        let (p1, p2) = random_pair(&mut rng, 4);
        let f = fundamental(&p1, &p2, 2).unwrap();
        assert_eq!(f.entries.shape(), (4, 6));
        let profile = rank_profile(&f);
        assert_eq!(profile.observed, 3);
        assert_eq!(profile.expected, 3);

        // m=3, k=2: rank 2 of a 3x3 matrix.
        let (p1, p2) = random_pair(&mut rng, 3);
        let f = fundamental(&p1, &p2, 2).unwrap();
        assert_eq!(f.entries.shape(), (3, 3));
        assert_eq!(rank_profile(&f).observed, 2);

        // m=4, k=3: rank 3 of a 6x4 matrix.
        let (p1, p2) = random_pair(&mut rng, 4);
        let f = fundamental(&p1, &p2, 3).unwrap();
        assert_eq!(f.entries.shape(), (6, 4));
        assert_eq!(rank_profile(&f).observed, 3);

        // m=5, k=2: rank 4 of a 5x10 matrix.
        let (p1, p2) = random_pair(&mut rng, 5);
        let f = fundamental(&p1, &p2, 2).unwrap();
        assert_eq!(f.entries.shape(), (5, 10));
        assert_eq!(rank_profile(&f).observed, 4);

        assert!(fundamental(&p1, &p2, 1).is_err());
        assert!(fundamental(&p1, &p2, 5).is_err());
    }

    #[test]
    fn reduced_fundamental_matches_composition_and_closed_form() {
        let mut rng = child_rng(34, "reduced");
        for m in 3..=5usize {
            let (p1, p2) = random_pair(&mut rng, m);
            let closed = reduced_fundamental(&p1, &p2).unwrap();
            let composed = fundamental(&p1, &p2, m - 1).unwrap();
            assert!(proj_equal_mat(&closed.entries, &composed.entries, 1e-8).unwrap());
        }

        // P1 = [I|0], P2 = [A|t]: F ~ [t]_∧ A.
        let p1 = ProjectionOperator::standard(3);
        let a = random_cmat(&mut rng, 3, 3);
        let t = random_cvec(&mut rng, 3);
        let mut entries = CMat::zeros(3, 4);
        entries.view_mut((0, 0), (3, 3)).copy_from(&a);
        entries.set_column(3, &t);
        let p2 = ProjectionOperator::new(entries).unwrap();
        let f = reduced_fundamental(&p1, &p2).unwrap();
        let oracle = wedge_by_point_matrix(&t, 1).unwrap() * &a;
        assert!(proj_equal_mat(&f.entries, &oracle, 1e-10).unwrap());
    }

    #[test]
    fn correspondences_vanish_on_projected_pairs() {
        let mut rng = child_rng(35, "corr");
        for m in 3..=5usize {
            let (p1, p2) = random_pair(&mut rng, m);
            let eps = epipoles(&p1, &p2).unwrap();
            for k in 2..m {
                let f = fundamental(&p1, &p2, k).unwrap();
                // Random (m-1-k)-plane in P^m, projected into both images.
                let pts: Vec<CVec> = (0..m - k).map(|_| random_cvec(&mut rng, m + 1)).collect();
                let w1 = span_to_extensor(
                    &pts.iter().map(|q| p1.apply(q).unwrap()).collect::<Vec<_>>(),
                )
                .unwrap();
                let w2 = span_to_extensor(
                    &pts.iter().map(|q| p2.apply(q).unwrap()).collect::<Vec<_>>(),
                )
                .unwrap();
                let check = correspondence_residual(&f, &w1, &w2, &eps.e2).unwrap();
                assert!(
                    check.residual < 1e-9,
                    "m={m} k={k} residual {:.3e}",
                    check.residual
                );
                if k == m - 1 {
                    assert!(check.wedge_residual.unwrap() < 1e-9);
                }
                assert!(!check.epipolar_pencil);

                // Perturbation sensitivity.
                let mut w2_bad = w2.coeffs().clone();
                for x in w2_bad.iter_mut() {
                    *x *= C::new(1.0 + 1e-2, 0.0);
                }
                w2_bad[0] += C::new(1e-2 * w2.norm(), 0.0);
                let w2_bad = MultiVector::new(w2.basis().clone(), w2_bad).unwrap();
                let bad = correspondence_residual(&f, &w1, &w2_bad, &eps.e2).unwrap();
                assert!(bad.residual > 1e-4, "m={m} k={k} bad {:.3e}", bad.residual);
            }
        }
    }

    #[test]
    fn epipolar_pencil_inputs_are_flagged() {
        let mut rng = child_rng(36, "pencil");
        let (p1, p2) = random_pair(&mut rng, 4);
        let eps = epipoles(&p1, &p2).unwrap();
        let f = fundamental(&p1, &p2, 2).unwrap();
        // w1 through e1: a step-2 extensor containing the epipole.
        let w1 = span_to_extensor(&[eps.e1.clone(), random_cvec(&mut rng, 4)]).unwrap();
        let w2 = span_to_extensor(&[random_cvec(&mut rng, 4), random_cvec(&mut rng, 4)]).unwrap();
        let check = correspondence_residual(&f, &w1, &w2, &eps.e2).unwrap();
        assert!(check.epipolar_pencil);
    }

    #[test]
    fn e1_wedge_matrix_properties() {
        let mut rng = child_rng(37, "e1wedge");
        // m = 3: [e1] is the 3x1 column e1.
        let e1 = random_cvec(&mut rng, 3);
        let map = e1_wedge_matrix(&e1, 3).unwrap();
        assert_eq!(map.entries.shape(), (3, 1));
        assert!(proj_equal_vec(&map.entries.column(0).into_owned(), &e1, 1e-12).unwrap());

        // rank([e1]) = C(m-1, m-3).
        for m in 3..=5usize {
            let e1 = random_cvec(&mut rng, m);
            let map = e1_wedge_matrix(&e1, m).unwrap();
            assert_eq!(map.rank() as u64, binomial(m - 1, m - 3));
        }

        // F2 [e1] = 0 on random scenes.
        for m in 3..=5usize {
            let (p1, p2) = random_pair(&mut rng, m);
            let eps = epipoles(&p1, &p2).unwrap();
            let f = fundamental(&p1, &p2, 2).unwrap();
            let map = e1_wedge_matrix(&eps.e1, m).unwrap();
            let prod = &f.entries * &map.entries;
            assert!(prod.norm() < 1e-9 * f.entries.norm() * map.entries.norm());
        }
    }

    #[test]
    fn kernel_of_f2_is_image_of_e1_wedge() {
        let mut rng = child_rng(38, "kernel");
        for m in 3..=5usize {
            let (p1, p2) = random_pair(&mut rng, m);
            let eps = epipoles(&p1, &p2).unwrap();
            let f = fundamental(&p1, &p2, 2).unwrap();
            let kernel = right_nullspace(&f.entries, 1e-8);
            let map = e1_wedge_matrix(&eps.e1, m).unwrap();
            let image: Vec<CVec> = (0..map.entries.ncols())
                .map(|j| map.entries.column(j).into_owned())
                .collect();
            let expected_dim = binomial(m - 1, m - 3) as usize;
            assert_eq!(kernel.len(), expected_dim);
            assert!(subspace_distance(&kernel, &image) < 1e-8);
        }
    }

    #[test]
    fn space_dimension_values() {
        assert_eq!(space_dimension(3, 2).unwrap(), 7);
        assert_eq!(space_dimension(4, 2).unwrap(), 20);
        // m=4, k=3: 6*4 - (6-3)(4-3) - 1 = 20.
        assert_eq!(space_dimension(4, 3).unwrap(), 20);
        // Closed form (n-1)(n^2-n+2)/2 - 1 for k = 2.
        for m in 3..=6usize {
            let n = m as i64;
            assert_eq!(
                space_dimension(m, 2).unwrap(),
                (n - 1) * (n * n - n + 2) / 2 - 1
            );
        }
        assert!(space_dimension(4, 1).is_err());
    }

    #[test]
    fn conversion_identity_and_cross_paths() {
        let mut rng = child_rng(39, "convert");
        // l = k returns a projectively equal matrix.
        let (p1, p2) = random_pair(&mut rng, 4);
        let f2 = fundamental(&p1, &p2, 2).unwrap();
        let same = convert(&f2, 2, 1).unwrap();
        assert!(proj_equal_mat(&same.entries, &f2.entries, 1e-12).unwrap());

        // convert(F2, m-1) ~ reduced fundamental for m in {4, 5}.
        for m in [4usize, 5] {
            let (p1, p2) = random_pair(&mut rng, m);
            let f2 = fundamental(&p1, &p2, 2).unwrap();
            let lifted = convert(&f2, m - 1, 7).unwrap();
            let reduced = reduced_fundamental(&p1, &p2).unwrap();
            assert!(
                proj_equal_mat(&lifted.entries, &reduced.entries, 1e-7).unwrap(),
                "m={m} distance {:.3e}",
                crate::numeric::proj_distance_mat(&lifted.entries, &reduced.entries)
            );
        }

        // Involution: convert(convert(F2, m-1), 2) ~ F2 at m = 4.
        let (p1, p2) = random_pair(&mut rng, 4);
        let f2 = fundamental(&p1, &p2, 2).unwrap();
        let up = convert(&f2, 3, 11).unwrap();
        let down = convert(&up, 2, 13).unwrap();
        assert!(proj_equal_mat(&down.entries, &f2.entries, 1e-7).unwrap());
    }

    #[test]
    fn conversion_composition_law() {
        // phi_{3,4} ∘ phi_{2,3} ~ phi_{2,4} at m = 5.
        let mut rng = child_rng(40, "compose");
        let (p1, p2) = random_pair(&mut rng, 5);
        let f2 = fundamental(&p1, &p2, 2).unwrap();
        let via3 = convert(&convert(&f2, 3, 17).unwrap(), 4, 19).unwrap();
        let direct = convert(&f2, 4, 23).unwrap();
        assert!(proj_equal_mat(&via3.entries, &direct.entries, 1e-6).unwrap());
        // Both agree with the true order-4 matrix.
        let truth = fundamental(&p1, &p2, 4).unwrap();
        assert!(proj_equal_mat(&direct.entries, &truth.entries, 1e-6).unwrap());
    }

    #[test]
    fn fundamental_spans_preimage_of_correspondence() {
        // Direct projection oracle: proj_equal(F2 w1, e2 ∧ w2) for a random
        // (m-3)-plane off both epipolar pencils.
        let mut rng = child_rng(41, "oracle");
        let m = 5;
        let (p1, p2) = random_pair(&mut rng, m);
        let eps = epipoles(&p1, &p2).unwrap();
        let f = fundamental(&p1, &p2, 2).unwrap();
        let pts: Vec<CVec> = (0..m - 2).map(|_| random_cvec(&mut rng, m + 1)).collect();
        let w1 = span_to_extensor(&pts.iter().map(|q| p1.apply(q).unwrap()).collect::<Vec<_>>())
            .unwrap();
        let w2 = span_to_extensor(&pts.iter().map(|q| p2.apply(q).unwrap()).collect::<Vec<_>>())
            .unwrap();
        let image = f.apply(&w1).unwrap();
        let target = join(&MultiVector::from_vector(&eps.e2).unwrap(), &w2).unwrap();
        assert!(proj_equal(&image, &target, 1e-9).unwrap());

        // The image space of F_k consists of planes through e2: spans contain it.
        let span = extensor_to_span(&image, DEFAULT_TOL).unwrap();
        let mut with_e2 = span.clone();
        with_e2.push(eps.e2.clone());
        assert!(subspace_distance(&span, &with_e2) < 1e-8);
    }
}
