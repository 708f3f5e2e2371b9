//! Cone membership, triangulation, epipolar-fiber sampling of the
//! intersection of the two cones, and true/ghost component counting.
//!
//! Over a pencil of epipolar planes through the baseline, each clean fiber of
//! a degree-d curve scene carries d^2 candidate points: the d diagonal ones
//! lie on the original variety, the remaining d(d-1) populate the ghost
//! component.

use rand_chacha::ChaCha12Rng;

use crate::error::{ProjvarError, Result};
use crate::exterior::{join, MultiVector};
use crate::numeric::{
    child_rng, kernel_vector, lstsq, random_cvec, right_nullspace, CMat, CVec, C, NORM_FLOOR,
    RANK_RTOL,
};
use crate::poly::{binary_form_roots, p1_distance};
use crate::projection::{baseline, ProjectionOperator};
use crate::recovery::ProjectionPair;
use crate::scene::{Scene, SceneComponent};

/// Membership of a point in the cone over a projected model: every implicit
/// form of the view vanishes at the image of the point.
pub fn cone_membership(
    p: &ProjectionOperator,
    y: &crate::varieties::ImplicitVariety,
    q: &CVec,
    tol: f64,
) -> Result<bool> {
    let image = p.apply(q)?;
    Ok(y.normalized_residual(&image) < tol)
}

/// Joint geometry of the fiber construction.
#[derive(Debug, Clone)]
pub struct JoinSetup {
    /// Generic (m-n-3)-plane, absent when n = m-2.
    pub w: Option<MultiVector>,
    /// Z = join of W and the baseline; dimension m-n-1.
    pub z: MultiVector,
    /// Z_i: joins of the projected W with the epipoles; points when n = m-2.
    pub z_images: [MultiVector; 2],
    /// Complement frame spanning the chart of (m-n)-planes through Z.
    pub chart: CMat,
    /// For curve scenes: covector pencil of the hyperplanes through Z.
    pub pencil: Option<(CVec, CVec)>,
}

impl JoinSetup {
    /// The (m-n)-plane of chart parameter t, as an extensor containing Z.
    pub fn plane_at(&self, t: &CVec) -> Result<MultiVector> {
        if t.len() != self.chart.ncols() {
            return Err(ProjvarError::DimensionMismatch(format!(
                "chart parameter of length {}, expected {}",
                t.len(),
                self.chart.ncols()
            )));
        }
        let point = &self.chart * t;
        join(&self.z, &MultiVector::from_vector(&point)?)
    }
}

/// Build the join geometry of a scene component: W generic, Z = W ∨ L,
/// Z_i = W_i ∨ e_i, with sampled genericity checks.
pub fn geometric_join_setup(scene: &Scene, component: usize, seed: u64) -> Result<JoinSetup> {
    let m = scene.m;
    let comp = scene
        .components
        .get(component)
        .ok_or_else(|| ProjvarError::SceneUnsupported("component index out of range".into()))?;
    let n = comp.x_param.n();
    if n > m - 2 {
        return Err(ProjvarError::InvalidConfig(format!(
            "the model must have codimension at least 2: n = {n}, m = {m}"
        )));
    }
    let mut rng = child_rng(seed, "join_setup");
    let line = baseline(&scene.pair.first, &scene.pair.second)?;
    for _ in 0..32 {
        let setup = try_join_setup(scene, comp, n, &line, &mut rng)?;
        if let Some(setup) = setup {
            return Ok(setup);
        }
    }
    Err(ProjvarError::GenericityExhausted(
        32,
        "drawing the generic join plane".into(),
    ))
}

fn try_join_setup(
    scene: &Scene,
    comp: &SceneComponent,
    n: usize,
    line: &MultiVector,
    rng: &mut ChaCha12Rng,
) -> Result<Option<JoinSetup>> {
    let m = scene.m;
    let w_dim = m as i64 - n as i64 - 3;
    let (w, z) = if w_dim < 0 {
        (None, line.clone())
    } else {
        let pts: Vec<CVec> = (0..=w_dim as usize)
            .map(|_| random_cvec(rng, m + 1))
            .collect();
        let w = crate::exterior::span_to_extensor(&pts)?;
        let z = join(&w, line)?;
        if z.norm() <= 1e-10 {
            return Ok(None);
        }
        (Some(w), z)
    };
    // dim Z = m - n - 1 as a projective subspace.
    debug_assert_eq!(z.grade(), m - n - 1 + 1);

    // Projected joins with the epipoles.
    let mut z_images = Vec::with_capacity(2);
    for (idx, op) in [&scene.pair.first, &scene.pair.second].iter().enumerate() {
        let e = if idx == 0 {
            &scene.epipoles.e1
        } else {
            &scene.epipoles.e2
        };
        let e_mv = MultiVector::from_vector(e)?;
        let image = match &w {
            None => e_mv,
            Some(w) => {
                let k = n + 3;
                let tilde = op.tilde_k(k)?;
                let w_img = tilde.apply(w)?;
                if w_img.norm() <= 1e-10 {
                    return Ok(None);
                }
                let joined = join(&w_img, &e_mv)?;
                if joined.norm() <= 1e-10 {
                    return Ok(None);
                }
                joined
            }
        };
        z_images.push(image);
    }

    // Z misses X and Z_i miss Y_i on sampled points.
    let samples = comp.x_param.sample_points(12, 0xfeed)?;
    for x in &samples {
        let joined = join(&z, &MultiVector::from_vector(x)?)?;
        if joined.norm() < 1e-8 * z.norm() {
            return Ok(None);
        }
    }
    for (idx, op) in [&scene.pair.first, &scene.pair.second].iter().enumerate() {
        for x in &samples {
            let y = op.apply(x)?;
            let zi = &z_images[idx];
            if zi.grade() + 1 <= m {
                let joined = join(zi, &MultiVector::from_vector(&y)?)?;
                if joined.norm() < 1e-8 * zi.norm() {
                    return Ok(None);
                }
            }
        }
    }

    // Chart: a complement of the span of Z parametrizes the planes over P^n.
    let span = crate::exterior::extensor_to_span(&z, RANK_RTOL)?;
    let span_mat = CMat::from_fn(m + 1, span.len(), |i, j| span[j][i]);
    let complement = right_nullspace(&span_mat.adjoint(), RANK_RTOL);
    if complement.len() != n + 1 {
        return Ok(None);
    }
    let chart = CMat::from_fn(m + 1, n + 1, |i, j| complement[j][i]);

    // Hyperplane pencil through Z for curve scenes: covectors vanishing on Z.
    let pencil = if n == 1 {
        let mut rows = CMat::zeros(span.len(), m + 1);
        for (i, v) in span.iter().enumerate() {
            rows.row_mut(i).copy_from(&v.transpose());
        }
        let covectors = right_nullspace(&rows, RANK_RTOL);
        if covectors.len() != 2 {
            return Ok(None);
        }
        Some((covectors[0].clone(), covectors[1].clone()))
    } else {
        None
    };

    Ok(Some(JoinSetup {
        w,
        z,
        z_images: z_images
            .try_into()
            .map_err(|_| ProjvarError::DimensionMismatch("image joins".into()))
            .expect("two images"),
        chart,
        pencil,
    }))
}

/// Triangulated candidate with its reprojection residual.
#[derive(Debug, Clone)]
pub struct Triangulated {
    pub point: CVec,
    pub reprojection_residual: f64,
}

/// Least-squares meeting point of the two view rays: the smallest singular
/// vector of the stacked wedge conditions `M_i Q ∧ y_i = 0`. The inputs must
/// satisfy the reduced-order correspondence within tolerance.
pub fn triangulate(
    pair: &ProjectionPair,
    y1: &CVec,
    y2: &CVec,
    tol: f64,
) -> Result<Triangulated> {
    let m = pair.m();
    let f = crate::epipolar::reduced_fundamental(&pair.first, &pair.second)?;
    let w1 = MultiVector::from_vector(y1)?;
    let w2 = MultiVector::from_vector(y2)?;
    // Reject the epipole pair first: every point of the baseline projects to
    // it, and the reduced matrix annihilates the first epipole.
    let eps = crate::epipolar::epipoles(&pair.first, &pair.second)?;
    if crate::numeric::proj_distance_vec(y1, &eps.e1) < 1e-6
        && crate::numeric::proj_distance_vec(y2, &eps.e2) < 1e-6
    {
        return Err(ProjvarError::BaselineDegenerate);
    }
    let image = f.apply(&w1)?;
    if image.norm() <= 1e-10 * f.entries.norm() * w1.norm() {
        return Err(ProjvarError::BaselineDegenerate);
    }
    let violation = join(&w2, &image)?.norm() / (w2.norm() * image.norm()).max(NORM_FLOOR);
    if violation > tol {
        return Err(ProjvarError::EpipolarViolation(violation));
    }

    let rows_per_view = crate::numeric::binomial(m, 2) as usize;
    let mut system = CMat::zeros(2 * rows_per_view, m + 1);
    for (block, (op, y)) in [(&pair.first, y1), (&pair.second, y2)].iter().enumerate() {
        let wedge = crate::epipolar::wedge_by_point_matrix(y, 1)?;
        let block_matrix = &wedge * op.entries();
        system
            .view_mut((block * rows_per_view, 0), (rows_per_view, m + 1))
            .copy_from(&block_matrix);
    }
    let q = kernel_vector(&system, 1e-6).or_else(|_| {
        // Noisy data: fall back to the smallest singular vector.
        let svd = system.clone().svd(false, true);
        let v_t = svd.v_t.expect("svd v_t");
        Ok::<CVec, ProjvarError>(v_t.row(v_t.nrows() - 1).adjoint())
    })?;
    let mut residual = 0.0_f64;
    for (op, y) in [(&pair.first, y1), (&pair.second, y2)] {
        let reproj = op.apply(&q)?;
        residual = residual.max(crate::numeric::proj_distance_vec(&reproj, y));
    }
    Ok(Triangulated {
        point: q,
        reprojection_residual: residual,
    })
}

/// Label of a fiber candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateLabel {
    True,
    Ghost,
}

/// All candidates over one member of the epipolar pencil.
#[derive(Debug, Clone)]
pub struct FiberRecord {
    pub t: (C, C),
    pub candidates: Vec<(CVec, CandidateLabel)>,
    pub n_true: usize,
    pub n_ghost: usize,
}

/// Labeling thresholds with a dead band against branch-point ambiguity.
#[derive(Debug, Clone)]
pub struct FiberOptions {
    pub true_tol: f64,
    pub ghost_tol: f64,
    pub collision_tol: f64,
    pub epipolar_tol: f64,
}

impl Default for FiberOptions {
    fn default() -> Self {
        FiberOptions {
            true_tol: 1e-6,
            ghost_tol: 1e-3,
            collision_tol: 1e-6,
            epipolar_tol: 1e-6,
        }
    }
}

/// Intersect the epipolar hyperplane of pencil parameter t with both
/// projected curves, triangulate all candidate pairs, and label each one as
/// on-variety or ghost; near-branch fibers are rejected.
pub fn epipolar_fiber(
    scene: &Scene,
    component: usize,
    setup: &JoinSetup,
    t: (C, C),
    options: &FiberOptions,
) -> Result<FiberRecord> {
    let comp = scene
        .components
        .get(component)
        .ok_or_else(|| ProjvarError::SceneUnsupported("component index out of range".into()))?;
    if comp.x_param.n() != 1 {
        return Err(ProjvarError::SceneUnsupported(
            "fiber sampling is implemented for curve scenes".into(),
        ));
    }
    let (h0, h1) = setup
        .pencil
        .as_ref()
        .ok_or_else(|| ProjvarError::SceneUnsupported("setup carries no pencil".into()))?;
    let plane_cov = h0 * t.0 + h1 * t.1;
    let d = comp.x_param.degree();

    // Image lines: pull the plane covector through each operator.
    let mut view_points: [Vec<CVec>; 2] = [Vec::new(), Vec::new()];
    for (idx, op) in [&scene.pair.first, &scene.pair.second].iter().enumerate() {
        let lhs = op.entries().transpose();
        let line_cov = lstsq(&lhs, &plane_cov, RANK_RTOL);
        let pullback_err = (&lhs * &line_cov - &plane_cov).norm() / plane_cov.norm();
        if pullback_err > 1e-8 {
            return Err(ProjvarError::BranchFiber(format!(
                "plane does not project: residual {pullback_err:.3e}"
            )));
        }
        let restricted = (line_cov.transpose() * comp.projected[idx].param.coeffs()).transpose();
        let coeffs: Vec<C> = restricted.iter().copied().collect();
        let roots = binary_form_roots(&coeffs);
        if roots.len() != d {
            return Err(ProjvarError::BranchFiber(format!(
                "found {} roots, expected {}",
                roots.len(),
                d
            )));
        }
        // Root collisions flag a tangency (branch point).
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                if p1_distance(roots[i], roots[j]) < options.collision_tol {
                    return Err(ProjvarError::BranchFiber(
                        "root collision within tolerance".into(),
                    ));
                }
            }
        }
        let points: Result<Vec<CVec>> = roots
            .iter()
            .map(|&(rt, rs)| {
                comp.projected[idx]
                    .param
                    .sample(&CVec::from_vec(vec![rt, rs]))
            })
            .collect();
        view_points[idx] = points?;
    }

    let mut candidates = Vec::with_capacity(d * d);
    let mut n_true = 0usize;
    let mut n_ghost = 0usize;
    for y1 in &view_points[0] {
        for y2 in &view_points[1] {
            let tri = triangulate(&scene.pair, y1, y2, options.epipolar_tol)
                .map_err(|e| ProjvarError::BranchFiber(format!("triangulation failed: {e}")))?;
            let membership = comp.x_implicit.normalized_residual(&tri.point);
            let label = if membership < options.true_tol {
                n_true += 1;
                CandidateLabel::True
            } else if membership > options.ghost_tol {
                n_ghost += 1;
                CandidateLabel::Ghost
            } else {
                return Err(ProjvarError::BranchFiber(format!(
                    "label margin ambiguity at residual {membership:.3e}"
                )));
            };
            candidates.push((tri.point, label));
        }
    }
    Ok(FiberRecord {
        t,
        candidates,
        n_true,
        n_ghost,
    })
}

/// Census of many seeded fibers.
#[derive(Debug, Clone)]
pub struct CensusSummary {
    pub fibers_requested: usize,
    pub clean: usize,
    pub discarded: usize,
    /// Counts observed most often among clean fibers.
    pub modal_counts: (usize, usize),
    /// Expected pattern (d, d(d-1)).
    pub expected_counts: (usize, usize),
    /// Fraction of clean fibers showing the modal counts.
    pub fraction_modal: f64,
    /// Degree-2 scenes admit both components as reconstructions.
    pub degree_two_ambiguity: bool,
    /// Subspace distance between implicit forms refit from true candidates
    /// and the scene's own model.
    pub refit_distance: Option<f64>,
}

/// Sample fibers over the pencil and aggregate the per-fiber counts; errors
/// when fewer than half of the fibers are clean.
pub fn component_census(
    scene: &Scene,
    component: usize,
    num_fibers: usize,
    seed: u64,
) -> Result<CensusSummary> {
    let setup = geometric_join_setup(scene, component, seed)?;
    let options = FiberOptions::default();
    let comp = &scene.components[component];
    let d = comp.x_param.degree();
    let mut rng = child_rng(seed, "census");
    let mut clean = 0usize;
    let mut discarded = 0usize;
    let mut histogram: std::collections::BTreeMap<(usize, usize), usize> =
        std::collections::BTreeMap::new();
    let mut true_points: Vec<CVec> = Vec::new();
    for _ in 0..num_fibers {
        let t = (
            crate::numeric::random_complex(&mut rng),
            crate::numeric::random_complex(&mut rng),
        );
        match epipolar_fiber(scene, component, &setup, t, &options) {
            Ok(record) => {
                clean += 1;
                *histogram.entry((record.n_true, record.n_ghost)).or_insert(0) += 1;
                for (point, label) in &record.candidates {
                    if *label == CandidateLabel::True {
                        true_points.push(point.clone());
                    }
                }
            }
            Err(ProjvarError::BranchFiber(_)) => {
                discarded += 1;
            }
            Err(other) => return Err(other),
        }
    }
    if clean * 2 < num_fibers {
        return Err(ProjvarError::TooFewCleanFibers {
            clean,
            total: num_fibers,
        });
    }
    let (modal_counts, modal_hits) = histogram
        .iter()
        .max_by_key(|(_, count)| **count)
        .map(|(k, v)| (*k, *v))
        .expect("at least one clean fiber");
    // Refit at the degree of the stored implicit model so the coefficient
    // spans are directly comparable.
    let refit_distance = if true_points.len() >= 2 * comp.x_implicit.basis().len() {
        let refit =
            crate::varieties::implicit_fit(&true_points, comp.x_implicit.degree(), scene.m)?;
        let fitted: Vec<CVec> = refit.forms().to_vec();
        let model: Vec<CVec> = comp.x_implicit.forms().to_vec();
        Some(crate::numeric::subspace_distance(&fitted, &model))
    } else {
        None
    };
    Ok(CensusSummary {
        fibers_requested: num_fibers,
        clean,
        discarded,
        modal_counts,
        expected_counts: (d, d * (d - 1)),
        fraction_modal: modal_hits as f64 / clean as f64,
        degree_two_ambiguity: d == 2,
        refit_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{random_scene, VarietyKind};

    #[test]
    fn cone_membership_examples() {
        let scene = random_scene(3, &[VarietyKind::Conic3d], 111).unwrap();
        let comp = &scene.components[0];
        let mut rng = child_rng(3, "membership");
        // Lifted samples of X belong to both cones.
        let samples = comp.x_param.sample_points(6, 4).unwrap();
        for x in &samples {
            for (idx, op) in [&scene.pair.first, &scene.pair.second].iter().enumerate() {
                assert!(cone_membership(op, &comp.projected[idx].implicit, x, 1e-7).unwrap());
            }
        }
        // Random ambient points are off the cones with margin.
        for _ in 0..8 {
            let q = random_cvec(&mut rng, 4);
            let r1 = comp.projected[0]
                .implicit
                .normalized_residual(&scene.pair.first.apply(&q).unwrap());
            assert!(r1 > 1e-3);
        }
        // Points of the first cone off X: member of cone 1, not cone 2.
        let t = random_cvec(&mut rng, 2);
        let x = comp.x_param.sample(&t).unwrap();
        let o1 = scene.pair.first.center().unwrap();
        let on_ray = &x * C::new(0.3, 0.4) + &o1 * C::new(1.0, -0.2);
        assert!(cone_membership(&scene.pair.first, &comp.projected[0].implicit, &on_ray, 1e-7)
            .unwrap());
        assert!(!cone_membership(
            &scene.pair.second,
            &comp.projected[1].implicit,
            &on_ray,
            1e-7
        )
        .unwrap());
    }

    #[test]
    fn join_setup_for_codimension_two() {
        // n = m-2: W is empty, Z is the baseline, Z_i are the epipoles.
        let scene = random_scene(3, &[VarietyKind::Conic3d], 222).unwrap();
        let setup = geometric_join_setup(&scene, 0, 5).unwrap();
        assert!(setup.w.is_none());
        let line = baseline(&scene.pair.first, &scene.pair.second).unwrap();
        assert!(crate::exterior::proj_equal(&setup.z, &line, 1e-9).unwrap());
        assert!(crate::numeric::proj_equal_vec(
            &setup.z_images[0].coeffs().clone(),
            &scene.epipoles.e1,
            1e-9
        )
        .unwrap());
        // Chart planes contain Z.
        let mut rng = child_rng(6, "chart");
        for _ in 0..6 {
            let t = random_cvec(&mut rng, 2);
            let plane = setup.plane_at(&t).unwrap();
            assert_eq!(plane.grade(), 3);
            let span = crate::exterior::extensor_to_span(&plane, 1e-8).unwrap();
            let zspan = crate::exterior::extensor_to_span(&setup.z, 1e-8).unwrap();
            let mut joint = span.clone();
            joint.extend(zspan);
            assert!(crate::numeric::subspace_distance(&span, &joint) < 1e-8);
        }
        // The pencil covectors annihilate both centers.
        let (h0, h1) = setup.pencil.as_ref().unwrap();
        for op in [&scene.pair.first, &scene.pair.second] {
            let o = op.center().unwrap();
            assert!((h0.transpose() * &o)[(0, 0)].norm() < 1e-9);
            assert!((h1.transpose() * &o)[(0, 0)].norm() < 1e-9);
        }
    }

    #[test]
    fn join_setup_with_nonempty_w() {
        // A curve in P^4 gives W a point, Z a plane: exercised for geometry
        // only (fiber sampling stays at codimension 2).
        let mut rng = child_rng(7, "p4curve");
        let pair = crate::scene::random_pair(&mut rng, 4).unwrap();
        let embed = crate::numeric::random_cmat(&mut rng, 5, 3);
        let x_param = crate::varieties::ParametricVariety::new(1, 4, 2, embed).unwrap();
        let samples = x_param.sample_points(40, 8).unwrap();
        let x_implicit = crate::varieties::implicit_fit(&samples, 2, 4).unwrap();
        let mut projected = Vec::new();
        for op in [&pair.first, &pair.second] {
            let param = crate::varieties::project_variety(op, &x_param).unwrap();
            let view_samples = param.sample_points(30, 9).unwrap();
            let implicit = crate::varieties::implicit_fit(&view_samples, 2, 3).unwrap();
            projected.push(crate::scene::ProjectedModel {
                param,
                implicit,
                gram: None,
                dual: None,
            });
        }
        let eps = crate::epipolar::epipoles(&pair.first, &pair.second).unwrap();
        let scene = Scene {
            m: 4,
            seed: 0,
            pair,
            epipoles: eps,
            components: vec![SceneComponent {
                kind: VarietyKind::RationalNormalCurve { degree: 2 },
                class_c: None,
                x_param,
                x_implicit,
                projected: projected.try_into().map_err(|_| ()).unwrap(),
            }],
        };
        let setup = geometric_join_setup(&scene, 0, 11).unwrap();
        assert!(setup.w.is_some());
        // dim Z = m - n - 1 = 2, so grade 3.
        assert_eq!(setup.z.grade(), 3);
        assert_eq!(setup.z_images[0].grade(), 2);
    }

    #[test]
    fn triangulation_examples() {
        let scene = random_scene(3, &[VarietyKind::Conic3d], 333).unwrap();
        let comp = &scene.components[0];
        let mut rng = child_rng(13, "triangulate");
        // Projected pairs of a known point are recovered.
        for _ in 0..5 {
            let t = random_cvec(&mut rng, 2);
            let x = comp.x_param.sample(&t).unwrap();
            let y1 = scene.pair.first.apply(&x).unwrap();
            let y2 = scene.pair.second.apply(&x).unwrap();
            let tri = triangulate(&scene.pair, &y1, &y2, 1e-6).unwrap();
            assert!(crate::numeric::proj_distance_vec(&tri.point, &x) < 1e-9);
            assert!(tri.reprojection_residual < 1e-8);
        }
        // Pairs from unrelated points violate the epipolar constraint.
        let t1 = random_cvec(&mut rng, 2);
        let t2 = random_cvec(&mut rng, 2);
        let y1 = scene
            .pair
            .first
            .apply(&comp.x_param.sample(&t1).unwrap())
            .unwrap();
        let y2 = scene
            .pair
            .second
            .apply(&comp.x_param.sample(&t2).unwrap())
            .unwrap();
        assert!(matches!(
            triangulate(&scene.pair, &y1, &y2, 1e-6),
            Err(ProjvarError::EpipolarViolation(_))
        ));
        // The epipole pair is rejected as degenerate.
        assert!(matches!(
            triangulate(&scene.pair, &scene.epipoles.e1, &scene.epipoles.e2, 1e-3),
            Err(ProjvarError::BaselineDegenerate)
        ));
    }

    #[test]
    fn fiber_counts_for_conic() {
        let scene = random_scene(3, &[VarietyKind::Conic3d], 444).unwrap();
        let setup = geometric_join_setup(&scene, 0, 17).unwrap();
        let options = FiberOptions::default();
        let mut rng = child_rng(18, "fibers");
        let mut seen_clean = 0;
        for _ in 0..12 {
            let t = (
                crate::numeric::random_complex(&mut rng),
                crate::numeric::random_complex(&mut rng),
            );
            match epipolar_fiber(&scene, 0, &setup, t, &options) {
                Ok(record) => {
                    seen_clean += 1;
                    assert_eq!(record.candidates.len(), 4);
                    assert_eq!((record.n_true, record.n_ghost), (2, 2));
                }
                Err(ProjvarError::BranchFiber(_)) => {}
                Err(other) => panic!("unexpected error: {other}"),
            }
        }
        assert!(seen_clean >= 9, "only {seen_clean}/12 clean fibers");
    }

    #[test]
    fn census_on_conic_and_cubic() {
        let scene = random_scene(3, &[VarietyKind::Conic3d], 555).unwrap();
        let census = component_census(&scene, 0, 60, 19).unwrap();
        assert_eq!(census.modal_counts, (2, 2));
        assert_eq!(census.expected_counts, (2, 2));
        assert!(census.fraction_modal > 0.9);
        assert!(census.degree_two_ambiguity);
        assert!(census.refit_distance.unwrap() < 1e-6);

        let scene = random_scene(
            3,
            &[VarietyKind::RationalNormalCurve { degree: 3 }],
            556,
        )
        .unwrap();
        let census = component_census(&scene, 0, 60, 23).unwrap();
        assert_eq!(census.modal_counts, (3, 6));
        assert_eq!(census.expected_counts, (3, 6));
        assert!(census.fraction_modal > 0.9);
        assert!(!census.degree_two_ambiguity);
        assert!(census.refit_distance.unwrap() < 1e-6);
    }
}
