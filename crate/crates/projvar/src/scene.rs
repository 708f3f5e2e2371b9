//! Seeded synthetic scenes: a projection pair in ambient dimension m together
//! with one or more model varieties, their projections, implicit models, and
//! exact dual quadrics where available.
//!
//! Catalog at desk scale: plane conics inside P^3 (class 2), rational normal
//! curves of low degree in P^3, and smooth quadric surfaces inside a
//! hyperplane of P^4 (class 2). Dual polynomials are exact (adjugate) for the
//! quadric and conic models only; aggregating several components raises the
//! total class of a scene.

use rand_chacha::ChaCha12Rng;

use crate::epipolar::{epipoles, EpipolePair};
use crate::error::{ProjvarError, Result};
use crate::numeric::{child_rng, cond, random_cmat, CMat, C};
use crate::recovery::ProjectionPair;
use crate::varieties::{
    dual_quadric, implicit_fit, project_variety, quadric_parametrization, ImplicitVariety,
    ParametricVariety, Quadric,
};

/// Scene model kinds supported by the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarietyKind {
    /// Conic inside a plane of P^3 (degree 2, class 2).
    Conic3d,
    /// Rational normal curve of the given degree in P^3.
    RationalNormalCurve { degree: usize },
    /// Smooth quadric surface inside a hyperplane of P^4 (degree 2, class 2).
    Quadric,
}

/// One projected view of a scene component.
#[derive(Debug, Clone)]
pub struct ProjectedModel {
    pub param: ParametricVariety,
    pub implicit: ImplicitVariety,
    /// Exact Gram matrix for conic/quadric models.
    pub gram: Option<Quadric>,
    /// Exact dual quadric (adjugate) for conic/quadric models.
    pub dual: Option<Quadric>,
}

/// A model variety with its two projections.
#[derive(Debug, Clone)]
pub struct SceneComponent {
    pub kind: VarietyKind,
    /// Class (degree of the dual hypersurface) when exactly known.
    pub class_c: Option<usize>,
    pub x_param: ParametricVariety,
    pub x_implicit: ImplicitVariety,
    pub projected: [ProjectedModel; 2],
}

/// A full synthetic scene.
#[derive(Debug, Clone)]
pub struct Scene {
    pub m: usize,
    pub seed: u64,
    pub pair: ProjectionPair,
    pub epipoles: EpipolePair,
    pub components: Vec<SceneComponent>,
}

impl Scene {
    /// Sum of the exactly-known classes of the components.
    pub fn total_class(&self) -> usize {
        self.components
            .iter()
            .filter_map(|c| c.class_c)
            .sum()
    }

    /// Components carrying exact dual quadric pairs, as dual-polynomial data.
    pub fn dual_pairs(&self) -> Vec<(&Quadric, &Quadric)> {
        self.components
            .iter()
            .filter_map(|c| match (&c.projected[0].dual, &c.projected[1].dual) {
                (Some(d1), Some(d2)) => Some((d1, d2)),
                _ => None,
            })
            .collect()
    }
}

const MAX_ATTEMPTS: usize = 64;

/// Gram matrix of the Veronese conic `x0 x2 - x1^2`.
fn veronese_gram() -> CMat {
    let mut g = CMat::zeros(3, 3);
    g[(0, 2)] = C::new(0.5, 0.0);
    g[(2, 0)] = C::new(0.5, 0.0);
    g[(1, 1)] = C::new(-1.0, 0.0);
    g
}

/// A well-conditioned random projection pair in dimension m.
pub fn random_pair(rng: &mut ChaCha12Rng, m: usize) -> Result<ProjectionPair> {
    for _ in 0..MAX_ATTEMPTS {
        let p1 = crate::projection::random_operator(rng, m);
        let p2 = crate::projection::random_operator(rng, m);
        let Ok(pair) = ProjectionPair::new(p1, p2) else {
            continue;
        };
        if epipoles(&pair.first, &pair.second).is_ok() {
            return Ok(pair);
        }
    }
    Err(ProjvarError::GenericityExhausted(
        MAX_ATTEMPTS,
        "drawing a projection pair".into(),
    ))
}

fn conic_component(pair: &ProjectionPair, rng: &mut ChaCha12Rng) -> Result<SceneComponent> {
    let m = pair.m();
    if m != 3 {
        return Err(ProjvarError::InvalidConfig(format!(
            "conic3d models require m = 3, got m = {m}"
        )));
    }
    for _ in 0..MAX_ATTEMPTS {
        let embed = random_cmat(rng, 4, 3);
        if cond(&embed) > 1e4 {
            continue;
        }
        let x_param = ParametricVariety::new(1, 3, 2, embed.clone())?;
        let Ok(projected) = project_pair_models(pair, &x_param, &embed) else {
            continue;
        };
        let samples = x_param.sample_points(3 * 20, rng_sub_seed(rng))?;
        let x_implicit = implicit_fit(&samples, 2, 3)?;
        return Ok(SceneComponent {
            kind: VarietyKind::Conic3d,
            class_c: Some(2),
            x_param,
            x_implicit,
            projected,
        });
    }
    Err(ProjvarError::GenericityExhausted(
        MAX_ATTEMPTS,
        "building a conic component".into(),
    ))
}

/// Both projected models of a conic with exact Gram and dual matrices.
fn project_pair_models(
    pair: &ProjectionPair,
    x_param: &ParametricVariety,
    embed: &CMat,
) -> Result<[ProjectedModel; 2]> {
    let g0 = veronese_gram();
    let mut out = Vec::with_capacity(2);
    for op in [&pair.first, &pair.second] {
        let param = project_variety(op, x_param)?;
        let b = op.entries() * embed;
        if cond(&b) > 1e8 {
            return Err(ProjvarError::GenericityExhausted(
                1,
                "projected conic frame is ill conditioned".into(),
            ));
        }
        let binv = b
            .clone()
            .try_inverse()
            .ok_or_else(|| ProjvarError::SingularMatrix("projected conic frame".into()))?;
        let gram = Quadric::symmetrized(&(binv.transpose() * &g0 * &binv))?;
        let dual = dual_quadric(&gram);
        let (_, form) = gram.to_form()?;
        let implicit = ImplicitVariety::new(2, 2, vec![form])?;
        out.push(ProjectedModel {
            param,
            implicit,
            gram: Some(gram),
            dual: Some(dual),
        });
    }
    Ok(out.try_into().map_err(|_| {
        ProjvarError::DimensionMismatch("projected model pair".into())
    })?)
}

fn rnc_component(
    pair: &ProjectionPair,
    degree: usize,
    rng: &mut ChaCha12Rng,
) -> Result<SceneComponent> {
    let m = pair.m();
    if m != 3 {
        return Err(ProjvarError::InvalidConfig(format!(
            "rational normal curve models require m = 3, got m = {m}"
        )));
    }
    if degree == 2 {
        return conic_component(pair, rng);
    }
    if degree != 3 {
        return Err(ProjvarError::InvalidConfig(format!(
            "rational normal curves are supported at degrees 2 and 3, got {degree}"
        )));
    }
    for _ in 0..MAX_ATTEMPTS {
        let embed = random_cmat(rng, 4, 4);
        if cond(&embed) > 1e4 {
            continue;
        }
        let x_param = ParametricVariety::new(1, 3, 3, embed)?;
        let samples = x_param.sample_points(40, rng_sub_seed(rng))?;
        let Ok(x_implicit) = implicit_fit(&samples, 2, 3) else {
            continue;
        };
        if x_implicit.forms().len() != 3 {
            continue;
        }
        let mut projected = Vec::with_capacity(2);
        let mut ok = true;
        for op in [&pair.first, &pair.second] {
            let Ok(param) = project_variety(op, &x_param) else {
                ok = false;
                break;
            };
            let Ok(view_samples) = param.sample_points(2 * 12, rng_sub_seed(rng)) else {
                ok = false;
                break;
            };
            let Ok(implicit) = implicit_fit(&view_samples, 3, 2) else {
                ok = false;
                break;
            };
            projected.push(ProjectedModel {
                param,
                implicit,
                gram: None,
                dual: None,
            });
        }
        if !ok {
            continue;
        }
        return Ok(SceneComponent {
            kind: VarietyKind::RationalNormalCurve { degree },
            class_c: None,
            x_param,
            x_implicit,
            projected: projected.try_into().map_err(|_| {
                ProjvarError::DimensionMismatch("projected model pair".into())
            })?,
        });
    }
    Err(ProjvarError::GenericityExhausted(
        MAX_ATTEMPTS,
        "building a rational normal curve component".into(),
    ))
}

fn quadric_component(pair: &ProjectionPair, rng: &mut ChaCha12Rng) -> Result<SceneComponent> {
    let m = pair.m();
    if m < 4 {
        return Err(ProjvarError::InvalidConfig(format!(
            "quadric models need codimension 2, so m >= 4; got m = {m}"
        )));
    }
    if m != 4 {
        return Err(ProjvarError::InvalidConfig(
            "quadric models are generated at m = 4".into(),
        ));
    }
    for _ in 0..MAX_ATTEMPTS {
        // Hyperplane frame and a smooth quadric inside it.
        let frame = random_cmat(rng, 5, 4);
        if cond(&frame) > 1e4 {
            continue;
        }
        let gtilde = Quadric::symmetrized(&random_cmat(rng, 4, 4))?;
        if !gtilde.is_smooth(1e-6) {
            continue;
        }
        let Ok(inner) = quadric_parametrization(&gtilde, rng_sub_seed(rng)) else {
            continue;
        };
        // Embed the parametrization into P^4 through the frame.
        let coeffs = &frame * inner.coeffs();
        let x_param = ParametricVariety::new(2, 4, 2, coeffs)?;
        let Ok(samples) = x_param.sample_points(40, rng_sub_seed(rng)) else {
            continue;
        };
        let Ok(x_implicit) = implicit_fit(&samples, 2, 4) else {
            continue;
        };
        if x_implicit.forms().len() != 6 {
            continue;
        }
        let mut projected = Vec::with_capacity(2);
        let mut ok = true;
        for op in [&pair.first, &pair.second] {
            let Ok(param) = project_variety(op, &x_param) else {
                ok = false;
                break;
            };
            let c = op.entries() * &frame;
            if cond(&c) > 1e8 {
                ok = false;
                break;
            }
            let Some(cinv) = c.clone().try_inverse() else {
                ok = false;
                break;
            };
            let Ok(gram) = Quadric::symmetrized(&(cinv.transpose() * gtilde.gram() * &cinv))
            else {
                ok = false;
                break;
            };
            let dual = dual_quadric(&gram);
            let Ok((_, form)) = gram.to_form() else {
                ok = false;
                break;
            };
            let Ok(implicit) = ImplicitVariety::new(3, 2, vec![form]) else {
                ok = false;
                break;
            };
            projected.push(ProjectedModel {
                param,
                implicit,
                gram: Some(gram),
                dual: Some(dual),
            });
        }
        if !ok {
            continue;
        }
        return Ok(SceneComponent {
            kind: VarietyKind::Quadric,
            class_c: Some(2),
            x_param,
            x_implicit,
            projected: projected.try_into().map_err(|_| {
                ProjvarError::DimensionMismatch("projected model pair".into())
            })?,
        });
    }
    Err(ProjvarError::GenericityExhausted(
        MAX_ATTEMPTS,
        "building a quadric component".into(),
    ))
}

fn rng_sub_seed(rng: &mut ChaCha12Rng) -> u64 {
    use rand::Rng;
    rng.gen()
}

/// Build a seeded random scene with the given component kinds.
pub fn random_scene(m: usize, kinds: &[VarietyKind], seed: u64) -> Result<Scene> {
    if m < 3 {
        return Err(ProjvarError::InvalidConfig("m must be at least 3".into()));
    }
    if kinds.is_empty() {
        return Err(ProjvarError::InvalidConfig(
            "a scene needs at least one model variety".into(),
        ));
    }
    let mut rng = child_rng(seed, "scene");
    let pair = random_pair(&mut rng, m)?;
    build_scene_with_pair(pair, kinds, seed, &mut rng)
}

/// Build a scene over an explicitly given projection pair.
pub fn scene_with_pair(pair: ProjectionPair, kinds: &[VarietyKind], seed: u64) -> Result<Scene> {
    let mut rng = child_rng(seed, "scene_components");
    build_scene_with_pair(pair, kinds, seed, &mut rng)
}

fn build_scene_with_pair(
    pair: ProjectionPair,
    kinds: &[VarietyKind],
    seed: u64,
    rng: &mut ChaCha12Rng,
) -> Result<Scene> {
    let m = pair.m();
    let mut components = Vec::with_capacity(kinds.len());
    for kind in kinds {
        let component = match kind {
            VarietyKind::Conic3d => conic_component(&pair, rng)?,
            VarietyKind::RationalNormalCurve { degree } => rnc_component(&pair, *degree, rng)?,
            VarietyKind::Quadric => quadric_component(&pair, rng)?,
        };
        components.push(component);
    }
    let eps = epipoles(&pair.first, &pair.second)?;
    Ok(Scene {
        m,
        seed,
        pair,
        epipoles: eps,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{CVec, DEFAULT_TOL};

    #[test]
    fn conic_scene_is_consistent() {
        let scene = random_scene(3, &[VarietyKind::Conic3d], 101).unwrap();
        assert_eq!(scene.total_class(), 2);
        let component = &scene.components[0];
        // Samples of X vanish under the fitted implicit forms.
        let samples = component.x_param.sample_points(10, 5).unwrap();
        for s in &samples {
            assert!(component.x_implicit.normalized_residual(s) < 1e-8);
        }
        assert_eq!(component.x_implicit.forms().len(), 5);
        // Projected samples land on the exact projected Gram.
        for (view, op) in component
            .projected
            .iter()
            .zip([&scene.pair.first, &scene.pair.second])
        {
            for s in &samples {
                let image = op.entries() * s;
                let gram = view.gram.as_ref().unwrap();
                let value = gram.eval(&image).norm();
                assert!(value < 1e-8 * gram.gram().norm() * image.norm() * image.norm());
                assert!(view.implicit.normalized_residual(&image) < 1e-8);
            }
            // Dual tangency: tangent lines at curve samples satisfy the dual.
            let dual = view.dual.as_ref().unwrap();
            let t = CVec::from_vec(vec![C::new(0.4, 0.2), C::new(1.0, -0.5)]);
            let tangent = crate::varieties::tangent_extensor(&view.param, &t).unwrap();
            let h = crate::exterior::hodge(&tangent);
            let hv = h.coeffs().clone();
            let value = (hv.transpose() * dual.gram() * &hv)[(0, 0)];
            assert!(value.norm() < 1e-9 * dual.gram().norm() * hv.norm() * hv.norm());
        }
    }

    #[test]
    fn twisted_cubic_scene_is_consistent() {
        let scene = random_scene(
            3,
            &[VarietyKind::RationalNormalCurve { degree: 3 }],
            202,
        )
        .unwrap();
        let component = &scene.components[0];
        assert_eq!(component.x_implicit.forms().len(), 3);
        let samples = component.x_param.sample_points(8, 5).unwrap();
        for (view, op) in component
            .projected
            .iter()
            .zip([&scene.pair.first, &scene.pair.second])
        {
            assert_eq!(view.implicit.forms().len(), 1);
            assert_eq!(view.implicit.degree(), 3);
            for s in &samples {
                let image = op.entries() * s;
                assert!(view.implicit.normalized_residual(&image) < 1e-7);
            }
        }
    }

    #[test]
    fn quadric_scene_is_consistent() {
        let scene = random_scene(4, &[VarietyKind::Quadric], 303).unwrap();
        assert_eq!(scene.total_class(), 2);
        let component = &scene.components[0];
        assert_eq!(component.x_implicit.forms().len(), 6);
        let samples = component.x_param.sample_points(10, 7).unwrap();
        for (view, op) in component
            .projected
            .iter()
            .zip([&scene.pair.first, &scene.pair.second])
        {
            let gram = view.gram.as_ref().unwrap();
            assert!(gram.is_smooth(1e-8));
            for s in &samples {
                let image = op.entries() * s;
                let value = gram.eval(&image).norm();
                assert!(value < 1e-8 * gram.gram().norm() * image.norm() * image.norm());
            }
        }
    }

    #[test]
    fn multi_component_scenes_accumulate_class() {
        let scene = random_scene(3, &vec![VarietyKind::Conic3d; 5], 404).unwrap();
        assert_eq!(scene.components.len(), 5);
        assert_eq!(scene.total_class(), 10);
        assert_eq!(scene.dual_pairs().len(), 5);
    }

    #[test]
    fn deterministic_given_seed() {
        let a = random_scene(3, &[VarietyKind::Conic3d], 777).unwrap();
        let b = random_scene(3, &[VarietyKind::Conic3d], 777).unwrap();
        assert_eq!(a.pair.first.entries(), b.pair.first.entries());
        assert_eq!(
            a.components[0].x_param.coeffs(),
            b.components[0].x_param.coeffs()
        );
        let c = random_scene(3, &[VarietyKind::Conic3d], 778).unwrap();
        assert!((a.pair.first.entries() - c.pair.first.entries()).norm() > 1e-6);
    }

    #[test]
    fn invalid_configurations_are_rejected() {
        assert!(matches!(
            random_scene(3, &[VarietyKind::Quadric], 1),
            Err(ProjvarError::InvalidConfig(_))
        ));
        assert!(random_scene(2, &[VarietyKind::Conic3d], 1).is_err());
        assert!(random_scene(3, &[], 1).is_err());
        let _ = DEFAULT_TOL;
    }
}
