//! Scene configuration and scene-file (de)serialization. Complex scalars are
//! stored as `[re, im]` pairs and matrices as nested row-major arrays.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{ProjvarError, Result};
use crate::kruppa::SolverOptions;
use crate::numeric::{CMat, CVec, C};
use crate::projection::ProjectionOperator;
use crate::recovery::ProjectionPair;
use crate::scene::{Scene, SceneComponent, VarietyKind};
use crate::varieties::{ImplicitVariety, ParametricVariety, Quadric};

pub type ComplexJson = [f64; 2];
pub type VectorJson = Vec<ComplexJson>;
pub type MatrixJson = Vec<Vec<ComplexJson>>;

pub fn cvec_to_json(v: &CVec) -> VectorJson {
    v.iter().map(|x| [x.re, x.im]).collect()
}

pub fn cvec_from_json(v: &VectorJson) -> CVec {
    CVec::from_vec(v.iter().map(|[re, im]| C::new(*re, *im)).collect())
}

pub fn cmat_to_json(m: &CMat) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn cmat_from_json(rows: &MatrixJson) -> Result<CMat> {
    let nrows = rows.len();
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    if nrows == 0 || ncols == 0 {
        return Err(ProjvarError::InvalidConfig("empty matrix".into()));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(ProjvarError::InvalidConfig("ragged matrix".into()));
    }
    Ok(CMat::from_fn(nrows, ncols, |i, j| {
        C::new(rows[i][j][0], rows[i][j][1])
    }))
}

/// Model-variety entry of a configuration.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VarietySpec {
    Conic3d,
    RationalNormalCurve { degree: usize },
    Quadric,
}

impl VarietySpec {
    pub fn to_kind(&self) -> VarietyKind {
        match self {
            VarietySpec::Conic3d => VarietyKind::Conic3d,
            VarietySpec::RationalNormalCurve { degree } => {
                VarietyKind::RationalNormalCurve { degree: *degree }
            }
            VarietySpec::Quadric => VarietyKind::Quadric,
        }
    }

    pub fn from_kind(kind: &VarietyKind) -> Self {
        match kind {
            VarietyKind::Conic3d => VarietySpec::Conic3d,
            VarietyKind::RationalNormalCurve { degree } => {
                VarietySpec::RationalNormalCurve { degree: *degree }
            }
            VarietyKind::Quadric => VarietySpec::Quadric,
        }
    }
}

/// Projection operator entry: `"random"` or an explicit matrix.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ProjectionSpec {
    Named(String),
    Explicit(MatrixJson),
}

impl Default for ProjectionSpec {
    fn default() -> Self {
        ProjectionSpec::Named("random".into())
    }
}

/// Solver options carried by the configuration.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub damping: f64,
    pub residual_tol: f64,
    pub patience: usize,
    pub fd_step: f64,
    /// Number of seeded perturbation trials run by the solve command.
    pub trials: usize,
    /// Relative perturbation applied to the ground truth per trial.
    pub noise: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 60,
            damping: 1e-3,
            residual_tol: 1e-12,
            patience: 6,
            fd_step: 1e-6,
            trials: 20,
            noise: 1e-3,
        }
    }
}

impl SolverConfig {
    pub fn to_options(&self) -> SolverOptions {
        SolverOptions {
            max_iterations: self.max_iterations,
            damping: self.damping,
            residual_tol: self.residual_tol,
            patience: self.patience,
            fd_step: self.fd_step,
        }
    }
}

/// Named residual thresholds used by the command checks.
pub fn default_tolerances() -> BTreeMap<String, f64> {
    let mut t = BTreeMap::new();
    t.insert("correspondence".into(), 1e-9);
    t.insert("rank_gap".into(), 1e-8);
    t.insert("kruppa".into(), 1e-9);
    t.insert("classical_kruppa".into(), 1e-10);
    t.insert("kernel".into(), 1e-8);
    t.insert("roundtrip".into(), 1e-8);
    t.insert("align".into(), 1e-9);
    t.insert("recover_distance".into(), 1e-6);
    t.insert("census_fraction".into(), 0.95);
    t.insert("refit".into(), 1e-6);
    t.insert("conversion".into(), 1e-8);
    t
}

/// Scene configuration, parsed from JSON.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SceneConfig {
    pub m: usize,
    pub seed: u64,
    pub varieties: Vec<VarietySpec>,
    #[serde(default)]
    pub projections: [ProjectionSpec; 2],
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 3 {
            return Err(ProjvarError::InvalidConfig("m must be at least 3".into()));
        }
        if self.varieties.is_empty() {
            return Err(ProjvarError::InvalidConfig(
                "at least one model variety is required".into(),
            ));
        }
        for spec in &self.varieties {
            match spec {
                VarietySpec::Conic3d | VarietySpec::RationalNormalCurve { .. } => {
                    if self.m != 3 {
                        return Err(ProjvarError::InvalidConfig(format!(
                            "curve models are generated at m = 3, got m = {}",
                            self.m
                        )));
                    }
                }
                VarietySpec::Quadric => {
                    if self.m < 4 {
                        return Err(ProjvarError::InvalidConfig(
                            "a quadric hypersurface model has codimension 1 at m = 3; \
                             the model dimension must satisfy n <= m - 2, so m >= 4"
                                .into(),
                        ));
                    }
                }
            }
        }
        for spec in &self.projections {
            match spec {
                ProjectionSpec::Named(name) if name == "random" => {}
                ProjectionSpec::Named(name) => {
                    return Err(ProjvarError::InvalidConfig(format!(
                        "unknown projection spec '{name}'"
                    )));
                }
                ProjectionSpec::Explicit(rows) => {
                    let mat = cmat_from_json(rows)?;
                    if mat.shape() != (self.m, self.m + 1) {
                        return Err(ProjvarError::InvalidConfig(format!(
                            "explicit projection must be {}x{}",
                            self.m,
                            self.m + 1
                        )));
                    }
                }
            }
        }
        // Effective tolerances must stay positive.
        for (name, value) in &self.tolerances {
            if !value.is_finite() || *value <= 0.0 {
                return Err(ProjvarError::InvalidConfig(format!(
                    "tolerance '{name}' must be positive and finite"
                )));
            }
        }
        Ok(())
    }

    /// Defaults merged with the overrides carried by the configuration.
    pub fn effective_tolerances(&self) -> BTreeMap<String, f64> {
        let mut t = default_tolerances();
        for (k, v) in &self.tolerances {
            t.insert(k.clone(), *v);
        }
        t
    }

    /// Build the scene: operators from the specs, components from the kinds.
    pub fn build_scene(&self) -> Result<Scene> {
        self.validate()?;
        let kinds: Vec<VarietyKind> = self.varieties.iter().map(|s| s.to_kind()).collect();
        let explicit: Vec<Option<CMat>> = self
            .projections
            .iter()
            .map(|spec| match spec {
                ProjectionSpec::Named(_) => Ok(None),
                ProjectionSpec::Explicit(rows) => cmat_from_json(rows).map(Some),
            })
            .collect::<Result<_>>()?;
        match (&explicit[0], &explicit[1]) {
            (Some(m1), Some(m2)) => {
                let pair = ProjectionPair::new(
                    ProjectionOperator::new(m1.clone())?,
                    ProjectionOperator::new(m2.clone())?,
                )?;
                crate::scene::scene_with_pair(pair, &kinds, self.seed)
            }
            (None, None) => crate::scene::random_scene(self.m, &kinds, self.seed),
            _ => Err(ProjvarError::InvalidConfig(
                "projections must be both random or both explicit".into(),
            )),
        }
    }
}

/// Stored fundamental matrix for the matrix-only recovery path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FundamentalMatrixFile {
    pub m: usize,
    pub k: usize,
    pub entries: MatrixJson,
}

// ---------------------------------------------------------------------------
// Scene files.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImplicitJson {
    pub dim: usize,
    pub degree: usize,
    pub forms: Vec<VectorJson>,
}

impl ImplicitJson {
    pub fn from_variety(v: &ImplicitVariety) -> Self {
        ImplicitJson {
            dim: v.dim(),
            degree: v.degree(),
            forms: v.forms().iter().map(cvec_to_json).collect(),
        }
    }

    pub fn to_variety(&self) -> Result<ImplicitVariety> {
        ImplicitVariety::new(
            self.dim,
            self.degree,
            self.forms.iter().map(cvec_from_json).collect(),
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParametricJson {
    pub n: usize,
    pub m: usize,
    pub degree: usize,
    pub coeffs: MatrixJson,
}

impl ParametricJson {
    pub fn from_variety(v: &ParametricVariety) -> Self {
        ParametricJson {
            n: v.n(),
            m: v.m(),
            degree: v.degree(),
            coeffs: cmat_to_json(v.coeffs()),
        }
    }

    pub fn to_variety(&self) -> Result<ParametricVariety> {
        ParametricVariety::new(self.n, self.m, self.degree, cmat_from_json(&self.coeffs)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectedModelJson {
    pub param: ParametricJson,
    pub implicit: ImplicitJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gram: Option<MatrixJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual: Option<MatrixJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentJson {
    pub kind: VarietySpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<usize>,
    pub x_param: ParametricJson,
    pub x_implicit: ImplicitJson,
    pub projected: Vec<ProjectedModelJson>,
}

/// Serialized scene: configuration echo plus every generated model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneFile {
    pub config: SceneConfig,
    pub operators: [MatrixJson; 2],
    pub epipoles: [VectorJson; 2],
    pub components: Vec<ComponentJson>,
}

impl SceneFile {
    pub fn from_scene(scene: &Scene, config: &SceneConfig) -> Self {
        SceneFile {
            config: config.clone(),
            operators: [
                cmat_to_json(scene.pair.first.entries()),
                cmat_to_json(scene.pair.second.entries()),
            ],
            epipoles: [
                cvec_to_json(&scene.epipoles.e1),
                cvec_to_json(&scene.epipoles.e2),
            ],
            components: scene
                .components
                .iter()
                .map(|c| ComponentJson {
                    kind: VarietySpec::from_kind(&c.kind),
                    class: c.class_c,
                    x_param: ParametricJson::from_variety(&c.x_param),
                    x_implicit: ImplicitJson::from_variety(&c.x_implicit),
                    projected: c
                        .projected
                        .iter()
                        .map(|p| ProjectedModelJson {
                            param: ParametricJson::from_variety(&p.param),
                            implicit: ImplicitJson::from_variety(&p.implicit),
                            gram: p.gram.as_ref().map(|q| cmat_to_json(q.gram())),
                            dual: p.dual.as_ref().map(|q| cmat_to_json(q.gram())),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_scene(&self) -> Result<Scene> {
        let first = ProjectionOperator::new(cmat_from_json(&self.operators[0])?)?;
        let second = ProjectionOperator::new(cmat_from_json(&self.operators[1])?)?;
        let pair = ProjectionPair::new(first, second)?;
        let epipoles = crate::epipolar::epipoles(&pair.first, &pair.second)?;
        let components: Vec<SceneComponent> = self
            .components
            .iter()
            .map(|c| {
                let projected: Vec<crate::scene::ProjectedModel> = c
                    .projected
                    .iter()
                    .map(|p| {
                        Ok(crate::scene::ProjectedModel {
                            param: p.param.to_variety()?,
                            implicit: p.implicit.to_variety()?,
                            gram: p
                                .gram
                                .as_ref()
                                .map(|g| Quadric::new(cmat_from_json(g)?))
                                .transpose()?,
                            dual: p
                                .dual
                                .as_ref()
                                .map(|g| Quadric::new(cmat_from_json(g)?))
                                .transpose()?,
                        })
                    })
                    .collect::<Result<_>>()?;
                Ok(SceneComponent {
                    kind: c.kind.to_kind(),
                    class_c: c.class,
                    x_param: c.x_param.to_variety()?,
                    x_implicit: c.x_implicit.to_variety()?,
                    projected: projected.try_into().map_err(|_| {
                        ProjvarError::InvalidConfig("component needs exactly two views".into())
                    })?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Scene {
            m: pair.m(),
            seed: self.config.seed,
            pair,
            epipoles,
            components,
        })
    }
}
