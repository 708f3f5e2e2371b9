use thiserror::Error;

/// Errors shared across the library modules.
#[derive(Debug, Error)]
pub enum ProjvarError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("grade overflow: grades {0} + {1} exceed ambient dimension {2}")]
    GradeOverflow(usize, usize, usize),
    #[error("grade underflow: grades {0} + {1} below ambient dimension {2}")]
    GradeUnderflow(usize, usize, usize),
    #[error("zero multivector where a nonzero one is required")]
    ZeroMultivector,
    #[error("input is not decomposable within tolerance")]
    NotDecomposable,
    #[error("input points are linearly dependent within tolerance")]
    DependentPoints,
    #[error("matrix is rank deficient: {0}")]
    RankDeficient(String),
    #[error("projection applied at its own center")]
    SingularProjection,
    #[error("order parameter k={0} out of range for m={1}")]
    OrderOutOfRange(usize, usize),
    #[error("centers of projection coincide")]
    CoincidentCenters,
    #[error("singular matrix: {0}")]
    SingularMatrix(String),
    #[error("degenerate decomposition persisted after {0} retries")]
    DegenerateDecomposition(usize),
    #[error("rank pattern violated: {0}")]
    RankPatternViolated(String),
    #[error("epipole could not be recovered unambiguously")]
    AmbiguousEpipole,
    #[error("epipole is bilinearly isotropic; resample the scene")]
    IsotropicEpipole,
    #[error("linear system is inconsistent: residual {0:.3e}")]
    InconsistentSystem(f64),
    #[error("probe point does not reach the cone: best residual {0:.3e}")]
    ProbeOffCone(f64),
    #[error("base point of the parametric map (all components vanish)")]
    BasePoint,
    #[error("center of projection lies on the variety")]
    CenterOnVariety,
    #[error("not enough samples: got {got}, need at least {need}")]
    InsufficientSamples { got: usize, need: usize },
    #[error("no vanishing forms found at the requested degree")]
    NoForms,
    #[error("degenerate pencil: the restricted form vanishes identically")]
    DegeneratePencil,
    #[error("hyperplane contains the curve")]
    HyperplaneContainsCurve,
    #[error("smooth parameter point required: Jacobian is singular there")]
    SingularJacobian,
    #[error("interpolation lattice is ill-conditioned (cond {0:.3e})")]
    IllConditionedLattice(f64),
    #[error("genericity resampling exhausted after {0} attempts: {1}")]
    GenericityExhausted(usize, String),
    #[error("epipolar constraint violated: residual {0:.3e}")]
    EpipolarViolation(f64),
    #[error("degenerate triangulation: inputs sit on the baseline")]
    BaselineDegenerate,
    #[error("branch fiber: {0}")]
    BranchFiber(String),
    #[error("fewer than half of the sampled fibers are clean ({clean}/{total}); re-seed the scene")]
    TooFewCleanFibers { clean: usize, total: usize },
    #[error("scene does not carry the data required: {0}")]
    SceneUnsupported(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("ground truth is inconsistent: residual {0:.3e}")]
    InconsistentGroundTruth(f64),
}

pub type Result<T> = std::result::Result<T, ProjvarError>;
