use thiserror::Error;

/// Errors raised by the reduction library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("commutator leaves the span of the basis (residual {residual:.3e})")]
    ClosureViolation { residual: f64 },

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("invalid action: {0}")]
    InvalidAction(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("point is off the manifold (residual {residual:.3e})")]
    OffManifold { residual: f64 },

    #[error("vector is not tangent to the manifold (residual {residual:.3e})")]
    OffTangent { residual: f64 },

    #[error("inertia tensor is degenerate on the orthogonal of the isotropy algebra (min eigenvalue {min_eigenvalue:.3e})")]
    Degenerate { min_eigenvalue: f64 },

    #[error("horizontal lift system is rank deficient at the section point")]
    SectionDegenerate,

    #[error("finite-difference step left the chart domain: {0}")]
    FdStepFailure(String),

    #[error("observable is not invariant under the residual isotropy (residual {residual:.3e})")]
    InvarianceViolation { residual: f64 },

    #[error("could not align point to the section: {0}")]
    CanonicalizationFailure(String),

    #[error("integration step left the section domain at t = {t}")]
    StepOutOfDomain { t: f64 },

    #[error("orbit tangent has no exact generator (least-squares residual {residual:.3e})")]
    RepresentativeAmbiguity { residual: f64 },

    #[error("scenario {scenario} failed self check `{invariant}`: {detail}")]
    ScenarioSelfCheckFailure {
        scenario: String,
        invariant: String,
        detail: String,
    },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
