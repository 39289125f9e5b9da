use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApError {
    #[error("product has {count} modes after truncation, cap is {cap}")]
    ProductOverflow { count: usize, cap: usize },

    #[error("grid functions live on incompatible grids")]
    GridMismatch,

    #[error("tail model cannot be integrated against the kernel: {0}")]
    TailUnbounded(String),

    #[error("green kernel requires a nonzero real part, got {0}")]
    ZeroRealPart(f64),

    #[error("shifted roots {0} and {1} coincide")]
    DegenerateRoots(usize, usize),

    #[error("roots {0} and {1} have coinciding real parts")]
    RepeatedRealParts(usize, usize),

    #[error("no convergence after {iterations} iterations (last step {last_step:.3e})")]
    NoConvergence { iterations: usize, last_step: f64 },

    #[error("beta = {beta} must lie in [0, {limit})")]
    BetaTooLarge { beta: f64, limit: f64 },

    #[error("L0 = {0} is not below one")]
    L0GreaterThanOne(f64),

    #[error("L0 of the theta-linearized problem = {0} is not below one")]
    L0ThetaGreaterThanOne(f64),

    #[error("iterate left the ball at step {iteration}: norm {norm:.6e} > radius {radius:.6e}")]
    BallEscape { iteration: usize, norm: f64, radius: f64 },

    #[error("existence certificate failed for roots {0:?}")]
    PerRootFailure(Vec<usize>),

    #[error("certificate not satisfied: {0}")]
    CertificateFailed(String),

    #[error("step size underflow at t = {0}")]
    StepUnderflow(f64),

    #[error("{stage} stage: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<ApError>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl ApError {
    pub fn in_stage(self, stage: &'static str) -> Self {
        ApError::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error once stage labels are peeled off.
    pub fn root_cause(&self) -> &ApError {
        match self {
            ApError::Stage { source, .. } => source.root_cause(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, ApError>;
