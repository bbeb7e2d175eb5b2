use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("degenerate momentum: {0}")]
    DegenerateMomentum(String),
    #[error("energy {0} outside the dimer band")]
    OutOfBand(f64),
    #[error("bound state E_b={energy} too close to the band edge (kappa {kappa:e})")]
    PoorLocalization { energy: f64, kappa: f64 },
    #[error("channel at threshold: {0}")]
    ZeroVelocity(String),
    #[error("singular linear system (condition estimate {cond:e})")]
    SingularSystem { cond: f64 },
    #[error("channel {0} is closed")]
    ClosedChannel(usize),
    #[error("analytic continuation outside trust region: {0}")]
    ContinuationFailure(String),
    #[error("rational fit diverged (best residual {0:e})")]
    FitDiverged(f64),
    #[error("pole refinement did not converge from {re}{im:+}i")]
    NoConvergence { re: f64, im: f64 },
    #[error("degenerate pole near {re}{im:+}i")]
    DegeneratePole { re: f64, im: f64 },
    #[error("ill-conditioned expansion (condition {0:e})")]
    IllConditionedExpansion(f64),
    #[error("initial state annihilated by the wall (kept fraction {0:e})")]
    EmptyState(f64),
    #[error("time step solve failed: {0}")]
    SolveFailure(String),
    #[error("insufficient separation: {0}")]
    InsufficientSeparation(String),
    #[error("eigensolver failed: {0}")]
    Eigen(String),
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParams(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
