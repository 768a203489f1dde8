//! Error type shared by every module of the crate.

use thiserror::Error;

/// Unified error for constructor invariants, numerical failures, and I/O.
#[derive(Debug, Error)]
pub enum ModelError {
    /// A constructor argument violated a documented invariant.
    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },

    /// Quadrature was asked to integrate NaN or infinity.
    #[error("non-finite integrand")]
    NonFiniteIntegrand,

    /// The diffusion coefficient field became non-finite.
    #[error("diverged coefficient")]
    DivergedCoefficient,

    /// Threshold evaluation with p(x) = 2 somewhere (exponent 1/(2-p) blows up).
    #[error("degenerate exponent: p = 2 at node ({i}, {j})")]
    DegenerateExponent { i: usize, j: usize },

    /// A spectral denominator is not positive; the step size must shrink.
    #[error("indefinite denominator: D = {min_d:.6e} at mode ({m}, {l})")]
    IndefiniteDenominator { min_d: f64, m: usize, l: usize },

    /// Nehari projection of the zero field is undefined.
    #[error("zero field")]
    ZeroField,

    /// A bisection bracket failed to straddle a root.
    #[error("no sign change on [{lo:.6e}, {hi:.6e}]")]
    NoSignChange { lo: f64, hi: f64 },

    /// Minimization over an empty trial set.
    #[error("empty trial set")]
    EmptyTrialSet,

    /// A theorem evaluator was invoked outside its hypotheses.
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    /// An imaging pipeline blew up before reaching its stop time.
    #[error("{pipeline} diverged: reduce t_stop or k")]
    FilterDiverged { pipeline: &'static str },

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// On-disk data did not match the expected format.
    #[error("malformed {what}: {why}")]
    Malformed { what: &'static str, why: String },
}

pub type Result<T> = std::result::Result<T, ModelError>;
