use thiserror::Error;

/// Errors raised while building states, operators and certificates.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cutoff too small: need local dimension {needed}, got {got}")]
    CutoffTooSmall { needed: usize, got: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("scattering amplitude gamma_{index} is zero")]
    ZeroScatteringAmplitude { index: usize },

    #[error("scattering vector is not normalized (sum |gamma|^2 = {norm_sq})")]
    NotNormalizedScattering { norm_sq: f64 },

    #[error("leading coefficient is zero")]
    DegenerateLeadingCoefficient,

    #[error("coherent amplitudes {first} and {second} coincide")]
    CoincidentCoherentAmplitudes { first: usize, second: usize },

    #[error("Gram matrix condition number {condition:e} exceeds {threshold:e}")]
    IllConditionedGram { condition: f64, threshold: f64 },

    #[error("cat coefficient {index} is zero")]
    ZeroCatCoefficient { index: usize },

    #[error("block column {column} is not a valid block start")]
    BadBlockIndex { column: usize },

    #[error("{modes} modes exceeds the supported maximum of {max}")]
    TooManyModes { modes: usize, max: usize },

    #[error("state has zero norm")]
    ZeroState,

    #[error("search space of dimension {dim} exceeds the limit {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("operator is not invertible (singular value ratio {ratio:e})")]
    NotInvertible { ratio: f64 },

    #[error("mode {mode} out of range for a {modes}-mode state")]
    BadMode { mode: usize, modes: usize },

    #[error("states have different mode counts ({left} vs {right})")]
    IncomparableModes { left: usize, right: usize },

    #[error("certificate replay fidelity {fidelity} below 1 - {tol_fid}")]
    VerificationFailed { fidelity: f64, tol_fid: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
