use thiserror::Error;

/// Errors surfaced by the numerical routines.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("grid length {0} is not a power of two (need 2^k, k >= 1)")]
    NonPowerOfTwo(usize),

    #[error("invalid support [{lo}, {hi}): endpoints must be finite with lo < hi")]
    InvalidSupport { lo: f64, hi: f64 },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("omega_max must be positive, got {0}")]
    OmegaMaxNonPositive(f64),

    #[error(
        "spectrum is not Hermitian-symmetric: max deviation {dev:.3e} exceeds tolerance {tol:.3e}"
    )]
    AsymmetricSpectrum { dev: f64, tol: f64 },

    #[error(
        "spectral tail beyond {band_fraction} * omega_max carries {fraction:.3e} of the \
         multiplier-weighted energy (threshold {threshold:.3e}); use a larger omega_max \
         (finer grid step)"
    )]
    SpectralTail {
        fraction: f64,
        threshold: f64,
        band_fraction: f64,
    },

    #[error("not a density: {reason}")]
    NotADensity { reason: String },

    #[error(
        "kernel tail mass check failed: |integral - 1| = {deficit:.3e} exceeds {tol:.3e}; \
         widen the kernel support"
    )]
    KernelTailMass { deficit: f64, tol: f64 },

    #[error("not a characteristic function: {reason}")]
    NotACharacteristicFunction { reason: String },

    #[error("sample is empty")]
    EmptySample,

    #[error("need at least 2 replications, got {0}")]
    TooFewReplications(usize),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("finite-difference step {0:.3e} underflows the coefficient scale")]
    StepUnderflow(f64),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
