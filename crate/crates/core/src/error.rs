use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field contains a non-finite value at flat index {index}")]
    NonFiniteField { index: usize },

    #[error(
        "Hermitian symmetry violated at mode {mode:?}: |coeff(-k) - conj(coeff(k))| = {violation:.3e} \
         exceeds {tolerance:.3e} relative to the largest coefficient"
    )]
    HermitianViolation {
        mode: Vec<i64>,
        violation: f64,
        tolerance: f64,
    },

    #[error(
        "imaginary residue {residue:.3e} after inverse transform exceeds {tolerance:.3e} relative"
    )]
    ImaginaryResidue { residue: f64, tolerance: f64 },

    #[error(
        "negative-power multiplier requires a mean-zero field: |zero mode| = {zero_mode:.3e} \
         exceeds 1e-12 of the largest coefficient {max_coeff:.3e}"
    )]
    MeanZeroRequired { zero_mode: f64, max_coeff: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("blow-up detected at t = {t_star}")]
    BlowUp { t_star: f64 },

    #[error("quadrature did not converge: achieved relative tolerance {achieved:.3e}, requested {requested:.3e}")]
    QuadratureNoConvergence { achieved: f64, requested: f64 },

    #[error("rate fit rejected: {0}")]
    FitRejected(String),

    #[error("exponent condition violated: {0}")]
    ConditionViolated(String),
}

pub type Result<T> = std::result::Result<T, Error>;
