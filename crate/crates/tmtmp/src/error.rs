use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the moment-problem pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian: max deviation {deviation}")]
    NotHermitian { deviation: f64 },

    #[error("moment matrix is not positive semidefinite: min eigenvalue {min_eigenvalue}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("parameter is not a contraction: largest singular value {sigma_max}")]
    NotContractive { sigma_max: f64 },

    #[error("parameter is not unitary: max deviation {deviation}")]
    NotUnitary { deviation: f64 },

    #[error("linear system is singular")]
    SingularMatrix,

    #[error("evaluation point must lie in the open unit disk: |zeta| = {modulus}")]
    OutsideDisk { modulus: f64 },

    #[error("transform has a pole at an atom of the measure")]
    PoleOnAtom,

    #[error("problem is determinate (zero defect dimension); no free parameter")]
    Determinate,

    #[error("point is not of regular type: domain image dimension {got}, expected {expected}")]
    NotRegularPoint { expected: usize, got: usize },

    #[error("defect basis has dimension {got}, expected {expected}")]
    DefectDimension { expected: usize, got: usize },

    #[error("Hermitian part of the transform is not positive semidefinite: min eigenvalue {min_eigenvalue}")]
    NotHerglotz { min_eigenvalue: f64 },

    #[error("invalid arc: {0}")]
    InvalidArc(String),

    #[error("invalid gap set: {0}")]
    InvalidGapSet(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}
