use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode {mode} is outside the register (1..={modes})")]
    ModeOutOfRange { mode: u32, modes: usize },
    #[error("mode index must be at least 1")]
    ZeroMode,
    #[error("register of {modes} modes exceeds the cap of {cap}")]
    TooManyModes { modes: usize, cap: usize },
    #[error("invalid statistics: {0}")]
    InvalidStatistics(String),
    #[error("states belong to different register layouts")]
    LayoutMismatch,
    #[error("invalid ket {0:?}")]
    InvalidKet(String),
    #[error("invalid operator string {0:?}")]
    InvalidOperatorString(String),
    #[error("hop endpoints must differ (got {0} -> {0})")]
    DegenerateHop(u32),
    #[error("cannot place {k} particles in {modes} modes")]
    InvalidSector { modes: usize, k: usize },
    #[error("sector dimension {dim} exceeds the limit of {cap}")]
    SectorTooLarge { dim: usize, cap: usize },
    #[error("dense oracle limited to {cap} modes, requested {modes}")]
    OracleCapExceeded { modes: usize, cap: usize },
    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("wavelength must be positive, got {0}")]
    InvalidWavelength(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("shot sampling requires an explicit seed")]
    ShotsWithoutSeed,
    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),
}
