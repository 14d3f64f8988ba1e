use thiserror::Error;

/// Errors produced by the distribution engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is singular to working precision (pivot {pivot:e}, scale {scale:e})")]
    SingularMatrix { pivot: f64, scale: f64 },
    #[error("sample size {0} is below the minimum of 2")]
    InvalidSampleSize(usize),
    #[error("sample size {n} exceeds the supported maximum of {max}")]
    SampleSizeTooLarge { n: usize, max: usize },
    #[error("reward vector has no positive entry")]
    AllZeroReward,
    #[error("statistic gives weight to no SFS entry")]
    AllZeroMask,
    #[error("coefficient c_{} is negative", .index + 1)]
    NonPositiveCoefficient { index: usize },
    #[error("block representation needs {rows} rows, above the cap of {cap}")]
    BlockMatrixTooLarge { rows: usize, cap: usize },
    #[error("inversion grid too coarse: CDF endpoints deviate from 0/1 by {deviation:.4}")]
    GridTooCoarse { deviation: f64 },
    #[error("unknown statistic `{0}`")]
    UnknownName(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for failures of the numerical machinery as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::SingularMatrix { .. } | Error::GridTooCoarse { .. })
    }
}
