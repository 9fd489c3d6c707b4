use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("projected intervals overlap; relative winding number is undefined")]
    Overlap,
    #[error("grid of {grid} points is too coarse for cutoff {cutoff} (need at least {needed})")]
    GridTooCoarse { grid: usize, cutoff: usize, needed: usize },
    #[error("singular values cluster at the rank threshold (smallest gap ratio {ratio:.3e})")]
    IllConditioned { ratio: f64 },
    #[error("mollifier width {0} outside (0, pi/2)")]
    EpsilonOutOfRange(f64),
    #[error("operators live on different windows ({0} vs {1})")]
    WindowMismatch(usize, usize),
    #[error("separation {separation} violates eps1 + eps2 < separation < 2pi - eps1 - eps2 (eps1 + eps2 = {width})")]
    SeparationViolation { separation: f64, width: f64 },
    #[error("operator is not diagonal in the mode basis (off-diagonal norm {0:.3e})")]
    NotDiagonal(f64),
    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("Krylov exponential did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("one-particle operator is not in the pure shift class: {0}")]
    WrongClass(String),
    #[error("pseudo-inverse failed: {0}")]
    PseudoInverseFailure(String),
    #[error("no probe pair has a significant matrix element")]
    NoSignificantEntries,
    #[error("window cutoff {cutoff} too small: coefficient tail {tail:.3e} exceeds {tolerance:.3e}")]
    WindowTooSmall { cutoff: usize, tail: f64, tolerance: f64 },
    #[error("charge sector {0} has no usable probes")]
    SectorEmpty(i64),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("no test function in the space matches the transformed support of {0}")]
    UnknownTransformedFunction(String),
    #[error("spin {0} exceeds 1/2")]
    SpinOutOfRange(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
