use thiserror::Error;

/// Errors surfaced by the operator and lattice layers.
#[derive(Error, Debug)]
pub enum QhaError {
    #[error("matrix is not Hermitian (max residual {0:.3e})")]
    NotHermitian(f64),
    #[error("operator is not positive (min eigenvalue {0:.3e})")]
    NotPositive(f64),
    #[error("Schatten exponent must satisfy p >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("eigenvalue {0} outside the domain of the scalar map")]
    DomainError(f64),
    #[error("frame operator is numerically singular (min eigenvalue {0:.3e})")]
    SingularFrame(f64),
    #[error("pair is not a frame (lower bound {0:.3e})")]
    NotAFrame(f64),
    #[error("signal lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("negative weight {0} where non-negative weights are required")]
    NegativeWeight(f64),
    #[error("region contains no grid points")]
    EmptyRegion,
    #[error("boxes {0}x{1} do not tile the {2}x{2} grid")]
    NonTilingBoxes(usize, usize, usize),
    #[error("lattice parameters ({0}, {1}) do not divide L = {2}")]
    NonDivisorLattice(usize, usize, usize),
    #[error("operator is not a density operator for the lattice (max |F - I| = {0:.3e})")]
    NotDensityOperator(f64),
    #[error("delta must lie in (0, 1), got {0}")]
    BadDelta(f64),
    #[error("Fourier-Wigner transform vanishes somewhere (min modulus {0:.3e})")]
    FourierWignerZero(f64),
    #[error("region radius {0} must be smaller than L/2 = {1}")]
    RegionTooLarge(f64, f64),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("serialization error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QhaError>;
