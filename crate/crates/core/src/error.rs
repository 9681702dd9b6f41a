use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid weight {0}: expected an even integer in the supported range")]
    InvalidWeight(u32),
    #[error("the cusp space of weight {0} is zero-dimensional")]
    DimensionZero(u32),
    #[error("series order {have} is too small, need at least {need}")]
    InsufficientOrder { have: usize, need: usize },
    #[error("weight {k}: T_2 spectrum is degenerate (roots closer than 2^-{bits})")]
    DegenerateSpectrum { k: u32, bits: u32 },
    #[error("weight {k}: characteristic polynomial of T_2 has {real} real roots out of {degree}")]
    ComplexRoot { k: u32, real: usize, degree: usize },
    #[error("lambda({0}) is not available; extend the form to more coefficients")]
    MissingPrime(u64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("truncation search exceeded the cap of {cap} terms")]
    NoConvergence { cap: u64 },
    #[error("quadrature stalled on panel [{a}, {b}] at depth {depth}")]
    QuadratureStall { a: f64, b: f64, depth: u32 },
    #[error("form has {have} coefficients, {need} required")]
    InsufficientCoeffs { have: usize, need: usize },
    #[error("mass came out negative ({0}); cancellation exceeded the precision budget")]
    NegativeMass(f64),
    #[error("forms have different weights ({0} and {1})")]
    WeightMismatch(u32, u32),
    #[error("all combination coefficients are zero")]
    AllZeroCoeffs,
    #[error("summation range is empty: {0}")]
    InsufficientRange(String),
    #[error("weight {k} has cusp dimension {dim}, at least 2 required")]
    DimensionTooSmall { k: u32, dim: usize },
    #[error("value exp({0}) is outside the representable range")]
    Overflow(f64),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
}
