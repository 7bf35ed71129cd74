use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter epsilon = {0} must lie strictly inside (0, 1)")]
    EpsilonOutOfRange(f64),

    #[error("quadrature order {requested} unsupported (maximum {max})")]
    UnsupportedOrder { requested: usize, max: usize },

    #[error("quadrature order {have} too small, need at least {need}")]
    InsufficientQuadrature { have: usize, need: usize },

    #[error("symbol degree {degree} exceeds the cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("Gaussian decay mismatch: {0} vs {1}")]
    AlphaMismatch(f64, f64),

    #[error("heat flow undefined for t = {0}")]
    InvalidHeatTime(f64),

    #[error("symbol parse error: {0}")]
    Parse(String),

    #[error("grid function does not decay at the grid ends (|u| = {0:e})")]
    NonDecaying(f64),

    #[error("grid nodes must be strictly increasing")]
    UnsortedGrid,

    #[error("coefficient vector has divergent norm")]
    DivergentNorm,

    #[error("evaluation bound violated: |f(z)| = {value:e} > {bound:e}")]
    BoundViolated { value: f64, bound: f64 },

    #[error("expansion order {requested} exceeds the cap {cap}")]
    OrderCap { requested: usize, cap: usize },

    #[error("symbol has polynomial momentum dependence without decay; kernel is a distribution")]
    DistributionKernel,

    #[error("anisotropy too strong for the quadrature (epsilon = {0})")]
    QuadratureResolution(f64),

    #[error("residuals too small to fit (max {0:e})")]
    DegenerateFit(f64),

    #[error("slope fit needs at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported symbol: {0}")]
    UnsupportedSymbol(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::EpsilonOutOfRange(eps))
    }
}
