use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} is outside the domain of {family}")]
    InvalidParameter {
        family: &'static str,
        name: &'static str,
        value: f64,
    },
    #[error("probability level {0} is not in (0, 1)")]
    ProbabilityOutOfRange(f64),
    #[error("weight {index} = {value} is not a positive finite number")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("weights sum to {sum}, expected 1")]
    WeightsNotNormalized { sum: f64 },
    #[error("expected at least {min} components, got {found}")]
    TooFewComponents { min: usize, found: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("transform is not convex: f((x+y)/2) exceeds the chord by {gap} at x = {x}, y = {y}")]
    NotConvex { x: f64, y: f64, gap: f64 },
    #[error("transform is not non-decreasing between x = {x} and y = {y}")]
    NotMonotone { x: f64, y: f64 },
    #[error("transform must satisfy f(0) = 0, got {0}")]
    NotAnchored(f64),
    #[error("transform is constant on the validation grid")]
    ConstantTransform,
    #[error("distribution has an atom at +infinity (mass {0})")]
    InfiniteAtom(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("correlation matrix is not positive semi-definite")]
    NotPositiveSemidefinite,
    #[error("correlation matrix is not symmetric with unit diagonal")]
    MalformedCorrelation,
    #[error("equicorrelation {rho} is below the feasibility bound {bound} for dimension {n}")]
    InfeasibleCorrelation { rho: f64, bound: f64, n: usize },
    #[error("dependence model: {0}")]
    InvalidDependence(String),
    #[error("quadrature did not reach the accuracy target: estimate {estimate}, error bound {error}")]
    Quadrature { estimate: f64, error: f64 },
    #[error("marginal {0} is not continuous")]
    DiscontinuousMarginal(usize),
    #[error("scaling hypothesis P(cX > t) >= c P(X > t) fails at c = {c}, t = {t}")]
    ScalingHypothesis { c: f64, t: f64 },
    #[error("weights are not ordered by majorization (partial sum {k} violates)")]
    NotMajorized { k: usize },
    #[error("generalized mean power r = {0} must be non-negative")]
    NegativePower(f64),
    #[error("sample size must be positive")]
    EmptySample,
}
