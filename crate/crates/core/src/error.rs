use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("metric is not positive at r = {r}: a = {a}, b = {b}")]
    NonPositiveMetric { r: f64, a: f64, b: f64 },
    #[error("areal radius b is not strictly increasing near r = {r}")]
    NonMonotoneArealRadius { r: f64 },
    #[error("grid has {nodes} nodes, need at least {min}")]
    GridTooCoarse { nodes: usize, min: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("finite-difference halo around r = {r} leaves the grid")]
    BoundaryTooClose { r: f64 },
    #[error("radius {r} outside interpolation range [{lo}, {hi}]")]
    InterpolationOutOfRange { r: f64, lo: f64, hi: f64 },
    #[error("curvature blow-up: sup|Rm| = {sup_rm:e} exceeds threshold {threshold:e} at t = {t}")]
    CurvatureBlowUp { sup_rm: f64, threshold: f64, t: f64 },
    #[error("asymptotics violated: outer |a-1| r^tau = {value:e} exceeds {limit:e} at t = {t}")]
    AsymptoticsViolated { value: f64, limit: f64, t: f64 },
    #[error("degenerate grid: zero proper spacing at node {index}")]
    DegenerateGrid { index: usize },
    #[error("time step {dt:e} violates stability bound {limit:e}")]
    StabilityViolated { dt: f64, limit: f64 },
    #[error("states live on different grids or dimensions")]
    MismatchedGrids,
    #[error("mass is ill-defined: tau = {tau} must exceed (n-2)/2 = {bound}")]
    MassIllDefined { tau: f64, bound: f64 },
    #[error("operation requires dimension {expected}, metric has n = {found}")]
    WrongDimension { expected: usize, found: usize },
    #[error("radius {r} is outside the asymptotic regime (needs r >= {min})")]
    OutsideAsymptoticRegime { r: f64, min: f64 },
    #[error("decay fit needs >= 8 samples spanning a decade, got {samples} samples spanning {span:.3}x")]
    InsufficientSpan { samples: usize, span: f64 },
    #[error("window of {len} records is too short, need >= {min}")]
    WindowTooShort { len: usize, min: usize },
    #[error("weighted norm diverges: outer integrand decays like r^-{exponent:.3}, needs faster than r^-1")]
    DivergentNorm { exponent: f64 },
    #[error("amplitude too large: {0}")]
    AmplitudeTooLarge(String),
    #[error("unsupported dimension n = {0}")]
    UnsupportedDimension(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
