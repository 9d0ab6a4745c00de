use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scale: rescaling factor must be positive, got {0}")]
    InvalidScale(f64),

    #[error("point {0:?} is outside the field's resolved region")]
    OutOfBounds([f64; 3]),

    #[error("degenerate height: H(p, r) = {h} below threshold at r = {r}")]
    DegenerateHeight { r: f64, h: f64 },

    #[error("degenerate window: sphere normalization {0} vanishes")]
    DegenerateWindow(f64),

    #[error("every radius on the ladder has degenerate height")]
    AllRadiiDegenerate,

    #[error("solver failed to converge: relative residual {residual} after {iterations} iterations")]
    SolverDiverged { residual: f64, iterations: usize },

    #[error("ball family is not disjoint: balls {0} and {1} overlap")]
    OverlappingBalls(usize, usize),

    #[error("stratum index k = {k} out of range for dimension {dim}")]
    BadStratumIndex { k: usize, dim: usize },

    #[error("brute-force beta oracle supports dim = 2, k = 1 only (got dim = {dim}, k = {k})")]
    UnsupportedBruteForce { dim: usize, k: usize },

    #[error("{0}")]
    InvalidInput(String),

    #[error("covering did not terminate within {0} tree alternations")]
    CoverDepthExceeded(usize),

    #[error("tree recursion exceeded depth {0}")]
    TreeDepthExceeded(usize),

    #[error("point {0:?} is not a flat boundary critical point")]
    NotBoundaryFlatCritical([f64; 3]),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
