use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix has no columns")]
    EmptyMatrix,
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid dimension: {0}")]
    InvalidDims(String),
    #[error("innovation block {block} is not orthogonal to the intersection basis (max |U^T U_k| = {overlap:.3e})")]
    NotOrthogonal { block: usize, overlap: f64 },
    #[error("block {block} lost rank during orthonormalization ({rank} < {cols})")]
    RankDeficient { block: usize, rank: usize, cols: usize },
    #[error("coefficient column {column} of cluster {cluster} has zero norm")]
    ZeroCoefficient { cluster: usize, column: usize },
    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("problem too large for the exact LP oracle: {0}")]
    TooLarge(String),
    #[error("LP is infeasible")]
    Infeasible,
    #[error("LP is unbounded")]
    Unbounded,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("node {node} has zero degree in the affinity graph")]
    IsolatedNode { node: usize },
    #[error("invalid number of clusters K={k} for {n} points")]
    InvalidK { k: usize, n: usize },
    #[error("s_hat={s_hat} must be below the numerical rank {rank}")]
    RankTooLow { s_hat: usize, rank: usize },
    #[error("point {index} lies in the removed dominant span")]
    DegeneratePoint { index: usize },
    #[error("need at least two singular values")]
    TooFewValues,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("data matrix carries no ground-truth labels")]
    MissingLabels,
    #[error("points do not lie in the span of the supplied basis (residual {0:.3e})")]
    NotInSpan(f64),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("Gram matrix D D^T is singular; enable reduce_to_span")]
    SingularGram,
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("SVD did not converge")]
    NoConvergence,
}
