use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("urn capacities must be positive (got n1={n1}, n2={n2})")]
    ZeroCapacity { n1: u32, n2: u32 },

    #[error("impossible color count: nw={nw} exceeds the {n} balls in the model")]
    ImpossibleColorCount { nw: u32, n: u32 },

    #[error("trivial chain: one color is absent, so the state space has a single point")]
    TrivialChain,

    #[error("model ({n1},{n2},{nw}) needs canonicalization: nw must not exceed min(n1, n2)")]
    NeedsCanonicalization { n1: u32, n2: u32, nw: u32 },

    #[error(
        "model ({n1},{n2},{nw}) cannot be canonicalized by urn or color swaps: \
         both color counts exceed the smaller urn"
    )]
    NotCanonicalizable { n1: u32, n2: u32, nw: u32 },

    #[error("{what} index {index} out of range 0..={max}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        max: usize,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("eigenvector is identically zero")]
    ZeroVector,

    #[error("vector is not orthonormal under the stationary measure")]
    NotOrthonormal,

    #[error("chain does not converge: |lambda_{k}| = 1 (lambda_{k} = {eigenvalue})")]
    NonConvergent { k: usize, eigenvalue: String },

    #[error("bounds are stated for balanced urns only (got n1={n1}, n2={n2})")]
    Unbalanced { n1: u32, n2: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
