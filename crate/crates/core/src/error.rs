use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edge {edge} is a self-loop at vertex {vertex}")]
    SelfLoop { edge: usize, vertex: usize },
    #[error("vertex {vertex} out of range for a graph with {count} vertices")]
    VertexOutOfRange { vertex: usize, count: usize },
    #[error("source set has odd cardinality {0}")]
    OddSourceSet(usize),
    #[error("configuration is not in F_A: some cluster meets the sources an odd number of times")]
    NotInSourceEvent,
    #[error("{what}: size {size} exceeds guard {limit}")]
    SizeGuard { what: &'static str, size: u128, limit: u128 },
    #[error("measure has empty support (all weights vanish)")]
    EmptySupport,
    #[error("configuration spaces do not match")]
    SpaceMismatch,
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("vertex {vertex} has degree {degree}, above the allowed {max}")]
    DegreeViolation { vertex: usize, degree: usize, max: usize },
    #[error("chain is not divergence-free")]
    NotDivergenceFree,
    #[error("graph or complex carries no geometry")]
    MissingGeometry,
    #[error("complex has no dual pairing")]
    MissingDualPairing,
    #[error("cell configuration is not k-spanning")]
    NotSpanning,
    #[error("rejection sampler gave up after {0} proposals")]
    RejectionBudget(u64),
    #[error("conditioning on a zero-mass configuration")]
    ZeroMass,
    #[error("no direct sampler registered and no rejection fallback for this direction")]
    NoSampler,
    #[error("unknown registry row `{0}`")]
    UnknownRow(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn guard(what: &'static str, size: u128, limit: u128) -> Result<()> {
    if size > limit {
        Err(Error::SizeGuard { what, size, limit })
    } else {
        Ok(())
    }
}

/// Default cap on exhaustive evaluations.
pub const ENUMERATION_GUARD: u128 = 1 << 24;
