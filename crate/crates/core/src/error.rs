use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeapError {
    #[error("del_min on an empty heap")]
    EmptyHeap,
    #[error("randomized swap probability {0} is outside [0, 1]")]
    Probability(String),
    #[error("heap violates the {strategy} invariants: {first}")]
    Invalid { strategy: String, first: String },
    #[error("W_k family needs k >= 2, got {0}")]
    FamilyIndex(u32),
    #[error("potential kind {0} is not supported here")]
    UnsupportedPotential(String),
    #[error("convex combination: {0}")]
    Convex(String),
    #[error("workload: {0}")]
    Workload(String),
    #[error("scale out of range: {0}")]
    Scale(String),
}

/// Failure to parse the canonical tree text form.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("tree text, byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

/// Errors raised while parsing or replaying a heap program.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("instruction {index}: register r{reg} read before it was written")]
    ReadBeforeWrite { index: usize, reg: u32 },
    #[error("instruction {index}: register r{reg} written twice")]
    WrittenTwice { index: usize, reg: u32 },
    #[error("instruction {index}: register r{reg} read twice")]
    ReadTwice { index: usize, reg: u32 },
    #[error("instruction {index}: del_min on an empty heap")]
    EmptyHeap { index: usize },
    #[error("program is empty")]
    Empty,
}
