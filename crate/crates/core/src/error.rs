use thiserror::Error;

/// Everything that can go wrong while loading or computing with towers.
///
/// Structural violations always name the first offending witness in index
/// order so that diagnostics are reproducible.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("malformed instance: {0}")]
    Shape(String),
    #[error("levels are not nested prefixes: {0}")]
    NestingViolation(String),
    #[error("triangle inequality fails at level {level}: d({i},{k}) > d({i},{j}) + d({j},{k})")]
    TriangleViolation { level: usize, i: usize, j: usize, k: usize },
    #[error("level {level} metric has a bad entry at ({i},{j}): {reason}")]
    InvalidMetric {
        level: usize,
        i: usize,
        j: usize,
        reason: &'static str,
    },
    #[error("zero pairs of levels {level} and {} disagree at ({i},{j})", level + 1)]
    SubspaceViolation { level: usize, i: usize, j: usize },
    #[error("strict mode: level {} does not restrict to level {level} at ({i},{j})", level + 1)]
    StrictViolation { level: usize, i: usize, j: usize },
    #[error("index {index} out of range for a set of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("level mismatch: {0}")]
    LevelMismatch(String),
    #[error("level {level} out of range (tower has {levels} levels)")]
    LevelOutOfRange { level: usize, levels: usize },
    #[error("relation on level {level} is not reflexive at {index}")]
    NotReflexive { level: usize, index: usize },
    #[error("multiples are defined for k >= 1 only")]
    ZeroMultiple,
    #[error("pseudometric is not uniform on level {level}: positive at zero pair ({i},{j})")]
    NotUniform { level: usize, i: usize, j: usize },
    #[error("sequence is not monotone: d_{level}({i},{j}) > d_{}({i},{j})", level + 1)]
    NotMonotone { level: usize, i: usize, j: usize },
    #[error("relation is not an entourage of level {level}: misses zero pair ({i},{j})")]
    NotAnEntourage { level: usize, i: usize, j: usize },
    #[error("entourage sequence starts at {found}, expected the height {expected}")]
    StartMismatch { expected: usize, found: usize },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("ground sets differ: {left} vs {right}")]
    GroundMismatch { left: usize, right: usize },
    #[error("maps are not mutually inverse: {0}")]
    NotInverse(String),
    #[error("towers have different level counts: {left} vs {right}")]
    LevelCountMismatch { left: usize, right: usize },
    #[error("metric on level {level} is not translation invariant: d({x}+{g},{y}+{g}) != d({x},{y})")]
    InvarianceViolation { level: usize, x: usize, y: usize, g: usize },
    #[error("group axiom fails: {0}")]
    GroupAxiom(String),
    #[error("profile too large: top size {size} exceeds {limit}")]
    ProfileTooLarge { size: usize, limit: usize },
    #[error("unknown theorem id {0:?}")]
    UnknownTheoremId(String),
    #[error("bad expression: {0}")]
    Expr(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
