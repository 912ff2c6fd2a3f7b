//! Error type shared by all toolkit operations.

use crate::graph::NodeId;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),

    #[error("graph contains a cycle")]
    CycleDetected,

    #[error("path budget exceeded: graph has {found} maximal paths, limit is {max}")]
    PathBudgetExceeded { found: u64, max: u64 },

    #[error("bernstein index out of range: i={i}, n={n}")]
    BernsteinIndex { i: usize, n: usize },

    #[error("curve parameter out of domain: t={0}, expected [0, 1]")]
    ParameterOutOfDomain(f64),

    #[error("sample count must be at least 2, got {0}")]
    SampleCountTooSmall(usize),

    #[error("polyline must have at least 2 points, got {0}")]
    PolylineTooShort(usize),

    #[error("bezier curve needs at least 2 control points, got {0}")]
    TooFewControlPoints(usize),

    #[error("control point list is empty")]
    EmptyControlPoints,

    #[error("polyline has zero arc length")]
    DegeneratePolyline,

    #[error("non-finite coordinate in input")]
    NonFiniteCoordinate,

    #[error("underdetermined fit: {points} points for degree {degree} (need at least degree + 1)")]
    UnderdeterminedFit { points: usize, degree: usize },

    #[error("rank-deficient fit: parameter values collapse the least-squares system")]
    RankDeficientFit,

    #[error("control point count mismatch: ground truth has {gt}, proposal has {proposal}")]
    ControlPointMismatch { gt: usize, proposal: usize },

    #[error("likelihood {0} outside [0, 1]")]
    LikelihoodOutOfRange(f64),

    #[error("normalized coordinate ({x}, {y}) outside [0, 1]^2")]
    CoordinateOutOfRange { x: f64, y: f64 },

    #[error("cost matrix is ragged: row {row} has {len} entries, expected {expected}")]
    RaggedCostMatrix { row: usize, len: usize, expected: usize },

    #[error("non-finite cost at ({row}, {col})")]
    NonFiniteCost { row: usize, col: usize },

    #[error("more ground-truth paths ({gts}) than proposals ({proposals})")]
    TooManyGroundTruths { gts: usize, proposals: usize },

    #[error("brute-force assignment limited to {max} ground-truth paths, got {got}")]
    BruteForceTooLarge { got: usize, max: usize },

    #[error("no paths left to aggregate (all proposals filtered out)")]
    EmptyProposalSet,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("synthetic generator spec is degenerate: {0}")]
    DegenerateSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
