use crate::beckmann::BeckmannSolution;

/// A single instance-validation failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoVertices,
    BadEdgeIndex { edge: usize },
    SelfLoop { edge: usize },
    ParallelEdge { edge: usize },
    NonpositiveLength { edge: usize },
    NonpositiveDensity { edge: usize },
    NegativeAtom { vertex: usize },
    ZeroVertexMass { vertex: usize },
    CoordinateDimension { vertex: usize },
    NonfiniteCoordinate { vertex: usize },
    NonpositiveTotalMass,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NoVertices => write!(f, "instance has no vertices"),
            Violation::BadEdgeIndex { edge } => write!(f, "edge {edge}: vertex index out of range"),
            Violation::SelfLoop { edge } => write!(f, "edge {edge}: self-loop"),
            Violation::ParallelEdge { edge } => write!(f, "edge {edge}: parallel edge"),
            Violation::NonpositiveLength { edge } => write!(f, "edge {edge}: nonpositive length"),
            Violation::NonpositiveDensity { edge } => write!(f, "edge {edge}: nonpositive density"),
            Violation::NegativeAtom { vertex } => write!(f, "vertex {vertex}: negative atom mass"),
            Violation::ZeroVertexMass { vertex } => {
                write!(f, "vertex {vertex}: zero lumped mass (isolated vertex without atom)")
            }
            Violation::CoordinateDimension { vertex } => {
                write!(f, "vertex {vertex}: coordinate dimension mismatch")
            }
            Violation::NonfiniteCoordinate { vertex } => {
                write!(f, "vertex {vertex}: nonfinite coordinate")
            }
            Violation::NonpositiveTotalMass => write!(f, "total mass is not positive"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operands belong to different instances")]
    InstanceMismatch,

    #[error("invalid instance: {}", format_violations(.0))]
    InvalidInstance(Vec<Violation>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("exponent {0} outside (1, \u{221e})")]
    ExponentOutOfRange(f64),

    #[error("infeasible divergence: component {component} has mass imbalance {imbalance:e}")]
    Infeasible { component: usize, imbalance: f64 },

    #[error("solver did not converge in {iterations} iterations (residual {residual:e}, gap {gap:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        gap: f64,
        best: Box<BeckmannSolution>,
    },

    #[error("current is not acyclic: directed cycle through vertices {0:?}")]
    CyclicInput(Vec<usize>),

    #[error("path {path}: {detail}")]
    InvalidWalk { path: usize, detail: String },

    #[error("plan endpoint at vertex {vertex} has zero atom mass (not in B_q)")]
    NotInBq { vertex: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
