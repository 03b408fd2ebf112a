use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge {edge:?} has {found} distinct vertices, expected {expected}")]
    NonUniformEdge {
        edge: Vec<u32>,
        expected: usize,
        found: usize,
    },
    #[error("edge {edge:?} uses vertex {vertex} outside 0..{n}")]
    VertexOutOfRange { edge: Vec<u32>, vertex: u32, n: usize },
    #[error("tuple of size {size} is not valid for a {r}-uniform hypergraph")]
    TupleSize { size: usize, r: usize },
    #[error("hypergraph is not a subgraph of the host: edge {edge:?} missing")]
    NotSubgraph { edge: Vec<u32> },
    #[error("hypergraph is not partite: {0}")]
    NotPartite(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("work budget of {budget} exceeded after {explored} partial extensions (estimated total {estimate:.3e})")]
    BudgetExceeded {
        budget: u64,
        explored: u64,
        estimate: f64,
    },
    #[error("not a cycle in the shadow: {0}")]
    NotShadowCycle(String),
    #[error("regularization annihilated the graph after {} deletions; enlarge lambda or K", trace.len())]
    RegularizationAnnihilated { trace: Vec<crate::supersat::Deletion> },
    #[error("codegree condition violated: delta={delta:.6}>eps={eps}")]
    CodegreeViolated { delta: f64, eps: f64 },
    #[error("incidence system has no hyperedges; average degree undefined")]
    EmptySystem,
    #[error("container step cannot shrink: independent set of size {size} exceeds the limit {limit}")]
    ShrinkUnattainable { size: usize, limit: usize },
    #[error("container step on a {edges}-edge container failed")]
    StepFailed {
        edges: usize,
        /// Host edge indexes of the failing container.
        container: Vec<u32>,
        source: Box<Error>,
    },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by running out of the configured work budget.
    pub fn is_resource(&self) -> bool {
        match self {
            Error::BudgetExceeded { .. } => true,
            Error::StepFailed { source, .. } => source.is_resource(),
            _ => false,
        }
    }
}
