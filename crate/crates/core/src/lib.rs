//! Linear cycles in uniform hypergraphs: enumeration, balanced supersaturation,
//! hypergraph containers, and Turán-number estimates in random hypergraphs.

pub mod bitset;
pub mod containers;
pub mod cycles;
pub mod error;
pub mod experiments;
pub mod hypergraph;
pub mod io;
pub mod random;
pub mod supersat;
pub mod turan;
pub mod util;

pub use bitset::BitSet;
pub use cycles::{
    enumerate_cycles, extend_shadow_cycle, is_cycle_free, is_linear_cycle, CycleFamily,
    CycleTemplate,
};
pub use error::{Error, Result};
pub use hypergraph::{shadow, Hypergraph, PartiteHypergraph, ShadowGraph, TupleDegreeIndex, Vertex};
pub use containers::{
    build_containers, iterate_containers, ContainerFamily, ContainerParams, GlobalFamily, IncidenceSystem,
    IterateConfig,
};
pub use random::{sample, CoupledSample};
pub use supersat::{build_balanced_family, BalancedFamily, Certificate, SupersatConfig};
pub use turan::{estimate_random_ex, exact_ex, SolverOptions, TuranResult};
