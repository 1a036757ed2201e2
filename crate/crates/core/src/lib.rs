//! Synthesis and verification of comparator networks with SAT solving.
//!
//! The crate covers the whole pipeline: a model of layered comparator
//! networks with exhaustive 0-1 certification ([`network`]), CNF construction
//! ([`cnf`]), the size- and depth-oriented encodings ([`encodings`]), solver
//! integration with an embedded CDCL solver and an external subprocess mode
//! ([`solver`]), optimum searches over size, depth and both
//! ([`search`]), checked against published optima ([`reference`]).

pub mod cnf;
pub mod encodings;
pub mod error;
pub mod figures;
pub mod network;
pub mod reference;
pub mod render;
pub mod search;
pub mod solver;

pub use error::{Error, Result};
pub use network::{certify, CertificationRecord, Comparator, LayeredNetwork, NetworkClass, Ratio};
pub use search::{Budget, SearchResult, Searcher};
