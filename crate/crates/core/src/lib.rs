//! Learning probabilistic sentential decision diagrams (PSDDs) from complete
//! Boolean databases.
//!
//! The learner grows a circuit top-down along a vtree: records are clustered
//! on the variables left of each vtree split, each cluster yields one
//! element, and single columns become literals or Bernoulli units. The
//! resulting circuit assigns positive probability to every training record
//! (and to recombinations of cluster halves), which [`logic::implies`]
//! checks directly.

pub mod circuit;
pub mod dataset;
pub mod error;
pub mod inference;
pub mod io;
pub mod learn;
pub mod logic;
pub mod report;
pub mod vtree;

#[cfg(test)]
mod testutil;

/// 1-based variable index.
pub type Var = usize;

pub use circuit::{Circuit, CircuitBuilder, Element, NodeId, PsddNode, SizeCounts, ValidationReport};
pub use dataset::{Dataset, Record};
pub use error::{Error, FileFormatError, Result};
pub use inference::{dataset_ll, enumerate_support, evaluate, fully_factorized, log_prob, EvalReport};
pub use learn::{learn_vtree, slopp, slopp_with, Clusterer, KMeans, LearnConfig, VtreeMethod};
pub use logic::{conjoin_satisfiable, consistent, dnf_of_database, implies, Formula};
pub use vtree::{Vtree, VtreeId, VtreeNode};
