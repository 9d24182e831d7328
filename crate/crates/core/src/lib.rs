//! Model-agnostic variable relevance.
//!
//! A fitted prediction function is probed on a held-out test sample by
//! replacing one explanatory variable at a time with
//!
//! * its *ghost variable*, the least-squares prediction of that variable from
//!   all the others,
//! * a random permutation of its values, or
//! * nothing at all (the model is refitted without it).
//!
//! The squared change in predictions is the variable's relevance. Stacking
//! the per-case prediction changes gives the case-variable matrix `A`, whose
//! scaled cross-product `V = AᵀA / n₂` is the relevance matrix; its
//! eigen-structure shows which variables act jointly.

pub mod cluster;
pub mod dataset;
pub mod error;
pub mod linalg;
pub mod predictors;
pub mod relevance;
pub mod relmatrix;
pub mod synthetic;

pub use cluster::{cluster_variables, ClusterTree, Linkage, Merge};
pub use dataset::{Dataset, SplitSample};
pub use error::{Error, Result};
pub use linalg::{Matrix, OlsFit, RngState, SymEigen};
pub use predictors::{
    BasisSpec, BasisTerm, ExternalPredictorConfig, LinearModel, MlpConfig, MlpModel,
    ModelFactory, ModelFamily, PredictionFunction,
};
pub use relevance::{GhostColumnSet, GhostSource, PermutationPlan, RelevanceReport};
pub use relmatrix::{
    CaseVariableMatrix, EigenComponent, PartialCorrelationMatrix, RelevanceMatrix,
    ReplacementMethod,
};
pub use synthetic::{Scenario, ScenarioSpec};

/// Crate version, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
