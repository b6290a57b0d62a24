//! Proof-library mining toolkit.
//!
//! Parses libraries written in a small pCIC-like term language, unfolds
//! every definition and lemma into a term tree, extracts numeric feature
//! matrices from those trees, groups structurally similar objects by
//! recurrent k-means clustering, and uses the clusters to suggest tactic
//! scripts for unproven goals by analogy with their cluster mates.
//!
//! Pipeline: [`term_model`] parses and type-resolves a library,
//! [`term_tree`] builds depth/level-indexed trees, [`features`] turns
//! trees into `(term, type, parent)` triple matrices, [`kmeans`] and
//! [`recurrent_clustering`] assign feature values and produce the cluster
//! model, and [`premiss_selection`] drives an external checker over
//! candidate scripts assembled from cluster mates.
//!
//! All stages are pure and deterministic for a fixed `(input, granularity,
//! seed)`; values are immutable once constructed and safe to share across
//! threads.

pub mod features;
pub mod kmeans;
pub mod premiss_selection;
pub mod recurrent_clustering;
pub mod term_model;
pub mod term_tree;

pub use features::{build_feature_matrix, pad_and_flatten, FeatureMatrix, Valuation};
pub use kmeans::{choose_k, kmeans, ClusterModel, KmeansError};
pub use premiss_selection::{suggest, CheckerConfig, SuggestError, SuggestionReport};
pub use recurrent_clustering::{
    model_dump, recurrent_cluster, ModelDump, RecurrentError, RecurrentOutput,
};
pub use term_model::{parse_library, resolve_types, Library, ParseError, Term, TypedLibrary};
pub use term_tree::{build_term_tree, TermTree};
