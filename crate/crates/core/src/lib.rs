//! Latent concept discovery over contextualized embeddings.
//!
//! The crate clusters a per-layer embedding dataset with one of three
//! interchangeable algorithms (K-Means, Ward agglomerative, and the Leaders
//! pass followed by Ward), projects clusters into encoded concepts, and scores
//! those concepts against a human-defined ontology with the θ-alignment
//! metric: the mean of the fraction of θ-pure clusters (alignment) and the
//! fraction of labels recovered by at least one θ-pure cluster (coverage).
//!
//! The crate is `no_std` + `alloc` when built without the default `std`
//! feature. The `parallel` feature (on by default) parallelizes the K-Means
//! assignment step and the Ward distance-matrix fill with rayon; results are
//! identical for any worker count.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(missing_docs)]

extern crate alloc;

pub mod agglomerative;
pub mod alignment;
pub mod concepts;
pub mod dataset;
mod error;
mod par;
pub mod kmeans;
pub mod leaders;
pub mod matrix;
pub mod oracle;
mod rptree;

pub use agglomerative::{cut_tree, ward_fit, Dendrogram, Merge, DEFAULT_MEMORY_BUDGET};
pub use alignment::{
    per_label_breakdown, theta_alignment, AlignmentOptions, AlignmentReport, CoverageDenominator,
    Theta,
};
pub use concepts::{
    build_concepts, concepts_from_labels, filter_concepts, phrasal_counts, size_histogram, Concept, ConceptSet,
    PhrasalCounts, SizeHistogram,
};
pub use dataset::{build_ontology, frequency_filter, frequency_filter_rows, EmbeddingDataset, HumanOntology, TokenRecord};
pub use error::{Error, Result};
pub use kmeans::{
    assign_to_centroids, kmeans_fit, ClusterAssignment, Init, KMeansConfig, KMeansModel, Method,
};
pub use leaders::{
    leaders_cluster, leaders_pass, tau_binary_search, LeadersCompression, SearchMode,
    TauSearchConfig,
};
pub use matrix::Matrix;

/// Defaults used throughout the pipeline.
pub mod defaults {
    /// Number of clusters per layer.
    pub const K: usize = 600;
    /// K-Means random restarts.
    pub const RESTARTS: usize = 10;
    /// K-Means iteration cap.
    pub const MAX_ITER: usize = 300;
    /// K-Means convergence tolerance, relative to the largest feature range.
    pub const REL_TOL: f64 = 1e-4;
    /// θ numerator and denominator (θ = 0.95).
    pub const THETA: (u64, u64) = (95, 100);
    /// Encoded concepts need strictly more unique word types than this.
    pub const MIN_TYPES: usize = 5;
    /// Frequency filter bounds used for the data-scaling ablation.
    pub const FILTER_MIN_OCC: usize = 5;
    /// Upper frequency bound for the ablation.
    pub const FILTER_MAX_OCC: usize = 1000;
    /// Accepted relative deviation of M from the Leaders budget.
    pub const TAU_REL_BAND: f64 = 0.05;
    /// Probe cap for the τ bisection.
    pub const TAU_MAX_PROBES: usize = 30;
}
