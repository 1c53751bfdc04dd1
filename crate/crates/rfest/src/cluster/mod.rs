//! Cluster analysis: k-means++ with Lloyd iterations, cluster-count
//! diagnostics, exact t-SNE embeddings and per-cluster profiling.
//!
//! Clustering operates on standardized, complete matrices — build them with
//! the tabular module (rows with at most one missing feature, median-imputed
//! and z-scored). The target is never part of the clustering space.

mod kmeans;
mod profile;
mod silhouette;
mod tsne;

pub use kmeans::{choose_k, kmeans_fit, ClusterDiagnostics, KDiagnostic, KMeansModel};
pub use profile::{
    cluster_profile, CategoricalShare, ClusterProfileReport, ClusterSummary, NumericSummary,
};
pub use silhouette::{adjusted_rand_index, mean_silhouette};
pub use tsne::{
    conditional_probabilities, joint_probabilities, student_t_affinities, tsne_embed,
    EmbeddingResult, TsneParams,
};
