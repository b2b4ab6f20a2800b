//! Exact DBSCAN for general metric spaces.
//!
//! The range-query phase of DBSCAN is accelerated with a coarse partition of
//! the data built by a randomized Gonzalez procedure for k-center clustering
//! with outliers. Every non-outlying point is assigned to a nearby center, and
//! the ε-neighborhood of a point only has to be searched among the balls whose
//! centers are close to its own center, plus the small set of points that no
//! ball covers. The result is identical to plain DBSCAN; only the number of
//! distance evaluations changes.
//!
//! Two acceleration variants are provided (see [`Variant`]): `Metric1` keeps
//! every sampled center, `Metric2` thins each sampled batch to a maximal
//! independent set so that centers are pairwise at least `r` apart.
//!
//! The crate is `no_std` and only needs `alloc`. Enabling the `parallel`
//! feature spreads the per-point work over a rayon pool.

#![no_std]
#![deny(missing_docs)]

extern crate alloc;

mod dbscan;
mod equivalence;
mod error;
mod gonzalez;
mod metric;
mod select;

pub use dbscan::{
    brute_force_dbscan, build_clusters, candidate_set, classify, epsilon_neighborhood,
    metric_dbscan, Classification, Clustering, CoreNeighborhoods, DbscanParams, DbscanRun, Label,
    LabelSet, QueryStats,
};
pub use equivalence::{check_equivalence, Mismatch};
pub use error::{Error, Result};
pub use gonzalez::{
    build_coarse_partition, filtration_mis, randomized_gonzalez, sample_initial_batch, Batch,
    CoarsePartition, GonzalezParams, Variant,
};
pub use metric::{
    estimate_diameter, set_distance, Dataset, DistanceOracle, Metric, PointId, Tally,
};
pub use select::farthest_q;
