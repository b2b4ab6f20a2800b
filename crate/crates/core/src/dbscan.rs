//! Point classification over the coarse partition, cluster joining, and the
//! brute-force reference.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gonzalez::{build_coarse_partition, CoarsePartition, GonzalezParams};
use crate::metric::{DistanceOracle, PointId, Tally};

/// `ε` and `MinPts`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbscanParams {
    /// Neighborhood radius; balls are closed.
    pub epsilon: f64,
    /// Neighborhood size (the point itself included) that makes a core point.
    pub min_pts: usize,
}

impl DbscanParams {
    /// Bundles the two parameters.
    pub fn new(epsilon: f64, min_pts: usize) -> Self {
        DbscanParams { epsilon, min_pts }
    }

    /// `ε > 0` and finite, `MinPts ≥ 1`.
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config("epsilon must be a positive finite number"));
        }
        if self.min_pts == 0 {
            return Err(Error::Config("min_pts must be at least 1"));
        }
        Ok(())
    }
}

/// DBSCAN role of a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    /// At least `MinPts` points within `ε`.
    Core,
    /// Not core, but within `ε` of a core point.
    Border,
    /// Neither.
    Outlier,
}

impl Label {
    /// Lower-case name used in output files.
    pub fn name(self) -> &'static str {
        match self {
            Label::Core => "core",
            Label::Border => "border",
            Label::Outlier => "outlier",
        }
    }
}

/// Per-point labels and ε-neighborhood sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    labels: Vec<Label>,
    neighborhood_sizes: Vec<usize>,
}

impl LabelSet {
    /// All labels, indexed by point.
    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Label of `p`.
    #[inline]
    pub fn label(&self, p: PointId) -> Label {
        self.labels[p.index()]
    }

    /// `|Ball(p, ε) ∩ X|`, `p` included.
    pub fn neighborhood_size(&self, p: PointId) -> usize {
        self.neighborhood_sizes[p.index()]
    }

    /// Number of points carrying `label`.
    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// True for a labeling of zero points.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// ε-neighborhoods of the core points, kept for cluster joining.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoreNeighborhoods {
    lists: Vec<Vec<PointId>>,
}

impl CoreNeighborhoods {
    /// Neighborhood of `p` if it is a core point.
    pub fn get(&self, p: PointId) -> Option<&[PointId]> {
        let list = &self.lists[p.index()];
        if list.is_empty() {
            None
        } else {
            Some(list)
        }
    }

    /// Total number of stored ids.
    pub fn total_len(&self) -> usize {
        self.lists.iter().map(Vec::len).sum()
    }
}

/// Cluster membership of every point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    assignment: Vec<Option<u32>>,
    cluster_count: usize,
}

impl Clustering {
    /// Cluster id of `p`, or `None` for noise.
    #[inline]
    pub fn cluster_of(&self, p: PointId) -> Option<u32> {
        self.assignment[p.index()]
    }

    /// Per-point cluster ids.
    pub fn assignment(&self) -> &[Option<u32>] {
        &self.assignment
    }

    /// Number of clusters; ids run from 0 to `cluster_count − 1`.
    pub fn cluster_count(&self) -> usize {
        self.cluster_count
    }

    /// Number of noise points.
    pub fn noise_count(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_none()).count()
    }
}

/// Range-query instrumentation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QueryStats {
    /// Per point, the size of the set scanned for its neighborhood (the
    /// point itself included; `n` for a full scan).
    pub candidate_sizes: Vec<usize>,
    /// Distance evaluations spent on range queries; a pair needed by both
    /// of its ends is counted once.
    pub evaluations: u64,
}

impl QueryStats {
    /// Mean candidate-set size.
    pub fn mean_candidates(&self) -> f64 {
        if self.candidate_sizes.is_empty() {
            return 0.0;
        }
        self.candidate_sizes.iter().sum::<usize>() as f64 / self.candidate_sizes.len() as f64
    }

    /// Largest candidate-set size.
    pub fn max_candidates(&self) -> usize {
        self.candidate_sizes.iter().copied().max().unwrap_or(0)
    }
}

/// Output of [`classify`].
#[derive(Debug, Clone)]
pub struct Classification {
    /// Labels and neighborhood sizes.
    pub labels: LabelSet,
    /// Neighborhoods of the core points.
    pub core_neighborhoods: CoreNeighborhoods,
    /// Candidate sizes and evaluation count.
    pub stats: QueryStats,
}

// Stored center distances may exceed the true value by a few ulps, which could
// drop a needed ball right at the threshold. Widening by a relative 1e-9
// only ever adds candidates.
const THRESHOLD_SLACK: f64 = 1e-9;

fn ball_threshold(partition: &CoarsePartition, epsilon: f64) -> f64 {
    (2.0 * partition.cover_radius() + epsilon) * (1.0 + THRESHOLD_SLACK)
}

/// Points of all balls whose center is within `2·cover_radius + ε` of center
/// `ci`, followed by the uncovered points. Shared by every point of ball `ci`.
fn candidates_for_center(partition: &CoarsePartition, ci: usize, epsilon: f64) -> Vec<PointId> {
    let limit = ball_threshold(partition, epsilon);
    let mut out = Vec::new();
    for j in 0..partition.num_centers() {
        if partition.center_distance(ci, j) <= limit {
            out.extend_from_slice(partition.members(j));
        }
    }
    out.extend_from_slice(partition.uncovered());
    out
}

/// Candidate set of a covered point: every point that can lie within `ε` of
/// it. Uses only stored center distances.
///
/// Uncovered points have no candidate set and must be answered by a full
/// scan; asking for one is a [`Error::Precondition`] error.
pub fn candidate_set(
    partition: &CoarsePartition,
    p: PointId,
    epsilon: f64,
) -> Result<Vec<PointId>> {
    if partition.is_uncovered(p) {
        return Err(Error::Precondition("uncovered points need a full scan"));
    }
    Ok(candidates_for_center(
        partition,
        partition.nearest(p).0,
        epsilon,
    ))
}

/// `{q ∈ candidates : d(p, q) ≤ ε}` with `p` first. `p` is included without
/// evaluating its self-distance.
pub fn epsilon_neighborhood(
    oracle: &DistanceOracle<'_>,
    candidates: &[PointId],
    p: PointId,
    epsilon: f64,
) -> Vec<PointId> {
    let mut tally = oracle.tally();
    let mut out = vec![p];
    for &q in candidates {
        if q != p && tally.distance(p, q) <= epsilon {
            out.push(q);
        }
    }
    out
}

const QUERY_BLOCK: usize = 16;
const BLOCK_BYTES: usize = 256 * 1024;

/// Pushes every pair `(a[i], b[j])` with `d ≤ ε`, tile by tile so the `b`
/// vectors stay in cache across queries. With `same` set, `a` and `b` are
/// the same slice and only `i < j` is visited.
fn pairs_within(
    tally: &mut Tally<'_, '_>,
    a: &[PointId],
    b: &[PointId],
    same: bool,
    epsilon: f64,
    block: usize,
    out: &mut Vec<(PointId, PointId)>,
) {
    for (ai, qs) in a.chunks(QUERY_BLOCK).enumerate() {
        let a0 = ai * QUERY_BLOCK;
        for (bi, cs) in b.chunks(block).enumerate() {
            let b0 = bi * block;
            if same && b0 + cs.len() <= a0 + 1 {
                continue;
            }
            for (s, &p) in qs.iter().enumerate() {
                let start = if same {
                    (a0 + s + 1).saturating_sub(b0).min(cs.len())
                } else {
                    0
                };
                for &q in &cs[start..] {
                    if tally.distance(p, q) <= epsilon {
                        out.push((p, q));
                    }
                }
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Unit {
    Ball(usize),
    Uncovered,
}

/// ε-close pairs owned by one unit. Ball `i` owns its internal pairs and its
/// pairs with adjacent balls `j > i`; the uncovered unit owns every pair with
/// an uncovered end. Each unordered pair is thus evaluated at most once.
fn unit_pairs(
    oracle: &DistanceOracle<'_>,
    partition: &CoarsePartition,
    unit: Unit,
    epsilon: f64,
) -> Vec<(PointId, PointId)> {
    let block = (BLOCK_BYTES / (8 * oracle.dataset().dim())).max(1);
    let limit = ball_threshold(partition, epsilon);
    let mut tally = oracle.tally();
    let mut out = Vec::new();
    match unit {
        Unit::Ball(i) => {
            let mi = partition.members(i);
            pairs_within(&mut tally, mi, mi, true, epsilon, block, &mut out);
            for j in i + 1..partition.num_centers() {
                if partition.center_distance(i, j) <= limit {
                    let mj = partition.members(j);
                    pairs_within(&mut tally, mi, mj, false, epsilon, block, &mut out);
                }
            }
        }
        Unit::Uncovered => {
            let x = partition.uncovered();
            pairs_within(&mut tally, x, x, true, epsilon, block, &mut out);
            for j in 0..partition.num_centers() {
                let mj = partition.members(j);
                pairs_within(&mut tally, x, mj, false, epsilon, block, &mut out);
            }
        }
    }
    out
}

fn candidate_count(partition: &CoarsePartition, ci: usize, epsilon: f64) -> usize {
    let limit = ball_threshold(partition, epsilon);
    (0..partition.num_centers())
        .filter(|&j| partition.center_distance(ci, j) <= limit)
        .map(|j| partition.members(j).len())
        .sum::<usize>()
        + partition.uncovered().len()
}

/// Labels every point using the partition to narrow each range query.
///
/// A covered point is compared against its [`candidate_set`] only, an
/// uncovered point against the whole dataset. Neighborhoods are symmetric,
/// so a pair needed by both of its ends is evaluated once and credited to
/// both. Border points are read off the core neighborhoods, so no second
/// round of queries is needed.
pub fn classify(
    oracle: &DistanceOracle<'_>,
    partition: &CoarsePartition,
    params: &DbscanParams,
) -> Result<Classification> {
    params.validate()?;
    let n = oracle.len();
    if partition.num_points() != n {
        return Err(Error::Precondition(
            "partition was built for another dataset",
        ));
    }
    let before = oracle.evaluations();

    let mut units: Vec<Unit> = (0..partition.num_centers())
        .filter(|&c| !partition.members(c).is_empty())
        .map(Unit::Ball)
        .collect();
    if !partition.uncovered().is_empty() {
        units.push(Unit::Uncovered);
    }
    let eval_unit = |&u: &Unit| unit_pairs(oracle, partition, u, params.epsilon);
    #[cfg(feature = "parallel")]
    let results: Vec<Vec<(PointId, PointId)>> = {
        use rayon::prelude::*;
        units.par_iter().map(eval_unit).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Vec<(PointId, PointId)>> = units.iter().map(eval_unit).collect();

    let mut nbrs: Vec<Vec<PointId>> = (0..n).map(|p| vec![PointId::from(p)]).collect();
    for (p, q) in results.into_iter().flatten() {
        nbrs[p.index()].push(q);
        nbrs[q.index()].push(p);
    }
    let sizes: Vec<usize> = nbrs.iter().map(Vec::len).collect();
    let lists = nbrs
        .into_iter()
        .map(|l| {
            if l.len() >= params.min_pts {
                l
            } else {
                Vec::new()
            }
        })
        .collect();
    let core_neighborhoods = CoreNeighborhoods { lists };
    let labels = label_points(sizes, &core_neighborhoods, params.min_pts);

    let mut candidate_sizes = vec![n; n];
    for c in 0..partition.num_centers() {
        let size = candidate_count(partition, c, params.epsilon);
        for p in partition.members(c) {
            candidate_sizes[p.index()] = size;
        }
    }
    Ok(Classification {
        labels,
        core_neighborhoods,
        stats: QueryStats {
            candidate_sizes,
            evaluations: oracle.evaluations() - before,
        },
    })
}

fn label_points(sizes: Vec<usize>, core: &CoreNeighborhoods, min_pts: usize) -> LabelSet {
    let mut labels: Vec<Label> = sizes
        .iter()
        .map(|&s| {
            if s >= min_pts {
                Label::Core
            } else {
                Label::Outlier
            }
        })
        .collect();
    for list in &core.lists {
        for q in list {
            if labels[q.index()] == Label::Outlier {
                labels[q.index()] = Label::Border;
            }
        }
    }
    LabelSet {
        labels,
        neighborhood_sizes: sizes,
    }
}

/// Joins core points into clusters by breadth-first search over the core
/// graph.
///
/// Seeds are taken in ascending id order, so cluster ids follow the smallest
/// core id of each cluster. A border point reachable from several clusters
/// joins the one with the smallest id.
pub fn build_clusters(labels: &LabelSet, core: &CoreNeighborhoods) -> Clustering {
    let n = labels.len();
    let mut assignment: Vec<Option<u32>> = vec![None; n];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for seed in 0..n {
        if labels.labels[seed] != Label::Core || assignment[seed].is_some() {
            continue;
        }
        let id = next;
        next += 1;
        assignment[seed] = Some(id);
        queue.push_back(seed);
        while let Some(p) = queue.pop_front() {
            for q in &core.lists[p] {
                let qi = q.index();
                if assignment[qi].is_none() {
                    assignment[qi] = Some(id);
                    if labels.labels[qi] == Label::Core {
                        queue.push_back(qi);
                    }
                }
            }
        }
    }
    Clustering {
        assignment,
        cluster_count: next as usize,
    }
}

/// Plain DBSCAN with all-pairs range queries, `n(n−1)/2` evaluations.
pub fn brute_force_dbscan(
    oracle: &DistanceOracle<'_>,
    params: &DbscanParams,
) -> Result<(LabelSet, Clustering)> {
    params.validate()?;
    let n = oracle.len();
    let mut nbrs: Vec<Vec<PointId>> = (0..n).map(|p| vec![PointId::from(p)]).collect();
    let mut tally = oracle.tally();
    for p in 0..n {
        for q in p + 1..n {
            let (a, b) = (PointId::from(p), PointId::from(q));
            if tally.distance(a, b) <= params.epsilon {
                nbrs[p].push(b);
                nbrs[q].push(a);
            }
        }
    }
    drop(tally);
    let sizes: Vec<usize> = nbrs.iter().map(Vec::len).collect();
    let lists = nbrs
        .into_iter()
        .map(|l| {
            if l.len() >= params.min_pts {
                l
            } else {
                Vec::new()
            }
        })
        .collect();
    let core = CoreNeighborhoods { lists };
    let labels = label_points(sizes, &core, params.min_pts);
    let clustering = build_clusters(&labels, &core);
    Ok((labels, clustering))
}

/// Everything produced by one accelerated run.
#[derive(Debug, Clone)]
pub struct DbscanRun {
    /// Part I: the coarse partition.
    pub partition: CoarsePartition,
    /// Part II: labels, neighborhoods and query statistics.
    pub classification: Classification,
    /// Part II: clusters.
    pub clustering: Clustering,
}

/// Builds the partition, classifies every point, and joins clusters.
pub fn metric_dbscan(
    oracle: &DistanceOracle<'_>,
    dbscan: &DbscanParams,
    sampler: &GonzalezParams,
) -> Result<DbscanRun> {
    dbscan.validate()?;
    let partition = build_coarse_partition(oracle, sampler)?;
    let classification = classify(oracle, &partition, dbscan)?;
    let clustering = build_clusters(&classification.labels, &classification.core_neighborhoods);
    Ok(DbscanRun {
        partition,
        classification,
        clustering,
    })
}
