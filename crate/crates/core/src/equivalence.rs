//! Comparison of an accelerated result against the brute-force reference.

use alloc::vec;

use crate::dbscan::{Clustering, Label, LabelSet};
use crate::metric::{DistanceOracle, PointId};

/// First disagreement found by [`check_equivalence`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Mismatch {
    /// The two results cover different numbers of points.
    #[error("results cover {found} points, reference covers {expected}")]
    Length {
        /// Reference size.
        expected: usize,
        /// Candidate size.
        found: usize,
    },
    /// A point got a different label.
    #[error("point {point}: label {found:?}, reference says {expected:?}")]
    Label {
        /// Offending point.
        point: PointId,
        /// Reference label.
        expected: Label,
        /// Label under test.
        found: Label,
    },
    /// Noise must coincide with the outlier label.
    #[error("point {point}: noise flag disagrees with its label")]
    Noise {
        /// Offending point.
        point: PointId,
    },
    /// Core points are grouped differently, even allowing for relabeling.
    #[error("core point {point} is grouped differently from the reference")]
    CorePartition {
        /// Offending point.
        point: PointId,
    },
    /// A border point sits in a cluster with no core within ε of it.
    #[error("border point {point} is assigned to a cluster that does not reach it")]
    BorderCluster {
        /// Offending point.
        point: PointId,
    },
}

/// Checks that `found` is a valid DBSCAN result equal to `expected`:
/// identical labels, identical core partition up to relabeling, and every
/// border point placed in a cluster holding a core within `epsilon` of it.
/// Border cluster ids may legally differ from the reference.
pub fn check_equivalence(
    oracle: &DistanceOracle<'_>,
    epsilon: f64,
    found: (&LabelSet, &Clustering),
    expected: (&LabelSet, &Clustering),
) -> Result<(), Mismatch> {
    let (labels, clusters) = found;
    let (ref_labels, ref_clusters) = expected;
    let n = ref_labels.len();
    if labels.len() != n || clusters.assignment().len() != n {
        return Err(Mismatch::Length {
            expected: n,
            found: labels.len(),
        });
    }

    for p in (0..n).map(PointId::from) {
        let (got, want) = (labels.label(p), ref_labels.label(p));
        if got != want {
            return Err(Mismatch::Label {
                point: p,
                expected: want,
                found: got,
            });
        }
        let noise = clusters.cluster_of(p).is_none();
        if noise != (got == Label::Outlier) || ref_clusters.cluster_of(p).is_none() != noise {
            return Err(Mismatch::Noise { point: p });
        }
    }

    // bijection between cluster ids restricted to core points
    let mut forward = vec![None; clusters.cluster_count()];
    let mut backward = vec![None; ref_clusters.cluster_count()];
    for p in (0..n).map(PointId::from) {
        if labels.label(p) != Label::Core {
            continue;
        }
        let (Some(a), Some(b)) = (clusters.cluster_of(p), ref_clusters.cluster_of(p)) else {
            return Err(Mismatch::Noise { point: p });
        };
        let (a, b) = (a as usize, b as usize);
        if a >= forward.len() || b >= backward.len() {
            return Err(Mismatch::CorePartition { point: p });
        }
        match (forward[a], backward[b]) {
            (None, None) => {
                forward[a] = Some(b);
                backward[b] = Some(a);
            }
            (Some(x), Some(y)) if x == b && y == a => {}
            _ => return Err(Mismatch::CorePartition { point: p }),
        }
    }
    if clusters.cluster_count() != ref_clusters.cluster_count() {
        return Err(Mismatch::CorePartition {
            point: PointId::from(0),
        });
    }

    for p in (0..n).map(PointId::from) {
        if labels.label(p) != Label::Border {
            continue;
        }
        let id = clusters.cluster_of(p);
        let reached = (0..n).map(PointId::from).any(|q| {
            labels.label(q) == Label::Core
                && clusters.cluster_of(q) == id
                && oracle.distance(p, q) <= epsilon
        });
        if !reached {
            return Err(Mismatch::BorderCluster { point: p });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dbscan::{brute_force_dbscan, DbscanParams};
    use crate::metric::{Dataset, Metric};

    #[test]
    fn self_comparison_passes_and_mutations_are_caught() {
        let data = Dataset::new(1, vec![0.0, 0.1, 0.2, 5.0, 5.1, 5.2, 9.0]).unwrap();
        let o = DistanceOracle::new(&data, Metric::Euclidean).unwrap();
        let params = DbscanParams::new(0.15, 2);
        let (labels, clusters) = brute_force_dbscan(&o, &params).unwrap();
        assert_eq!(
            check_equivalence(&o, 0.15, (&labels, &clusters), (&labels, &clusters)),
            Ok(())
        );

        // a tighter epsilon drops every core
        let (tight, tight_clusters) = brute_force_dbscan(&o, &DbscanParams::new(0.05, 2)).unwrap();
        assert!(matches!(
            check_equivalence(&o, 0.15, (&tight, &tight_clusters), (&labels, &clusters)),
            Err(Mismatch::Label {
                point: PointId(0),
                ..
            })
        ));
    }
}
