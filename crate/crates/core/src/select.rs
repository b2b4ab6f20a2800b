use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::metric::PointId;

/// Ids of the `q_size` points with the largest distance, in ascending id
/// order. Ties at the cut are broken toward smaller ids.
///
/// Runs in expected linear time (introselect) plus a sort of the result.
pub fn farthest_q(dist_to_e: &[f64], q_size: usize) -> Result<Vec<PointId>> {
    farthest_with_min(dist_to_e, q_size).map(|(ids, _)| ids)
}

/// Farthest-first order: larger distance first, then smaller id.
#[inline]
fn farther(dist: &[f64], a: u32, b: u32) -> Ordering {
    dist[b as usize]
        .total_cmp(&dist[a as usize])
        .then(a.cmp(&b))
}

/// Like [`farthest_q`], also returning the smallest distance inside the
/// selected set, i.e. `d(Q, E)` when `dist_to_e` holds distances to `E`.
pub(crate) fn farthest_with_min(dist_to_e: &[f64], q_size: usize) -> Result<(Vec<PointId>, f64)> {
    let n = dist_to_e.len();
    if q_size == 0 || q_size > n {
        return Err(Error::Precondition("farthest_q needs 1 <= q_size <= n"));
    }
    let mut order: Vec<u32> = (0..n as u32).collect();
    if q_size < n {
        order.select_nth_unstable_by(q_size - 1, |&a, &b| farther(dist_to_e, a, b));
        order.truncate(q_size);
    }
    let min = order
        .iter()
        .map(|&i| dist_to_e[i as usize])
        .fold(f64::INFINITY, f64::min);
    order.sort_unstable();
    Ok((order.into_iter().map(PointId).collect(), min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(v: &[u32]) -> Vec<PointId> {
        v.iter().copied().map(PointId).collect()
    }

    #[test]
    fn top_two_by_inspection() {
        assert_eq!(farthest_q(&[1.0, 5.0, 3.0, 2.0], 2).unwrap(), ids(&[1, 2]));
    }

    #[test]
    fn whole_set() {
        assert_eq!(farthest_q(&[1.0, 5.0, 3.0], 3).unwrap(), ids(&[0, 1, 2]));
    }

    #[test]
    fn ties_prefer_smaller_ids() {
        assert_eq!(farthest_q(&[2.0, 2.0, 9.0, 2.0], 2).unwrap(), ids(&[0, 2]));
        let (q, min) = farthest_with_min(&[2.0, 2.0, 9.0, 2.0], 3).unwrap();
        assert_eq!(q, ids(&[0, 1, 2]));
        assert_eq!(min, 2.0);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(farthest_q(&[1.0], 2).is_err());
        assert!(farthest_q(&[1.0], 0).is_err());
    }

    fn sort_oracle(dist: &[f64], q: usize) -> Vec<PointId> {
        let mut all: Vec<(f64, u32)> = dist.iter().copied().zip(0..).collect();
        all.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let mut top: Vec<u32> = all[..q].iter().map(|x| x.1).collect();
        top.sort();
        ids(&top)
    }

    #[test]
    fn matches_sort_on_200_values() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let dist: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
        assert_eq!(farthest_q(&dist, 17).unwrap(), sort_oracle(&dist, 17));
    }

    proptest! {
        #[test]
        fn agrees_with_full_sort(
            dist in prop::collection::vec(0u8..20, 1..120),
            frac in 0.0f64..1.0,
        ) {
            let dist: Vec<f64> = dist.into_iter().map(f64::from).collect();
            let q = 1 + ((dist.len() - 1) as f64 * frac) as usize;
            let (got, min) = farthest_with_min(&dist, q).unwrap();
            prop_assert_eq!(&got, &sort_oracle(&dist, q));
            let expect_min = got.iter().map(|p| dist[p.index()]).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(min, expect_min);
        }
    }
}
