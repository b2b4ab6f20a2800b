use metric_dbscan::{
    brute_force_dbscan, build_coarse_partition, candidate_set, check_equivalence, metric_dbscan,
    Dataset, DbscanParams, DistanceOracle, GonzalezParams, Metric, PointId, Variant,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const METRICS: [Metric; 3] = [Metric::Euclidean, Metric::Manhattan, Metric::Angular];

/// Blobs plus scattered noise; coordinates are shifted away from the origin
/// so angular distances are defined.
fn instance(seed: u64, n: usize, dim: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(1..6);
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect())
        .collect();
    let mut coords = Vec::with_capacity(n * dim);
    for i in 0..n {
        if rng.random_bool(0.05) {
            coords.extend((0..dim).map(|_| rng.random_range(-30.0..30.0) + 50.0));
        } else {
            let c = &centers[i % k];
            coords.extend(c.iter().map(|x| x + rng.random_range(-1.0..1.0) + 50.0));
        }
    }
    Dataset::new(dim, coords).unwrap()
}

fn diameter(o: &DistanceOracle<'_>) -> f64 {
    let mut best = 0.0f64;
    for p in o.dataset().ids() {
        for q in o.dataset().ids().filter(|&q| q > p) {
            best = best.max(o.distance(p, q));
        }
    }
    best
}

fn variant(flag: bool) -> Variant {
    if flag {
        Variant::Metric2
    } else {
        Variant::Metric1
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partition_covers_and_assigns_nearest(
        seed in any::<u64>(),
        n in 20usize..200,
        dim in 1usize..5,
        m in 0usize..3,
        r_frac in 0.02f64..0.5,
        z in 1usize..10,
        v in any::<bool>(),
    ) {
        let data = instance(seed, n, dim);
        let o = DistanceOracle::new(&data, METRICS[m]).unwrap();
        let r = r_frac * diameter(&o).max(1e-9);
        let params = GonzalezParams::new(r, z, variant(v), seed);
        let part = build_coarse_partition(&o, &params).unwrap();
        let centers = part.centers();
        prop_assert!(!centers.is_empty());

        let mut seen = vec![0u8; n];
        for i in 0..part.num_centers() {
            for &p in part.members(i) {
                seen[p.index()] += 1;
                let d = o.distance(p, centers[i]);
                prop_assert!(d <= part.cover_radius());
                let best = centers.iter().map(|&c| o.distance(p, c)).fold(f64::INFINITY, f64::min);
                prop_assert_eq!(d, best);
            }
        }
        for &p in part.uncovered() {
            seen[p.index()] += 1;
            for &c in centers {
                prop_assert!(o.distance(p, c) > part.cover_radius());
            }
        }
        prop_assert!(seen.iter().all(|&s| s == 1));

        if !part.hit_max_rounds() {
            prop_assert!(part.uncovered().len() < params.q_size());
        }
        for i in 0..centers.len() {
            for j in 0..centers.len() {
                let want = if i == j { 0.0 } else { o.distance(centers[i], centers[j]) };
                prop_assert_eq!(part.center_distance(i, j), want);
            }
        }
        if v {
            for i in 0..centers.len() {
                for j in i + 1..centers.len() {
                    prop_assert!(part.center_distance(i, j) >= r);
                }
            }
        }
    }

    #[test]
    fn fixed_seed_reproduces_the_partition(
        seed in any::<u64>(),
        n in 20usize..150,
        v in any::<bool>(),
    ) {
        let data = instance(seed, n, 3);
        let o = DistanceOracle::new(&data, Metric::Euclidean).unwrap();
        let params = GonzalezParams::new(2.0, 4, variant(v), seed);
        let a = build_coarse_partition(&o, &params).unwrap();
        let b = build_coarse_partition(&o, &params).unwrap();
        prop_assert_eq!(a.centers(), b.centers());
        prop_assert_eq!(a.uncovered(), b.uncovered());
        prop_assert_eq!(a.rounds_run(), b.rounds_run());
    }

    #[test]
    fn candidates_contain_the_true_neighborhood(
        seed in any::<u64>(),
        n in 20usize..150,
        m in 0usize..3,
        r_frac in 0.02f64..0.5,
        eps_frac in 0.0f64..0.3,
        v in any::<bool>(),
    ) {
        let data = instance(seed, n, 3);
        let o = DistanceOracle::new(&data, METRICS[m]).unwrap();
        let diam = diameter(&o).max(1e-9);
        let eps = eps_frac * diam;
        let part = build_coarse_partition(&o, &GonzalezParams::new(r_frac * diam, 3, variant(v), seed)).unwrap();
        for p in data.ids().filter(|&p| !part.is_uncovered(p)) {
            let cands = candidate_set(&part, p, eps).unwrap();
            for q in data.ids() {
                if o.distance(p, q) <= eps {
                    prop_assert!(cands.contains(&q), "{} missing from candidates of {}", q, p);
                }
            }
        }
    }

    #[test]
    fn accelerated_matches_brute_force(
        seed in any::<u64>(),
        n in 20usize..200,
        dim in 1usize..5,
        m in 0usize..3,
        r_frac in 0.02f64..0.5,
        eps_frac in 0.01f64..0.3,
        min_pts in 1usize..12,
        z in 1usize..10,
        v in any::<bool>(),
    ) {
        let data = instance(seed, n, dim);
        let o = DistanceOracle::new(&data, METRICS[m]).unwrap();
        let diam = diameter(&o).max(1e-9);
        let params = DbscanParams::new(eps_frac * diam, min_pts);
        let (ref_labels, ref_clusters) = brute_force_dbscan(&o, &params).unwrap();
        let run = metric_dbscan(&o, &params, &GonzalezParams::new(r_frac * diam, z, variant(v), seed)).unwrap();
        prop_assert_eq!(run.classification.labels.labels(), ref_labels.labels());
        prop_assert_eq!(
            check_equivalence(
                &o,
                params.epsilon,
                (&run.classification.labels, &run.clustering),
                (&ref_labels, &ref_clusters),
            ),
            Ok(())
        );
        // both seed clusters in ascending id order, so the ids agree too
        prop_assert_eq!(run.clustering.assignment(), ref_clusters.assignment());
    }
}

#[test]
fn duplicate_points_share_one_ball() {
    let data = Dataset::new(2, [1.0, 1.0].repeat(50)).unwrap();
    let o = DistanceOracle::new(&data, Metric::Euclidean).unwrap();
    let part =
        build_coarse_partition(&o, &GonzalezParams::new(0.5, 2, Variant::Metric2, 3)).unwrap();
    assert_eq!(part.num_centers(), 1);
    assert!(part.uncovered().is_empty());
    assert_eq!(part.members(0).len(), 50);
    assert_eq!(part.nearest(PointId(49)), (0, 0.0));
}
