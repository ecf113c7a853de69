use h2plan::io::{SeriesTable, HOURS_PER_YEAR};
use h2plan::tdr::{kmeans, reduce, SeriesBundle};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Lowest within-cluster sum of squares over every 2-partition.
fn best_two_partition(points: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let n = points.len();
    let mut best = (f64::INFINITY, vec![]);
    for mask in 1u32..(1 << n) - 1 {
        let labels: Vec<usize> = (0..n).map(|i| (mask >> i & 1) as usize).collect();
        let mut cost = 0.0;
        for c in 0..2 {
            let members: Vec<&Vec<f64>> = points.iter().zip(&labels).filter(|(_, &l)| l == c).map(|(p, _)| p).collect();
            let dim = points[0].len();
            let mean: Vec<f64> =
                (0..dim).map(|d| members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64).collect();
            cost += members.iter().map(|p| p.iter().zip(&mean).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).sum::<f64>();
        }
        if cost < best.0 {
            best = (cost, labels);
        }
    }
    best
}

fn same_partition(a: &[usize], b: &[usize]) -> bool {
    (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

#[test]
fn two_obvious_clusters_match_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let points: Vec<Vec<f64>> = (0..10)
        .map(|i| {
            let base = if i % 3 == 0 { 0.9 } else { 0.1 };
            (0..24).map(|_| base + rng.gen_range(-0.05..0.05)).collect()
        })
        .collect();
    let (_, oracle) = best_two_partition(&points);
    for seed in 0..5 {
        let c = kmeans(&points, 2, seed);
        assert!(same_partition(&c.assignment, &oracle), "seed {seed}");
    }
}

fn bundle(seed: u64) -> SeriesBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = SeriesBundle::default();
    let columns = vec!["A".to_string(), "B".to_string()];
    let values = (0..2)
        .map(|_| (0..HOURS_PER_YEAR).map(|t| 1.0 + (t / 24 % 7) as f64 + rng.gen::<f64>()).collect())
        .collect();
    b.push("electricity", SeriesTable { columns, values });
    b
}

#[test]
fn thread_count_does_not_change_the_reduction() {
    let b = bundle(9);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| reduce(&b, 30, 17).unwrap())
    };
    assert_eq!(run(1), run(4));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reductions_keep_weights_and_totals(seed in any::<u64>(), k in 1usize..=80) {
        let b = bundle(seed);
        let r = reduce(&b, k, seed).unwrap();
        prop_assert_eq!(r.total_weight(), 365);
        prop_assert_eq!(r.periods.len(), k);
        for s in 0..2 {
            let orig: f64 = b.groups[0].1.values[s].iter().sum();
            prop_assert!((r.weighted_total(s) - orig).abs() <= 0.005 * orig);
        }
        for w in r.sse_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }
}
