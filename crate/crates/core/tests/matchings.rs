use std::collections::HashSet;

use proptest::prelude::*;
use twistfock::matchings::{delete_pair, delete_pair_inverse, delete_singleton, delete_singleton_inverse, enumerate_matchings};
use twistfock::IncompleteMatching;

/// Random matching of `[n]` from a shuffled point list and a pair count.
fn matching_strategy() -> impl Strategy<Value = IncompleteMatching> {
    (1usize..=10)
        .prop_flat_map(|n| (Just(n), Just((1..=n).collect::<Vec<_>>()).prop_shuffle(), 0..=n / 2))
        .prop_map(|(n, pts, k)| {
            let pairs: Vec<(usize, usize)> = (0..k.min(5)).map(|a| (pts[2 * a], pts[2 * a + 1])).collect();
            IncompleteMatching::new(n, &pairs).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn total_crossing_is_order_independent(pi in matching_strategy()) {
        let orders = pi.admissible_orders(8, 10_000).unwrap();
        prop_assert!(!orders.is_empty());
        for o in &orders {
            let (per, total) = pi.crossing_numbers(o).unwrap();
            prop_assert_eq!(per.iter().sum::<usize>(), total);
            prop_assert_eq!(total, pi.crossing_total());
        }
        prop_assert!(pi.is_admissible(&pi.left_standard()));
        prop_assert!(pi.is_admissible(&pi.right_standard()));
    }
}

#[test]
fn census_splits_and_bijections_up_to_eight() {
    for n in 2..=8 {
        let all = enumerate_matchings(n, 10).unwrap();
        let (single, paired): (Vec<_>, Vec<_>) = all.iter().partition(|p| p.is_singleton(1));
        assert_eq!(single.len() + paired.len(), all.len());
        let lower = enumerate_matchings(n - 1, 10).unwrap();
        let images: HashSet<_> = single.iter().map(|p| delete_singleton(p).unwrap()).collect();
        assert_eq!(images.len(), single.len());
        assert_eq!(images.len(), lower.len());
        for s in &lower {
            assert!(images.contains(s));
            assert!(delete_singleton_inverse(s).is_singleton(1));
        }
        if n >= 3 {
            let images: HashSet<_> = paired.iter().map(|p| delete_pair(p).unwrap()).collect();
            assert_eq!(images.len(), paired.len());
            let lower = enumerate_matchings(n - 2, 10).unwrap();
            assert_eq!(images.len(), lower.len() * (n - 1));
            for s in &lower {
                for k in 1..n {
                    assert!(images.contains(&(s.clone(), k)));
                    assert_eq!(delete_pair_inverse(s, k).unwrap().partner(1), Some(k + 1));
                }
            }
        }
    }
}
