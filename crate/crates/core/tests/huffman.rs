mod common;

use proptest::prelude::*;

use cdwe::vocab::HuffmanTree;

use common::DepthProfiles;

fn check(profiles: &DepthProfiles, counts: &[u64]) {
    let tree = HuffmanTree::from_counts(counts).unwrap();
    assert_eq!(tree.weighted_length(counts), profiles.optimal_cost(counts), "counts {counts:?}");
}

#[test]
fn profile_counts_match_known_sequence() {
    // Distinct depth multisets of full binary trees with n leaves.
    let profiles = DepthProfiles::up_to(8);
    let sizes: Vec<usize> = (2..=8).map(|n| profiles.profiles(n).len()).collect();
    assert_eq!(sizes, [1, 1, 2, 3, 5, 9, 16]);
}

/// Calls `f` on every nondecreasing vector of length `n` over `lo..=hi`.
fn for_each_multiset(n: usize, lo: u64, hi: u64, cur: &mut Vec<u64>, f: &mut dyn FnMut(&[u64])) {
    if cur.len() == n {
        f(cur);
        return;
    }
    for c in lo..=hi {
        cur.push(c);
        for_each_multiset(n, c, hi, cur, f);
        cur.pop();
    }
}

#[test]
fn optimal_on_every_small_multiset() {
    let profiles = DepthProfiles::up_to(8);
    for n in 2..=8 {
        for_each_multiset(n, 1, 6, &mut Vec::new(), &mut |counts| check(&profiles, counts));
    }
}

#[test]
fn optimal_on_every_ordered_vector_over_three_values() {
    let profiles = DepthProfiles::up_to(8);
    for n in 2..=8u32 {
        for code in 0..3u64.pow(n) {
            let counts: Vec<u64> = (0..n).map(|i| (code / 3u64.pow(i)) % 3 + 1).collect();
            check(&profiles, &counts);
        }
    }
}

proptest! {
    #[test]
    fn optimal_on_random_vectors(counts in proptest::collection::vec(1u64..10_000, 2..=8)) {
        let profiles = DepthProfiles::up_to(8);
        let tree = HuffmanTree::from_counts(&counts).unwrap();
        prop_assert_eq!(tree.weighted_length(&counts), profiles.optimal_cost(&counts));
    }
}
