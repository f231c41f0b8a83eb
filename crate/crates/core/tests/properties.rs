use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use treelimit::arith::{from_uint, rational};
use treelimit::degree_model::{enumerate_degree_sequences, DegreeDistribution, DegreeModel};
use treelimit::hom_count::{
    cond_embed_prob, embeds, expected_x, forest_embed_prob, merge_numbered, x_statistic,
    NumberedForest,
};
use treelimit::neighborhood::{
    aut_quotient_size, canonical_code, empirical_stats, strip_last_level, RootedBall,
};
use treelimit::tree::{
    all_labeled_trees, count_trees, enumerate_trees, prufer_decode, prufer_encode, sample_tree,
    tree_probability,
};
use treelimit::{Error, LabeledTree, PruferSequence};

fn prufer_code() -> impl Strategy<Value = PruferSequence> {
    (3usize..40).prop_flat_map(|n| {
        proptest::collection::vec(0..n as u32, n - 2)
            .prop_map(move |symbols| PruferSequence::new(n, symbols).unwrap())
    })
}

fn random_tree() -> impl Strategy<Value = LabeledTree> {
    prufer_code().prop_map(|c| prufer_decode(&c))
}

/// Forest on `k` nodes given by optional parents, with remainders.
fn numbered_forest(max_nodes: usize) -> impl Strategy<Value = NumberedForest> {
    (1..=max_nodes)
        .prop_flat_map(|k| {
            (
                proptest::collection::vec((any::<bool>(), any::<u32>()), k),
                proptest::collection::vec(0u32..3, k),
            )
        })
        .prop_filter_map("valid numbered forest", |(links, remainders)| {
            let edges: Vec<(u32, u32)> = links
                .iter()
                .enumerate()
                .skip(1)
                .filter(|(_, (linked, _))| *linked)
                .map(|(i, (_, p))| (p % i as u32, i as u32))
                .collect();
            NumberedForest::new(links.len(), &edges, remainders).ok()
        })
}

fn models(n: usize) -> Vec<DegreeModel> {
    let u123 = DegreeDistribution::uniform(&[1, 2, 3]).unwrap();
    let mut path = vec![2; n - 2];
    path.extend([1, 1]);
    let mut out = vec![
        DegreeModel::Star,
        DegreeModel::ConditionedIid(u123),
        DegreeModel::fixed(path).unwrap(),
    ];
    if n >= 5 {
        let mut spread = vec![3, 2];
        spread.resize(n - 3, 2);
        spread.extend([1, 1, 1]);
        out.push(DegreeModel::fixed(spread).unwrap());
    }
    out
}

fn brute_prob(model: &DegreeModel, n: usize, event: impl Fn(&LabeledTree) -> bool) -> BigRational {
    all_labeled_trees(n)
        .filter(|t| event(t))
        .map(|t| tree_probability(model, &t).unwrap())
        .sum()
}

fn injective_map(n: usize, k: usize, seed: u64) -> Vec<u32> {
    let mut labels: Vec<u32> = (0..n as u32).collect();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    labels.truncate(k);
    labels
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prufer_round_trip(code in prufer_code()) {
        let tree = prufer_decode(&code);
        prop_assert_eq!(prufer_encode(&tree), code);
        prop_assert_eq!(prufer_decode(&prufer_encode(&tree)), tree);
    }

    #[test]
    fn sampled_tree_has_requested_degrees(tree in random_tree(), seed in any::<u64>()) {
        let d = tree.degree_sequence();
        let sample = sample_tree(&d, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(sample.degrees(), d.degrees().to_vec());
    }

    #[test]
    fn codes_ignore_labels(tree in random_tree(), seed in any::<u64>(), radius in 0usize..4) {
        let mut perm: Vec<u32> = (0..tree.n() as u32).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let relabeled = tree.relabel(&perm);
        prop_assert_eq!(empirical_stats(&tree, radius), empirical_stats(&relabeled, radius));
    }

    #[test]
    fn frequencies_sum_to_one_and_coarsen(tree in random_tree(), radius in 1usize..4) {
        let stats = empirical_stats(&tree, radius);
        let total: BigRational = stats.frequencies().into_values().sum();
        prop_assert!(total.is_one());
        prop_assert_eq!(stats.coarsen(radius - 1), empirical_stats(&tree, radius - 1));
    }

    #[test]
    fn ball_frequency_is_labeled_count_over_automorphisms(tree in random_tree(), radius in 1usize..4) {
        let n = tree.n();
        for (code, count) in empirical_stats(&tree, radius).counts {
            let b = RootedBall::from_code(&code);
            if b.depth() < radius {
                // a whole small tree; the identity concerns l-deep classes
                continue;
            }
            let (stripped, r) = strip_last_level(&b).unwrap();
            let nf = NumberedForest::from_rooted(&stripped, r).unwrap();
            let x = BigRational::from_integer(BigInt::from(x_statistic(&nf, &tree)));
            let q = from_uint(aut_quotient_size(&b).unwrap());
            prop_assert_eq!(
                rational(count as i64, n as i64),
                x / (q * BigRational::from_integer(BigInt::from(n)))
            );
        }
    }

    #[test]
    fn labeled_density_bounds(tree in random_tree(), nf in numbered_forest(5)) {
        prop_assume!(tree.n() >= 8);
        let x = x_statistic(&nf, &tree);
        let density = x as f64 / tree.n() as f64;
        let k = nf.node_count() as i32;
        let max_r = *nf.remainders().iter().max().unwrap();
        prop_assert!(density <= f64::from(1 + max_r).powi(k * k));
        if nf.component_count() == 1 {
            let delta = *nf.target_degrees().iter().max().unwrap();
            prop_assert!(density <= f64::from(delta).powi(k - 1));
        }
    }

    #[test]
    fn forest_probability_matches_enumeration(nf in numbered_forest(4), n in 4usize..7, seed in any::<u64>()) {
        prop_assume!(nf.node_count() <= n);
        let phi = injective_map(n, nf.node_count(), seed);
        for model in models(n) {
            match forest_embed_prob(&model, &nf, n) {
                Ok(p) => prop_assert_eq!(p, brute_prob(&model, n, |t| embeds(&nf, &phi, t))),
                Err(Error::DegenerateConfiguration(_)) => {
                    prop_assert!(nf.component_remainder_sums().contains(&0));
                }
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }
    }

    #[test]
    fn conditional_probability_matches_enumeration(
        nf1 in numbered_forest(3),
        nf2 in numbered_forest(3),
        n in 5usize..7,
        seeds in (any::<u64>(), any::<u64>()),
    ) {
        let phi = injective_map(n, nf1.node_count(), seeds.0);
        let psi = injective_map(n, nf2.node_count(), seeds.1);
        for model in models(n) {
            let joint = brute_prob(&model, n, |t| embeds(&nf1, &phi, t) && embeds(&nf2, &psi, t));
            let marginal = brute_prob(&model, n, |t| embeds(&nf2, &psi, t));
            match cond_embed_prob(&model, &nf1, &phi, &nf2, &psi, n) {
                Ok(p) => prop_assert_eq!(p, joint / marginal),
                Err(Error::NullConditioning) => prop_assert!(marginal.is_zero()),
                Err(Error::InconsistentRemainders(_)) | Err(Error::NotAForest) => {
                    prop_assert!(joint.is_zero());
                }
                Err(Error::DegenerateConfiguration(_)) => {
                    let merged = merge_numbered(&nf1, &phi, &nf2, &psi).unwrap();
                    prop_assert!(
                        merged.forest.component_remainder_sums().contains(&0)
                            || nf2.component_remainder_sums().contains(&0)
                    );
                }
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }
    }
}

#[test]
fn tree_counts_match_enumeration() {
    for n in 2..=8 {
        for d in enumerate_degree_sequences(n).unwrap() {
            let listed = enumerate_trees(&d).unwrap().count();
            assert_eq!(BigInt::from(listed), count_trees(&d).into(), "{d}");
        }
    }
}

#[test]
fn expected_count_matches_enumeration() {
    let n = 6;
    let tree_nf = NumberedForest::new(3, &[(0, 1), (1, 2)], vec![1, 0, 2]).unwrap();
    for model in models(n) {
        let brute: BigRational = all_labeled_trees(n)
            .map(|t| {
                tree_probability(&model, &t).unwrap()
                    * BigRational::from_integer(x_statistic(&tree_nf, &t).into())
            })
            .sum();
        assert_eq!(expected_x(&model, &tree_nf, n).unwrap(), brute);
    }
}

#[test]
fn canonical_codes_separate_shapes() {
    let path = LabeledTree::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
    let star = LabeledTree::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
    let a = empirical_stats(&path, 3);
    let b = empirical_stats(&star, 3);
    assert!(a.counts.keys().all(|c| !b.counts.contains_key(c)));
    assert_eq!(
        canonical_code(&RootedBall::from_code(a.counts.keys().next().unwrap())),
        a.counts.keys().next().unwrap().clone()
    );
}
