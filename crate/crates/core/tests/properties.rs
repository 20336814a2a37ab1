//! Property-based tests for the combinatorial and framework invariants:
//! colex ranking roundtrips, log-domain binomials against exact big-integer
//! values, the operational conflict predicate against its quantifier-level
//! oracle, partition and validator invariants, and relabeling invariance of
//! the derived sublist-system family.

use num_bigint::BigUint;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use localcolor_core::combinatorics::{
    colex_rank, colex_unrank, enumerate_k_subsets, greedy_cover_free,
    log_binomial, select_low_agreement_functions, tau_tau_conflict, tau_tau_conflict_sequences,
    CombinatoricsError,
};
use localcolor_core::framework::{
    analysis_parameters, build_l2, good_at_threshold, Budget, Overrides,
};
use localcolor_core::graph::{validate_coloring, VertexColoring};
use localcolor_core::protocols::partition::low_outdegree_partition;
use localcolor_core::Graph;

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

fn arb_subset() -> impl Strategy<Value = Vec<u32>> {
    // Sorted distinct subsets of [0, 12).
    prop::sample::subsequence((0u32..12).collect::<Vec<_>>(), 1..=6)
}

fn arb_system() -> impl Strategy<Value = Vec<Vec<u32>>> {
    // Up to 3 members, each a sorted distinct subset of a 7-color space.
    prop::collection::vec(prop::sample::subsequence((0u32..7).collect::<Vec<_>>(), 1..=3), 1..=3)
}

fn arb_edges(n: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
    let all: Vec<(usize, usize)> =
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let max = all.len();
    prop::sample::subsequence(all, 0..=max)
}

// ---------------------------------------------------------------------------
// Combinatorics
// ---------------------------------------------------------------------------

proptest! {
    #[test]
    fn colex_rank_roundtrips(set in arb_subset()) {
        let rank = colex_rank(&set);
        prop_assert_eq!(colex_unrank(rank, set.len() as u32), set);
    }

    #[test]
    fn colex_enumeration_is_rank_ordered(k in 1u32..=4) {
        let base: Vec<u32> = (0..10).collect();
        let subsets = enumerate_k_subsets(&base, k, 1_000_000).unwrap();
        for (i, s) in subsets.iter().enumerate() {
            prop_assert_eq!(colex_rank(s), i as u128);
        }
    }

    #[test]
    fn log_binomial_matches_big_integers(n in 1u128..400, frac in 0.0f64..1.0) {
        let k = ((n as f64) * frac) as u128;
        let mut exact = BigUint::from(1u32);
        for i in 0..k {
            exact = exact * (n - i) / (i + 1);
        }
        // ln of a BigUint through its decimal digits.
        let digits = exact.to_string();
        let head: f64 = digits[..digits.len().min(15)].parse().unwrap();
        let ln_exact =
            head.ln() + (digits.len().saturating_sub(15) as f64) * 10f64.ln();
        prop_assert!(
            (log_binomial(n, k) - ln_exact).abs() < 1e-6,
            "C({}, {}): log methods disagree: {} vs {}",
            n, k, log_binomial(n, k), ln_exact
        );
    }

    #[test]
    fn operational_conflict_matches_quantifier_oracle(
        a in arb_system(),
        b in arb_system(),
        tau_prime in 1usize..=3,
        tau in 1usize..=3,
    ) {
        prop_assert_eq!(
            tau_tau_conflict(&a, &b, tau_prime, tau),
            tau_tau_conflict_sequences(&a, &b, tau_prime, tau),
            "a = {:?}, b = {:?}, tau' = {}, tau = {}", a, b, tau_prime, tau
        );
    }

    #[test]
    fn selected_functions_stay_below_z(
        count in 1usize..=12,
        positions in 3usize..=8,
        values in 3usize..=8,
        z in 1usize..=3,
    ) {
        prop_assume!(positions >= z);
        match select_low_agreement_functions(count, positions, values, z, 50_000) {
            Ok(fs) => {
                prop_assert_eq!(fs.len(), count);
                for i in 0..fs.len() {
                    for j in 0..i {
                        let agree = fs[i].iter().zip(&fs[j]).filter(|(x, y)| x == y).count();
                        prop_assert!(agree < z);
                    }
                }
            }
            // Tight shapes (few values, small z) can genuinely run out of
            // mutually compatible functions; the budget error is the
            // documented outcome there.
            Err(CombinatoricsError::SelectionBudgetExceeded { .. }) => {}
            Err(other) => return Err(TestCaseError::fail(other.to_string())),
        }
    }

    #[test]
    fn cover_free_residual_beats_delta(m in 3u32..=9, delta in 2u32..=3) {
        let fam = greedy_cover_free(m, delta, 1_000_000).unwrap();
        prop_assert_eq!(fam.sets.len(), m as usize);
        // The strong form: each set keeps >= delta private points against
        // the union of any delta others.
        let indices: Vec<usize> = (0..m as usize).collect();
        for (i, set) in fam.sets.iter().enumerate() {
            let others: Vec<usize> = indices.iter().copied().filter(|&j| j != i).collect();
            for pick in enumerate_k_subsets(
                &others.iter().map(|&j| j as u32).collect::<Vec<_>>(),
                delta,
                1_000_000,
            )
            .unwrap()
            {
                let union: Vec<u32> = pick
                    .iter()
                    .flat_map(|&j| fam.sets[j as usize].iter().copied())
                    .collect();
                let survivors = set
                    .iter()
                    .filter(|&&p| !union.contains(&p))
                    .count();
                prop_assert!(
                    survivors >= delta as usize,
                    "set {} keeps only {} points",
                    i, survivors
                );
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Framework
// ---------------------------------------------------------------------------

proptest! {
    #[test]
    fn goodness_is_monotone_in_the_threshold(
        counts in prop::collection::vec(0u64..20, 1..30),
        t1 in 0u64..20,
        bump in 0u64..20,
    ) {
        let low = good_at_threshold(&counts, t1);
        let high = good_at_threshold(&counts, t1 + bump);
        prop_assert!(low.iter().all(|i| high.contains(i)));
    }

    #[test]
    fn l2_family_is_relabeling_invariant(
        base in prop::sample::subsequence((0u32..40).collect::<Vec<_>>(), 5),
        seed in 0u64..1000,
    ) {
        let params = analysis_parameters(
            2,
            2,
            100,
            Overrides { tau: 1, tau_prime: 2, k: 2, k_prime: 2, l0: 5 },
        )
        .unwrap();
        let budget = Budget::default();
        let original = build_l2(&base, &params, &budget).unwrap();

        // Relabel colors through a random injection into a fresh range.
        let mut targets: Vec<u32> = (50..90).collect();
        targets.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut mapped: Vec<u32> = base
            .iter()
            .enumerate()
            .map(|(i, _)| targets[i])
            .collect();
        mapped.sort_unstable();
        let relabeled = build_l2(&mapped, &params, &budget).unwrap();

        prop_assert_eq!(original.retained.len(), relabeled.retained.len());
        prop_assert_eq!(original.vacuous, relabeled.vacuous);
        let mut a = original.covering_counts();
        let mut b = relabeled.covering_counts();
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
    }
}

// ---------------------------------------------------------------------------
// Graphs, partitions, validation
// ---------------------------------------------------------------------------

proptest! {
    #[test]
    fn partition_respects_its_own_contract(
        edges in arb_edges(24),
        beta in 1u64..=3,
    ) {
        let g = Graph::from_edges(24, &edges, (0..24).collect(), 24).unwrap();
        let partition = low_outdegree_partition(&g, beta).unwrap();
        partition.validate(&g).unwrap();
        prop_assert!(partition.max_out_degree() as u64 <= beta);
        let expected_classes = (g.max_degree() as u64).div_ceil(beta).max(1);
        prop_assert!(partition.k as u64 <= expected_classes);
    }

    #[test]
    fn validator_agrees_with_naive_defect_scan(
        edges in arb_edges(16),
        colors in prop::collection::vec(0u32..4, 16),
        d in 0usize..3,
    ) {
        let g = Graph::from_edges(16, &edges, (0..16).collect(), 16).unwrap();
        let coloring =
            VertexColoring::from_colors(colors.iter().map(|&c| Some(c)).collect());
        let naive_ok = (0..16).all(|v| {
            let defect = g
                .neighbors(v)
                .iter()
                .filter(|&&u| colors[u] == colors[v])
                .count();
            defect <= d
        });
        prop_assert_eq!(validate_coloring(&g, None, &coloring, d).is_valid(), naive_ok);
    }
}
