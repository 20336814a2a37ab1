//! Combinatorial primitives: binomial coefficients (exact and in the log
//! domain), colexicographic subset enumeration, the conflict predicates on
//! sublists and sublist systems, low-agreement function selection, and the
//! greedy cover-free family construction.
//!
//! Canonical subset order. Everywhere in this crate, k-element subsets are
//! ordered colexicographically: `A < B` iff `max(A Δ B) ∈ B`. Equivalently,
//! writing a subset as a sorted tuple `c_0 < c_1 < ... < c_{k-1}`, its rank
//! is `Σ_i C(c_i, i+1)`. Enumeration, greedy tie-breaking, and "first
//! member" rules all refer to this order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CombinatoricsError {
    #[error("enumeration of {count} candidates exceeds the budget of {budget}")]
    BudgetExceeded { count: u128, budget: u64 },
    #[error("greedy selection visited more than {budget} candidates")]
    SelectionBudgetExceeded { budget: u64 },
    #[error("cover-free construction needs delta >= 2 and m >= 3, got delta = {delta}, m = {m}")]
    CoverFreeParams { delta: u32, m: u32 },
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact binomial coefficient, `None` on u128 overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    binomial_u128(u128::from(n), k)
}

/// Exact binomial coefficient with a u128 upper argument, `None` on
/// overflow of the result.
pub fn binomial_u128(n: u128, k: u64) -> Option<u128> {
    let mut k = u128::from(k);
    if k > n {
        return Some(0);
    }
    if n - k < k {
        k = n - k;
    }
    let mut result: u128 = 1;
    for i in 0..k {
        // Invariant: result == C(n, i). Reduce num/den by their gcd first;
        // the remaining denominator then divides result exactly, so the
        // intermediate value never exceeds C(n, i + 1) itself.
        let mut num = n - i;
        let mut den = i + 1;
        let g = gcd(num, den);
        num /= g;
        den /= g;
        result = (result / den).checked_mul(num)?;
    }
    Some(result)
}

/// Natural log of `C(n, k)` by exact summation of log terms:
/// `Σ_{i<k} ln(n-i) - ln(i+1)` after reducing `k` to `min(k, n-k)`.
///
/// Relative error stays within 1e-9 for all arguments where the summation
/// length is at most a few million terms.
pub fn log_binomial(n: u128, k: u128) -> f64 {
    assert!(k <= n, "log_binomial requires k <= n");
    let k = k.min(n - k);
    let mut sum = 0.0_f64;
    for i in 0..k {
        sum += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    sum
}

/// `ln k!` via the log-gamma function.
pub fn ln_factorial(k: u64) -> f64 {
    libm::lgamma((k as f64) + 1.0)
}

/// Natural log of `C(n, k)` where only `ln n` is available because `n`
/// itself is astronomically large. Valid when `k^2` is negligible against
/// `n`: the neglected correction is `Σ_{i<k} ln(1 - i/n) ∈ [-k^2/n, 0]`,
/// which the caller must account for via [`ln_binomial_from_ln_error`].
pub fn ln_binomial_from_ln(ln_n: f64, k: u64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    (k as f64) * ln_n - ln_factorial(k)
}

/// Upper bound on the absolute error of [`ln_binomial_from_ln`]:
/// `k^2 / n = exp(2 ln k - ln n)`.
pub fn ln_binomial_from_ln_error(ln_n: f64, k: u64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    (2.0 * (k as f64).ln() - ln_n).exp()
}

/// Colexicographic rank of a sorted k-subset: `Σ_i C(set[i], i+1)`.
/// Panics on u128 overflow (ranks this large are never enumerated).
pub fn colex_rank(set: &[u32]) -> u128 {
    let mut rank: u128 = 0;
    for (i, &c) in set.iter().enumerate() {
        rank += binomial(u64::from(c), (i as u64) + 1).expect("colex rank overflow");
    }
    rank
}

/// Inverse of [`colex_rank`] for k-subsets (elements are positions, i.e.
/// the subset is over `0..` some universe large enough to contain it).
pub fn colex_unrank(mut rank: u128, k: u32) -> Vec<u32> {
    let mut set = vec![0u32; k as usize];
    for i in (1..=k).rev() {
        // Largest c with C(c, i) <= rank.
        let mut c = i - 1; // C(i-1, i) = 0 <= rank always
        let mut best = 0u128;
        let mut probe = c + 1;
        loop {
            let value = binomial(u64::from(probe), u64::from(i)).expect("colex unrank overflow");
            if value <= rank {
                c = probe;
                best = value;
                probe += 1;
            } else {
                break;
            }
        }
        rank -= best;
        set[(i - 1) as usize] = c;
    }
    set
}

/// Iterator over all k-subsets of `0..universe` in colexicographic order,
/// yielding sorted position vectors.
pub struct KSubsets {
    universe: u32,
    current: Option<Vec<u32>>,
}

impl KSubsets {
    pub fn new(universe: u32, k: u32) -> Self {
        let current = if k <= universe { Some((0..k).collect()) } else { None };
        KSubsets { universe, current }
    }
}

impl Iterator for KSubsets {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let current = self.current.as_mut()?;
        let item = current.clone();
        // Colex successor: find the first position i where current[i] + 1 is
        // free (less than the next element or the universe bound), increment
        // it, and reset positions below to 0..i.
        let k = current.len();
        let mut i = 0;
        loop {
            if i == k {
                self.current = None;
                break;
            }
            let limit =
                if i + 1 < k { current[i + 1] } else { self.universe };
            if current[i] + 1 < limit {
                current[i] += 1;
                for (j, slot) in current.iter_mut().enumerate().take(i) {
                    *slot = j as u32;
                }
                break;
            }
            i += 1;
        }
        Some(item)
    }
}

/// Enumerates all k-subsets of `base` (sorted colors) in colex order after
/// checking `C(|base|, k)` against `budget`.
pub fn enumerate_k_subsets(
    base: &[u32],
    k: u32,
    budget: u64,
) -> Result<Vec<Vec<u32>>, CombinatoricsError> {
    let count = binomial(base.len() as u64, u64::from(k))
        .unwrap_or(u128::MAX);
    if count > u128::from(budget) {
        return Err(CombinatoricsError::BudgetExceeded { count, budget });
    }
    Ok(KSubsets::new(base.len() as u32, k)
        .map(|positions| positions.iter().map(|&p| base[p as usize]).collect())
        .collect())
}

/// Size of the intersection of two sorted, duplicate-free slices.
pub fn intersection_size(a: &[u32], b: &[u32]) -> usize {
    let mut i = 0;
    let mut j = 0;
    let mut count = 0;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Two sorted color sets tau-conflict iff they share at least `tau` colors.
pub fn tau_conflict(a: &[u32], b: &[u32], tau: usize) -> bool {
    if tau == 0 {
        return true;
    }
    let mut i = 0;
    let mut j = 0;
    let mut count = 0;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                if count >= tau {
                    return true;
                }
                i += 1;
                j += 1;
            }
        }
    }
    false
}

/// True iff at least `tau_prime` distinct members of `a` each tau-conflict
/// with some member of `b`.
pub fn directed_hit(a: &[Vec<u32>], b: &[Vec<u32>], tau_prime: usize, tau: usize) -> bool {
    if tau_prime == 0 {
        return true;
    }
    let mut hits = 0;
    for member in a {
        if b.iter().any(|other| tau_conflict(member, other, tau)) {
            hits += 1;
            if hits >= tau_prime {
                return true;
            }
        }
    }
    false
}

/// Two systems of color sets (tau_prime, tau)-conflict iff at least
/// `tau_prime` distinct members of one of them each tau-conflict with some
/// member of the other.
pub fn tau_tau_conflict(
    a: &[Vec<u32>],
    b: &[Vec<u32>],
    tau_prime: usize,
    tau: usize,
) -> bool {
    directed_hit(a, b, tau_prime, tau) || directed_hit(b, a, tau_prime, tau)
}

/// Reference form of the (tau_prime, tau)-conflict: there are sequences
/// `a_1..a_t` from `a` and `b_1..b_t` from `b` (t = tau_prime) such that
/// `a_i` tau-conflicts with `b_i` for every i and at least one of the two
/// sequences has pairwise distinct entries. Exponential; test oracle only.
pub fn tau_tau_conflict_sequences(
    a: &[Vec<u32>],
    b: &[Vec<u32>],
    tau_prime: usize,
    tau: usize,
) -> bool {
    fn distinct_side(
        distinct: &[Vec<u32>],
        free: &[Vec<u32>],
        t: usize,
        tau: usize,
    ) -> bool {
        // Choose t distinct members on one side; each must conflict with
        // some member of the other side (the free side may repeat, so only
        // existence matters per chosen member).
        fn rec(
            distinct: &[Vec<u32>],
            free: &[Vec<u32>],
            t: usize,
            tau: usize,
            start: usize,
            chosen: usize,
        ) -> bool {
            if chosen == t {
                return true;
            }
            for i in start..distinct.len() {
                if free.iter().any(|f| tau_conflict(&distinct[i], f, tau))
                    && rec(distinct, free, t, tau, i + 1, chosen + 1)
                {
                    return true;
                }
            }
            false
        }
        rec(distinct, free, t, tau, 0, 0)
    }
    if tau_prime == 0 {
        return true;
    }
    distinct_side(a, b, tau_prime, tau) || distinct_side(b, a, tau_prime, tau)
}

/// Seed for the candidate stream below; fixed so that selection is a pure
/// function of its arguments.
const SELECTION_SEED: u64 = 0x636f_7665_7266_7265;

/// Selects `count` functions `[positions] -> [values]`, pairwise agreeing on
/// fewer than `z` positions.
///
/// This is the greedy removal loop run over a deterministic candidate
/// stream: a candidate is kept exactly when no kept function would already
/// have removed it (agreement with every kept function stays below `z`).
/// The stream is a fixed-seed ChaCha8 sequence rather than lexicographic
/// order — lexicographic scans stall for astronomically long inside the
/// dead regions surrounding the first few kept functions, while spread-out
/// candidates conflict with each kept function with probability at most
/// `e^-z`, so on the target parameter shapes (`values ≈ e²·positions/z`)
/// the loop needs about `e · count` candidates. `budget` caps the number
/// of candidates drawn.
pub fn select_low_agreement_functions(
    count: usize,
    positions: usize,
    values: usize,
    z: usize,
    budget: u64,
) -> Result<Vec<Vec<u32>>, CombinatoricsError> {
    assert!(z >= 1 && positions >= z, "need z >= 1 and at least z positions");
    assert!(values >= 1 && values <= u32::MAX as usize, "values must fit in u32");
    let mut rng = ChaCha8Rng::seed_from_u64(SELECTION_SEED);
    let mut selected: Vec<Vec<u32>> = Vec::with_capacity(count);
    let mut visited: u64 = 0;
    while selected.len() < count {
        visited += 1;
        if visited > budget {
            return Err(CombinatoricsError::SelectionBudgetExceeded { budget });
        }
        let f: Vec<u32> =
            (0..positions).map(|_| rng.next_u32() % values as u32).collect();
        let keep = selected.iter().all(|g| {
            let mut agree = 0;
            for (a, b) in f.iter().zip(g) {
                if a == b {
                    agree += 1;
                    if agree >= z {
                        return false;
                    }
                }
            }
            true
        });
        if keep {
            selected.push(f);
        }
    }
    Ok(selected)
}

/// A family of m sets over a flattened universe such that no set is covered
/// by the union of any `delta` others.
#[derive(Debug, Clone, Serialize)]
pub struct CoverFreeFamily {
    pub delta: u32,
    pub m: u32,
    /// Agreement threshold: distinct functions agree on < z positions.
    pub z: u32,
    /// Number of positions per function.
    pub x: u32,
    /// Number of values per position.
    pub l: u32,
    /// Universe size `x * l`.
    pub universe: u32,
    /// `sets[i]` is the sorted set of the i-th function, flattening position
    /// `p` with value `v` to `p * l + v`.
    pub sets: Vec<Vec<u32>>,
}

impl CoverFreeFamily {
    /// Residual guarantee: `|S_i \ (S_j1 ∪ ... ∪ S_jd)| >= x - d*(z-1)`,
    /// which is at least `delta` when `d <= delta`.
    pub fn residual_lower_bound(&self, d: u32) -> i64 {
        i64::from(self.x) - i64::from(d) * (i64::from(self.z) - 1)
    }
}

/// Greedy construction of a `delta`-cover-free family of size `m`:
/// functions `[x] -> [l]` with `z = ceil(ln m)`, `x = delta * z`,
/// `l = ceil(e^2 * x / z)`, selected so that distinct functions agree on
/// fewer than `z` positions. Sets of distinct functions then intersect in
/// fewer than `z` points, so any `delta` of them can cover at most
/// `delta * (z - 1) < x` points of another set.
pub fn greedy_cover_free(
    m: u32,
    delta: u32,
    budget: u64,
) -> Result<CoverFreeFamily, CombinatoricsError> {
    if delta < 2 || m < 3 {
        return Err(CombinatoricsError::CoverFreeParams { delta, m });
    }
    let z = (f64::from(m).ln()).ceil() as u32;
    let x = delta * z;
    let l = (std::f64::consts::E.powi(2) * f64::from(x) / f64::from(z)).ceil() as u32;
    let functions = select_low_agreement_functions(
        m as usize,
        x as usize,
        l as usize,
        z as usize,
        budget,
    )?;
    let sets = functions
        .iter()
        .map(|f| f.iter().enumerate().map(|(p, &v)| (p as u32) * l + v).collect())
        .collect();
    Ok(CoverFreeFamily { delta, m, z, x, l, universe: x * l, sets })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(0, 0), Some(1));
        assert_eq!(binomial(5, 2), Some(10));
        assert_eq!(binomial(10, 3), Some(120));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(binomial(82, 14), Some(2_198_671_448_379_300));
        // C(128, 64) needs 125 bits; it still fits in u128.
        assert!(binomial(128, 64).is_some());
        assert_eq!(binomial(300, 150), None);
    }

    #[test]
    fn log_binomial_matches_exact() {
        // ln C(163, 14) = ln 60363474787039134600 = 45.5469158...
        let expected = 45.546_915_873_846_565;
        let got = log_binomial(163, 14);
        assert!((got - expected).abs() / expected < 1e-9, "got {got}");

        for &(n, k) in &[(10u128, 3u128), (52, 5), (100, 50), (7, 0), (7, 7)] {
            let exact = binomial(n as u64, k as u64).unwrap() as f64;
            let got = log_binomial(n, k);
            assert!((got - exact.ln()).abs() <= 1e-9 * exact.ln().abs().max(1.0));
        }
    }

    #[test]
    fn ln_binomial_from_ln_tracks_exact_when_n_large() {
        // C(10^12, 5): k^2/n = 2.5e-11, so the shortcut is accurate.
        let n: u128 = 1_000_000_000_000;
        let exact = log_binomial(n, 5);
        let approx = ln_binomial_from_ln((n as f64).ln(), 5);
        assert!((exact - approx).abs() < 1e-6);
        assert!(ln_binomial_from_ln_error((n as f64).ln(), 5) < 1e-10);
    }

    #[test]
    fn colex_order_of_pairs() {
        // Pairs over 0..4 in colex order.
        let got: Vec<Vec<u32>> = KSubsets::new(4, 2).collect();
        let expected = vec![
            vec![0, 1],
            vec![0, 2],
            vec![1, 2],
            vec![0, 3],
            vec![1, 3],
            vec![2, 3],
        ];
        assert_eq!(got, expected);
        for (rank, set) in expected.iter().enumerate() {
            assert_eq!(colex_rank(set), rank as u128);
            assert_eq!(colex_unrank(rank as u128, 2), *set);
        }
    }

    #[test]
    fn colex_enumeration_is_ranked_order() {
        for k in 1..=3u32 {
            for (expected_rank, set) in KSubsets::new(7, k).enumerate() {
                assert_eq!(colex_rank(&set), expected_rank as u128);
            }
        }
    }

    #[test]
    fn enumerate_respects_budget() {
        let base: Vec<u32> = (0..20).collect();
        assert!(enumerate_k_subsets(&base, 10, 1000).is_err());
        let subsets = enumerate_k_subsets(&base, 2, 1000).unwrap();
        assert_eq!(subsets.len(), 190);
    }

    #[test]
    fn tau_conflict_counts_shared_colors() {
        assert!(tau_conflict(&[1, 2, 3], &[3, 4, 5], 1));
        assert!(!tau_conflict(&[1, 2, 3], &[3, 4, 5], 2));
        assert!(tau_conflict(&[1, 2, 3], &[2, 3, 4], 2));
        assert!(tau_conflict(&[], &[], 0));
        assert!(!tau_conflict(&[1], &[2], 1));
    }

    #[test]
    fn tau_tau_operational_examples() {
        // Systems of singletons behave like plain set intersection.
        let a = vec![vec![0], vec![1], vec![2]];
        let b = vec![vec![1], vec![2], vec![3]];
        assert!(tau_tau_conflict(&a, &b, 2, 1));
        assert!(!tau_tau_conflict(&a, &b, 3, 1));

        // One fat member of b covers two members of a: the distinct side is a.
        let a = vec![vec![0, 9], vec![1, 8]];
        let b = vec![vec![0, 1]];
        assert!(tau_tau_conflict(&a, &b, 2, 1));
        assert!(tau_tau_conflict_sequences(&a, &b, 2, 1));
        // ... but b has only one member, so tau_prime = 2 cannot be met on
        // the b side alone if a's members miss it.
        let far = vec![vec![4, 5], vec![6, 7]];
        assert!(!tau_tau_conflict(&far, &b, 2, 1));
        assert!(!tau_tau_conflict_sequences(&far, &b, 2, 1));
    }

    #[test]
    fn low_agreement_selection_is_pairwise_low() {
        let fs = select_low_agreement_functions(10, 6, 5, 2, 1_000_000).unwrap();
        assert_eq!(fs.len(), 10);
        for f in &fs {
            assert_eq!(f.len(), 6);
            assert!(f.iter().all(|&v| v < 5));
        }
        for i in 0..fs.len() {
            for j in 0..i {
                let agreements =
                    fs[i].iter().zip(&fs[j]).filter(|(a, b)| a == b).count();
                assert!(agreements < 2, "{:?} vs {:?}", fs[i], fs[j]);
            }
        }
        // Same arguments, same family.
        let again = select_low_agreement_functions(10, 6, 5, 2, 1_000_000).unwrap();
        assert_eq!(fs, again);
    }

    #[test]
    fn selection_budget_is_enforced() {
        // Functions [2] -> [2] pairwise agreeing on < 1 position: at most 2
        // can coexist (a function and its pointwise complement), so asking
        // for 3 exhausts any budget.
        let err = select_low_agreement_functions(3, 2, 2, 1, 1000).unwrap_err();
        assert_eq!(err, CombinatoricsError::SelectionBudgetExceeded { budget: 1000 });
    }

    #[test]
    fn cover_free_small_family() {
        let fam = greedy_cover_free(3, 2, 1_000_000).unwrap();
        // z = ceil(ln 3) = 2, x = 4, l = ceil(e^2 * 2) = 15, universe 60.
        assert_eq!((fam.z, fam.x, fam.l, fam.universe), (2, 4, 15, 60));
        for set in &fam.sets {
            assert_eq!(set.len(), fam.x as usize);
        }
        for i in 0..fam.sets.len() {
            for j in 0..i {
                let shared = intersection_size(&fam.sets[i], &fam.sets[j]);
                assert!(shared < fam.z as usize);
            }
        }
        assert!(fam.residual_lower_bound(2) >= 2);
    }
}
