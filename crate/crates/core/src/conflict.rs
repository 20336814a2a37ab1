//! Conflict coloring instances and the zero-round solver.
//!
//! An instance consists of a finite universe of encoded elements, a
//! symmetric conflict relation on that universe, and a family of lists
//! (subsets of the universe). A solution assigns every (input color, list)
//! type an element of the list such that elements assigned to distinct
//! types never conflict. When every list has more elements than
//! `m * |family| * d` (with `d` the conflict degree), the greedy
//! first-fit over types always succeeds — without any communication.
//!
//! Elements are abstract indices; the relation gives them meaning:
//! - `Equality`: elements conflict iff equal (plain coloring),
//! - `Tau`: elements are color sets, conflicting iff they share >= tau
//!   colors,
//! - `TauTau`: elements are systems of color sets, conflicting iff one of
//!   them has >= tau_prime distinct members each sharing >= tau colors with
//!   some member of the other.

use thiserror::Error;

use crate::combinatorics::tau_conflict;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConflictError {
    #[error("list {list} is empty")]
    EmptyList { list: usize },
    #[error("list {list} references element {element} outside the universe of size {universe}")]
    ElementOutOfRange { list: usize, element: usize, universe: usize },
    #[error("conflict degree computation needs {needed} relation evaluations, budget is {budget}")]
    DegreeBudget { needed: u128, budget: u64 },
    #[error(
        "no conflict-free choice for type (color {color}, list {list}): \
         every element of the list conflicts with an earlier assignment"
    )]
    Stuck { color: u32, list: usize },
    #[error("vertex {vertex} maps to list {list}, but the family has {family} lists")]
    ListIndexOutOfRange { vertex: usize, list: usize, family: usize },
}

/// Square bit matrix, used for precomputed member-level conflicts.
#[derive(Debug, Clone)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix { n, words, bits: vec![0; n * words] }
    }

    pub fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] & (1 << (j % 64)) != 0
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// The conflict relation over encoded elements.
#[derive(Debug, Clone)]
pub enum ConflictRelation {
    /// Elements conflict iff they are the same element.
    Equality,
    /// Element `e` is the color set `members[e]`; conflict means sharing at
    /// least `tau` colors.
    Tau { tau: usize, members: Vec<Vec<u32>> },
    /// Element `e` is a system of color sets. `systems[e]` lists indices
    /// into a shared member table; `member_conflict` holds the member-level
    /// tau-conflicts. Systems conflict iff at least `tau_prime` distinct
    /// members of one have a member-level conflict into the other.
    TauTau {
        tau_prime: usize,
        tau: usize,
        member_count: usize,
        systems: Vec<Vec<u32>>,
        member_conflict: BitMatrix,
        /// Per system: bitset of its member indices.
        member_mask: Vec<Vec<u64>>,
        /// Per system: bitset of members conflicting with >= 1 of its members.
        hit_mask: Vec<Vec<u64>>,
    },
}

fn popcount_and(a: &[u64], b: &[u64]) -> usize {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as usize).sum()
}

impl ConflictRelation {
    /// Builds the `TauTau` variant from explicit systems of color sets.
    /// `members` is the shared member table (each entry a sorted color set);
    /// `systems` hold sorted indices into it.
    pub fn tau_tau(
        tau_prime: usize,
        tau: usize,
        members: Vec<Vec<u32>>,
        systems: Vec<Vec<u32>>,
    ) -> Self {
        let member_count = members.len();
        let mut member_conflict = BitMatrix::new(member_count);
        for i in 0..member_count {
            for j in 0..=i {
                if tau_conflict(&members[i], &members[j], tau) {
                    member_conflict.set(i, j);
                    member_conflict.set(j, i);
                }
            }
        }
        let words = member_count.div_ceil(64);
        let mut member_mask = Vec::with_capacity(systems.len());
        let mut hit_mask = Vec::with_capacity(systems.len());
        for system in &systems {
            let mut mask = vec![0u64; words];
            let mut hits = vec![0u64; words];
            for &m in system {
                let m = m as usize;
                mask[m / 64] |= 1 << (m % 64);
                for (w, &row_word) in hits.iter_mut().zip(member_conflict.row(m)) {
                    *w |= row_word;
                }
            }
            member_mask.push(mask);
            hit_mask.push(hits);
        }
        ConflictRelation::TauTau {
            tau_prime,
            tau,
            member_count,
            systems,
            member_conflict,
            member_mask,
            hit_mask,
        }
    }

    pub fn universe_size(&self) -> Option<usize> {
        match self {
            ConflictRelation::Equality => None,
            ConflictRelation::Tau { members, .. } => Some(members.len()),
            ConflictRelation::TauTau { systems, .. } => Some(systems.len()),
        }
    }

    /// Symmetric conflict between elements `a` and `b`.
    pub fn conflicts(&self, a: usize, b: usize) -> bool {
        match self {
            ConflictRelation::Equality => a == b,
            ConflictRelation::Tau { tau, members } => {
                tau_conflict(&members[a], &members[b], *tau)
            }
            ConflictRelation::TauTau { tau_prime, member_mask, hit_mask, .. } => {
                popcount_and(&member_mask[a], &hit_mask[b]) >= *tau_prime
                    || popcount_and(&member_mask[b], &hit_mask[a]) >= *tau_prime
            }
        }
    }

    /// Directed form for `TauTau`: true iff at least `tau_prime` distinct
    /// members of `a` each conflict with some member of `b`. For the other
    /// relations this coincides with [`conflicts`].
    pub fn directed_hit(&self, a: usize, b: usize) -> bool {
        match self {
            ConflictRelation::TauTau { tau_prime, member_mask, hit_mask, .. } => {
                popcount_and(&member_mask[a], &hit_mask[b]) >= *tau_prime
            }
            _ => self.conflicts(a, b),
        }
    }
}

/// A conflict coloring instance: relation, family of lists over the encoded
/// universe, and the input color count `m`.
#[derive(Debug, Clone)]
pub struct ConflictInstance {
    pub universe: usize,
    pub relation: ConflictRelation,
    /// Lists of element indices, each sorted ascending (canonical order).
    pub family: Vec<Vec<usize>>,
    pub m: u32,
}

impl ConflictInstance {
    pub fn new(
        universe: usize,
        relation: ConflictRelation,
        family: Vec<Vec<usize>>,
        m: u32,
    ) -> Result<Self, ConflictError> {
        if let Some(n) = relation.universe_size() {
            debug_assert_eq!(n, universe);
        }
        for (list, elements) in family.iter().enumerate() {
            if elements.is_empty() {
                return Err(ConflictError::EmptyList { list });
            }
            if let Some(&element) = elements.iter().find(|&&e| e >= universe) {
                return Err(ConflictError::ElementOutOfRange { list, element, universe });
            }
        }
        Ok(ConflictInstance { universe, relation, family, m })
    }

    pub fn min_list_size(&self) -> usize {
        self.family.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Exact conflict degree: the maximum, over ordered list pairs (L, L')
    /// and elements c of L, of the number of elements of L' conflicting
    /// with c. `budget` caps the total number of relation evaluations.
    pub fn conflict_degree(&self, budget: u64) -> Result<u64, ConflictError> {
        let mut needed: u128 = 0;
        for a in &self.family {
            for b in &self.family {
                needed += (a.len() as u128) * (b.len() as u128);
            }
        }
        if needed > u128::from(budget) {
            return Err(ConflictError::DegreeBudget { needed, budget });
        }
        let mut degree: u64 = 0;
        for a in &self.family {
            for b in &self.family {
                for &c in a {
                    let count =
                        b.iter().filter(|&&c2| self.relation.conflicts(c, c2)).count() as u64;
                    degree = degree.max(count);
                }
            }
        }
        Ok(degree)
    }
}

/// Zero-round greedy: walks the types in lexicographic (color, list) order
/// and assigns each the first element of its list (in stored order) that
/// conflicts with no earlier assignment. Returns `assignment[color][list]`.
pub fn zero_round_assignment(
    instance: &ConflictInstance,
) -> Result<Vec<Vec<usize>>, ConflictError> {
    let mut assignment: Vec<Vec<usize>> = Vec::with_capacity(instance.m as usize);
    let mut taken: Vec<usize> = Vec::new();
    for color in 0..instance.m {
        let mut row = Vec::with_capacity(instance.family.len());
        for (list, elements) in instance.family.iter().enumerate() {
            let chosen = elements
                .iter()
                .copied()
                .find(|&e| !taken.iter().any(|&t| instance.relation.conflicts(e, t)));
            match chosen {
                Some(e) => {
                    taken.push(e);
                    row.push(e);
                }
                None => return Err(ConflictError::Stuck { color, list }),
            }
        }
        assignment.push(row);
    }
    Ok(assignment)
}

/// Applies [`zero_round_assignment`] to concrete vertices: vertex `v` of
/// input color `psi[v]` holding list `list_of[v]` receives the element
/// assigned to its type.
pub fn solve_zero_round(
    instance: &ConflictInstance,
    psi: &[u32],
    list_of: &[usize],
) -> Result<Vec<usize>, ConflictError> {
    for (vertex, &list) in list_of.iter().enumerate() {
        if list >= instance.family.len() {
            return Err(ConflictError::ListIndexOutOfRange {
                vertex,
                list,
                family: instance.family.len(),
            });
        }
    }
    let assignment = zero_round_assignment(instance)?;
    Ok(psi
        .iter()
        .zip(list_of)
        .map(|(&color, &list)| assignment[color as usize][list])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equality_instance(universe: usize, family: Vec<Vec<usize>>, m: u32) -> ConflictInstance {
        ConflictInstance::new(universe, ConflictRelation::Equality, family, m).unwrap()
    }

    #[test]
    fn equality_degree_is_one() {
        let inst = equality_instance(4, vec![vec![0, 1, 2, 3], vec![1, 2, 3]], 1);
        assert_eq!(inst.conflict_degree(1000).unwrap(), 1);
    }

    #[test]
    fn zero_round_greedy_walks_types_in_order() {
        // Two lists over five elements, two input colors. The greedy fills
        // types (0,0), (0,1), (1,0), (1,1) in that order, always taking the
        // first untaken element.
        let inst = equality_instance(5, vec![vec![0, 1, 2, 3, 4], vec![0, 2, 4]], 2);
        let assignment = zero_round_assignment(&inst).unwrap();
        assert_eq!(assignment, vec![vec![0, 2], vec![1, 4]]);
    }

    #[test]
    fn zero_round_reports_stuck_type() {
        // One color, two lists, but the second list's only element is taken.
        let inst = equality_instance(2, vec![vec![0], vec![0]], 1);
        assert_eq!(
            zero_round_assignment(&inst).unwrap_err(),
            ConflictError::Stuck { color: 0, list: 1 }
        );
    }

    #[test]
    fn solvable_precondition_guarantees_success() {
        // l > m * |F| * d with d = 1: lists of size 3 > 2 * 1 * 1.
        let inst = equality_instance(6, vec![vec![0, 1, 2], vec![3, 4, 5]], 1);
        let d = inst.conflict_degree(1000).unwrap();
        assert!(inst.min_list_size() as u64 > u64::from(inst.m) * 2 * d);
        assert!(zero_round_assignment(&inst).is_ok());
    }

    #[test]
    fn tau_relation_matches_direct_predicate() {
        let members = vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]];
        let relation = ConflictRelation::Tau { tau: 1, members: members.clone() };
        for i in 0..members.len() {
            for j in 0..members.len() {
                assert_eq!(
                    relation.conflicts(i, j),
                    tau_conflict(&members[i], &members[j], 1)
                );
            }
        }
    }

    #[test]
    fn tau_tau_relation_uses_bitsets() {
        use crate::combinatorics::tau_tau_conflict;

        // Members: singletons over four colors; systems: all 2-subsets.
        let members: Vec<Vec<u32>> = (0..4).map(|c| vec![c]).collect();
        let systems: Vec<Vec<u32>> =
            vec![vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 3], vec![1, 3], vec![2, 3]];
        let relation = ConflictRelation::tau_tau(2, 1, members.clone(), systems.clone());
        for i in 0..systems.len() {
            for j in 0..systems.len() {
                let a: Vec<Vec<u32>> =
                    systems[i].iter().map(|&m| members[m as usize].clone()).collect();
                let b: Vec<Vec<u32>> =
                    systems[j].iter().map(|&m| members[m as usize].clone()).collect();
                assert_eq!(
                    relation.conflicts(i, j),
                    tau_tau_conflict(&a, &b, 2, 1),
                    "systems {i} vs {j}"
                );
            }
        }
        // Singleton members with tau = 1 degenerate to set intersection:
        // systems conflict iff they share >= 2 members.
        assert!(relation.conflicts(0, 0));
        assert!(!relation.conflicts(0, 5));
    }

    #[test]
    fn degree_budget_enforced() {
        let inst = equality_instance(4, vec![vec![0, 1, 2, 3]], 1);
        assert_eq!(
            inst.conflict_degree(15).unwrap_err(),
            ConflictError::DegreeBudget { needed: 16, budget: 15 }
        );
    }
}
