//! Parameter derivation and the sublist-system machinery.
//!
//! The list-coloring protocols work through a three-level hierarchy:
//!
//! - level 0: plain color lists of size `l0`;
//! - level 1: sublists — k-element subsets of a level-0 list. Two sublists
//!   "tau-conflict" when they share at least `tau` colors. Choosing
//!   pairwise non-conflicting sublists for adjacent vertices leaves every
//!   vertex a large set of colors shared by few neighbors.
//! - level 2: sublist systems — k'-element sets of sublists. Systems
//!   conflict when `tau_prime` distinct members of one each tau-conflict
//!   with some member of the other. The family `L2` retains only systems
//!   with few conflicts inside the full enumeration, which caps the
//!   conflict degree and makes the zero-round greedy applicable.
//!
//! Parameters come in two modes. `Paper` derives everything from
//! `(beta, m, |C|)` with the asymptotic formulas — those values are far too
//! large to enumerate, so they only feed the log-domain verifiers. `Desk`
//! takes explicit small overrides, checks their structural invariants, and
//! supports actually running the protocols.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::{
    binomial_u128, enumerate_k_subsets, ln_binomial_from_ln, log_binomial,
    tau_conflict, CombinatoricsError,
};
use crate::conflict::{ConflictError, ConflictInstance, ConflictRelation};

/// Comparison guard for log-domain inequalities: a strict inequality is
/// accepted only when it holds by more than this margin in natural-log
/// units.
pub const LN_GUARD: f64 = 1e-6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrameworkError {
    #[error("paper mode derives all parameters; overrides are not accepted")]
    UnexpectedOverrides,
    #[error("desk mode requires explicit parameter overrides")]
    MissingOverrides,
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("parameter out of representable range: {0}")]
    OutOfRange(String),
    #[error(transparent)]
    Combinatorics(#[from] CombinatoricsError),
    #[error(transparent)]
    Conflict(#[from] ConflictError),
    #[error("goodness filtering needs {needed} relation evaluations, budget is {budget}")]
    FilterBudget { needed: u128, budget: u64 },
    #[error("list has {got} colors, parameters require exactly l0 = {l0}")]
    ListSizeMismatch { got: usize, l0: u64 },
}

/// A possibly astronomically large quantity, tracked exactly in u128 when
/// it fits and always in the natural-log domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Magnitude {
    pub exact: Option<u128>,
    pub ln: f64,
}

impl Magnitude {
    pub const ZERO: Magnitude = Magnitude { exact: Some(0), ln: f64::NEG_INFINITY };

    /// Human-readable value: the exact integer when known, otherwise the
    /// natural log.
    pub fn describe(&self) -> String {
        match self.exact {
            Some(value) => value.to_string(),
            None => format!("exp({:.3})", self.ln),
        }
    }

    pub fn from_exact(value: u128) -> Self {
        let ln = if value == 0 { f64::NEG_INFINITY } else { (value as f64).ln() };
        Magnitude { exact: Some(value), ln }
    }

    pub fn from_ln(ln: f64) -> Self {
        Magnitude { exact: None, ln }
    }

    pub fn mul(&self, other: &Magnitude) -> Magnitude {
        let exact = match (self.exact, other.exact) {
            (Some(a), Some(b)) => a.checked_mul(b),
            _ => None,
        };
        match exact {
            Some(v) => Magnitude::from_exact(v),
            None => Magnitude::from_ln(self.ln + other.ln),
        }
    }

    /// `self - delta` for a quantity known to stay nonnegative.
    pub fn sub_scalar(&self, delta: u64) -> Magnitude {
        match self.exact {
            Some(v) => Magnitude::from_exact(v.saturating_sub(u128::from(delta))),
            None => {
                // ln(n - d) = ln n + ln(1 - d/n); the ratio is negligible
                // whenever this path is taken (n has no exact form).
                let ratio = ((delta as f64).ln() - self.ln).exp();
                Magnitude::from_ln(self.ln + (-ratio).ln_1p())
            }
        }
    }

    /// True when `self >= bound` holds with certainty: exact comparison
    /// when available, otherwise a full nat of log-domain margin.
    pub fn certainly_at_least(&self, bound: u128) -> bool {
        match self.exact {
            Some(v) => v >= bound,
            None => self.ln >= (bound as f64).ln() + 1.0,
        }
    }
}

/// `C(n, k)` as a [`Magnitude`]: exact when representable, otherwise via
/// exact log-term summation, falling back to log-gamma forms for huge
/// arguments.
pub fn magnitude_binomial(n: &Magnitude, k: u64) -> Magnitude {
    match n.exact {
        Some(ne) => {
            if u128::from(k) > ne {
                return Magnitude::ZERO;
            }
            if let Some(v) = binomial_u128(ne, k) {
                return Magnitude::from_exact(v);
            }
            let k_red = u128::from(k).min(ne - u128::from(k));
            if k_red <= 3_000_000 {
                Magnitude::from_ln(log_binomial(ne, u128::from(k)))
            } else {
                let nf = ne as f64;
                let kf = k as f64;
                Magnitude::from_ln(
                    libm::lgamma(nf + 1.0) - libm::lgamma(kf + 1.0) - libm::lgamma(nf - kf + 1.0),
                )
            }
        }
        None => Magnitude::from_ln(ln_binomial_from_ln(n.ln, k)),
    }
}

/// Parameter source: asymptotic formulas vs explicit small overrides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Paper,
    Desk,
}

/// Explicit parameter values for desk mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overrides {
    pub tau: u64,
    pub tau_prime: u64,
    pub k: u64,
    pub k_prime: u64,
    pub l0: u64,
}

/// The full parameter set: inputs, the five core parameters, and the
/// derived family sizes and conflict-degree bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParameterSet {
    pub mode: Mode,
    /// Out-degree bound of the oriented input graph.
    pub beta: u64,
    /// Number of input colors.
    pub m: u64,
    /// Color space size |C|.
    pub color_space: u64,
    pub tau: u64,
    pub tau_prime: u64,
    pub k: u64,
    pub k_prime: u64,
    pub l0: u64,
    /// `C(l0, k)`: sublists per list.
    pub l1: Magnitude,
    /// `C(k, tau) * C(l0 - tau, k - tau)`: tau-conflict degree bound on
    /// sublists.
    pub d1: Magnitude,
    /// `4 * C(k' * d1, tau') * C(l1 - tau', k' - tau')`: conflict degree
    /// bound on retained systems.
    pub d2: Magnitude,
    /// Guaranteed retained systems: at least half of `C(l1, k')` survive
    /// the goodness filter (exact form is the ceiling of the half).
    pub l2: Magnitude,
}

/// `log2(log2(x))`, clamped to 0 for `x <= 2`.
pub fn llog2(x: f64) -> f64 {
    if x <= 2.0 {
        0.0
    } else {
        x.log2().log2().max(0.0)
    }
}

fn derived(
    mode: Mode,
    beta: u64,
    m: u64,
    color_space: u64,
    core: Overrides,
    enforce_ratio_floor: bool,
) -> Result<ParameterSet, FrameworkError> {
    let Overrides { tau, tau_prime, k, k_prime, l0 } = core;
    if tau == 0 || tau_prime == 0 {
        return Err(FrameworkError::Invalid("tau and tau' must be positive".into()));
    }
    if !(tau <= k && k <= beta.saturating_mul(tau)) {
        return Err(FrameworkError::Invalid(format!(
            "need tau <= k <= beta*tau, got tau = {tau}, k = {k}, beta = {beta}"
        )));
    }
    if tau_prime > k_prime {
        return Err(FrameworkError::Invalid(format!(
            "need tau' <= k', got tau' = {tau_prime}, k' = {k_prime}"
        )));
    }
    if k > l0 {
        return Err(FrameworkError::Invalid(format!("need k <= l0, got k = {k}, l0 = {l0}")));
    }
    let floor = 2.0 * std::f64::consts::E * (k as f64) * (k as f64) / (tau as f64);
    if enforce_ratio_floor && (l0 as f64) < floor - 1e-9 {
        return Err(FrameworkError::Invalid(format!(
            "need l0 >= 2e*k^2/tau = {floor:.3}, got l0 = {l0}"
        )));
    }

    let l1 = magnitude_binomial(&Magnitude::from_exact(u128::from(l0)), k);
    if !l1.certainly_at_least(u128::from(k_prime)) {
        return Err(FrameworkError::Invalid(format!(
            "need C(l0, k) >= k'; C({l0}, {k}) is below {k_prime}"
        )));
    }
    let d1 = magnitude_binomial(&Magnitude::from_exact(u128::from(k)), tau)
        .mul(&magnitude_binomial(&Magnitude::from_exact(u128::from(l0 - tau)), k - tau));
    let pool = Magnitude::from_exact(u128::from(k_prime)).mul(&d1);
    let d2 = Magnitude::from_exact(4)
        .mul(&magnitude_binomial(&pool, tau_prime))
        .mul(&magnitude_binomial(&l1.sub_scalar(tau_prime), k_prime - tau_prime));
    let all_systems = magnitude_binomial(&l1, k_prime);
    let l2 = match all_systems.exact {
        Some(v) => Magnitude::from_exact(v.div_ceil(2)),
        None => Magnitude::from_ln(all_systems.ln - std::f64::consts::LN_2),
    };
    Ok(ParameterSet {
        mode,
        beta,
        m,
        color_space,
        tau,
        tau_prime,
        k,
        k_prime,
        l0,
        l1,
        d1,
        d2,
        l2,
    })
}

/// Derives a parameter set. Paper mode computes the five core parameters
/// from `(beta, m, |C|)`; desk mode validates explicit overrides. Both
/// modes then derive `l1, d1, d2, l2`.
pub fn derive_parameters(
    mode: Mode,
    beta: u64,
    m: u64,
    color_space: u64,
    overrides: Option<&Overrides>,
) -> Result<ParameterSet, FrameworkError> {
    if beta == 0 {
        return Err(FrameworkError::Invalid("beta must be positive".into()));
    }
    if m == 0 || color_space == 0 {
        return Err(FrameworkError::Invalid("m and |C| must be positive".into()));
    }
    match mode {
        Mode::Paper => {
            if overrides.is_some() {
                return Err(FrameworkError::UnexpectedOverrides);
            }
            let betaf = beta as f64;
            let tau_f = (8.0 * betaf.log2()
                + 2.0 * llog2(color_space as f64)
                + 2.0 * llog2(m as f64))
            .ceil() + 14.0;
            let tau = tau_f as u64;
            let drop = (2.0 * std::f64::consts::E * betaf * betaf).log2().ceil() as u64;
            if tau <= drop {
                return Err(FrameworkError::OutOfRange(format!(
                    "tau = {tau} does not exceed log2(2e*beta^2) = {drop}"
                )));
            }
            let shift = tau - drop;
            if shift >= 63 {
                return Err(FrameworkError::OutOfRange(format!(
                    "tau' = 2^{shift} exceeds the representable range"
                )));
            }
            let tau_prime = 1u64 << shift;
            let k = beta
                .checked_mul(tau)
                .ok_or_else(|| FrameworkError::OutOfRange("k = beta*tau overflows".into()))?;
            let k_prime = beta.checked_mul(tau_prime).ok_or_else(|| {
                FrameworkError::OutOfRange("k' = beta*tau' overflows".into())
            })?;
            let l0 = (2.0 * std::f64::consts::E * betaf * betaf * ((tau + 1) as f64)).ceil()
                as u64;
            derived(mode, beta, m, color_space, Overrides { tau, tau_prime, k, k_prime, l0 }, true)
        }
        Mode::Desk => {
            let core = overrides.ok_or(FrameworkError::MissingOverrides)?;
            derived(mode, beta, m, color_space, *core, true)
        }
    }
}

/// Like desk-mode [`derive_parameters`], but without the `l0 >= 2e k^2/tau`
/// floor: parameter sets below the ratio-lemma hypothesis are still
/// meaningful objects for brute-force lemma verification (the reports flag
/// the failed hypothesis instead).
pub fn analysis_parameters(
    beta: u64,
    m: u64,
    color_space: u64,
    core: Overrides,
) -> Result<ParameterSet, FrameworkError> {
    if beta == 0 || m == 0 || color_space == 0 {
        return Err(FrameworkError::Invalid("beta, m and |C| must be positive".into()));
    }
    derived(Mode::Desk, beta, m, color_space, core, false)
}

impl ParameterSet {
    /// After discarding the members conflicting with one member of each of
    /// `beta` out-neighbor systems, a system of size k' retains at least
    /// `k' - beta*(tau_prime - 1)` members; positive means the selection
    /// step cannot get stuck.
    pub fn survives_system_selection(&self, beta: u64) -> bool {
        u128::from(self.k_prime) > u128::from(beta) * u128::from(self.tau_prime - 1)
    }

    /// Same at the sublist level: a sublist of size k retains at least
    /// `k - beta*(tau - 1)` colors against `beta` conflicting sublists.
    pub fn survives_color_selection(&self, beta: u64) -> bool {
        u128::from(self.k) > u128::from(beta) * u128::from(self.tau - 1)
    }
}

/// Enumeration and evaluation budgets.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Budget {
    /// Cap on any single enumerated family (sublists, systems, candidates).
    pub max_family: u64,
    /// Cap on pairwise relation evaluations (conflict degree, goodness).
    pub max_relation_evals: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_family: 2_000_000, max_relation_evals: 2_000_000_000 }
    }
}

impl Budget {
    pub fn with_max_family(max_family: u64) -> Self {
        Budget { max_family, ..Budget::default() }
    }
}

/// All k-subsets (sublists) of `base` in canonical (colex) order.
pub fn build_l1(
    base: &[u32],
    params: &ParameterSet,
    budget: &Budget,
) -> Result<Vec<Vec<u32>>, FrameworkError> {
    if base.len() as u64 != params.l0 {
        return Err(FrameworkError::ListSizeMismatch { got: base.len(), l0: params.l0 });
    }
    let k = u32::try_from(params.k)
        .map_err(|_| FrameworkError::OutOfRange("k exceeds u32".into()))?;
    Ok(enumerate_k_subsets(base, k, budget.max_family)?)
}

/// The enumerated and filtered system family of one base list.
#[derive(Debug)]
pub struct L2Family {
    /// Level-1 sublists of the base list, colex order (the member table).
    pub sublists: Vec<Vec<u32>>,
    /// Conflict relation over the full enumeration of systems.
    pub relation: ConflictRelation,
    /// Symmetric conflict counts (including self) per enumerated system;
    /// `None` when the filter was vacuous and counting was skipped.
    pub conflict_counts: Option<Vec<u64>>,
    /// Indices (into the enumeration) of the retained systems, ascending.
    pub retained: Vec<usize>,
    /// True when `d2` ruled out any filtering up front.
    pub vacuous: bool,
}

impl L2Family {
    pub fn enumerated_len(&self) -> usize {
        match &self.relation {
            ConflictRelation::TauTau { systems, .. } => systems.len(),
            _ => 0,
        }
    }

    /// Decodes retained system `index` (position in `retained`) to explicit
    /// color sets.
    pub fn system_colors(&self, index: usize) -> Vec<Vec<u32>> {
        let ConflictRelation::TauTau { systems, .. } = &self.relation else {
            unreachable!("L2Family always carries a TauTau relation")
        };
        systems[self.retained[index]]
            .iter()
            .map(|&s| self.sublists[s as usize].clone())
            .collect()
    }

    /// For every enumerated system K, the number of systems K' (self
    /// included) with at least tau_prime distinct members each
    /// tau-conflicting with some member of K. The family construction
    /// bounds this count by `d2 / 4`.
    pub fn covering_counts(&self) -> Vec<u64> {
        let n = self.enumerated_len();
        let mut counts = vec![0u64; n];
        for (k, count) in counts.iter_mut().enumerate() {
            *count = (0..n).filter(|&k2| self.relation.directed_hit(k2, k)).count() as u64;
        }
        counts
    }
}

/// Enumerates all k'-subsets of the sublists of `base` and retains exactly
/// those whose symmetric conflict count within the full enumeration
/// (self included) stays below `d2`. When `d2` exceeds the enumeration
/// size, every system is retained without counting.
pub fn build_l2(
    base: &[u32],
    params: &ParameterSet,
    budget: &Budget,
) -> Result<L2Family, FrameworkError> {
    let sublists = build_l1(base, params, budget)?;
    let k_prime = u32::try_from(params.k_prime)
        .map_err(|_| FrameworkError::OutOfRange("k' exceeds u32".into()))?;
    let indices: Vec<u32> = (0..sublists.len() as u32).collect();
    let systems = enumerate_k_subsets(&indices, k_prime, budget.max_family)?;
    let total = systems.len();
    let relation = ConflictRelation::tau_tau(
        params.tau_prime as usize,
        params.tau as usize,
        sublists.clone(),
        systems,
    );

    let vacuous = params.d2.certainly_at_least(total as u128 + 1);
    if vacuous {
        return Ok(L2Family {
            sublists,
            relation,
            conflict_counts: None,
            retained: (0..total).collect(),
            vacuous: true,
        });
    }
    let needed = (total as u128) * (total as u128);
    if needed > u128::from(budget.max_relation_evals) {
        return Err(FrameworkError::FilterBudget { needed, budget: budget.max_relation_evals });
    }
    let Some(d2) = params.d2.exact else {
        return Err(FrameworkError::OutOfRange(
            "d2 has no exact form but does not dominate the enumeration".into(),
        ));
    };
    let mut counts = vec![0u64; total];
    for (i, count) in counts.iter_mut().enumerate() {
        *count = (0..total).filter(|&j| relation.conflicts(i, j)).count() as u64;
    }
    let retained: Vec<usize> =
        (0..total).filter(|&i| u128::from(counts[i]) < d2).collect();
    Ok(L2Family {
        sublists,
        relation,
        conflict_counts: Some(counts),
        retained,
        vacuous: false,
    })
}

/// Indices retained at an arbitrary goodness threshold `t` given the
/// symmetric conflict counts — the family is monotone in `t`.
pub fn good_at_threshold(counts: &[u64], t: u64) -> Vec<usize> {
    (0..counts.len()).filter(|&i| counts[i] < t).collect()
}

/// Outcome of a solvability check `l > m * |F| * d`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolvabilityReport {
    pub satisfied: bool,
    /// True when the comparison was exact integer arithmetic.
    pub exact: bool,
    pub lhs_ln: f64,
    pub rhs_ln: f64,
}

/// Checks the zero-round precondition `l > m * |F| * d`. Falls back to the
/// log domain when the product overflows; there a margin below [`LN_GUARD`]
/// counts as failure.
pub fn check_solvability(
    l: &Magnitude,
    m: u64,
    family_size: u64,
    d: &Magnitude,
) -> SolvabilityReport {
    let rhs = Magnitude::from_exact(u128::from(m))
        .mul(&Magnitude::from_exact(u128::from(family_size)))
        .mul(d);
    match (l.exact, rhs.exact) {
        (Some(lv), Some(rv)) => SolvabilityReport {
            satisfied: lv > rv,
            exact: true,
            lhs_ln: l.ln,
            rhs_ln: rhs.ln,
        },
        _ => SolvabilityReport {
            satisfied: l.ln > rhs.ln + LN_GUARD,
            exact: false,
            lhs_ln: l.ln,
            rhs_ln: rhs.ln,
        },
    }
}

/// Report of the ratio lemmas for a parameter set, evaluated in the log
/// domain with the [`LN_GUARD`] margin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LdRatioReport {
    /// Whether `l0 >= 2e * k^2 / tau` (the hypothesis of the sublist ratio
    /// bound) holds.
    pub l1_gate: bool,
    /// `ln(l1 / d1)` and the `tau * ln 2` threshold it must exceed.
    pub l1_ratio_ln: f64,
    pub l1_threshold_ln: f64,
    pub l1_holds: bool,
    /// `ln(l2 / d2)` and its threshold
    /// `2^(tau - log2(4e beta^2)) * ln 2 - ln 8`.
    pub l2_ratio_ln: f64,
    pub l2_threshold_ln: f64,
    pub l2_holds: bool,
    /// Paper-mode check in the log-log domain:
    /// `log2 log2 (8 m |C|^l0) <= tau - log2(4e beta^2)`.
    pub loglog_lhs: Option<f64>,
    pub loglog_rhs: Option<f64>,
    pub loglog_holds: Option<bool>,
}

/// Evaluates the family-size-to-conflict-degree ratio bounds for `params`.
pub fn verify_ld_ratio(params: &ParameterSet) -> LdRatioReport {
    let e = std::f64::consts::E;
    let ln2 = std::f64::consts::LN_2;
    let kf = params.k as f64;
    let l1_gate = params.l0 as f64 >= 2.0 * e * kf * kf / (params.tau as f64) - 1e-9;
    let l1_ratio_ln = params.l1.ln - params.d1.ln;
    let l1_threshold_ln = (params.tau as f64) * ln2;
    let l1_holds = l1_ratio_ln > l1_threshold_ln + LN_GUARD;

    let betaf = params.beta as f64;
    let exponent = params.tau as f64 - (4.0 * e * betaf * betaf).log2();
    let l2_ratio_ln = params.l2.ln - params.d2.ln;
    let l2_threshold_ln = exponent.exp2() * ln2 - 8.0f64.ln();
    let l2_holds = l2_ratio_ln > l2_threshold_ln + LN_GUARD;

    let (loglog_lhs, loglog_rhs, loglog_holds) = if params.mode == Mode::Paper {
        // log2(8 m |C|^l0) = 3 + log2 m + l0 * log2 |C|.
        let inner = 3.0
            + (params.m as f64).log2()
            + (params.l0 as f64) * (params.color_space as f64).log2();
        let lhs = inner.log2();
        (Some(lhs), Some(exponent), Some(lhs <= exponent - LN_GUARD))
    } else {
        (None, None, None)
    };

    LdRatioReport {
        l1_gate,
        l1_ratio_ln,
        l1_threshold_ln,
        l1_holds,
        l2_ratio_ln,
        l2_threshold_ln,
        l2_holds,
        loglog_lhs,
        loglog_rhs,
        loglog_holds,
    }
}

/// Brute-force check that the sublist conflict-degree bound `d1` holds for
/// a pair of base lists with the given overlap: for every sublist C of X,
/// the number of sublists of Y sharing at least tau colors with C is at
/// most `C(k, tau) * C(l0 - tau, k - tau)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct D1Report {
    pub overlap: usize,
    pub max_observed: u64,
    pub bound: u128,
    pub holds: bool,
}

pub fn verify_conflict_degree_d1(
    l0: u64,
    k: u64,
    tau: u64,
    overlap: usize,
    budget: &Budget,
) -> Result<D1Report, FrameworkError> {
    assert!(overlap as u64 <= l0);
    let x: Vec<u32> = (0..l0 as u32).collect();
    let shift = l0 as u32 - overlap as u32;
    let y: Vec<u32> = (shift..shift + l0 as u32).collect();
    let kk = u32::try_from(k).map_err(|_| FrameworkError::OutOfRange("k exceeds u32".into()))?;
    let from_x = enumerate_k_subsets(&x, kk, budget.max_family)?;
    let from_y = enumerate_k_subsets(&y, kk, budget.max_family)?;
    let bound = binomial_u128(u128::from(k), tau)
        .and_then(|a| binomial_u128(u128::from(l0 - tau), k - tau).map(|b| (a, b)))
        .and_then(|(a, b)| a.checked_mul(b))
        .ok_or_else(|| FrameworkError::OutOfRange("d1 bound overflows".into()))?;
    let mut max_observed = 0u64;
    for c in &from_x {
        let count =
            from_y.iter().filter(|c2| tau_conflict(c, c2, tau as usize)).count() as u64;
        max_observed = max_observed.max(count);
    }
    Ok(D1Report { overlap, max_observed, bound, holds: u128::from(max_observed) <= bound })
}

/// A conflict instance restricted to the lists actually present in the
/// input, treated as global knowledge: the family has one entry per
/// distinct list, elements are deduplicated systems.
#[derive(Debug)]
pub struct RestrictedP2 {
    pub instance: ConflictInstance,
    /// Distinct base lists in first-occurrence order.
    pub lists: Vec<Vec<u32>>,
    /// `decode[element]` is the system as explicit color sets, members in
    /// canonical order.
    pub decode: Vec<Vec<Vec<u32>>>,
    /// Exact conflict degree when the evaluation budget allowed it,
    /// otherwise the `d2` parameter bound.
    pub degree: Magnitude,
    pub degree_exact: bool,
    pub solvability: SolvabilityReport,
    /// Smallest per-list retained-family size.
    pub min_list_len: usize,
}

/// Builds the restricted system-level instance for the distinct lists of an
/// input. Each list contributes its retained systems (per-list canonical
/// order); identical systems arising from overlapping lists are shared.
pub fn build_restricted_p2(
    distinct_lists: &[Vec<u32>],
    params: &ParameterSet,
    budget: &Budget,
) -> Result<RestrictedP2, FrameworkError> {
    let mut member_index: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
    let mut members: Vec<Vec<u32>> = Vec::new();
    let mut system_index: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    let mut systems: Vec<Vec<u32>> = Vec::new();
    let mut decode: Vec<Vec<Vec<u32>>> = Vec::new();
    let mut family: Vec<Vec<usize>> = Vec::new();

    for list in distinct_lists {
        let l2 = build_l2(list, params, budget)?;
        let mut elements = Vec::with_capacity(l2.retained.len());
        for idx in 0..l2.retained.len() {
            let colors = l2.system_colors(idx);
            let mut encoded: Vec<u32> = colors
                .iter()
                .map(|member| {
                    *member_index.entry(member.clone()).or_insert_with(|| {
                        members.push(member.clone());
                        (members.len() - 1) as u32
                    })
                })
                .collect();
            encoded.sort_unstable();
            let element = *system_index.entry(encoded.clone()).or_insert_with(|| {
                systems.push(encoded);
                decode.push(colors);
                systems.len() - 1
            });
            elements.push(element);
        }
        family.push(elements);
    }

    let relation = ConflictRelation::tau_tau(
        params.tau_prime as usize,
        params.tau as usize,
        members,
        systems.clone(),
    );
    let instance =
        ConflictInstance::new(systems.len(), relation, family, params.m as u32)?;
    let (degree, degree_exact) = match instance.conflict_degree(budget.max_relation_evals) {
        Ok(d) => (Magnitude::from_exact(u128::from(d)), true),
        Err(ConflictError::DegreeBudget { .. }) => (params.d2, false),
        Err(e) => return Err(e.into()),
    };
    let min_list_len = instance.min_list_size();
    let solvability = check_solvability(
        &Magnitude::from_exact(min_list_len as u128),
        params.m,
        distinct_lists.len() as u64,
        &degree,
    );
    Ok(RestrictedP2 {
        instance,
        lists: distinct_lists.to_vec(),
        decode,
        degree,
        degree_exact,
        solvability,
        min_list_len,
    })
}

/// Cache for [`build_restricted_p2`] keyed by the core parameters and the
/// distinct lists; repeated runs over the same fixture shapes share the
/// (potentially expensive) construction.
#[derive(Default)]
pub struct P2Cache {
    entries: BTreeMap<((u64, u64, u64, u64, u64), Vec<Vec<u32>>), Arc<RestrictedP2>>,
}

impl P2Cache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_build(
        &mut self,
        distinct_lists: &[Vec<u32>],
        params: &ParameterSet,
        budget: &Budget,
    ) -> Result<Arc<RestrictedP2>, FrameworkError> {
        let key = (
            (params.tau, params.tau_prime, params.k, params.k_prime, params.l0),
            distinct_lists.to_vec(),
        );
        if let Some(hit) = self.entries.get(&key) {
            return Ok(Arc::clone(hit));
        }
        let built = Arc::new(build_restricted_p2(distinct_lists, params, budget)?);
        self.entries.insert(key, Arc::clone(&built));
        Ok(built)
    }
}
