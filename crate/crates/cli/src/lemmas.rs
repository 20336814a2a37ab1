//! Brute-force verification suites for the combinatorial lemmas behind the
//! two-round machinery. Each suite runs an exhaustive check over a small
//! menu of shapes and reports the first counterexample as a witness.

use serde_json::{json, Value};

use localcolor_core::combinatorics::{
    enumerate_k_subsets, tau_tau_conflict, tau_tau_conflict_sequences,
};
use localcolor_core::framework::{
    analysis_parameters, build_l2, derive_parameters, verify_conflict_degree_d1, verify_ld_ratio,
    Budget, Mode, Overrides,
};

use crate::CliError;

#[derive(Debug, serde::Serialize)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub cases: u64,
    /// First counterexample, if any.
    pub witness: Option<Value>,
    /// Suite-specific diagnostics, present even on success.
    pub detail: Value,
}

fn err(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

/// Sublist conflict degree: brute-force max τ-conflict count against the
/// closed-form bound `C(k,τ)·C(l₀−τ,k−τ)` for every small shape and every
/// base-list overlap, from disjoint to equal.
pub fn d1_suite(budget: &Budget) -> Result<SuiteOutcome, CliError> {
    let mut cases = 0u64;
    let mut witness = None;
    let mut max_ratio = 0f64;
    for l0 in 1..=7u64 {
        for tau in 1..=4u64 {
            for k in tau..=4u64.min(l0) {
                for overlap in 0..=l0 as usize {
                    let report =
                        verify_conflict_degree_d1(l0, k, tau, overlap, budget).map_err(err)?;
                    cases += 1;
                    if report.bound > 0 {
                        let ratio = report.max_observed as f64 / report.bound as f64;
                        max_ratio = max_ratio.max(ratio);
                    }
                    if !report.holds && witness.is_none() {
                        witness = Some(json!({
                            "l0": l0,
                            "k": k,
                            "tau": tau,
                            "overlap": overlap,
                            "max_observed": report.max_observed,
                            "bound": report.bound.to_string(),
                        }));
                    }
                }
            }
        }
    }
    Ok(SuiteOutcome {
        name: "conflict-degree-d1",
        pass: witness.is_none(),
        cases,
        witness,
        detail: json!({ "max_observed_over_bound": max_ratio }),
    })
}

/// Retained-system family size: at the analysis point
/// (l₀,k,τ,k',τ') = (5,2,1,2,2), every base list over a 7-color space
/// retains at least l₂ systems after the goodness filter.
pub fn l2_size_suite(budget: &Budget) -> Result<SuiteOutcome, CliError> {
    let core = Overrides { tau: 1, tau_prime: 2, k: 2, k_prime: 2, l0: 5 };
    let params = analysis_parameters(2, 2, 7, core).map_err(err)?;
    let l2 = params.l2.exact.expect("l2 is exact at this scale");
    let space: Vec<u32> = (0..7).collect();
    let bases = enumerate_k_subsets(&space, 5, budget.max_family).map_err(err)?;
    let mut cases = 0u64;
    let mut witness = None;
    let mut min_retained = u64::MAX;
    for base in &bases {
        let family = build_l2(base, &params, budget).map_err(err)?;
        cases += 1;
        min_retained = min_retained.min(family.retained.len() as u64);
        if (family.retained.len() as u128) < l2 && witness.is_none() {
            witness = Some(json!({
                "base": base,
                "retained": family.retained.len(),
                "l2": l2.to_string(),
            }));
        }
    }
    Ok(SuiteOutcome {
        name: "l2-size",
        pass: witness.is_none(),
        cases,
        witness,
        detail: json!({ "params": params, "min_retained": min_retained }),
    })
}

/// Family-size-to-conflict-degree ratios in the log domain at the two
/// paper-mode reference points.
pub fn ld_ratio_suite() -> Result<SuiteOutcome, CliError> {
    let mut cases = 0u64;
    let mut witness = None;
    let mut reports = Vec::new();
    for &(beta, color_space, m) in &[(1u64, 2u64, 2u64), (2, 1 << 16, 1 << 8)] {
        let params = derive_parameters(Mode::Paper, beta, m, color_space, None).map_err(err)?;
        let report = verify_ld_ratio(&params);
        cases += 1;
        let pass = report.l1_gate
            && report.l1_holds
            && report.l2_holds
            && report.loglog_holds.unwrap_or(false);
        if !pass && witness.is_none() {
            witness = Some(json!({
                "beta": beta,
                "color_space": color_space,
                "m": m,
                "report": report,
            }));
        }
        reports.push(json!({
            "beta": beta,
            "color_space": color_space,
            "m": m,
            "report": report,
        }));
    }
    Ok(SuiteOutcome {
        name: "ld-ratio",
        pass: witness.is_none(),
        cases,
        witness,
        detail: Value::Array(reports),
    })
}

/// The fast counting form of the (τ',τ)-conflict agrees with the
/// quantifier form on every pair of small systems.
pub fn tau_tau_suite() -> Result<SuiteOutcome, CliError> {
    let members: Vec<Vec<u32>> =
        vec![vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]];
    let mut systems: Vec<Vec<Vec<u32>>> = Vec::new();
    for i in 0..members.len() {
        systems.push(vec![members[i].clone()]);
        for j in i + 1..members.len() {
            systems.push(vec![members[i].clone(), members[j].clone()]);
        }
    }
    let mut cases = 0u64;
    let mut witness = None;
    for a in &systems {
        for b in &systems {
            for tau_prime in 1..=3usize {
                for tau in 1..=3usize {
                    cases += 1;
                    let fast = tau_tau_conflict(a, b, tau_prime, tau);
                    let reference = tau_tau_conflict_sequences(a, b, tau_prime, tau);
                    if fast != reference && witness.is_none() {
                        witness = Some(json!({
                            "a": a,
                            "b": b,
                            "tau_prime": tau_prime,
                            "tau": tau,
                            "fast": fast,
                            "reference": reference,
                        }));
                    }
                }
            }
        }
    }
    Ok(SuiteOutcome {
        name: "tau-tau-equivalence",
        pass: witness.is_none(),
        cases,
        witness,
        detail: json!({ "systems": systems.len() }),
    })
}
