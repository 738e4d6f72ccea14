//! Shared test helpers: a brute-force enumeration oracle for the learner.
//!
//! The oracle enumerates every candidate program expressible with the given
//! metarules over the registry's reusable symbols plus an invention pool,
//! as ordered clause tuples, and tests each candidate with the independent
//! interpreter. It deliberately shares nothing with the search engine's
//! proof machinery.

use std::collections::BTreeSet;

use playgol_core::engine::{BkRegistry, State, Task};
use playgol_core::interp;
use playgol_core::logic::{
    instantiate, metarules_by_name, Clause, MetaSub, PredicateKind, PredicateSymbol, Program,
};

/// All clauses for one head symbol under one metarule, with free body slots
/// ranging over the candidate symbols (head-tied slots stay tied).
fn clauses_for_head(
    rule: &playgol_core::logic::MetaRule,
    head: &PredicateSymbol,
    dyadic: &[PredicateSymbol],
    monadic: &[PredicateSymbol],
) -> Vec<Clause> {
    let nslots = rule.second_order_count();
    let mut partial: Vec<Vec<PredicateSymbol>> = vec![vec![head.clone()]];
    for slot in 1..nslots {
        let arity = rule.slot_arity(slot as u8).expect("slot appears in the template");
        let candidates = if arity == 2 { dyadic } else { monadic };
        let mut next = Vec::new();
        for p in &partial {
            for c in candidates {
                let mut p2 = p.clone();
                p2.push(c.clone());
                next.push(p2);
            }
        }
        partial = next;
    }
    partial
        .into_iter()
        .filter_map(|bindings| {
            instantiate(&MetaSub { metarule: rule.clone(), bindings }).ok()
        })
        .collect()
}

/// Every clause a bound-n search could use: heads are the target or a pool
/// invention, free dyadic body slots range over reusable registry symbols
/// plus pool inventions strictly below the head (matching the engine's
/// predicate order: registry symbols below every invention, invention k
/// below inventions 1..k, target on top), monadic slots over reusable
/// monadic symbols.
pub fn candidate_clauses<S: State>(
    bk: &BkRegistry<S>,
    metarules: &[String],
    target: &str,
    max_clauses: usize,
) -> Vec<Clause> {
    let rules = metarules_by_name(metarules).expect("known metarules");
    let target_sym = PredicateSymbol::target(target);
    let pool: Vec<PredicateSymbol> =
        (1..max_clauses).map(|k| PredicateSymbol::invented(target, k as u32)).collect();
    let registry_dyadic: Vec<PredicateSymbol> = bk
        .reusable_ids(2)
        .into_iter()
        .map(|id| bk.symbol(id).clone())
        .collect();
    let monadic: Vec<PredicateSymbol> =
        bk.reusable_ids(1).into_iter().map(|id| bk.symbol(id).clone()).collect();
    let mut heads = vec![(target_sym, 0usize)];
    heads.extend(pool.iter().cloned().zip(1..));
    let mut out = Vec::new();
    for rule in &rules {
        for (head, below) in &heads {
            let mut dyadic = registry_dyadic.clone();
            dyadic.extend(pool.iter().skip(*below).cloned());
            out.extend(clauses_for_head(rule, head, &dyadic, &monadic));
        }
    }
    out
}

/// Exhaustive oracle: smallest clause count (as tuple length) at which some
/// candidate program entails all positives and no negative, or None within
/// max_clauses. Zero tolerance: candidates are checked with the independent
/// interpreter at the given budget.
pub fn oracle_min_clauses<S: State>(
    task: &Task<S>,
    bk: &BkRegistry<S>,
    metarules: &[String],
    max_clauses: usize,
    verify_budget: u64,
) -> Option<usize> {
    let clauses = candidate_clauses(bk, metarules, &task.name, max_clauses);
    for n in 1..=max_clauses {
        let total = (clauses.len() as u64)
            .checked_pow(n as u32)
            .expect("oracle is for micro configurations");
        for combo in 0..total {
            let mut rest = combo;
            let tuple: Vec<Clause> = (0..n)
                .map(|_| {
                    let i = (rest % clauses.len() as u64) as usize;
                    rest /= clauses.len() as u64;
                    clauses[i].clone()
                })
                .collect();
            if candidate_verifies(task, bk, tuple, verify_budget) {
                return Some(n);
            }
        }
    }
    None
}

fn candidate_verifies<S: State>(
    task: &Task<S>,
    bk: &BkRegistry<S>,
    tuple: Vec<Clause>,
    verify_budget: u64,
) -> bool {
    let target = PredicateSymbol::target(&task.name);
    if !tuple.iter().any(|c| c.head.pred.name == target.name) {
        return false;
    }
    let invented: BTreeSet<PredicateSymbol> = tuple
        .iter()
        .flat_map(|c| std::iter::once(&c.head).chain(&c.body))
        .map(|l| &l.pred)
        .filter(|p| p.kind == PredicateKind::Invented)
        .cloned()
        .collect();
    let Ok(program) = Program::new(target, tuple, invented) else {
        return false; // closure violation: an invention used but undefined
    };
    matches!(interp::verify(&program, task, bk, verify_budget), Ok(interp::Verdict::Pass))
}
