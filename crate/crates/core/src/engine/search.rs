//! Depth-first meta-interpretive search with predicate invention.
//!
//! The searcher proves the task's positive examples left to right under one
//! growing candidate program. Goals carry a ground input state; outputs are
//! enumerated forward through clause bodies and delivered to a
//! defunctionalised continuation stack, so backtracking is plain `return`
//! with symmetric push/pop cleanups. Choice points, in order:
//!
//! 1. an existing candidate clause whose head matches the goal,
//! 2. a new metasubstitution (metarules in configured order; body slots
//!    bound lazily when their literal is reached, candidates in registry
//!    insertion order, then inventions in progress, then a fresh invention).
//!
//! Iterative deepening over the clause count 1..=max_clauses makes the
//! first solution minimal. A goal may not re-enter a (predicate, input)
//! pair already open on its own derivation path, which bounds derivations
//! on finite state spaces and excludes degenerate self-calls.

use std::collections::HashMap;
use std::mem;
use std::rc::Rc;
use std::time::Instant;

use smallvec::{smallvec, SmallVec};

use super::registry::{BkRegistry, Def, PredId, Primitive};
use super::{
    Example, SolveConfig, SolveError, SolveOutcome, SolveResult, SolveStats, State, Task,
};
use crate::logic::{
    instantiate, metarules_by_name, MetaRule, MetaSub, PredicateSymbol, Program,
};

/// Hard cap on simultaneously open goals; a derivation this deep is never
/// useful at our clause bounds and would otherwise risk the thread stack.
const MAX_OPEN_GOALS: usize = 4096;

/// Candidate predicate id: registry ids first, then the task target, then
/// inventions in creation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct CandId(u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sig {
    /// The whole proof (all examples plus negative check) succeeded.
    Found,
    /// This branch is exhausted; the caller tries its next alternative.
    Dead,
    /// Deadline or step limit hit; unwind everything.
    Abort,
}

/// A candidate clause: a metarule with its second-order slots, bound lazily.
#[derive(Debug, Clone)]
struct ProgClause {
    rule: u8,
    slots: SmallVec<[Option<CandId>; 3]>,
}

#[derive(Debug, Clone, Copy)]
enum ClauseRef {
    Bk { pred: PredId, idx: u32 },
    Prog { idx: u32 },
}

struct Frame<S> {
    vars: SmallVec<[Option<S>; 4]>,
    src: ClauseRef,
}

enum ContItem {
    /// Bind (or check) a frame variable with the output, then continue the
    /// frame at literal `li`.
    Body { frame: u32, li: u8, bind: u8 },
    /// Check the output against positive example `idx`'s goal, then move on
    /// to the next example.
    Example { idx: u32 },
    /// Derivability probe (negative check): any satisfying output succeeds.
    Probe,
    /// Collect the output into the top collection buffer and keep
    /// backtracking (used to enumerate frozen learned predicates).
    Collect,
}

enum LitView {
    Done,
    Monadic { pred: Option<CandId>, slot: u8, var: u8 },
    Dyadic { pred: Option<CandId>, slot: u8, vin: u8, vout: u8 },
}

struct Searcher<'a, S: State> {
    bk: &'a BkRegistry<S>,
    bk_len: u32,
    task: &'a Task<S>,
    rules: &'a [MetaRule],
    dyadic_cands: &'a [PredId],
    monadic_cands: &'a [PredId],
    bound: usize,
    allow_invention: bool,
    frozen: bool,
    deadline: Instant,
    step_limit: u64,

    prog: Vec<ProgClause>,
    invented_count: u32,
    max_inventions: u32,
    open: Vec<(CandId, S)>,
    fill_open: Vec<(PredId, S)>,
    conts: Vec<ContItem>,
    frames: Vec<Frame<S>>,
    collect: Vec<Vec<S>>,
    probe_goal: Option<S::Goal>,
    memo: &'a mut HashMap<(PredId, S), Rc<[S]>>,

    stats: SolveStats,
    solution: Option<Program>,
}

impl<'a, S: State> Searcher<'a, S> {
    fn target_id(&self) -> CandId {
        CandId(self.bk_len)
    }

    fn tick(&mut self) -> Option<Sig> {
        self.stats.steps += 1;
        if self.stats.steps >= self.step_limit {
            return Some(Sig::Abort);
        }
        if self.stats.steps & 1023 == 0 && Instant::now() >= self.deadline {
            return Some(Sig::Abort);
        }
        None
    }

    fn prove_examples(&mut self, idx: usize) -> Sig {
        if idx == self.task.positives.len() {
            return self.check_negatives_and_accept();
        }
        let input = self.task.positives[idx].input.clone();
        self.conts.push(ContItem::Example { idx: idx as u32 });
        let sig = self.prove_dyadic(self.target_id(), &input);
        self.conts.pop();
        sig
    }

    fn prove_dyadic(&mut self, pred: CandId, input: &S) -> Sig {
        if let Some(sig) = self.tick() {
            return sig;
        }
        if (pred.0) < self.bk_len {
            let id = PredId(pred.0);
            return match &self.bk.entry(id).def {
                Def::Primitive(Primitive::Transform(f)) => match f(input) {
                    Some(out) => self.yield_output(&out),
                    None => Sig::Dead,
                },
                Def::Primitive(Primitive::Test(_)) => Sig::Dead,
                Def::Clauses(_) => self.prove_learned(id, input),
            };
        }
        // Target or invented predicate: loop check, existing clauses, then a
        // fresh metasubstitution if the bound leaves room.
        if self.open.len() >= MAX_OPEN_GOALS {
            return Sig::Dead;
        }
        if self.open.iter().any(|(p, s)| *p == pred && s == input) {
            return Sig::Dead;
        }
        self.open.push((pred, input.clone()));
        let sig = self.prove_open(pred, input);
        self.open.pop();
        sig
    }

    fn prove_open(&mut self, pred: CandId, input: &S) -> Sig {
        for idx in 0..self.prog.len() {
            if self.prog[idx].slots[0] == Some(pred) {
                let sig = self.exec_prog_clause(idx, input);
                if !matches!(sig, Sig::Dead) {
                    return sig;
                }
            }
        }
        if !self.frozen && self.prog.len() < self.bound {
            for rule_idx in 0..self.rules.len() {
                let nslots = self.rules[rule_idx].second_order_count();
                let mut slots: SmallVec<[Option<CandId>; 3]> = smallvec![None; nslots];
                slots[0] = Some(pred);
                self.prog.push(ProgClause { rule: rule_idx as u8, slots });
                self.stats.clauses_tried += 1;
                let sig = self.exec_prog_clause(self.prog.len() - 1, input);
                self.prog.pop();
                if !matches!(sig, Sig::Dead) {
                    return sig;
                }
            }
        }
        Sig::Dead
    }

    /// Enumerates a frozen learned predicate's outputs on `input`, through a
    /// per-solve memo. Sound here because registration only permits backward
    /// references plus self-recursion, and both shipped domains' learned
    /// definitions never revisit a (predicate, state) pair on one derivation.
    fn prove_learned(&mut self, pred: PredId, input: &S) -> Sig {
        let key = (pred, input.clone());
        let outs: Rc<[S]> = if let Some(outs) = self.memo.get(&key) {
            outs.clone()
        } else {
            if self.fill_open.len() >= MAX_OPEN_GOALS
                || self.fill_open.iter().any(|(p, s)| *p == pred && s == input)
            {
                return Sig::Dead;
            }
            self.fill_open.push((pred, input.clone()));
            self.collect.push(Vec::new());
            self.conts.push(ContItem::Collect);
            let nclauses = match &self.bk.entry(pred).def {
                Def::Clauses(cs) => cs.len(),
                _ => unreachable!("prove_learned on non-clausal predicate"),
            };
            let mut aborted = false;
            for ci in 0..nclauses {
                match self.exec_bk_clause(pred, ci, input) {
                    Sig::Dead => {}
                    Sig::Abort => {
                        aborted = true;
                        break;
                    }
                    Sig::Found => unreachable!("collect continuation cannot succeed"),
                }
            }
            self.conts.pop();
            let buf = self.collect.pop().expect("collect buffer");
            self.fill_open.pop();
            if aborted {
                return Sig::Abort;
            }
            let outs: Rc<[S]> = buf.into();
            self.memo.insert(key, outs.clone());
            outs
        };
        for out in outs.iter() {
            match self.yield_output(out) {
                Sig::Dead => {}
                sig => return sig,
            }
        }
        Sig::Dead
    }

    fn exec_bk_clause(&mut self, pred: PredId, clause_idx: usize, input: &S) -> Sig {
        let nvars = match &self.bk.entry(pred).def {
            Def::Clauses(cs) => cs[clause_idx].nvars,
            _ => unreachable!(),
        };
        let mut vars: SmallVec<[Option<S>; 4]> = smallvec![None; nvars as usize];
        vars[0] = Some(input.clone());
        self.frames.push(Frame { vars, src: ClauseRef::Bk { pred, idx: clause_idx as u32 } });
        let sig = self.exec_frame((self.frames.len() - 1) as u32, 0);
        self.frames.pop();
        sig
    }

    fn exec_prog_clause(&mut self, idx: usize, input: &S) -> Sig {
        let rule = &self.rules[self.prog[idx].rule as usize];
        let nvars = rule
            .body
            .iter()
            .chain(std::iter::once(&rule.head))
            .flat_map(|l| l.vars.iter())
            .map(|v| v + 1)
            .max()
            .unwrap_or(2);
        let mut vars: SmallVec<[Option<S>; 4]> = smallvec![None; nvars as usize];
        vars[0] = Some(input.clone());
        self.frames.push(Frame { vars, src: ClauseRef::Prog { idx: idx as u32 } });
        let sig = self.exec_frame((self.frames.len() - 1) as u32, 0);
        self.frames.pop();
        sig
    }

    fn lit_view(&self, f: u32, li: u8) -> LitView {
        let frame = &self.frames[f as usize];
        match frame.src {
            ClauseRef::Bk { pred, idx } => {
                let Def::Clauses(cs) = &self.bk.entry(pred).def else { unreachable!() };
                let clause = &cs[idx as usize];
                if li as usize == clause.body.len() {
                    return LitView::Done;
                }
                let lit = &clause.body[li as usize];
                let pred = Some(CandId(lit.pred.0));
                match *lit.vars.as_slice() {
                    [v] => LitView::Monadic { pred, slot: 0, var: v },
                    [vin, vout] => LitView::Dyadic { pred, slot: 0, vin, vout },
                    _ => unreachable!("arity checked at compile"),
                }
            }
            ClauseRef::Prog { idx } => {
                let pc = &self.prog[idx as usize];
                let rule = &self.rules[pc.rule as usize];
                if li as usize == rule.body.len() {
                    return LitView::Done;
                }
                let lit = &rule.body[li as usize];
                let pred = pc.slots[lit.pred as usize];
                match *lit.vars.as_slice() {
                    [v] => LitView::Monadic { pred, slot: lit.pred, var: v },
                    [vin, vout] => LitView::Dyadic { pred, slot: lit.pred, vin, vout },
                    _ => unreachable!("catalogue arity bound"),
                }
            }
        }
    }

    fn exec_frame(&mut self, f: u32, li: u8) -> Sig {
        if let Some(sig) = self.tick() {
            return sig;
        }
        match self.lit_view(f, li) {
            LitView::Done => {
                let out = self.frames[f as usize].vars[1]
                    .clone()
                    .expect("head output bound after body");
                match self.frames[f as usize].src {
                    // This goal's derivation is complete: its loop-check
                    // entry must not constrain the continuation.
                    ClauseRef::Prog { .. } => {
                        let entry = self.open.pop().expect("open goal for prog frame");
                        let sig = self.yield_output(&out);
                        self.open.push(entry);
                        sig
                    }
                    ClauseRef::Bk { .. } => self.yield_output(&out),
                }
            }
            LitView::Monadic { pred: Some(p), var, .. } => {
                if self.monadic_holds(PredId(p.0), f, var) {
                    self.exec_frame(f, li + 1)
                } else {
                    Sig::Dead
                }
            }
            LitView::Monadic { pred: None, slot, var } => {
                for ci in 0..self.monadic_cands.len() {
                    let cand = self.monadic_cands[ci];
                    if !self.monadic_holds(cand, f, var) {
                        continue;
                    }
                    self.bind_slot(f, slot, CandId(cand.0));
                    let sig = self.exec_frame(f, li + 1);
                    self.clear_slot(f, slot);
                    if !matches!(sig, Sig::Dead) {
                        return sig;
                    }
                }
                Sig::Dead
            }
            LitView::Dyadic { pred: Some(p), vin, vout, .. } => {
                let input =
                    self.frames[f as usize].vars[vin as usize].clone().expect("input bound");
                self.conts.push(ContItem::Body { frame: f, li: li + 1, bind: vout });
                let sig = self.prove_dyadic(p, &input);
                self.conts.pop();
                sig
            }
            LitView::Dyadic { pred: None, slot, vin, vout } => {
                let input =
                    self.frames[f as usize].vars[vin as usize].clone().expect("input bound");
                self.conts.push(ContItem::Body { frame: f, li: li + 1, bind: vout });
                let sig = self.enum_dyadic(f, slot, &input);
                self.conts.pop();
                sig
            }
        }
    }

    /// Candidate order for an unbound dyadic slot: reusable registry symbols
    /// in insertion order (primitives first, learned programs in acquisition
    /// order), inventions in progress, then one fresh invention.
    ///
    /// Free slots respect a strict predicate order: every registry symbol
    /// sits below every open predicate, each invention sits below the
    /// inventions created before it, and the target tops the order. A free
    /// slot may only bind a symbol strictly below the clause's head, which
    /// keeps call graphs stratified; recursion enters solely through
    /// head-tied slots such as tailrec's P.
    fn enum_dyadic(&mut self, f: u32, slot: u8, input: &S) -> Sig {
        for ci in 0..self.dyadic_cands.len() {
            let cand = CandId(self.dyadic_cands[ci].0);
            self.bind_slot(f, slot, cand);
            let sig = self.prove_dyadic(cand, input);
            self.clear_slot(f, slot);
            if !matches!(sig, Sig::Dead) {
                return sig;
            }
        }
        // Inventions created after the head (strictly below it in the
        // order); for a target-headed clause, all of them.
        let head = self.frame_head(f);
        let first_k = if head.0 == self.bk_len { 0 } else { head.0 - self.bk_len };
        for k in first_k..self.invented_count {
            let cand = CandId(self.bk_len + 1 + k);
            self.bind_slot(f, slot, cand);
            let sig = self.prove_dyadic(cand, input);
            self.clear_slot(f, slot);
            if !matches!(sig, Sig::Dead) {
                return sig;
            }
        }
        if self.allow_invention
            && !self.frozen
            && self.prog.len() < self.bound
            && self.invented_count < self.max_inventions
        {
            let cand = CandId(self.bk_len + 1 + self.invented_count);
            self.invented_count += 1;
            self.bind_slot(f, slot, cand);
            let sig = self.prove_dyadic(cand, input);
            self.clear_slot(f, slot);
            self.invented_count -= 1;
            if !matches!(sig, Sig::Dead) {
                return sig;
            }
        }
        Sig::Dead
    }

    /// Head predicate of the candidate clause a frame is executing.
    fn frame_head(&self, f: u32) -> CandId {
        let ClauseRef::Prog { idx } = self.frames[f as usize].src else {
            unreachable!("free slots only exist on candidate clauses")
        };
        self.prog[idx as usize].slots[0].expect("head slot bound")
    }

    fn monadic_holds(&self, pred: PredId, f: u32, var: u8) -> bool {
        let s = self.frames[f as usize].vars[var as usize]
            .as_ref()
            .expect("monadic argument bound");
        match &self.bk.entry(pred).def {
            Def::Primitive(Primitive::Test(t)) => t(s),
            _ => false,
        }
    }

    fn bind_slot(&mut self, f: u32, slot: u8, cand: CandId) {
        let ClauseRef::Prog { idx } = self.frames[f as usize].src else {
            unreachable!("slots only exist on candidate clauses")
        };
        debug_assert!(self.prog[idx as usize].slots[slot as usize].is_none());
        self.prog[idx as usize].slots[slot as usize] = Some(cand);
    }

    fn clear_slot(&mut self, f: u32, slot: u8) {
        let ClauseRef::Prog { idx } = self.frames[f as usize].src else {
            unreachable!()
        };
        self.prog[idx as usize].slots[slot as usize] = None;
    }

    fn yield_output(&mut self, out: &S) -> Sig {
        let item = self.conts.pop().expect("continuation underflow");
        let sig = match item {
            ContItem::Body { frame, li, bind } => {
                let fi = frame as usize;
                if let Some(existing) = &self.frames[fi].vars[bind as usize] {
                    if existing == out {
                        self.exec_frame(frame, li)
                    } else {
                        Sig::Dead
                    }
                } else {
                    self.frames[fi].vars[bind as usize] = Some(out.clone());
                    let sig = self.exec_frame(frame, li);
                    self.frames[frame as usize].vars[bind as usize] = None;
                    sig
                }
            }
            ContItem::Example { idx } => {
                let i = idx as usize;
                if out.satisfies(&self.task.positives[i].goal) {
                    self.prove_examples(i + 1)
                } else {
                    Sig::Dead
                }
            }
            ContItem::Probe => {
                let goal = self.probe_goal.as_ref().expect("probe goal set");
                if out.satisfies(goal) {
                    Sig::Found
                } else {
                    Sig::Dead
                }
            }
            ContItem::Collect => {
                let buf = self.collect.last_mut().expect("collect buffer");
                if !buf.iter().any(|s| s == out) {
                    buf.push(out.clone());
                }
                Sig::Dead
            }
        };
        self.conts.push(item);
        sig
    }

    fn check_negatives_and_accept(&mut self) -> Sig {
        self.stats.candidates_checked += 1;
        if !self.task.negatives.is_empty() {
            match self.any_negative_derivable() {
                Sig::Found => return Sig::Dead, // inconsistent candidate
                Sig::Abort => return Sig::Abort,
                Sig::Dead => {}
            }
        }
        self.solution = Some(self.snapshot_program());
        Sig::Found
    }

    /// Runs derivability probes for the negative examples against the frozen
    /// candidate program, in a fresh proof context.
    fn any_negative_derivable(&mut self) -> Sig {
        debug_assert!(self
            .prog
            .iter()
            .all(|c| c.slots.iter().all(|s| s.is_some())));
        self.frozen = true;
        let saved_conts = mem::take(&mut self.conts);
        let saved_frames = mem::take(&mut self.frames);
        let saved_open = mem::take(&mut self.open);
        let mut result = Sig::Dead;
        for ni in 0..self.task.negatives.len() {
            let Example { input, goal } = self.task.negatives[ni].clone();
            self.probe_goal = Some(goal);
            self.conts.push(ContItem::Probe);
            let sig = self.prove_dyadic(self.target_id(), &input);
            self.conts.pop();
            self.probe_goal = None;
            match sig {
                Sig::Dead => {}
                other => {
                    result = other;
                    break;
                }
            }
        }
        self.conts = saved_conts;
        self.frames = saved_frames;
        self.open = saved_open;
        self.frozen = false;
        result
    }

    fn snapshot_program(&self) -> Program {
        let symbol_for = |cand: CandId| -> PredicateSymbol {
            if cand.0 < self.bk_len {
                self.bk.symbol(PredId(cand.0)).clone()
            } else if cand.0 == self.bk_len {
                PredicateSymbol::target(&self.task.name)
            } else {
                PredicateSymbol::invented(&self.task.name, cand.0 - self.bk_len)
            }
        };
        let mut invented = std::collections::BTreeSet::new();
        let clauses: Vec<crate::logic::Clause> = self
            .prog
            .iter()
            .map(|pc| {
                let bindings: Vec<PredicateSymbol> = pc
                    .slots
                    .iter()
                    .map(|s| {
                        let sym = symbol_for(s.expect("slot bound at accept"));
                        if sym.kind == crate::logic::PredicateKind::Invented {
                            invented.insert(sym.clone());
                        }
                        sym
                    })
                    .collect();
                let sub = MetaSub { metarule: self.rules[pc.rule as usize].clone(), bindings };
                instantiate(&sub).expect("search keeps metasubs arity-consistent")
            })
            .collect();
        Program::new(PredicateSymbol::target(&self.task.name), clauses, invented)
            .expect("search builds well-formed programs")
    }
}

/// Solves with iterative deepening over `1..=cfg.max_clauses`.
pub fn solve<S: State>(
    task: &Task<S>,
    bk: &BkRegistry<S>,
    cfg: &SolveConfig,
) -> Result<SolveOutcome, SolveError> {
    solve_with_bounds(task, bk, cfg, 1, cfg.max_clauses)
}

/// Solves with iterative deepening over an explicit clause-bound range.
/// The play loop uses this to avoid re-searching bounds it has already
/// exhausted against an unchanged registry.
pub fn solve_with_bounds<S: State>(
    task: &Task<S>,
    bk: &BkRegistry<S>,
    cfg: &SolveConfig,
    min_clauses: usize,
    max_clauses: usize,
) -> Result<SolveOutcome, SolveError> {
    if cfg.max_clauses < 1 {
        return Err(SolveError::InvalidConfig("max_clauses must be >= 1".into()));
    }
    if cfg.deadline.is_zero() {
        return Err(SolveError::InvalidConfig("deadline must be positive".into()));
    }
    let rules = metarules_by_name(&cfg.metarules)?;
    if bk.id(&task.name).is_some() {
        return Err(SolveError::NameClash(task.name.clone()));
    }

    let dyadic_cands = bk.reusable_ids(2);
    let monadic_cands = bk.reusable_ids(1);
    let start = Instant::now();
    let deadline = start + cfg.deadline;
    let step_limit = cfg.step_limit.unwrap_or(u64::MAX);

    let mut memo: HashMap<(PredId, S), Rc<[S]>> = HashMap::new();
    let mut stats = SolveStats::default();
    let mut result = SolveResult::Exhausted;
    for bound in min_clauses..=max_clauses {
        let mut searcher = Searcher {
            bk,
            bk_len: bk.len() as u32,
            task,
            rules: &rules,
            dyadic_cands: &dyadic_cands,
            monadic_cands: &monadic_cands,
            bound,
            allow_invention: cfg.allow_invention,
            frozen: false,
            deadline,
            step_limit,
            prog: Vec::new(),
            invented_count: 0,
            max_inventions: bound.saturating_sub(1) as u32,
            open: Vec::new(),
            fill_open: Vec::new(),
            conts: Vec::new(),
            frames: Vec::new(),
            collect: Vec::new(),
            probe_goal: None,
            memo: &mut memo,
            stats: SolveStats { steps: stats.steps, ..SolveStats::default() },
            solution: None,
        };
        let sig = searcher.prove_examples(0);
        stats.steps = searcher.stats.steps;
        stats.clauses_tried += searcher.stats.clauses_tried;
        stats.candidates_checked += searcher.stats.candidates_checked;
        match sig {
            Sig::Found => {
                result = SolveResult::Solution(
                    searcher.solution.take().expect("solution recorded on Found"),
                );
                break;
            }
            Sig::Abort => {
                result = SolveResult::TimedOut;
                break;
            }
            Sig::Dead => {}
        }
    }
    stats.elapsed = start.elapsed();
    Ok(SolveOutcome { result, stats })
}
