//! Program interpretation independent of the learner.
//!
//! This is a straightforward set-based evaluator over a fixed program plus
//! registry. It shares the derivability semantics of the search engine (a
//! derivation may not revisit a (predicate, state) pair already open on its
//! own path) but none of its machinery, so it serves as a cross-check on
//! solutions and as the scorer for held-out examples.

use smallvec::{smallvec, SmallVec};
use thiserror::Error;

use crate::engine::registry_internal::{CompiledClause, Def};
use crate::engine::{BkRegistry, Example, PredId, Primitive, State, Task};
use crate::logic::Program;

/// Derivations deeper than this are abandoned as truncated.
const MAX_DEPTH: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Every positive example derivable, no negative example derivable.
    Pass,
    /// Some positive underivable or some negative derivable, decisively.
    Fail,
    /// The step budget ran out before a decision; callers treat this as a
    /// failed verification.
    Unknown,
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Output states reachable from one input, with a truncation flag set when
/// the step budget (or depth cap) cut enumeration short.
#[derive(Debug, Clone)]
pub struct Evaluation<S> {
    pub outputs: Vec<S>,
    pub truncated: bool,
}

#[derive(Debug, Error)]
pub enum InterpError {
    #[error("predicate {0:?} is not defined by the program or the registry")]
    Undefined(String),
    #[error("predicate {name:?} used at arity {used}, defined at arity {defined}")]
    ArityMismatch { name: String, used: u8, defined: u8 },
    #[error("clause {0} is not executable left to right")]
    NotExecutable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Id {
    Reg(PredId),
    Local(u32),
}

struct ILit {
    pred: Id,
    vars: SmallVec<[u8; 2]>,
}

struct IClause {
    body: Vec<ILit>,
    nvars: u8,
}

enum ClauseView<'b> {
    Local(&'b IClause),
    Bk(&'b CompiledClause),
}

impl ClauseView<'_> {
    fn nvars(&self) -> u8 {
        match self {
            ClauseView::Local(c) => c.nvars,
            ClauseView::Bk(c) => c.nvars,
        }
    }

    fn body_len(&self) -> usize {
        match self {
            ClauseView::Local(c) => c.body.len(),
            ClauseView::Bk(c) => c.body.len(),
        }
    }

    fn lit(&self, i: usize) -> (Id, &[u8]) {
        match self {
            ClauseView::Local(c) => (c.body[i].pred, &c.body[i].vars),
            ClauseView::Bk(c) => (Id::Reg(c.body[i].pred), &c.body[i].vars),
        }
    }
}

struct Budget {
    steps: u64,
    truncated: bool,
}

impl Budget {
    fn spend(&mut self) -> bool {
        if self.steps == 0 {
            self.truncated = true;
            false
        } else {
            self.steps -= 1;
            true
        }
    }
}

/// A program compiled against a registry, ready to evaluate inputs.
pub struct Interp<'a, S: State> {
    bk: &'a BkRegistry<S>,
    local_names: Vec<String>,
    local_clauses: Vec<Vec<IClause>>,
    target: u32,
}

impl<'a, S: State> Interp<'a, S> {
    pub fn new(program: &Program, bk: &'a BkRegistry<S>) -> Result<Self, InterpError> {
        let local_names: Vec<String> =
            program.defined_symbols().iter().map(|s| s.name.clone()).collect();
        let resolve = |name: &str| -> Option<Id> {
            local_names
                .iter()
                .position(|n| n == name)
                .map(|i| Id::Local(i as u32))
                .or_else(|| bk.id(name).map(Id::Reg))
        };
        let arity_of = |id: Id| -> u8 {
            match id {
                Id::Local(_) => 2,
                Id::Reg(pid) => bk.symbol(pid).arity,
            }
        };
        let mut local_clauses: Vec<Vec<IClause>> =
            local_names.iter().map(|_| Vec::new()).collect();
        for clause in &program.clauses {
            if clause.head.vars.as_slice() != [0, 1] {
                return Err(InterpError::NotExecutable(clause.to_string()));
            }
            let mut body = Vec::with_capacity(clause.body.len());
            let mut nvars = 2u8;
            let mut bound = 0b01u32;
            for lit in &clause.body {
                let pred = resolve(&lit.pred.name)
                    .ok_or_else(|| InterpError::Undefined(lit.pred.name.clone()))?;
                if arity_of(pred) as usize != lit.vars.len() {
                    return Err(InterpError::ArityMismatch {
                        name: lit.pred.name.clone(),
                        used: lit.vars.len() as u8,
                        defined: arity_of(pred),
                    });
                }
                match *lit.vars.as_slice() {
                    [v] => {
                        if bound & (1 << v) == 0 {
                            return Err(InterpError::NotExecutable(clause.to_string()));
                        }
                    }
                    [vin, vout] => {
                        if bound & (1 << vin) == 0 {
                            return Err(InterpError::NotExecutable(clause.to_string()));
                        }
                        bound |= 1 << vout;
                    }
                    _ => return Err(InterpError::NotExecutable(clause.to_string())),
                }
                nvars = nvars.max(lit.vars.iter().map(|v| v + 1).max().unwrap_or(0));
                body.push(ILit { pred, vars: lit.vars.clone() });
            }
            if bound & 0b10 == 0 {
                return Err(InterpError::NotExecutable(clause.to_string()));
            }
            let slot = local_names
                .iter()
                .position(|n| n == &clause.head.pred.name)
                .expect("head is a defined symbol");
            local_clauses[slot].push(IClause { body, nvars });
        }
        let target = local_names
            .iter()
            .position(|n| n == &program.target.name)
            .expect("target is defined") as u32;
        Ok(Interp { bk, local_names, local_clauses, target })
    }

    pub fn local_names(&self) -> &[String] {
        &self.local_names
    }

    /// Enumerates the target's reachable outputs on `input`.
    pub fn evaluate(&self, input: &S, step_budget: u64) -> Evaluation<S> {
        let mut budget = Budget { steps: step_budget, truncated: false };
        let mut visiting: Vec<(Id, S)> = Vec::new();
        let outputs = self.derive(Id::Local(self.target), input, &mut budget, &mut visiting);
        Evaluation { outputs, truncated: budget.truncated }
    }

    /// Whether the example's atom is derivable. `Unknown` when enumeration
    /// was truncated without finding a satisfying output.
    pub fn example_holds(&self, example: &Example<S>, step_budget: u64) -> Verdict {
        let ev = self.evaluate(&example.input, step_budget);
        if ev.outputs.iter().any(|o| o.satisfies(&example.goal)) {
            Verdict::Pass
        } else if ev.truncated {
            Verdict::Unknown
        } else {
            Verdict::Fail
        }
    }

    fn clauses_of(&self, id: Id) -> Option<Vec<ClauseView<'_>>> {
        match id {
            Id::Local(i) => {
                Some(self.local_clauses[i as usize].iter().map(ClauseView::Local).collect())
            }
            Id::Reg(pid) => match &self.bk.entry(pid).def {
                Def::Clauses(cs) => Some(cs.iter().map(ClauseView::Bk).collect()),
                Def::Primitive(_) => None,
            },
        }
    }

    fn derive(&self, id: Id, input: &S, budget: &mut Budget, visiting: &mut Vec<(Id, S)>) -> Vec<S> {
        if !budget.spend() {
            return Vec::new();
        }
        if let Id::Reg(pid) = id {
            match &self.bk.entry(pid).def {
                Def::Primitive(Primitive::Transform(f)) => {
                    return f(input).into_iter().collect()
                }
                Def::Primitive(Primitive::Test(_)) => return Vec::new(),
                Def::Clauses(_) => {}
            }
        }
        if visiting.len() >= MAX_DEPTH {
            budget.truncated = true;
            return Vec::new();
        }
        if visiting.iter().any(|(v, s)| *v == id && s == input) {
            return Vec::new();
        }
        visiting.push((id, input.clone()));
        let clauses = self.clauses_of(id).expect("clausal predicate");
        let mut outs: Vec<S> = Vec::new();
        for clause in &clauses {
            let mut states: Vec<SmallVec<[Option<S>; 4]>> = Vec::new();
            let mut init: SmallVec<[Option<S>; 4]> = smallvec![None; clause.nvars() as usize];
            init[0] = Some(input.clone());
            states.push(init);
            for li in 0..clause.body_len() {
                if states.is_empty() {
                    break;
                }
                let (pred, vars_pat) = clause.lit(li);
                let mut next: Vec<SmallVec<[Option<S>; 4]>> = Vec::new();
                match *vars_pat {
                    [v] => {
                        for vars in states.drain(..) {
                            if !budget.spend() {
                                break;
                            }
                            let s = vars[v as usize].as_ref().expect("bound monadic arg");
                            if self.monadic_holds(pred, s) {
                                next.push(vars);
                            }
                        }
                    }
                    [vin, vout] => {
                        for vars in states.drain(..) {
                            if !budget.spend() {
                                break;
                            }
                            let s = vars[vin as usize].clone().expect("bound input arg");
                            for out in self.derive(pred, &s, budget, visiting) {
                                match &vars[vout as usize] {
                                    Some(existing) => {
                                        if *existing == out {
                                            next.push(vars.clone());
                                        }
                                    }
                                    None => {
                                        let mut v2 = vars.clone();
                                        v2[vout as usize] = Some(out);
                                        next.push(v2);
                                    }
                                }
                            }
                        }
                    }
                    _ => unreachable!("arity checked at compile"),
                }
                states = next;
            }
            for vars in states {
                if let Some(out) = vars[1].clone() {
                    if !outs.contains(&out) {
                        outs.push(out);
                    }
                }
            }
        }
        visiting.pop();
        outs
    }

    fn monadic_holds(&self, id: Id, s: &S) -> bool {
        match id {
            Id::Reg(pid) => match &self.bk.entry(pid).def {
                Def::Primitive(Primitive::Test(t)) => t(s),
                _ => false,
            },
            Id::Local(_) => false,
        }
    }
}

/// Enumerates the outputs of `program` on `input` within the step budget.
pub fn evaluate<S: State>(
    program: &Program,
    bk: &BkRegistry<S>,
    input: &S,
    step_budget: u64,
) -> Result<Evaluation<S>, InterpError> {
    Ok(Interp::new(program, bk)?.evaluate(input, step_budget))
}

/// Checks the program against a task's examples with a per-atom budget.
pub fn verify<S: State>(
    program: &Program,
    task: &Task<S>,
    bk: &BkRegistry<S>,
    step_budget: u64,
) -> Result<Verdict, InterpError> {
    let interp = Interp::new(program, bk)?;
    let mut unknown = false;
    for pos in &task.positives {
        match interp.example_holds(pos, step_budget) {
            Verdict::Pass => {}
            Verdict::Fail => return Ok(Verdict::Fail),
            Verdict::Unknown => unknown = true,
        }
    }
    for neg in &task.negatives {
        match interp.example_holds(neg, step_budget) {
            Verdict::Pass => return Ok(Verdict::Fail), // negative derivable
            Verdict::Fail => {}
            Verdict::Unknown => unknown = true,
        }
    }
    Ok(if unknown { Verdict::Unknown } else { Verdict::Pass })
}
