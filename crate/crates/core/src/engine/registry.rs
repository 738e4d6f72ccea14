//! Background knowledge: primitives plus learned programs, compiled for
//! execution.
//!
//! A registry is built single-threaded (primitives first, then learned
//! programs in acquisition order) and then shared immutably by any number
//! of concurrent solvers. Body references in a registered program must
//! resolve against symbols already present or defined by the program
//! itself, so references always point backwards in acquisition order; the
//! search engine's memoisation relies on that.

use std::collections::HashMap;

use smallvec::SmallVec;
use thiserror::Error;

use super::State;
use crate::logic::{PredicateKind, PredicateSymbol, Program};

/// Index of a predicate within its registry, in insertion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredId(pub u32);

/// An executable primitive relation. Monadic primitives test a state,
/// dyadic primitives deterministically transform one (or fail).
#[derive(Clone, Copy)]
pub enum Primitive<S> {
    Test(fn(&S) -> bool),
    Transform(fn(&S) -> Option<S>),
}

impl<S> Primitive<S> {
    fn arity(&self) -> u8 {
        match self {
            Primitive::Test(_) => 1,
            Primitive::Transform(_) => 2,
        }
    }
}

impl<S> std::fmt::Debug for Primitive<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Primitive::Test(_) => write!(f, "Test(..)"),
            Primitive::Transform(_) => write!(f, "Transform(..)"),
        }
    }
}

/// A clause compiled to registry ids with canonical head variables (A,B).
#[derive(Debug, Clone)]
pub struct CompiledClause {
    pub body: SmallVec<[CompiledLit; 2]>,
    pub nvars: u8,
}

#[derive(Debug, Clone)]
pub struct CompiledLit {
    pub pred: PredId,
    pub vars: SmallVec<[u8; 2]>,
}

#[derive(Debug)]
pub(crate) enum Def<S> {
    Primitive(Primitive<S>),
    Clauses(Vec<CompiledClause>),
}

#[derive(Debug)]
pub(crate) struct Entry<S> {
    pub(crate) symbol: PredicateSymbol,
    pub(crate) def: Def<S>,
    pub(crate) reusable: bool,
}

/// A learned program together with how it was acquired, kept for listing
/// persistence and reports.
#[derive(Debug, Clone)]
pub struct SavedProgram {
    pub program: Program,
    pub depth: u32,
    pub steps: u64,
    pub reusable_invented: bool,
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("predicate {0:?} is already registered")]
    Duplicate(String),
    #[error(transparent)]
    Symbol(#[from] crate::logic::SymbolError),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("body predicate {0:?} is not registered and not defined by the program")]
    Unresolved(String),
    #[error("predicate {name:?} used at arity {used}, registered at arity {registered}")]
    ArityMismatch { name: String, used: u8, registered: u8 },
    #[error("clause head must have canonical variables (A,B), got {0}")]
    NonCanonicalHead(String),
    #[error("clause {0} is not executable left to right (unbound argument)")]
    NotExecutable(String),
    #[error("clause {0} never binds the head output variable")]
    OutputNeverBound(String),
}

/// Primitive predicates plus learned programs, with reusability flags.
#[derive(Debug)]
pub struct BkRegistry<S: State> {
    entries: Vec<Entry<S>>,
    by_name: HashMap<String, PredId>,
    saved: Vec<SavedProgram>,
}

impl<S: State> Default for BkRegistry<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: State> BkRegistry<S> {
    pub fn new() -> Self {
        BkRegistry { entries: Vec::new(), by_name: HashMap::new(), saved: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<PredId> {
        self.by_name.get(name).copied()
    }

    pub fn symbol(&self, id: PredId) -> &PredicateSymbol {
        &self.entries[id.0 as usize].symbol
    }

    pub fn is_reusable(&self, id: PredId) -> bool {
        self.entries[id.0 as usize].reusable
    }

    pub(crate) fn entry(&self, id: PredId) -> &Entry<S> {
        &self.entries[id.0 as usize]
    }

    /// Learned programs in acquisition order.
    pub fn saved_programs(&self) -> &[SavedProgram] {
        &self.saved
    }

    /// Reusable symbols of the given arity, in insertion order.
    pub fn reusable_ids(&self, arity: u8) -> Vec<PredId> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.reusable && e.symbol.arity == arity)
            .map(|(i, _)| PredId(i as u32))
            .collect()
    }

    pub fn register_primitive(
        &mut self,
        name: &str,
        prim: Primitive<S>,
    ) -> Result<PredId, RegistryError> {
        let symbol = PredicateSymbol::new(name, prim.arity(), PredicateKind::Primitive)?;
        self.insert(Entry { symbol, def: Def::Primitive(prim), reusable: true })
    }

    /// Registers a learned program: the target and every invented predicate
    /// become callable, the target becomes reusable, and invented predicates
    /// become reusable only when `reusable_invented` is set (the full mode;
    /// the nopi ablation passes false).
    pub fn register_program(
        &mut self,
        saved: SavedProgram,
    ) -> Result<(), RegistryError> {
        let program = &saved.program;
        let defined: Vec<&PredicateSymbol> = program.defined_symbols();
        for sym in &defined {
            if self.by_name.contains_key(&sym.name) {
                return Err(RegistryError::Duplicate(sym.name.clone()));
            }
        }
        // Pre-assign ids for the program's own symbols so bodies can refer
        // to them (including recursion), then compile each clause group.
        let base = self.entries.len() as u32;
        let resolve = |name: &str| {
            defined
                .iter()
                .position(|s| s.name == name)
                .map(|i| (PredId(base + i as u32), defined[i].arity))
                .or_else(|| self.id(name).map(|id| (id, self.symbol(id).arity)))
        };
        let mut groups: Vec<Vec<CompiledClause>> = vec![Vec::new(); defined.len()];
        for clause in &program.clauses {
            let compiled = compile_clause(clause, resolve)?;
            let slot = defined.iter().position(|s| s.name == clause.head.pred.name).unwrap();
            groups[slot].push(compiled);
        }
        let symbols: Vec<PredicateSymbol> = defined.into_iter().cloned().collect();
        for (sym, clauses) in symbols.into_iter().zip(groups) {
            let reusable = sym.kind != PredicateKind::Invented || saved.reusable_invented;
            self.insert(Entry { symbol: sym, def: Def::Clauses(clauses), reusable })?;
        }
        self.saved.push(saved);
        Ok(())
    }

    fn insert(&mut self, entry: Entry<S>) -> Result<PredId, RegistryError> {
        if self.by_name.contains_key(&entry.symbol.name) {
            return Err(RegistryError::Duplicate(entry.symbol.name.clone()));
        }
        let id = PredId(self.entries.len() as u32);
        self.by_name.insert(entry.symbol.name.clone(), id);
        self.entries.push(entry);
        Ok(id)
    }
}

/// Compiles a symbolic clause against a name resolver (which also reports
/// the symbol's registered arity), enforcing canonical head variables,
/// arity agreement, and left-to-right executability.
pub(crate) fn compile_clause(
    clause: &crate::logic::Clause,
    resolve: impl Fn(&str) -> Option<(PredId, u8)>,
) -> Result<CompiledClause, CompileError> {
    if clause.head.vars.as_slice() != [0, 1] {
        return Err(CompileError::NonCanonicalHead(clause.to_string()));
    }
    let mut body = SmallVec::new();
    let mut nvars = 2u8;
    let mut bound = 0b01u32; // A
    for lit in &clause.body {
        let (pred, arity) = resolve(&lit.pred.name)
            .ok_or_else(|| CompileError::Unresolved(lit.pred.name.clone()))?;
        if arity as usize != lit.vars.len() {
            return Err(CompileError::ArityMismatch {
                name: lit.pred.name.clone(),
                used: lit.vars.len() as u8,
                registered: arity,
            });
        }
        match lit.vars.as_slice() {
            [v] => {
                if bound & (1 << v) == 0 {
                    return Err(CompileError::NotExecutable(clause.to_string()));
                }
            }
            [vin, vout] => {
                if bound & (1 << vin) == 0 {
                    return Err(CompileError::NotExecutable(clause.to_string()));
                }
                bound |= 1 << vout;
            }
            _ => return Err(CompileError::NotExecutable(clause.to_string())),
        }
        nvars = nvars.max(lit.vars.iter().map(|v| v + 1).max().unwrap_or(0));
        body.push(CompiledLit { pred, vars: lit.vars.clone() });
    }
    if bound & 0b10 == 0 {
        return Err(CompileError::OutputNeverBound(clause.to_string()));
    }
    Ok(CompiledClause { body, nvars })
}
