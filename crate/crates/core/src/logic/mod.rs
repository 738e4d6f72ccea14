//! Predicates, metarules, metasubstitutions, clauses, and programs.
//!
//! Everything here is symbolic (names, not interned ids) and immutable once
//! built. The search engine compiles these structures into a flat id-based
//! form before solving; this module is the human-facing layer with the text
//! format used for program listings and persisted background knowledge.

mod parse;

pub use parse::{parse_program, ParseError};

use std::collections::BTreeSet;
use std::fmt;

use smallvec::SmallVec;
use thiserror::Error;

/// Maximum predicate arity supported anywhere in the system.
pub const MAX_ARITY: u8 = 2;

/// How a predicate symbol came to exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PredicateKind {
    /// Supplied by a domain as an executable relation.
    Primitive,
    /// Head of a task solved by the learner (play or build target).
    LearnedTarget,
    /// Introduced by the learner to decompose a target.
    Invented,
}

/// A named predicate with arity 1 or 2.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredicateSymbol {
    pub name: String,
    pub arity: u8,
    pub kind: PredicateKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SymbolError {
    #[error("predicate name {0:?} is not a valid identifier (lowercase letter followed by [a-zA-Z0-9_])")]
    BadName(String),
    #[error("arity {1} out of range for predicate {0:?} (must be 1 or 2)")]
    BadArity(String, u8),
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl PredicateSymbol {
    pub fn new(name: &str, arity: u8, kind: PredicateKind) -> Result<Self, SymbolError> {
        if !valid_name(name) {
            return Err(SymbolError::BadName(name.to_string()));
        }
        if arity == 0 || arity > MAX_ARITY {
            return Err(SymbolError::BadArity(name.to_string(), arity));
        }
        Ok(PredicateSymbol { name: name.to_string(), arity, kind })
    }

    pub fn primitive(name: &str, arity: u8) -> Self {
        Self::new(name, arity, PredicateKind::Primitive).expect("valid primitive symbol")
    }

    pub fn target(name: &str) -> Self {
        Self::new(name, 2, PredicateKind::LearnedTarget).expect("valid target symbol")
    }

    pub fn invented(parent: &str, k: u32) -> Self {
        Self::new(&format!("{parent}_{k}"), 2, PredicateKind::Invented)
            .expect("valid invented symbol")
    }
}

impl fmt::Display for PredicateSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// First-order variables are positional within a clause: A=0, B=1, C=2, ...
pub fn var_name(v: u8) -> char {
    (b'A' + v) as char
}

/// A literal template inside a metarule: a second-order predicate slot
/// applied to first-order variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TemplateLit {
    /// Index of the second-order variable (P=0, Q=1, R=2, ...).
    pub pred: u8,
    pub vars: SmallVec<[u8; 2]>,
}

impl TemplateLit {
    fn new(pred: u8, vars: &[u8]) -> Self {
        TemplateLit { pred, vars: SmallVec::from_slice(vars) }
    }
}

/// Metarule class bounds: body length at most `max_body` (j) and literal
/// arity at most `max_arity` (i).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetaRuleClass {
    pub max_arity: u8,
    pub max_body: u8,
}

/// A second-order clause template. Second-order variables range over
/// predicate symbols, first-order variables over domain constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaRule {
    pub name: String,
    pub head: TemplateLit,
    pub body: Vec<TemplateLit>,
    pub class: MetaRuleClass,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetaRuleError {
    #[error("metarule {0}: body has {1} literals, class allows at most {2}")]
    BodyTooLong(String, usize, u8),
    #[error("metarule {0}: literal arity {1} exceeds class bound {2}")]
    ArityTooLarge(String, usize, u8),
    #[error("metarule {0}: head must be dyadic")]
    NonDyadicHead(String),
    #[error("metarule {0}: literal argument is unbound at execution time (variable {1})")]
    UnboundAtExecution(String, char),
    #[error("metarule {0}: head output variable never bound by the body")]
    OutputNeverBound(String),
}

impl MetaRule {
    /// Builds and validates a metarule.
    ///
    /// Beyond the class bounds, this checks the template is executable by
    /// forward chaining: walking body literals left to right with the head's
    /// first variable bound, every monadic argument and every dyadic first
    /// argument must already be bound, and the head's second variable must be
    /// bound once the body is exhausted. All shipped metarules satisfy this.
    pub fn new(
        name: &str,
        head: TemplateLit,
        body: Vec<TemplateLit>,
        class: MetaRuleClass,
    ) -> Result<Self, MetaRuleError> {
        let rule = MetaRule { name: name.to_string(), head, body, class };
        rule.validate()?;
        Ok(rule)
    }

    fn validate(&self) -> Result<(), MetaRuleError> {
        let name = || self.name.clone();
        if self.body.len() > self.class.max_body as usize {
            return Err(MetaRuleError::BodyTooLong(name(), self.body.len(), self.class.max_body));
        }
        for lit in std::iter::once(&self.head).chain(&self.body) {
            if lit.vars.len() > self.class.max_arity as usize {
                return Err(MetaRuleError::ArityTooLarge(name(), lit.vars.len(), self.class.max_arity));
            }
        }
        if self.head.vars.len() != 2 {
            return Err(MetaRuleError::NonDyadicHead(name()));
        }
        let mut bound = 1u32 << self.head.vars[0];
        for lit in &self.body {
            match lit.vars.as_slice() {
                [v] => {
                    if bound & (1 << v) == 0 {
                        return Err(MetaRuleError::UnboundAtExecution(name(), var_name(*v)));
                    }
                }
                [vin, vout] => {
                    if bound & (1 << vin) == 0 {
                        return Err(MetaRuleError::UnboundAtExecution(name(), var_name(*vin)));
                    }
                    bound |= 1 << vout;
                }
                _ => unreachable!("arity checked above"),
            }
        }
        if bound & (1 << self.head.vars[1]) == 0 {
            return Err(MetaRuleError::OutputNeverBound(name()));
        }
        Ok(())
    }

    /// Number of distinct second-order variables in the template.
    pub fn second_order_count(&self) -> usize {
        std::iter::once(&self.head)
            .chain(&self.body)
            .map(|l| l.pred as usize + 1)
            .max()
            .unwrap_or(0)
    }

    /// Arity a bound symbol must have for the given second-order variable.
    pub fn slot_arity(&self, slot: u8) -> Option<u8> {
        std::iter::once(&self.head)
            .chain(&self.body)
            .find(|l| l.pred == slot)
            .map(|l| l.vars.len() as u8)
    }
}

impl fmt::Display for MetaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lit = |l: &TemplateLit| {
            let vars: Vec<String> = l.vars.iter().map(|v| var_name(*v).to_string()).collect();
            format!("{}({})", (b'P' + l.pred) as char, vars.join(","))
        };
        let body: Vec<String> = self.body.iter().map(lit).collect();
        write!(f, "{}: {} <- {}", self.name, lit(&self.head), body.join(","))
    }
}

/// The standard metarule catalogue. `ident`, `precon`, `postcon`, `chain`,
/// and `tailrec` cover both shipped domains; domains select subsets by name.
pub fn catalogue() -> Vec<MetaRule> {
    let class = MetaRuleClass { max_arity: 2, max_body: 2 };
    let rule = |name, head, body: Vec<TemplateLit>| {
        MetaRule::new(name, head, body, class).expect("catalogue rules are valid")
    };
    vec![
        // P(A,B) <- Q(A,B)
        rule("ident", TemplateLit::new(0, &[0, 1]), vec![TemplateLit::new(1, &[0, 1])]),
        // P(A,B) <- Q(A),R(A,B)
        rule(
            "precon",
            TemplateLit::new(0, &[0, 1]),
            vec![TemplateLit::new(1, &[0]), TemplateLit::new(2, &[0, 1])],
        ),
        // P(A,B) <- Q(A,B),R(B)
        rule(
            "postcon",
            TemplateLit::new(0, &[0, 1]),
            vec![TemplateLit::new(1, &[0, 1]), TemplateLit::new(2, &[1])],
        ),
        // P(A,B) <- Q(A,C),R(C,B)
        rule(
            "chain",
            TemplateLit::new(0, &[0, 1]),
            vec![TemplateLit::new(1, &[0, 2]), TemplateLit::new(2, &[2, 1])],
        ),
        // P(A,B) <- Q(A,C),P(C,B)
        rule(
            "tailrec",
            TemplateLit::new(0, &[0, 1]),
            vec![TemplateLit::new(1, &[0, 2]), TemplateLit::new(0, &[2, 1])],
        ),
    ]
}

/// Looks up catalogue metarules by name, preserving the requested order.
pub fn metarules_by_name(names: &[String]) -> Result<Vec<MetaRule>, UnknownMetaRule> {
    let all = catalogue();
    names
        .iter()
        .map(|n| {
            all.iter()
                .find(|r| &r.name == n)
                .cloned()
                .ok_or_else(|| UnknownMetaRule(n.clone()))
        })
        .collect()
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown metarule {0:?}")]
pub struct UnknownMetaRule(pub String);

/// A total binding of a metarule's second-order variables to symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaSub {
    pub metarule: MetaRule,
    pub bindings: Vec<PredicateSymbol>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstantiateError {
    #[error("metasub for {rule}: {given} bindings given, {needed} second-order variables")]
    NotTotal { rule: String, given: usize, needed: usize },
    #[error("metasub for {rule}: symbol {symbol} has arity {actual}, slot requires {required}")]
    ArityMismatch { rule: String, symbol: String, actual: u8, required: u8 },
}

/// Applies a metasubstitution, yielding a first-order clause.
pub fn instantiate(metasub: &MetaSub) -> Result<Clause, InstantiateError> {
    let rule = &metasub.metarule;
    let needed = rule.second_order_count();
    if metasub.bindings.len() != needed {
        return Err(InstantiateError::NotTotal {
            rule: rule.name.clone(),
            given: metasub.bindings.len(),
            needed,
        });
    }
    let resolve = |lit: &TemplateLit| -> Result<Lit, InstantiateError> {
        let sym = &metasub.bindings[lit.pred as usize];
        if sym.arity as usize != lit.vars.len() {
            return Err(InstantiateError::ArityMismatch {
                rule: rule.name.clone(),
                symbol: sym.name.clone(),
                actual: sym.arity,
                required: lit.vars.len() as u8,
            });
        }
        Ok(Lit { pred: sym.clone(), vars: lit.vars.clone() })
    };
    Ok(Clause {
        head: resolve(&rule.head)?,
        body: rule.body.iter().map(resolve).collect::<Result<_, _>>()?,
        provenance: Some(metasub.clone()),
    })
}

/// A first-order literal: predicate applied to clause-local variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lit {
    pub pred: PredicateSymbol,
    pub vars: SmallVec<[u8; 2]>,
}

impl Lit {
    pub fn new(pred: PredicateSymbol, vars: &[u8]) -> Self {
        Lit { pred, vars: SmallVec::from_slice(vars) }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars: Vec<String> = self.vars.iter().map(|v| var_name(*v).to_string()).collect();
        write!(f, "{}({})", self.pred.name, vars.join(","))
    }
}

/// A definite clause. `provenance` records the metasubstitution it came
/// from, when the learner produced it; parsed clauses have none.
#[derive(Debug, Clone)]
pub struct Clause {
    pub head: Lit,
    pub body: Vec<Lit>,
    pub provenance: Option<MetaSub>,
}

impl Clause {
    /// Name/arity/variable equality, ignoring provenance and symbol kinds.
    pub fn structurally_eq(&self, other: &Clause) -> bool {
        let lit_eq = |a: &Lit, b: &Lit| {
            a.pred.name == b.pred.name && a.pred.arity == b.pred.arity && a.vars == b.vars
        };
        lit_eq(&self.head, &other.head)
            && self.body.len() == other.body.len()
            && self.body.iter().zip(&other.body).all(|(a, b)| lit_eq(a, b))
    }

    fn rename<F: Fn(&str) -> Option<String>>(&self, f: &F) -> Clause {
        let map_lit = |l: &Lit| {
            let mut pred = l.pred.clone();
            if let Some(n) = f(&pred.name) {
                pred.name = n;
            }
            Lit { pred, vars: l.vars.clone() }
        };
        Clause {
            head: map_lit(&self.head),
            body: self.body.iter().map(map_lit).collect(),
            provenance: None,
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:-", self.head)?;
        for (i, lit) in self.body.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{lit}")?;
        }
        write!(f, ".")
    }
}

/// A logic program: clauses for one target plus its invented predicates.
#[derive(Debug, Clone)]
pub struct Program {
    pub target: PredicateSymbol,
    pub clauses: Vec<Clause>,
    pub invented: BTreeSet<PredicateSymbol>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProgramError {
    #[error("program has no clauses")]
    Empty,
    #[error("clause head {0} is a primitive predicate")]
    PrimitiveHead(String),
    #[error("invented predicate {0} appears in a body but has no defining clause")]
    UndefinedInvented(String),
    #[error("target {0} has no defining clause")]
    UndefinedTarget(String),
}

impl Program {
    pub fn new(
        target: PredicateSymbol,
        clauses: Vec<Clause>,
        invented: BTreeSet<PredicateSymbol>,
    ) -> Result<Self, ProgramError> {
        let p = Program { target, clauses, invented };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<(), ProgramError> {
        if self.clauses.is_empty() {
            return Err(ProgramError::Empty);
        }
        for c in &self.clauses {
            if c.head.pred.kind == PredicateKind::Primitive {
                return Err(ProgramError::PrimitiveHead(c.head.pred.name.clone()));
            }
        }
        if !self.clauses.iter().any(|c| c.head.pred.name == self.target.name) {
            return Err(ProgramError::UndefinedTarget(self.target.name.clone()));
        }
        for inv in &self.invented {
            let used = self
                .clauses
                .iter()
                .flat_map(|c| &c.body)
                .any(|l| l.pred.name == inv.name);
            let defined = self.clauses.iter().any(|c| c.head.pred.name == inv.name);
            if used && !defined {
                return Err(ProgramError::UndefinedInvented(inv.name.clone()));
            }
        }
        Ok(())
    }

    /// All predicates defined by some clause of this program, in first
    /// occurrence order.
    pub fn defined_symbols(&self) -> Vec<&PredicateSymbol> {
        let mut out: Vec<&PredicateSymbol> = Vec::new();
        for c in &self.clauses {
            if !out.iter().any(|s| s.name == c.head.pred.name) {
                out.push(&c.head.pred);
            }
        }
        out
    }

    /// Body references to predicates not defined in this program.
    pub fn external_references(&self) -> Vec<&PredicateSymbol> {
        let defined: Vec<&str> =
            self.clauses.iter().map(|c| c.head.pred.name.as_str()).collect();
        let mut out: Vec<&PredicateSymbol> = Vec::new();
        for lit in self.clauses.iter().flat_map(|c| &c.body) {
            if !defined.contains(&lit.pred.name.as_str())
                && !out.iter().any(|s| s.name == lit.pred.name)
            {
                out.push(&lit.pred);
            }
        }
        out
    }

    pub fn structurally_eq(&self, other: &Program) -> bool {
        self.target.name == other.target.name
            && self.clauses.len() == other.clauses.len()
            && self
                .clauses
                .iter()
                .zip(&other.clauses)
                .all(|(a, b)| a.structurally_eq(b))
    }

    /// Structural equality after canonically renaming both sides' invented
    /// predicates (`inv_1`, `inv_2`, ... in first occurrence order).
    pub fn eq_up_to_invented_names(&self, other: &Program) -> bool {
        self.canonical_invented().structurally_eq(&other.canonical_invented())
    }

    fn canonical_invented(&self) -> Program {
        let mut mapping: Vec<(String, String)> = Vec::new();
        let invented: BTreeSet<&str> =
            self.invented.iter().map(|s| s.name.as_str()).collect();
        let visit = |name: &str, mapping: &mut Vec<(String, String)>| {
            if invented.contains(name) && !mapping.iter().any(|(from, _)| from == name) {
                let fresh = format!("inv_{}", mapping.len() + 1);
                mapping.push((name.to_string(), fresh));
            }
        };
        for c in &self.clauses {
            visit(&c.head.pred.name, &mut mapping);
            for l in &c.body {
                visit(&l.pred.name, &mut mapping);
            }
        }
        let rename = |name: &str| {
            mapping
                .iter()
                .find(|(from, _)| from == name)
                .map(|(_, to)| to.clone())
        };
        Program {
            target: self.target.clone(),
            clauses: self.clauses.iter().map(|c| c.rename(&rename)).collect(),
            invented: self
                .invented
                .iter()
                .map(|s| {
                    let mut s = s.clone();
                    if let Some(n) = rename(&s.name) {
                        s.name = n;
                    }
                    s
                })
                .collect(),
        }
    }

    /// Inlines invented predicates that have a single defining clause and a
    /// single body reference, repeating to fixpoint. This matches the
    /// condensed listings used for display: chains of glue predicates
    /// disappear while genuinely reused predicates stay.
    pub fn unfolded(&self) -> Program {
        let mut prog = self.clone();
        loop {
            let candidate = prog.invented.iter().cloned().find(|inv| {
                let defs =
                    prog.clauses.iter().filter(|c| c.head.pred.name == inv.name).count();
                let refs = prog
                    .clauses
                    .iter()
                    .flat_map(|c| &c.body)
                    .filter(|l| l.pred.name == inv.name)
                    .count();
                defs == 1 && refs == 1
            });
            let Some(inv) = candidate else { break };
            let def_idx =
                prog.clauses.iter().position(|c| c.head.pred.name == inv.name).unwrap();
            let def = prog.clauses.remove(def_idx);
            for clause in &mut prog.clauses {
                if let Some(li) =
                    clause.body.iter().position(|l| l.pred.name == inv.name)
                {
                    splice(clause, li, &def);
                    clause.provenance = None;
                }
            }
            prog.invented.retain(|s| s.name != inv.name);
        }
        for clause in &mut prog.clauses {
            canonicalize_vars(clause);
        }
        prog
    }
}

/// Renumbers a clause's variables in first-occurrence order (head first),
/// so spliced clauses read A, B, C, ... again.
fn canonicalize_vars(clause: &mut Clause) {
    let mut map: Vec<u8> = Vec::new();
    let mut renumber = |v: &mut u8| {
        let to = match map.iter().position(|from| from == v) {
            Some(i) => i as u8,
            None => {
                map.push(*v);
                (map.len() - 1) as u8
            }
        };
        *v = to;
    };
    for v in clause.head.vars.iter_mut() {
        renumber(v);
    }
    for lit in &mut clause.body {
        for v in lit.vars.iter_mut() {
            renumber(v);
        }
    }
}

/// Replaces `clause.body[li]` with the body of `def`, renumbering the
/// definition's internal variables to fresh indices in the caller.
fn splice(clause: &mut Clause, li: usize, def: &Clause) {
    let call = clause.body[li].clone();
    let next_free = clause
        .head
        .vars
        .iter()
        .chain(clause.body.iter().flat_map(|l| l.vars.iter()))
        .map(|v| v + 1)
        .max()
        .unwrap_or(0);
    let mut fresh = next_free;
    let mut map: Vec<(u8, u8)> = def
        .head
        .vars
        .iter()
        .zip(call.vars.iter())
        .map(|(&from, &to)| (from, to))
        .collect();
    let mut resolve = |v: u8| -> u8 {
        if let Some(&(_, to)) = map.iter().find(|(from, _)| *from == v) {
            to
        } else {
            let to = fresh;
            fresh += 1;
            map.push((v, to));
            to
        }
    };
    let spliced: Vec<Lit> = def
        .body
        .iter()
        .map(|l| Lit {
            pred: l.pred.clone(),
            vars: l.vars.iter().map(|&v| resolve(v)).collect(),
        })
        .collect();
    clause.body.splice(li..=li, spliced);
}

/// Renders a program as a deterministic clause listing, one clause per line.
pub fn render_program(program: &Program) -> Result<String, ProgramError> {
    program.check()?;
    let mut out = String::new();
    for clause in &program.clauses {
        out.push_str(&clause.to_string());
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> MetaRule {
        catalogue().into_iter().find(|r| r.name == "chain").unwrap()
    }

    #[test]
    fn catalogue_names_and_classes() {
        let names: Vec<String> = catalogue().into_iter().map(|r| r.name).collect();
        assert_eq!(names, ["ident", "precon", "postcon", "chain", "tailrec"]);
        for rule in catalogue() {
            assert!(rule.body.len() <= rule.class.max_body as usize);
            for lit in std::iter::once(&rule.head).chain(&rule.body) {
                assert!(lit.vars.len() <= rule.class.max_arity as usize);
            }
        }
    }

    #[test]
    fn instantiate_chain() {
        let sub = MetaSub {
            metarule: chain(),
            bindings: vec![
                PredicateSymbol::target("f"),
                PredicateSymbol::primitive("q", 2),
                PredicateSymbol::primitive("r", 2),
            ],
        };
        let clause = instantiate(&sub).unwrap();
        assert_eq!(clause.to_string(), "f(A,B):-q(A,C),r(C,B).");
    }

    #[test]
    fn instantiate_ident_self_binding() {
        let ident = catalogue().into_iter().find(|r| r.name == "ident").unwrap();
        let f = PredicateSymbol::target("f");
        let sub = MetaSub { metarule: ident, bindings: vec![f.clone(), f] };
        let clause = instantiate(&sub).unwrap();
        assert_eq!(clause.to_string(), "f(A,B):-f(A,B).");
    }

    #[test]
    fn instantiate_precon_by_hand() {
        // precon is P(A,B) <- Q(A),R(A,B); substituting by hand gives the
        // expected literal shapes.
        let precon = catalogue().into_iter().find(|r| r.name == "precon").unwrap();
        let sub = MetaSub {
            metarule: precon,
            bindings: vec![
                PredicateSymbol::target("f"),
                PredicateSymbol::primitive("uppercase", 1),
                PredicateSymbol::primitive("copy1", 2),
            ],
        };
        let clause = instantiate(&sub).unwrap();
        assert_eq!(clause.to_string(), "f(A,B):-uppercase(A),copy1(A,B).");
    }

    #[test]
    fn instantiate_rejects_arity_mismatch() {
        let sub = MetaSub {
            metarule: chain(),
            bindings: vec![
                PredicateSymbol::target("f"),
                PredicateSymbol::primitive("uppercase", 1),
                PredicateSymbol::primitive("r", 2),
            ],
        };
        match instantiate(&sub) {
            Err(InstantiateError::ArityMismatch { symbol, actual, required, .. }) => {
                assert_eq!(symbol, "uppercase");
                assert_eq!((actual, required), (1, 2));
            }
            other => panic!("expected arity mismatch, got {other:?}"),
        }
    }

    #[test]
    fn instantiate_rejects_partial_metasub() {
        let sub = MetaSub { metarule: chain(), bindings: vec![PredicateSymbol::target("f")] };
        assert!(matches!(instantiate(&sub), Err(InstantiateError::NotTotal { .. })));
    }

    #[test]
    fn metarule_class_bound_is_enforced() {
        let class = MetaRuleClass { max_arity: 2, max_body: 1 };
        let err = MetaRule::new(
            "twobody",
            TemplateLit::new(0, &[0, 1]),
            vec![TemplateLit::new(1, &[0, 2]), TemplateLit::new(2, &[2, 1])],
            class,
        )
        .unwrap_err();
        assert!(matches!(err, MetaRuleError::BodyTooLong(..)));
    }

    #[test]
    fn metarule_rejects_unexecutable_template() {
        // P(A,B) <- Q(B,A): Q's input is the head output, unbound at entry.
        let class = MetaRuleClass { max_arity: 2, max_body: 2 };
        let err = MetaRule::new(
            "rev",
            TemplateLit::new(0, &[0, 1]),
            vec![TemplateLit::new(1, &[1, 0])],
            class,
        )
        .unwrap_err();
        assert!(matches!(err, MetaRuleError::UnboundAtExecution(..)));
    }

    #[test]
    fn empty_program_is_rejected() {
        let err =
            Program::new(PredicateSymbol::target("f"), vec![], BTreeSet::new()).unwrap_err();
        assert_eq!(err, ProgramError::Empty);
    }

    #[test]
    fn unfold_inlines_glue_predicates() {
        // f:-grab,f2 / f2:-f1,f3 / f3:-f1,drop / f1:-up,right condenses to
        // the two-definition listing with f1 kept (referenced twice).
        let text = "f(A,B):-grab(A,C),f2(C,B).\n\
                    f2(A,B):-f1(A,C),f3(C,B).\n\
                    f3(A,B):-f1(A,C),drop(C,B).\n\
                    f1(A,B):-up(A,C),right(C,B).\n";
        let prog = parse_program(text).unwrap();
        let unfolded = prog.unfolded();
        assert_eq!(
            render_program(&unfolded).unwrap(),
            "f(A,B):-grab(A,C),f1(C,D),f1(D,E),drop(E,B).\n\
             f1(A,B):-up(A,C),right(C,B).\n"
        );
    }
}
