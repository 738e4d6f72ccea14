//! String transformation domain.
//!
//! A state is the unconsumed input suffix plus the output emitted so far.
//! The four dyadic primitives each consume exactly the head symbol; the
//! twelve monadic tests inspect it (or emptiness). Example atoms f(x, y)
//! put x in the initial state and constrain only the emitted output, since
//! transformations may leave input unconsumed.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{BkRegistry, Example, Primitive, State, Task};

/// Metarules the string experiments run with.
pub const METARULES: [&str; 4] = ["precon", "postcon", "chain", "tailrec"];

/// The 18 punctuation symbols that round the alphabet out to exactly 80.
pub const PUNCTUATION: &str = r#"<>+-_.,:;!?"'()@/\"#;

/// Play-task inputs are 3..=20 symbols long and generating programs take
/// 3..=20 primitive steps.
pub const MIN_INPUT_LEN: usize = 3;
pub const MAX_INPUT_LEN: usize = 20;
pub const MIN_PROGRAM_LEN: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StringState {
    pub remaining: String,
    pub emitted: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StringError {
    #[error("string contains non-ASCII byte at {0}")]
    NonAscii(usize),
}

impl StringState {
    /// Initial state for an input string. Symbols outside the generator
    /// alphabet are admitted, but only single-byte (ASCII) ones.
    pub fn initial(input: &str) -> Result<Self, StringError> {
        if let Some(pos) = input.bytes().position(|b| !b.is_ascii()) {
            return Err(StringError::NonAscii(pos));
        }
        Ok(StringState { remaining: input.to_string(), emitted: String::new() })
    }

    fn head(&self) -> Option<u8> {
        self.remaining.bytes().next()
    }

    fn consume(&self, emit: Option<u8>) -> StringState {
        let mut emitted = self.emitted.clone();
        if let Some(c) = emit {
            emitted.push(c as char);
        }
        StringState { remaining: self.remaining[1..].to_string(), emitted }
    }
}

impl State for StringState {
    /// Examples constrain the emitted output only; remaining input is free.
    type Goal = String;

    fn satisfies(&self, goal: &Self::Goal) -> bool {
        self.emitted == *goal
    }
}

pub const DYADIC_PRIMS: [&str; 4] = ["copy1", "skip1", "mk_uppercase", "mk_lowercase"];
pub const MONADIC_PRIMS: [&str; 12] = [
    "empty",
    "space",
    "letter",
    "number",
    "uppercase",
    "lowercase",
    "not_empty",
    "not_space",
    "not_letter",
    "not_number",
    "not_uppercase",
    "not_lowercase",
];

fn copy1(s: &StringState) -> Option<StringState> {
    s.head().map(|c| s.consume(Some(c)))
}

fn skip1(s: &StringState) -> Option<StringState> {
    s.head().map(|_| s.consume(None))
}

fn mk_uppercase(s: &StringState) -> Option<StringState> {
    match s.head() {
        Some(c) if c.is_ascii_alphabetic() => Some(s.consume(Some(c.to_ascii_uppercase()))),
        _ => None,
    }
}

fn mk_lowercase(s: &StringState) -> Option<StringState> {
    match s.head() {
        Some(c) if c.is_ascii_alphabetic() => Some(s.consume(Some(c.to_ascii_lowercase()))),
        _ => None,
    }
}

fn empty(s: &StringState) -> bool {
    s.remaining.is_empty()
}
fn space(s: &StringState) -> bool {
    s.head() == Some(b' ')
}
fn letter(s: &StringState) -> bool {
    s.head().is_some_and(|c| c.is_ascii_alphabetic())
}
fn number(s: &StringState) -> bool {
    s.head().is_some_and(|c| c.is_ascii_digit())
}
fn uppercase(s: &StringState) -> bool {
    s.head().is_some_and(|c| c.is_ascii_uppercase())
}
fn lowercase(s: &StringState) -> bool {
    s.head().is_some_and(|c| c.is_ascii_lowercase())
}
fn not_empty(s: &StringState) -> bool {
    !s.remaining.is_empty()
}
fn not_space(s: &StringState) -> bool {
    s.head().is_some_and(|c| c != b' ')
}
fn not_letter(s: &StringState) -> bool {
    s.head().is_some_and(|c| !c.is_ascii_alphabetic())
}
fn not_number(s: &StringState) -> bool {
    s.head().is_some_and(|c| !c.is_ascii_digit())
}
fn not_uppercase(s: &StringState) -> bool {
    s.head().is_some_and(|c| !c.is_ascii_uppercase())
}
fn not_lowercase(s: &StringState) -> bool {
    s.head().is_some_and(|c| !c.is_ascii_lowercase())
}

/// Looks up a dyadic primitive by name (used by the generator's witnesses).
pub fn dyadic_by_name(name: &str) -> Option<fn(&StringState) -> Option<StringState>> {
    match name {
        "copy1" => Some(copy1),
        "skip1" => Some(skip1),
        "mk_uppercase" => Some(mk_uppercase),
        "mk_lowercase" => Some(mk_lowercase),
        _ => None,
    }
}

/// Runs a monadic test by name.
pub fn monadic_by_name(name: &str) -> Option<fn(&StringState) -> bool> {
    match name {
        "empty" => Some(empty),
        "space" => Some(space),
        "letter" => Some(letter),
        "number" => Some(number),
        "uppercase" => Some(uppercase),
        "lowercase" => Some(lowercase),
        "not_empty" => Some(not_empty),
        "not_space" => Some(not_space),
        "not_letter" => Some(not_letter),
        "not_number" => Some(not_number),
        "not_uppercase" => Some(not_uppercase),
        "not_lowercase" => Some(not_lowercase),
        _ => None,
    }
}

/// A registry holding the twelve monadic tests and four dyadic primitives.
pub fn registry() -> BkRegistry<StringState> {
    let mut bk = BkRegistry::new();
    for name in MONADIC_PRIMS {
        bk.register_primitive(name, Primitive::Test(monadic_by_name(name).unwrap()))
            .expect("fresh registry");
    }
    for name in DYADIC_PRIMS {
        bk.register_primitive(name, Primitive::Transform(dyadic_by_name(name).unwrap()))
            .expect("fresh registry");
    }
    bk
}

/// The 80-symbol alphabet: a-z, A-Z, 0-9, and 18 punctuation symbols.
#[derive(Debug, Clone)]
pub struct Alphabet {
    symbols: Vec<u8>,
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::standard()
    }
}

impl Alphabet {
    pub fn standard() -> Self {
        let mut symbols: Vec<u8> = Vec::with_capacity(80);
        symbols.extend(b'a'..=b'z');
        symbols.extend(b'A'..=b'Z');
        symbols.extend(b'0'..=b'9');
        symbols.extend(PUNCTUATION.bytes());
        debug_assert_eq!(symbols.len(), 80);
        Alphabet { symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = char> + '_ {
        self.symbols.iter().map(|&b| b as char)
    }

    pub fn contains(&self, c: char) -> bool {
        c.is_ascii() && self.symbols.contains(&(c as u8))
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> char {
        self.symbols[rng.random_range(0..self.symbols.len())] as char
    }

    pub fn sample_string<R: Rng>(&self, rng: &mut R, len: usize) -> String {
        (0..len).map(|_| self.sample(rng)).collect()
    }

    fn sample_letter<R: Rng>(&self, rng: &mut R) -> char {
        // letters occupy the first 52 slots
        self.symbols[rng.random_range(0..52)] as char
    }
}

/// A generated play task along with the primitive sequence that produced
/// its output; replaying the witness on the input must reproduce it.
#[derive(Debug, Clone)]
pub struct GeneratedTask {
    pub task: Task<StringState>,
    pub input: String,
    pub output: String,
    pub witness: Vec<&'static str>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("gave up generating a play task after {attempts} attempts")]
pub struct GenError {
    pub attempts: usize,
}

const MAX_GEN_ATTEMPTS: usize = 1000;

/// Generates one play task: a random input of length 3..=20, a random
/// consistent primitive sequence of 3..=max_program_len steps, and the
/// output it produces. Resamples when the drawn step count exceeds the
/// input length (no consistent sequence exists: every step consumes one
/// symbol) or when the output would be empty.
pub fn generate_play_task<R: Rng>(
    name: &str,
    alphabet: &Alphabet,
    rng: &mut R,
    max_program_len: usize,
) -> Result<GeneratedTask, GenError> {
    for _ in 0..MAX_GEN_ATTEMPTS {
        let l = rng.random_range(MIN_INPUT_LEN..=MAX_INPUT_LEN);
        let input = alphabet.sample_string(rng, l);
        let p = rng.random_range(MIN_PROGRAM_LEN..=max_program_len);
        if p > l {
            continue;
        }
        let mut state = StringState::initial(&input).expect("alphabet is ascii");
        let mut witness: Vec<&'static str> = Vec::with_capacity(p);
        for _ in 0..p {
            let mut applicable: Vec<&'static str> = vec!["copy1", "skip1"];
            if letter(&state) {
                applicable.push("mk_uppercase");
                applicable.push("mk_lowercase");
            }
            let step = applicable[rng.random_range(0..applicable.len())];
            state = dyadic_by_name(step).unwrap()(&state).expect("precondition checked");
            witness.push(step);
        }
        let output = state.emitted;
        if output.is_empty() {
            continue;
        }
        let task = Task::new(
            name,
            vec![Example {
                input: StringState::initial(&input).unwrap(),
                goal: output.clone(),
            }],
            vec![],
        )
        .expect("single positive example");
        return Ok(GeneratedTask { task, input, output, witness });
    }
    Err(GenError { attempts: MAX_GEN_ATTEMPTS })
}

/// Replays a witness sequence on an input string.
pub fn replay_witness(input: &str, witness: &[&str]) -> Option<String> {
    let mut state = StringState::initial(input).ok()?;
    for step in witness {
        state = dyadic_by_name(step)?(&state)?;
    }
    Some(state.emitted)
}

/// On-disk record for string tasks: a name plus input/output pairs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct StringTaskRecord {
    pub name: String,
    pub examples: Vec<(String, String)>,
}

/// Witness sidecar record emitted next to generated play-task files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct WitnessRecord {
    pub name: String,
    pub input: String,
    pub output: String,
    pub witness: Vec<String>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {0}: {1}")]
    Json(usize, serde_json::Error),
    #[error("line {0}: duplicate task name {1:?}")]
    DuplicateName(usize, String),
    #[error("line {0}: task {1:?} has {2} examples, need at least 2")]
    TooFewExamples(usize, String, usize),
    #[error("line {0}: task {1:?}: {2}")]
    BadString(usize, String, StringError),
    #[error("line {0}: task name {1:?} is not a valid identifier")]
    BadName(usize, String),
}

/// An ingested build task: the parsed record plus its example atoms.
#[derive(Debug, Clone)]
pub struct StringTask {
    pub name: String,
    pub examples: Vec<Example<StringState>>,
}

impl StringTask {
    /// A task over a chosen subset of example indices (e.g. a train split).
    pub fn subset_task(&self, indices: &[usize]) -> Task<StringState> {
        let positives = indices.iter().map(|&i| self.examples[i].clone()).collect();
        Task::new(&self.name, positives, vec![]).expect("non-empty subset")
    }
}

/// Parses a line-delimited build-task file.
pub fn ingest_build_tasks(text: &str) -> Result<Vec<StringTask>, IngestError> {
    let mut tasks: Vec<StringTask> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: StringTaskRecord =
            serde_json::from_str(line).map_err(|e| IngestError::Json(i + 1, e))?;
        if crate::logic::PredicateSymbol::new(&rec.name, 2, crate::logic::PredicateKind::LearnedTarget)
            .is_err()
        {
            return Err(IngestError::BadName(i + 1, rec.name));
        }
        if tasks.iter().any(|t| t.name == rec.name) {
            return Err(IngestError::DuplicateName(i + 1, rec.name));
        }
        if rec.examples.len() < 2 {
            return Err(IngestError::TooFewExamples(i + 1, rec.name, rec.examples.len()));
        }
        let mut examples = Vec::with_capacity(rec.examples.len());
        for (input, output) in &rec.examples {
            let state = StringState::initial(input)
                .and_then(|s| {
                    // outputs must be representable too
                    StringState::initial(output)?;
                    Ok(s)
                })
                .map_err(|e| IngestError::BadString(i + 1, rec.name.clone(), e))?;
            examples.push(Example { input: state, goal: output.clone() });
        }
        tasks.push(StringTask { name: rec.name, examples });
    }
    Ok(tasks)
}

/// Renders tasks in the line-delimited record format.
pub fn write_task_records(records: &[StringTaskRecord]) -> String {
    let mut out = String::new();
    for rec in records {
        out.push_str(&serde_json::to_string(rec).unwrap());
        out.push('\n');
    }
    out
}

/// Generates a multi-example corpus in the build-task shape: each task
/// draws one primitive sequence, then inputs whose consumed positions
/// satisfy the sequence's class constraints, so one witness covers every
/// example.
pub fn generate_build_corpus<R: Rng>(
    alphabet: &Alphabet,
    rng: &mut R,
    task_count: usize,
    examples_per_task: usize,
) -> Vec<StringTaskRecord> {
    let mut records = Vec::with_capacity(task_count);
    for t in 0..task_count {
        let name = format!("synth_{}", t + 1);
        let steps: Vec<&'static str> = loop {
            let p = rng.random_range(MIN_PROGRAM_LEN..=8);
            let steps: Vec<&'static str> = (0..p)
                .map(|_| {
                    let all = ["copy1", "skip1", "mk_uppercase", "mk_lowercase"];
                    all[rng.random_range(0..all.len())]
                })
                .collect();
            if steps.iter().any(|s| *s != "skip1") {
                break steps;
            }
        };
        let mut examples = Vec::with_capacity(examples_per_task);
        for _ in 0..examples_per_task {
            let l = rng.random_range(steps.len().max(MIN_INPUT_LEN)..=MAX_INPUT_LEN);
            let input: String = (0..l)
                .map(|i| {
                    if i < steps.len() && (steps[i] == "mk_uppercase" || steps[i] == "mk_lowercase")
                    {
                        alphabet.sample_letter(rng)
                    } else {
                        alphabet.sample(rng)
                    }
                })
                .collect();
            let output = replay_witness(&input, &steps).expect("inputs satisfy constraints");
            examples.push((input, output));
        }
        records.push(StringTaskRecord { name, examples });
    }
    records
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn play_9_shape() {
        // skip1 then mk_uppercase turns ".f\73\R)" into "F".
        let s = StringState::initial(r".f\73\R)").unwrap();
        let s = skip1(&s).unwrap();
        let s = mk_uppercase(&s).unwrap();
        assert_eq!(s.emitted, "F");
        assert_eq!(s.remaining, r"\73\R)");
    }

    #[test]
    fn primitives_fail_on_empty() {
        let s = StringState::initial("").unwrap();
        for name in DYADIC_PRIMS {
            assert!(dyadic_by_name(name).unwrap()(&s).is_none());
        }
    }

    #[test]
    fn mk_uppercase_is_identity_on_uppercase() {
        let s = StringState::initial("Qk-").unwrap();
        let t = mk_uppercase(&s).unwrap();
        assert_eq!(t.emitted, "Q");
        assert!(mk_uppercase(&skip1(&skip1(&s).unwrap()).unwrap()).is_none());
    }

    #[test]
    fn monadic_tests_on_heads() {
        let s = StringState::initial("Qk-").unwrap();
        assert!(uppercase(&s));
        assert!(!lowercase(&s));
        assert!(letter(&s));
        assert!(not_number(&s));
        let e = StringState::initial("").unwrap();
        assert!(empty(&e));
        assert!(!not_empty(&e));
        // negations are false on empty input too
        assert!(!not_space(&e));
        assert!(!not_letter(&e));
    }

    #[test]
    fn alphabet_partition() {
        let alphabet = Alphabet::standard();
        assert_eq!(alphabet.len(), 80);
        for c in alphabet.symbols() {
            let s = StringState::initial(&c.to_string()).unwrap();
            let classes =
                [space(&s), letter(&s), number(&s), !space(&s) && !letter(&s) && !number(&s)];
            assert_eq!(classes.iter().filter(|x| **x).count(), 1, "symbol {c:?}");
            assert_eq!(uppercase(&s) || lowercase(&s), letter(&s), "symbol {c:?}");
        }
    }

    #[test]
    fn generator_respects_witness_and_rejection_rules() {
        let alphabet = Alphabet::standard();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in 0..100 {
            let generated =
                generate_play_task(&format!("play_{i}"), &alphabet, &mut rng, MAX_INPUT_LEN)
                    .unwrap();
            assert!(!generated.output.is_empty());
            assert!(generated.input.len() >= MIN_INPUT_LEN);
            assert!(generated.input.len() <= MAX_INPUT_LEN);
            assert_eq!(
                replay_witness(&generated.input, &generated.witness),
                Some(generated.output.clone())
            );
        }
    }

    #[test]
    fn ingest_rejects_bad_records() {
        assert!(ingest_build_tasks("not json\n").is_err());
        let dup = concat!(
            r#"{"name":"t_1","examples":[["a","a"],["b","b"]]}"#,
            "\n",
            r#"{"name":"t_1","examples":[["a","a"],["b","b"]]}"#,
            "\n"
        );
        assert!(matches!(ingest_build_tasks(dup), Err(IngestError::DuplicateName(2, _))));
        let few = r#"{"name":"t_1","examples":[["a","a"]]}"#;
        assert!(matches!(ingest_build_tasks(few), Err(IngestError::TooFewExamples(1, _, 1))));
        assert!(ingest_build_tasks("").unwrap().is_empty());
    }

    #[test]
    fn corpus_roundtrip() {
        let alphabet = Alphabet::standard();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let records = generate_build_corpus(&alphabet, &mut rng, 5, 10);
        let text = write_task_records(&records);
        let tasks = ingest_build_tasks(&text).unwrap();
        assert_eq!(tasks.len(), 5);
        for (task, rec) in tasks.iter().zip(&records) {
            assert_eq!(task.name, rec.name);
            assert_eq!(task.examples.len(), 10);
        }
    }
}
