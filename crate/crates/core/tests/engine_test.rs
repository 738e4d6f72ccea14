//! Learner behaviour on both domains: minimal solutions, invention,
//! negatives, soundness against the independent interpreter, and agreement
//! with the brute-force oracle on micro configurations.

mod common;

use std::time::Duration;

use playgol_core::engine::{solve, Example, SolveConfig, SolveResult, Task};
use playgol_core::interp;
use playgol_core::logic::parse_program;
use playgol_core::robot::{self, RobotState};
use playgol_core::strings::{self, StringState};

fn rs(rx: u8, ry: u8, bx: u8, by: u8, h: bool) -> RobotState {
    RobotState::new((rx, ry), (bx, by), h, 5).unwrap()
}

fn cfg(metarules: &[&str], max_clauses: usize) -> SolveConfig {
    SolveConfig::new(metarules, max_clauses, Duration::from_secs(30))
}

fn string_task(name: &str, pairs: &[(&str, &str)], negatives: &[(&str, &str)]) -> Task<StringState> {
    let ex = |(x, y): &(&str, &str)| Example {
        input: StringState::initial(x).unwrap(),
        goal: y.to_string(),
    };
    Task::new(name, pairs.iter().map(ex).collect(), negatives.iter().map(ex).collect()).unwrap()
}

#[test]
fn single_primitive_solution_via_ident() {
    let bk = robot::registry();
    let s1 = rs(2, 2, 4, 4, false);
    let s2 = rs(2, 3, 4, 4, false);
    let task = robot::instance_task("f", s1, s2);
    let outcome = solve(&task, &bk, &cfg(&robot::METARULES, 3)).unwrap();
    let program = outcome.solution().expect("one move up is learnable");
    assert_eq!(
        playgol_core::logic::render_program(program).unwrap(),
        "f(A,B):-up(A,B).\n"
    );
}

#[test]
fn figure_style_plan_with_invention() {
    // Final state reachable by grab; (up; right); (up; right); drop.
    let s1 = rs(2, 1, 2, 1, false);
    let s2 = rs(4, 3, 4, 3, false);
    let bk = robot::registry();
    let task = robot::instance_task("f", s1, s2);
    let outcome = solve(&task, &bk, &cfg(&robot::METARULES, 5)).unwrap();
    let program = outcome.solution().expect("six-step plan is learnable");

    // Raw form: four metasubstitutions, three of them defining inventions.
    assert_eq!(program.clauses.len(), 4);
    assert!(program.invented.len() <= program.clauses.len() - 1);

    // Condensed, the program is the two-definition listing with a single
    // twice-used invented predicate covering the repeated diagonal move.
    let unfolded = program.unfolded();
    assert_eq!(unfolded.clauses.len(), 2);
    assert_eq!(unfolded.invented.len(), 1);
    let expected_a = parse_program(
        "f(A,B):-grab(A,C),f1(C,D),f1(D,E),drop(E,B).\nf1(A,B):-up(A,C),right(C,B).\n",
    )
    .unwrap();
    let expected_b = parse_program(
        "f(A,B):-grab(A,C),f1(C,D),f1(D,E),drop(E,B).\nf1(A,B):-right(A,C),up(C,B).\n",
    )
    .unwrap();
    assert!(
        unfolded.eq_up_to_invented_names(&expected_a)
            || unfolded.eq_up_to_invented_names(&expected_b),
        "got {}",
        playgol_core::logic::render_program(&unfolded).unwrap()
    );

    // Soundness: the raw solution passes the independent interpreter.
    assert!(interp::verify(program, &task, &bk, 1_000_000).unwrap().is_pass());
    assert!(robot::check_solution(program, &bk, &s1, &s2, 1_000_000).unwrap());
}

#[test]
fn play_9_shape_is_one_chain_clause() {
    let bk = strings::registry();
    let task = string_task("play_9", &[(r".f\73\R)", "F")], &[]);
    let outcome = solve(&task, &bk, &cfg(&strings::METARULES, 3)).unwrap();
    let program = outcome.solution().expect("skip then uppercase");
    assert_eq!(
        playgol_core::logic::render_program(program).unwrap(),
        "play_9(A,B):-skip1(A,C),mk_uppercase(C,B).\n"
    );
}

#[test]
fn negative_examples_force_preconditions() {
    let bk = strings::registry();
    let task = string_task("f", &[("ab", "a")], &[("1y", "1")]);
    let outcome = solve(&task, &bk, &cfg(&strings::METARULES, 2)).unwrap();
    let program = outcome.solution().expect("letter-guarded copy");
    assert_eq!(
        playgol_core::logic::render_program(program).unwrap(),
        "f(A,B):-letter(A),copy1(A,B).\n"
    );
    assert!(interp::verify(program, &task, &bk, 100_000).unwrap().is_pass());
}

#[test]
fn recursive_solution_via_tailrec() {
    // Copy everything: needs the recursive clause plus a base case.
    let bk = strings::registry();
    let task = string_task("f", &[("abc", "abc"), ("zx", "zx")], &[]);
    let outcome = solve(&task, &bk, &cfg(&strings::METARULES, 3)).unwrap();
    let program = outcome.solution().expect("copy-all is learnable");
    assert!(interp::verify(program, &task, &bk, 100_000).unwrap().is_pass());
    // generalises to unseen lengths
    let longer = Example {
        input: StringState::initial("hello").unwrap(),
        goal: "hello".to_string(),
    };
    let interp = interp::Interp::new(program, &bk).unwrap();
    assert!(matches!(interp.example_holds(&longer, 100_000), interp::Verdict::Pass));
}

#[test]
fn exhausted_when_bound_too_small() {
    let bk = strings::registry();
    // Four emissions cannot come from one clause with at most two dyadic
    // literals and no recursion base.
    let task = string_task("f", &[("abcd", "abcd")], &[("ab", "a")]);
    let outcome = solve(&task, &bk, &cfg(&["precon", "postcon", "chain"], 1)).unwrap();
    assert!(matches!(outcome.result, SolveResult::Exhausted));
}

#[test]
fn step_limit_times_out_deterministically() {
    let bk = robot::registry();
    let task = robot::instance_task("f", rs(1, 1, 5, 5, false), rs(5, 5, 1, 1, false));
    let mut config = cfg(&robot::METARULES, 5);
    config.step_limit = Some(20_000);
    let a = solve(&task, &bk, &config).unwrap();
    let b = solve(&task, &bk, &config).unwrap();
    assert!(a.is_timeout());
    assert_eq!(a.label(), b.label());
    assert_eq!(a.stats.steps, b.stats.steps);
}

#[test]
fn deadline_monotonicity_under_step_limits() {
    let bk = robot::registry();
    let task = robot::instance_task("f", rs(2, 1, 2, 1, false), rs(4, 3, 4, 3, false));
    let mut small = cfg(&robot::METARULES, 5);
    small.step_limit = Some(50_000_000);
    let a = solve(&task, &bk, &small).unwrap();
    let program_a = a.solution().expect("solvable within the step limit");
    let mut large = small.clone();
    large.step_limit = Some(500_000_000);
    let b = solve(&task, &bk, &large).unwrap();
    let program_b = b.solution().expect("still solvable");
    assert!(program_a.structurally_eq(program_b));
}

#[test]
fn determinism_of_solve() {
    let bk = strings::registry();
    let task = string_task("f", &[("aBcD", "BD")], &[]);
    let config = cfg(&strings::METARULES, 4);
    let a = solve(&task, &bk, &config).unwrap();
    let b = solve(&task, &bk, &config).unwrap();
    match (&a.result, &b.result) {
        (SolveResult::Solution(pa), SolveResult::Solution(pb)) => {
            assert!(pa.structurally_eq(pb));
            assert_eq!(a.stats.steps, b.stats.steps);
        }
        _ => panic!("expected solutions, got {} / {}", a.label(), b.label()),
    }
}

#[test]
fn unknown_metarule_and_name_clash_errors() {
    let bk = strings::registry();
    let task = string_task("f", &[("ab", "a")], &[]);
    assert!(solve(&task, &bk, &cfg(&["zigzag"], 2)).is_err());
    let clash = string_task("copy1", &[("ab", "a")], &[]);
    assert!(solve(&clash, &bk, &cfg(&strings::METARULES, 2)).is_err());
}

#[test]
fn solve_agrees_with_enumeration_oracle_on_micro_domain() {
    // p <= 4 primitives, m <= 2 metarules, n <= 2 clauses, tiny inputs:
    // exact agreement on solvability and minimal clause count.
    use rand::Rng;
    let mut bk = playgol_core::engine::BkRegistry::new();
    for name in ["copy1", "skip1", "mk_uppercase", "mk_lowercase"] {
        bk.register_primitive(
            name,
            playgol_core::engine::Primitive::Transform(strings::dyadic_by_name(name).unwrap()),
        )
        .unwrap();
    }
    let metarules: Vec<String> = vec!["ident".into(), "chain".into()];
    let mut rng = playgol_core::util::rng_for(31, &[7]);
    let alphabet = strings::Alphabet::standard();
    let mut solvable = 0;
    for i in 0..60 {
        let len = rng.random_range(1..=3);
        let input = alphabet.sample_string(&mut rng, len);
        let out_len = rng.random_range(0..=len);
        let output: String = if rng.random_range(0..2) == 0 {
            // arbitrary target output, often unsolvable
            alphabet.sample_string(&mut rng, out_len)
        } else {
            // prefix-case-mangled output, usually solvable
            input
                .chars()
                .take(out_len.max(1))
                .map(|c| if rng.random_range(0..2) == 0 { c.to_ascii_uppercase() } else { c })
                .collect()
        };
        let task = string_task(&format!("t_{i}"), &[(input.as_str(), output.as_str())], &[]);
        let expected = common::oracle_min_clauses(&task, &bk, &metarules, 2, 1_000_000);
        let mut config = SolveConfig::new(&["ident", "chain"], 2, Duration::from_secs(60));
        config.metarules = metarules.clone();
        let outcome = solve(&task, &bk, &config).unwrap();
        match (&outcome.result, expected) {
            (SolveResult::Solution(p), Some(n)) => {
                assert_eq!(p.clauses.len(), n, "task {input:?} -> {output:?}");
                solvable += 1;
            }
            (SolveResult::Exhausted, None) => {}
            (got, want) => panic!(
                "disagreement on {input:?} -> {output:?}: engine {}, oracle {want:?}",
                match got {
                    SolveResult::Solution(p) => format!("solved with {}", p.clauses.len()),
                    other => format!("{other:?}"),
                }
            ),
        }
    }
    assert!(solvable >= 10, "fixture should include solvable tasks, got {solvable}");
}

#[test]
fn soundness_on_generated_string_tasks() {
    // Generated tasks carry a witness, so solvability is known in
    // principle; whenever the engine solves one, the independent
    // interpreter must accept the solution.
    let bk = strings::registry();
    let alphabet = strings::Alphabet::standard();
    let mut rng = playgol_core::util::rng_for(17, &[3]);
    let mut config = cfg(&strings::METARULES, 3);
    config.deadline = Duration::from_millis(600);
    let mut solved = 0;
    for i in 0..40 {
        let generated =
            strings::generate_play_task(&format!("play_{i}"), &alphabet, &mut rng, 20).unwrap();
        let outcome = solve(&generated.task, &bk, &config).unwrap();
        if let Some(program) = outcome.solution() {
            solved += 1;
            assert!(
                interp::verify(program, &generated.task, &bk, 1_000_000).unwrap().is_pass(),
                "engine solution failed independent verification on {}",
                generated.input
            );
        }
    }
    assert!(solved >= 5, "expected some of the generated tasks to be easy, got {solved}");
}
