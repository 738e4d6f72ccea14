//! Gridworld domain: a robot and a ball in an n x n space.
//!
//! States are (robot, ball, holding) triples over 1-based coordinates;
//! holding implies the robot and ball share a cell. Six dyadic actions
//! transform the state, failing (not clipping) at walls and on violated
//! preconditions, so the learner sees meaningful preconditions.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{BkRegistry, Example, Primitive, State, Task};
use crate::interp::{InterpError, Interp};
use crate::logic::Program;

/// Metarules the gridworld experiments run with.
pub const METARULES: [&str; 2] = ["ident", "chain"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RobotState {
    pub robot: (u8, u8),
    pub ball: (u8, u8),
    pub holding: bool,
    /// Grid side length; moves failing at the walls depend on it.
    pub n: u8,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RobotStateError {
    #[error("coordinate {0:?} outside [1, {1}]^2")]
    OutOfBounds((u8, u8), u8),
    #[error("holding requires the robot and ball to share a cell")]
    HoldingApart,
}

impl RobotState {
    pub fn new(
        robot: (u8, u8),
        ball: (u8, u8),
        holding: bool,
        n: u8,
    ) -> Result<Self, RobotStateError> {
        let inside = |p: (u8, u8)| p.0 >= 1 && p.0 <= n && p.1 >= 1 && p.1 <= n;
        if !inside(robot) {
            return Err(RobotStateError::OutOfBounds(robot, n));
        }
        if !inside(ball) {
            return Err(RobotStateError::OutOfBounds(ball, n));
        }
        if holding && robot != ball {
            return Err(RobotStateError::HoldingApart);
        }
        Ok(RobotState { robot, ball, holding, n })
    }
}

impl State for RobotState {
    type Goal = RobotState;

    fn satisfies(&self, goal: &Self::Goal) -> bool {
        self == goal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Up,
    Down,
    Right,
    Left,
    Grab,
    Drop,
}

impl Action {
    /// All actions, in the order the domain registers them.
    pub const ALL: [Action; 6] =
        [Action::Up, Action::Down, Action::Right, Action::Left, Action::Grab, Action::Drop];

    pub fn name(self) -> &'static str {
        match self {
            Action::Up => "up",
            Action::Down => "down",
            Action::Right => "right",
            Action::Left => "left",
            Action::Grab => "grab",
            Action::Drop => "drop",
        }
    }

    pub fn by_name(name: &str) -> Option<Action> {
        Action::ALL.into_iter().find(|a| a.name() == name)
    }
}

/// Applies one action, or fails when its precondition does not hold.
pub fn apply_action(action: Action, s: &RobotState) -> Option<RobotState> {
    let mv = |dx: i16, dy: i16| -> Option<RobotState> {
        let x = s.robot.0 as i16 + dx;
        let y = s.robot.1 as i16 + dy;
        if x < 1 || x > s.n as i16 || y < 1 || y > s.n as i16 {
            return None;
        }
        let robot = (x as u8, y as u8);
        let ball = if s.holding { robot } else { s.ball };
        Some(RobotState { robot, ball, ..*s })
    };
    match action {
        Action::Up => mv(0, 1),
        Action::Down => mv(0, -1),
        Action::Right => mv(1, 0),
        Action::Left => mv(-1, 0),
        Action::Grab => {
            (!s.holding && s.robot == s.ball).then(|| RobotState { holding: true, ..*s })
        }
        Action::Drop => s.holding.then(|| RobotState { holding: false, ..*s }),
    }
}

fn prim_up(s: &RobotState) -> Option<RobotState> {
    apply_action(Action::Up, s)
}
fn prim_down(s: &RobotState) -> Option<RobotState> {
    apply_action(Action::Down, s)
}
fn prim_right(s: &RobotState) -> Option<RobotState> {
    apply_action(Action::Right, s)
}
fn prim_left(s: &RobotState) -> Option<RobotState> {
    apply_action(Action::Left, s)
}
fn prim_grab(s: &RobotState) -> Option<RobotState> {
    apply_action(Action::Grab, s)
}
fn prim_drop(s: &RobotState) -> Option<RobotState> {
    apply_action(Action::Drop, s)
}

/// A registry holding the six actions as dyadic primitives.
pub fn registry() -> BkRegistry<RobotState> {
    let mut bk = BkRegistry::new();
    let prims: [(&str, fn(&RobotState) -> Option<RobotState>); 6] = [
        ("up", prim_up),
        ("down", prim_down),
        ("right", prim_right),
        ("left", prim_left),
        ("grab", prim_grab),
        ("drop", prim_drop),
    ];
    for (name, f) in prims {
        bk.register_primitive(name, Primitive::Transform(f)).expect("fresh registry");
    }
    bk
}

/// Number of valid states: n^4 placements without holding plus n^2 with.
pub fn valid_state_count(n: u8) -> u64 {
    let n = n as u64;
    n.pow(4) + n.pow(2)
}

/// Decodes an index in [0, valid_state_count) into a state; the blocks are
/// non-holding states first (robot-major, then ball), then holding states.
pub fn state_from_index(n: u8, idx: u64) -> RobotState {
    let n64 = n as u64;
    let cells = n64 * n64;
    let cell = |i: u64| ((i / n64 + 1) as u8, (i % n64 + 1) as u8);
    if idx < cells * cells {
        RobotState { robot: cell(idx / cells), ball: cell(idx % cells), holding: false, n }
    } else {
        let c = cell(idx - cells * cells);
        RobotState { robot: c, ball: c, holding: true, n }
    }
}

/// Uniform draw over the valid state space.
pub fn sample_state<R: Rng>(n: u8, rng: &mut R) -> RobotState {
    state_from_index(n, rng.random_range(0..valid_state_count(n)))
}

/// One instance atom f(s1, s2): two independent uniform states. Any valid
/// state is reachable from any other, so every instance is solvable in
/// principle.
pub fn sample_instance<R: Rng>(n: u8, rng: &mut R) -> (RobotState, RobotState) {
    (sample_state(n, rng), sample_state(n, rng))
}

/// A task with a single positive example and no negatives.
pub fn sample_task<R: Rng>(name: &str, n: u8, rng: &mut R) -> Task<RobotState> {
    let (s1, s2) = sample_instance(n, rng);
    instance_task(name, s1, s2)
}

pub fn instance_task(name: &str, s1: RobotState, s2: RobotState) -> Task<RobotState> {
    Task::new(name, vec![Example { input: s1, goal: s2 }], vec![])
        .expect("one positive example")
}

/// True iff the program maps s1 to s2 under the registry.
pub fn check_solution(
    program: &Program,
    bk: &BkRegistry<RobotState>,
    s1: &RobotState,
    s2: &RobotState,
    step_budget: u64,
) -> Result<bool, InterpError> {
    let interp = Interp::new(program, bk)?;
    Ok(interp.evaluate(s1, step_budget).outputs.contains(s2))
}

/// Line format for robot task files: name, grid size, and the two states
/// as flat (robot, ball) coordinate tuples plus holding flags.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct RobotTaskRecord {
    pub name: String,
    pub n: u8,
    pub s1: [u8; 4],
    pub h1: bool,
    pub s2: [u8; 4],
    pub h2: bool,
}

#[derive(Debug, Error)]
pub enum RobotTaskFileError {
    #[error("line {0}: {1}")]
    Json(usize, serde_json::Error),
    #[error("line {0}: {1}")]
    State(usize, RobotStateError),
    #[error("line {0}: duplicate task name {1:?}")]
    DuplicateName(usize, String),
    #[error(transparent)]
    Task(#[from] crate::engine::TaskError),
}

impl RobotTaskRecord {
    pub fn from_task(task: &Task<RobotState>) -> Self {
        let ex = &task.positives[0];
        let (s1, s2) = (ex.input, ex.goal);
        RobotTaskRecord {
            name: task.name.clone(),
            n: s1.n,
            s1: [s1.robot.0, s1.robot.1, s1.ball.0, s1.ball.1],
            h1: s1.holding,
            s2: [s2.robot.0, s2.robot.1, s2.ball.0, s2.ball.1],
            h2: s2.holding,
        }
    }

    pub fn into_task(self, line: usize) -> Result<Task<RobotState>, RobotTaskFileError> {
        let state = |c: [u8; 4], h: bool| {
            RobotState::new((c[0], c[1]), (c[2], c[3]), h, self.n)
                .map_err(|e| RobotTaskFileError::State(line, e))
        };
        let s1 = state(self.s1, self.h1)?;
        let s2 = state(self.s2, self.h2)?;
        Ok(instance_task(&self.name, s1, s2))
    }
}

/// Writes tasks in the line-delimited record format.
pub fn write_tasks(tasks: &[Task<RobotState>]) -> String {
    let mut out = String::new();
    for task in tasks {
        out.push_str(&serde_json::to_string(&RobotTaskRecord::from_task(task)).unwrap());
        out.push('\n');
    }
    out
}

/// Reads tasks from the line-delimited record format.
pub fn read_tasks(text: &str) -> Result<Vec<Task<RobotState>>, RobotTaskFileError> {
    let mut tasks = Vec::new();
    let mut seen: Vec<String> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: RobotTaskRecord =
            serde_json::from_str(line).map_err(|e| RobotTaskFileError::Json(i + 1, e))?;
        if seen.contains(&rec.name) {
            return Err(RobotTaskFileError::DuplicateName(i + 1, rec.name));
        }
        seen.push(rec.name.clone());
        tasks.push(rec.into_task(i + 1)?);
    }
    Ok(tasks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(rx: u8, ry: u8, bx: u8, by: u8, h: bool, n: u8) -> RobotState {
        RobotState::new((rx, ry), (bx, by), h, n).unwrap()
    }

    #[test]
    fn moves_and_boundaries() {
        let s = st(2, 2, 4, 4, false, 5);
        let up = apply_action(Action::Up, &s).unwrap();
        assert_eq!(up.robot, (2, 3));
        assert_eq!(up.ball, (4, 4));
        assert!(apply_action(Action::Up, &st(1, 5, 3, 3, false, 5)).is_none());
    }

    #[test]
    fn grab_and_drop_preconditions() {
        let apart = st(1, 1, 2, 2, false, 5);
        assert!(apply_action(Action::Grab, &apart).is_none());
        let together = st(2, 2, 2, 2, false, 5);
        let held = apply_action(Action::Grab, &together).unwrap();
        assert!(held.holding);
        assert!(apply_action(Action::Grab, &held).is_none());
        let dropped = apply_action(Action::Drop, &held).unwrap();
        assert_eq!(dropped, together);
        assert!(apply_action(Action::Drop, &together).is_none());
    }

    #[test]
    fn holding_moves_carry_the_ball() {
        let held = apply_action(Action::Grab, &st(2, 2, 2, 2, false, 5)).unwrap();
        let moved = apply_action(Action::Right, &held).unwrap();
        assert_eq!(moved.robot, (3, 2));
        assert_eq!(moved.ball, (3, 2));
        assert!(moved.holding);
    }

    #[test]
    fn six_step_plan_shape() {
        // grab; up; right; up; right; drop moves a co-located pair two up
        // and two right.
        let start = st(2, 1, 2, 1, false, 5);
        let plan =
            [Action::Grab, Action::Up, Action::Right, Action::Up, Action::Right, Action::Drop];
        let end = plan.iter().try_fold(start, |s, a| apply_action(*a, &s)).unwrap();
        assert_eq!(end, st(4, 3, 4, 3, false, 5));
    }

    #[test]
    fn state_index_roundtrip_is_valid_and_complete() {
        for n in 2..=3u8 {
            let count = valid_state_count(n);
            let mut seen = std::collections::HashSet::new();
            for idx in 0..count {
                let s = state_from_index(n, idx);
                RobotState::new(s.robot, s.ball, s.holding, n).unwrap();
                assert!(seen.insert(s));
            }
            assert_eq!(seen.len() as u64, count);
        }
    }

    #[test]
    fn actions_preserve_validity_exhaustively() {
        for n in 2..=3u8 {
            for idx in 0..valid_state_count(n) {
                let s = state_from_index(n, idx);
                for a in Action::ALL {
                    if let Some(t) = apply_action(a, &s) {
                        RobotState::new(t.robot, t.ball, t.holding, t.n).unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn move_inverses_and_grab_drop_identity() {
        for n in 2..=3u8 {
            for idx in 0..valid_state_count(n) {
                let s = state_from_index(n, idx);
                if let Some(u) = apply_action(Action::Up, &s) {
                    assert_eq!(apply_action(Action::Down, &u), Some(s));
                }
                if let Some(r) = apply_action(Action::Right, &s) {
                    assert_eq!(apply_action(Action::Left, &r), Some(s));
                }
                if !s.holding && s.robot == s.ball {
                    let held = apply_action(Action::Grab, &s).unwrap();
                    assert_eq!(apply_action(Action::Drop, &held), Some(s));
                }
            }
        }
    }

    #[test]
    fn task_file_roundtrip() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let tasks: Vec<_> = (0..8).map(|i| sample_task(&format!("t_{i}"), 5, &mut rng)).collect();
        let text = write_tasks(&tasks);
        let back = read_tasks(&text).unwrap();
        assert_eq!(back.len(), tasks.len());
        for (a, b) in tasks.iter().zip(&back) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.positives[0], b.positives[0]);
        }
    }
}
